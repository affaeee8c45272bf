"""Verilog-AMS emission of trained network metamodels.

Exports ANN weights as four whitespace-separated text files (w1, w2, b1,
b2) in the exact order the emitted module's reader loop consumes them, and
emits a behavioral macromodule whose initial block reconstructs circuit
parameters from those files. Input and output scaling is folded into the
exported weights, so the emitted code operates directly on raw design
variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .metamodel import AnnModel
from .scaling import Scaler

__all__ = [
    "WeightBundle", "MacromodelSpec",
    "fold_scalers", "export_weights", "import_weights", "emit_vams_module",
]

_FMT = "{:.17g}"  # round-trip exact for doubles

CPM_KEYS = ("gm", "ip", "in")


def _parse_payload(text: str, expected: int, label: str) -> np.ndarray:
    tokens = text.split()
    if len(tokens) != expected:
        raise DataFormatError(
            f"{label}: expected {expected} values, got {len(tokens)}"
        )
    try:
        values = np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise DataFormatError(f"{label}: non-numeric token ({exc})") from None
    if not np.all(np.isfinite(values)):
        raise DataFormatError(f"{label}: non-finite value")
    return values


@dataclass(frozen=True)
class WeightBundle:
    """The four text payloads of one exported network.

    w1 streams the hidden-layer weight matrix in reader order (outer loop
    over hidden neurons, inner loop over inputs); w2 and b1 hold one value
    per hidden neuron; b2 holds the single output bias. `nl` is the hidden
    size, `size_x` the input dimension.
    """

    w1: str
    w2: str
    b1: str
    b2: str
    nl: int
    size_x: int
    prefix: str = ""

    def __post_init__(self):
        self.values()  # validate counts and finiteness eagerly

    def file_names(self) -> dict[str, str]:
        return {name: f"{self.prefix}{name}.txt"
                for name in ("w1", "w2", "b1", "b2")}

    def values(self):
        """Parsed (W1, W2, b1, b2) arrays; W1 is (nl, size_x)."""
        names = self.file_names()
        w1 = _parse_payload(self.w1, self.nl * self.size_x, names["w1"])
        w2 = _parse_payload(self.w2, self.nl, names["w2"])
        b1 = _parse_payload(self.b1, self.nl, names["b1"])
        b2 = _parse_payload(self.b2, 1, names["b2"])
        return w1.reshape(self.nl, self.size_x), w2, b1, float(b2[0])

    def write(self, directory) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name, payload in (("w1", self.w1), ("w2", self.w2),
                              ("b1", self.b1), ("b2", self.b2)):
            path = directory / f"{self.prefix}{name}.txt"
            path.write_text(payload)
            written.append(path)
        return written

    @classmethod
    def from_dir(cls, directory, nl: int, size_x: int,
                 prefix: str = "") -> "WeightBundle":
        directory = Path(directory)
        payloads = {}
        for name in ("w1", "w2", "b1", "b2"):
            path = directory / f"{prefix}{name}.txt"
            if not path.exists():
                raise DataFormatError(f"missing weight file {path}")
            payloads[name] = path.read_text()
        return cls(nl=nl, size_x=size_x, prefix=prefix, **payloads)


def fold_scalers(model: AnnModel) -> AnnModel:
    """Algebraically absorb scalers and steepness into the weights.

    The returned model predicts identically (to rounding) but carries
    identity scalers and steepness 1, matching what the emitted reader
    loop computes: v = sum_j w2[j] * tanh(b1[j] + W1[j] . x), v + b2.
    """
    s_in = model.input_scaler
    s_out = model.output_scaler
    lam = model.steepness

    gain = 1.0 / s_in.scale            # x' = gain * x + offset
    offset = -s_in.shift / s_in.scale
    w1 = lam * model.W1 * gain[None, :]
    b1 = lam * (model.b1 + model.W1 @ offset)

    a = float(s_out.scale[0])          # y = a * z + c undoes output scaling
    c = float(s_out.shift[0])
    w2 = a * model.W2
    b2 = a * model.b2 + c

    return AnnModel(
        input_dim=model.input_dim, hidden_size=model.hidden_size,
        activation=model.activation, W1=w1, b1=b1, W2=w2, b2=b2,
        input_scaler=Scaler.identity(model.input_dim),
        output_scaler=Scaler.identity(1),
        steepness=1.0, role=model.role, response_name=model.response_name,
    )


def export_weights(model: AnnModel, destination,
                   prefix: str = "") -> WeightBundle:
    """Write the four weight files for `model` under `destination`.

    Values are emitted one per line at full round-trip precision. Scalers
    are folded first so the files describe a raw-unit network. Only tanh
    models are exportable; the emitted reader hard-codes tanh.
    """
    if model.activation != "tanh":
        raise ValueError(
            f"cannot export {model.activation!r} model: the emitted module "
            "computes tanh hidden units"
        )
    folded = fold_scalers(model)

    def lines(values) -> str:
        return "\n".join(_FMT.format(v) for v in np.ravel(values)) + "\n"

    bundle = WeightBundle(
        w1=lines(folded.W1),           # row-major: neuron-major, input-minor
        w2=lines(folded.W2),
        b1=lines(folded.b1),
        b2=lines([folded.b2]),
        nl=model.hidden_size, size_x=model.input_dim, prefix=prefix,
    )
    bundle.write(destination)
    return bundle


def import_weights(bundle: WeightBundle, activation: str = "tanh",
                   input_scaler: Scaler | None = None,
                   output_scaler: Scaler | None = None,
                   response_name: str = "", role: str = "CPM") -> AnnModel:
    """Reconstruct an AnnModel from a weight bundle.

    By default the model has identity scalers and steepness 1, i.e. it
    computes exactly what the emitted Verilog-AMS reader computes.
    """
    w1, w2, b1, b2 = bundle.values()
    return AnnModel(
        input_dim=bundle.size_x, hidden_size=bundle.nl,
        activation=activation, W1=w1, b1=b1, W2=w2, b2=b2,
        input_scaler=input_scaler or Scaler.identity(bundle.size_x),
        output_scaler=output_scaler or Scaler.identity(1),
        steepness=1.0, role=role, response_name=response_name,
    )


@dataclass(frozen=True)
class MacromodelSpec:
    """What to emit: module identity, ports, design variables, the three
    circuit-parameter models, and the small-signal transfer placeholder.

    `hs_numerator`/`hs_denominator` are the ascending-power coefficient
    lists handed to laplace_nd; the default is a unity-gain single pole.
    """

    module_name: str
    variable_names: tuple[str, ...]
    parameter_defaults: tuple[float, ...]
    cpms: dict[str, AnnModel]
    ports: tuple[str, ...] = ("inp", "inn", "out")
    hs_numerator: tuple[float, ...] = (1.0,)
    hs_denominator: tuple[float, ...] = (1.0, 1.59155e-05)

    def __post_init__(self):
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        object.__setattr__(self, "parameter_defaults",
                           tuple(float(v) for v in self.parameter_defaults))
        object.__setattr__(self, "ports", tuple(self.ports))
        object.__setattr__(self, "hs_numerator", tuple(self.hs_numerator))
        object.__setattr__(self, "hs_denominator", tuple(self.hs_denominator))
        if len(self.variable_names) != len(self.parameter_defaults):
            raise ValueError("one default per design variable required")
        if len(self.ports) < 3:
            raise ValueError("need at least two inputs and one output port")
        missing = [k for k in CPM_KEYS if k not in self.cpms]
        if missing:
            raise ValueError(f"missing circuit-parameter models: {missing}")
        n = len(self.variable_names)
        for key, model in self.cpms.items():
            if model.input_dim != n:
                raise ValueError(
                    f"CPM {key!r} takes {model.input_dim} inputs, module "
                    f"has {n} design variables"
                )


def _nn_function(name: str, bundle: WeightBundle) -> list[str]:
    files = bundle.file_names()
    body = [
        f"\tfunction real {name};",
        "\t\tinteger w1, w2, b1, b2, i, j, readfile;",
        "\t\treal w, b, v, u;",
        "\t\t// Read metamodel weights and biases from text files",
        f"\t\t// {files['w1']}, {files['w2']}, {files['b1']}, {files['b2']}.",
        "\t\tbegin",
        f"\t\t\tw1 = $fopen(\"{files['w1']}\", \"r\");",
        f"\t\t\tw2 = $fopen(\"{files['w2']}\", \"r\");",
        f"\t\t\tb1 = $fopen(\"{files['b1']}\", \"r\");",
        f"\t\t\tb2 = $fopen(\"{files['b2']}\", \"r\");",
        "\t\t\tv = 0.0;",
        f"\t\t\tfor (j = 0; j < {bundle.nl}; j = j + 1)",
        "\t\t\tbegin",
        "\t\t\t\tu = 0.0;",
        f"\t\t\t\tfor (i = 0; i < {bundle.size_x}; i = i + 1)",
        "\t\t\t\tbegin",
        "\t\t\t\t\treadfile = $fscanf(w1, \"%g\", w);",
        "\t\t\t\t\tu = u + w * x[i];",
        "\t\t\t\tend",
        "\t\t\t\treadfile = $fscanf(w2, \"%g\", w);",
        "\t\t\t\treadfile = $fscanf(b1, \"%g\", b);",
        "\t\t\t\tv = v + w * tanh(u + b);",
        "\t\t\tend",
        "\t\t\treadfile = $fscanf(b2, \"%g\", b);",
        f"\t\t\t{name} = v + b;",
        "\t\t\t$fclose(w1);",
        "\t\t\t$fclose(w2);",
        "\t\t\t$fclose(b1);",
        "\t\t\t$fclose(b2);",
        "\t\tend",
        "\tendfunction",
    ]
    return body


def emit_vams_module(spec: MacromodelSpec,
                     bundles: dict[str, WeightBundle]) -> str:
    """Render the Verilog-AMS macromodule text.

    One reader function per circuit parameter (gm, ip, in), invoked from
    the initial block; the analog block realizes the two-stage model with
    current limiting and a laplace_nd small-signal section. Deterministic:
    identical inputs yield byte-identical text.
    """
    for key in CPM_KEYS:
        if key not in bundles:
            raise ValueError(f"missing weight bundle for {key!r}")
        if (bundles[key].nl != spec.cpms[key].hidden_size
                or bundles[key].size_x != spec.cpms[key].input_dim):
            raise ValueError(f"bundle dimensions for {key!r} do not match model")

    n_vars = len(spec.variable_names)
    inp, inn, out = spec.ports[0], spec.ports[1], spec.ports[2]
    num = ", ".join(_FMT.format(v) for v in spec.hs_numerator)
    den = ", ".join(_FMT.format(v) for v in spec.hs_denominator)

    lines: list[str] = []
    lines.append("// Parameterized behavioral macromodel with embedded")
    lines.append("// neural-network circuit-parameter models. Generated file.")
    lines.append("`include \"constants.vams\"")
    lines.append("`include \"disciplines.vams\"")
    lines.append("")
    lines.append(f"module {spec.module_name}({', '.join(spec.ports)});")
    lines.append(f"\tinout {', '.join(spec.ports)};")
    lines.append(f"\telectrical {', '.join(spec.ports)};")
    lines.append("")
    lines.append("\t// design variables")
    for name, default in zip(spec.variable_names, spec.parameter_defaults):
        lines.append(f"\tparameter real {name} = {_FMT.format(default)};")
    lines.append("")
    lines.append(f"\treal x[0:{n_vars - 1}];")
    lines.append("\treal gm_val, ip_val, in_val;")
    lines.append("\treal i_stage1;")
    lines.append("")
    for key in CPM_KEYS:
        lines.extend(_nn_function(f"nn_metamodel_{key}", bundles[key]))
        lines.append("")
    lines.append("\tinitial begin")
    for i, name in enumerate(spec.variable_names):
        lines.append(f"\t\tx[{i}] = {name};")
    lines.append("\t\tgm_val = nn_metamodel_gm();")
    lines.append("\t\tip_val = nn_metamodel_ip();")
    lines.append("\t\tin_val = nn_metamodel_in();")
    lines.append("\tend")
    lines.append("")
    lines.append("\tanalog begin")
    lines.append(f"\t\ti_stage1 = gm_val * V({inp}, {inn});")
    lines.append("\t\tif (i_stage1 > ip_val)")
    lines.append("\t\t\ti_stage1 = ip_val;")
    lines.append("\t\tif (i_stage1 < -in_val)")
    lines.append("\t\t\ti_stage1 = -in_val;")
    lines.append(f"\t\tV({out}) <+ laplace_nd(i_stage1, {{{num}}}, {{{den}}});")
    lines.append("\tend")
    lines.append("")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"
