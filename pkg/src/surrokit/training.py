"""Metamodel trainers.

Three fitting routes share the SampleSet container: gradient-based ANN
training with L2 regularization and early stopping, greedy incremental
construction of Gaussian radial networks, and (stepwise) least-squares
polynomial regression.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import RankDeficiencyError, TrainingDivergedError
from .metamodel import AnnModel, PolyModel, RbfModel
from .metrics import FitReport, fit_report
from .scaling import Scaler, fit_scaler, apply as scale_apply

__all__ = [
    "SampleSet", "TrainOptions",
    "train_ann", "train_rbf", "fit_polynomial",
    "ann_loss_and_gradient", "monomial_exponents",
]


@dataclass
class SampleSet:
    """Paired input matrix and named response vectors.

    Column order of `inputs` matches `variable_names`; every response vector
    has one entry per input row. `provenance` records whether the responses
    came from a built-in oracle or were imported from a file.
    """

    inputs: np.ndarray
    responses: dict[str, np.ndarray]
    variable_names: list[str] = field(default_factory=list)
    provenance: str = "imported"

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        if not self.variable_names:
            self.variable_names = [f"x{i + 1}" for i in range(self.inputs.shape[1])]
        if len(self.variable_names) != self.inputs.shape[1]:
            raise ValueError("one variable name per input column required")
        if self.provenance not in ("oracle", "imported"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        self.responses = {k: np.asarray(v, dtype=float).reshape(-1)
                          for k, v in self.responses.items()}
        n = self.inputs.shape[0]
        for name, vec in self.responses.items():
            if vec.shape[0] != n:
                raise ValueError(
                    f"response {name!r} has {vec.shape[0]} rows, inputs have {n}"
                )
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"response {name!r} contains non-finite values")
        if not np.all(np.isfinite(self.inputs)):
            raise ValueError("inputs contain non-finite values")

    @property
    def n_rows(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.inputs.shape[1]

    @property
    def response_names(self) -> list[str]:
        return list(self.responses.keys())

    def response(self, name: str) -> np.ndarray:
        if name not in self.responses:
            raise KeyError(
                f"unknown response {name!r}; have {sorted(self.responses)}"
            )
        return self.responses[name]


@dataclass
class TrainOptions:
    """Knobs for the ANN trainer.

    The optimizer is full-batch gradient descent with momentum on the
    mean-squared data term plus l2_penalty * (|W1|^2 + |W2|^2); biases are
    not penalized. The early-stopping holdout is carved from the training
    rows and is distinct from any verification set.
    """

    hidden_size: int = 4
    activation: str = "tanh"
    max_epochs: int = 3000
    learning_rate: float = 0.01
    l2_penalty: float = 1e-4
    early_stop_patience: int = 100
    holdout_fraction: float = 0.2
    seed: int = 0
    momentum: float = 0.9
    input_scaling: str = "meanstd"
    steepness: float = 1.0

    def __post_init__(self):
        if self.hidden_size < 1:
            raise ValueError("hidden_size must be >= 1")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ValueError("holdout_fraction must be in (0, 1)")
        if self.l2_penalty < 0:
            raise ValueError("l2_penalty must be >= 0")
        if self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1")
        if self.activation not in ("tanh", "logsig"):
            raise ValueError(f"unknown activation {self.activation!r}")


def _unpack(theta: np.ndarray, m: int, n: int):
    w1 = theta[: m * n].reshape(m, n)
    b1 = theta[m * n: m * n + m]
    w2 = theta[m * n + m: m * n + 2 * m]
    b2 = theta[-1]
    return w1, b1, w2, b2


def ann_loss_and_gradient(theta: np.ndarray, x: np.ndarray, y: np.ndarray,
                          l2: float, activation: str = "tanh",
                          steepness: float = 1.0):
    """Mean-squared loss plus L2 weight penalty, with its analytic gradient.

    `theta` packs (W1 row-major, b1, W2, b2) for a hidden layer of size m
    over n inputs; `x` is (rows, n), `y` is (rows,). Returns (loss, grad).
    """
    rows, n = x.shape
    m = (theta.size - 1) // (n + 2)
    w1, b1, w2, b2 = _unpack(theta, m, n)

    # overflow here just means a diverged run; the caller checks finiteness
    with np.errstate(over="ignore", invalid="ignore"):
        z = steepness * (x @ w1.T + b1)
        if activation == "tanh":
            h = np.tanh(z)
            dh = steepness * (1.0 - h * h)
        else:
            h = 1.0 / (1.0 + np.exp(-z))
            dh = steepness * h * (1.0 - h)
        pred = h @ w2 + b2
        resid = pred - y

        loss = float(np.mean(resid ** 2)
                     + l2 * (np.sum(w1 ** 2) + np.sum(w2 ** 2)))

        r = 2.0 / rows * resid
        g_w2 = h.T @ r + 2.0 * l2 * w2
        g_b2 = float(np.sum(r))
        du = (r[:, None] * w2[None, :]) * dh
        g_w1 = du.T @ x + 2.0 * l2 * w1
        g_b1 = du.sum(axis=0)

    grad = np.concatenate([g_w1.ravel(), g_b1, g_w2, [g_b2]])
    return loss, grad


def _holdout_mse(theta, x, y, activation, steepness):
    rows, n = x.shape
    m = (theta.size - 1) // (n + 2)
    w1, b1, w2, b2 = _unpack(theta, m, n)
    with np.errstate(over="ignore", invalid="ignore"):
        z = steepness * (x @ w1.T + b1)
        h = np.tanh(z) if activation == "tanh" else 1.0 / (1.0 + np.exp(-z))
        return float(np.mean((h @ w2 + b2 - y) ** 2))


def _fit_response_scaler(y: np.ndarray) -> Scaler:
    # meanstd on the response; a constant response degrades to a pure shift
    std = float(np.std(y, ddof=1)) if y.size > 1 else 0.0
    if std <= 0:
        return Scaler("meanstd", np.array([float(y[0])]), np.array([1.0]))
    return Scaler("meanstd", np.array([float(np.mean(y))]), np.array([std]))


def _train_ann_full(data: SampleSet, response: str, opts: TrainOptions):
    """Run the trainer and also return the final-epoch model (test support)."""
    if data.n_rows < 10:
        raise ValueError(f"need at least 10 rows to train, got {data.n_rows}")
    y_raw = data.response(response)

    rng = np.random.default_rng(opts.seed)
    n_hold = max(1, round(data.n_rows * opts.holdout_fraction))
    if n_hold >= data.n_rows:
        raise ValueError("holdout_fraction leaves no training rows")
    order = rng.permutation(data.n_rows)
    hold_idx, fit_idx = order[:n_hold], order[n_hold:]

    x_fit_raw, x_hold_raw = data.inputs[fit_idx], data.inputs[hold_idx]
    y_fit_raw, y_hold_raw = y_raw[fit_idx], y_raw[hold_idx]

    in_scaler = fit_scaler(x_fit_raw, opts.input_scaling, names=data.variable_names)
    out_scaler = _fit_response_scaler(y_fit_raw)
    x_fit = scale_apply(in_scaler, x_fit_raw)
    x_hold = scale_apply(in_scaler, x_hold_raw)
    y_fit = scale_apply(out_scaler, y_fit_raw[:, None])[:, 0]
    y_hold = scale_apply(out_scaler, y_hold_raw[:, None])[:, 0]

    m, n = opts.hidden_size, data.n_inputs
    theta = rng.uniform(-0.5, 0.5, size=m * (n + 2) + 1)
    if np.all(y_fit == 0.0):
        # constant response: the shift-only output scaler already carries
        # it, so start the linear layer at the exact solution
        theta[m * n + m:] = 0.0

    best_theta = theta.copy()
    best_err = _holdout_mse(theta, x_hold, y_hold, opts.activation, opts.steepness)
    if not math.isfinite(best_err):
        raise TrainingDivergedError("non-finite holdout error at initialization")
    stale = 0
    velocity = np.zeros_like(theta)

    for _ in range(opts.max_epochs):
        loss, grad = ann_loss_and_gradient(
            theta, x_fit, y_fit, opts.l2_penalty, opts.activation, opts.steepness
        )
        if not math.isfinite(loss):
            raise TrainingDivergedError(
                f"training loss became non-finite (learning_rate="
                f"{opts.learning_rate})"
            )
        velocity = opts.momentum * velocity - opts.learning_rate * grad
        theta = theta + velocity

        err = _holdout_mse(theta, x_hold, y_hold, opts.activation, opts.steepness)
        if not math.isfinite(err):
            raise TrainingDivergedError("holdout error became non-finite")
        if err < best_err:
            best_err, best_theta, stale = err, theta.copy(), 0
        else:
            stale += 1
            if stale >= opts.early_stop_patience:
                break

    def build(vec: np.ndarray) -> AnnModel:
        w1, b1, w2, b2 = _unpack(vec, m, n)
        return AnnModel(
            input_dim=n, hidden_size=m, activation=opts.activation,
            W1=w1.copy(), b1=b1.copy(), W2=w2.copy(), b2=float(b2),
            input_scaler=in_scaler, output_scaler=out_scaler,
            steepness=opts.steepness, response_name=response,
        )

    model = build(best_theta)
    final_model = build(theta)
    report = fit_report(
        model, x_fit_raw, y_fit_raw, x_hold_raw, y_hold_raw,
        descriptor=f"ann(M={m}, {opts.activation}, holdout)",
    )
    return model, report, final_model


def train_ann(data: SampleSet, response: str,
              opts: TrainOptions) -> tuple[AnnModel, FitReport]:
    """Fit a single-hidden-layer ANN to one response of `data`.

    Weights start uniform in [-0.5, 0.5] from the seed; training runs
    full-batch gradient descent with momentum and stops at max_epochs or
    once the holdout error has not improved for early_stop_patience epochs.
    The returned model carries the weights of the best holdout epoch, and
    the report's verify side is that holdout split.
    """
    model, report, _ = _train_ann_full(data, response, opts)
    return model, report


def train_rbf(data: SampleSet, response: str, error_goal: float,
              spread: float, max_neurons: int,
              input_scaling: str = "meanstd") -> tuple[RbfModel, FitReport]:
    """Grow a Gaussian radial network one neuron at a time.

    Starts from a bias-only model (the response mean) and repeatedly adds a
    neuron centered at the worst-error training input, re-solving the
    linear output weights by least squares, until the training MSE drops
    below `error_goal` or `max_neurons` is reached.
    """
    if data.n_rows < 1:
        raise ValueError("need at least one training row")
    if spread <= 0:
        raise ValueError("spread must be positive")
    y_raw = data.response(response)

    in_scaler = fit_scaler(data.inputs, input_scaling, names=data.variable_names)
    out_scaler = _fit_response_scaler(y_raw)
    x = scale_apply(in_scaler, data.inputs)
    y = scale_apply(out_scaler, y_raw[:, None])[:, 0]
    n = data.n_rows

    center_rows: list[int] = []
    used = np.zeros(n, dtype=bool)  # rows already claimed as (or equal to) a center
    weights = np.zeros(0)
    bias = float(np.mean(y))
    pred = np.full(n, bias)

    def solve(centers_mat: np.ndarray):
        d2 = ((x[:, None, :] - centers_mat[None, :, :]) ** 2).sum(axis=2)
        phi = np.exp(-d2 / spread ** 2)
        design = np.hstack([phi, np.ones((n, 1))])
        try:
            coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        except np.linalg.LinAlgError as exc:
            raise RankDeficiencyError(f"linear solve failed: {exc}") from exc
        if not np.all(np.isfinite(coef)):
            raise RankDeficiencyError("linear solve returned non-finite weights")
        return coef[:-1], float(coef[-1]), design @ coef

    def raw_mse(pred_scaled: np.ndarray) -> float:
        # error_goal is expressed in response units
        scale = float(out_scaler.scale[0])
        return float(np.mean((pred_scaled - y) ** 2)) * scale ** 2

    while raw_mse(pred) >= error_goal and len(center_rows) < max_neurons:
        err = np.abs(pred - y)
        err[used] = -np.inf
        worst = int(np.argmax(err))
        if not np.isfinite(err[worst]):
            break  # every distinct point is already a center
        # mark every row identical to the chosen one
        dup = np.all(x == x[worst], axis=1)
        used |= dup
        center_rows.append(worst)
        weights, bias, pred = solve(x[center_rows])

    model = RbfModel(
        input_dim=data.n_inputs, centers=x[center_rows] if center_rows
        else np.zeros((0, data.n_inputs)),
        spread=spread, weights=weights, bias=bias,
        input_scaler=in_scaler, output_scaler=out_scaler,
        response_name=response,
    )
    report = fit_report(
        model, data.inputs, y_raw,
        descriptor=f"rbf(neurons={len(center_rows)}, spread={spread:g})",
    )
    return model, report


def monomial_exponents(n_vars: int, degree: int) -> np.ndarray:
    """All exponent vectors with total degree <= degree, in deterministic
    order: by total degree, then lexicographically. Row 0 is the intercept.
    """
    rows = []
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n_vars), total):
            e = np.zeros(n_vars, dtype=int)
            for idx in combo:
                e[idx] += 1
            rows.append(e)
    out = np.array(rows, dtype=int).reshape(-1, n_vars)
    # combinations_with_replacement already yields a stable order per degree
    return out


def _basis_columns(x: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    return np.prod(x[:, None, :] ** exponents[None, :, :], axis=2)


def fit_polynomial(data: SampleSet, response: str, degree: int,
                   stepwise: bool = False,
                   p_enter: float = 0.05) -> tuple[PolyModel, FitReport]:
    """Least-squares polynomial fit over the monomial basis.

    With `stepwise`, forward selection starts from the intercept and adds
    the candidate term with the greatest F statistic while its p-value is
    below `p_enter`. Without it, the basis is truncated to at most the
    number of rows and fit in one shot.
    """
    if not 1 <= degree <= 6:
        raise ValueError(f"degree must be in 1..6, got {degree}")
    y = data.response(response)
    x = data.inputs
    n = data.n_rows

    exponents = monomial_exponents(data.n_inputs, degree)

    if stepwise:
        chosen = _forward_select(x, y, exponents, p_enter)
    else:
        chosen = list(range(min(len(exponents), n)))

    design = _basis_columns(x, exponents[chosen])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise RankDeficiencyError(
            f"design matrix rank {rank} < {design.shape[1]} retained terms"
        )
    if not np.all(np.isfinite(coef)):
        raise RankDeficiencyError("least squares returned non-finite coefficients")

    model = PolyModel(
        input_dim=data.n_inputs, degree=degree,
        terms=exponents[chosen], coefficients=coef,
        response_name=response,
    )
    report = fit_report(
        model, x, y,
        descriptor=(f"poly(degree={degree}, "
                    f"{'stepwise, ' if stepwise else ''}terms={len(chosen)})"),
    )
    return model, report


def _forward_select(x: np.ndarray, y: np.ndarray, exponents: np.ndarray,
                    p_enter: float) -> list[int]:
    """Forward stepwise selection by the partial-F test.

    Maintains an orthonormal basis Q of the current design; each candidate's
    extra sum of squares is the squared projection of the residual onto the
    candidate's component orthogonal to Q.
    """
    n = x.shape[0]
    candidates = _basis_columns(x, exponents)
    n_terms = candidates.shape[1]

    chosen = [0]  # intercept
    q = candidates[:, [0]] / np.linalg.norm(candidates[:, 0])
    resid = y - q @ (q.T @ y)
    available = np.ones(n_terms, dtype=bool)
    available[0] = False

    while True:
        p = len(chosen)
        df_resid = n - p - 1  # residual df after adding one more term
        if df_resid < 1 or not available.any():
            break
        sse = float(resid @ resid)
        if sse <= 0:
            break

        cand = candidates[:, available]
        perp = cand - q @ (q.T @ cand)
        norms2 = np.einsum("ij,ij->j", perp, perp)
        ok = norms2 > 1e-12 * np.einsum("ij,ij->j", cand, cand).clip(min=1e-300)
        gain = np.zeros(cand.shape[1])
        proj = perp.T @ resid
        gain[ok] = proj[ok] ** 2 / norms2[ok]

        best_local = int(np.argmax(gain))
        best_gain = float(gain[best_local])
        sse_new = sse - best_gain
        if sse_new <= 0:
            sse_new = max(sse_new, 0.0)
        mse_new = sse_new / df_resid if df_resid > 0 else 0.0
        if mse_new <= 0:
            p_value = 0.0
        else:
            f_stat = best_gain / mse_new
            p_value = float(stats.f.sf(f_stat, 1, df_resid))
        if p_value >= p_enter:
            break

        global_idx = int(np.flatnonzero(available)[best_local])
        chosen.append(global_idx)
        available[global_idx] = False
        new_q = perp[:, best_local] / math.sqrt(norms2[best_local])
        q = np.hstack([q, new_q[:, None]])
        resid = resid - new_q * (new_q @ resid)

    return chosen
