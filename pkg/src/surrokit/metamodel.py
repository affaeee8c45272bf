"""Metamodel families: single-hidden-layer ANN, Gaussian radial network,
and multivariate polynomial.

Performance-metric models (role "PMM") and circuit-parameter models (role
"CPM") share the same math; the role tag only records what the response
feeds. All models are single-output, immutable after construction, and safe
to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .scaling import Scaler, apply as scale_apply, invert as scale_invert

__all__ = [
    "AnnModel", "RbfModel", "PolyModel", "CallableModel",
    "ann_predict", "rbf_predict", "poly_predict",
    "save_model", "load_model",
]

ACTIVATIONS = ("tanh", "logsig")
ROLES = ("PMM", "CPM")


def _as_matrix(x, dim: int) -> tuple[np.ndarray, bool]:
    """Coerce a single point or a matrix of points to (n, dim)."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != dim:
        raise ValueError(f"input has {arr.shape[1]} columns, model expects {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("input contains non-finite values")
    return arr, single


def _hidden(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "tanh":
        return np.tanh(z)
    return 1.0 / (1.0 + np.exp(-z))  # logsig


@dataclass(frozen=True, eq=False)
class AnnModel:
    """Feed-forward network with one nonlinear hidden layer and a linear
    output neuron.

    Prediction on a raw point x:

        y = out_inv( b2 + sum_j W2[j] * f(steepness * (b1[j] + W1[j] @ x')) )

    where x' is the input-scaled point, f is tanh or the logistic sigmoid,
    and out_inv undoes the output scaling.
    """

    input_dim: int
    hidden_size: int
    activation: str
    W1: np.ndarray                 # hidden x input
    b1: np.ndarray                 # hidden
    W2: np.ndarray                 # hidden
    b2: float
    input_scaler: Scaler
    output_scaler: Scaler
    steepness: float = 1.0
    role: str = "PMM"
    response_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "W1", np.asarray(self.W1, dtype=float))
        object.__setattr__(self, "b1", np.asarray(self.b1, dtype=float))
        object.__setattr__(self, "W2", np.asarray(self.W2, dtype=float))
        object.__setattr__(self, "b2", float(self.b2))
        for arr in (self.W1, self.b1, self.W2):
            arr.setflags(write=False)
        m, n = self.hidden_size, self.input_dim
        if self.W1.shape != (m, n):
            raise ValueError(f"W1 must be {m}x{n}, got {self.W1.shape}")
        if self.b1.shape != (m,) or self.W2.shape != (m,):
            raise ValueError("b1 and W2 must have one entry per hidden neuron")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not self.steepness > 0:
            raise ValueError("steepness must be positive")
        if self.role not in ROLES:
            raise ValueError(f"role must be PMM or CPM, got {self.role!r}")
        finite = (np.all(np.isfinite(self.W1)) and np.all(np.isfinite(self.b1))
                  and np.all(np.isfinite(self.W2)) and np.isfinite(self.b2))
        if not finite:
            raise ValueError("model weights must be finite")
        if self.input_scaler.n_columns != n:
            raise ValueError("input scaler column count does not match input_dim")
        if self.output_scaler.n_columns != 1:
            raise ValueError("output scaler must be single-column")

    @property
    def n_parameters(self) -> int:
        return self.hidden_size * (self.input_dim + 2) + 1

    def predict(self, x) -> float | np.ndarray:
        """Predict for one point (returns float) or a matrix of points."""
        pts, single = _as_matrix(x, self.input_dim)
        xs = scale_apply(self.input_scaler, pts)
        z = self.steepness * (xs @ self.W1.T + self.b1)
        y = _hidden(z, self.activation) @ self.W2 + self.b2
        y = scale_invert(self.output_scaler, y[:, None])[:, 0]
        return float(y[0]) if single else y


@dataclass(frozen=True, eq=False)
class RbfModel:
    """Radial network: weighted sum of Gaussian bumps plus a bias.

    rho(r) = exp(-(r / spread)^2); prediction on a raw point x is
    out_inv(bias + sum_i weights[i] * rho(||x' - centers[i]||)) with x'
    input-scaled and centers stored in the scaled coordinates.
    """

    input_dim: int
    centers: np.ndarray            # neurons x input
    spread: float
    weights: np.ndarray            # neurons
    bias: float
    input_scaler: Scaler
    output_scaler: Scaler
    radial_kind: str = "gaussian"
    role: str = "PMM"
    response_name: str = ""

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float).reshape(-1, self.input_dim)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", float(self.bias))
        centers.setflags(write=False)
        weights.setflags(write=False)
        if self.radial_kind != "gaussian":
            raise ValueError("only the gaussian radial kind is supported")
        if not self.spread > 0:
            raise ValueError("spread must be positive")
        if centers.shape[0] != weights.shape[0]:
            raise ValueError("one linear weight per center required")
        if not (np.all(np.isfinite(centers)) and np.all(np.isfinite(weights))
                and np.isfinite(self.bias)):
            raise ValueError("model parameters must be finite")

    @property
    def n_neurons(self) -> int:
        return self.centers.shape[0]

    @property
    def n_parameters(self) -> int:
        return self.n_neurons * (self.input_dim + 1) + 1

    def predict(self, x) -> float | np.ndarray:
        pts, single = _as_matrix(x, self.input_dim)
        xs = scale_apply(self.input_scaler, pts)
        if self.n_neurons:
            d2 = ((xs[:, None, :] - self.centers[None, :, :]) ** 2).sum(axis=2)
            y = np.exp(-d2 / self.spread ** 2) @ self.weights + self.bias
        else:
            y = np.full(pts.shape[0], self.bias)
        y = scale_invert(self.output_scaler, y[:, None])[:, 0]
        return float(y[0]) if single else y


@dataclass(frozen=True, eq=False)
class PolyModel:
    """Multivariate polynomial: sum_k coeff[k] * prod_i x_i^terms[k, i].

    Operates on raw inputs (no scalers); `terms` is the exponent matrix,
    one row per retained monomial.
    """

    input_dim: int
    degree: int
    terms: np.ndarray              # monomials x input, integer exponents
    coefficients: np.ndarray
    role: str = "PMM"
    response_name: str = ""

    def __post_init__(self):
        terms = np.asarray(self.terms, dtype=int).reshape(-1, self.input_dim)
        coeff = np.asarray(self.coefficients, dtype=float).reshape(-1)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "coefficients", coeff)
        terms.setflags(write=False)
        coeff.setflags(write=False)
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if terms.shape[0] != coeff.shape[0]:
            raise ValueError("one coefficient per term required")
        if terms.size and terms.sum(axis=1).max() > self.degree:
            raise ValueError("term total degree exceeds model degree")
        if terms.shape[0] != len({tuple(t) for t in terms}):
            raise ValueError("duplicate exponent vectors")
        if not np.all(np.isfinite(coeff)):
            raise ValueError("coefficients must be finite")

    @property
    def n_parameters(self) -> int:
        return self.coefficients.shape[0]

    def predict(self, x) -> float | np.ndarray:
        pts, single = _as_matrix(x, self.input_dim)
        if self.terms.shape[0] == 0:
            y = np.zeros(pts.shape[0])
        else:
            basis = np.prod(pts[:, None, :] ** self.terms[None, :, :], axis=2)
            y = basis @ self.coefficients
        return float(y[0]) if single else y


@dataclass(frozen=True, eq=False)
class CallableModel:
    """Adapter giving a plain vectorized function the model predict API.

    Useful for direct-oracle optimization runs and synthetic benchmarks.
    `fn` receives an (n, input_dim) matrix and returns n values.
    """

    input_dim: int
    fn: object
    response_name: str = ""
    role: str = "PMM"

    def predict(self, x) -> float | np.ndarray:
        pts, single = _as_matrix(x, self.input_dim)
        y = np.asarray(self.fn(pts), dtype=float).reshape(-1)
        return float(y[0]) if single else y

    @property
    def n_parameters(self) -> int:
        return 0


def ann_predict(model: AnnModel, x) -> float:
    """Evaluate an ANN metamodel at a single raw design point."""
    return model.predict(np.asarray(x, dtype=float).reshape(-1))


def rbf_predict(model: RbfModel, x) -> float:
    """Evaluate a radial metamodel at a single raw design point."""
    return model.predict(np.asarray(x, dtype=float).reshape(-1))


def poly_predict(model: PolyModel, x) -> float:
    """Evaluate a polynomial metamodel at a single design point."""
    return model.predict(np.asarray(x, dtype=float).reshape(-1))


# --- persistence ----------------------------------------------------------

def _model_to_dict(model) -> dict:
    if isinstance(model, AnnModel):
        return {
            "kind": "ann",
            "input_dim": model.input_dim,
            "hidden_size": model.hidden_size,
            "activation": model.activation,
            "steepness": model.steepness,
            "W1": model.W1.tolist(),
            "b1": model.b1.tolist(),
            "W2": model.W2.tolist(),
            "b2": model.b2,
            "input_scaler": model.input_scaler.to_dict(),
            "output_scaler": model.output_scaler.to_dict(),
            "role": model.role,
            "response_name": model.response_name,
        }
    if isinstance(model, RbfModel):
        return {
            "kind": "rbf",
            "input_dim": model.input_dim,
            "centers": model.centers.tolist(),
            "spread": model.spread,
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "radial_kind": model.radial_kind,
            "input_scaler": model.input_scaler.to_dict(),
            "output_scaler": model.output_scaler.to_dict(),
            "role": model.role,
            "response_name": model.response_name,
        }
    if isinstance(model, PolyModel):
        return {
            "kind": "poly",
            "input_dim": model.input_dim,
            "degree": model.degree,
            "terms": model.terms.tolist(),
            "coefficients": model.coefficients.tolist(),
            "role": model.role,
            "response_name": model.response_name,
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _model_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "ann":
        return AnnModel(
            input_dim=d["input_dim"], hidden_size=d["hidden_size"],
            activation=d["activation"], steepness=d["steepness"],
            W1=np.asarray(d["W1"]), b1=np.asarray(d["b1"]),
            W2=np.asarray(d["W2"]), b2=d["b2"],
            input_scaler=Scaler.from_dict(d["input_scaler"]),
            output_scaler=Scaler.from_dict(d["output_scaler"]),
            role=d["role"], response_name=d["response_name"],
        )
    if kind == "rbf":
        return RbfModel(
            input_dim=d["input_dim"], centers=np.asarray(d["centers"]),
            spread=d["spread"], weights=np.asarray(d["weights"]),
            bias=d["bias"], radial_kind=d["radial_kind"],
            input_scaler=Scaler.from_dict(d["input_scaler"]),
            output_scaler=Scaler.from_dict(d["output_scaler"]),
            role=d["role"], response_name=d["response_name"],
        )
    if kind == "poly":
        return PolyModel(
            input_dim=d["input_dim"], degree=d["degree"],
            terms=np.asarray(d["terms"]),
            coefficients=np.asarray(d["coefficients"]),
            role=d["role"], response_name=d["response_name"],
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    """Write a model (any of the three families) to a JSON file."""
    with open(path, "w") as fh:
        json.dump(_model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    """Load a model saved by :func:`save_model`."""
    with open(path) as fh:
        return _model_from_dict(json.load(fh))
