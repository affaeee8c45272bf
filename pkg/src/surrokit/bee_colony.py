"""Artificial bee colony optimization of a constrained scalar figure of
merit over metamodels.

Food sources are candidate designs; employed bees perturb their own source
in one coordinate, onlookers re-sample good sources chosen by roulette, and
scouts replace sources that have gone too long without improvement.
Window-style constraints (prediction within a relative tolerance of a
target) are handled with a penalty added to the figure of merit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .design_space import DesignSpace

__all__ = [
    "AbcParams", "WindowConstraint", "FomTerm", "FomProblem",
    "abc_optimize", "trace_is_monotone", "write_trace_csv",
]


@dataclass(frozen=True)
class AbcParams:
    """Colony configuration: employed and onlooker counts are each half the
    colony."""

    colony_size: int = 20
    limit: int = 50
    max_cycles: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.colony_size < 4 or self.colony_size % 2:
            raise ValueError("colony_size must be even and >= 4")
        if self.limit < 1:
            raise ValueError("limit must be >= 1")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be >= 1")

    @property
    def n_sources(self) -> int:
        return self.colony_size // 2


@dataclass(frozen=True)
class FomTerm:
    """One weighted component of the figure of merit (minimized)."""

    model: object
    weight: float = 1.0


@dataclass(frozen=True)
class WindowConstraint:
    """Keep a model's prediction within relative_tolerance of center."""

    model: object
    center: float
    relative_tolerance: float

    def __post_init__(self):
        if not self.relative_tolerance > 0:
            raise ValueError("relative_tolerance must be positive")
        if self.center == 0:
            raise ValueError("window center must be nonzero")

    def violation(self, value) -> np.ndarray:
        """Relative distance outside the window, 0 when inside."""
        rel = np.abs(np.asarray(value, dtype=float) - self.center) / abs(self.center)
        return np.maximum(0.0, rel - self.relative_tolerance)


@dataclass(frozen=True)
class FomProblem:
    """Composite minimization objective plus window constraints.

    The figure of merit is sum(weight_i * model_i(x)); infeasible points
    are penalized by penalty_weight times the summed relative window
    violation.
    """

    terms: tuple[FomTerm, ...]
    windows: tuple[WindowConstraint, ...] = ()
    penalty_weight: float = 1e3

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "windows", tuple(self.windows))
        if not self.terms:
            raise ValueError("need at least one objective term")

    def evaluate(self, points: np.ndarray):
        """Penalized FoM and total window violation for each row."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        fom = np.zeros(pts.shape[0])
        for term in self.terms:
            fom += term.weight * np.asarray(term.model.predict(pts)).reshape(-1)
        viol = np.zeros(pts.shape[0])
        for win in self.windows:
            viol += win.violation(np.asarray(win.model.predict(pts)).reshape(-1))
        return fom + self.penalty_weight * viol, viol


def trace_is_monotone(trace) -> bool:
    """True when a best-so-far minimization trace never increases."""
    trace = list(trace)
    if not trace:
        raise ValueError("empty trace")
    return all(b <= a for a, b in zip(trace, trace[1:]))


def write_trace_csv(trace, path) -> None:
    """Persist a per-cycle best-FoM trace as (cycle, best_fom) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cycle", "best_fom"])
        for i, v in enumerate(trace):
            writer.writerow([i, f"{v:.17g}"])


def abc_optimize(space: DesignSpace, problem: FomProblem,
                 params: AbcParams) -> tuple[np.ndarray, float, list[float]]:
    """Minimize the penalized figure of merit with the standard ABC cycle.

    Returns (best design, its FoM, best-so-far trace per cycle). The best
    design is the best feasible point ever seen if any exists, otherwise
    the best penalized point; the trace follows the penalized best and is
    non-increasing. Deterministic for a given seed.
    """
    for holder in list(problem.terms) + list(problem.windows):
        dim = getattr(holder.model, "input_dim", space.dim)
        if dim != space.dim:
            raise ValueError(
                f"problem model takes {dim} inputs, space has {space.dim}"
            )

    rng = np.random.default_rng(params.seed)
    n_src = params.n_sources
    dim = space.dim
    lower, upper = space.lower, space.upper

    sources = space.from_unit(rng.random((n_src, dim)))
    fom, viol = problem.evaluate(sources)
    trials = np.zeros(n_src, dtype=int)

    best_x = sources[int(np.argmin(fom))].copy()
    best_f = float(fom.min())
    best_feasible_x = None
    best_feasible_f = np.inf

    def note(points, values, violations):
        nonlocal best_x, best_f, best_feasible_x, best_feasible_f
        pts = np.atleast_2d(points)
        vals = np.atleast_1d(values)
        vio = np.atleast_1d(violations)
        for p, v, g in zip(pts, vals, vio):
            if v < best_f:
                best_f, best_x = float(v), p.copy()
            if g == 0.0 and v < best_feasible_f:
                best_feasible_f, best_feasible_x = float(v), p.copy()

    note(sources, fom, viol)

    def perturb(i: int):
        j = int(rng.integers(dim))
        k = int(rng.integers(n_src - 1))
        if k >= i:
            k += 1
        phi = rng.uniform(-1.0, 1.0)
        cand = sources[i].copy()
        cand[j] += phi * (sources[i, j] - sources[k, j])
        cand[j] = min(max(cand[j], lower[j]), upper[j])
        return cand

    def greedy(i: int):
        cand = perturb(i)
        f_new, g_new = problem.evaluate(cand[None, :])
        f_new, g_new = float(f_new[0]), float(g_new[0])
        note(cand, f_new, g_new)
        if f_new <= fom[i]:
            sources[i] = cand
            fom[i] = f_new
            viol[i] = g_new
            trials[i] = 0
        else:
            trials[i] += 1

    trace: list[float] = []
    for _ in range(params.max_cycles):
        for i in range(n_src):
            greedy(i)

        fitness = np.where(fom >= 0, 1.0 / (1.0 + fom), 1.0 + np.abs(fom))
        probs = fitness / fitness.sum()
        cdf = np.cumsum(probs)
        for _ in range(n_src):
            i = int(np.searchsorted(cdf, rng.random(), side="right"))
            i = min(i, n_src - 1)
            greedy(i)

        for i in range(n_src):
            if trials[i] > params.limit:
                sources[i] = space.from_unit(rng.random(dim))
                f_new, g_new = problem.evaluate(sources[i][None, :])
                fom[i], viol[i] = float(f_new[0]), float(g_new[0])
                trials[i] = 0
                note(sources[i], fom[i], viol[i])

        trace.append(best_f)

    if best_feasible_x is not None:
        return best_feasible_x, best_feasible_f, trace
    return best_x, best_f, trace
