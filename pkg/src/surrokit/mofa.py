"""Multi-objective firefly optimization over metamodels.

Keeps a population of K designs; each iteration every design moves toward a
randomly chosen non-dominated feasible peer (or, when no feasible design
exists yet, toward the best design under a randomly weighted scalarization
of the objectives). Moves whose destinations violate a constraint are
regenerated a bounded number of times, after which the firefly stays put
for the iteration. Once a firefly reaches a feasible point it can never
become infeasible again, so the population accumulates feasibility; the
returned archive is the feasible, mutually non-dominated subset of the
final population (the run's K Pareto candidates).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .design_space import DesignSpace
from .errors import InfeasibleRunError

__all__ = [
    "ObjectiveSpec", "ConstraintSpec", "MofaParams", "ParetoArchive",
    "non_dominated", "scalarize", "move_vector", "mofa_optimize",
]

DIRECTIONS = ("maximize", "minimize")
SENSES = ("greater", "less")


@dataclass(frozen=True)
class ObjectiveSpec:
    """One optimization objective backed by a predictive model."""

    name: str
    direction: str
    model: object

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        got = getattr(self.model, "response_name", self.name)
        if got and got != self.name:
            raise ValueError(
                f"objective {self.name!r} bound to model for {got!r}"
            )


@dataclass(frozen=True)
class ConstraintSpec:
    """Requirement that a model's prediction stays above/below a bound."""

    name: str
    model: object
    bound: float
    sense: str

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValueError(f"sense must be one of {SENSES}")
        if not np.isfinite(self.bound):
            raise ValueError("bound must be finite")

    def violation(self, value) -> np.ndarray:
        """Nonnegative violation magnitude, 0 when satisfied."""
        value = np.asarray(value, dtype=float)
        if self.sense == "greater":
            return np.maximum(0.0, self.bound - value)
        return np.maximum(0.0, value - self.bound)


@dataclass(frozen=True)
class MofaParams:
    """Firefly run configuration."""

    K: int = 20
    t_max: int = 500
    beta0: float = 1.0
    gamma: float = 1.0
    alpha: float = 0.25
    alpha_decay: float = 0.97
    max_regen: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("population K must be >= 2")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        if self.max_regen < 1:
            raise ValueError("max_regen must be >= 1")


@dataclass
class ParetoArchive:
    """Feasible, mutually non-dominated designs with their evaluations."""

    designs: np.ndarray
    objectives: np.ndarray
    constraints: np.ndarray
    objective_names: list[str] = field(default_factory=list)
    constraint_names: list[str] = field(default_factory=list)
    variable_names: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return self.designs.shape[0]

    def write_csv(self, path) -> None:
        header = (list(self.variable_names) + list(self.objective_names)
                  + list(self.constraint_names))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(len(self)):
                row = np.concatenate([
                    self.designs[i], self.objectives[i], self.constraints[i]
                ])
                writer.writerow([f"{v:.17g}" for v in row])


def non_dominated(points, directions) -> list[int]:
    """Indices of the points dominated by no other point.

    A point dominates another when it is no worse in every objective and
    strictly better in at least one, respecting each objective's direction.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return []
    pts = np.atleast_2d(pts)
    if len(directions) != pts.shape[1]:
        raise ValueError("one direction per objective required")
    sign = np.array([1.0 if d == "minimize" else -1.0 for d in directions])
    f = pts * sign  # now everything is minimization
    keep = []
    for i in range(f.shape[0]):
        no_worse = (f <= f[i]).all(axis=1)
        strictly_better = (f < f[i]).any(axis=1)
        if not np.any(no_worse & strictly_better):
            keep.append(i)
    return keep


def scalarize(objective_values, w, directions) -> np.ndarray:
    """Weighted sum of population-normalized objectives, larger is better.

    Each objective column is normalized by its own population mean and
    sample standard deviation (columns with zero spread are centered only).
    For two objectives a scalar w in [0, 1] weights them (1 - w, w);
    otherwise `w` must be a weight vector summing to 1. Maximized
    objectives enter with +, minimized with -.
    """
    vals = np.atleast_2d(np.asarray(objective_values, dtype=float))
    k = vals.shape[1]
    if np.isscalar(w) or np.ndim(w) == 0:
        if k != 2:
            raise ValueError("scalar weight only defined for two objectives")
        weights = np.array([1.0 - float(w), float(w)])
    else:
        weights = np.asarray(w, dtype=float)
        if weights.shape != (k,):
            raise ValueError("need one weight per objective")
    sign = np.array([1.0 if d == "maximize" else -1.0 for d in directions])

    centered = vals - vals.mean(axis=0)
    std = vals.std(axis=0, ddof=1) if vals.shape[0] > 1 else np.zeros(k)
    norm = np.where(std > 0, std, 1.0)
    return (centered / norm) @ (weights * sign)


def move_vector(space: DesignSpace, current, target, params: MofaParams,
                rng: np.random.Generator, alpha: float | None = None) -> np.ndarray:
    """Attraction step toward `target` plus a random walk term.

    Works in unit-cube coordinates: delta = beta0 * exp(-gamma * r^2) *
    (target - current) + alpha * (u - 0.5) per coordinate, where r is the
    unit-cube distance between the two designs. The result is clamped so
    the destination stays inside the bounds, and returned in raw units.
    """
    cur = space.to_unit(np.asarray(current, dtype=float))
    tgt = space.to_unit(np.asarray(target, dtype=float))
    if cur.shape != tgt.shape:
        raise ValueError("current and target dimensions differ")
    a = params.alpha if alpha is None else alpha
    r2 = float(np.sum((tgt - cur) ** 2))
    step = params.beta0 * np.exp(-params.gamma * r2) * (tgt - cur)
    step = step + a * (rng.random(cur.shape[0]) - 0.5)
    dest = np.clip(cur + step, 0.0, 1.0)
    return space.from_unit(dest) - space.from_unit(cur)


def _predict_batch(models, points: np.ndarray) -> np.ndarray:
    cols = [np.asarray(m.predict(points)).reshape(-1) for m in models]
    return np.column_stack(cols) if cols else np.zeros((points.shape[0], 0))


def _mutually_non_dominated(f_min: np.ndarray) -> bool:
    """Broadcast check that no row of a minimization matrix dominates another."""
    le = (f_min[:, None, :] <= f_min[None, :, :]).all(axis=2)
    lt = (f_min[:, None, :] < f_min[None, :, :]).any(axis=2)
    return not (le & lt).any()


def _merge_archive(arch, candidates, sign):
    """Fold candidate rows into a non-dominated archive, dropping duplicates.

    `arch` and `candidates` are (designs, objectives, constraints) triples;
    `sign` converts objectives to minimization form.
    """
    ax, af, ag = arch
    fa = af * sign
    for x, f, g in zip(*candidates):
        fc = f * sign
        if fa.shape[0]:
            dominated = ((fa <= fc).all(axis=1) & (fa < fc).any(axis=1)).any()
            duplicate = (fa == fc).all(axis=1).any()
            if dominated or duplicate:
                continue
            losers = (fa >= fc).all(axis=1) & (fa > fc).any(axis=1)
            if losers.any():
                keep = ~losers
                ax, af, ag, fa = ax[keep], af[keep], ag[keep], fa[keep]
        ax = np.vstack([ax, x[None, :]])
        af = np.vstack([af, f[None, :]])
        ag = np.vstack([ag, g[None, :]])
        fa = np.vstack([fa, fc[None, :]])
    return ax, af, ag


def mofa_optimize(space: DesignSpace, objectives: list[ObjectiveSpec],
                  constraints: list[ConstraintSpec], params: MofaParams,
                  validate_archive: bool = False) -> ParetoArchive:
    """Run the firefly loop and return the feasible Pareto archive.

    Deterministic for a given seed. Constraint values computed while
    vetting a move are reused as the mover's values next iteration, so each
    constraint model sees at most one batch per accepted position. Raises
    InfeasibleRunError (carrying the smallest total violation seen) when no
    design ever satisfied all constraints.
    """
    if len(objectives) < 2:
        raise ValueError("need at least two objectives for Pareto optimization")
    for spec in list(objectives) + list(constraints):
        dim = getattr(spec.model, "input_dim", space.dim)
        if dim != space.dim:
            raise ValueError(
                f"model for {spec.name!r} takes {dim} inputs, space has "
                f"{space.dim}"
            )
    directions = [o.direction for o in objectives]
    sign = np.array([1.0 if d == "minimize" else -1.0 for d in directions])
    obj_models = [o.model for o in objectives]
    con_models = [c.model for c in constraints]

    rng = np.random.default_rng(params.seed)
    lower, upper = space.lower, space.upper
    pop = space.from_unit(rng.random((params.K, space.dim)))
    g_pop = _predict_batch(con_models, pop)

    best_violation = np.inf
    alpha = params.alpha

    def total_violation(g_rows: np.ndarray) -> np.ndarray:
        viol = np.zeros(g_rows.shape[0])
        for j, c in enumerate(constraints):
            viol += c.violation(g_rows[:, j])
        return viol

    for _ in range(params.t_max):
        f_pop = _predict_batch(obj_models, pop)
        if constraints:
            viol = total_violation(g_pop)
            feasible = viol == 0.0
            best_violation = min(best_violation, float(viol.min()))
        else:
            feasible = np.ones(params.K, dtype=bool)

        nd_local = non_dominated(f_pop[feasible], directions)
        nd_idx = (np.flatnonzero(feasible)[nd_local] if nd_local
                  else np.array([], dtype=int))
        if validate_archive and nd_idx.size:
            assert _mutually_non_dominated(f_pop[nd_idx] * sign)

        new_pop = pop.copy()
        new_g = g_pop.copy()
        for i in range(params.K):
            for _ in range(1 + params.max_regen):
                if nd_idx.size:
                    target = pop[nd_idx[rng.integers(nd_idx.size)]]
                else:
                    w = (float(rng.random()) if len(objectives) == 2
                         else rng.dirichlet(np.ones(len(objectives))))
                    psi = scalarize(f_pop, w, directions)
                    target = pop[int(np.argmax(psi))]
                delta = move_vector(space, pop[i], target, params, rng,
                                    alpha=alpha)
                # re-clamp: float round-trip through unit coordinates can
                # overshoot a bound by an ulp
                dest = np.clip(pop[i] + delta, lower, upper)
                g_dest = _predict_batch(con_models, dest[None, :])
                if constraints:
                    v = float(total_violation(g_dest)[0])
                    best_violation = min(best_violation, v)
                    if v > 0.0:
                        continue
                new_pop[i] = dest
                new_g[i] = g_dest[0]
                break
            # all attempts violated a constraint: the firefly stays put

        pop, g_pop = new_pop, new_g
        alpha *= params.alpha_decay

    # archive = feasible non-dominated subset of the final population
    f_pop = _predict_batch(obj_models, pop)
    if constraints:
        viol = total_violation(g_pop)
        feasible = viol == 0.0
        if viol.size:
            best_violation = min(best_violation, float(viol.min()))
    else:
        feasible = np.ones(params.K, dtype=bool)

    if not feasible.any():
        raise InfeasibleRunError(
            "no feasible design found; smallest total constraint violation "
            f"was {best_violation:.6g}", best_violation,
        )
    feas_idx = np.flatnonzero(feasible)
    arch_x, arch_f, arch_g = _merge_archive(
        (np.zeros((0, space.dim)), np.zeros((0, len(objectives))),
         np.zeros((0, len(constraints)))),
        (pop[feas_idx], f_pop[feas_idx], g_pop[feas_idx]),
        sign,
    )
    return ParetoArchive(
        designs=arch_x, objectives=arch_f, constraints=arch_g,
        objective_names=[o.name for o in objectives],
        constraint_names=[c.name for c in constraints],
        variable_names=space.names,
    )
