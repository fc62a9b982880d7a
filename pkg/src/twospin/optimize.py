"""Maximize the average fidelity over each admissibility region.

The objective f0 + (f1/3) alpha + (f2/10) gamma is linear, so the optimum sits
on the region boundary: a vertex of the parallel-class triangle, or a point
of the parabola gamma = alpha^2 - 1 / its cap for the other two classes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .covariant import (
    DOWN_DOWN,
    GAMMA_LE_1,
    GAMMA_LE_2,
    PARABOLA,
    UP_UP,
    CovariantSeed,
    MeasurementClass,
    admissible_mask,
    constraint_slacks,
)
from .fidelity import FidelitySpec, average_fidelity

ACTIVE_TOL = 1e-12

# (vertex, constraints tight there)
TRIANGLE = (
    ((1.5, 1.0), (GAMMA_LE_1, DOWN_DOWN)),
    ((-1.5, 1.0), (GAMMA_LE_1, UP_UP)),
    ((0.0, -2.0), (UP_UP, DOWN_DOWN)),
)
CAPS = {
    MeasurementClass.COLLECTIVE_ANTIPARALLEL: (2.0, GAMMA_LE_2),
    MeasurementClass.LOCC: (1.0, GAMMA_LE_1),
}


@dataclass(frozen=True)
class Optimum:
    seed: CovariantSeed
    value: float
    active_constraints: tuple
    measurement_class: MeasurementClass
    unique: bool = True
    degenerate: bool = False
    # endpoints of the optimal edge when the optimum is not unique
    tied_seeds: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "class": str(self.measurement_class),
            "region_status": self.measurement_class.region_status,
            "alpha": self.seed.alpha,
            "gamma": self.seed.gamma,
            "fidelity": self.value,
            "active_constraints": list(self.active_constraints),
            "unique": self.unique,
            "degenerate": self.degenerate,
        }


def objective_weights(spec: FidelitySpec) -> tuple[float, float]:
    return spec.f1 / 3, spec.f2 / 10


def _result(spec, cls, alpha, gamma, active, **kw) -> Optimum:
    seed = CovariantSeed(alpha, gamma)
    return Optimum(seed, average_fidelity(seed, spec), tuple(active), cls, **kw)


def _on_parabola(alpha: float, cls: MeasurementClass) -> tuple[float, float]:
    gamma = alpha * alpha - 1
    # rounding in alpha^2 - 1 can leave the point a hair outside; step inward
    while not admissible_mask(alpha, gamma, cls):
        gamma = float(np.nextafter(gamma, np.inf))
    return alpha, gamma


def _optimize_triangle(spec, c1, c2):
    cls = MeasurementClass.COLLECTIVE_PARALLEL
    values = [c1 * a + c2 * g for (a, g), _ in TRIANGLE]
    best = max(values)
    tol = 1e-14 * (abs(c1) + abs(c2))
    tied = [i for i, v in enumerate(values) if best - v <= tol]
    if len(tied) == 1:
        (a, g), active = TRIANGLE[tied[0]]
        return _result(spec, cls, a, g, active)
    (a1, g1), act1 = TRIANGLE[tied[0]]
    (a2, g2), act2 = TRIANGLE[tied[1]]
    edge = [c for c in act1 if c in act2]
    return _result(
        spec, cls, (a1 + a2) / 2, (g1 + g2) / 2, edge,
        unique=False, tied_seeds=(CovariantSeed(a1, g1), CovariantSeed(a2, g2)),
    )


def _optimize_capped_parabola(spec, cls, c1, c2):
    cap, cap_name = CAPS[cls]
    a_max = math.sqrt(1 + cap)
    if c2 < 0:
        a = -c1 / (2 * c2)
        if abs(a) < a_max:
            alpha, gamma = _on_parabola(a, cls)
            return _result(spec, cls, alpha, gamma, [PARABOLA])
        return _result(spec, cls, math.copysign(a_max, a), cap, [cap_name, PARABOLA])
    if c1 == 0:
        # c2 > 0: the whole cap segment is optimal
        return _result(
            spec, cls, 0.0, cap, [cap_name],
            unique=False, tied_seeds=(CovariantSeed(-a_max, cap), CovariantSeed(a_max, cap)),
        )
    return _result(spec, cls, math.copysign(a_max, c1), cap, [cap_name, PARABOLA])


def optimize(spec: FidelitySpec, cls: MeasurementClass) -> Optimum:
    """Closed-form maximum of the average fidelity over the region of ``cls``."""
    c1, c2 = objective_weights(spec)
    if c1 == 0 and c2 == 0:
        return _result(spec, cls, 0.0, 0.0, [], unique=False, degenerate=True)
    if cls is MeasurementClass.COLLECTIVE_PARALLEL:
        return _optimize_triangle(spec, c1, c2)
    return _optimize_capped_parabola(spec, cls, c1, c2)


def active_constraints(seed: CovariantSeed, cls: MeasurementClass, tol: float = ACTIVE_TOL) -> tuple:
    return tuple(name for name, s in constraint_slacks(seed, cls).items() if abs(s) <= tol)


@lru_cache(maxsize=8)
def _lattice(cls: MeasurementClass, grid: int, lo: float, hi: float):
    axis = np.linspace(lo, hi, grid)
    alpha, gamma = np.meshgrid(axis, axis, indexing="ij")
    mask = admissible_mask(alpha, gamma, cls)
    a, g = alpha[mask], gamma[mask]
    a.setflags(write=False)
    g.setflags(write=False)
    return a, g


def brute_force_optimum(
    spec: FidelitySpec,
    cls: MeasurementClass,
    grid: int = 2001,
    window: tuple = (-3.0, 3.0),
    workers: int = 1,
) -> Optimum:
    """Best admissible point of a ``grid x grid`` lattice over ``window``^2.

    Independent of :func:`optimize`: only the admissibility predicate is shared.
    The scan can be split over ``workers`` threads; ties resolve to the lowest
    lattice index, so the answer does not depend on the split.
    """
    if grid < 100:
        raise ValueError("grid must be at least 100")
    a, g = _lattice(cls, grid, float(window[0]), float(window[1]))
    if a.size == 0:
        raise ValueError("no admissible lattice point in the window")
    c1, c2 = objective_weights(spec)

    def best_in(bounds):
        lo, hi = bounds
        vals = c1 * a[lo:hi] + c2 * g[lo:hi]
        k = int(np.argmax(vals))
        return vals[k], lo + k

    n_chunks = max(1, workers)
    edges = np.linspace(0, a.size, n_chunks + 1).astype(int)
    chunks = [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(best_in, chunks))
    else:
        results = [best_in(c) for c in chunks]
    # strict > keeps the earliest chunk on ties
    best_val, best_idx = results[0]
    for val, idx in results[1:]:
        if val > best_val:
            best_val, best_idx = val, idx
    seed = CovariantSeed(a[best_idx], g[best_idx])
    return Optimum(
        seed, average_fidelity(seed, spec), active_constraints(seed, cls), cls,
        degenerate=(c1 == 0 and c2 == 0),
    )


def lipschitz_bound(spec: FidelitySpec, grid: int = 2001, window: tuple = (-3.0, 3.0)) -> float:
    c1, c2 = objective_weights(spec)
    return (abs(c1) + abs(c2)) * (window[1] - window[0]) / (grid - 1)


def optimize_all(spec: FidelitySpec) -> dict:
    return {cls: optimize(spec, cls) for cls in MeasurementClass}

