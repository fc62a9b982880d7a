"""Covariant two-parameter POVMs on two spins and their admissibility regions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .operators import (
    I4,
    TwoSpinOperator,
    eigenvalues,
    identity,
    partial_spin_flip,
    rotate_operator,
    rotation_between,
    to_dense,
    unit_vector,
)

DESIGN_TOL = 1e-10
Z_AXIS = np.array([0.0, 0.0, 1.0])


class MeasurementClass(enum.Enum):
    COLLECTIVE_PARALLEL = "CollectiveParallel"
    COLLECTIVE_ANTIPARALLEL = "CollectiveAntiparallel"
    LOCC = "LOCC"

    @classmethod
    def parse(cls, text: str) -> MeasurementClass:
        key = text.strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "parallel": cls.COLLECTIVE_PARALLEL,
            "collectiveparallel": cls.COLLECTIVE_PARALLEL,
            "antiparallel": cls.COLLECTIVE_ANTIPARALLEL,
            "collectiveantiparallel": cls.COLLECTIVE_ANTIPARALLEL,
            "locc": cls.LOCC,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown measurement class {text!r}") from None

    def __str__(self):
        return self.value

    @property
    def region_status(self) -> str:
        # the LOCC conditions are necessary; sufficiency is not established
        return "LOCC-necessary" if self is MeasurementClass.LOCC else "exact"


@dataclass(frozen=True)
class CovariantSeed:
    """Parameters (alpha, gamma) of the POVM density for the guess +z."""

    alpha: float
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.gamma)):
            raise ValueError("seed parameters must be finite")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "gamma", float(self.gamma))


# Constraint identifiers mapped to their slack (>= 0 when satisfied).
GAMMA_LE_1 = "gamma <= 1"
GAMMA_LE_2 = "gamma <= 2"
UP_UP = "1 + alpha + gamma/2 >= 0"
DOWN_DOWN = "1 - alpha + gamma/2 >= 0"
PARABOLA = "1 + gamma - alpha^2 >= 0"

SLACKS = {
    GAMMA_LE_1: lambda a, g: 1 - g,
    GAMMA_LE_2: lambda a, g: 2 - g,
    UP_UP: lambda a, g: 1 + a + g / 2,
    DOWN_DOWN: lambda a, g: 1 - a + g / 2,
    PARABOLA: lambda a, g: 1 + g - a * a,
}

CONSTRAINTS = {
    MeasurementClass.COLLECTIVE_PARALLEL: (GAMMA_LE_1, UP_UP, DOWN_DOWN),
    MeasurementClass.COLLECTIVE_ANTIPARALLEL: (GAMMA_LE_2, PARABOLA),
    MeasurementClass.LOCC: (GAMMA_LE_1, PARABOLA),
}


def constraint_slacks(seed: CovariantSeed, cls: MeasurementClass) -> dict:
    return {name: SLACKS[name](seed.alpha, seed.gamma) for name in CONSTRAINTS[cls]}


def _satisfied(name, a, g):
    if name == PARABOLA:
        # |alpha| <= sqrt(1 + gamma): same set as the polynomial form, but
        # correctly-rounded sqrt keeps float boundary points like (sqrt(2), 1) inside
        return (1 + g >= 0) & (np.abs(a) <= np.sqrt(np.maximum(1 + g, 0)))
    return SLACKS[name](a, g) >= 0


def admissible_mask(alpha, gamma, cls: MeasurementClass) -> np.ndarray:
    """Vectorized :func:`is_admissible` over arrays of alpha and gamma."""
    alpha = np.asarray(alpha, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    mask = np.ones(np.broadcast(alpha, gamma).shape, dtype=bool)
    for name in CONSTRAINTS[cls]:
        mask &= _satisfied(name, alpha, gamma)
    return mask


def is_admissible(seed: CovariantSeed, cls: MeasurementClass) -> bool:
    """Closed-region membership test for ``seed`` in the region of ``cls``."""
    return bool(admissible_mask(seed.alpha, seed.gamma, cls))


def seed_operator(seed: CovariantSeed) -> TwoSpinOperator:
    """I + alpha (Sz(x)I + I(x)Sz) + gamma (2 SzSz - SxSx - SySy)."""
    a, g = seed.alpha, seed.gamma
    return TwoSpinOperator(
        1.0, (0, 0, a), (0, 0, a), np.diag([-g, -g, 2 * g])
    )


def seed_eigenvalues(seed: CovariantSeed) -> np.ndarray:
    """Closed-form spectrum of the seed operator, ascending.

    Blocks: |uu>, |dd>, the triplet m=0 and the singlet.
    """
    a, g = seed.alpha, seed.gamma
    return np.sort([1 + a + g / 2, 1 - a + g / 2, 1 - g, 1.0])


def flipped_seed_eigenvalues(seed: CovariantSeed) -> np.ndarray:
    """Closed-form spectrum of the partially flipped seed operator, ascending."""
    a, g = seed.alpha, seed.gamma
    r = math.hypot(a, g / 2)
    return np.sort([1 - g / 2, 1 - g / 2, 1 + g / 2 - r, 1 + g / 2 + r])


def numeric_admissibility(seed: CovariantSeed, cls: MeasurementClass, tol: float = 1e-9) -> bool:
    """Admissibility from dense eigenvalues, accepting minima down to ``-tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    op = seed_operator(seed)
    direct = eigenvalues(op)[0] >= -tol
    flipped = eigenvalues(partial_spin_flip(op))[0] >= -tol
    if cls is MeasurementClass.COLLECTIVE_PARALLEL:
        return bool(direct)
    if cls is MeasurementClass.COLLECTIVE_ANTIPARALLEL:
        return bool(flipped)
    return bool(direct and flipped)


def oriented_element(seed: CovariantSeed, n) -> TwoSpinOperator:
    """POVM density for the guess ``n``: the seed rotated from +z to ``n``."""
    n = unit_vector(n)
    return rotate_operator(seed_operator(seed), rotation_between(Z_AXIS, n))


def legendre2(u):
    return (3 * np.asarray(u) ** 2 - 1) / 2


def density_polynomial(seed: CovariantSeed, u):
    """Outcome density as a function of u = n . m."""
    return 1 + seed.alpha * u + (seed.gamma / 2) * legendre2(u)


def outcome_density(seed: CovariantSeed, n, m):
    """Probability density of guessing ``n`` when both spins point along ``m``.

    Normalized against the uniform probability measure on the sphere of
    guesses. ``n`` and ``m`` broadcast over leading axes.
    """
    u = np.sum(np.asarray(n, dtype=float) * np.asarray(m, dtype=float), axis=-1)
    return density_polynomial(seed, u)


class DesignError(ValueError):
    """Direction set is not a spherical 2-design."""


@dataclass(frozen=True, eq=False)
class DiscretePOVM:
    directions: np.ndarray
    weights: np.ndarray
    operators: tuple = field(repr=False)

    @property
    def elements(self):
        return list(zip(self.directions, self.weights, self.operators))

    def total(self) -> TwoSpinOperator:
        acc = 0.0 * identity()
        for w, op in zip(self.weights, self.operators):
            acc = acc + w * op
        return acc

    def completeness_residual(self) -> float:
        """Largest coefficient deviation of the weighted sum from the identity."""
        return float(np.max(np.abs(self.total().coefficients() - identity().coefficients())))

    def __len__(self):
        return len(self.operators)


def design_moments(directions) -> tuple[float, float]:
    """Deviation of the first and second moments from the uniform sphere."""
    d = np.asarray(directions, dtype=float)
    first = np.linalg.norm(d.mean(axis=0))
    second = np.max(np.abs(d.T @ d / len(d) - np.eye(3) / 3))
    return float(first), float(second)


def check_design(directions, tol: float = DESIGN_TOL) -> np.ndarray:
    d = np.asarray(directions, dtype=float)
    if d.ndim != 2 or d.shape[1] != 3 or len(d) == 0:
        raise DesignError(f"expected a (K, 3) array of directions, got shape {d.shape}")
    norms = np.linalg.norm(d, axis=1)
    if np.max(np.abs(norms - 1)) > tol:
        raise DesignError(f"directions are not unit vectors (max |norm - 1| = {np.max(np.abs(norms - 1)):.3e})")
    first, second = design_moments(d)
    if first > tol or second > tol:
        raise DesignError(
            f"not a spherical 2-design: first-moment deficiency {first:.3e}, "
            f"second-moment deficiency {second:.3e} (tolerance {tol:.0e})"
        )
    return d


def discretize(seed: CovariantSeed, directions) -> DiscretePOVM:
    """Finite POVM with equal weights on a spherical 2-design.

    The seed only carries spherical harmonics of degree <= 2, so averaging the
    rotated elements over a 2-design reproduces the identity exactly.
    """
    d = check_design(directions)
    weights = np.full(len(d), 1.0 / len(d))
    ops = tuple(oriented_element(seed, n) for n in d)
    return DiscretePOVM(d, weights, ops)


def tetrahedron() -> np.ndarray:
    return np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / math.sqrt(3)


def octahedron() -> np.ndarray:
    return np.vstack([np.eye(3), -np.eye(3)])


def icosahedron() -> np.ndarray:
    p = (1 + math.sqrt(5)) / 2
    pts = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            pts += [(0, s1, s2 * p), (s1, s2 * p, 0), (s2 * p, 0, s1)]
    pts = np.array(pts, dtype=float)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


DESIGNS = {"tetrahedron": tetrahedron, "octahedron": octahedron, "icosahedron": icosahedron}


def load_directions(path) -> np.ndarray:
    """Read one direction per line, three whitespace-separated numbers."""
    d = np.loadtxt(path, dtype=float, ndmin=2)
    if d.shape[1] != 3:
        raise ValueError(f"{path}: expected three columns, got {d.shape[1]}")
    return d


_ALPHA_PART = seed_operator(CovariantSeed(1.0, 0.0)) + (-1.0) * identity()
_GAMMA_PART = seed_operator(CovariantSeed(0.0, 1.0)) + (-1.0) * identity()


def min_eigenvalues(alpha, gamma) -> tuple[np.ndarray, np.ndarray]:
    """Dense minimum eigenvalues of the seed operator and of its partial flip.

    Batched over broadcastable arrays of alpha and gamma.
    """
    alpha = np.asarray(alpha, dtype=float)[..., None, None]
    gamma = np.asarray(gamma, dtype=float)[..., None, None]
    out = []
    for a_part, g_part in (
        (_ALPHA_PART, _GAMMA_PART),
        (partial_spin_flip(_ALPHA_PART), partial_spin_flip(_GAMMA_PART)),
    ):
        mats = I4 + alpha * to_dense(a_part) + gamma * to_dense(g_part)
        out.append(np.linalg.eigvalsh(mats)[..., 0])
    return out[0], out[1]
