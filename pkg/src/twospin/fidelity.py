"""Fidelity functions of the angle between true and guessed directions.

A fidelity f(cos theta) is represented by its Legendre coefficients. Only the
first three coefficients reach the average fidelity of a covariant two-spin
measurement; higher orders are kept as ``tail`` for reporting.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .covariant import CovariantSeed, DiscretePOVM, density_polynomial
from .operators import product_expectation


def legendre(n: int, u):
    """P_n(u) by the Bonnet recurrence."""
    u = np.asarray(u, dtype=float)
    p_prev, p = np.ones_like(u), u
    if n == 0:
        return p_prev
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * u * p - k * p_prev) / (k + 1)
    return p


def legendre_series(coeffs, u):
    u = np.asarray(u, dtype=float)
    return sum(c * legendre(n, u) for n, c in enumerate(coeffs)) + np.zeros_like(u)


@lru_cache(maxsize=None)
def gauss_legendre(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class FidelitySpec:
    f0: float
    f1: float
    f2: float
    tail: tuple = ()

    def __post_init__(self):
        vals = (self.f0, self.f1, self.f2, *self.tail)
        if not np.all(np.isfinite(vals)):
            raise ValueError("Legendre coefficients must be finite")
        for name in ("f0", "f1", "f2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "tail", tuple(float(t) for t in self.tail))

    @property
    def coefficients(self) -> tuple:
        return (self.f0, self.f1, self.f2, *self.tail)

    def __call__(self, u):
        return legendre_series(self.coefficients, u)


def project_legendre(f, order: int = 2, nodes: int = 64) -> FidelitySpec:
    """Legendre coefficients of ``f`` on [-1, 1] up to ``order``.

    f_n = (2n + 1)/2 * int f(u) P_n(u) du, by Gauss-Legendre quadrature.
    ``f`` must accept numpy arrays.
    """
    if nodes < 2 * order + 1:
        raise ValueError(f"need at least {2 * order + 1} nodes for order {order}, got {nodes}")
    x, w = gauss_legendre(nodes)
    fx = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    coeffs = [(2 * n + 1) / 2 * np.sum(w * fx * legendre(n, x)) for n in range(order + 1)]
    coeffs += [0.0] * (3 - len(coeffs))
    return FidelitySpec(coeffs[0], coeffs[1], coeffs[2], tuple(coeffs[3:]))


def truncation_residual(f, spec: FidelitySpec, nodes: int = 64) -> float:
    """Max |f - series| over the quadrature nodes."""
    x, _ = gauss_legendre(nodes)
    return float(np.max(np.abs(f(x) - spec(x))))


def overlap(u):
    return (1 + np.asarray(u)) / 2


def plane(u):
    return 1 - np.asarray(u) ** 2


NAMED_FUNCTIONS = {"overlap": overlap, "plane": plane}
NAMED_SPECS = {
    "overlap": FidelitySpec(1 / 2, 1 / 2, 0.0),
    "plane": FidelitySpec(2 / 3, 0.0, -2 / 3),
}


def named_spec(key: str) -> FidelitySpec:
    try:
        return NAMED_SPECS[key]
    except KeyError:
        raise ValueError(f"unknown fidelity {key!r}; choose from {sorted(NAMED_SPECS)}") from None


def as_function(fidelity):
    """Accept a named key, a FidelitySpec, or a vectorized callable."""
    if isinstance(fidelity, str):
        named_spec(fidelity)
        return NAMED_FUNCTIONS[fidelity]
    if callable(fidelity):
        return fidelity
    raise TypeError(f"cannot use {fidelity!r} as a fidelity function")


def average_fidelity(seed: CovariantSeed, spec: FidelitySpec) -> float:
    return spec.f0 + seed.alpha / 3 * spec.f1 + seed.gamma / 10 * spec.f2


@lru_cache(maxsize=None)
def sphere_quadrature(nodes: int = 64, azimuths: int = 64):
    """Points and weights integrating against the uniform probability measure.

    Gauss-Legendre in cos(theta) times the periodic trapezoid rule in phi.
    """
    x, w = gauss_legendre(nodes)
    phi = 2 * np.pi * np.arange(azimuths) / azimuths
    u, p = np.meshgrid(x, phi, indexing="ij")
    s = np.sqrt(1 - u**2)
    pts = np.stack([s * np.cos(p), s * np.sin(p), u], axis=-1).reshape(-1, 3)
    wts = np.repeat(w / 2, azimuths) / azimuths
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def average_fidelity_by_quadrature(seed: CovariantSeed, f, nodes: int = 64, azimuths: int = 64) -> float:
    """Average of f(n . m) times the outcome density, guess fixed at +z."""
    f = as_function(f)
    pts, wts = sphere_quadrature(nodes, azimuths)
    u = pts[:, 2]
    return float(np.sum(wts * f(u) * density_polynomial(seed, u)))


def discrete_average_fidelity(povm: DiscretePOVM, f, nodes: int = 64, azimuths: int = 64) -> float:
    """Average fidelity of a finite POVM over uniformly distributed parallel spins."""
    f = as_function(f)
    pts, wts = sphere_quadrature(nodes, azimuths)
    total = 0.0
    for n, weight, op in povm.elements:
        prob = product_expectation(op, pts, pts)
        total += weight * np.sum(wts * prob * f(pts @ n))
    return float(total)
