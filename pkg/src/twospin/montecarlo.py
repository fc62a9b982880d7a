"""Seeded Monte Carlo checks of covariant measurements and the LOCC strategy.

Every run is split into fixed-size chunks. Chunk ``k`` draws from its own
Philox stream keyed by ``(rng_seed, k)`` and reports sums and sums of squares,
which are combined in chunk order. Results are therefore bit-identical for any
number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .covariant import CovariantSeed, density_polynomial
from .fidelity import as_function
from .operators import unit_vector

CHUNK_SIZE = 1 << 16
X_AXIS = np.array([1.0, 0.0, 0.0])
Y_AXIS = np.array([0.0, 1.0, 0.0])


class InadmissibleSeedError(ValueError):
    """Outcome density is negative somewhere, so it cannot be sampled."""


def make_rng(rng_seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for substream ``stream`` of ``rng_seed``."""
    if rng_seed < 0 or stream < 0:
        raise ValueError("rng_seed and stream must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([rng_seed, stream])))


@dataclass(frozen=True)
class SimulationReport:
    trials: int
    mean_fidelity: float
    standard_error: float
    rng_seed: int
    acceptance_rate: float = 1.0
    max_envelope_ratio: float = 0.0

    def z_score(self, expected: float) -> float:
        if self.standard_error == 0:
            return 0.0 if self.mean_fidelity == expected else math.inf
        return (self.mean_fidelity - expected) / self.standard_error

    def to_dict(self) -> dict:
        return asdict(self)


def sample_uniform_direction(rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform point(s) on the unit sphere: cos(theta) and phi drawn uniformly."""
    shape = () if size is None else (size,)
    u = rng.uniform(-1.0, 1.0, shape)
    phi = rng.uniform(0.0, 2 * np.pi, shape)
    s = np.sqrt(1 - u * u)
    return np.stack([s * np.cos(phi), s * np.sin(phi), u], axis=-1)


def _density_extremes(seed: CovariantSeed) -> tuple[float, float]:
    """(min, max) of 1 + alpha u + (gamma/2) P2(u) over u in [-1, 1]."""
    # q(u) = (1 - gamma/4) + alpha u + (3 gamma / 4) u^2
    candidates = [-1.0, 1.0]
    if seed.gamma != 0:
        u_star = -2 * seed.alpha / (3 * seed.gamma)
        if -1 <= u_star <= 1:
            candidates.append(u_star)
    vals = [float(density_polynomial(seed, u)) for u in candidates]
    return min(vals), max(vals)


def envelope_constant(seed: CovariantSeed) -> float:
    return _density_extremes(seed)[1]


def density_minimum(seed: CovariantSeed) -> float:
    return _density_extremes(seed)[0]


def _check_sampleable(seed: CovariantSeed):
    lo = density_minimum(seed)
    if lo < -1e-12:
        raise InadmissibleSeedError(
            f"outcome density of {seed} reaches {lo:.6g} < 0; the seed is not a measurement"
        )


def _sample_outcomes(seed: CovariantSeed, m: np.ndarray, rng: np.random.Generator):
    """Rejection sampling of guesses for each row of ``m``.

    Returns (guesses, number of proposals, largest density/envelope ratio seen).
    """
    env = envelope_constant(seed)
    out = np.empty_like(m)
    pending = np.arange(len(m))
    proposals = 0
    max_ratio = 0.0
    while pending.size:
        n = sample_uniform_direction(rng, pending.size)
        ratio = density_polynomial(seed, np.sum(n * m[pending], axis=1)) / env
        accept = rng.uniform(size=pending.size) < ratio
        proposals += pending.size
        max_ratio = max(max_ratio, float(ratio.max()))
        out[pending[accept]] = n[accept]
        pending = pending[~accept]
    return out, proposals, max_ratio


def sample_outcome(seed: CovariantSeed, m, rng: np.random.Generator) -> np.ndarray:
    """Draw one guessed direction given spins along ``m``."""
    _check_sampleable(seed)
    m = unit_vector(m)
    out, _, _ = _sample_outcomes(seed, m[None, :], rng)
    return out[0]


def _run_chunks(work, trials: int, rng_seed: int, chunk_size: int, workers: int):
    if trials < 1:
        raise ValueError("trials must be at least 1")
    sizes = [chunk_size] * (trials // chunk_size)
    if trials % chunk_size:
        sizes.append(trials % chunk_size)
    jobs = [(k, size) for k, size in enumerate(sizes)]

    def run(job):
        k, size = job
        return work(make_rng(rng_seed, k), size)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    return total, total_sq, parts


def _mean_and_se(total: float, total_sq: float, trials: int) -> tuple[float, float]:
    mean = total / trials
    if trials < 2:
        return mean, 0.0
    var = max(total_sq - trials * mean * mean, 0.0) / (trials - 1)
    return mean, math.sqrt(var / trials)


def estimate_fidelity(
    seed: CovariantSeed,
    fidelity,
    trials: int,
    rng_seed: int,
    chunk_size: int = CHUNK_SIZE,
    workers: int = 1,
) -> SimulationReport:
    """Monte Carlo average of f(n . m), m uniform and n drawn from the measurement."""
    _check_sampleable(seed)
    f = as_function(fidelity)

    def work(rng, size):
        m = sample_uniform_direction(rng, size)
        n, proposals, max_ratio = _sample_outcomes(seed, m, rng)
        vals = np.asarray(f(np.sum(n * m, axis=1)), dtype=float)
        return float(vals.sum()), float(vals @ vals), proposals, max_ratio

    total, total_sq, parts = _run_chunks(work, trials, rng_seed, chunk_size, workers)
    mean, se = _mean_and_se(total, total_sq, trials)
    return SimulationReport(
        trials, mean, se, rng_seed,
        acceptance_rate=trials / sum(p[2] for p in parts),
        max_envelope_ratio=max(p[3] for p in parts),
    )


def _check_axes(a, b):
    a, b = unit_vector(a), unit_vector(b)
    if abs(a @ b) > 1e-12:
        raise ValueError(f"measurement axes must be orthogonal, got a . b = {a @ b!r}")
    return a, b


def _bisectrix(m, a, b, rng, antiparallel=False):
    """Vectorized bisectrix guesses for spins along rows of ``m``."""
    p_alice = (1 + m @ a) / 2
    alice = np.where(rng.uniform(size=len(m)) < p_alice, 1.0, -1.0)
    if antiparallel:
        # Bob's spin points along -m; his flipped measurement relabels the outcome
        p_bob = (1 - m @ b) / 2
        bob = -np.where(rng.uniform(size=len(m)) < p_bob, 1.0, -1.0)
    else:
        p_bob = (1 + m @ b) / 2
        bob = np.where(rng.uniform(size=len(m)) < p_bob, 1.0, -1.0)
    return (alice[:, None] * a + bob[:, None] * b) / math.sqrt(2)


def locc_bisectrix_trial(m, a, b, rng: np.random.Generator) -> np.ndarray:
    """One round: Alice measures along ``a``, Bob along ``b``, guess the bisectrix."""
    a, b = _check_axes(a, b)
    m = unit_vector(m)
    return _bisectrix(m[None, :], a, b, rng)[0]


def estimate_locc_strategy(
    trials: int,
    rng_seed: int,
    a=X_AXIS,
    b=Y_AXIS,
    antiparallel: bool = False,
    chunk_size: int = CHUNK_SIZE,
    workers: int = 1,
) -> SimulationReport:
    """Mean overlap fidelity (1 + m . guess)/2 of the bisectrix strategy."""
    a, b = _check_axes(a, b)

    def work(rng, size):
        m = sample_uniform_direction(rng, size)
        guess = _bisectrix(m, a, b, rng, antiparallel)
        vals = (1 + np.sum(m * guess, axis=1)) / 2
        return float(vals.sum()), float(vals @ vals)

    total, total_sq, _ = _run_chunks(work, trials, rng_seed, chunk_size, workers)
    mean, se = _mean_and_se(total, total_sq, trials)
    return SimulationReport(trials, mean, se, rng_seed)

