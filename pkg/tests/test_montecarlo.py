import math

import numpy as np
import pytest
import scipy.integrate

from twospin.covariant import CovariantSeed, density_polynomial, legendre2
from twospin.fidelity import average_fidelity, named_spec
from twospin.montecarlo import (
    InadmissibleSeedError,
    _sample_outcomes,
    envelope_constant,
    estimate_fidelity,
    estimate_locc_strategy,
    locc_bisectrix_trial,
    make_rng,
    sample_outcome,
    sample_uniform_direction,
)

OPTIMAL_SEEDS = [
    CovariantSeed(1.5, 1.0),
    CovariantSeed(math.sqrt(3), 2.0),
    CovariantSeed(math.sqrt(2), 1.0),
    CovariantSeed(0.0, -2.0),
    CovariantSeed(0.0, -1.0),
]
LOCC_VALUE = 0.5 + 1 / (3 * math.sqrt(2))


def moment(seed, g):
    """E[g(n . m)] under the outcome density, by adaptive quadrature."""
    val, _ = scipy.integrate.quad(lambda u: g(u) * float(density_polynomial(seed, u)) / 2, -1, 1)
    return val


def test_uniform_direction_moments():
    n = sample_uniform_direction(make_rng(1), 1_000_000)
    assert np.allclose(np.linalg.norm(n, axis=1), 1, atol=1e-12)
    assert np.all(np.abs(n.mean(axis=0)) < 4 / 1000)
    z2 = n[:, 2] ** 2
    assert abs(z2.mean() - 1 / 3) < 4 * z2.std() / 1000


def test_uniform_direction_deterministic():
    a = sample_uniform_direction(make_rng(7))
    b = sample_uniform_direction(make_rng(7))
    assert a.shape == (3,) and np.array_equal(a, b)
    assert not np.array_equal(a, sample_uniform_direction(make_rng(7, 1)))


def test_make_rng_rejects_negative():
    with pytest.raises(ValueError):
        make_rng(-1)


def test_envelope_constant_closed_form():
    for seed in OPTIMAL_SEEDS + [CovariantSeed(0.2, 0.9), CovariantSeed(-0.4, -1.3)]:
        u = np.linspace(-1, 1, 200001)
        assert envelope_constant(seed) == pytest.approx(density_polynomial(seed, u).max(), abs=1e-9)
        assert envelope_constant(seed) >= density_polynomial(seed, u).max() - 1e-15


def test_uniform_seed_sampling():
    rep = estimate_fidelity(CovariantSeed(0, 0), "overlap", 10_000, 3)
    assert rep.acceptance_rate == 1.0
    assert abs(rep.mean_fidelity - 0.5) < 4 * rep.standard_error


def test_sample_outcome_first_moment():
    seed = CovariantSeed(1.5, 1.0)
    expected = moment(seed, lambda u: u)
    assert expected == pytest.approx(seed.alpha / 3, abs=1e-12)
    m = np.tile([0.0, 0.0, 1.0], (1_000_000, 1))
    n, _, _ = _sample_outcomes(seed, m, make_rng(11))
    u = n[:, 2]
    assert abs(u.mean() - expected) < 4 * u.std() / 1000


def test_sample_outcome_second_moment():
    seed = CovariantSeed(0.0, -2.0)
    expected = moment(seed, legendre2)
    assert expected == pytest.approx(seed.gamma / 10, abs=1e-12)
    m = np.tile([0.0, 0.0, 1.0], (1_000_000, 1))
    n, _, _ = _sample_outcomes(seed, m, make_rng(12))
    p2 = legendre2(n[:, 2])
    assert abs(p2.mean() - expected) < 4 * p2.std() / 1000


def test_sample_outcome_single_draw():
    n = sample_outcome(CovariantSeed(1.5, 1.0), (0, 0, 1), make_rng(5))
    assert n.shape == (3,) and np.linalg.norm(n) == pytest.approx(1)
    assert np.array_equal(n, sample_outcome(CovariantSeed(1.5, 1.0), (0, 0, 1), make_rng(5)))


def test_negative_density_rejected():
    with pytest.raises(InadmissibleSeedError):
        sample_outcome(CovariantSeed(3.0, 0.0), (0, 0, 1), make_rng(0))
    with pytest.raises(InadmissibleSeedError):
        estimate_fidelity(CovariantSeed(0.0, -3.0), "plane", 10, 0)


def test_envelope_never_exceeded():
    for seed in OPTIMAL_SEEDS:
        rep = estimate_fidelity(seed, "overlap", 200_000, 4)
        assert rep.max_envelope_ratio <= 1 + 1e-12
        assert rep.acceptance_rate == pytest.approx(1 / envelope_constant(seed), rel=0.02)


@pytest.mark.parametrize(
    "seed, key",
    [(CovariantSeed(1.5, 1.0), "overlap"), (CovariantSeed(math.sqrt(3), 2.0), "overlap"), (CovariantSeed(0, -2), "plane")],
)
def test_estimate_matches_closed_form(seed, key):
    rep = estimate_fidelity(seed, key, 1_000_000, 2024)
    analytic = average_fidelity(seed, named_spec(key))
    assert 1.5e-4 < rep.standard_error < 3.5e-4
    assert abs(rep.mean_fidelity - analytic) < 3 * rep.standard_error


def test_estimate_accepts_spec_and_callable():
    seed = CovariantSeed(0.5, 0.5)
    spec = named_spec("plane")
    a = estimate_fidelity(seed, spec, 5000, 9)
    b = estimate_fidelity(seed, lambda u: 1 - u**2, 5000, 9)
    assert a.mean_fidelity == pytest.approx(b.mean_fidelity, abs=1e-12)


def test_report_standard_error_definition():
    seed = CovariantSeed(1.5, 1.0)
    trials = 5000
    rep = estimate_fidelity(seed, "overlap", trials, 77, chunk_size=trials)
    rng = make_rng(77, 0)
    m = sample_uniform_direction(rng, trials)
    n, _, _ = _sample_outcomes(seed, m, rng)
    vals = (1 + np.sum(n * m, axis=1)) / 2
    assert rep.mean_fidelity == pytest.approx(vals.mean(), abs=1e-14)
    assert rep.standard_error == pytest.approx(vals.std(ddof=1) / math.sqrt(trials), rel=1e-9)


def test_reproducible_and_worker_independent():
    seed = CovariantSeed(math.sqrt(2), 1.0)
    ref = estimate_fidelity(seed, "overlap", 50_000, 31, chunk_size=4096)
    assert estimate_fidelity(seed, "overlap", 50_000, 31, chunk_size=4096) == ref
    assert estimate_fidelity(seed, "overlap", 50_000, 31, chunk_size=4096, workers=4) == ref
    loc = estimate_locc_strategy(50_000, 31, chunk_size=4096)
    assert estimate_locc_strategy(50_000, 31, chunk_size=4096, workers=3) == loc


def test_trials_must_be_positive():
    with pytest.raises(ValueError):
        estimate_locc_strategy(0, 1)


def test_unbiased_over_repetitions():
    master = np.random.SeedSequence(99)
    seeds = [int(s.generate_state(1)[0]) for s in master.spawn(100)]
    for seed in OPTIMAL_SEEDS:
        for key in ("overlap", "plane"):
            analytic = average_fidelity(seed, named_spec(key))
            hits = 0
            for s in seeds:
                rep = estimate_fidelity(seed, key, 2000, s)
                hits += abs(rep.mean_fidelity - analytic) <= 4 * rep.standard_error
            assert hits >= 95, (seed, key, hits)


# -- LOCC bisectrix strategy -------------------------------------------------

def test_bisectrix_aligned_event():
    a, b = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
    m = (a + b) / math.sqrt(2)
    rng = make_rng(8)
    trials = 10_000
    hits = sum(np.allclose(locc_bisectrix_trial(m, a, b, rng), m, atol=1e-15) for _ in range(trials))
    p = (1 + 1 / math.sqrt(2)) ** 2 / 4
    assert abs(hits / trials - p) < 4 * math.sqrt(p * (1 - p) / trials)


def test_bisectrix_orthogonal_spin_uniform_guesses():
    a, b = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
    rng = make_rng(9)
    trials = 10_000
    counts = {}
    for _ in range(trials):
        g = locc_bisectrix_trial((0, 0, 1), a, b, rng)
        assert np.linalg.norm(g) == pytest.approx(1, abs=1e-15)
        key = (int(np.sign(g[0])), int(np.sign(g[1])))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 4
    for c in counts.values():
        assert abs(c / trials - 0.25) < 4 * math.sqrt(0.25 * 0.75 / trials)


def test_bisectrix_rejects_non_orthogonal_axes():
    with pytest.raises(ValueError):
        locc_bisectrix_trial((0, 0, 1), (1, 0, 0), (1, 1, 0) / np.sqrt(2), make_rng(0))


def test_locc_strategy_value():
    rep = estimate_locc_strategy(1_000_000, 5)
    assert abs(rep.mean_fidelity - LOCC_VALUE) < 3 * rep.standard_error


def test_locc_strategy_single_trial():
    rep = estimate_locc_strategy(1, 5)
    assert 0 <= rep.mean_fidelity <= 1 and rep.standard_error == 0


def test_locc_strategy_axis_independent():
    a = np.array([1.0, 2.0, 2.0]) / 3
    b = np.array([2.0, -2.0, 1.0]) / 3
    rep = estimate_locc_strategy(400_000, 6, a=a, b=b)
    assert abs(rep.mean_fidelity - LOCC_VALUE) < 4 * rep.standard_error


def test_strategy_attains_locc_optimum():
    strat = estimate_locc_strategy(1_000_000, 17)
    cov = estimate_fidelity(CovariantSeed(math.sqrt(2), 1.0), "overlap", 1_000_000, 18)
    combined = math.hypot(strat.standard_error, cov.standard_error)
    assert abs(strat.mean_fidelity - cov.mean_fidelity) < 4 * combined


def test_parallel_antiparallel_equivalent_under_locc():
    par = estimate_locc_strategy(1_000_000, 21)
    anti = estimate_locc_strategy(1_000_000, 22, antiparallel=True)
    combined = math.hypot(par.standard_error, anti.standard_error)
    assert abs(par.mean_fidelity - anti.mean_fidelity) < 4 * combined
    assert abs(anti.mean_fidelity - LOCC_VALUE) < 4 * anti.standard_error
