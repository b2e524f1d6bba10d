"""Mean estimation: oracle loading, phase-measurement law, boosting."""

import math

import numpy as np
import pytest

from qintlab.amp_est import (
    MeanEstimate,
    RealOracle,
    estimate_mean,
    estimate_mean_from_amplitude,
    exact_estimate_distribution,
    exact_outcome_distribution,
    median_boost,
    phase_estimation_distribution,
    prepared_state,
    sample_estimate_from_amplitude,
    smallest_power_for_error,
)
from qintlab.ledger import ResourceLedger

CONFIDENCE = 8 / math.pi**2


def bound(a, M):
    return 2 * math.pi * math.sqrt(a * (1 - a)) / M + math.pi**2 / M**2


def test_oracle_validation():
    with pytest.raises(ValueError):
        RealOracle([])
    with pytest.raises(ValueError):
        RealOracle([0.5, 1.2])
    with pytest.raises(ValueError):
        RealOracle([[0.1, 0.2]])


def test_oracle_padding():
    oracle = RealOracle([1.0, 1.0, 1.0])
    assert oracle.n == 3 and oracle.n_padded == 4
    assert oracle.padded_mean() == pytest.approx(0.75)


def test_prepared_state_loads_the_mean():
    rng = np.random.default_rng(0)
    oracle = RealOracle(rng.random(1000))
    probs = np.abs(prepared_state(oracle).amplitudes) ** 2
    assert abs(probs[0::2].sum() - oracle.padded_mean()) <= 1e-12


def test_all_zeros_estimates_zero():
    oracle = RealOracle(np.zeros(8))
    for mode in ("exact", "analytic"):
        est = estimate_mean(oracle, 16, np.random.default_rng(1), mode=mode)
        assert est.value == 0.0


def test_all_ones_estimates_one():
    oracle = RealOracle(np.ones(8))
    for M in (4, 16, 64):
        for mode in ("exact", "analytic"):
            est = estimate_mean(oracle, M, np.random.default_rng(2), mode=mode)
            assert est.value == pytest.approx(1.0, abs=1e-12)


def test_alternating_half_is_exact_on_two_ancillas():
    # a = 1/2 has phase 1/4, exactly representable with M = 4
    oracle = RealOracle([0.0, 1.0, 0.0, 1.0])
    for seed in range(10):
        for mode in ("exact", "analytic"):
            est = estimate_mean(oracle, 4, np.random.default_rng(seed), mode=mode)
            assert est.value == pytest.approx(0.5, abs=1e-12)


def test_power_of_two_budget_required():
    oracle = RealOracle([0.5])
    for bad in (0, 1, 3, 12):
        with pytest.raises(ValueError):
            estimate_mean(oracle, bad, np.random.default_rng(0))


def test_distribution_certain_cases():
    est, probs = phase_estimation_distribution(0.0, 16)
    assert probs[0] == pytest.approx(1.0, abs=1e-12) and est[0] == 0.0
    est, probs = phase_estimation_distribution(0.5, 4)
    assert probs[np.isclose(est, 0.5)].sum() == pytest.approx(1.0, abs=1e-12)
    est, probs = phase_estimation_distribution(1.0, 8)
    assert probs[-1] == pytest.approx(1.0, abs=1e-12) and est[-1] == pytest.approx(1.0)


@pytest.mark.parametrize("a", [0.0, 0.07, 0.3, 0.5, 0.95, 1.0])
@pytest.mark.parametrize("M", [2, 4, 32, 256])
def test_distribution_sums_to_one(a, M):
    _, probs = phase_estimation_distribution(a, M)
    assert abs(probs.sum() - 1.0) <= 1e-12
    assert probs.min() >= -1e-15


def test_distribution_concentrates_within_contract_bound():
    est, probs = phase_estimation_distribution(0.3, 64)
    mass = probs[np.abs(est - 0.3) <= bound(0.3, 64)].sum()
    assert mass >= CONFIDENCE


def test_exact_simulation_matches_analytic_law():
    rng = np.random.default_rng(7)
    for n in (3, 8, 16):
        oracle = RealOracle(rng.random(n))
        for M in (4, 16, 64):
            _, exact = exact_estimate_distribution(oracle, M)
            _, analytic = phase_estimation_distribution(oracle.padded_mean(), M)
            assert 0.5 * np.abs(exact - analytic).sum() <= 1e-10


def test_exact_mode_empirical_frequencies_match_analytic():
    rng = np.random.default_rng(21)
    oracle = RealOracle(rng.random(64))
    M = 64
    raw = exact_outcome_distribution(oracle, M)
    outcomes = np.random.default_rng(5).choice(M, size=10_000, p=raw / raw.sum())
    estimates = np.sin(np.pi * np.minimum(outcomes, M - outcomes) / M) ** 2
    grid, probs = phase_estimation_distribution(oracle.padded_mean(), M)
    empirical = np.array([(np.abs(estimates - g) < 1e-12).mean() for g in grid])
    assert 0.5 * np.abs(empirical - probs).sum() <= 0.02


def test_estimates_stay_in_unit_interval():
    rng = np.random.default_rng(11)
    for n in (5, 9, 300):
        oracle = RealOracle(rng.random(n) ** 0.2)  # means close to 1
        for _ in range(20):
            est = estimate_mean(oracle, 16, rng)
            assert 0.0 <= est.value <= 1.0


def test_query_accounting():
    oracle = RealOracle(np.full(8, 0.37))
    ledger = ResourceLedger()
    estimate_mean(oracle, 32, np.random.default_rng(0), ledger=ledger)
    assert ledger.quantum_queries == 32
    assert ledger.random_bits == 5  # reading out five ancilla qubits
    assert ledger.gates > 0


def test_amplitude_entry_point_matches_analytic_mode():
    oracle = RealOracle(np.linspace(0.1, 0.9, 10))
    direct = estimate_mean(oracle, 64, np.random.default_rng(3), mode="analytic")
    via_amp = estimate_mean_from_amplitude(
        oracle.padded_mean(), oracle.n, oracle.n_padded, 64, np.random.default_rng(3)
    )
    assert direct.value == via_amp.value
    assert direct.queries_used == via_amp.queries_used


def test_smallest_power_for_error():
    for eps in (0.2, 0.05, 2**-5, 2**-9):
        M = smallest_power_for_error(eps)
        assert math.pi / M + math.pi**2 / M**2 <= eps * (1 + 1e-12)
        half = M // 2
        assert math.pi / half + math.pi**2 / half**2 > eps


def test_median_boost_validation_and_identity():
    runs = iter([MeanEstimate(0.4, 8, "analytic")])
    with pytest.raises(ValueError):
        median_boost(lambda r: next(runs), 2, np.random.default_rng(0))
    single = median_boost(lambda r: MeanEstimate(0.4, 8, "analytic"), 1, np.random.default_rng(0))
    assert single.value == 0.4 and single.queries_used == 8


def test_median_boost_constant_runs():
    boosted = median_boost(lambda r: MeanEstimate(0.7, 16, "exact"), 5, np.random.default_rng(0))
    assert boosted.value == 0.7
    assert boosted.queries_used == 80
    assert boosted.mode == "exact"


def test_boost_failure_probability_binomial_tail():
    # failure of a median of 15 runs each failing with probability 1/4
    tail = sum(math.comb(15, j) * 0.25**j * 0.75 ** (15 - j) for j in range(8, 16))
    assert round(tail, 4) == 0.0173


def test_median_boost_suppresses_failures_empirically():
    rng = np.random.default_rng(99)

    def flaky(r):
        # fails (returns a far-off value) with probability 1/4
        value = 0.9 if r.random() < 0.25 else 0.5
        return MeanEstimate(value, 4, "analytic")

    failures = sum(
        median_boost(flaky, 15, np.random.default_rng(seed)).value != 0.5
        for seed in range(400)
    )
    # expected rate 0.0173; allow generous statistical slack
    assert failures / 400 <= 0.05


def test_query_scaling_linear_in_inverse_error():
    # smallest sufficient power of two budget grows linearly in 1/eps
    a_grid = np.linspace(0.1, 0.9, 9)
    products = []
    for j in range(3, 9):
        eps = 2.0**-j
        M = 2
        while True:
            achieved = all(
                phase_estimation_distribution(a, M)[1][
                    np.abs(phase_estimation_distribution(a, M)[0] - a) <= eps
                ].sum()
                >= 0.75
                for a in a_grid
            )
            if achieved:
                break
            M *= 2
        products.append(M * eps)
    assert max(products) / min(products) <= 4.0


def test_sampling_helper_respects_distribution():
    rng = np.random.default_rng(123)
    draws = [sample_estimate_from_amplitude(0.5, 4, rng) for _ in range(50)]
    assert all(d == pytest.approx(0.5, abs=1e-12) for d in draws)
