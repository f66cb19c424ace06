"""Tests for the Monte Carlo protocol simulator: reproducibility, witness
estimates, input histograms, and the empirical randomness estimate."""
import math

import numpy as np
import pytest

from sdiqrac import (
    BlochVector,
    EpsilonPair,
    LambdaDistribution,
    Measurement,
    Strategy,
    ValidationError,
    empirical_min_entropy,
    min_entropy_at_max_violation,
    optimal_strategy,
    quantum_bound,
    run,
    trial_log_to_csv,
)
from sdiqrac.simulate import SimulationSummary

UNIFORM = LambdaDistribution.uniform()
EPS0 = EpsilonPair(0.0, 0.0)

# chi-squared upper critical value, 7 degrees of freedom, alpha = 0.001
CHI2_CRIT_DF7 = 24.3219


class TestReproducibility:
    def test_same_seed_same_stream(self):
        a = run(EPS0, UNIFORM, "optimal", trials=50_000, seed=123,
                log_trials=True)
        b = run(EPS0, UNIFORM, "optimal", trials=50_000, seed=123,
                log_trials=True)
        assert a.E_hat == b.E_hat
        assert np.array_equal(a.counts, b.counts)
        assert np.array_equal(a.trial_log, b.trial_log)

    def test_different_seed_differs(self):
        a = run(EPS0, UNIFORM, "optimal", trials=50_000, seed=123)
        b = run(EPS0, UNIFORM, "optimal", trials=50_000, seed=124)
        assert not np.array_equal(a.counts, b.counts)

    def test_explicit_strategy_list_matches_named_optimal(self):
        eps = EpsilonPair(0.1, 0.05)
        named = run(eps, UNIFORM, "optimal", trials=20_000, seed=5)
        listed = run(eps, UNIFORM,
                     [optimal_strategy(eps, k) for k in range(8)],
                     trials=20_000, seed=5)
        assert np.array_equal(named.counts, listed.counts)


class TestWitnessEstimate:
    def test_unbiased_optimal_strategy(self):
        summary = run(EPS0, UNIFORM, "optimal", trials=400_000, seed=2)
        expected, _ = quantum_bound(EPS0)
        assert abs(summary.E_hat - expected) <= 3 * summary.std_err

    def test_aligned_branch_strategy(self):
        eps = EpsilonPair(0.4, 0.4)
        summary = run(eps, UNIFORM, "optimal", trials=400_000, seed=3)
        assert abs(summary.E_hat - 0.982) <= 3 * summary.std_err

    def test_counts_sum_to_trials(self):
        summary = run(EpsilonPair(0.2, 0.3), UNIFORM, "optimal",
                      trials=12_345, seed=9)
        assert summary.counts.sum() == 12_345
        assert summary.joint_counts.sum() == 12_345

    def test_input_histogram_is_uniform_under_the_uniform_mixture(self):
        n = 400_000
        summary = run(EpsilonPair(0.1, 0.05), UNIFORM, "optimal",
                      trials=n, seed=4)
        sigma = math.sqrt(n * (1 / 8) * (7 / 8))
        for cell in summary.joint_counts.reshape(-1):
            assert abs(cell - n / 8) <= 3 * sigma

    def test_input_histogram_chi_squared(self):
        # 100 seeded runs; at alpha = 0.001 more than two failures would be
        # wildly improbable for honest sampling
        failures = 0
        for seed in range(100):
            summary = run(EpsilonPair(0.1, 0.05), UNIFORM, "optimal",
                          trials=20_000, seed=seed)
            observed = summary.joint_counts.reshape(-1)
            expected = 20_000 / 8
            chi2 = float(((observed - expected) ** 2 / expected).sum())
            if chi2 > CHI2_CRIT_DF7:
                failures += 1
        assert failures <= 2

    def test_estimate_never_exceeds_the_bound_by_much(self):
        for e1, e2 in [(0.0, 0.0), (0.05, 0.05), (0.1, 0.2)]:
            eps = EpsilonPair(e1, e2)
            summary = run(eps, UNIFORM, "optimal", trials=100_000, seed=6)
            bound, _ = quantum_bound(eps)
            assert summary.E_hat <= bound + 5 * summary.std_err


class TestEmpiricalMinEntropy:
    def test_converges_to_the_closed_form(self):
        summary = run(EPS0, UNIFORM, "optimal", trials=1_000_000, seed=1)
        h = empirical_min_entropy(summary, UNIFORM)
        assert abs(h - min_entropy_at_max_violation(EPS0)) <= 0.01

    def test_deterministic_strategy_certifies_nothing(self):
        axis = BlochVector(1.0, 0.0, 0.0)
        strategy = Strategy((axis, axis, axis, axis),
                            (Measurement.rank1(axis),
                             Measurement.rank1(axis)))
        summary = run(EpsilonPair(0.1, 0.1), UNIFORM, strategy,
                      trials=100_000, seed=8)
        h = empirical_min_entropy(summary, UNIFORM)
        assert h == pytest.approx(0.0, abs=1e-12)

    def test_empty_cells_are_undefined(self):
        summary = run(EPS0, UNIFORM, "optimal", trials=5, seed=0)
        with pytest.warns(UserWarning, match="min-entropy undefined"):
            h = empirical_min_entropy(summary, UNIFORM)
        assert math.isnan(h)

    def test_no_trials_is_undefined(self):
        empty = SimulationSummary(0, 0, np.zeros((8, 2, 2, 2, 2), dtype=int))
        with pytest.warns(UserWarning, match="no trials"):
            assert math.isnan(empirical_min_entropy(empty, UNIFORM))


class TestSummaryPlumbing:
    def test_merge_adds_exactly(self):
        a = run(EPS0, UNIFORM, "optimal", trials=30_000, seed=10)
        b = run(EPS0, UNIFORM, "optimal", trials=20_000, seed=11)
        merged = a.merge(b)
        assert merged.trials == 50_000
        assert merged.success_count == a.success_count + b.success_count
        assert np.array_equal(merged.counts, a.counts + b.counts)

    def test_trial_log_round_trip(self):
        summary = run(EpsilonPair(0.2, 0.1), UNIFORM, "optimal",
                      trials=500, seed=12, log_trials=True)
        csv = trial_log_to_csv(summary)
        lines = csv.strip().split("\n")
        assert lines[0] == "lambda,a0,a1,y,b"
        assert len(lines) == 501
        records = list(summary.records())
        assert len(records) == 500
        first = records[0]
        assert first.a in ("00", "01", "10", "11")
        assert first.y in (0, 1) and first.b in (0, 1)

    def test_log_refused_without_flag(self):
        summary = run(EPS0, UNIFORM, "optimal", trials=100, seed=0)
        with pytest.raises(ValidationError):
            trial_log_to_csv(summary)

    def test_observer_view_strips_hidden_variable_tables(self):
        summary = run(EPS0, UNIFORM, "optimal", trials=100, seed=0)
        full = summary.to_json_dict()
        observer = summary.to_json_dict(observer_view=True)
        assert "counts" in full and "lambda_counts" in full
        assert "counts" not in observer and "lambda_counts" not in observer
        assert observer["trials"] == 100

    def test_input_validation(self):
        with pytest.raises(ValidationError):
            run(EPS0, UNIFORM, "optimal", trials=0)
        with pytest.raises(ValidationError):
            run(EPS0, UNIFORM, "clever", trials=10)
        with pytest.raises(ValidationError):
            run(EPS0, UNIFORM, [optimal_strategy(EPS0, 0)] * 7, trials=10)
        with pytest.raises(ValidationError):
            run(EPS0, UNIFORM, "optimal", trials=10_000_001, seed=0,
                log_trials=True)
