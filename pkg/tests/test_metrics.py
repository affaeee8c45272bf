"""Error measures, their identities, and model selection."""

import math

import numpy as np
import pytest

from surrokit.errors import UndefinedVarianceError
from surrokit.metrics import (FitReport, r_squared, rmae, render_report_table,
                              rmse, rrse, select_best)


def two_pass_rmse(y, yhat):
    """Independent oracle: accumulate squared errors one by one, reversed."""
    total = 0.0
    for a, b in zip(reversed(list(y)), reversed(list(yhat))):
        total += (a - b) * (a - b)
    return math.sqrt(total / len(y))


class TestRmse:
    def test_perfect_fit(self):
        y = np.array([1.0, 2.0, 3.0])
        assert rmse(y, y) == 0.0

    def test_direct_substitution(self):
        assert rmse([0.0, 2.0], [0.0, 0.0]) == pytest.approx(math.sqrt(2.0))

    def test_matches_independent_accumulation(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            y = rng.normal(size=int(rng.integers(2, 50)))
            yhat = y + rng.normal(size=y.size)
            assert rmse(y, yhat) == pytest.approx(two_pass_rmse(y, yhat),
                                                  abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            rmse([1.0], [1.0, 2.0])

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            rmse([], [])


class TestRSquared:
    def test_perfect_fit(self):
        y = np.array([1.0, 2.0, 4.0])
        assert r_squared(y, y) == 1.0

    def test_mean_predictor_is_zero(self):
        y = np.array([1.0, 2.0, 3.0, 6.0])
        yhat = np.full(4, y.mean())
        assert r_squared(y, yhat) == pytest.approx(0.0, abs=1e-15)

    def test_worse_than_mean_goes_negative(self):
        y = np.array([1.0, 2.0, 3.0])
        assert r_squared(y, np.array([10.0, -10.0, 10.0])) < 0.0

    def test_constant_response_undefined(self):
        with pytest.raises(UndefinedVarianceError):
            r_squared([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])


class TestRmaeRrse:
    def test_perfect_fit(self):
        y = np.array([1.0, 5.0, 2.0])
        assert rmae(y, y) == 0.0
        assert rrse(y, y) == 0.0

    def test_mean_predictor_rrse_is_one(self):
        y = np.array([1.0, 3.0, 7.0, 2.0])
        assert rrse(y, np.full(4, y.mean())) == pytest.approx(1.0)

    def test_rmae_definition(self):
        y = np.array([0.0, 1.0, 2.0])
        yhat = np.array([0.0, 1.0, 3.5])
        assert rmae(y, yhat) == pytest.approx(1.5 / np.std(y, ddof=1))

    def test_rrse_r2_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            y = rng.normal(size=int(rng.integers(3, 60)))
            yhat = y + rng.normal(scale=0.5, size=y.size)
            assert abs(rrse(y, yhat) ** 2 - (1.0 - r_squared(y, yhat))) < 1e-12

    def test_translation_invariance(self):
        rng = np.random.default_rng(2)
        y = rng.normal(size=30)
        yhat = y + rng.normal(size=30)
        for shift in (-17.0, 40.0):
            assert rmse(y + shift, yhat + shift) == pytest.approx(rmse(y, yhat))
            assert rmae(y + shift, yhat + shift) == pytest.approx(rmae(y, yhat))
            assert rrse(y + shift, yhat + shift) == pytest.approx(rrse(y, yhat))

    def test_rmse_scales_linearly(self):
        rng = np.random.default_rng(3)
        y = rng.normal(size=20)
        yhat = y + rng.normal(size=20)
        assert rmse(3.0 * y, 3.0 * yhat) == pytest.approx(3.0 * rmse(y, yhat))


def report(rmse_val, r2v=0.9, params=10):
    return FitReport(r2_train=0.95, r2_verify=r2v, rmse=rmse_val, rmae=0.1,
                     rrse=0.1, n_train=100, n_verify=30, n_parameters=params)


class TestSelectBest:
    def test_single_report(self):
        assert select_best([report(1.0)]) == 0

    def test_lower_rmse_wins(self):
        assert select_best([report(2.0), report(1.0)]) == 1

    def test_tie_breaks_to_fewer_parameters(self):
        assert select_best([report(1.0, params=50), report(1.0, params=10)]) == 1

    def test_tie_breaks_to_list_order(self):
        assert select_best([report(1.0, params=10), report(1.0, params=10)]) == 0

    def test_r2_criterion(self):
        reports = [report(1.0, r2v=0.5), report(2.0, r2v=0.9)]
        assert select_best(reports, "verify_r2") == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            select_best([])

    def test_unknown_criterion(self):
        with pytest.raises(ValueError, match="criterion"):
            select_best([report(1.0)], "aic")


class TestOverfitFlag:
    def test_small_gap_ok(self):
        assert not report(1.0, r2v=0.9).overfit()

    def test_large_gap_flags(self):
        assert report(1.0, r2v=0.5).overfit()

    def test_threshold_configurable(self):
        r = report(1.0, r2v=0.8)  # gap 0.15
        assert not r.overfit(0.2)
        assert r.overfit(0.1)


def test_render_table_contains_columns():
    text = render_report_table([("ann-4", report(1.25))])
    assert "rmse" in text and "ann-4" in text and "1.25" in text
