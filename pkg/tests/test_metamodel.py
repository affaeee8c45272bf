"""Prediction math and persistence for the three model families."""

import math

import numpy as np
import pytest

from surrokit.metamodel import (AnnModel, CallableModel, PolyModel, RbfModel,
                                ann_predict, load_model, poly_predict,
                                rbf_predict, save_model)
from surrokit.scaling import Scaler, fit_scaler


def make_ann(W1, b1, W2, b2, activation="tanh", steepness=1.0,
             input_scaler=None, output_scaler=None):
    W1 = np.atleast_2d(np.asarray(W1, dtype=float))
    m, n = W1.shape
    return AnnModel(
        input_dim=n, hidden_size=m, activation=activation,
        W1=W1, b1=np.asarray(b1, dtype=float), W2=np.asarray(W2, dtype=float),
        b2=float(b2), steepness=steepness,
        input_scaler=input_scaler or Scaler.identity(n),
        output_scaler=output_scaler or Scaler.identity(1),
    )


def random_ann(rng, n=None, m=None, scaled=False):
    n = n or int(rng.integers(1, 7))
    m = m or int(rng.integers(1, 7))
    if scaled:
        in_sc = Scaler("meanstd", rng.normal(size=n), rng.uniform(0.5, 2, n))
        out_sc = Scaler("meanstd", rng.normal(size=1), rng.uniform(0.5, 2, 1))
    else:
        in_sc, out_sc = Scaler.identity(n), Scaler.identity(1)
    return make_ann(rng.normal(size=(m, n)), rng.normal(size=m),
                    rng.normal(size=m), rng.normal(),
                    steepness=float(rng.uniform(0.5, 2.0)),
                    input_scaler=in_sc, output_scaler=out_sc)


class TestAnnPredict:
    def test_zero_weights_collapse_to_bias(self):
        model = make_ann(np.zeros((3, 2)), np.zeros(3), np.zeros(3), 4.5)
        for x in ([0.0, 0.0], [1.0, -2.0], [100.0, 3.0]):
            assert ann_predict(model, x) == 4.5

    def test_tanh_at_zero(self):
        model = make_ann([[1.0]], [0.0], [1.0], 0.0)
        assert ann_predict(model, [0.0]) == 0.0

    def test_tanh_at_one(self):
        model = make_ann([[1.0]], [0.0], [1.0], 0.0)
        assert ann_predict(model, [1.0]) == pytest.approx(math.tanh(1.0),
                                                          abs=1e-15)
        assert ann_predict(model, [1.0]) == pytest.approx(0.7615941559557649)

    def test_logsig_formula(self):
        model = make_ann([[2.0]], [0.5], [1.0], 0.0, activation="logsig",
                         steepness=1.5)
        x = 0.7
        expected = 1.0 / (1.0 + math.exp(-1.5 * (0.5 + 2.0 * x)))
        assert ann_predict(model, [x]) == pytest.approx(expected, rel=1e-14)

    def test_steepness_scales_net_input(self):
        lam = 2.5
        model = make_ann([[1.0]], [0.3], [1.0], 0.0, steepness=lam)
        assert ann_predict(model, [0.4]) == pytest.approx(
            math.tanh(lam * (0.3 + 0.4)), rel=1e-14)

    def test_dimension_mismatch(self):
        model = make_ann(np.ones((2, 3)), np.zeros(2), np.ones(2), 0.0)
        with pytest.raises(ValueError, match="columns"):
            ann_predict(model, [1.0, 2.0])

    def test_non_finite_input_rejected(self):
        model = make_ann([[1.0]], [0.0], [1.0], 0.0)
        with pytest.raises(ValueError, match="non-finite"):
            ann_predict(model, [float("nan")])

    def test_batch_matches_single(self):
        # BLAS may pick different kernels per shape: allow last-bit noise
        rng = np.random.default_rng(0)
        model = random_ann(rng, scaled=True)
        pts = rng.normal(size=(20, model.input_dim))
        batch = model.predict(pts)
        singles = [model.predict(p) for p in pts]
        assert np.allclose(batch, singles, rtol=1e-12, atol=1e-12)

    def test_prediction_pure(self):
        rng = np.random.default_rng(1)
        model = random_ann(rng, scaled=True)
        x = rng.normal(size=model.input_dim)
        assert model.predict(x) == model.predict(x)

    def test_scaler_folding_equivalence(self):
        # scaled model == unscaled model with algebraically folded weights
        from surrokit.vams_codegen import fold_scalers
        rng = np.random.default_rng(2)
        for _ in range(25):
            model = random_ann(rng, scaled=True)
            if model.activation != "tanh":
                continue
            folded = fold_scalers(model)
            pts = rng.normal(size=(50, model.input_dim))
            assert np.max(np.abs(model.predict(pts) - folded.predict(pts))) < 1e-9

    def test_invalid_construction(self):
        with pytest.raises(ValueError):
            make_ann([[1.0]], [0.0], [1.0], 0.0, steepness=0.0)
        with pytest.raises(ValueError):
            make_ann([[np.inf]], [0.0], [1.0], 0.0)
        with pytest.raises(ValueError):
            make_ann([[1.0, 2.0]], [0.0, 0.0], [1.0], 0.0)


class TestRbfPredict:
    def make(self, centers, weights, bias, spread=1.0):
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        return RbfModel(
            input_dim=centers.shape[1], centers=centers, spread=spread,
            weights=np.asarray(weights, dtype=float), bias=bias,
            input_scaler=Scaler.identity(centers.shape[1]),
            output_scaler=Scaler.identity(1),
        )

    def test_at_center(self):
        model = self.make([[1.0, 2.0]], [3.5], bias=0.0)
        assert rbf_predict(model, [1.0, 2.0]) == 3.5  # rho(0) = 1

    def test_far_from_centers_approaches_bias(self):
        model = self.make([[0.0, 0.0]], [5.0], bias=2.0, spread=0.1)
        assert rbf_predict(model, [50.0, 50.0]) == pytest.approx(2.0, abs=1e-12)

    def test_symmetric_centers(self):
        # x equidistant from both centers: contributions are equal
        a = 1.7
        model = self.make([[-1.0], [1.0]], [a, a], bias=0.0, spread=0.9)
        expected = 2 * a * math.exp(-((1.0 / 0.9) ** 2))
        assert rbf_predict(model, [0.0]) == pytest.approx(expected, rel=1e-12)

    def test_gaussian_form(self):
        spread = 0.6
        model = self.make([[0.0]], [1.0], bias=0.0, spread=spread)
        r = 0.45
        assert rbf_predict(model, [r]) == pytest.approx(
            math.exp(-((r / spread) ** 2)), rel=1e-13)

    def test_zero_neurons_is_bias(self):
        model = RbfModel(input_dim=2, centers=np.zeros((0, 2)), spread=1.0,
                         weights=np.zeros(0), bias=1.5,
                         input_scaler=Scaler.identity(2),
                         output_scaler=Scaler.identity(1))
        assert rbf_predict(model, [3.0, 4.0]) == 1.5

    def test_dimension_mismatch(self):
        model = self.make([[0.0, 0.0]], [1.0], bias=0.0)
        with pytest.raises(ValueError):
            rbf_predict(model, [1.0])


class TestPolyPredict:
    def test_constant_model(self):
        model = PolyModel(input_dim=2, degree=1,
                          terms=np.zeros((1, 2), dtype=int),
                          coefficients=np.array([4.25]))
        assert poly_predict(model, [9.0, -3.0]) == 4.25

    def test_univariate_quadratic(self):
        # 1 + 2x + 3x^2 at x = 2 -> 17
        model = PolyModel(input_dim=1, degree=2,
                          terms=np.array([[0], [1], [2]]),
                          coefficients=np.array([1.0, 2.0, 3.0]))
        assert poly_predict(model, [2.0]) == 17.0

    def test_zero_coefficients(self):
        model = PolyModel(input_dim=3, degree=2,
                          terms=np.array([[0, 0, 0], [1, 1, 0]]),
                          coefficients=np.zeros(2))
        assert poly_predict(model, [1.0, 2.0, 3.0]) == 0.0

    def test_cross_term(self):
        model = PolyModel(input_dim=2, degree=3,
                          terms=np.array([[1, 2]]),
                          coefficients=np.array([2.0]))
        assert poly_predict(model, [3.0, 2.0]) == pytest.approx(2 * 3 * 4)

    def test_duplicate_terms_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            PolyModel(input_dim=1, degree=2, terms=np.array([[1], [1]]),
                      coefficients=np.array([1.0, 2.0]))

    def test_degree_overflow_rejected(self):
        with pytest.raises(ValueError, match="degree"):
            PolyModel(input_dim=2, degree=1, terms=np.array([[1, 1]]),
                      coefficients=np.array([1.0]))


class TestCallableModel:
    def test_wraps_function(self):
        model = CallableModel(input_dim=2, fn=lambda X: X[:, 0] + X[:, 1])
        assert model.predict([2.0, 3.0]) == 5.0
        out = model.predict(np.array([[1.0, 1.0], [2.0, 2.0]]))
        assert np.allclose(out, [2.0, 4.0])


class TestPersistence:
    def test_ann_round_trip(self, tmp_path):
        rng = np.random.default_rng(10)
        model = random_ann(rng, scaled=True)
        path = tmp_path / "m.json"
        save_model(model, path)
        clone = load_model(path)
        pts = rng.normal(size=(30, model.input_dim))
        assert np.array_equal(model.predict(pts), clone.predict(pts))

    def test_rbf_round_trip(self, tmp_path):
        rng = np.random.default_rng(11)
        data = rng.normal(size=(8, 3))
        model = RbfModel(
            input_dim=3, centers=data, spread=0.7,
            weights=rng.normal(size=8), bias=0.4,
            input_scaler=fit_scaler(data, "meanstd"),
            output_scaler=Scaler.identity(1), response_name="bw",
        )
        save_model(model, tmp_path / "m.json")
        clone = load_model(tmp_path / "m.json")
        pts = rng.normal(size=(20, 3))
        assert np.array_equal(model.predict(pts), clone.predict(pts))
        assert clone.response_name == "bw"

    def test_poly_round_trip(self, tmp_path):
        model = PolyModel(input_dim=2, degree=2,
                          terms=np.array([[0, 0], [1, 0], [0, 2]]),
                          coefficients=np.array([1.0, -2.0, 0.5]),
                          response_name="pd")
        save_model(model, tmp_path / "m.json")
        clone = load_model(tmp_path / "m.json")
        pts = np.random.default_rng(12).normal(size=(10, 2))
        assert np.array_equal(model.predict(pts), clone.predict(pts))

    def test_unknown_kind_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"kind": "kriging"}')
        with pytest.raises(ValueError, match="kind"):
            load_model(path)
