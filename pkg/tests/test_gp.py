import itertools

import numpy as np
import pytest

from quip.encoding import Point, design_from_array
from quip.gp import (
    FitConfig,
    KernelParams,
    build_model,
    covariance_matrix,
    cross_correlation,
    d_optimality_ratio,
    fit_mle,
    kernel,
    load_model,
    model_from_dict,
    model_to_dict,
    predict,
    predict_batch,
    save_model,
)


def _random_distinct_design(rng, n, d, M):
    seen, rows = set(), []
    while len(rows) < n:
        cand = tuple(int(v) for v in rng.integers(1, M + 1, size=d))
        if cand not in seen:
            seen.add(cand)
            rows.append(cand)
    return design_from_array(np.array(rows), M)


class TestKernel:
    def test_identity(self):
        p = Point((1, 2, 3), 3)
        assert kernel(p, p, [1.0, 2.0, 0.5]) == 1.0

    def test_hand_value(self):
        # differs in factors 0 and 2: exp(-(0.5 + 2.0))
        x, y = Point((1, 2, 1), 2), Point((2, 2, 2), 2)
        assert kernel(x, y, [0.5, 1.0, 2.0]) == pytest.approx(np.exp(-2.5), rel=1e-15)

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            kernel(Point((1,), 2), Point((1, 1), 2), [1.0])

    def test_covariance_matrix_psd_and_unit_diag(self):
        rng = np.random.default_rng(0)
        D = _random_distinct_design(rng, 8, 5, 3)
        G = covariance_matrix(D, rng.uniform(0.2, 2.0, 5))
        assert np.allclose(np.diag(G), 1.0)
        assert np.allclose(G, G.T)
        assert np.linalg.eigvalsh(G).min() > -1e-10

    def test_cross_correlation_consistency(self):
        rng = np.random.default_rng(1)
        D = _random_distinct_design(rng, 6, 4, 3)
        theta = rng.uniform(0.2, 2.0, 4)
        G = covariance_matrix(D, theta)
        C = cross_correlation(D.as_array(), D.as_array(), theta)
        assert np.allclose(G, C)


class TestKernelParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            KernelParams(np.array([1.0, -1.0]), 0.0, 1.0)
        with pytest.raises(ValueError):
            KernelParams(np.array([1.0]), 0.0, 0.0)


class TestPredict:
    def test_interpolation(self):
        rng = np.random.default_rng(2)
        D = _random_distinct_design(rng, 10, 6, 3)
        f = rng.normal(size=10)
        model = fit_mle(D, f, FitConfig(n_starts=4, seed=0))
        mean, var = predict_batch(model, D.as_array())
        frange = f.max() - f.min()
        assert np.max(np.abs(mean - f)) <= 1e-5 * frange
        assert var.max() <= 1e-5 * model.params.tau2

    def test_single_matches_batch(self):
        rng = np.random.default_rng(3)
        D = _random_distinct_design(rng, 6, 4, 3)
        f = rng.normal(size=6)
        model = build_model(D, f, KernelParams(np.full(4, 0.7), 0.1, 1.3))
        X = rng.integers(1, 4, size=(20, 4))
        means, vars_ = predict_batch(model, X)
        for i, row in enumerate(X):
            m, v = predict(model, Point(tuple(int(x) for x in row), 3))
            assert m == pytest.approx(means[i], abs=1e-12)
            assert v == pytest.approx(vars_[i], abs=1e-12)

    def test_far_point_reverts_to_prior(self):
        # with large theta, an unrelated point has mean ~ mu, var ~ tau2
        D = design_from_array([[1, 1, 1], [2, 2, 2]], 3)
        model = build_model(
            D, [1.0, 3.0], KernelParams(np.full(3, 8.0), 2.0, 4.0)
        )
        m, v = predict(model, Point((3, 3, 3), 3))
        assert m == pytest.approx(2.0, abs=1e-3)
        assert v == pytest.approx(4.0, rel=1e-3)


class TestFitMle:
    def test_likelihood_dominates_starts(self):
        from quip.gp import _profiled_nll

        rng = np.random.default_rng(4)
        D = _random_distinct_design(rng, 12, 5, 3)
        f = np.sin(D.as_array().sum(axis=1)) + 0.1 * rng.normal(size=12)
        cfg = FitConfig(n_starts=6, seed=5)
        model = fit_mle(D, f, cfg)
        best_nll, _ = _profiled_nll(
            np.log(model.params.theta), D.as_array(), f, cfg.nugget
        )
        nll0, _ = _profiled_nll(np.zeros(5), D.as_array(), f, cfg.nugget)
        assert best_nll <= nll0 + 1e-9

    def test_recovers_signal_direction(self):
        # response depends only on factor 0: its theta should be largest
        rng = np.random.default_rng(6)
        D = _random_distinct_design(rng, 20, 4, 3)
        f = (D.as_array()[:, 0] == 1).astype(float) * 2.0 + 0.01 * rng.normal(size=20)
        model = fit_mle(D, f, FitConfig(seed=0))
        assert np.argmax(model.params.theta) == 0

    def test_constant_responses(self):
        D = design_from_array([[1, 1], [2, 2], [1, 2]], 2)
        model = fit_mle(D, [3.0, 3.0, 3.0])
        assert model.is_constant
        m, v = predict(model, Point((2, 1), 2))
        assert m == 3.0 and v == 0.0

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            fit_mle(design_from_array([[1, 1]], 2), [1.0])

    def test_non_finite_rejected(self):
        D = design_from_array([[1, 1], [2, 2]], 2)
        with pytest.raises(ValueError):
            fit_mle(D, [1.0, np.nan])

    def test_determinism(self):
        rng = np.random.default_rng(7)
        D = _random_distinct_design(rng, 8, 4, 3)
        f = rng.normal(size=8)
        a = fit_mle(D, f, FitConfig(seed=9))
        b = fit_mle(D, f, FitConfig(seed=9))
        assert np.array_equal(a.params.theta, b.params.theta)


class TestDOptimalityRatio:
    def test_trend_to_one(self):
        ratios = [d_optimality_ratio(3, 3, 2, 1.0, k) for k in (1.0, 4.0, 16.0)]
        gaps = [abs(r - 1.0) for r in ratios]
        assert gaps == sorted(gaps, reverse=True) or gaps[-1] <= 1e-9
        assert gaps[-1] <= 0.05

    def test_guard(self):
        from quip.maximin import TooLargeError

        with pytest.raises(TooLargeError):
            d_optimality_ratio(10, 6, 3, 1.0, 2.0)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(8)
        D = _random_distinct_design(rng, 6, 4, 3)
        f = rng.normal(size=6)
        model = fit_mle(D, f, FitConfig(n_starts=2, seed=0))
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        X = rng.integers(1, 4, size=(10, 4))
        m0, v0 = predict_batch(model, X)
        m1, v1 = predict_batch(loaded, X)
        assert np.allclose(m0, m1, atol=1e-12)
        assert np.allclose(v0, v1, atol=1e-12)

    def test_constant_round_trip(self):
        D = design_from_array([[1, 1], [2, 2]], 2)
        model = fit_mle(D, [5.0, 5.0])
        again = model_from_dict(model_to_dict(model))
        assert again.is_constant
        assert predict(again, Point((1, 2), 2)) == (5.0, 0.0)
