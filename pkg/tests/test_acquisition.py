import itertools

import numpy as np
import pytest

from quip.acquisition import (
    AcquisitionSpec,
    _BnB,
    candidate_set_acquisition,
    enumerate_acquisition,
    eval_alm,
    eval_ucb,
    lattice_array,
    optimize_acquisition,
    random_point,
)
from quip.encoding import Point, design_from_array
from quip.gp import FitConfig, KernelParams, build_model, fit_mle, predict


def _model(seed, n=6, d=4, M=3, theta_scale=1.0):
    rng = np.random.default_rng(seed)
    seen, rows = set(), []
    while len(rows) < n:
        cand = tuple(int(v) for v in rng.integers(1, M + 1, size=d))
        if cand not in seen:
            seen.add(cand)
            rows.append(cand)
    D = design_from_array(np.array(rows), M)
    theta = rng.uniform(0.2, 2.0, d) * theta_scale
    params = KernelParams(theta, rng.normal(), rng.uniform(0.5, 2.0))
    f = rng.normal(size=n)
    return build_model(D, f, params)


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            AcquisitionSpec("ei")
        with pytest.raises(ValueError):
            AcquisitionSpec("ucb", lam=-1.0)
        with pytest.raises(ValueError):
            AcquisitionSpec("alm", gap_tolerance=1.0)


class TestEvalFunctions:
    def test_alm_variance_consistency(self):
        # tau2 * (1 - eval_alm(x)) == predict(x).var
        model = _model(0)
        rng = np.random.default_rng(1)
        for _ in range(100):
            x = random_point(model.design.d, model.design.M, rng)
            q = eval_alm(model, x)
            _, var = predict(model, x)
            assert abs(model.params.tau2 * (1.0 - q) - var) <= 1e-10

    def test_ucb_closed_form_n1_consistency(self):
        model = _model(2)
        x = Point((1, 2, 3, 1), 3)
        mean, var = predict(model, x)
        assert eval_ucb(model, x, 2.0) == pytest.approx(
            mean + 2.0 * np.sqrt(var), abs=1e-12
        )

    def test_alm_zero_at_training_points(self):
        model = _model(3)
        for p in model.design.points:
            _, var = predict(model, p)
            assert var <= 1e-6 * model.params.tau2


class TestBoundAdmissibility:
    def test_bound_dominates_subtree(self):
        # every internal node's bound >= max objective over its subtree
        model = _model(4, n=5, d=3, M=2)
        for kind in ("alm", "ucb"):
            spec = AcquisitionSpec(kind, gap_tolerance=0.0)
            bnb = _BnB(model, spec)
            full = lattice_array(3, 2)
            for depth in range(3):
                for prefix in itertools.product(range(1, 3), repeat=depth):
                    L, U = bnb._vectors(prefix)
                    bound = bnb._bound(L, U)
                    # subtree members: points agreeing with prefix in the
                    # branching order
                    best = -np.inf
                    for row in full:
                        if all(
                            row[bnb.order[i]] == prefix[i]
                            for i in range(depth)
                        ):
                            best = max(best, bnb._leaf_value(row))
                    assert bound >= best - 1e-10, (kind, prefix)


class TestOptimize:
    def test_oracle_equivalence_quick(self):
        for seed in range(8):
            model = _model(seed + 100, n=7, d=4, M=3)
            for kind in ("alm", "ucb"):
                spec = AcquisitionSpec(kind, gap_tolerance=0.0)
                rep = optimize_acquisition(model, spec)
                _, opt = enumerate_acquisition(model, spec)
                assert rep.best_value == pytest.approx(opt, abs=1e-9)
                assert rep.status == "optimal"
                assert rep.relative_gap == 0.0
                assert rep.certified_bound >= opt - 1e-12

    def test_gap_stop_is_conservative(self):
        for seed in range(5):
            model = _model(seed + 200, n=10, d=5, M=3)
            spec = AcquisitionSpec("ucb", gap_tolerance=0.10)
            rep = optimize_acquisition(model, spec)
            _, opt = enumerate_acquisition(
                model, AcquisitionSpec("ucb", gap_tolerance=0.0)
            )
            assert rep.certified_bound >= opt - 1e-9
            assert rep.best_value <= opt + 1e-9

    def test_m2_d1(self):
        D = design_from_array([[1]], 2)
        model = build_model(D, [1.0], KernelParams(np.array([1.0]), 0.0, 1.0))
        spec = AcquisitionSpec("alm", gap_tolerance=0.0)
        rep = optimize_acquisition(model, spec)
        pt, opt = enumerate_acquisition(model, spec)
        assert rep.best_value == pytest.approx(opt, abs=1e-12)
        assert rep.best_point == pt == Point((2,), 2)

    def test_full_coverage_alm_vanishes(self):
        # design covering the whole lattice: max variance ~ nugget scale
        full = lattice_array(2, 2)
        D = design_from_array(full, 2)
        model = build_model(
            D, [0.0, 1.0, 2.0, 0.5], KernelParams(np.array([1.0, 1.0]), 0.5, 1.0)
        )
        rep = optimize_acquisition(model, AcquisitionSpec("alm", gap_tolerance=0.0))
        assert rep.best_value <= 1e-6

    def test_constant_model(self):
        D = design_from_array([[1, 1], [2, 2]], 2)
        model = fit_mle(D, [2.0, 2.0])
        rep = optimize_acquisition(model, AcquisitionSpec("ucb"))
        assert rep.status == "optimal"

    def test_xi_tensor_materialization_d2_m2(self):
        # materialize the quadratic-form coefficient tensor on the one-hot
        # encoding and confirm the multilinear form matches eval_alm
        from scipy.linalg import cho_solve

        from quip.encoding import encode

        model = _model(5, n=3, d=2, M=2)
        W = cho_solve((model.chol, True), np.eye(model.design.n))
        X = model.design.as_array()
        theta = model.params.theta
        d, M = 2, 2
        # xi[k1,k2,l1,l2] = sum_rs W_rs * gamma(levels (k,l) vs rows r,s)
        for lv in itertools.product(range(1, 3), repeat=2):
            x = np.array(lv)
            g = np.exp(-((X != x) @ theta))
            q_direct = float(g @ W @ g)
            # multilinear form via one-hot selection
            e = encode(Point(lv, 2))
            total = 0.0
            for k1, k2, l1, l2 in itertools.product(range(M), repeat=4):
                gr = np.exp(-theta[0] * (X[:, 0] != k1 + 1)
                            - theta[1] * (X[:, 1] != k2 + 1))
                gs = np.exp(-theta[0] * (X[:, 0] != l1 + 1)
                            - theta[1] * (X[:, 1] != l2 + 1))
                xi = float(gr @ W @ gs)
                total += xi * e[0, k1] * e[1, k2] * e[0, l1] * e[1, l2]
            assert total == pytest.approx(q_direct, abs=1e-10)
            assert q_direct == pytest.approx(
                eval_alm(model, Point(lv, 2)), abs=1e-10
            )


class TestEnumerate:
    def test_guard(self):
        from quip.maximin import TooLargeError

        model = _model(6, n=4, d=4, M=3)
        with pytest.raises(TooLargeError):
            enumerate_acquisition(model, AcquisitionSpec("alm"), guard=10)

    def test_lex_tie_break(self):
        model = fit_mle(design_from_array([[1, 1], [2, 2]], 2), [0.0, 0.0001])
        pt, _ = enumerate_acquisition(model, AcquisitionSpec("alm"))
        # exact value irrelevant; the point must be the first argmax in
        # lexicographic order
        assert isinstance(pt, Point)


class TestBaselines:
    def test_random_point_distribution(self):
        rng = np.random.default_rng(0)
        d, M, N = 3, 4, 100_000
        draws = np.array([random_point(d, M, rng).levels for _ in range(N)])
        p = 1.0 / M
        sigma = np.sqrt(p * (1 - p) / N)
        freq = (draws[:, 0][:, None] == np.arange(1, M + 1)).mean(axis=0)
        assert np.all(np.abs(freq - p) < 3 * sigma + 1e-3)

    def test_random_point_seeded(self):
        a = [random_point(4, 3, np.random.default_rng(5)).levels for _ in range(3)]
        b = [random_point(4, 3, np.random.default_rng(5)).levels for _ in range(3)]
        assert a[0] == b[0]

    def test_candidate_below_oracle(self):
        model = _model(7, n=6, d=4, M=3)
        spec = AcquisitionSpec("ucb", gap_tolerance=0.0)
        _, opt = enumerate_acquisition(model, spec)
        _, val = candidate_set_acquisition(model, spec, 50, seed=3)
        assert val <= opt + 1e-12

    def test_candidate_monotone_in_c(self):
        model = _model(8, n=6, d=4, M=3)
        spec = AcquisitionSpec("alm", gap_tolerance=0.0)
        vals = [
            candidate_set_acquisition(model, spec, C, seed=11)[1]
            for C in (1, 10, 100, 1000)
        ]
        assert vals == sorted(vals)

    def test_candidate_needs_one(self):
        model = _model(9)
        with pytest.raises(ValueError):
            candidate_set_acquisition(model, AcquisitionSpec("alm"), 0, seed=0)
