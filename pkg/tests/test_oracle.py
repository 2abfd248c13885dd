import itertools
import math

import numpy as np
import pytest
from scipy.optimize import minimize

from tverberg.core import LINF, ColoredConfig, ConfigError, NormKind, TransversalPartition, parts_of
from tverberg.oracle import (
    BANACH_SUM,
    EUCLID_SUM,
    HYPER_SUM,
    best_ball,
    best_ball_radius,
    dist_to_hull,
    enumerate_partitions,
    global_opt,
    nearest_in_hull,
    objective_value,
    verify_all_certificates,
)

from conftest import random_hyper_cfg


def hull_dist_qp(x, V):
    """Distance to conv(V) by a generic QP over the simplex (independent reference)."""
    m = len(V)
    obj = lambda lam: float(np.sum((lam @ V - x) ** 2))
    jac = lambda lam: 2 * V @ (lam @ V - x)
    best = math.inf
    for start in [np.full(m, 1 / m)] + list(np.eye(m)):
        sol = minimize(
            obj,
            start,
            jac=jac,
            method="SLSQP",
            bounds=[(0, 1)] * m,
            constraints=[{"type": "eq", "fun": lambda l: l.sum() - 1}],
            options={"ftol": 1e-16, "maxiter": 1000},
        )
        best = min(best, obj(np.clip(sol.x, 0, 1) / np.clip(sol.x, 0, 1).sum()))
    return math.sqrt(max(best, 0.0))


def segment_dist(a, b, c, d, n=201):
    """Coarse (s, t) grid, then a bounded local refine."""
    ts = np.linspace(0, 1, n)
    P = a + ts[:, None] * (b - a)
    Q = c + ts[:, None] * (d - c)
    D = np.linalg.norm(P[:, None] - Q[None], axis=-1)
    i, j = np.unravel_index(np.argmin(D), D.shape)
    f = lambda st: float(np.linalg.norm(a + st[0] * (b - a) - c - st[1] * (d - c)))
    sol = minimize(f, [ts[i], ts[j]], method="L-BFGS-B", bounds=[(0, 1), (0, 1)], options={"ftol": 1e-15, "gtol": 1e-12})
    return min(float(D[i, j]), sol.fun)


class TestEnumeration:
    @pytest.mark.parametrize("k,r", [(2, 2), (3, 2), (2, 3), (3, 3), (4, 2)])
    def test_count(self, k, r):
        cfg = ColoredConfig(np.random.default_rng(0).standard_normal((r, k, 2)))
        parts = list(enumerate_partitions(cfg))
        assert len(parts) == math.factorial(k) ** (r - 1) == len(enumerate_partitions(cfg))
        # pairwise distinct as unlabeled partitions
        keys = {p.canonical().assignment.tobytes() for p in parts}
        assert len(keys) == len(parts)

    def test_covers_every_partition(self, rng):
        cfg = ColoredConfig(rng.standard_normal((3, 3, 2)))
        keys = {p.canonical().assignment.tobytes() for p in enumerate_partitions(cfg)}
        for _ in range(100):
            assert TransversalPartition.random(3, 3, rng).canonical().assignment.tobytes() in keys

    def test_cap(self, rng):
        cfg = ColoredConfig(rng.standard_normal((3, 5, 2)))
        with pytest.raises(ConfigError):
            enumerate_partitions(cfg, cap=1000)


class TestGlobalOpt:
    def test_square(self, square):
        res = global_opt(square, EUCLID_SUM)
        assert res.best_objective == pytest.approx(1.0)
        assert res.num_enumerated == 2
        # the optimum pairs (0,0) with (1,1)
        ids = res.best_partition.member_ids()
        flat = square.flat()
        for a, b in flat[ids]:
            assert np.sum((a - b) ** 2) == pytest.approx(2.0)

    def test_model_mismatch(self, square):
        with pytest.raises(ConfigError):
            global_opt(square, HYPER_SUM)

    def test_unknown_objective(self, square):
        with pytest.raises(ValueError):
            objective_value(parts_of(square, TransversalPartition.identity(2, 2)), "other")

    def test_max_over_enumeration(self, rng):
        cfg = ColoredConfig(rng.standard_normal((3, 3, 2)))
        vals = [objective_value(parts_of(cfg, p), BANACH_SUM, LINF) for p in enumerate_partitions(cfg)]
        assert global_opt(cfg, BANACH_SUM, LINF).best_objective == max(vals)

    def test_hyper_min(self, rng):
        cfg = random_hyper_cfg(rng, 3, 3, 2)
        vals = [objective_value(parts_of(cfg, p), HYPER_SUM) for p in enumerate_partitions(cfg)]
        assert global_opt(cfg, HYPER_SUM).best_objective == min(vals)


class TestHullDistance:
    def test_point_inside(self):
        assert dist_to_hull([0.2, 0.2], [[0, 0], [1, 0], [0, 1]]) == pytest.approx(0.0, abs=1e-14)

    def test_to_edge(self):
        assert dist_to_hull([1, 1], [[0, 0], [1, 0], [0, 1]]) == pytest.approx(math.sqrt(2) / 2)

    def test_to_vertex(self):
        assert dist_to_hull([2, -1], [[0, 0], [1, 0], [0, 1]]) == pytest.approx(math.sqrt(2))

    def test_methods_agree_with_qp(self, rng):
        for _ in range(40):
            m, d = int(rng.integers(1, 7)), int(rng.integers(1, 5))
            V = rng.standard_normal((m, d))
            x = 2 * rng.standard_normal(d)
            ref = hull_dist_qp(x, V)
            for method in ("enumerate", "wolfe"):
                assert dist_to_hull(x, V, method) == pytest.approx(ref, abs=1e-6)

    def test_wolfe_many_vertices(self, rng):
        V = rng.standard_normal((20, 3))
        x = 3 * rng.standard_normal(3)
        y = nearest_in_hull(x, V)
        # optimality: every vertex lies in the halfspace <v - y, x - y> <= 0
        assert np.max((V - y) @ (x - y)) <= 1e-9
        assert dist_to_hull(x, V) == pytest.approx(hull_dist_qp(x, V), abs=1e-6)

    def test_bad_method(self):
        with pytest.raises(ValueError):
            nearest_in_hull([0, 0], [[1, 1]], method="none")


class TestBestBall:
    def test_square_partitions(self, square):
        radii = sorted(best_ball_radius(square, p) for p in enumerate_partitions(square))
        assert radii[0] == pytest.approx(0.0, abs=1e-9)
        assert radii[1] == pytest.approx(0.5, abs=1e-7)

    def test_two_segments(self, rng):
        for _ in range(20):
            a, b, c, d = rng.standard_normal((4, 3))
            _, rad = best_ball(np.stack([[a, b], [c, d]]))
            assert rad == pytest.approx(segment_dist(a, b, c, d) / 2, abs=1e-5)

    def test_meets_every_hull(self, rng):
        for _ in range(10):
            parts = rng.standard_normal((4, 3, 3))
            center, rad = best_ball(parts)
            for P in parts:
                assert dist_to_hull(center, P) <= rad + 1e-7
            # lower bound from pairwise hull separation
            lb = max(hull_pair_dist(P, Q) / 2 for P, Q in itertools.combinations(parts, 2))
            assert rad >= lb - 1e-7

    def test_hyperboloid_rejected(self, rng):
        cfg = random_hyper_cfg(rng, 2, 2, 2)
        with pytest.raises(ConfigError):
            best_ball_radius(cfg, TransversalPartition.identity(cfg.r, cfg.k))


def hull_pair_dist(P, Q):
    # distance between two hulls = distance from 0 to conv(P - Q)
    diffs = (P[:, None] - Q[None]).reshape(-1, P.shape[1])
    return dist_to_hull(np.zeros(P.shape[1]), diffs)


class TestVerifyAll:
    @pytest.mark.parametrize("space", ["euclid", "banach", "hyper"])
    def test_small_instances(self, rng, space):
        for _ in range(5):
            k, r = int(rng.integers(2, 4)), int(rng.integers(2, 4))
            if space == "hyper":
                cfg = random_hyper_cfg(rng, 3, 3, 3)
            else:
                cfg = ColoredConfig(rng.standard_normal((r, k, 3)))
            cert = verify_all_certificates(cfg, space, norm=LINF if space == "banach" else None)
            assert cert.passed, cert.summary()

    def test_l1(self, rng):
        cfg = ColoredConfig(rng.standard_normal((3, 3, 2)))
        assert verify_all_certificates(cfg, "banach", NormKind(1)).passed

    def test_unknown_space(self, square):
        with pytest.raises(ValueError):
            verify_all_certificates(square, "other")
