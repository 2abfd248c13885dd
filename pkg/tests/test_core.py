import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tverberg.core import (
    L2,
    LINF,
    Ball,
    ColoredConfig,
    ConfigError,
    NormKind,
    TransversalPartition,
    centroid,
    inter_color_diameter,
    norm_dist,
    parts_of,
    set_diameter,
)


def brute_inter_color(colors, norm):
    best = 0.0
    for a, b in itertools.combinations(range(len(colors)), 2):
        for x in colors[a]:
            for y in colors[b]:
                best = max(best, norm_dist(x, y, norm))
    return best


class TestNormDist:
    def test_euclidean(self):
        assert norm_dist((0, 0), (3, 4), L2) == 5.0

    def test_max_norm(self):
        assert norm_dist((1, 1), (0, 0), LINF) == 1.0

    def test_l1(self):
        assert norm_dist((1, 1), (0, 0), NormKind(1)) == 2.0

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigError):
            norm_dist((1, 2), (1, 2, 3))

    @pytest.mark.parametrize("text,p", [("l2", 2.0), ("l1", 1.0), ("linf", math.inf), ("l1.5", 1.5), ("3", 3.0)])
    def test_parse(self, text, p):
        assert NormKind.parse(text).p == p

    def test_p_below_one_rejected(self):
        with pytest.raises(ConfigError):
            NormKind(0.5)

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(0, 2**32 - 1),
        st.sampled_from([1.0, 1.5, 2.0, 3.0, math.inf]),
        st.integers(1, 6),
    )
    def test_metric_axioms(self, seed, p, d):
        rng = np.random.default_rng(seed)
        x, y, z = rng.standard_normal((3, d))
        n = NormKind(p)
        assert norm_dist(x, y, n) == pytest.approx(norm_dist(y, x, n), abs=1e-15)
        assert norm_dist(x, x, n) == 0.0
        assert norm_dist(x, z, n) <= norm_dist(x, y, n) + norm_dist(y, z, n) + 1e-12


class TestCentroid:
    def test_segment(self):
        np.testing.assert_allclose(centroid([(0, 0), (2, 0)]), (1, 0))

    def test_basis(self):
        np.testing.assert_allclose(centroid(np.eye(3)), np.full(3, 1 / 3))

    def test_single_point(self):
        np.testing.assert_allclose(centroid([(1.5, -2.0)]), (1.5, -2.0))

    def test_empty(self):
        with pytest.raises(ConfigError):
            centroid([])


class TestDiameters:
    def test_inter_color_square(self):
        cfg = ColoredConfig.from_colors([[[0, 0], [0, 1]], [[1, 0], [1, 1]]])
        expected = brute_inter_color(cfg.points, L2)
        assert expected == pytest.approx(math.sqrt(2))
        assert inter_color_diameter(cfg, L2) == pytest.approx(expected, abs=1e-15)

    def test_inter_color_orthogonal(self):
        e1, e2 = np.eye(2)
        cfg = ColoredConfig(np.array([[e1, -e1], [e2, -e2]]))
        assert inter_color_diameter(cfg) == pytest.approx(math.sqrt(2), abs=1e-15)

    def test_set_diameter(self):
        assert set_diameter([(0, 0), (1, 0)]) == 1.0
        assert set_diameter([(3, 3)]) == 0.0
        assert set_diameter(np.eye(3)) == pytest.approx(math.sqrt(2))
        with pytest.raises(ConfigError):
            set_diameter([])

    def test_color_diameters_at_most_twice_inter_color(self, rng):
        for _ in range(50):
            r, k, d = rng.integers(2, 5), rng.integers(2, 5), rng.integers(1, 5)
            cfg = ColoredConfig(rng.standard_normal((r, k, d)))
            for norm in (L2, LINF, NormKind(1)):
                ic = inter_color_diameter(cfg, norm)
                assert ic == pytest.approx(brute_inter_color(cfg.points, norm), abs=1e-12)
                assert max(set_diameter(Q, norm) for Q in cfg.points) <= 2 * ic + 1e-12


class TestConfig:
    def test_shape_properties(self, square):
        assert (square.r, square.k, square.ambient_dim) == (2, 2, 2)

    def test_k_one_rejected(self):
        with pytest.raises(ConfigError):
            ColoredConfig.from_colors([[[0, 0]], [[1, 0]]])

    def test_cross_color_duplicate_rejected(self):
        with pytest.raises(ConfigError):
            ColoredConfig.from_colors([[[0, 0], [1, 0]], [[1, 0], [2, 0]]])

    def test_within_color_duplicate_allowed(self):
        cfg = ColoredConfig.from_colors([[[0, 0], [0, 0]], [[1, 0], [2, 0]]])
        assert cfg.k == 2

    def test_nonfinite_rejected(self):
        with pytest.raises(ConfigError):
            ColoredConfig.from_colors([[[0, np.nan], [1, 0]], [[0, 1], [1, 1]]])

    def test_ragged_rejected(self):
        with pytest.raises(ConfigError):
            ColoredConfig.from_colors([[[0, 0], [1, 0]], [[0, 1]]])

    def test_immutable(self, square):
        with pytest.raises(ValueError):
            square.points[0, 0, 0] = 5.0

    def test_hyperboloid_validation(self):
        with pytest.raises(ConfigError):
            ColoredConfig(np.array([[[1.0, 0.5], [1.0, 0.0]], [[2.0, 0.0], [3.0, 0.0]]]), model="hyperboloid")


class TestPartition:
    def test_identity_parts(self, square):
        parts = parts_of(square, TransversalPartition.identity(2, 2))
        np.testing.assert_array_equal(parts[0], [[0, 0], [0, 1]])
        np.testing.assert_array_equal(parts[1], [[1, 0], [1, 1]])

    def test_swapped_row_crosses(self, square):
        parts = parts_of(square, TransversalPartition(np.array([[0, 1], [1, 0]])))
        np.testing.assert_array_equal(parts[0], [[0, 0], [1, 1]])
        np.testing.assert_array_equal(parts[1], [[1, 0], [0, 1]])

    def test_non_permutation(self):
        with pytest.raises(ConfigError):
            TransversalPartition(np.array([[0, 1], [0, 0]]))

    def test_shape_mismatch(self, square):
        with pytest.raises(ConfigError):
            parts_of(square, TransversalPartition.identity(3, 2))

    def test_parts_are_transversals(self, rng):
        for _ in range(30):
            r, k = int(rng.integers(2, 5)), int(rng.integers(2, 5))
            cfg = ColoredConfig(rng.standard_normal((r, k, 2)))
            part = TransversalPartition.random(r, k, rng)
            parts = parts_of(cfg, part)
            union = sorted(map(tuple, parts.reshape(-1, 2)))
            assert union == sorted(map(tuple, cfg.flat()))
            for i in range(k):
                for j in range(r):
                    hits = sum(any(np.array_equal(x, q) for q in cfg.points[j]) for x in parts[i])
                    assert hits == 1

    def test_canonical_pins_first_color(self, rng):
        part = TransversalPartition.random(3, 4, rng)
        np.testing.assert_array_equal(part.canonical().assignment[0], np.arange(4))


def test_ball_rejects_negative_radius():
    with pytest.raises(ConfigError):
        Ball(np.zeros(2), -1.0)
