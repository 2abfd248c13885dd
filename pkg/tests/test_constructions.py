import itertools
import math

import numpy as np
import pytest

from tverberg.constructions import (
    InstanceSpec,
    gen_gaussian,
    gen_hyperbolic,
    gen_linf_embedding,
    gen_lp_orthogonal_simplices,
    linf_embed,
    regular_simplex,
    sign_vectors,
    spherical_square_config,
    spherical_square_demo,
)
from tverberg.core import LINF, ConfigError, NormKind, inter_color_diameter, norm_dist
from tverberg.formats import config_from_dict, config_to_dict, load_config, load_partition, save_config, write_json
from tverberg.hyperbolic import lorentz_q
from tverberg.oracle import best_ball_radius, enumerate_partitions


class TestGenerators:
    def test_gaussian_deterministic(self):
        a, b = gen_gaussian(3, 2, 4, seed=7), gen_gaussian(3, 2, 4, seed=7)
        np.testing.assert_array_equal(a.points, b.points)
        assert a.points.shape == (2, 3, 4)

    def test_gaussian_rejects(self):
        with pytest.raises(ConfigError):
            gen_gaussian(1, 2, 2)
        with pytest.raises(ConfigError):
            gen_gaussian(2, 2, 0)

    def test_hyperbolic_on_sheet(self):
        cfg = gen_hyperbolic(3, 3, 4, seed=1)
        q = lorentz_q(cfg.points)
        np.testing.assert_allclose(q, -1.0, atol=1e-12)
        assert cfg.dim == 4 and cfg.ambient_dim == 5

    @pytest.mark.parametrize("k", range(2, 8))
    def test_regular_simplex(self, k):
        V = regular_simplex(k)
        assert V.shape == (k, k - 1)
        np.testing.assert_allclose(V.sum(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(V, axis=1), 1, atol=1e-12)
        D = np.linalg.norm(V[:, None] - V[None], axis=-1)[np.triu_indices(k, 1)]
        np.testing.assert_allclose(D, D[0], atol=1e-12)
        assert D[0] == pytest.approx(math.sqrt(2 * k / (k - 1)))

    @pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
    def test_orthogonal_simplices(self, p):
        cfg = gen_lp_orthogonal_simplices(3, 2, p)
        norm = NormKind(p)
        assert cfg.points.shape == (2, 3, 4)
        np.testing.assert_allclose(norm(cfg.points.reshape(-1, 4), axis=-1), 1.0, atol=1e-12)
        # blocks are disjoint
        assert np.all(cfg.points[0, :, 2:] == 0) and np.all(cfg.points[1, :, :2] == 0)

    def test_orthogonal_simplices_l2_ratio(self):
        cfg = gen_lp_orthogonal_simplices(2, 2, 2.0)
        diam = inter_color_diameter(cfg)
        ratio = min(best_ball_radius(cfg, p) for p in enumerate_partitions(cfg)) / diam
        assert ratio == pytest.approx(0.5, abs=1e-6)


class TestEmbedding:
    def test_sign_vectors(self):
        S = sign_vectors(3)
        assert S.shape == (4, 3)
        assert np.all(S[:, 0] == 1)
        assert len({tuple(row) for row in S}) == 4

    def test_isometry(self, rng):
        for n in range(2, 9):
            for _ in range(20):
                x, y = rng.standard_normal((2, n))
                assert norm_dist(linf_embed(x), linf_embed(y), LINF) == pytest.approx(
                    np.abs(x - y).sum(), abs=1e-12
                )

    def test_basis_images(self):
        cfg = gen_linf_embedding(2, 3)
        assert cfg.points.shape == (3, 2, 32)
        assert inter_color_diameter(cfg, LINF) == 2.0

    def test_too_large(self):
        with pytest.raises(ConfigError):
            gen_linf_embedding(4, 4)


class TestSpherical:
    def test_config(self):
        cfg = spherical_square_config()
        np.testing.assert_allclose(np.linalg.norm(cfg.points, axis=-1), 1.0)

    def test_demo(self):
        cert = spherical_square_demo()
        assert cert.passed
        assert cert.values["min_gap"] == pytest.approx(math.pi / 2, abs=1e-9)
        for rec in cert.values["partitions"]:
            for length in rec["segment_lengths"]:
                assert length == pytest.approx(math.pi / 2, abs=1e-12)
            assert rec["center_distance"] == pytest.approx(math.pi, abs=1e-9)


class TestSpec:
    def test_build_each(self):
        for kind in ("gaussian", "hyperbolic", "lp_orthogonal_simplices", "linf_embedding", "spherical_square"):
            cfg = InstanceSpec(kind, k=2, r=2, dim=2, seed=0).build()
            assert cfg.k == 2 and cfg.r == 2

    def test_unknown(self):
        with pytest.raises(ConfigError):
            InstanceSpec("torus")


class TestFormats:
    def test_roundtrip(self, tmp_path):
        for cfg in (gen_gaussian(3, 2, 2, seed=1), gen_hyperbolic(2, 3, 2, seed=2)):
            path = tmp_path / "inst.json"
            save_config(path, cfg)
            back = load_config(path)
            np.testing.assert_array_equal(back.points, cfg.points)
            assert back.model == cfg.model
            assert config_to_dict(back) == config_to_dict(cfg)

    def test_field_mismatch(self):
        with pytest.raises(ConfigError):
            config_from_dict({"k": 3, "colors": [[[0, 0], [1, 0]], [[0, 1], [1, 1]]]})

    def test_missing_colors(self):
        with pytest.raises(ConfigError):
            config_from_dict({"k": 2})

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_partition(self, tmp_path):
        write_json(tmp_path / "p.json", {"assignment": [[0, 1], [1, 0]]})
        assert load_partition(tmp_path / "p.json").assignment.tolist() == [[0, 1], [1, 0]]
        write_json(tmp_path / "q.json", {})
        with pytest.raises(ConfigError):
            load_partition(tmp_path / "q.json")
