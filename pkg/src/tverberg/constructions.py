"""Instance generators: random configurations and the extremal examples."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import HYPERBOLOID, Certificate, ColoredConfig, ConfigError, NormKind, TransversalPartition

GAUSSIAN = "gaussian"
HYPERBOLIC = "hyperbolic"
LP_ORTHOGONAL_SIMPLICES = "lp_orthogonal_simplices"
LINF_EMBEDDING = "linf_embedding"
SPHERICAL_SQUARE = "spherical_square"
KINDS = (GAUSSIAN, HYPERBOLIC, LP_ORTHOGONAL_SIMPLICES, LINF_EMBEDDING, SPHERICAL_SQUARE)

MAX_EMBEDDING_POINTS = 12


@dataclass(frozen=True)
class InstanceSpec:
    kind: str
    k: int = 2
    r: int = 2
    dim: int = 2
    p: float = 2.0
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown instance kind {self.kind!r}")
        if self.kind != SPHERICAL_SQUARE:
            _check_kr(self.k, self.r)
        if self.kind in (GAUSSIAN, HYPERBOLIC) and self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.kind == LINF_EMBEDDING and self.k * self.r > MAX_EMBEDDING_POINTS:
            raise ConfigError(f"the l_inf embedding supports k*r <= {MAX_EMBEDDING_POINTS}")

    def build(self) -> ColoredConfig:
        if self.kind == GAUSSIAN:
            return gen_gaussian(self.k, self.r, self.dim, self.seed)
        if self.kind == HYPERBOLIC:
            return gen_hyperbolic(self.k, self.r, self.dim, self.seed)
        if self.kind == LP_ORTHOGONAL_SIMPLICES:
            return gen_lp_orthogonal_simplices(self.k, self.r, self.p)
        if self.kind == LINF_EMBEDDING:
            return gen_linf_embedding(self.k, self.r)
        return spherical_square_config()


def _check_kr(k: int, r: int) -> None:
    if int(k) != k or int(r) != r or k < 2 or r < 2:
        raise ConfigError(f"need integers k >= 2 and r >= 2, got k={k}, r={r}")


def _gaussian_points(k: int, r: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        pts = rng.standard_normal((r, k, dim))
        flat = pts.reshape(r * k, dim)
        if len(np.unique(flat, axis=0)) == r * k:
            return pts


def gen_gaussian(k: int, r: int, dim: int, seed: Optional[int] = None) -> ColoredConfig:
    """``r*k`` standard normal points in ``R^dim``; deterministic per seed."""
    _check_kr(k, r)
    if dim < 1:
        raise ConfigError("dim must be >= 1")
    return ColoredConfig(_gaussian_points(k, r, dim, np.random.default_rng(seed)))


def gen_hyperbolic(k: int, r: int, dim: int, seed: Optional[int] = None, scale: float = 1.0) -> ColoredConfig:
    """Lift of ``scale`` times standard normal chart points onto the hyperboloid of dimension ``dim``."""
    _check_kr(k, r)
    if dim < 1:
        raise ConfigError("dim must be >= 1")
    z = scale * _gaussian_points(k, r, dim, np.random.default_rng(seed))
    x0 = np.sqrt(1.0 + np.sum(z**2, axis=-1, keepdims=True))
    return ColoredConfig(np.concatenate([x0, z], axis=-1), model=HYPERBOLOID)


def regular_simplex(k: int) -> np.ndarray:
    """Vertices of a regular simplex in ``R^(k-1)``, centered at 0, unit Euclidean norm.

    Rows are the centered basis vectors of ``R^k`` written in an orthonormal
    basis of the sum-zero hyperplane; signs are fixed so the first vertex has
    positive leading coordinates.
    """
    if k < 2:
        raise ConfigError("a simplex needs k >= 2 vertices")
    centered = np.eye(k) - 1.0 / k
    basis, _ = np.linalg.qr(centered[:, : k - 1])
    verts = centered @ basis
    signs = np.where(verts[0] < 0, -1.0, 1.0)
    verts = verts * signs
    return verts / np.linalg.norm(verts, axis=1, keepdims=True)


def gen_lp_orthogonal_simplices(k: int, r: int, p: float = 2.0) -> ColoredConfig:
    """Color ``j`` is a regular simplex in its own block of ``k - 1`` coordinates, unit l_p norm."""
    _check_kr(k, r)
    norm = NormKind(p)
    simplex = regular_simplex(k)
    simplex = simplex / norm(simplex)[:, None]
    w = k - 1
    pts = np.zeros((r, k, r * w))
    for j in range(r):
        pts[j, :, j * w : (j + 1) * w] = simplex
    return ColoredConfig(pts)


def sign_vectors(n: int) -> np.ndarray:
    """All ``(2^(n-1), n)`` sign vectors with first entry ``+1``."""
    rest = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1))).reshape(-1, n - 1)
    return np.hstack([np.ones((len(rest), 1)), rest])


def linf_embed(x: np.ndarray) -> np.ndarray:
    """Isometric image of ``x`` in l_1^n inside l_inf^(2^(n-1)): coordinates ``<eps, x>``."""
    x = np.asarray(x, dtype=float)
    return sign_vectors(x.shape[-1]) @ x if x.ndim == 1 else x @ sign_vectors(x.shape[-1]).T


def gen_linf_embedding(k: int, r: int) -> ColoredConfig:
    """Images of the ``k*r`` basis vectors of l_1; color ``i`` takes ``e_{ki}, ..., e_{ki+k-1}``."""
    _check_kr(k, r)
    n = k * r
    if n > MAX_EMBEDDING_POINTS:
        raise ConfigError(f"the l_inf embedding supports k*r <= {MAX_EMBEDDING_POINTS}, got {n}")
    images = linf_embed(np.eye(n))
    return ColoredConfig(images.reshape(r, k, -1))


def spherical_square_config() -> ColoredConfig:
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    return ColoredConfig(np.array([[e1, -e1], [e2, -e2]]))


def _sphere_dist(a: np.ndarray, b: np.ndarray) -> float:
    # atan2 form stays accurate near 0 and pi
    return float(math.atan2(np.linalg.norm(np.cross(a, b)), float(a @ b)))


def spherical_square_demo() -> Certificate:
    """Antipodal pairs on the two first axes of the unit 2-sphere.

    For either partition into transversals, the circles having the two
    segments as diameters are centered at antipodal points, so they are at
    distance ``pi`` while their radii sum to ``pi / 2``.
    """
    cfg = spherical_square_config()
    cert = Certificate("spherical square: circles are disjoint")
    partitions = [TransversalPartition(np.array([[0, 1], [0, 1]])), TransversalPartition(np.array([[0, 1], [1, 0]]))]
    records = []
    for part in partitions:
        ids = part.member_ids()
        flat = cfg.flat()
        circles = []
        for a, b in flat[ids]:
            mid = (a + b) / np.linalg.norm(a + b)
            length = _sphere_dist(a, b)
            circles.append({"center": mid, "radius": length / 2, "segment": [a, b], "length": length})
        center_dist = _sphere_dist(circles[0]["center"], circles[1]["center"])
        gap = center_dist - circles[0]["radius"] - circles[1]["radius"]
        records.append(
            {
                "assignment": part.assignment,
                "segment_lengths": [c["length"] for c in circles],
                "centers": [c["center"] for c in circles],
                "center_distance": center_dist,
                "radius_sum": circles[0]["radius"] + circles[1]["radius"],
                "gap": gap,
            }
        )
    cert.checks["disjoint"] = all(rec["gap"] > 0 for rec in records)
    cert.values["partitions"] = records
    cert.values["min_gap"] = min(rec["gap"] for rec in records)
    return cert
