"""Balls of transversals in an arbitrary l_p norm.

``delta(P)`` is the mean pairwise distance halved; a partition that is
locally maximal for the total ``delta`` has pairwise intersecting balls.
Under the maximum norm, balls are axis-aligned boxes and pairwise
intersection already gives a common point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    LINF,
    Ball,
    Certificate,
    ColoredConfig,
    ConfigError,
    NormKind,
    TransversalPartition,
    as_points,
    check_partition,
    inter_color_diameter,
    pairwise_dist,
    parts_of,
)
from .localsearch import swap_search


def delta(P, norm: NormKind) -> float:
    """``sum_{x != y} |x - y| / (2 r (r - 1))`` over ordered pairs."""
    P = as_points(P)
    r = len(P)
    if r < 2:
        raise ConfigError("delta needs at least 2 points")
    return float(pairwise_dist(P, P, norm).sum() / (2 * r * (r - 1)))


def ball_of(P, norm: NormKind) -> Ball:
    P = as_points(P)
    return Ball(P.mean(axis=0), delta(P, norm), norm)


def cross_sum(A: np.ndarray, B: np.ndarray, norm: NormKind) -> float:
    """``sum_{i != j} |a_i - b_j| + |a_j - b_i|`` for color-aligned transversals."""
    d = pairwise_dist(A, B, norm)
    return float(2.0 * (d.sum() - np.trace(d)))


def own_sum(A: np.ndarray, B: np.ndarray, norm: NormKind) -> float:
    """``sum_{i != j} |a_i - a_j| + |b_i - b_j|``."""
    return float(pairwise_dist(A, A, norm).sum() + pairwise_dist(B, B, norm).sum())


def centroid_chain(A: np.ndarray, B: np.ndarray, norm: NormKind) -> tuple[float, float, float]:
    """The three numbers ``|c_A - c_B| <= cross / (2r(r-1)) <= delta(A) + delta(B)``."""
    r = len(A)
    c = float(norm(A.mean(axis=0) - B.mean(axis=0)))
    mid = cross_sum(A, B, norm) / (2 * r * (r - 1))
    return c, mid, delta(A, norm) + delta(B, norm)


@dataclass
class BanachSolveReport:
    partition: TransversalPartition
    norm: NormKind
    objective: float
    swap_count: int
    balls: list[Ball]
    pairwise_witness: list[dict]
    common_point: Optional[np.ndarray]
    diameter: float
    bound_ratio: float
    history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "assignment": self.partition.assignment.tolist(),
            "norm": str(self.norm),
            "objective": self.objective,
            "swap_count": self.swap_count,
            "bound_ratio": self.bound_ratio,
            "diameter": self.diameter,
            "balls": [b.to_dict() for b in self.balls],
            "pairwise_witness": self.pairwise_witness,
            "common_point": None if self.common_point is None else self.common_point.tolist(),
        }


def pairwise_witness(balls: Sequence[Ball], norm: NormKind) -> list[dict]:
    out = []
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            out.append(
                {
                    "parts": [i, j],
                    "center_distance": float(norm(balls[i].center - balls[j].center)),
                    "radius_sum": balls[i].radius + balls[j].radius,
                }
            )
    return out


def linf_common_point(balls: Sequence[Ball], tol: float = 1e-9) -> Optional[np.ndarray]:
    """Common point of max-norm balls, or ``None``.

    Each ball is the box ``prod_t [c_t - rho, c_t + rho]``; boxes meet iff
    every coordinate interval intersection is non-empty. The midpoint of each
    intersection is returned.
    """
    if not balls:
        raise ConfigError("no balls given")
    centers = np.array([b.center for b in balls])
    radii = np.array([b.radius for b in balls])[:, None]
    lo = (centers - radii).max(axis=0)
    hi = (centers + radii).min(axis=0)
    if np.any(lo > hi + tol):
        return None
    return (lo + hi) / 2.0


def default_eps(cfg: ColoredConfig, norm: NormKind) -> float:
    return 1e-12 * inter_color_diameter(cfg, norm)


def banach_report(
    cfg: ColoredConfig, partition: TransversalPartition, norm: NormKind, tol: float = 1e-9, **extra
) -> BanachSolveReport:
    parts = parts_of(cfg, partition)
    balls = [ball_of(P, norm) for P in parts]
    diam = inter_color_diameter(cfg, norm)
    return BanachSolveReport(
        partition=partition,
        norm=norm,
        objective=float(sum(b.radius for b in balls)),
        swap_count=extra.pop("swap_count", 0),
        balls=balls,
        pairwise_witness=pairwise_witness(balls, norm),
        common_point=linf_common_point(balls, tol) if norm.is_inf else None,
        diameter=diam,
        bound_ratio=max(b.radius for b in balls) / diam,
        **extra,
    )


def local_search_banach(
    cfg: ColoredConfig,
    norm: NormKind,
    init: Optional[TransversalPartition] = None,
    eps: Optional[float] = None,
    tol: float = 1e-9,
    max_swaps: int = 1_000_000,
) -> BanachSolveReport:
    """Swap search maximizing the total ``delta``."""
    if cfg.model != "euclidean":
        raise ConfigError("the normed-space solver needs coordinates in R^d")
    if init is None:
        init = TransversalPartition.identity(cfg.r, cfg.k)
    check_partition(cfg, init)
    if eps is None:
        eps = default_eps(cfg, norm)
    if eps <= 0:
        raise ValueError("eps must be positive")
    r = cfg.r
    pts = cfg.flat()
    weights = pairwise_dist(pts, pts, norm) / (r * (r - 1))
    found = swap_search(weights, init, eps, max_swaps=max_swaps)
    return banach_report(cfg, found.partition, norm, tol=tol, swap_count=found.swap_count, history=found.history)


def swap_inequality(parts: np.ndarray, norm: NormKind) -> np.ndarray:
    """Matrix of ``own_sum - cross_sum`` per pair of parts; local maxima make it ``>= 0``."""
    k = len(parts)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = own_sum(parts[i], parts[j], norm) - cross_sum(parts[i], parts[j], norm)
    return out


def certify_pairwise(report: BanachSolveReport, tol: float = 1e-9) -> Certificate:
    cert = Certificate(f"pairwise intersection ({report.norm})")
    slacks = []
    for w in report.pairwise_witness:
        slack = w["radius_sum"] - w["center_distance"]
        slacks.append(slack)
        if slack < -tol:
            cert.violations.append({"check": "pairwise", "parts": w["parts"], "slack": slack})
    cert.checks["pairwise"] = not cert.violations
    cert.values["min_slack"] = float(min(slacks)) if slacks else math.inf
    return cert


def certify_linf_bound(cfg: ColoredConfig, report: BanachSolveReport, tol: float = 1e-9) -> Certificate:
    """Pairwise intersection, box common point and ``delta <= diam / 2`` under the max norm."""
    if not report.norm.is_inf:
        raise ConfigError("certify_linf_bound needs the max norm")
    cert = certify_pairwise(report, tol)
    cert.name = "max-norm common point"
    point = linf_common_point(report.balls, tol)
    cert.checks["common_point"] = point is not None
    if point is not None:
        gaps = [float(LINF(point - b.center) - b.radius) for b in report.balls]
        cert.values["common_point"] = point
        cert.values["max_containment_gap"] = max(gaps)
        cert.checks["common_point"] = max(gaps) <= tol
    diam = inter_color_diameter(cfg, LINF)
    radii = np.array([b.radius for b in report.balls])
    cert.checks["radius_bound"] = bool(np.all(radii <= diam / 2 + tol))
    for i in np.flatnonzero(radii > diam / 2 + tol):
        cert.violations.append({"check": "radius_bound", "part": int(i), "radius": float(radii[i])})
    cert.values.update(diameter=diam, bound_ratio=float(radii.max() / diam), theoretical_bound=0.5)
    return cert
