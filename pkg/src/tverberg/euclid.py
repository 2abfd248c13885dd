"""Euclidean balls of transversals and the common-point search.

For a transversal ``P`` of ``r`` points the ball ``B2(P)`` is centered at the
centroid with squared radius ``spread(P)``. A partition that is locally
maximal for the total spread under single-color swaps has balls with a
common point; :func:`find_common_point` locates it by minimizing the largest
power of a point with respect to the balls.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment, nnls

from .core import (
    L2,
    Ball,
    Certificate,
    ColoredConfig,
    ConfigError,
    TransversalPartition,
    as_point,
    as_points,
    check_partition,
    inter_color_diameter,
    parts_of,
)
from .localsearch import swap_search


class ConvergenceError(RuntimeError):
    """The minimizer did not certify its result within the iteration budget."""

    def __init__(self, message: str, result: "MinimaxResult"):
        super().__init__(message)
        self.result = result


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def spread(P) -> float:
    """Squared radius ``d^2(P) = sum_{x != y} |x - y|^2 / (2 r^2 (r - 1))`` over ordered pairs."""
    P = as_points(P)
    r = len(P)
    if r < 2:
        raise ConfigError("spread needs at least 2 points")
    return float(_sq_dists(P, P).sum() / (2 * r * r * (r - 1)))


def d_n_sq(A, B, n: int) -> float:
    """Color-``n`` cross term ``sum_{m != n} |a_n - b_m|^2 + |a_m - b_n|^2``."""
    A, B = as_points(A), as_points(B)
    total = 0.0
    for m in range(len(A)):
        if m != n:
            total += float(np.sum((A[n] - B[m]) ** 2) + np.sum((A[m] - B[n]) ** 2))
    return total


def pair_spread(A, B) -> float:
    """``d^2(A, B) = sum_n d_n^2(A, B) / (4 r^2 (r - 1))`` for color-aligned transversals."""
    A, B = as_points(A), as_points(B)
    if A.shape != B.shape:
        raise ConfigError(f"transversals differ in shape: {A.shape} vs {B.shape}")
    r = len(A)
    if r < 2:
        raise ConfigError("pair_spread needs at least 2 points per transversal")
    sq = _sq_dists(A, B)
    off = sq.sum() - np.trace(sq)
    # each ordered off-diagonal pair appears twice in sum_n d_n^2
    return float(2.0 * off / (4 * r * r * (r - 1)))


def power(x, P) -> float:
    """Power of ``x`` with respect to ``B2(P)``; non-positive exactly inside the ball."""
    x, P = as_point(x), as_points(P)
    if x.shape[0] != P.shape[1]:
        raise ConfigError(f"dimension mismatch: {x.shape[0]} vs {P.shape[1]}")
    c = P.mean(axis=0)
    return float(np.sum((x - c) ** 2) - pair_spread(P, P))


def ball_of(P) -> Ball:
    P = as_points(P)
    return Ball(P.mean(axis=0), math.sqrt(max(spread(P), 0.0)), L2)


def total_spread(parts: np.ndarray) -> float:
    return float(sum(spread(P) for P in parts))


def swap_inequality(parts: np.ndarray) -> np.ndarray:
    """Matrix of ``d^2(Pi, Pi) + d^2(Pj, Pj) - 2 d^2(Pi, Pj)``; local maxima make it ``>= 0``."""
    k = len(parts)
    own = [pair_spread(P, P) for P in parts]
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = own[i] + own[j] - 2.0 * pair_spread(parts[i], parts[j])
    return out


def color_swap_inequality(parts: np.ndarray, i: int, j: int) -> np.ndarray:
    """Per-color values ``d_n^2(Pi, Pi) + d_n^2(Pj, Pj) - 2 d_n^2(Pi, Pj)``."""
    A, B = parts[i], parts[j]
    return np.array([d_n_sq(A, A, n) + d_n_sq(B, B, n) - 2.0 * d_n_sq(A, B, n) for n in range(len(A))])


# --- minimax of powers --------------------------------------------------------


@dataclass
class MinimaxResult:
    """Minimizer of ``max_i g_i`` with a dual certificate.

    ``weights`` are convex multipliers of the active functions and
    ``lower_bound`` is the dual value they certify; ``value - lower_bound`` is
    the optimality gap.
    """

    point: np.ndarray
    value: float
    weights: np.ndarray
    lower_bound: float
    converged: bool
    iterations: int
    method: str
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def gap(self) -> float:
        return self.value - self.lower_bound


def _power_values(x: np.ndarray, centers: np.ndarray, sq_radii: np.ndarray) -> np.ndarray:
    return np.sum((centers - x) ** 2, axis=1) - sq_radii


def _power_dual(lam: np.ndarray, centers: np.ndarray, sq_radii: np.ndarray) -> float:
    # min_x sum_i lam_i (|x - c_i|^2 - rho_i^2), attained at x = sum_i lam_i c_i
    x = lam @ centers
    return float(lam @ (np.sum(centers**2, axis=1) - sq_radii) - x @ x)


def _multipliers(x: np.ndarray, centers: np.ndarray, active: np.ndarray) -> np.ndarray:
    """Convex weights on ``active`` centers reproducing ``x`` (least squares, non-negative)."""
    idx = np.flatnonzero(active)
    scale = max(1.0, float(np.abs(centers).max()))
    A = np.vstack([centers[idx].T / scale, 1e3 * np.ones(len(idx))])
    b = np.concatenate([x / scale, [1e3]])
    w, _ = nnls(A, b)
    lam = np.zeros(len(centers))
    if w.sum() > 0:
        lam[idx] = w / w.sum()
    return lam


def _affine_rank(points: np.ndarray, tol: float = 1e-12) -> int:
    if len(points) < 2:
        return 0
    diff = points[1:] - points[0]
    s = np.linalg.svd(diff, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def _exact_power_minimax(centers: np.ndarray, sq_radii: np.ndarray) -> MinimaxResult:
    """Enumerate active sets; exact up to rounding.

    For an active set ``S`` with leader ``s``, the candidate minimizes
    ``|x - c_s|^2`` on the affine set where all powers in ``S`` coincide. The
    global minimizer is the candidate of its own (affinely independent) active
    set, and every candidate is an upper bound, so the smallest candidate wins.
    """
    k = len(centers)
    b = np.sum(centers**2, axis=1) - sq_radii
    max_size = min(k, _affine_rank(centers) + 1)
    best_x, best_val = centers[0].copy(), math.inf
    count = 0
    for size in range(1, max_size + 1):
        for S in itertools.combinations(range(k), size):
            count += 1
            s0, rest = S[0], list(S[1:])
            if rest:
                A = 2.0 * (centers[rest] - centers[s0])
                beta = b[rest] - b[s0]
                x = centers[s0] + np.linalg.pinv(A) @ (beta - A @ centers[s0])
            else:
                x = centers[s0].copy()
            val = float(_power_values(x, centers, sq_radii).max())
            if val < best_val:
                best_x, best_val = x, val
    vals = _power_values(best_x, centers, sq_radii)
    scale = max(1.0, float(np.abs(vals).max()))
    active = vals >= best_val - 1e-9 * scale
    lam = _multipliers(best_x, centers, active)
    return MinimaxResult(
        point=best_x,
        value=best_val,
        weights=lam,
        lower_bound=_power_dual(lam, centers, sq_radii),
        converged=True,
        iterations=count,
        method="active-set",
        values=vals,
    )


def _subgradient_power_minimax(
    centers: np.ndarray, sq_radii: np.ndarray, tol: float, max_iter: int
) -> MinimaxResult:
    """Subgradient steps ``1/(2t)`` on the 2-strongly convex maximum of powers.

    With this step the iterate is the running average of the active centers,
    so it stays in their affine hull and the visit frequencies are dual
    weights; the loop stops once the duality gap drops below ``tol``.
    """
    k = len(centers)
    counts = np.zeros(k)
    x = centers.mean(axis=0)
    best = (x.copy(), math.inf)
    lam = np.full(k, 1.0 / k)
    lower = _power_dual(lam, centers, sq_radii)
    t = 0
    for t in range(1, max_iter + 1):
        vals = _power_values(x, centers, sq_radii)
        i = int(np.argmax(vals))
        if vals[i] < best[1]:
            best = (x.copy(), float(vals[i]))
        counts[i] += 1
        x = x + (centers[i] - x) / t
        if t % 64 == 0 or t == max_iter:
            lam = counts / counts.sum()
            lower = max(lower, _power_dual(lam, centers, sq_radii))
            if best[1] - lower <= tol:
                break
    xb, vb = best
    return MinimaxResult(
        point=xb,
        value=vb,
        weights=counts / max(counts.sum(), 1),
        lower_bound=lower,
        converged=vb - lower <= tol,
        iterations=t,
        method="subgradient",
        values=_power_values(xb, centers, sq_radii),
    )


def minimize_power_max(
    centers,
    sq_radii,
    tol: float = 1e-9,
    max_iter: int = 200_000,
    method: str = "auto",
) -> MinimaxResult:
    """Minimize ``f(x) = max_i |x - c_i|^2 - rho_i^2``.

    ``method`` is ``"active-set"`` (exact, used by ``"auto"`` for up to 12
    balls) or ``"subgradient"``.
    """
    centers = as_points(centers)
    sq_radii = np.asarray(sq_radii, dtype=float).reshape(-1)
    if len(sq_radii) != len(centers):
        raise ConfigError("one squared radius per center is required")
    if method == "auto":
        method = "active-set" if len(centers) <= 12 else "subgradient"
    if method == "active-set":
        return _exact_power_minimax(centers, sq_radii)
    if method == "subgradient":
        return _subgradient_power_minimax(centers, sq_radii, tol, max_iter)
    raise ValueError(f"unknown method {method!r}")


def find_common_point(
    balls: Sequence[Ball], tol: float = 1e-9, max_iter: int = 200_000, method: str = "auto"
) -> tuple[np.ndarray, float]:
    """Point minimizing the largest power w.r.t. ``balls`` and that power (the residual).

    A non-positive residual means the point lies in every ball.

    Raises:
        ConvergenceError: if the optimality gap stays above ``tol``.
    """
    if not balls:
        raise ConfigError("no balls given")
    dims = {b.center.shape[0] for b in balls}
    if len(dims) != 1:
        raise ConfigError("balls live in different dimensions")
    centers = np.array([b.center for b in balls])
    sq = np.array([b.radius**2 for b in balls])
    res = minimize_power_max(centers, sq, tol=tol, max_iter=max_iter, method=method)
    if not res.converged:
        raise ConvergenceError(f"gap {res.gap:.3e} above tol {tol:.1e} after {res.iterations} steps", res)
    return res.point, res.value


# --- solver -------------------------------------------------------------------


@dataclass
class EuclidSolveReport:
    partition: TransversalPartition
    objective: float
    swap_count: int
    balls: list[Ball]
    common_point: Optional[np.ndarray]
    residual: float
    bound_ratio: float
    diameter: float
    history: list[float] = field(default_factory=list)
    weights: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        return {
            "assignment": self.partition.assignment.tolist(),
            "objective": self.objective,
            "swap_count": self.swap_count,
            "residual": self.residual,
            "bound_ratio": self.bound_ratio,
            "diameter": self.diameter,
            "balls": [b.to_dict() for b in self.balls],
            "common_point": None if self.common_point is None else self.common_point.tolist(),
        }


def default_eps(cfg: ColoredConfig) -> float:
    return 1e-12 * inter_color_diameter(cfg, L2) ** 2


def _require_euclidean(cfg: ColoredConfig) -> None:
    if cfg.model != "euclidean":
        raise ConfigError("the Euclidean solver needs a Euclidean configuration")


def euclid_report(cfg: ColoredConfig, partition: TransversalPartition, tol: float = 1e-9, **extra) -> EuclidSolveReport:
    """Balls, common point and bound ratio for a given partition."""
    _require_euclidean(cfg)
    parts = parts_of(cfg, partition)
    balls = [ball_of(P) for P in parts]
    res = minimize_power_max(
        np.array([b.center for b in balls]), np.array([spread(P) for P in parts]), tol=tol
    )
    diam = inter_color_diameter(cfg, L2)
    return EuclidSolveReport(
        partition=partition,
        objective=total_spread(parts),
        swap_count=extra.pop("swap_count", 0),
        balls=balls,
        common_point=res.point if res.converged else None,
        residual=res.value,
        bound_ratio=max(b.radius for b in balls) / diam,
        diameter=diam,
        weights=res.weights,
        **extra,
    )


def local_search_euclid(
    cfg: ColoredConfig,
    init: Optional[TransversalPartition] = None,
    eps: Optional[float] = None,
    tol: float = 1e-9,
    max_swaps: int = 1_000_000,
) -> EuclidSolveReport:
    """Swap search maximizing the total spread, then the common-point search."""
    _require_euclidean(cfg)
    if init is None:
        init = TransversalPartition.identity(cfg.r, cfg.k)
    check_partition(cfg, init)
    if eps is None:
        eps = default_eps(cfg)
    if eps <= 0:
        raise ValueError("eps must be positive")
    r = cfg.r
    pts = cfg.flat()
    # total spread = sum over unordered pairs in parts of |x-y|^2 / (r^2 (r-1))
    weights = _sq_dists(pts, pts) / (r * r * (r - 1))
    found = swap_search(weights, init, eps, max_swaps=max_swaps)
    return euclid_report(cfg, found.partition, tol=tol, swap_count=found.swap_count, history=found.history)


def hungarian_r2(cfg: ColoredConfig) -> TransversalPartition:
    """Global maximizer of the total spread for two colors (maximum-weight matching)."""
    _require_euclidean(cfg)
    if cfg.r != 2:
        raise ConfigError(f"hungarian_r2 needs exactly 2 colors, got r={cfg.r}")
    w = _sq_dists(cfg.points[0], cfg.points[1])
    rows, cols = linear_sum_assignment(w, maximize=True)
    assignment = np.vstack([rows, cols])
    return TransversalPartition(assignment)


def certify_euclidean_bound(cfg: ColoredConfig, report: EuclidSolveReport, tol: float = 1e-7) -> Certificate:
    """Common point, radius bound ``diam / sqrt(2r)`` and the pairwise swap inequality."""
    parts = parts_of(cfg, report.partition)
    r = cfg.r
    diam = inter_color_diameter(cfg, L2)
    bound = diam / math.sqrt(2 * r)
    radii = np.array([math.sqrt(max(spread(P), 0.0)) for P in parts])
    ineq = swap_inequality(parts)
    cert = Certificate("euclidean common point")
    cert.checks["residual"] = bool(report.residual <= tol)
    cert.checks["radius_bound"] = bool(np.all(radii <= bound + tol))
    k = len(parts)
    bad_pairs = [(i, j) for i in range(k) for j in range(i + 1, k) if ineq[i, j] < -tol]
    cert.checks["swap_inequality"] = not bad_pairs
    for i in np.flatnonzero(radii > bound + tol):
        cert.violations.append({"check": "radius_bound", "part": int(i), "radius": float(radii[i]), "bound": bound})
    for i, j in bad_pairs:
        per_color = color_swap_inequality(parts, i, j)
        cert.violations.append(
            {
                "check": "swap_inequality",
                "parts": [i, j],
                "value": float(ineq[i, j]),
                "colors": [int(n) for n in np.flatnonzero(per_color < 0)],
            }
        )
    cert.values.update(
        residual=report.residual,
        max_radius=float(radii.max()),
        diameter=diam,
        bound_ratio=float(radii.max() / diam),
        theoretical_bound=1.0 / math.sqrt(2 * r),
        min_swap_inequality=float(min((ineq[i, j] for i in range(k) for j in range(i + 1, k)), default=0.0)),
    )
    return cert
