"""Hyperboloid model: Lorentzian form, balls of transversals, common points.

A point of the hyperboloid is a float array ``(x0, x1, ..., xd)`` with
``-x0^2 + x1^2 + ... + xd^2 = -1`` and ``x0 > 0``. Chart coordinates
``z in R^d`` map to the sheet by :func:`lift`.

For a transversal ``P`` and a chart point ``z`` put

    f_P(z) = sum_{x != y in P} p(x - z_H, y - z_H),

which is non-positive exactly when ``z_H`` lies in the ball induced by ``P``.
Each ``f_P`` is convex; a partition that is locally minimal for the total
``p(P, P)`` makes ``max_P f_P`` attain a non-positive value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .core import (
    HYPERBOLOID,
    Certificate,
    ColoredConfig,
    ConfigError,
    TransversalPartition,
    as_point,
    check_partition,
    parts_of,
)
from .euclid import ConvergenceError, MinimaxResult
from .localsearch import swap_search

HYPERBOLIC = "hyperbolic"
ARCOSH_GUARD = 1e-12


class BalanceError(ValueError):
    """The supplied weights do not balance the gradients at ``z``."""


def lorentz_p(x, y) -> np.ndarray:
    """``p(x, y) = -x0 y0 + <x_inf, y_inf>``, broadcasting over leading axes."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ConfigError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def lorentz_q(x) -> np.ndarray:
    return lorentz_p(x, x)


def gram(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of ``p(a[s], b[t])``."""
    return -np.outer(a[:, 0], b[:, 0]) + a[:, 1:] @ b[:, 1:].T


def hpoint(x0: float, x_inf) -> np.ndarray:
    x = np.concatenate([[float(x0)], np.asarray(x_inf, dtype=float).reshape(-1)])
    return validate_hpoint(x)


def validate_hpoint(x, tol: float = 1e-9) -> np.ndarray:
    x = as_point(x)
    if x.size < 2:
        raise ConfigError("a hyperboloid point needs at least 2 coordinates")
    if x[0] <= 0 or abs(float(lorentz_q(x)) + 1.0) > tol * max(1.0, x[0] ** 2):
        raise ConfigError("not on the hyperboloid: need q(x) = -1 and x0 > 0")
    return x


def lift(z) -> np.ndarray:
    """Chart point ``z`` to ``(sqrt(1 + <z, z>), z)``."""
    z = np.asarray(z, dtype=float)
    return np.concatenate([[math.sqrt(1.0 + float(z @ z))], z])


def normalize(v: np.ndarray) -> np.ndarray:
    """Scale a future time-like vector onto the hyperboloid."""
    q = float(lorentz_q(v))
    if not (q < 0 and v[0] > 0):
        raise ConfigError("vector is not future time-like")
    return v / math.sqrt(-q)


def hdist(x, y) -> float:
    """Hyperbolic distance ``arcosh(-p(x, y))``.

    Evaluated as ``2 asinh(sqrt(q(x - y)) / 2)``, the same quantity with no
    cancellation for nearby points.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    m = -float(lorentz_p(x, y))
    if m < 1.0 - ARCOSH_GUARD * max(1.0, abs(x[0] * y[0])):
        raise ConfigError(f"-p(x, y) = {m!r} < 1: inputs are not hyperboloid points")
    qd = max(float(lorentz_q(x - y)), 0.0)
    return 2.0 * math.asinh(math.sqrt(qd) / 2.0)


def exp_map(base: np.ndarray, direction: np.ndarray, t: float) -> np.ndarray:
    """Point at distance ``t`` from ``base`` along the tangent projection of ``direction``."""
    v = direction + lorentz_p(direction, base) * base
    n = math.sqrt(max(float(lorentz_q(v)), 0.0))
    if n == 0:
        return base.copy()
    v = v / n
    return math.cosh(t) * base + math.sinh(t) * v


def pairing(A, B) -> float:
    """``p(A, B) = sum_{i != j} p(a_i, b_j)`` for color-aligned transversals."""
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ConfigError(f"transversals differ in shape: {A.shape} vs {B.shape}")
    g = gram(A, B)
    return float(g.sum() - np.trace(g))


def ball_sum(z, X) -> float:
    """``sum_{x != y in X} p(x - z, y - z)``, evaluated from the differences."""
    X = np.asarray(X, dtype=float)
    D = X - np.asarray(z, dtype=float)
    g = gram(D, D)
    return float(g.sum() - np.trace(g))


@dataclass(frozen=True)
class HyperBall:
    """Ball ``{z : p(z, centroid) >= threshold}`` = ``{z : d(z, center) <= radius}``."""

    center: np.ndarray
    radius: float
    threshold: float
    centroid: np.ndarray
    geometry: str = HYPERBOLIC

    def contains(self, z, tol: float = 0.0) -> bool:
        return hdist(z, self.center) <= self.radius + tol

    def contains_by_threshold(self, z) -> bool:
        return float(lorentz_p(z, self.centroid)) >= self.threshold

    def to_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "radius": self.radius,
            "threshold": self.threshold,
            "geometry": self.geometry,
        }


def hyper_ball(X) -> HyperBall:
    """Ball induced by ``n >= 2`` hyperboloid points.

    Expanding the defining sum by bilinearity gives

        sum_{x != y} p(x - z, y - z) = S - 2 n (n - 1) p(z, c) - n (n - 1)

    with ``S = sum_{x != y} p(x, y)`` and centroid ``c``, so membership is
    ``p(z, c) >= (S - n (n - 1)) / (2 n (n - 1))``. Dividing by
    ``sqrt(-q(c))`` turns this into a distance bound around ``c / sqrt(-q(c))``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) < 2:
        raise ConfigError("a hyperbolic ball needs at least 2 points")
    n = len(X)
    c = X.mean(axis=0)
    qc = float(lorentz_q(c))
    # centroids of points on the sheet are future time-like
    assert qc < 0 and c[0] > 0, "centroid of hyperboloid points must be time-like"
    s = math.sqrt(-qc)
    thr = (pairing(X, X) - n * (n - 1)) / (2 * n * (n - 1))
    ratio = -thr / s
    if ratio < 1.0:
        if ratio < 1.0 - ARCOSH_GUARD * max(1.0, abs(thr)):
            raise ConfigError("degenerate ball: threshold below the centroid value")
        ratio = 1.0
    return HyperBall(center=c / s, radius=math.acosh(ratio), threshold=thr, centroid=c)


# --- f and its minimization ---------------------------------------------------


def _part_data(parts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Offsets ``a_i`` and Lorentz vectors ``C_i`` with ``f_i(z) = a_i - p(C_i, z_H)``."""
    parts = np.asarray(parts, dtype=float)
    r = parts.shape[1]
    a = np.array([pairing(P, P) for P in parts]) - r * (r - 1)
    C = 2.0 * (r - 1) * parts.sum(axis=1)
    return a, C


def hyper_f_and_grad(z, parts) -> tuple[np.ndarray, np.ndarray]:
    """Values ``f_i(z)`` and chart gradients for every part.

    ``f_i(z) = p(P_i, P_i) - 2(r-1) sum_x p(x, z_H) - r(r-1)`` and
    ``grad f_i(z) = -2(r-1) sum_x (x_inf - x0 z / sqrt(1 + <z, z>))``.
    """
    z = np.asarray(z, dtype=float)
    parts = np.asarray(parts, dtype=float)
    r = parts.shape[1]
    zh = lift(z)
    vals = np.array([pairing(P, P) for P in parts]) - 2 * (r - 1) * lorentz_p(parts, zh).sum(axis=1) - r * (r - 1)
    spatial = parts[..., 1:].sum(axis=1)
    time = parts[..., 0].sum(axis=1)
    grads = -2 * (r - 1) * (spatial - np.outer(time, z) / zh[0])
    return vals, grads


def f_max(z, parts) -> float:
    return float(hyper_f_and_grad(z, parts)[0].max())


def _dual_value(lam: np.ndarray, a: np.ndarray, C: np.ndarray) -> tuple[float, np.ndarray]:
    """Dual function ``sum lam_i a_i + sqrt(-q(sum lam_i C_i))`` and its primal point."""
    V = lam @ C
    s = math.sqrt(-float(lorentz_q(V)))
    return float(lam @ a) + s, V / s


def _face_newton(a: np.ndarray, C: np.ndarray, lam: np.ndarray, support: list[int], iters: int = 60) -> np.ndarray:
    """Maximize the dual on the face of the simplex spanned by ``support``."""
    S = list(support)
    lam = np.where(np.isin(np.arange(len(a)), S), lam, 0.0)
    if lam[S].sum() <= 0:
        lam[S] = 1.0
    lam = lam / lam.sum()
    G = gram(C, C)
    for _ in range(iters):
        V = lam @ C
        s = math.sqrt(-float(lorentz_q(V)))
        w = V / s
        f = a - lorentz_p(C, w)
        pv = lorentz_p(C, V)
        H = -G / s - np.outer(pv, pv) / s**3
        m = len(S)
        K = np.zeros((m + 1, m + 1))
        K[:m, :m] = H[np.ix_(S, S)]
        K[:m, m] = -1.0
        K[m, :m] = 1.0
        mu = float(lam[S] @ f[S])
        rhs = np.concatenate([-(f[S] - mu), [1.0 - lam[S].sum()]])
        step = np.linalg.lstsq(K, rhs, rcond=None)[0][:m]
        scale = max(1.0, float(np.abs(f).max()))
        if np.abs(f[S] - mu).max() <= 1e-15 * scale and np.abs(step).max() <= 1e-15:
            break
        t = 1.0
        neg = step < 0
        if np.any(neg):
            t = min(1.0, float(np.min(-lam[S][neg] / step[neg])))
        lam[S] = lam[S] + t * step
        lam = np.clip(lam, 0.0, None)
        dropped = [i for i in S if lam[i] <= 0.0]
        if dropped and len(S) > 1:
            S = [i for i in S if lam[i] > 0.0]
        lam = lam / lam.sum()
        if np.abs(step).max() <= 1e-15:
            break
    return lam


def _dual_minimax(parts: np.ndarray, tol: float, max_rounds: int = 20) -> MinimaxResult:
    """Dual ascent over the simplex, then active-set Newton polish.

    Weak duality makes every simplex vector a lower bound, and the primal
    point ``V / sqrt(-q(V))`` an upper bound; the result is converged when the
    two agree within ``tol``.
    """
    a, C = _part_data(parts)
    k = len(a)

    def neg_dual(lam):
        V = lam @ C
        s = math.sqrt(-float(lorentz_q(V)))
        w = V / s
        return -(float(lam @ a) + s), -(a - lorentz_p(C, w))

    lam0 = np.full(k, 1.0 / k)
    if k > 1:
        sol = minimize(
            neg_dual,
            lam0,
            jac=True,
            method="SLSQP",
            bounds=[(0.0, 1.0)] * k,
            constraints=[{"type": "eq", "fun": lambda l: l.sum() - 1.0, "jac": lambda l: np.ones_like(l)}],
            options={"ftol": 1e-15, "maxiter": 500},
        )
        lam = np.clip(sol.x, 0.0, None)
        lam = lam / lam.sum() if lam.sum() > 0 else lam0
    else:
        lam = lam0

    best = None
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        lower, w = _dual_value(lam, a, C)
        f = a - lorentz_p(C, w)
        gap = float(f.max()) - lower
        if best is None or gap < best[0]:
            best = (gap, lam.copy(), lower, w, f)
        scale = max(1.0, float(np.abs(f).max()))
        if gap <= min(tol, 1e-13 * scale):
            break
        support = [i for i in range(k) if lam[i] > 1e-12]
        violated = int(np.argmax(f))
        if violated not in support and f[violated] > lower + 1e-14 * scale:
            support.append(violated)
        lam = _face_newton(a, C, lam, support)

    gap, lam, lower, w, f = best
    z = w[1:].copy()
    vals, _ = hyper_f_and_grad(z, parts)
    value = float(vals.max())
    return MinimaxResult(
        point=z,
        value=value,
        weights=lam,
        lower_bound=lower,
        converged=value - lower <= tol,
        iterations=rounds,
        method="dual-newton",
        values=vals,
    )


def _subgradient_minimax(parts: np.ndarray, tol: float, max_iter: int) -> MinimaxResult:
    """Normalized subgradient steps with diminishing length, dual bound from visit frequencies."""
    parts = np.asarray(parts, dtype=float)
    a, C = _part_data(parts)
    k = len(a)
    z = normalize(parts.reshape(-1, parts.shape[-1]).mean(axis=0))[1:]
    vals, grads = hyper_f_and_grad(z, parts)
    step0 = 1.0
    best_z, best_val = z.copy(), float(vals.max())
    counts = np.zeros(k)
    lower = -math.inf
    t = 0
    for t in range(1, max_iter + 1):
        i = int(np.argmax(vals))
        counts[i] += 1
        g = grads[i]
        gn = float(np.linalg.norm(g))
        if gn == 0:
            lower = max(lower, _dual_value(np.eye(k)[i], a, C)[0])
            break
        z = z - (step0 / math.sqrt(t)) * g / gn
        vals, grads = hyper_f_and_grad(z, parts)
        if vals.max() < best_val:
            best_z, best_val = z.copy(), float(vals.max())
        if t % 64 == 0 or t == max_iter:
            lower = max(lower, _dual_value(counts / counts.sum(), a, C)[0])
            if best_val - lower <= tol:
                break
    return MinimaxResult(
        point=best_z,
        value=best_val,
        weights=counts / max(counts.sum(), 1),
        lower_bound=lower,
        converged=best_val - lower <= tol,
        iterations=t,
        method="subgradient",
        values=hyper_f_and_grad(best_z, parts)[0],
    )


def minimize_f_hyper(parts, tol: float = 1e-9, max_iter: int = 100_000, method: str = "dual") -> MinimaxResult:
    """Minimize ``max_i f_i`` over the chart; ``method`` is ``"dual"`` or ``"subgradient"``."""
    parts = np.asarray(parts, dtype=float)
    if parts.ndim != 3 or parts.shape[1] < 2:
        raise ConfigError("parts must be a (k, r, d+1) array with r >= 2")
    if method == "dual":
        return _dual_minimax(parts, tol)
    if method == "subgradient":
        return _subgradient_minimax(parts, tol, max_iter)
    raise ValueError(f"unknown method {method!r}")


def find_common_point_hyper(
    parts, tol: float = 1e-9, max_iter: int = 100_000, method: str = "dual"
) -> tuple[np.ndarray, float]:
    """Hyperboloid point minimizing ``max_i f_i`` and that minimum (the residual).

    Raises:
        ConvergenceError: if the duality gap stays above ``tol``.
    """
    res = minimize_f_hyper(parts, tol=tol, max_iter=max_iter, method=method)
    if not res.converged:
        raise ConvergenceError(f"gap {res.gap:.3e} above tol {tol:.1e}", res)
    return lift(res.point), res.value


# --- solver -------------------------------------------------------------------


@dataclass
class HyperSolveReport:
    partition: TransversalPartition
    objective: float
    swap_count: int
    balls: list[HyperBall]
    common_point: Optional[np.ndarray]
    residual: float
    weights: Optional[np.ndarray] = None
    chart_point: Optional[np.ndarray] = None
    history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "assignment": self.partition.assignment.tolist(),
            "objective": self.objective,
            "swap_count": self.swap_count,
            "residual": self.residual,
            "balls": [b.to_dict() for b in self.balls],
            "common_point": None if self.common_point is None else self.common_point.tolist(),
        }


def _require_hyperboloid(cfg: ColoredConfig) -> None:
    if cfg.model != HYPERBOLOID:
        raise ConfigError("the hyperbolic solver needs a hyperboloid configuration")


def default_eps(cfg: ColoredConfig) -> float:
    g = gram(cfg.flat(), cfg.flat())
    return 1e-12 * max(1.0, float(np.abs(g).max()))


def total_pairing(parts: np.ndarray) -> float:
    return float(sum(pairing(P, P) for P in parts))


def hyper_report(cfg: ColoredConfig, partition: TransversalPartition, tol: float = 1e-9, **extra) -> HyperSolveReport:
    _require_hyperboloid(cfg)
    parts = parts_of(cfg, partition)
    res = minimize_f_hyper(parts, tol=tol)
    return HyperSolveReport(
        partition=partition,
        objective=total_pairing(parts),
        swap_count=extra.pop("swap_count", 0),
        balls=[hyper_ball(P) for P in parts],
        common_point=lift(res.point) if res.converged else None,
        residual=res.value,
        weights=res.weights,
        chart_point=res.point,
        **extra,
    )


def local_search_hyper(
    cfg: ColoredConfig,
    init: Optional[TransversalPartition] = None,
    eps: Optional[float] = None,
    tol: float = 1e-9,
    max_swaps: int = 1_000_000,
) -> HyperSolveReport:
    """Swap search minimizing ``sum_i p(P_i, P_i)``, then the common-point search."""
    _require_hyperboloid(cfg)
    if init is None:
        init = TransversalPartition.identity(cfg.r, cfg.k)
    check_partition(cfg, init)
    if eps is None:
        eps = default_eps(cfg)
    if eps <= 0:
        raise ValueError("eps must be positive")
    pts = cfg.flat()
    # maximize -sum_i p(P_i, P_i) = -2 * sum over unordered pairs of p
    weights = -2.0 * gram(pts, pts)
    found = swap_search(weights, init, eps, max_swaps=max_swaps)
    return hyper_report(
        cfg,
        found.partition,
        tol=tol,
        swap_count=found.swap_count,
        history=[-h for h in found.history],
    )


def swap_inequality(parts: np.ndarray) -> np.ndarray:
    """Matrix of ``p(Pi, Pi) + p(Pj, Pj) - 2 p(Pi, Pj)``; local minima make it ``<= 0``."""
    k = len(parts)
    own = [pairing(P, P) for P in parts]
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = own[i] + own[j] - 2.0 * pairing(parts[i], parts[j])
    return out


def certify_hyperbolic(cfg: ColoredConfig, report: HyperSolveReport, tol: float = 1e-7) -> Certificate:
    parts = parts_of(cfg, report.partition)
    cert = Certificate("hyperbolic common point")
    cert.checks["residual"] = bool(report.residual <= tol)
    ineq = swap_inequality(parts)
    k = len(parts)
    bad = [(i, j) for i in range(k) for j in range(i + 1, k) if ineq[i, j] > tol]
    cert.checks["swap_inequality"] = not bad
    for i, j in bad:
        cert.violations.append({"check": "swap_inequality", "parts": [i, j], "value": float(ineq[i, j])})
    if report.common_point is not None:
        gaps = [hdist(report.common_point, b.center) - b.radius for b in report.balls]
        cert.values["max_containment_gap"] = max(gaps)
    cert.values.update(
        residual=report.residual,
        max_swap_inequality=float(max((ineq[i, j] for i in range(k) for j in range(i + 1, k)), default=0.0)),
        max_radius=max(b.radius for b in report.balls),
    )
    return cert


# --- proof-level checks ---------------------------------------------------------


def check_timelike_cs(x, y, tol: float = 1e-9) -> Certificate:
    """Reverse Cauchy-Schwarz for future time-like vectors: ``p < 0`` and ``p^2 >= q(x) q(y)``.

    Equality is expected exactly when ``x`` is a multiple of ``y``.
    """
    x, y = as_point(x), as_point(y)
    qx, qy = float(lorentz_q(x)), float(lorentz_q(y))
    if not (qx < 0 and qy < 0 and x[0] > 0 and y[0] > 0):
        raise ValueError("both vectors must be time-like with positive first coordinate")
    pxy = float(lorentz_p(x, y))
    slack = pxy * pxy - qx * qy
    scale = max(1.0, pxy * pxy, abs(qx * qy))
    lam = float(x @ y) / float(y @ y)
    offset = float(np.linalg.norm(x - lam * y))
    proportional = offset <= 1e-9 * max(1.0, float(np.linalg.norm(x)))
    cert = Certificate("reverse Cauchy-Schwarz")
    cert.checks["p_negative"] = pxy < 0
    cert.checks["reverse_cauchy_schwarz"] = slack >= -tol * scale
    if proportional:
        cert.checks["equality_case"] = abs(slack) <= tol * scale
    else:
        cert.checks["equality_case"] = slack > 0 or abs(slack) <= tol * scale
    cert.values.update(
        p=pxy, q_x=qx, q_y=qy, slack=slack, proportional=proportional, strict=slack > 0, offset=offset, fitted_lambda=lam
    )
    return cert


def check_balanced_aggregate(parts, weights, z, tol: float = 1e-7, balance_tol: float = 1e-7) -> Certificate:
    """Check ``sum_{m != n} p(s_n - z_H, s_m - z_H) <= 0`` at a balanced chart point.

    ``s_n = sum_i w_i x_in`` aggregates the color-``n`` points of the weighted
    parts, and ``beta_n = sqrt(-q(s_n))``.

    Raises:
        BalanceError: when ``sum_i w_i grad f_i(z)`` is not zero within
            ``balance_tol`` (relative to the gradient scale).
    """
    parts = np.asarray(parts, dtype=float)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if len(w) != len(parts):
        raise ConfigError("one weight per part is required")
    if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
        raise ConfigError("weights must be non-negative and sum to 1")
    w = np.clip(w, 0.0, None)
    z = np.asarray(z, dtype=float)
    _, grads = hyper_f_and_grad(z, parts)
    active = w > 0
    balance = w @ grads
    gscale = max(1.0, float(np.abs(grads[active]).max()))
    if np.linalg.norm(balance) > balance_tol * gscale:
        raise BalanceError(f"gradients are not balanced: |sum w_i grad f_i| = {np.linalg.norm(balance):.3e}")
    r = parts.shape[1]
    zh = lift(z)
    s = np.einsum("i,ind->nd", w, parts)
    D = s - zh
    g = gram(D, D)
    lhs = float(g.sum() - np.trace(g))
    betas = np.sqrt(-lorentz_q(s))
    total = -float(lorentz_q(s.sum(axis=0)))
    cert = Certificate("hyperbolic technical inequality")
    lscale = max(1.0, float(np.abs(g).max()))
    cert.checks["inequality"] = lhs <= tol * lscale
    cert.values.update(
        lhs=lhs,
        betas=betas,
        min_beta=float(betas.min()),
        neg_q_sum=total,
        beta_sum_sq=float(betas.sum() ** 2),
        r_sq=r * r,
        balance_norm=float(np.linalg.norm(balance)),
    )
    return cert
