"""Exhaustive ground truth for small instances.

Nothing here shares code with the swap search: objectives are recomputed
from their definitions for every partition, and hull distances come from a
separate min-norm-point solver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy.optimize import minimize

from . import banach, euclid, hyperbolic
from .core import (
    HYPERBOLOID,
    L2,
    Certificate,
    ColoredConfig,
    ConfigError,
    NormKind,
    TransversalPartition,
    as_point,
    as_points,
    parts_of,
)
from .euclid import ConvergenceError

DEFAULT_CAP = 10**6

EUCLID_SUM = "euclid"
BANACH_SUM = "banach"
HYPER_SUM = "hyper"


class PartitionIterator:
    """All partitions into transversals with color 0 pinned to the identity.

    Parts are unlabeled, so pinning one color removes exactly the ``k!``
    relabelings; ``(k!)^(r-1)`` partitions remain.
    """

    def __init__(self, cfg: ColoredConfig, cap: int = DEFAULT_CAP):
        self.cfg = cfg
        self.total = math.factorial(cfg.k) ** (cfg.r - 1)
        if self.total > cap:
            raise ConfigError(f"{self.total} partitions exceed the enumeration cap {cap}")

    def __len__(self) -> int:
        return self.total

    def __iter__(self) -> Iterator[TransversalPartition]:
        k, r = self.cfg.k, self.cfg.r
        ident = tuple(range(k))
        for rows in itertools.product(itertools.permutations(range(k)), repeat=r - 1):
            yield TransversalPartition(np.array((ident,) + rows))


def enumerate_partitions(cfg: ColoredConfig, cap: int = DEFAULT_CAP) -> PartitionIterator:
    return PartitionIterator(cfg, cap)


@dataclass
class OracleResult:
    best_partition: TransversalPartition
    best_objective: float
    num_enumerated: int

    def to_dict(self) -> dict:
        return {
            "best_objective": self.best_objective,
            "best_assignment": self.best_partition.assignment.tolist(),
            "num_enumerated": self.num_enumerated,
        }


def objective_value(parts: np.ndarray, objective: str, norm: Optional[NormKind] = None) -> float:
    if objective == EUCLID_SUM:
        return float(sum(euclid.spread(P) for P in parts))
    if objective == BANACH_SUM:
        return float(sum(banach.delta(P, norm or L2) for P in parts))
    if objective == HYPER_SUM:
        return float(sum(hyperbolic.pairing(P, P) for P in parts))
    raise ValueError(f"unknown objective {objective!r}")


def global_opt(
    cfg: ColoredConfig, objective: str = EUCLID_SUM, norm: Optional[NormKind] = None, cap: int = DEFAULT_CAP
) -> OracleResult:
    """Brute-force optimum: maximum for the euclid/banach sums, minimum for the hyper sum.

    Ties keep the first partition in enumeration order.
    """
    if (objective == HYPER_SUM) != (cfg.model == HYPERBOLOID):
        raise ConfigError(f"objective {objective!r} does not match a {cfg.model} configuration")
    sign = -1.0 if objective == HYPER_SUM else 1.0
    best, best_val, count = None, -math.inf, 0
    for part in enumerate_partitions(cfg, cap):
        count += 1
        val = sign * objective_value(parts_of(cfg, part), objective, norm)
        if val > best_val:
            best, best_val = part, val
    return OracleResult(best, sign * best_val, count)


# --- distance to a convex hull --------------------------------------------------


def _affine_min_norm(V: np.ndarray) -> np.ndarray:
    """Weights (summing to 1, any sign) of the min-norm point of the affine hull of rows of ``V``."""
    m = len(V)
    K = np.zeros((m + 1, m + 1))
    K[:m, :m] = V @ V.T
    K[:m, m] = 1.0
    K[m, :m] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    return np.linalg.lstsq(K, rhs, rcond=None)[0][:m]


def _min_norm_enumerate(V: np.ndarray) -> np.ndarray:
    """Min-norm point of ``conv V`` by trying every face; exact for few vertices."""
    best, best_n = None, math.inf
    for size in range(1, len(V) + 1):
        for S in itertools.combinations(range(len(V)), size):
            w = _affine_min_norm(V[list(S)])
            if np.any(w < -1e-12):
                continue
            x = np.clip(w, 0, None) @ V[list(S)] / max(np.clip(w, 0, None).sum(), 1e-300)
            n = float(x @ x)
            if n < best_n:
                best, best_n = x, n
    return best


def _min_norm_wolfe(V: np.ndarray, tol: float = 1e-12, max_iter: int = 10_000) -> np.ndarray:
    """Wolfe's min-norm-point algorithm on the rows of ``V``."""
    norms = np.einsum("ij,ij->i", V, V)
    scale = max(float(norms.max()), 1e-300)
    S = [int(np.argmin(norms))]
    w = np.array([1.0])
    x = V[S[0]].copy()
    for _ in range(max_iter):
        j = int(np.argmin(V @ x))
        if x @ x - V[j] @ x <= tol * scale or j in S:
            break
        S.append(j)
        w = np.append(w, 0.0)
        while True:
            alpha = _affine_min_norm(V[S])
            if np.all(alpha > 1e-14):
                w = alpha
                break
            neg = alpha <= 1e-14
            theta = min(1.0, float(np.min(w[neg] / (w[neg] - alpha[neg]))))
            w = theta * alpha + (1 - theta) * w
            keep = w > 1e-14
            S = [s for s, kp in zip(S, keep) if kp]
            w = w[keep] / w[keep].sum()
        x = w @ V[S]
    return x


def nearest_in_hull(x, vertices, method: str = "auto") -> np.ndarray:
    x, V = as_point(x), as_points(vertices)
    if V.shape[1] != x.shape[0]:
        raise ConfigError("dimension mismatch")
    if method == "auto":
        method = "enumerate" if len(V) <= 8 else "wolfe"
    shifted = V - x
    if method == "enumerate":
        return x + _min_norm_enumerate(shifted)
    if method == "wolfe":
        return x + _min_norm_wolfe(shifted)
    raise ValueError(f"unknown method {method!r}")


def dist_to_hull(x, vertices, method: str = "auto") -> float:
    """Euclidean distance from ``x`` to the convex hull of ``vertices``."""
    x = as_point(x)
    return float(np.linalg.norm(nearest_in_hull(x, vertices, method) - x))


# --- smallest ball meeting every hull -------------------------------------------


def _affine_frame(points: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    origin = points.mean(axis=0)
    _, s, vt = np.linalg.svd(points - origin, full_matrices=False)
    rank = int(np.sum(s > tol * max(s.max(), 1e-300))) if s.size else 0
    return origin, vt[:rank].T


def best_ball(parts: np.ndarray, tol: float = 1e-9, warm_iters: int = 20) -> tuple[np.ndarray, float]:
    """Center and radius of the smallest Euclidean ball meeting every ``conv parts[i]``.

    A subgradient pass on ``max_i dist(x, conv P_i)`` gives a start; an SQP
    solve of ``min s`` subject to ``|x - P_i^T w_i|^2 <= s`` (``w_i`` in the
    simplex) refines it. The center is searched in the affine hull of all
    points.
    """
    parts = np.asarray(parts, dtype=float)
    k, r, d = parts.shape
    origin, U = _affine_frame(parts.reshape(-1, d))
    h = U.shape[1]

    def radius_at(x):
        return max(dist_to_hull(x, P) for P in parts)

    x = origin.copy()
    best_x, best_val = x.copy(), radius_at(x)
    if h == 0:
        return best_x, best_val
    step0 = max(best_val, 1e-12)
    for t in range(1, warm_iters + 1):
        near = [nearest_in_hull(x, P) for P in parts]
        dists = [float(np.linalg.norm(x - n)) for n in near]
        i = int(np.argmax(dists))
        if dists[i] <= 0:
            break
        g = U @ (U.T @ ((x - near[i]) / dists[i]))
        x = x - step0 / math.sqrt(t) * g
        val = radius_at(x)
        if val < best_val:
            best_x, best_val = x.copy(), val

    if best_val <= tol:
        return best_x, best_val

    def weights_for(x):
        out = []
        for P in parts:
            n = nearest_in_hull(x, P)
            w = np.linalg.lstsq(np.vstack([P.T, np.ones(r)]), np.append(n, 1.0), rcond=None)[0]
            w = np.clip(w, 0, None)
            out.append(w / w.sum() if w.sum() > 0 else np.full(r, 1.0 / r))
        return np.concatenate(out)

    nvar = h + k * r + 1
    y0 = U.T @ (best_x - origin)
    v0 = np.concatenate([y0, weights_for(best_x), [best_val**2]])

    def unpack(v):
        return origin + U @ v[:h], v[h : h + k * r].reshape(k, r), v[-1]

    def cons_ineq(v):
        x, W, s = unpack(v)
        gaps = x - np.einsum("ir,ird->id", W, parts)
        return s - np.einsum("id,id->i", gaps, gaps)

    def cons_ineq_jac(v):
        x, W, s = unpack(v)
        gaps = x - np.einsum("ir,ird->id", W, parts)
        J = np.zeros((k, nvar))
        J[:, :h] = -2.0 * gaps @ U
        for i in range(k):
            J[i, h + i * r : h + (i + 1) * r] = 2.0 * parts[i] @ gaps[i]
        J[:, -1] = 1.0
        return J

    def cons_eq(v):
        return v[h : h + k * r].reshape(k, r).sum(axis=1) - 1.0

    eq_jac = np.zeros((k, nvar))
    for i in range(k):
        eq_jac[i, h + i * r : h + (i + 1) * r] = 1.0

    obj_grad = np.zeros(nvar)
    obj_grad[-1] = 1.0
    sol = minimize(
        lambda v: v[-1],
        v0,
        jac=lambda v: obj_grad,
        method="SLSQP",
        bounds=[(None, None)] * h + [(0.0, 1.0)] * (k * r) + [(0.0, None)],
        constraints=[
            {"type": "ineq", "fun": cons_ineq, "jac": cons_ineq_jac},
            {"type": "eq", "fun": cons_eq, "jac": lambda v: eq_jac},
        ],
        options={"ftol": 1e-16, "maxiter": 1000},
    )
    x_ref = unpack(sol.x)[0]
    val_ref = radius_at(x_ref)
    if val_ref < best_val:
        best_x, best_val = x_ref, val_ref
    if sol.status not in (0, 8) and best_val > tol:
        raise ConvergenceError(f"smallest-ball search failed: {sol.message}", None)
    return best_x, best_val


def best_ball_radius(cfg: ColoredConfig, partition: TransversalPartition, tol: float = 1e-9) -> float:
    """Smallest radius of a Euclidean ball meeting the hull of every part."""
    if cfg.model != "euclidean":
        raise ConfigError("best_ball_radius is Euclidean only")
    return best_ball(parts_of(cfg, partition), tol)[1]


# --- cross-module validation ----------------------------------------------------


def verify_all_certificates(
    cfg: ColoredConfig, space: str = "euclid", norm: Optional[NormKind] = None, tol: float = 1e-7
) -> Certificate:
    """Global optimum by enumeration, its swap inequalities, then the existence certificate.

    Also checks that the swap search never beats the exhaustive optimum.
    """
    cert = Certificate(f"oracle cross-check ({space})")
    if space == "euclid":
        opt = global_opt(cfg, EUCLID_SUM)
        parts = parts_of(cfg, opt.best_partition)
        ineq = euclid.swap_inequality(parts)
        iu = np.triu_indices(cfg.k, 1)
        cert.checks["swap_inequality"] = bool(np.all(ineq[iu] >= -tol))
        rep = euclid.euclid_report(cfg, opt.best_partition)
        exist = euclid.certify_euclidean_bound(cfg, rep, tol)
        local = euclid.local_search_euclid(cfg)
        cert.checks["local_not_above_global"] = local.objective <= opt.best_objective + 1e-9
        cert.values["local_objective"] = local.objective
    elif space == "banach":
        norm = norm or L2
        opt = global_opt(cfg, BANACH_SUM, norm)
        parts = parts_of(cfg, opt.best_partition)
        ineq = banach.swap_inequality(parts, norm)
        iu = np.triu_indices(cfg.k, 1)
        cert.checks["swap_inequality"] = bool(np.all(ineq[iu] >= -tol))
        rep = banach.banach_report(cfg, opt.best_partition, norm)
        exist = banach.certify_linf_bound(cfg, rep, tol) if norm.is_inf else banach.certify_pairwise(rep, tol)
        local = banach.local_search_banach(cfg, norm)
        cert.checks["local_not_above_global"] = local.objective <= opt.best_objective + 1e-9
        cert.values["local_objective"] = local.objective
    elif space == "hyper":
        opt = global_opt(cfg, HYPER_SUM)
        parts = parts_of(cfg, opt.best_partition)
        ineq = hyperbolic.swap_inequality(parts)
        iu = np.triu_indices(cfg.k, 1)
        cert.checks["swap_inequality"] = bool(np.all(ineq[iu] <= tol))
        rep = hyperbolic.hyper_report(cfg, opt.best_partition)
        exist = hyperbolic.certify_hyperbolic(cfg, rep, tol)
        local = hyperbolic.local_search_hyper(cfg)
        cert.checks["local_not_below_global"] = local.objective >= opt.best_objective - 1e-9
        cert.values["local_objective"] = local.objective
    else:
        raise ValueError(f"unknown space {space!r}")
    cert.checks["existence"] = exist.passed
    cert.values.update(
        best_objective=opt.best_objective,
        best_assignment=opt.best_partition.assignment,
        num_enumerated=opt.num_enumerated,
        existence=exist.to_dict(),
    )
    if not exist.passed:
        cert.violations.extend(exist.violations)
    return cert
