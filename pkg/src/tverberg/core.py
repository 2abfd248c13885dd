"""Points, colored configurations, transversal partitions and norms.

Points are plain 1-d float arrays. A configuration stores its points as a
read-only array of shape ``(r, k, d)``: color ``j``, index ``a`` within the
color, coordinate ``t``. A partition stores an ``(r, k)`` integer matrix whose
entry ``(j, i)`` is the index within color ``j`` of the point placed in part
``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np

DEFAULT_TOL = 1e-9

EUCLIDEAN = "euclidean"
HYPERBOLOID = "hyperboloid"


class ConfigError(ValueError):
    """Raised for malformed configurations, partitions or norms."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def as_point(x: Any) -> np.ndarray:
    """Convert ``x`` to a finite 1-d float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError(f"a point must be a non-empty 1-d sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError("point coordinates must be finite")
    return arr


def as_points(points: Any) -> np.ndarray:
    """Convert a sequence of points to an ``(n, d)`` finite float array."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1 and arr.size == 0:
        raise ConfigError("empty point set")
    if arr.ndim != 2:
        raise ConfigError(f"points must form an (n, d) array, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ConfigError("empty point set")
    if not np.all(np.isfinite(arr)):
        raise ConfigError("point coordinates must be finite")
    return arr


@dataclass(frozen=True)
class NormKind:
    """An l_p norm, ``p`` in ``[1, inf]``. ``p = inf`` is the maximum norm."""

    p: float = 2.0

    def __post_init__(self) -> None:
        p = float(self.p)
        if math.isnan(p) or p < 1.0:
            raise ConfigError(f"l_p norm needs p >= 1, got {self.p}")
        object.__setattr__(self, "p", p)

    @classmethod
    def lp(cls, p: float) -> "NormKind":
        return cls(p)

    @classmethod
    def l2(cls) -> "NormKind":
        return cls(2.0)

    @classmethod
    def linf(cls) -> "NormKind":
        return cls(math.inf)

    @classmethod
    def parse(cls, text: str) -> "NormKind":
        """Parse ``"l2"``, ``"l1"``, ``"linf"``, ``"l1.5"`` or a bare number."""
        s = str(text).strip().lower()
        if s in ("linf", "l_inf", "inf", "max"):
            return cls.linf()
        if s.startswith("l"):
            s = s[1:].lstrip("_")
        try:
            return cls(float(s))
        except ValueError as exc:
            raise ConfigError(f"cannot parse norm {text!r}") from exc

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.p)

    @property
    def is_euclidean(self) -> bool:
        return self.p == 2.0

    def __call__(self, v: np.ndarray, axis: int = -1) -> np.ndarray:
        return np.linalg.norm(v, ord=self.p, axis=axis)

    def __str__(self) -> str:
        if self.is_inf:
            return "linf"
        return f"l{self.p:g}"


L2 = NormKind.l2()
LINF = NormKind.linf()


def norm_dist(x: Any, y: Any, norm: NormKind = L2) -> float:
    x, y = as_point(x), as_point(y)
    if x.shape != y.shape:
        raise ConfigError(f"dimension mismatch: {x.size} vs {y.size}")
    return float(norm(x - y))


def pairwise_dist(a: np.ndarray, b: np.ndarray, norm: NormKind = L2) -> np.ndarray:
    """Matrix of ``norm(a[s] - b[t])``."""
    return norm(a[:, None, :] - b[None, :, :])


def centroid(points: Any) -> np.ndarray:
    return as_points(points).mean(axis=0)


def set_diameter(points: Any, norm: NormKind = L2) -> float:
    pts = as_points(points)
    if len(pts) == 1:
        return 0.0
    return float(pairwise_dist(pts, pts, norm).max())


@dataclass(frozen=True)
class Ball:
    """Ball with ``center`` and ``radius`` in a normed or hyperbolic geometry."""

    center: np.ndarray
    radius: float
    geometry: Union[NormKind, str] = L2

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _frozen(as_point(self.center)))
        if not (self.radius >= 0.0 and math.isfinite(self.radius)):
            raise ConfigError(f"ball radius must be finite and >= 0, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "radius": self.radius, "geometry": str(self.geometry)}


@dataclass(frozen=True)
class ColoredConfig:
    """``r`` color classes of ``k`` points each, stored as an ``(r, k, d)`` array.

    Points of different colors must differ; repeated points inside one color
    are allowed. With ``model="hyperboloid"`` each row is a point
    ``(x0, x1, ..., xd)`` of the hyperboloid sheet ``-x0^2 + |x|^2 = -1``.
    """

    points: np.ndarray
    model: str = EUCLIDEAN

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 3:
            raise ConfigError(f"colors must form an (r, k, d) array, got shape {pts.shape}")
        r, k, d = pts.shape
        if r < 2:
            raise ConfigError(f"need at least 2 colors, got r={r}")
        if k < 2:
            raise ConfigError(f"need at least 2 points per color, got k={k}")
        if d < 1:
            raise ConfigError("ambient dimension must be >= 1")
        if not np.all(np.isfinite(pts)):
            raise ConfigError("point coordinates must be finite")
        if self.model not in (EUCLIDEAN, HYPERBOLOID):
            raise ConfigError(f"unknown model {self.model!r}")
        flat = pts.reshape(r * k, d)
        owner = np.repeat(np.arange(r), k)
        _, first, inverse = np.unique(flat, axis=0, return_index=True, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        if np.any(owner[first[inverse]] != owner):
            raise ConfigError("color classes must be pairwise disjoint")
        if self.model == HYPERBOLOID:
            if d < 2:
                raise ConfigError("hyperboloid points need at least 2 coordinates")
            q = -pts[..., 0] ** 2 + np.sum(pts[..., 1:] ** 2, axis=-1)
            if np.any(pts[..., 0] <= 0) or np.any(np.abs(q + 1.0) > 1e-9 * np.maximum(1.0, pts[..., 0] ** 2)):
                raise ConfigError("hyperboloid points must satisfy q(x) = -1 and x0 > 0")
        object.__setattr__(self, "points", _frozen(pts))

    @classmethod
    def from_colors(cls, colors: Sequence[Sequence[Sequence[float]]], model: str = EUCLIDEAN) -> "ColoredConfig":
        try:
            arr = np.array(colors, dtype=float)
        except ValueError as exc:
            raise ConfigError("every color must hold the same number of equal-length points") from exc
        return cls(arr, model=model)

    @property
    def r(self) -> int:
        return self.points.shape[0]

    @property
    def k(self) -> int:
        return self.points.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[2]

    @property
    def dim(self) -> int:
        """Euclidean dimension, or hyperbolic dimension for hyperboloid configs."""
        return self.ambient_dim - 1 if self.model == HYPERBOLOID else self.ambient_dim

    @property
    def colors(self) -> np.ndarray:
        return self.points

    def flat(self) -> np.ndarray:
        """All points as ``(r*k, d)``; point ``(j, a)`` sits at row ``j*k + a``."""
        return self.points.reshape(self.r * self.k, self.ambient_dim)


@dataclass(frozen=True)
class TransversalPartition:
    """Rows are permutations; column ``i`` lists the members of part ``i``."""

    assignment: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.assignment)
        if a.ndim != 2 or a.shape[1] == 0:
            raise ConfigError(f"assignment must be an (r, k) matrix, got shape {a.shape}")
        if not np.issubdtype(a.dtype, np.integer):
            if not np.all(np.equal(np.mod(a, 1), 0)):
                raise ConfigError("assignment entries must be integers")
        a = a.astype(np.int64)
        k = a.shape[1]
        expected = np.arange(k)
        for j, row in enumerate(a):
            if not np.array_equal(np.sort(row), expected):
                raise ConfigError(f"row {j} of the assignment is not a permutation of 0..{k - 1}")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @classmethod
    def identity(cls, r: int, k: int) -> "TransversalPartition":
        return cls(np.tile(np.arange(k), (r, 1)))

    @classmethod
    def random(cls, r: int, k: int, rng: np.random.Generator) -> "TransversalPartition":
        return cls(np.array([rng.permutation(k) for _ in range(r)]))

    @property
    def r(self) -> int:
        return self.assignment.shape[0]

    @property
    def k(self) -> int:
        return self.assignment.shape[1]

    def member_ids(self) -> np.ndarray:
        """``(k, r)`` matrix of flat point ids (``j*k + index``) per part and color."""
        r, k = self.assignment.shape
        return (np.arange(r)[:, None] * k + self.assignment).T

    def swapped(self, color: int, i: int, j: int) -> "TransversalPartition":
        a = self.assignment.copy()
        a[color, i], a[color, j] = a[color, j], a[color, i]
        return TransversalPartition(a)

    def canonical(self) -> "TransversalPartition":
        """Relabel parts so that color 0 uses the identity assignment."""
        order = np.argsort(self.assignment[0])
        return TransversalPartition(self.assignment[:, order])

    def to_dict(self) -> dict:
        return {"assignment": self.assignment.tolist()}


def check_partition(cfg: ColoredConfig, partition: TransversalPartition) -> None:
    if partition.assignment.shape != (cfg.r, cfg.k):
        raise ConfigError(
            f"partition shape {partition.assignment.shape} does not match config (r={cfg.r}, k={cfg.k})"
        )


def parts_of(cfg: ColoredConfig, partition: TransversalPartition) -> np.ndarray:
    """Return the parts as a ``(k, r, d)`` array; ``[i, j]`` is the color-``j`` point of part ``i``."""
    check_partition(cfg, partition)
    return cfg.flat()[partition.member_ids()]


def inter_color_diameter(cfg: ColoredConfig, norm: NormKind = L2) -> float:
    """Largest distance between two points of different colors."""
    best = 0.0
    for a in range(cfg.r):
        for b in range(a + 1, cfg.r):
            best = max(best, float(pairwise_dist(cfg.points[a], cfg.points[b], norm).max()))
    return best


@dataclass
class Certificate:
    """Outcome of a machine check: named boolean checks, reported values, violations."""

    name: str
    checks: dict[str, bool] = field(default_factory=dict)
    values: dict[str, Any] = field(default_factory=dict)
    violations: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": dict(self.checks),
            "values": _jsonable(self.values),
            "violations": _jsonable(self.violations),
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [name for name, ok in self.checks.items() if not ok]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        return f"{self.name}: {status}{tail}"


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, NormKind):
        return str(obj)
    return obj
