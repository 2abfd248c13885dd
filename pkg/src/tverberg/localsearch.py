"""Single-transposition local search over partitions into transversals.

All three solvers maximize an objective of the form

    sum over parts P, sum over unordered pairs {x, y} in P of w(x, y)

for a symmetric weight ``w`` (squared distance, distance, or minus the
Lorentzian form). A move swaps the two points of one color between two parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TransversalPartition


class SearchLimitError(RuntimeError):
    """Raised when the swap budget runs out before reaching a local optimum."""


@dataclass
class SwapSearchResult:
    partition: TransversalPartition
    objective: float
    swap_count: int
    history: list[float] = field(default_factory=list)
    swaps: list[tuple[int, int, int]] = field(default_factory=list)


def partition_objective(weights: np.ndarray, members: np.ndarray) -> float:
    """Sum of ``weights`` over unordered pairs inside each part (``members`` is ``(k, r)``)."""
    r = members.shape[1]
    iu, ju = np.triu_indices(r, 1)
    return float(weights[members[:, iu], members[:, ju]].sum())


def swap_gains(weights: np.ndarray, members: np.ndarray, color: int) -> np.ndarray:
    """``(k, k)`` matrix of objective changes for swapping ``color`` between parts ``i`` and ``j``.

    ``G[i, t]`` is the total weight between the color point of part ``i`` and
    the other members of part ``t``; the gain of the swap is
    ``G[i, j] + G[j, i] - G[i, i] - G[j, j]``.
    """
    pts = members[:, color]
    block = weights[pts[:, None, None], members[None, :, :]]  # (k, k, r)
    g = block.sum(axis=2) - block[:, :, color]
    diag = np.diag(g)
    return g + g.T - diag[:, None] - diag[None, :]


def swap_search(
    weights: np.ndarray,
    init: TransversalPartition,
    eps: float,
    max_swaps: int = 1_000_000,
) -> SwapSearchResult:
    """First-improvement swap search maximizing :func:`partition_objective`.

    Colors are scanned in ascending order and part pairs ``(i, j)``, ``i < j``,
    lexicographically; a swap is accepted only when it gains more than ``eps``
    and the scan then restarts from color 0.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    assignment = np.array(init.assignment, dtype=np.int64)
    r, k = assignment.shape
    members = (np.arange(r)[:, None] * k + assignment).T.copy()
    iu, ju = np.triu_indices(k, 1)
    objective = partition_objective(weights, members)
    history = [objective]
    swaps: list[tuple[int, int, int]] = []

    improved = True
    while improved:
        improved = False
        for n in range(r):
            gains = swap_gains(weights, members, n)[iu, ju]
            hits = np.flatnonzero(gains > eps)
            if hits.size == 0:
                continue
            if len(swaps) >= max_swaps:
                raise SearchLimitError(f"no local optimum after {max_swaps} swaps")
            h = hits[0]
            i, j = int(iu[h]), int(ju[h])
            members[i, n], members[j, n] = members[j, n], members[i, n]
            assignment[n, i], assignment[n, j] = assignment[n, j], assignment[n, i]
            objective = partition_objective(weights, members)
            history.append(objective)
            swaps.append((n, i, j))
            improved = True
            break

    return SwapSearchResult(
        partition=TransversalPartition(assignment),
        objective=objective,
        swap_count=len(swaps),
        history=history,
        swaps=swaps,
    )
