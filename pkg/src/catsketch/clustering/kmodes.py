"""k-modes clustering in Hamming space.

Works on any integer matrix (rows are points): full categorical data or
unpacked sketch bits.  Ties are pinned for reproducibility: a point joins
the lowest-numbered nearest mode, and a mode attribute takes the smallest
most-frequent value (0 competes like any other value).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..cabin import SketchSet
from ..core import Dataset
from ..errors import InputError


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """Cluster ids in ``1..k`` per point, plus the modes and cost that produced them."""

    labels: np.ndarray
    k: int
    cost: int = 0
    modes: np.ndarray | None = None
    history: tuple = field(default=())
    iterations: int = 0

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if labels.size and (labels.min() < 1 or labels.max() > self.k):
            raise InputError(f"cluster ids must lie in 1..{self.k}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, labels) -> "ClusterAssignment":
        """Wrap arbitrary labels, renumbering them ``1..k`` in order of first appearance."""
        labels = np.asarray(labels).reshape(-1)
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(1, first.size + 1)
        return cls(rank[inverse.reshape(-1)] if labels.size else labels.astype(np.int64), int(first.size))

    def __len__(self):
        return self.labels.size


def as_matrix(data) -> np.ndarray:
    """Dense point matrix for a Dataset, SketchSet or array."""
    if isinstance(data, Dataset):
        return data.to_dense()
    if isinstance(data, SketchSet):
        return data.bits()
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise InputError("expected a 2-D point matrix")
    return arr


def _distances(x: np.ndarray, modes: np.ndarray, workers: int = 1, chunk: int = 4096) -> np.ndarray:
    def block(lo):
        part = x[lo:lo + chunk]
        return np.stack([np.count_nonzero(part != m, axis=1) for m in modes], axis=1)

    starts = range(0, x.shape[0], chunk)
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, starts))
    else:
        parts = [block(lo) for lo in starts]
    return np.concatenate(parts).astype(np.int64)


def compute_mode(members: np.ndarray) -> np.ndarray:
    """Attribute-wise most frequent value; ties go to the smallest value."""
    values = np.unique(members)
    if values.size == 1:
        return np.full(members.shape[1], values[0], dtype=members.dtype)
    counts = np.stack([np.count_nonzero(members == v, axis=0) for v in values])
    return values[np.argmax(counts, axis=0)].astype(members.dtype)


def _init_modes(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k distinct starting points by D^1 (Hamming) weighted sampling."""
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    nearest = np.count_nonzero(x != x[chosen[0]], axis=1).astype(np.float64)
    while len(chosen) < k:
        weights = nearest.copy()
        weights[chosen] = 0.0
        total = weights.sum()
        if total > 0:
            pick = int(rng.choice(n, p=weights / total))
        else:
            # fewer distinct points than k: fall back to an unused duplicate
            rest = np.setdiff1d(np.arange(n), chosen)
            pick = int(rng.choice(rest))
        chosen.append(pick)
        nearest = np.minimum(nearest, np.count_nonzero(x != x[pick], axis=1))
    return x[chosen].copy()


def _run(x, k, rng, max_iter, workers):
    modes = _init_modes(x, k, rng)
    labels = None
    history = []
    iterations = 0
    for iterations in range(1, max_iter + 1):
        dist = _distances(x, modes, workers)
        new = np.argmin(dist, axis=1)
        point_cost = dist[np.arange(x.shape[0]), new]
        for j in range(k):
            if not np.any(new == j):
                # reseed with the point farthest from its mode (lowest index on ties)
                donor_ok = np.bincount(new, minlength=k)[new] > 1
                far = int(np.argmax(np.where(donor_ok, point_cost, -1)))
                new[far] = j
                point_cost[far] = 0
                modes[j] = x[far]
        for j in range(k):
            modes[j] = compute_mode(x[new == j])
        cost = int(np.count_nonzero(x != modes[new], axis=1).sum())
        history.append(cost)
        if labels is not None and np.array_equal(new, labels):
            labels = new
            break
        labels = new
    return labels, modes, history, iterations


def kmodes(data, k: int, seed: int = 0, max_iter: int = 100, n_init: int = 1,
           workers: int = 1) -> ClusterAssignment:
    """Cluster the rows of ``data`` into ``k`` groups.

    With ``n_init > 1`` the run with the lowest final cost is kept (earliest
    run on ties).  Output does not depend on ``workers``.
    """
    x = as_matrix(data)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"k must lie in 1..{n}, got {k}")
    if max_iter < 1 or n_init < 1:
        raise InputError("max_iter and n_init must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        labels, modes, history, iterations = _run(x, k, rng, max_iter, workers)
        if best is None or history[-1] < best[2][-1]:
            best = (labels, modes, history, iterations)
    labels, modes, history, iterations = best
    return ClusterAssignment(labels + 1, k, cost=history[-1], modes=modes,
                             history=tuple(history), iterations=iterations)


def clustering_cost(data, assignment: ClusterAssignment) -> int:
    """Sum of Hamming distances from each point to its cluster's mode."""
    x = as_matrix(data)
    total = 0
    for j in range(1, assignment.k + 1):
        members = x[assignment.labels == j]
        if members.shape[0]:
            total += int(np.count_nonzero(members != compute_mode(members)))
    return total
