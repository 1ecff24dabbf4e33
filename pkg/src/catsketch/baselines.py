"""Discrete baseline sketches: Feature Hashing, SimHash and Hamming-LSH.

All three read a Hamming estimate off their sketches the same way: the
number of disagreeing sketch coordinates scaled by ``n / d``.  For H-LSH this
is the classical unbiased estimator; for FH and SH it is a uniform rule
that puts every method on the same footing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import _hashing
from .core import CategoricalVector, Dataset, pairwise_hamming_matrix
from .errors import InputError

METHODS = ("FH", "SH", "HLSH")


@dataclass(frozen=True, eq=False)
class BaselineSketch:
    method: str
    d: int
    n: int
    payload: np.ndarray
    indices: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown baseline method {self.method!r}")
        if self.payload.shape != (self.d,):
            raise InputError(f"payload length {self.payload.size} differs from d={self.d}")
        if (self.method == "HLSH") != (self.indices is not None):
            raise InputError("sampled indices are carried by HLSH sketches only")

    def __eq__(self, other):
        if not isinstance(other, BaselineSketch):
            return NotImplemented
        same_idx = (self.indices is None and other.indices is None) or (
            self.indices is not None and other.indices is not None
            and np.array_equal(self.indices, other.indices))
        return ((self.method, self.d, self.n) == (other.method, other.d, other.n)
                and np.array_equal(self.payload, other.payload) and same_idx)


def _check_d(d):
    if d < 1:
        raise InputError(f"sketch dimension must be >= 1, got {d}")


def fh_tables(indices, d: int, seed: int):
    """Bucket (1..d) and sign (+1/-1) for each 1-based attribute index."""
    idx = np.asarray(indices, dtype=np.int64) - 1
    buckets = _hashing.uniform_ints(seed, _hashing.FH_BUCKET, idx, d)
    signs = 1 - 2 * _hashing.bits(seed, _hashing.FH_SIGN, idx).astype(np.int64)
    return buckets, signs


def feature_hash_payload(u: CategoricalVector, buckets, signs, d: int) -> np.ndarray:
    """Bucket sums of ``sign * label``; ``buckets``/``signs`` align with ``u``'s entries."""
    out = np.zeros(d, dtype=np.int64)
    np.add.at(out, np.asarray(buckets, dtype=np.int64) - 1, np.asarray(signs, dtype=np.int64) * u.labels)
    return out


def feature_hash_sketch(u: CategoricalVector, d: int, seed: int) -> BaselineSketch:
    _check_d(d)
    buckets, signs = fh_tables(u.indices, d, seed)
    return BaselineSketch("FH", d, u.dim, feature_hash_payload(u, buckets, signs, d))


def rademacher(indices, d: int, seed: int) -> np.ndarray:
    """``(len(indices), d)`` matrix of +1/-1, row ``r`` holding ``r_j(indices[r])``."""
    idx = np.asarray(indices, dtype=np.int64) - 1
    counters = idx[:, None] * d + np.arange(d, dtype=np.int64)[None, :]
    return 1 - 2 * _hashing.bits(seed, _hashing.SIMHASH, counters).astype(np.int8)


def simhash_payload(u: CategoricalVector, signs: np.ndarray) -> np.ndarray:
    """Bit ``j`` is 1 iff ``sum_i signs[i, j] * u_i > 0`` (a zero sum gives 0)."""
    sums = u.labels @ signs.astype(np.int64) if u.density else np.zeros(signs.shape[1], np.int64)
    return (sums > 0).astype(np.int64)


def simhash_sketch(u: CategoricalVector, d: int, seed: int) -> BaselineSketch:
    _check_d(d)
    return BaselineSketch("SH", d, u.dim, simhash_payload(u, rademacher(u.indices, d, seed)))


@lru_cache(maxsize=16)
def _hlsh_indices(n: int, d: int, seed: int) -> np.ndarray:
    keys = _hashing.draws(seed, _hashing.HLSH, np.arange(n))
    order = np.argsort(keys, kind="stable")[:d] + 1
    order.setflags(write=False)
    return order


def hlsh_indices(n: int, d: int, seed: int) -> np.ndarray:
    """Uniform sample of ``d`` distinct 1-based coordinates, in a seed-derived random order."""
    if not 1 <= d <= n:
        raise InputError(f"H-LSH needs 1 <= d <= n, got d={d}, n={n}")
    return _hlsh_indices(int(n), int(d), _hashing.check_seed(seed))


def hlsh_restrict(u: CategoricalVector, indices) -> np.ndarray:
    """Labels of ``u`` at the given 1-based coordinates (0 where missing)."""
    indices = np.asarray(indices, dtype=np.int64)
    pos = np.searchsorted(u.indices, indices)
    pos_c = np.minimum(pos, max(u.density - 1, 0))
    hit = (pos < u.density) & (u.indices[pos_c] == indices) if u.density else np.zeros(indices.size, bool)
    out = np.zeros(indices.size, dtype=np.int64)
    out[hit] = u.labels[pos_c[hit]]
    return out


def hlsh_sketch(u: CategoricalVector, d: int, seed: int) -> BaselineSketch:
    idx = hlsh_indices(u.dim, d, seed)
    return BaselineSketch("HLSH", d, u.dim, hlsh_restrict(u, idx), indices=idx)


def baseline_sketch(method: str, u: CategoricalVector, d: int, seed: int) -> BaselineSketch:
    try:
        fn = {"FH": feature_hash_sketch, "SH": simhash_sketch, "HLSH": hlsh_sketch}[method]
    except KeyError:
        raise InputError(f"unknown baseline method {method!r}") from None
    return fn(u, d, seed)


def baseline_estimate_hamming(a: BaselineSketch, b: BaselineSketch) -> float:
    """Disagreeing payload coordinates times ``n / d``."""
    if a.method != b.method:
        raise InputError(f"method mismatch: {a.method} vs {b.method}")
    if (a.d, a.n) != (b.d, b.n):
        raise InputError(f"shape mismatch: (d={a.d}, n={a.n}) vs (d={b.d}, n={b.n})")
    if a.indices is not None and not np.array_equal(a.indices, b.indices):
        raise InputError("H-LSH sketches were drawn with different index samples")
    return int(np.count_nonzero(a.payload != b.payload)) * a.n / a.d


class BaselineSet:
    """Baseline sketches of a whole dataset: a ``(rows, d)`` payload matrix."""

    def __init__(self, method: str, payload: np.ndarray, n: int, seed: Optional[int] = None,
                 indices: Optional[np.ndarray] = None):
        if method not in METHODS:
            raise InputError(f"unknown baseline method {method!r}")
        payload = np.array(payload, dtype=np.int64, copy=True)
        if payload.ndim != 2:
            raise InputError("payload must be a 2-D matrix")
        if (method == "HLSH") != (indices is not None):
            raise InputError("sampled indices are carried by HLSH sketches only")
        if indices is not None:
            indices = np.array(indices, dtype=np.int64, copy=True)
            if indices.shape != (payload.shape[1],):
                raise InputError("index list length differs from d")
            indices.setflags(write=False)
        if method == "SH" and payload.size and not np.all((payload == 0) | (payload == 1)):
            raise InputError("SH payloads must be bits")
        payload.setflags(write=False)
        self.method = method
        self.payload = payload
        self.d = payload.shape[1]
        self.n = int(n)
        self.seed = seed
        self.indices = indices

    def __len__(self):
        return self.payload.shape[0]

    def __getitem__(self, k) -> BaselineSketch:
        return BaselineSketch(self.method, self.d, self.n, self.payload[k].copy(), self.indices)

    def __eq__(self, other):
        if not isinstance(other, BaselineSet):
            return NotImplemented
        return ((self.method, self.d, self.n, self.seed) == (other.method, other.d, other.n, other.seed)
                and np.array_equal(self.payload, other.payload)
                and (self.indices is None) == (other.indices is None)
                and (self.indices is None or np.array_equal(self.indices, other.indices)))


def sketch_dataset_baseline(ds: Dataset, method: str, d: int, seed: int, chunk: int = 2048) -> BaselineSet:
    """Sketch every point with one baseline; tables are shared across rows."""
    _check_d(d)
    x = ds.to_csr()
    rows = len(ds)
    if method == "FH":
        buckets, signs = fh_tables(np.arange(1, ds.dim + 1), d, seed)
        payload = np.zeros((rows, d), dtype=np.int64)
        r = np.repeat(np.arange(rows), np.diff(x.indptr))
        np.add.at(payload, (r, buckets[x.indices] - 1), signs[x.indices] * x.data)
        return BaselineSet("FH", payload, ds.dim, seed)
    if method == "SH":
        used = np.unique(x.indices)
        sums = np.zeros((rows, d), dtype=np.int64)
        for lo in range(0, used.size, chunk):
            cols = used[lo:lo + chunk]
            block = x[:, cols]
            if block.nnz:
                sums += np.asarray(block @ rademacher(cols + 1, d, seed).astype(np.int64), dtype=np.int64)
        return BaselineSet("SH", (sums > 0).astype(np.int64), ds.dim, seed)
    if method == "HLSH":
        idx = hlsh_indices(ds.dim, d, seed)
        payload = np.asarray(x[:, idx - 1].todense(), dtype=np.int64).reshape(rows, d)
        return BaselineSet("HLSH", payload, ds.dim, seed, indices=idx)
    raise InputError(f"unknown baseline method {method!r}")


def baseline_pairwise(bs: BaselineSet) -> np.ndarray:
    """All-pairs scaled payload Hamming distances."""
    return pairwise_hamming_matrix(bs.payload) * (bs.n / bs.d)


def baseline_pair_estimates(bs: BaselineSet, left, right, chunk: int = 65536) -> np.ndarray:
    left = np.asarray(left, dtype=np.int64)
    right = np.asarray(right, dtype=np.int64)
    out = np.empty(left.size, dtype=np.float64)
    for lo in range(0, left.size, chunk):
        i, j = left[lo:lo + chunk], right[lo:lo + chunk]
        out[lo:lo + chunk] = np.count_nonzero(bs.payload[i] != bs.payload[j], axis=1) * (bs.n / bs.d)
    return out
