"""Cabin: categorical vectors to d-bit binary sketches.

Stage one (``bin_em``) replaces each present label ``a`` by ``psi[a]``,
keeping the original dimension.  Stage two (``bin_sketch``) ORs bit ``i``
into bin ``pi[i]``.  ``cabin`` fuses both in one pass over the entries.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from .core import BinaryVector, CategoricalVector, Dataset, packed_size
from .errors import InputError
from .model import SketchModel


class SketchSet:
    """Row-ordered d-bit sketches of a dataset, packed one row per line."""

    def __init__(self, packed: np.ndarray, d: int, seed: Optional[int] = None,
                 n: Optional[int] = None, c: Optional[int] = None):
        packed = np.array(packed, dtype=np.uint8, copy=True)
        if packed.ndim == 1 and packed.size == 0:
            packed = packed.reshape(0, packed_size(d))
        if packed.ndim != 2 or packed.shape[1] != packed_size(d):
            raise InputError(f"packed rows must have {packed_size(d)} bytes for d={d}")
        tail = d % 8
        if tail and packed.shape[0] and np.any(packed[:, -1] >> tail):
            raise InputError("padding bits beyond d must be zero")
        packed.setflags(write=False)
        self.packed = packed
        self.d = int(d)
        self.seed = seed
        self.n = n
        self.c = c

    @classmethod
    def from_rows(cls, rows: Sequence[BinaryVector], d: int, seed=None, n=None, c=None) -> "SketchSet":
        for k, r in enumerate(rows):
            if r.dim != d:
                raise InputError(f"row {k} has dim {r.dim}, expected {d}")
        packed = np.stack([r.packed for r in rows]) if rows else np.zeros((0, packed_size(d)), np.uint8)
        return cls(packed, d, seed=seed, n=n, c=c)

    def __len__(self):
        return self.packed.shape[0]

    def __getitem__(self, k) -> BinaryVector:
        return BinaryVector(self.d, self.packed[k])

    @property
    def rows(self) -> list[BinaryVector]:
        return [self[k] for k in range(len(self))]

    def bits(self) -> np.ndarray:
        """Unpacked ``(rows, d)`` 0/1 matrix."""
        return np.unpackbits(self.packed, axis=1, count=self.d, bitorder="little")

    def weights(self) -> np.ndarray:
        return np.bitwise_count(self.packed).sum(axis=1, dtype=np.int64)

    def __eq__(self, other):
        if not isinstance(other, SketchSet):
            return NotImplemented
        return self.d == other.d and self.seed == other.seed and np.array_equal(self.packed, other.packed)

    def __repr__(self):
        return f"SketchSet(rows={len(self)}, d={self.d}, seed={self.seed})"


def _check_labels(u: CategoricalVector, m: SketchModel):
    if u.dim != m.n:
        raise InputError(f"vector dim {u.dim} does not match model n={m.n}")
    if u.labels.size and u.labels.max() > m.c:
        raise InputError(f"label {int(u.labels.max())} exceeds model category count c={m.c}")


def bin_em(u: CategoricalVector, m: SketchModel) -> BinaryVector:
    """n-bit embedding: bit ``i`` is ``psi[u_i]`` for present attributes, else 0."""
    _check_labels(u, m)
    bits = np.zeros(m.n, dtype=np.uint8)
    bits[u.indices - 1] = m.psi[u.labels]
    return BinaryVector.from_bits(bits)


def bin_sketch(u_prime: BinaryVector, m: SketchModel) -> BinaryVector:
    """OR each set bit ``i`` into bin ``pi[i]``."""
    if u_prime.dim != m.n:
        raise InputError(f"binary vector dim {u_prime.dim} does not match model n={m.n}")
    out = np.zeros(m.d, dtype=np.uint8)
    out[m.pi[np.flatnonzero(u_prime.to_bits())] - 1] = 1
    return BinaryVector.from_bits(out)


def cabin(u: CategoricalVector, m: SketchModel) -> BinaryVector:
    """``bin_sketch(bin_em(u))`` without building the n-bit intermediate."""
    _check_labels(u, m)
    out = np.zeros(m.d, dtype=np.uint8)
    hit = u.indices[m.psi[u.labels] == 1]
    out[m.pi[hit - 1] - 1] = 1
    return BinaryVector.from_bits(out)


def _sketch_block(ds: Dataset, m: SketchModel, start: int, stop: int) -> np.ndarray:
    rows = ds.points[start:stop]
    out = np.zeros((len(rows), m.d), dtype=np.uint8)
    for r, u in enumerate(rows):
        if u.labels.size and u.labels.max() > m.c:
            raise InputError(f"row {start + r}: label {int(u.labels.max())} exceeds model category count c={m.c}")
        hit = u.indices[m.psi[u.labels] == 1]
        out[r, m.pi[hit - 1] - 1] = 1
    return np.packbits(out, axis=1, bitorder="little")


def sketch_dataset(ds: Dataset, m: SketchModel, workers: int = 1, block: int = 256) -> SketchSet:
    """Cabin sketch of every point; row order and bytes do not depend on ``workers``."""
    if ds.dim != m.n:
        raise InputError(f"dataset dim {ds.dim} does not match model n={m.n}")
    bounds = [(s, min(s + block, len(ds))) for s in range(0, len(ds), block)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _sketch_block(ds, m, *b), bounds))
    else:
        parts = [_sketch_block(ds, m, *b) for b in bounds]
    packed = np.concatenate(parts) if parts else np.zeros((0, packed_size(m.d)), np.uint8)
    return SketchSet(packed, m.d, seed=m.seed, n=m.n, c=m.c)
