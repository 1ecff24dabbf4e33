"""Domain types and exact distance primitives.

Positions are 1-based everywhere in the public API.  Packed bit storage is
0-based: position ``p`` lives in byte ``(p - 1) // 8`` at bit ``(p - 1) % 8``
(least significant bit first), which is ``numpy.packbits(..., bitorder="little")``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InputError


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True).reshape(-1)
    out.setflags(write=False)
    return out


class CategoricalVector:
    """Sparse label-encoded vector over ``dim`` attributes.

    ``indices`` are strictly increasing 1-based positions and ``labels`` the
    category (>= 1) stored there; every other attribute is missing (0).
    """

    __slots__ = ("dim", "indices", "labels")

    def __init__(self, dim: int, indices: Iterable[int] = (), labels: Iterable[int] = ()):
        dim = int(dim)
        if dim < 0:
            raise InputError(f"dimension must be non-negative, got {dim}")
        idx = _frozen(list(indices) if not isinstance(indices, np.ndarray) else indices, np.int64)
        lab = _frozen(list(labels) if not isinstance(labels, np.ndarray) else labels, np.int64)
        if idx.shape != lab.shape:
            raise InputError("indices and labels differ in length")
        if idx.size:
            if idx[0] < 1 or idx[-1] > dim:
                raise InputError(f"entry index out of range 1..{dim}")
            if np.any(np.diff(idx) <= 0):
                raise InputError("entry indices must be strictly increasing")
            if np.any(lab < 1):
                raise InputError("entry labels must be >= 1 (0 means missing)")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "labels", lab)

    def __setattr__(self, name, value):
        raise AttributeError("CategoricalVector is immutable")

    @classmethod
    def from_dense(cls, values: Sequence[int]) -> "CategoricalVector":
        arr = np.asarray(values, dtype=np.int64).reshape(-1)
        if np.any(arr < 0):
            raise InputError("dense values must be >= 0")
        nz = np.flatnonzero(arr)
        return cls(arr.size, nz + 1, arr[nz])

    @classmethod
    def from_entries(cls, dim: int, entries: Iterable[tuple[int, int]]) -> "CategoricalVector":
        pairs = sorted((int(i), int(a)) for i, a in entries)
        return cls(dim, [i for i, _ in pairs], [a for _, a in pairs])

    def to_dense(self, dtype=np.int64) -> np.ndarray:
        out = np.zeros(self.dim, dtype=dtype)
        out[self.indices - 1] = self.labels
        return out

    @property
    def density(self) -> int:
        return int(self.indices.size)

    @property
    def max_label(self) -> int:
        return int(self.labels.max()) if self.labels.size else 0

    def entries(self) -> list[tuple[int, int]]:
        return list(zip(self.indices.tolist(), self.labels.tolist()))

    def __eq__(self, other):
        if not isinstance(other, CategoricalVector):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.labels, other.labels)
        )

    def __hash__(self):
        return hash((self.dim, self.indices.tobytes(), self.labels.tobytes()))

    def __repr__(self):
        return f"CategoricalVector(dim={self.dim}, entries={self.entries()!r})"


class BinaryVector:
    """Fixed-length bit vector with packed storage and cached weight."""

    __slots__ = ("dim", "packed", "weight")

    def __init__(self, dim: int, packed: np.ndarray | bytes):
        dim = int(dim)
        if dim < 0:
            raise InputError(f"dimension must be non-negative, got {dim}")
        buf = np.frombuffer(bytes(packed), dtype=np.uint8) if isinstance(packed, (bytes, bytearray)) else packed
        buf = _frozen(buf, np.uint8)
        if buf.size != packed_size(dim):
            raise InputError(f"expected {packed_size(dim)} packed bytes for dim {dim}, got {buf.size}")
        tail = dim % 8
        if tail and buf[-1] >> tail:
            raise InputError("padding bits beyond dim must be zero")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "packed", buf)
        object.__setattr__(self, "weight", int(np.bitwise_count(buf).sum()))

    def __setattr__(self, name, value):
        raise AttributeError("BinaryVector is immutable")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BinaryVector":
        arr = np.asarray(bits).reshape(-1)
        if arr.size and not np.all((arr == 0) | (arr == 1)):
            raise InputError("bits must be 0 or 1")
        return cls(arr.size, np.packbits(arr.astype(np.uint8), bitorder="little"))

    @classmethod
    def from_positions(cls, dim: int, positions: Iterable[int]) -> "BinaryVector":
        bits = np.zeros(int(dim), dtype=np.uint8)
        pos = np.asarray(list(positions), dtype=np.int64)
        if pos.size and (pos.min() < 1 or pos.max() > dim):
            raise InputError(f"bit position out of range 1..{dim}")
        bits[pos - 1] = 1
        return cls.from_bits(bits)

    @classmethod
    def zeros(cls, dim: int) -> "BinaryVector":
        return cls(dim, np.zeros(packed_size(dim), dtype=np.uint8))

    def to_bits(self) -> np.ndarray:
        return np.unpackbits(self.packed, count=self.dim, bitorder="little")

    def positions(self) -> list[int]:
        """1-based positions of the set bits."""
        return (np.flatnonzero(self.to_bits()) + 1).tolist()

    def recount(self) -> int:
        return int(self.to_bits().sum())

    def hex(self) -> str:
        return self.packed.tobytes().hex()

    def __eq__(self, other):
        if not isinstance(other, BinaryVector):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.packed, other.packed)

    def __hash__(self):
        return hash((self.dim, self.packed.tobytes()))

    def __repr__(self):
        return f"BinaryVector({''.join(map(str, self.to_bits().tolist()))})"


def packed_size(dim: int) -> int:
    return (int(dim) + 7) // 8


class Dataset:
    """A named collection of categorical points sharing one dimension."""

    def __init__(self, points: Sequence[CategoricalVector], dim: int | None = None,
                 categories: int | None = None, name: str = ""):
        points = tuple(points)
        if dim is None:
            if not points:
                dim = 0
            else:
                dim = points[0].dim
        for k, p in enumerate(points):
            if p.dim != dim:
                raise InputError(f"point {k} has dim {p.dim}, dataset dim is {dim}")
        observed = max((p.max_label for p in points), default=0)
        if categories is None:
            categories = observed
        elif categories < observed:
            raise InputError(f"label {observed} exceeds declared category count {categories}")
        self.name = name
        self.dim = int(dim)
        self.points = points
        self.categories = int(categories)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, k):
        return self.points[k]

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.dim, self.categories, self.points) == (other.dim, other.categories, other.points)

    def __repr__(self):
        return f"Dataset(name={self.name!r}, points={len(self)}, dim={self.dim}, categories={self.categories})"

    @property
    def density(self) -> int:
        """Largest point density, the dataset's density bound."""
        return max((p.density for p in self.points), default=0)

    def subset(self, rows: Iterable[int], name: str | None = None) -> "Dataset":
        return Dataset([self.points[r] for r in rows], dim=self.dim, categories=self.categories,
                       name=self.name if name is None else name)

    def to_csr(self) -> sp.csr_matrix:
        """Points as a CSR matrix of labels, 0-based columns."""
        indptr = np.zeros(len(self) + 1, dtype=np.int64)
        np.cumsum([p.density for p in self.points], out=indptr[1:])
        cols = np.concatenate([p.indices - 1 for p in self.points]) if self.points else np.zeros(0, np.int64)
        vals = np.concatenate([p.labels for p in self.points]) if self.points else np.zeros(0, np.int64)
        return sp.csr_matrix((vals, cols, indptr), shape=(len(self), self.dim))

    def to_dense(self, dtype=None) -> np.ndarray:
        if dtype is None:
            dtype = np.uint8 if self.categories < 256 else np.uint16 if self.categories < 65536 else np.int64
        out = np.zeros((len(self), self.dim), dtype=dtype)
        for r, p in enumerate(self.points):
            out[r, p.indices - 1] = p.labels
        return out


def density(u: CategoricalVector) -> int:
    return u.density


def hamming_distance(u: CategoricalVector, v: CategoricalVector) -> int:
    """Number of attributes where ``u`` and ``v`` differ; missing counts as a value."""
    if u.dim != v.dim:
        raise InputError(f"dimension mismatch: {u.dim} vs {v.dim}")
    shared, iu, iv = np.intersect1d(u.indices, v.indices, assume_unique=True, return_indices=True)
    agree = int(np.count_nonzero(u.labels[iu] == v.labels[iv]))
    return u.density + v.density - shared.size - agree


def sketch_inner_product(a: BinaryVector, b: BinaryVector) -> int:
    """Number of positions set in both ``a`` and ``b``."""
    if a.dim != b.dim:
        raise InputError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return int(np.bitwise_count(a.packed & b.packed).sum())


def binary_hamming(a: BinaryVector, b: BinaryVector) -> int:
    if a.dim != b.dim:
        raise InputError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return int(np.bitwise_count(a.packed ^ b.packed).sum())


def _gram(m: sp.csr_matrix) -> np.ndarray:
    """Exact integer ``m @ m.T`` for a 0/1 matrix, dense or sparse route by fill."""
    rows, cols = m.shape
    if rows == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if m.nnz > 0.05 * rows * cols and rows * cols <= 50_000_000:
        dense = m.toarray().astype(np.float64)
        return np.rint(dense @ dense.T).astype(np.int64)
    return np.asarray((m @ m.T).toarray(), dtype=np.int64)


def pairwise_hamming_matrix(values: sp.spmatrix | np.ndarray) -> np.ndarray:
    """All-pairs Hamming distances between the rows of an integer matrix.

    Uses ``HD = |supp u| + |supp v| - |supp u & supp v| - #{equal nonzero}``
    with both intersections computed as sparse Gram products, so the cost
    scales with the nonzeros rather than the row length.
    """
    m = sp.csr_matrix(values, dtype=np.int64)
    m.eliminate_zeros()
    m.sort_indices()
    n_rows, n_cols = m.shape
    support = sp.csr_matrix((np.ones(m.nnz, dtype=np.int32), m.indices, m.indptr), shape=m.shape)
    weights = np.diff(m.indptr).astype(np.int64)
    overlap = _gram(support)
    # one column per (attribute, value); values may be negative
    vals = m.data
    _, codes = np.unique(vals, return_inverse=True)
    n_codes = int(codes.max()) + 1 if codes.size else 1
    keys = m.indices.astype(np.int64) * n_codes + codes
    _, key_cols = np.unique(keys, return_inverse=True)
    onehot = sp.csr_matrix((np.ones(m.nnz, dtype=np.int32), key_cols.reshape(-1), m.indptr),
                           shape=(n_rows, int(key_cols.max()) + 1 if key_cols.size else 1))
    agree = _gram(onehot)
    out = weights[:, None] + weights[None, :] - overlap - agree
    np.fill_diagonal(out, 0)
    return out


def pairwise_hamming(ds: Dataset) -> np.ndarray:
    """Exact all-pairs Hamming distance matrix of a dataset."""
    return pairwise_hamming_matrix(ds.to_csr())


def pairwise_hamming_dense(dense: np.ndarray) -> np.ndarray:
    """All-pairs Hamming distances by direct comparison of full-length rows.

    This is the straightforward full-dimensional computation (one
    ``count_nonzero(u != v)`` per pair, vectorised per row); its cost grows
    with the row length.
    """
    n = dense.shape[0]
    out = np.zeros((n, n), dtype=np.int64)
    for i in range(n - 1):
        row = np.count_nonzero(dense[i + 1:] != dense[i], axis=1)
        out[i, i + 1:] = row
        out[i + 1:, i] = row
    return out
