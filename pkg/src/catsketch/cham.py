"""Hamming distance estimation from Cabin sketches.

An OR-sketch of a binary vector with ``a`` ones into ``d`` bins leaves, in
expectation, ``d * D**a`` bins empty, with ``D = 1 - 1/d``.  Inverting that
count gives a cardinality estimate; applying the same inverse to the bins
empty in *both* sketches estimates the size of the union.  The binary
Hamming distance is then ``2 * union - a - b`` and, because the first stage
halves Hamming distances in expectation, Cham doubles it.

Log arguments are floored at half a bin (``zeros >= 1/2``) so full sketches
give a finite, flagged value instead of infinity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cabin import SketchSet
from .core import BinaryVector, sketch_inner_product
from .errors import InputError
from .model import SketchModel

ZERO_FLOOR = 0.5


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    saturated: bool = False

    def __float__(self):
        return self.value


def _count_from_zeros(zeros, d):
    """Invert ``E[zeros] = d * (1 - 1/d)**a`` for ``a``; returns (estimate, clamped)."""
    zeros = np.asarray(zeros, dtype=np.float64)
    clamped = zeros < ZERO_FLOOR
    z = np.maximum(zeros, ZERO_FLOOR)
    return np.log1p((z - d) / d) / np.log1p(-1.0 / d), clamped


def _check_d(d):
    if d < 2:
        raise InputError(f"sketch dimension must be >= 2 for estimation, got {d}")


def estimate_cardinality(w, d: int) -> float:
    """Number of ones before sketching, estimated from ``w`` set bins out of ``d``."""
    _check_d(d)
    if not 0 <= w <= d:
        raise InputError(f"sketch weight {w} outside 0..{d}")
    value, _ = _count_from_zeros(d - w, d)
    return float(value)


def hamming_from_stats(w_u, w_v, inner, d: int) -> DistanceEstimate:
    """Binary Hamming estimate from sketch weights and their inner product.

    Inputs may be non-integer (expected values), which is how the estimator
    is checked for exactness.
    """
    _check_d(d)
    z00 = d - w_u - w_v + inner
    eps = 1e-9 * d
    if not (0 <= w_u <= d and 0 <= w_v <= d and -eps <= inner <= min(w_u, w_v) + eps and z00 >= -eps):
        raise InputError(f"inconsistent sketch statistics w_u={w_u}, w_v={w_v}, inner={inner}, d={d}")
    a, sat_a = _count_from_zeros(d - w_u, d)
    b, sat_b = _count_from_zeros(d - w_v, d)
    union, sat_u = _count_from_zeros(z00, d)
    value = max(0.0, float(2 * union - (a + b)))
    return DistanceEstimate(value, bool(sat_a or sat_b or sat_u))


def estimate_binary_hamming(u_s: BinaryVector, v_s: BinaryVector, d: int) -> DistanceEstimate:
    """Estimate ``HD(u', v')`` of the pre-sketch binary vectors."""
    if u_s.dim != d or v_s.dim != d:
        raise InputError(f"sketch dims {u_s.dim}, {v_s.dim} do not match d={d}")
    return hamming_from_stats(u_s.weight, v_s.weight, sketch_inner_product(u_s, v_s), d)


def cham(u_s: BinaryVector, v_s: BinaryVector, m: SketchModel) -> DistanceEstimate:
    """Estimate the categorical Hamming distance ``HD(u, v)`` from two sketches."""
    est = estimate_binary_hamming(u_s, v_s, m.d)
    return DistanceEstimate(2 * est.value, est.saturated)


def cham_values(w_u, w_v, inner, d: int):
    """Vectorised Cham over arrays of sketch statistics; returns (values, saturated)."""
    w_u = np.asarray(w_u, dtype=np.float64)
    w_v = np.asarray(w_v, dtype=np.float64)
    inner = np.asarray(inner, dtype=np.float64)
    a, sa = _count_from_zeros(d - w_u, d)
    b, sb = _count_from_zeros(d - w_v, d)
    union, su = _count_from_zeros(d - w_u - w_v + inner, d)
    return 2 * np.maximum(0.0, 2 * union - (a + b)), sa | sb | su


def pair_estimates(s: SketchSet, left, right, chunk: int = 65536) -> np.ndarray:
    """Cham estimates for the row pairs ``(left[k], right[k])``."""
    _check_d(s.d)
    left = np.asarray(left, dtype=np.int64)
    right = np.asarray(right, dtype=np.int64)
    weights = s.weights()
    out = np.empty(left.size, dtype=np.float64)
    for lo in range(0, left.size, chunk):
        i, j = left[lo:lo + chunk], right[lo:lo + chunk]
        inner = np.bitwise_count(s.packed[i] & s.packed[j]).sum(axis=1, dtype=np.int64)
        out[lo:lo + chunk], _ = cham_values(weights[i], weights[j], inner, s.d)
    return out


def pairwise_estimates(s: SketchSet, block: int = 1024) -> np.ndarray:
    """Symmetric matrix of Cham estimates with a zero diagonal.

    Inner products come from a float matrix product of the unpacked bits,
    which is exact for ``d < 2**24``; each unordered pair is evaluated once
    and mirrored.
    """
    n = len(s)
    if n == 0:
        raise InputError("pairwise estimates need at least one sketch")
    _check_d(s.d)
    bits = s.bits().astype(np.float32)
    weights = s.weights()
    out = np.zeros((n, n), dtype=np.float64)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        inner = np.rint(bits[lo:hi] @ bits[lo:].T).astype(np.int64)
        vals, _ = cham_values(weights[lo:hi, None], weights[None, lo:], inner, s.d)
        out[lo:hi, lo:] = vals
    upper = np.triu(out, k=1)
    return upper + upper.T
