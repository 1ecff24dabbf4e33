"""External clustering-quality metrics over a contingency table.

``truth`` plays the role of the reference partition and ``pred`` of the
partition under test.  Both may be :class:`ClusterAssignment` objects or
plain label sequences of equal length.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InputError


def _labels(x):
    return np.asarray(getattr(x, "labels", x)).reshape(-1)


def contingency(truth, pred) -> np.ndarray:
    """Counts ``|truth_i & pred_j|``; rows follow sorted truth ids, columns sorted pred ids."""
    t, p = _labels(truth), _labels(pred)
    if t.size != p.size:
        raise InputError(f"partitions cover {t.size} and {p.size} points")
    _, ti = np.unique(t, return_inverse=True)
    _, pj = np.unique(p, return_inverse=True)
    table = np.zeros((int(ti.max(initial=-1)) + 1, int(pj.max(initial=-1)) + 1), dtype=np.int64)
    np.add.at(table, (ti.reshape(-1), pj.reshape(-1)), 1)
    return table


def purity(truth, pred) -> float:
    """``(1/m) * sum_i max_j |truth_i & pred_j|``."""
    table = contingency(truth, pred)
    m = table.sum()
    if m == 0:
        raise InputError("purity of an empty partition is undefined")
    return float(table.max(axis=1).sum() / m)


def _entropy(counts, m):
    p = counts[counts > 0] / m
    return float(-(p * np.log(p)).sum())


def mutual_information(truth, pred) -> float:
    """Unnormalised mutual information in nats, with ``0 log 0 = 0``."""
    table = contingency(truth, pred)
    m = table.sum()
    if m == 0:
        raise InputError("mutual information of an empty partition is undefined")
    rows = table.sum(axis=1, keepdims=True)
    cols = table.sum(axis=0, keepdims=True)
    nz = table > 0
    ratio = (m * table[nz]) / (rows * cols)[nz]
    return float(((table[nz] / m) * np.log(ratio)).sum())


def nmi(truth, pred, return_mi: bool = False):
    """Mutual information over the mean of the two partition entropies.

    Both entropies zero (two single-cluster partitions) gives 1.0.
    """
    table = contingency(truth, pred)
    m = table.sum()
    mi = mutual_information(truth, pred)
    h_t = _entropy(table.sum(axis=1), m)
    h_p = _entropy(table.sum(axis=0), m)
    denom = (h_t + h_p) / 2
    if denom == 0:
        score = 1.0
    else:
        score = min(1.0, max(0.0, mi / denom))
    return (score, mi) if return_mi else score


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2


def ari(truth, pred) -> float:
    """Adjusted Rand index from pair counts; 1.0 when both partitions are trivial."""
    table = contingency(truth, pred)
    m = int(table.sum())
    if m == 0:
        raise InputError("ARI of an empty partition is undefined")
    index = float(_comb2(table).sum())
    sum_a = float(_comb2(table.sum(axis=1)).sum())
    sum_b = float(_comb2(table.sum(axis=0)).sum())
    pairs = math.comb(m, 2)
    expected = sum_a * sum_b / pairs if pairs else 0.0
    maximum = (sum_a + sum_b) / 2
    denom = maximum - expected
    num = index - expected
    if denom == 0:
        return 1.0 if num == 0 else 0.0
    return num / denom
