"""Evaluation harness: Hamming-error statistics, RMSE/MAE sweeps, heatmaps
and repeated-trial variance reports.

Signed error is always ``true - estimated``.
"""

from __future__ import annotations

import io
import time
from dataclasses import asdict, dataclass, fields
from typing import Callable, IO, Optional

import numpy as np
import scipy.sparse as sp

from . import _hashing
from .baselines import METHODS as BASELINE_METHODS
from .baselines import baseline_pair_estimates, baseline_sketch, baseline_estimate_hamming, sketch_dataset_baseline
from .cabin import bin_em, cabin, sketch_dataset
from .cham import cham, pair_estimates, pairwise_estimates
from .core import CategoricalVector, Dataset, binary_hamming, hamming_distance, pairwise_hamming, pairwise_hamming_dense
from .errors import InputError, ParseError
from .model import build_model

DEFAULT_PAIR_BUDGET = 1_999_000
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass(frozen=True)
class EvalReport:
    method: str
    d: int
    rmse: float
    mae: float
    mean_error: float
    variance: float
    q05: float
    q25: float
    q50: float
    q75: float
    q95: float
    sketch_ms: float
    estimate_ms: float
    pairs: int

    @classmethod
    def from_errors(cls, method, d, errors, sketch_ms=0.0, estimate_ms=0.0) -> "EvalReport":
        e = np.asarray(errors, dtype=np.float64)
        if e.size == 0:
            raise InputError("no errors to summarise")
        q = np.quantile(e, QUANTILES)
        return cls(method=method, d=int(d), rmse=float(np.sqrt(np.mean(e * e))),
                   mae=float(np.mean(np.abs(e))), mean_error=float(np.mean(e)),
                   variance=float(np.var(e)), q05=float(q[0]), q25=float(q[1]), q50=float(q[2]),
                   q75=float(q[3]), q95=float(q[4]), sketch_ms=float(sketch_ms),
                   estimate_ms=float(estimate_ms), pairs=int(e.size))

    @property
    def quantiles(self):
        return (self.q05, self.q25, self.q50, self.q75, self.q95)

    def to_block(self, timings: bool = True) -> str:
        lines = []
        for f in fields(self):
            if not timings and f.name.endswith("_ms"):
                continue
            lines.append(f"{f.name}={_fmt(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_block(cls, text: str) -> "EvalReport":
        """Inverse of :meth:`to_block`; missing timing lines read as 0."""
        values = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError("expected key=value", line=lineno)
            values[key] = value
        kinds = {f.name: f.type for f in fields(cls)}
        unknown = set(values) - set(kinds)
        if unknown:
            raise ParseError(f"unknown report keys {sorted(unknown)}")
        out = {}
        for name, kind in kinds.items():
            if name not in values:
                if name.endswith("_ms"):
                    out[name] = 0.0
                    continue
                raise ParseError(f"report is missing {name}")
            raw = values[name]
            try:
                out[name] = raw if kind == "str" else int(raw) if kind == "int" else float(raw)
            except ValueError:
                raise ParseError(f"bad value for {name}: {raw!r}") from None
        return cls(**out)

    @staticmethod
    def csv_header(timings: bool = True) -> str:
        return ",".join(f.name for f in fields(EvalReport) if timings or not f.name.endswith("_ms"))

    def to_csv_row(self, timings: bool = True) -> str:
        return ",".join(_fmt(v) for k, v in asdict(self).items() if timings or not k.endswith("_ms"))


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def hamming_error(u: CategoricalVector, v: CategoricalVector, est: float) -> float:
    return hamming_distance(u, v) - float(est)


def select_pairs(m: int, budget: Optional[int] = None, seed: int = 0):
    """All ``i < j`` pairs, or a seeded uniform sample of ``budget`` of them."""
    if m < 2:
        raise InputError("need at least two points to form pairs")
    total = m * (m - 1) // 2
    if budget is None or budget >= total:
        left, right = np.triu_indices(m, k=1)
        return left.astype(np.int64), right.astype(np.int64)
    if budget < 1:
        raise InputError("pair budget must be >= 1")
    rng = np.random.default_rng(_hashing.derive_seed(seed, _hashing.SAMPLE, 1))
    ranks = np.sort(rng.choice(total, size=budget, replace=False))
    # unrank row-major upper-triangle positions
    row_start = lambda i: i * (2 * m - i - 1) // 2  # noqa: E731
    i = np.floor(((2 * m - 1) - np.sqrt((2 * m - 1) ** 2 - 8.0 * ranks)) / 2).astype(np.int64)
    i = np.clip(i, 0, m - 2)
    i -= row_start(i) > ranks
    i += row_start(i + 1) <= ranks
    j = ranks - row_start(i) + i + 1
    return i, j.astype(np.int64)


def exact_pair_distances(ds: Dataset, left, right, chunk: int = 8192) -> np.ndarray:
    left = np.asarray(left, dtype=np.int64)
    right = np.asarray(right, dtype=np.int64)
    n = len(ds)
    if left.size * 8 >= n * n or n <= 2000:
        return pairwise_hamming(ds)[left, right].astype(np.float64)
    x = ds.to_csr()
    support = sp.csr_matrix((np.ones(x.nnz), x.indices, x.indptr), shape=x.shape)
    keys = x.indices.astype(np.int64) * (ds.categories + 1) + x.data
    _, key_cols = np.unique(keys, return_inverse=True)
    onehot = sp.csr_matrix((np.ones(x.nnz), key_cols.reshape(-1), x.indptr),
                           shape=(n, int(key_cols.max(initial=0)) + 1))
    weights = np.diff(x.indptr)
    out = np.empty(left.size, dtype=np.float64)
    for lo in range(0, left.size, chunk):
        i, j = left[lo:lo + chunk], right[lo:lo + chunk]
        overlap = np.asarray(support[i].multiply(support[j]).sum(axis=1)).ravel()
        agree = np.asarray(onehot[i].multiply(onehot[j]).sum(axis=1)).ravel()
        out[lo:lo + chunk] = weights[i] + weights[j] - overlap - agree
    return out


class Estimator:
    """Pairwise Hamming estimator over a dataset.

    Calling it sketches the dataset once and returns estimates for the
    requested pairs; ``sketch_ms``/``estimate_ms`` record the last call.
    """

    name = "estimator"
    d = 0

    def __init__(self):
        self.sketch_ms = 0.0
        self.estimate_ms = 0.0

    def prepare(self, ds: Dataset):
        return ds

    def pairs(self, state, left, right) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, ds: Dataset, left, right) -> np.ndarray:
        t0 = time.perf_counter()
        state = self.prepare(ds)
        t1 = time.perf_counter()
        est = self.pairs(state, np.asarray(left), np.asarray(right))
        t2 = time.perf_counter()
        self.sketch_ms = (t1 - t0) * 1e3
        self.estimate_ms = (t2 - t1) * 1e3
        return np.asarray(est, dtype=np.float64)


class ExactEstimator(Estimator):
    name = "exact"

    def pairs(self, ds, left, right):
        return exact_pair_distances(ds, left, right)


class CabinEstimator(Estimator):
    name = "cabin"

    def __init__(self, d: int, seed: int = 0, workers: int = 1):
        super().__init__()
        self.d, self.seed, self.workers = int(d), seed, workers

    def prepare(self, ds):
        model = build_model(ds.dim, max(ds.categories, 1), self.d, self.seed)
        return sketch_dataset(ds, model, workers=self.workers)

    def pairs(self, sketches, left, right):
        n = len(sketches)
        if left.size * 4 >= n * n:
            return pairwise_estimates(sketches)[left, right]
        return pair_estimates(sketches, left, right)


class BaselineEstimator(Estimator):
    def __init__(self, method: str, d: int, seed: int = 0):
        super().__init__()
        method = method.upper()
        if method not in BASELINE_METHODS:
            raise InputError(f"unknown baseline method {method!r}")
        self.name, self.d, self.seed = method, int(d), seed

    def prepare(self, ds):
        return sketch_dataset_baseline(ds, self.name, self.d, self.seed)

    def pairs(self, sketches, left, right):
        return baseline_pair_estimates(sketches, left, right)


def make_estimator(method: str, d: int, seed: int = 0, workers: int = 1) -> Estimator:
    key = method.lower()
    if key == "cabin":
        return CabinEstimator(d, seed, workers)
    if key == "exact":
        return ExactEstimator()
    if key.upper() in BASELINE_METHODS:
        return BaselineEstimator(key.upper(), d, seed)
    raise InputError(f"unknown method {method!r}")


def pair_errors(ds: Dataset, estimator: Callable, pair_budget: Optional[int] = DEFAULT_PAIR_BUDGET,
                seed: int = 0) -> np.ndarray:
    left, right = select_pairs(len(ds), pair_budget, seed)
    truth = exact_pair_distances(ds, left, right)
    return truth - np.asarray(estimator(ds, left, right), dtype=np.float64)


def evaluate(ds: Dataset, estimator: Callable, pair_budget: Optional[int] = DEFAULT_PAIR_BUDGET,
             seed: int = 0) -> EvalReport:
    errors = pair_errors(ds, estimator, pair_budget, seed)
    return EvalReport.from_errors(getattr(estimator, "name", "custom"), getattr(estimator, "d", 0), errors,
                                  getattr(estimator, "sketch_ms", 0.0), getattr(estimator, "estimate_ms", 0.0))


def rmse(ds: Dataset, estimator: Callable, pair_budget: Optional[int] = DEFAULT_PAIR_BUDGET,
         seed: int = 0) -> float:
    """Root mean squared Hamming error over all (or a sampled budget of) pairs."""
    e = pair_errors(ds, estimator, pair_budget, seed)
    return float(np.sqrt(np.mean(e * e)))


def mae(ds: Dataset, estimator: Callable, pair_budget: Optional[int] = DEFAULT_PAIR_BUDGET,
        seed: int = 0) -> float:
    """Mean absolute Hamming error over all (or a sampled budget of) pairs."""
    return float(np.mean(np.abs(pair_errors(ds, estimator, pair_budget, seed))))


def sweep(ds: Dataset, method: str, dims, seed: int = 0, pair_budget: Optional[int] = DEFAULT_PAIR_BUDGET,
          workers: int = 1) -> list[EvalReport]:
    """One report per reduced dimension."""
    return [evaluate(ds, make_estimator(method, d, seed, workers), pair_budget, seed) for d in dims]


def estimate_matrix(ds: Dataset, method: str, d: int, seed: int = 0, workers: int = 1) -> np.ndarray:
    """Full symmetric matrix of estimated (or exact) pairwise distances."""
    key = method.lower()
    if key == "exact":
        return pairwise_hamming(ds).astype(np.float64)
    if key == "cabin":
        model = build_model(ds.dim, max(ds.categories, 1), d, seed)
        return pairwise_estimates(sketch_dataset(ds, model, workers=workers))
    from .baselines import baseline_pairwise
    return baseline_pairwise(sketch_dataset_baseline(ds, key.upper(), d, seed))


def format_matrix_csv(matrix: np.ndarray) -> str:
    """Row-major CSV with 6 significant digits."""
    return "".join(",".join(format(float(v), ".6g") for v in row) + "\n" for row in matrix)


def to_pgm(matrix: np.ndarray) -> bytes:
    """8-bit binary PGM; values min-max scaled to 0..255, a constant matrix renders black."""
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise InputError("heatmap needs a 2-D matrix")
    lo, hi = (float(a.min()), float(a.max())) if a.size else (0.0, 0.0)
    if hi > lo:
        pix = np.rint((a - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        pix = np.zeros(a.shape, dtype=np.uint8)
    h, w = a.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pix.tobytes()


def heatmap(matrix: np.ndarray, csv_out: IO[str] | None = None, pgm_out: IO[bytes] | None = None):
    """Write the matrix as CSV and as a grayscale PGM; returns (csv_text, pgm_bytes)."""
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"heatmap needs a square matrix, got shape {a.shape}")
    text = format_matrix_csv(a)
    pgm = to_pgm(a)
    if csv_out is not None:
        csv_out.write(text)
    if pgm_out is not None:
        pgm_out.write(pgm)
    return text, pgm


def _trial_error(u, v, truth, method, d, trial_seed, stage, c):
    if method == "cabin":
        model = build_model(u.dim, c, d, trial_seed)
        if stage == "binem":
            return truth - 2 * binary_hamming(bin_em(u, model), bin_em(v, model))
        return truth - cham(cabin(u, model), cabin(v, model), model).value
    return truth - baseline_estimate_hamming(baseline_sketch(method, u, d, trial_seed),
                                             baseline_sketch(method, v, d, trial_seed))


def trial_statistics(u: CategoricalVector, v: CategoricalVector, method: str = "cabin", d: int = 1000,
                     trials: int = 1000, seed: int = 0, stage: str = "full",
                     categories: Optional[int] = None) -> EvalReport:
    """Signed errors for one fixed pair over ``trials`` fresh sketch tables.

    ``stage="binem"`` redraws only the category table and measures
    ``HD(u, v) - 2 * HD(u', v')``; ``stage="full"`` redraws both tables and
    measures the full estimator.
    """
    if trials < 2:
        raise InputError("need at least two trials")
    method = method.lower() if method.lower() in ("cabin", "exact") else method.upper()
    if stage not in ("full", "binem"):
        raise InputError(f"unknown stage {stage!r}")
    if stage == "binem" and method != "cabin":
        raise InputError("the binem stage applies to cabin only")
    truth = hamming_distance(u, v)
    c = max(categories or 0, u.max_label, v.max_label, 1)
    t0 = time.perf_counter()
    if method == "exact":
        errors = np.zeros(trials)
    else:
        errors = np.array([_trial_error(u, v, truth, method, d, _hashing.derive_seed(seed, _hashing.TRIAL, t),
                                        stage, c) for t in range(trials)])
    elapsed = (time.perf_counter() - t0) * 1e3
    tag = method if stage == "full" else "cabin-binem"
    return EvalReport.from_errors(tag, d, errors, estimate_ms=elapsed)


def all_pairs_trials(ds: Dataset, method: str = "cabin", d: int = 1000, trials: int = 100, seed: int = 0,
                     stage: str = "full", pair_budget: Optional[int] = DEFAULT_PAIR_BUDGET) -> EvalReport:
    """Distribution over trials of the mean absolute error across all pairs."""
    if trials < 2:
        raise InputError("need at least two trials")
    left, right = select_pairs(len(ds), pair_budget, seed)
    truth = exact_pair_distances(ds, left, right)
    c = max(ds.categories, 1)
    t0 = time.perf_counter()
    means = []
    for t in range(trials):
        ts = _hashing.derive_seed(seed, _hashing.TRIAL, t)
        if stage == "binem":
            if method.lower() != "cabin":
                raise InputError("the binem stage applies to cabin only")
            model = build_model(ds.dim, c, 1, ts)
            bits = np.stack([bin_em(p, model).to_bits() for p in ds]).astype(np.int64)
            est = 2.0 * np.count_nonzero(bits[left] != bits[right], axis=1)
        else:
            est = make_estimator(method, d, ts)(ds, left, right)
        means.append(float(np.mean(np.abs(truth - est))))
    elapsed = (time.perf_counter() - t0) * 1e3
    tag = method.lower() if stage == "full" else "cabin-binem"
    return EvalReport.from_errors(f"{tag}-allpairs", d, means, estimate_ms=elapsed)


def time_pairwise(ds: Dataset, d: int, seed: int = 0, workers: int = 1):
    """Wall-clock ms for all-pairs exact HD on raw full-length rows versus Cham on sketches.

    Returns ``(exact_ms, sketch_build_ms, estimate_ms)``.
    """
    dense = ds.to_dense()
    t0 = time.perf_counter()
    pairwise_hamming_dense(dense)
    t1 = time.perf_counter()
    model = build_model(ds.dim, max(ds.categories, 1), d, seed)
    sketches = sketch_dataset(ds, model, workers=workers)
    t2 = time.perf_counter()
    pairwise_estimates(sketches)
    t3 = time.perf_counter()
    return (t1 - t0) * 1e3, (t2 - t1) * 1e3, (t3 - t2) * 1e3


def report_table(reports) -> str:
    buf = io.StringIO()
    buf.write(EvalReport.csv_header() + "\n")
    for r in reports:
        buf.write(r.to_csv_row() + "\n")
    return buf.getvalue()
