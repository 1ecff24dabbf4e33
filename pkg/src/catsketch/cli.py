"""Command-line pipeline: ``catsketch <subcommand> ...``.

Stages hand off through files (model, sketches, assignments, reports), so
each subcommand is a pure function of its inputs, flags and seed.  The
effective seed goes to stderr on every run.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import dataio, evaluation
from .baselines import baseline_pairwise, baseline_pair_estimates, sketch_dataset_baseline
from .cabin import SketchSet, sketch_dataset
from .cham import pair_estimates, pairwise_estimates
from .clustering import ari, kmodes, nmi, purity
from .core import Dataset, pairwise_hamming
from .errors import CatsketchError, InputError, ParseError
from .model import SketchParams, build_model, choose_dimension, parse_model, serialize_model

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_COMPUTE = 0, 2, 3, 4
SEED_ENV = "CATSKETCH_SEED"
METHODS = ("cabin", "fh", "sh", "hlsh")


class UsageError(CatsketchError):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: dict = field(default_factory=dict)
    model: Optional[str] = None
    method: str = "cabin"
    d: Optional[int] = None
    s: Optional[float] = None
    delta: float = 0.1
    seed: int = 0
    k: Optional[int] = None
    workers: int = 1
    pair_budget: Optional[int] = evaluation.DEFAULT_PAIR_BUDGET
    outputs: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def dimension(self, required: bool = True) -> Optional[int]:
        """Resolve ``d`` from either ``--d`` or ``--s``/``--delta``."""
        if self.d is not None and self.s is not None:
            raise UsageError("give either --d or --s, not both")
        if self.d is not None:
            if self.d < 1:
                raise UsageError("--d must be >= 1")
            return self.d
        if self.s is not None:
            d = choose_dimension(SketchParams(self.s, self.delta))
            print(f"auto d={d} (s={self.s:g}, delta={self.delta:g})", file=sys.stderr)
            return d
        if required:
            raise UsageError("a dimension is required: give --d or --s")
        return None


def _seed(value: Optional[str]) -> int:
    raw = value if value is not None else os.environ.get(SEED_ENV, "0")
    try:
        seed = int(raw, 10)
    except ValueError:
        raise UsageError(f"seed must be a decimal integer, got {raw!r}") from None
    if not 0 <= seed < 2 ** 64:
        raise UsageError("seed must lie in [0, 2**64)")
    return seed


def _dims(text: str) -> list[int]:
    try:
        dims = [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}") from None
    if not dims or min(dims) < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive integers")
    return dims


def _pair(text: str) -> tuple[int, int]:
    try:
        i, j = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'i,j', got {text!r}") from None
    return i, j


@contextlib.contextmanager
def _open_out(path: Optional[str], binary: bool = False):
    if path is None or path == "-":
        yield sys.stdout.buffer if binary else sys.stdout
        return
    with open(path, "wb" if binary else "w", encoding=None if binary else "ascii", newline=None if binary else "\n") as fh:
        yield fh


def _load_corpus(cfg: RunConfig) -> Dataset:
    ds = dataio.load_dataset(cfg.inputs["input"], cfg.options.get("format", "auto"),
                             has_header=cfg.options.get("header", False))
    sample = cfg.options.get("sample")
    if sample is not None:
        ds = dataio.sample_dataset(ds, sample, cfg.seed)
    return ds


def _warn_vacuous(d: int, n: int):
    if d > n:
        print(f"warning: d={d} exceeds n={n}; the sketch does not compress", file=sys.stderr)


def _read_sketch_file(path):
    return dataio.read_sketches(path)


def cmd_build_model(cfg: RunConfig):
    n, c = cfg.options["n"], cfg.options["c"]
    d = cfg.dimension()
    _warn_vacuous(d, n)
    model = build_model(n, c, d, cfg.seed)
    with _open_out(cfg.outputs.get("out"), binary=True) as fh:
        fh.write(serialize_model(model))


def cmd_sketch(cfg: RunConfig):
    ds = _load_corpus(cfg)
    if cfg.method == "cabin":
        if cfg.model is None:
            d = cfg.dimension()
            model = build_model(ds.dim, max(ds.categories, 1), d, cfg.seed)
        else:
            with open(cfg.model, "rb") as fh:
                model = parse_model(fh.read())
        _warn_vacuous(model.d, model.n)
        sketches = sketch_dataset(ds, model, workers=cfg.workers)
    else:
        d = cfg.dimension()
        _warn_vacuous(d, ds.dim)
        sketches = sketch_dataset_baseline(ds, cfg.method.upper(), d, cfg.seed)
    with _open_out(cfg.outputs.get("out")) as fh:
        dataio.write_sketches(sketches, fh)


def _estimate_matrix(sketches) -> np.ndarray:
    if isinstance(sketches, SketchSet):
        return pairwise_estimates(sketches)
    return baseline_pairwise(sketches)


def cmd_estimate(cfg: RunConfig):
    sketches = _read_sketch_file(cfg.inputs["sketches"])
    m = len(sketches)
    if m < 2:
        raise InputError("need at least two sketches to estimate distances")
    with _open_out(cfg.outputs.get("out")) as fh:
        if cfg.options.get("matrix"):
            fh.write(evaluation.format_matrix_csv(_estimate_matrix(sketches)))
            return
        left, right = np.triu_indices(m, k=1)
        if isinstance(sketches, SketchSet):
            est = pair_estimates(sketches, left, right)
        else:
            est = baseline_pair_estimates(sketches, left, right)
        fh.write("i,j,estimate\n")
        for i, j, e in zip(left.tolist(), right.tolist(), est.tolist()):
            fh.write(f"{i},{j},{e:.6g}\n")


def _sweep(cfg: RunConfig):
    ds = _load_corpus(cfg)
    dims = cfg.options["dims"]
    timings = cfg.options.get("timings", False)
    reports = evaluation.sweep(ds, cfg.method, dims, cfg.seed, cfg.pair_budget, cfg.workers)
    with _open_out(cfg.outputs.get("out")) as fh:
        fh.write(evaluation.EvalReport.csv_header(timings) + "\n")
        for r in reports:
            fh.write(r.to_csv_row(timings) + "\n")


def cmd_heatmap(cfg: RunConfig):
    ds = _load_corpus(cfg)
    what = cfg.options.get("what", "estimates")
    d = cfg.dimension(required=cfg.method != "exact")
    matrix = evaluation.estimate_matrix(ds, cfg.method, d or 0, cfg.seed, cfg.workers)
    if what == "errors":
        matrix = pairwise_hamming(ds) - matrix
    csv_path, pgm_path = cfg.outputs.get("csv"), cfg.outputs.get("pgm")
    if csv_path is None and pgm_path is None:
        raise UsageError("heatmap needs --csv and/or --pgm")
    text, pgm = evaluation.heatmap(matrix)
    if csv_path is not None:
        with _open_out(csv_path) as fh:
            fh.write(text)
    if pgm_path is not None:
        with _open_out(pgm_path, binary=True) as fh:
            fh.write(pgm)


def cmd_cluster(cfg: RunConfig):
    if cfg.k is None:
        raise UsageError("--k is required")
    if cfg.inputs.get("sketches"):
        data = _read_sketch_file(cfg.inputs["sketches"])
        if not isinstance(data, SketchSet):
            data = data.payload
    else:
        data = _load_corpus(cfg)
    result = kmodes(data, cfg.k, seed=cfg.seed, max_iter=cfg.options.get("max_iter", 100),
                    n_init=cfg.options.get("n_init", 1), workers=cfg.workers)
    print(f"cost={result.cost} iterations={result.iterations}", file=sys.stderr)
    with _open_out(cfg.outputs.get("out")) as fh:
        dataio.write_assignment(result, fh)


def cmd_eval_cluster(cfg: RunConfig):
    truth = dataio.read_assignment(cfg.inputs["truth"])
    pred = dataio.read_assignment(cfg.inputs["pred"])
    if len(truth) != len(pred):
        raise InputError(f"assignments cover {len(truth)} and {len(pred)} points")
    score, mi = nmi(truth.labels, pred.labels, return_mi=True)
    with _open_out(cfg.outputs.get("out")) as fh:
        fh.write(f"points={len(truth)}\n")
        fh.write(f"purity={purity(truth.labels, pred.labels):.10g}\n")
        fh.write(f"nmi={score:.10g}\n")
        fh.write(f"mi={mi:.10g}\n")
        fh.write(f"ari={ari(truth.labels, pred.labels):.10g}\n")


def cmd_trials(cfg: RunConfig):
    ds = _load_corpus(cfg)
    d = cfg.dimension()
    trials = cfg.options["trials"]
    stage = cfg.options.get("stage", "full")
    pair = cfg.options.get("pair")
    if pair is None:
        report = evaluation.all_pairs_trials(ds, cfg.method, d, trials, cfg.seed, stage, cfg.pair_budget)
    else:
        i, j = pair
        if not (0 <= i < len(ds) and 0 <= j < len(ds)):
            raise InputError(f"pair ({i}, {j}) outside 0..{len(ds) - 1}")
        report = evaluation.trial_statistics(ds[i], ds[j], cfg.method, d, trials, cfg.seed, stage,
                                             categories=ds.categories)
    with _open_out(cfg.outputs.get("out")) as fh:
        fh.write(report.to_block(timings=cfg.options.get("timings", False)))


def cmd_synth(cfg: RunConfig):
    o = cfg.options
    ds = dataio.synthetic_corpus(o["points"], o["n"], o["c"], o["max_density"], o.get("mean_density"),
                                 seed=cfg.seed, labels=o.get("labels", "uniform"))
    with _open_out(cfg.outputs.get("out")) as fh:
        dataio.write_docword(ds, fh)


COMMANDS = {
    "build-model": cmd_build_model,
    "sketch": cmd_sketch,
    "estimate": cmd_estimate,
    "rmse": _sweep,
    "mae": _sweep,
    "heatmap": cmd_heatmap,
    "cluster": cmd_cluster,
    "eval-cluster": cmd_eval_cluster,
    "trials": cmd_trials,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catsketch", description="Sketch sparse categorical data and "
                                     "estimate Hamming distances from the sketches.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seed", help=f"64-bit seed (falls back to ${SEED_ENV}, then 0)")
        p.add_argument("--workers", type=int, default=1, help="worker threads; never changes output")
        return p

    def corpus(p, sample=True):
        p.add_argument("--input", "-i", required=True, help="docword or categorical CSV file")
        p.add_argument("--format", choices=("auto", "docword", "csv"), default="auto")
        p.add_argument("--header", action="store_true", help="CSV input has a header row")
        if sample:
            p.add_argument("--sample", type=int, help="keep a seeded uniform sample of this many points")

    def dimension(p):
        p.add_argument("--d", type=int, help="sketch dimension")
        p.add_argument("--s", type=float, help="density bound; picks d automatically")
        p.add_argument("--delta", type=float, default=0.1, help="failure probability for auto d")

    p = add("build-model", "draw a Cabin model and write it to a file")
    p.add_argument("--n", type=int, required=True, help="data dimension")
    p.add_argument("--c", type=int, required=True, help="number of categories")
    dimension(p)
    p.add_argument("--out", "-o")

    p = add("sketch", "sketch a corpus with a model (cabin) or a baseline")
    corpus(p)
    p.add_argument("--model", "-m", help="model file (cabin); drawn from --seed if omitted")
    p.add_argument("--method", choices=METHODS, default="cabin")
    dimension(p)
    p.add_argument("--out", "-o")

    p = add("estimate", "pairwise distance estimates from a sketch file")
    p.add_argument("--sketches", "-s", required=True)
    p.add_argument("--matrix", action="store_true", help="write the full symmetric matrix instead of pairs")
    p.add_argument("--out", "-o")

    for name in ("rmse", "mae"):
        p = add(name, f"{name.upper()} report over a list of sketch dimensions")
        corpus(p)
        p.add_argument("--method", choices=METHODS, default="cabin")
        p.add_argument("--dims", type=_dims, required=True, help="comma-separated dimensions")
        p.add_argument("--pair-budget", type=int, default=evaluation.DEFAULT_PAIR_BUDGET)
        p.add_argument("--timings", action="store_true", help="include wall-clock columns")
        p.add_argument("--out", "-o")

    p = add("heatmap", "CSV and PGM of pairwise estimates or errors")
    corpus(p)
    p.add_argument("--method", choices=METHODS + ("exact",), default="cabin")
    dimension(p)
    p.add_argument("--what", choices=("estimates", "errors"), default="estimates")
    p.add_argument("--csv")
    p.add_argument("--pgm")

    p = add("cluster", "k-modes on a corpus or on a sketch file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", "-i")
    src.add_argument("--sketches", "-s")
    p.add_argument("--format", choices=("auto", "docword", "csv"), default="auto")
    p.add_argument("--header", action="store_true")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--n-init", type=int, default=1)
    p.add_argument("--out", "-o")

    p = add("eval-cluster", "purity, NMI and ARI of a predicted assignment")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", "-o")

    p = add("trials", "error spread over repeated independent sketches")
    corpus(p)
    p.add_argument("--method", choices=METHODS, default="cabin")
    dimension(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--stage", choices=("full", "binem"), default="full")
    p.add_argument("--pair", type=_pair, help="0-based 'i,j'; all pairs when omitted")
    p.add_argument("--pair-budget", type=int, default=evaluation.DEFAULT_PAIR_BUDGET)
    p.add_argument("--timings", action="store_true")
    p.add_argument("--out", "-o")

    p = add("synth", "write a synthetic docword corpus")
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--max-density", type=int, required=True)
    p.add_argument("--mean-density", type=float)
    p.add_argument("--labels", choices=("uniform", "geometric"), default="uniform")
    p.add_argument("--out", "-o")
    return parser


_INPUT_KEYS = ("input", "sketches", "truth", "pred")
_OUTPUT_KEYS = ("out", "csv", "pgm")
_CONFIG_KEYS = {"command", "seed", "workers", "model", "method", "d", "s", "delta", "k", "pair_budget"}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    ns = vars(args)
    if ns.get("workers", 1) < 1:
        raise UsageError("--workers must be >= 1")
    cfg = RunConfig(command=args.command, seed=_seed(ns.get("seed")), workers=ns.get("workers", 1))
    for key in ("model", "method", "d", "s", "delta", "k", "pair_budget"):
        if ns.get(key) is not None:
            setattr(cfg, key, ns[key])
    cfg.inputs = {k: ns[k] for k in _INPUT_KEYS if ns.get(k) is not None}
    cfg.outputs = {k: ns[k] for k in _OUTPUT_KEYS if ns.get(k) is not None}
    cfg.options = {k: v for k, v in ns.items()
                   if k not in _CONFIG_KEYS and k not in _INPUT_KEYS and k not in _OUTPUT_KEYS and v is not None}
    return cfg


def dispatch(cfg: RunConfig) -> int:
    print(f"seed={cfg.seed}", file=sys.stderr)
    COMMANDS[cfg.command](cfg)
    return EXIT_OK


def _fail(kind: str, code: int, exc: BaseException) -> int:
    msg = " ".join(str(exc).split()) or type(exc).__name__
    print(f"catsketch: error kind={kind} code={code} message={msg}", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return dispatch(config_from_args(args))
    except UsageError as exc:
        return _fail("usage", EXIT_USAGE, exc)
    except ParseError as exc:
        return _fail("parse", EXIT_PARSE, exc)
    except (CatsketchError, ValueError, TypeError) as exc:
        return _fail("compute", EXIT_COMPUTE, exc)
    except OSError as exc:
        return _fail("io", EXIT_USAGE, exc)


if __name__ == "__main__":
    sys.exit(main())
