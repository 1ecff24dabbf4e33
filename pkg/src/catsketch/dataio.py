"""Corpus ingestion, sampling and the package's text file formats.

Formats (LF line endings, ASCII decimal integers):

* UCI bag-of-words ``docword``: three header lines ``D``, ``W``, ``NNZ``
  followed by ``NNZ`` lines ``docID wordID count``.
* categorical CSV: one point per row, one non-negative integer per cell.
* sketch file: ``CATSKETCH-SKETCHES v1``, a ``d=.. m=.. model_seed=..``
  line, then one lowercase hex row per sketch.  Baseline sketches append
  ``method=<FH|SH|HLSH> n=<n>`` to the second line; FH rows are signed
  decimals, HLSH rows decimal labels preceded by one ``INDICES`` line, SH rows
  hex like Cabin.
* assignment CSV: ``point_index,cluster_id`` with 0-based point indices.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import IO, Iterable, Union

import numpy as np

from . import _hashing
from .baselines import BaselineSet
from .cabin import SketchSet
from .clustering import ClusterAssignment
from .core import CategoricalVector, Dataset, packed_size
from .errors import InputError, ParseError

SKETCH_MAGIC = "CATSKETCH-SKETCHES v1"

Source = Union[str, os.PathLike, IO[str], Iterable[str]]


def _lines(source: Source):
    """Yield ``(lineno, text)`` without the trailing newline."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="ascii", newline="") as fh:
            yield from _lines(fh)
        return
    for k, line in enumerate(source, start=1):
        if line.endswith("\n"):
            line = line[:-1]
        if line.endswith("\r"):
            line = line[:-1]
        yield k, line


def _int(text, lineno, what, column=None):
    text = text.strip()
    if not text or not (text.isdigit() or (text[0] in "+-" and text[1:].isdigit())):
        raise ParseError(f"{what} is not an integer: {text!r}", line=lineno, column=column)
    return int(text)


@dataclass(frozen=True)
class DocwordHeader:
    D: int
    W: int
    NNZ: int


def parse_docword(source: Source, name: str = "") -> Dataset:
    """Parse a UCI docword stream; word counts become category labels."""
    it = _lines(source)
    header = []
    for what in ("D", "W", "NNZ"):
        try:
            lineno, text = next(it)
        except StopIteration:
            raise ParseError(f"missing header value {what}", line=len(header) + 1) from None
        header.append(_int(text, lineno, what))
    hdr = DocwordHeader(*header)
    if hdr.D < 1 or hdr.W < 1 or hdr.NNZ < 0:
        raise ParseError("header values must be positive", line=1)
    if hdr.NNZ > hdr.D * hdr.W:
        raise ParseError("NNZ exceeds D * W", line=3)

    points = []
    cur_doc, cur_idx, cur_lab = 1, [], []
    seen = 0
    last_line = 3

    def flush(doc):
        order = np.argsort(cur_idx, kind="stable")
        idx = np.asarray(cur_idx, dtype=np.int64)[order]
        lab = np.asarray(cur_lab, dtype=np.int64)[order]
        if idx.size > 1 and np.any(np.diff(idx) == 0):
            raise ParseError(f"document {doc} repeats a word id", line=last_line)
        points.append(CategoricalVector(hdr.W, idx, lab))

    for lineno, text in it:
        if not text.strip():
            last_line = lineno
            continue
        parts = text.split()
        if len(parts) != 3:
            raise ParseError("expected 'docID wordID count'", line=lineno)
        doc = _int(parts[0], lineno, "docID", 1)
        word = _int(parts[1], lineno, "wordID", 2)
        count = _int(parts[2], lineno, "count", 3)
        seen += 1
        if seen > hdr.NNZ:
            raise ParseError(f"more than NNZ={hdr.NNZ} triples", line=lineno)
        if not 1 <= doc <= hdr.D:
            raise ParseError(f"docID {doc} outside 1..{hdr.D}", line=lineno, column=1)
        if not 1 <= word <= hdr.W:
            raise ParseError(f"wordID {word} outside 1..{hdr.W}", line=lineno, column=2)
        if count <= 0:
            raise ParseError(f"count must be positive, got {count}", line=lineno, column=3)
        if doc < cur_doc:
            raise ParseError(f"docID {doc} decreases (previous {cur_doc})", line=lineno, column=1)
        while cur_doc < doc:
            flush(cur_doc)
            cur_idx, cur_lab = [], []
            cur_doc += 1
        cur_idx.append(word)
        cur_lab.append(count)
        last_line = lineno
    if seen != hdr.NNZ:
        raise ParseError(f"header declares NNZ={hdr.NNZ} but {seen} triples follow", line=last_line)
    while cur_doc <= hdr.D:
        flush(cur_doc)
        cur_idx, cur_lab = [], []
        cur_doc += 1
    return Dataset(points, dim=hdr.W, name=name)


def write_docword(ds: Dataset, out: IO[str]) -> None:
    nnz = sum(p.density for p in ds)
    out.write(f"{len(ds)}\n{ds.dim}\n{nnz}\n")
    for doc, p in enumerate(ds, start=1):
        for i, a in zip(p.indices.tolist(), p.labels.tolist()):
            out.write(f"{doc} {i} {a}\n")


def parse_csv_categorical(source: Source, has_header: bool = False, name: str = "") -> Dataset:
    """Parse a rectangular CSV of non-negative integers, one point per row."""
    points = []
    width = None
    for lineno, text in _lines(source):
        if has_header and lineno == 1:
            continue
        if not text.strip():
            continue
        cells = text.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(f"row has {len(cells)} cells, expected {width}", line=lineno)
        values = []
        for col, cell in enumerate(cells, start=1):
            v = _int(cell, lineno, "cell", col)
            if v < 0:
                raise ParseError(f"negative value {v}", line=lineno, column=col)
            values.append(v)
        points.append(CategoricalVector.from_dense(values))
    return Dataset(points, dim=width or 0, name=name)


def write_csv_categorical(ds: Dataset, out: IO[str], header: bool = False) -> None:
    if header:
        out.write(",".join(f"x{i}" for i in range(1, ds.dim + 1)) + "\n")
    for p in ds:
        out.write(",".join(map(str, p.to_dense().tolist())) + "\n")


def load_dataset(path: str | os.PathLike, fmt: str = "auto", has_header: bool = False) -> Dataset:
    """Read a corpus by format name (``docword``, ``csv``) or file extension."""
    path = os.fspath(path)
    if fmt == "auto":
        fmt = "csv" if path.lower().endswith(".csv") else "docword"
    name = os.path.basename(path)
    if fmt == "docword":
        return parse_docword(path, name=name)
    if fmt == "csv":
        return parse_csv_categorical(path, has_header=has_header, name=name)
    raise InputError(f"unknown corpus format {fmt!r}")


def sample_indices(total: int, m: int, seed: int) -> np.ndarray:
    """Sorted uniform sample of ``m`` of ``range(total)``: the ``m`` smallest hash keys."""
    if not 0 <= m <= total:
        raise InputError(f"cannot sample {m} of {total} points")
    if m == total:
        return np.arange(total)
    keys = _hashing.draws(seed, _hashing.SAMPLE, np.arange(total))
    return np.sort(np.argsort(keys, kind="stable")[:m])


def sample_dataset(ds: Dataset, m: int, seed: int) -> Dataset:
    """Uniform sample without replacement, kept in original order."""
    return ds.subset(sample_indices(len(ds), m, seed).tolist())


def synthetic_corpus(points: int, dim: int, categories: int, max_density: int,
                     mean_density: float | None = None, seed: int = 0,
                     zipf: float = 1.0, labels: str = "uniform", name: str = "synthetic") -> Dataset:
    """Bag-of-words-like corpus over a Zipf-weighted vocabulary.

    Densities are gamma distributed around ``mean_density`` and clipped to
    ``[1, max_density]``.  ``labels="uniform"`` draws labels uniformly from
    ``1..categories``; ``labels="geometric"`` mimics raw word counts (mostly
    1s), which makes every pair depend on the same few ``psi`` bits.
    """
    if labels not in ("uniform", "geometric"):
        raise InputError(f"unknown label distribution {labels!r}")
    rng = np.random.default_rng(seed)
    if mean_density is None:
        mean_density = max_density
    weights = 1.0 / (np.arange(dim) + 10.0) ** zipf
    weights = weights[rng.permutation(dim)]
    weights /= weights.sum()
    if mean_density >= max_density:
        sizes = np.full(points, max_density)
    else:
        sizes = np.clip(np.rint(rng.gamma(2.0, mean_density / 2.0, size=points)), 1, max_density)
    out = []
    for s in sizes.astype(int):
        idx = np.sort(rng.choice(dim, size=min(s, dim), replace=False, p=weights)) + 1
        if labels == "uniform":
            lab = rng.integers(1, categories + 1, size=idx.size)
        else:
            lab = np.minimum(rng.geometric(0.55, size=idx.size), categories)
        out.append(CategoricalVector(dim, idx, lab))
    return Dataset(out, dim=dim, categories=categories, name=name)


def _fmt_seed(seed):
    return "none" if seed is None else str(seed)


def write_sketches(s: SketchSet | BaselineSet, out: IO[str]) -> None:
    if isinstance(s, SketchSet):
        out.write(f"{SKETCH_MAGIC}\nd={s.d} m={len(s)} model_seed={_fmt_seed(s.seed)}\n")
        for row in s.packed:
            out.write(row.tobytes().hex() + "\n")
        return
    out.write(f"{SKETCH_MAGIC}\nd={s.d} m={len(s)} model_seed={_fmt_seed(s.seed)} method={s.method} n={s.n}\n")
    if s.method == "HLSH":
        out.write("INDICES " + " ".join(map(str, s.indices.tolist())) + "\n")
    for row in s.payload:
        if s.method == "SH":
            out.write(np.packbits(row.astype(np.uint8), bitorder="little").tobytes().hex() + "\n")
        else:
            out.write(" ".join(map(str, row.tolist())) + "\n")


def sketches_to_text(s) -> str:
    buf = io.StringIO()
    write_sketches(s, buf)
    return buf.getvalue()


def _hex_row(text, nbytes, d, lineno):
    if len(text) != 2 * nbytes:
        raise ParseError(f"hex row has {len(text)} digits, expected {2 * nbytes}", line=lineno)
    if text != text.lower():
        raise ParseError("hex rows must be lowercase", line=lineno)
    try:
        row = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
    except ValueError:
        raise ParseError("row is not valid hex", line=lineno) from None
    if d % 8 and row[-1] >> (d % 8):
        raise ParseError("padding bits beyond d are set", line=lineno)
    return row


def read_sketches(source: Source) -> SketchSet | BaselineSet:
    """Read a sketch file written by :func:`write_sketches`."""
    lines = [(k, t) for k, t in _lines(source)]
    while lines and lines[-1][1] == "":
        lines.pop()
    if not lines or lines[0][1] != SKETCH_MAGIC:
        raise ParseError(f"bad magic, expected {SKETCH_MAGIC!r}", line=1)
    if len(lines) < 2:
        raise ParseError("missing header line", line=2)
    fields = {}
    for part in lines[1][1].split(" "):
        key, sep, value = part.partition("=")
        if not sep or key in fields:
            raise ParseError(f"malformed header field {part!r}", line=2)
        fields[key] = value
    base = ["d", "m", "model_seed"]
    if list(fields)[:3] != base or len(fields) not in (3, 5) or (
            len(fields) == 5 and list(fields)[3:] != ["method", "n"]):
        raise ParseError("header must be 'd=.. m=.. model_seed=..' optionally followed by 'method=.. n=..'",
                         line=2)
    d = _int(fields["d"], 2, "d")
    m = _int(fields["m"], 2, "m")
    seed = None if fields["model_seed"] == "none" else _int(fields["model_seed"], 2, "model_seed")
    if d < 1 or m < 0:
        raise ParseError("need d >= 1 and m >= 0", line=2)
    body = lines[2:]
    method = fields.get("method")
    nbytes = packed_size(d)
    if method is None:
        if len(body) != m:
            raise ParseError(f"header declares m={m} rows but {len(body)} follow", line=lines[-1][0])
        rows = [_hex_row(t, nbytes, d, k) for k, t in body]
        packed = np.stack(rows) if rows else np.zeros((0, nbytes), np.uint8)
        return SketchSet(packed, d, seed=seed)
    n = _int(fields["n"], 2, "n")
    if method not in ("FH", "SH", "HLSH"):
        raise ParseError(f"unknown method {method!r}", line=2)
    indices = None
    if method == "HLSH":
        if not body or not body[0][1].startswith("INDICES "):
            raise ParseError("missing INDICES line", line=3)
        k, t = body[0]
        indices = np.array([_int(v, k, "index") for v in t[8:].split(" ")], dtype=np.int64)
        if indices.size != d or np.any((indices < 1) | (indices > n)) or np.unique(indices).size != d:
            raise ParseError(f"INDICES must list {d} distinct values in 1..{n}", line=k)
        body = body[1:]
    if len(body) != m:
        raise ParseError(f"header declares m={m} rows but {len(body)} follow", line=lines[-1][0])
    payload = np.zeros((m, d), dtype=np.int64)
    for r, (k, t) in enumerate(body):
        if method == "SH":
            payload[r] = np.unpackbits(_hex_row(t, nbytes, d, k), count=d, bitorder="little")
        else:
            vals = t.split(" ")
            if len(vals) != d:
                raise ParseError(f"row has {len(vals)} values, expected {d}", line=k)
            payload[r] = [_int(v, k, "value", c) for c, v in enumerate(vals, start=1)]
            if method == "HLSH" and np.any(payload[r] < 0):
                raise ParseError("H-LSH labels must be non-negative", line=k)
    return BaselineSet(method, payload, n, seed=seed, indices=indices)


def write_assignment(a: ClusterAssignment, out: IO[str]) -> None:
    out.write("point_index,cluster_id\n")
    for i, lab in enumerate(a.labels.tolist()):
        out.write(f"{i},{lab}\n")


def read_assignment(source: Source) -> ClusterAssignment:
    labels = []
    for lineno, text in _lines(source):
        if lineno == 1:
            if text != "point_index,cluster_id":
                raise ParseError("expected header 'point_index,cluster_id'", line=1)
            continue
        if not text:
            continue
        parts = text.split(",")
        if len(parts) != 2:
            raise ParseError("expected 'point_index,cluster_id'", line=lineno)
        idx = _int(parts[0], lineno, "point_index", 1)
        if idx != len(labels):
            raise ParseError(f"point_index {idx} out of sequence (expected {len(labels)})", line=lineno, column=1)
        cid = _int(parts[1], lineno, "cluster_id", 2)
        if cid < 1:
            raise ParseError("cluster ids start at 1", line=lineno, column=2)
        labels.append(cid)
    k = max(labels, default=0)
    return ClusterAssignment(np.array(labels, dtype=np.int64), k)
