"""Frozen random mappings for Cabin sketches and the model file format.

A model holds the category table ``psi`` (``c + 1`` bits, ``psi[0] == 0``)
and the attribute table ``pi`` (``n`` bins in ``1..d``).  Tables built from
a seed use the counter-based scheme in :mod:`catsketch._hashing`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _hashing
from .errors import InputError, ParseError

MAGIC = "CATSKETCH-MODEL v1"


@dataclass(frozen=True)
class SketchParams:
    """Density bound ``s`` and failure probability ``delta``."""

    s: float
    delta: float = 0.1

    def __post_init__(self):
        if not self.s >= 1:
            raise InputError(f"density bound s must be >= 1, got {self.s}")
        if not 0 < self.delta < 1:
            raise InputError(f"delta must lie in (0, 1), got {self.delta}")


def choose_dimension(params: SketchParams) -> int:
    """Sketch dimension ``ceil(s * sqrt(s/2 * ln(6/delta)))``."""
    s, delta = params.s, params.delta
    return math.ceil(s * math.sqrt(s / 2 * math.log(6 / delta)))


class SketchModel:
    """Immutable ``(psi, pi)`` tables plus the parameters that produced them."""

    __slots__ = ("n", "c", "d", "seed", "psi", "pi")

    def __init__(self, psi, pi, d: int, seed: Optional[int] = None):
        psi = np.array(psi, dtype=np.uint8).reshape(-1)
        pi = np.array(pi, dtype=np.int64).reshape(-1)
        d = int(d)
        if d < 1:
            raise InputError(f"sketch dimension must be >= 1, got {d}")
        if psi.size < 2:
            raise InputError("psi needs entries for 0..c with c >= 1")
        if psi[0] != 0:
            raise InputError("psi[0] must be 0 (missing attributes map to 0)")
        if np.any(psi > 1):
            raise InputError("psi entries must be 0 or 1")
        if pi.size < 1:
            raise InputError("pi needs at least one entry")
        bad = np.flatnonzero((pi < 1) | (pi > d))
        if bad.size:
            k = int(bad[0])
            raise InputError(f"pi[{k + 1}] = {int(pi[k])} outside 1..{d}")
        if seed is not None:
            seed = _hashing.check_seed(seed)
        psi.setflags(write=False)
        pi.setflags(write=False)
        for name, value in (("n", pi.size), ("c", psi.size - 1), ("d", d),
                            ("seed", seed), ("psi", psi), ("pi", pi)):
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("SketchModel is immutable")

    def __eq__(self, other):
        if not isinstance(other, SketchModel):
            return NotImplemented
        return (self.d == other.d and self.seed == other.seed
                and np.array_equal(self.psi, other.psi) and np.array_equal(self.pi, other.pi))

    def __hash__(self):
        return hash((self.d, self.seed, self.psi.tobytes(), self.pi.tobytes()))

    def __repr__(self):
        return f"SketchModel(n={self.n}, c={self.c}, d={self.d}, seed={self.seed})"


def build_model(n: int, c: int, d: int, seed: int) -> SketchModel:
    """Draw ``psi`` and ``pi`` from ``seed``.

    ``psi[a]`` for ``a >= 1`` is the top bit of draw ``a`` of the psi stream;
    ``pi[i]`` is draw ``i - 1`` of the pi stream mapped to ``1..d``.
    """
    if n < 1 or c < 1 or d < 1:
        raise InputError(f"need n, c, d >= 1, got n={n}, c={c}, d={d}")
    psi = np.zeros(c + 1, dtype=np.uint8)
    psi[1:] = _hashing.bits(seed, _hashing.PSI, np.arange(1, c + 1))
    pi = _hashing.uniform_ints(seed, _hashing.PI, np.arange(n), d)
    return SketchModel(psi, pi, d, seed=seed)


def model_from_tables(psi, pi, d: int) -> SketchModel:
    """Wrap explicit tables; ``psi`` is indexed ``0..c``, ``pi`` is ``pi[1..n]`` in order."""
    return SketchModel(psi, pi, d, seed=None)


def serialize_model(m: SketchModel) -> bytes:
    seed = "none" if m.seed is None else str(m.seed)
    lines = [
        MAGIC,
        f"n={m.n} c={m.c} d={m.d} seed={seed}",
        "PSI " + "".join("1" if b else "0" for b in m.psi.tolist()),
        "PI " + " ".join(map(str, m.pi.tolist())),
    ]
    return ("\n".join(lines) + "\n").encode("ascii")


def _header_fields(line, keys, lineno):
    parts = line.split(" ")
    if len(parts) != len(keys):
        raise ParseError(f"expected fields {' '.join(k + '=' for k in keys)}", line=lineno)
    out = {}
    for part, key in zip(parts, keys):
        name, sep, value = part.partition("=")
        if name != key or not sep:
            raise ParseError(f"expected '{key}=', got {part!r}", line=lineno)
        out[key] = value
    return out


def _parse_int(text, what, lineno, allow_none=False):
    if allow_none and text == "none":
        return None
    if not text or not (text.isdigit() or (text[0] == "-" and text[1:].isdigit())):
        raise ParseError(f"{what} is not a decimal integer: {text!r}", line=lineno)
    return int(text)


def parse_model(data: bytes | str) -> SketchModel:
    """Parse a model file; errors name the offending line."""
    text = data.decode("ascii") if isinstance(data, (bytes, bytearray)) else data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != MAGIC:
        raise ParseError(f"bad magic, expected {MAGIC!r}", line=1)
    if len(lines) < 2:
        raise ParseError("missing parameter line", line=2)
    hdr = _header_fields(lines[1], ("n", "c", "d", "seed"), 2)
    n = _parse_int(hdr["n"], "n", 2)
    c = _parse_int(hdr["c"], "c", 2)
    d = _parse_int(hdr["d"], "d", 2)
    seed = _parse_int(hdr["seed"], "seed", 2, allow_none=True)
    if n < 1 or c < 1 or d < 1:
        raise ParseError("n, c, d must be >= 1", line=2)
    if len(lines) < 3 or not lines[2].startswith("PSI "):
        raise ParseError("missing PSI section", line=3)
    psi_text = lines[2][4:]
    if len(psi_text) != c + 1 or set(psi_text) - {"0", "1"}:
        raise ParseError(f"PSI must be {c + 1} characters of 0/1", line=3)
    if psi_text[0] != "0":
        raise ParseError("PSI entry for category 0 must be 0", line=3)
    if len(lines) < 4 or not lines[3].startswith("PI "):
        raise ParseError("missing PI section", line=4)
    fields = lines[3][3:].split(" ")
    if len(fields) != n:
        raise ParseError(f"PI has {len(fields)} entries, expected {n}", line=4)
    pi = [_parse_int(f, "PI entry", 4) for f in fields]
    bad = [k for k, v in enumerate(pi) if not 1 <= v <= d]
    if bad:
        raise ParseError(f"PI entry {bad[0] + 1} = {pi[bad[0]]} outside 1..{d}", line=4)
    if len(lines) > 4:
        raise ParseError("unexpected trailing content", line=5)
    if seed is not None and not 0 <= seed < (1 << 64):
        raise ParseError("seed outside [0, 2**64)", line=2)
    return SketchModel([int(ch) for ch in psi_text], pi, d, seed=seed)
