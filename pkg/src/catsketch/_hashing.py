"""Counter-based randomness.

Every random table in the package is a pure function of ``(seed, stream,
counter)``.  A stream key is derived from the seed with the SplitMix64
finalizer, and draw ``k`` is the ``k``-th SplitMix64 output for that key::

    key    = mix(mix(seed) ^ stream)
    draw_k = mix(key + (k + 1) * 0x9E3779B97F4A7C15 mod 2**64)

Uniform integers in ``1..d`` take the top 32 bits ``h`` of a draw and return
``1 + (h * d) >> 32`` (bias below ``d / 2**32``).  Bits are the top bit of a
draw.  Nothing here depends on generation order, so tables can be produced in
any chunking and still agree bit for bit.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB

# stream identifiers; never renumber, files depend on them
PSI = 1
PI = 2
FH_BUCKET = 3
FH_SIGN = 4
SIMHASH = 5
HLSH = 6
TRIAL = 7
SAMPLE = 8


def mix64(x):
    """SplitMix64 finalizer on a Python int."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _C1) & MASK64
    x = ((x ^ (x >> 27)) * _C2) & MASK64
    return x ^ (x >> 31)


def check_seed(seed):
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def stream_key(seed, stream):
    return mix64(mix64(check_seed(seed)) ^ stream)


def draws(seed, stream, counters):
    """Raw 64-bit draws for an array of non-negative counters."""
    key = np.uint64(stream_key(seed, stream))
    k = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = key + (k + np.uint64(1)) * np.uint64(GOLDEN)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_C1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_C2)
    return x ^ (x >> np.uint64(31))


def uniform_ints(seed, stream, counters, d):
    """Draws mapped to ``1..d`` (``d < 2**32``)."""
    if not 1 <= d < (1 << 32):
        raise ValueError(f"range size must lie in [1, 2**32), got {d}")
    hi = draws(seed, stream, counters) >> np.uint64(32)
    with np.errstate(over="ignore"):
        return ((hi * np.uint64(d)) >> np.uint64(32)).astype(np.int64) + 1


def bits(seed, stream, counters):
    """Fair bits (0/1 as uint8)."""
    return (draws(seed, stream, counters) >> np.uint64(63)).astype(np.uint8)


def derive_seed(seed, stream, index):
    """Child seed for trial ``index``; used to give each trial fresh tables."""
    return int(draws(seed, stream, [index])[0])
