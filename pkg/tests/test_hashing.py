import numpy as np
import pytest

from catsketch import _hashing


def test_mix64_reference_values():
    # SplitMix64 outputs for state increments of the golden gamma from 0
    state = 0
    outs = []
    for _ in range(3):
        state = (state + _hashing.GOLDEN) & _hashing.MASK64
        outs.append(_hashing.mix64(state))
    assert outs == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_vector_draws_match_scalar_mix():
    key = _hashing.stream_key(42, _hashing.PI)
    want = [_hashing.mix64(key + (k + 1) * _hashing.GOLDEN) for k in range(5)]
    assert _hashing.draws(42, _hashing.PI, np.arange(5)).tolist() == want


def test_draws_are_order_independent():
    a = _hashing.draws(7, 3, np.arange(100))
    b = _hashing.draws(7, 3, np.arange(100)[::-1])[::-1]
    assert np.array_equal(a, b)


def test_streams_differ():
    assert not np.array_equal(_hashing.draws(1, 1, np.arange(8)), _hashing.draws(1, 2, np.arange(8)))


def test_uniform_ints_range():
    v = _hashing.uniform_ints(5, 2, np.arange(10_000), 7)
    assert v.min() == 1 and v.max() == 7


def test_seed_validation():
    with pytest.raises(ValueError):
        _hashing.check_seed(-1)
    with pytest.raises(ValueError):
        _hashing.check_seed(2 ** 64)
    with pytest.raises(TypeError):
        _hashing.check_seed(1.5)
    assert _hashing.check_seed(2 ** 64 - 1) == 2 ** 64 - 1


def test_derived_seeds_distinct():
    seeds = {_hashing.derive_seed(3, _hashing.TRIAL, t) for t in range(1000)}
    assert len(seeds) == 1000
