import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from catsketch.cabin import SketchSet, cabin, sketch_dataset
from catsketch.cham import (ZERO_FLOOR, cham, cham_values, estimate_binary_hamming, estimate_cardinality,
                            hamming_from_stats, pair_estimates, pairwise_estimates)
from catsketch.core import BinaryVector, CategoricalVector, Dataset, hamming_distance
from catsketch.errors import InputError
from catsketch.model import build_model


class TestCardinality:
    def test_empty(self):
        assert estimate_cardinality(0, 64) == 0.0

    def test_one_of_four(self):
        assert estimate_cardinality(1, 4) == 1.0

    @pytest.mark.parametrize("d", [64, 1024])
    def test_mean_value_exact(self, d):
        D = 1 - 1 / d
        for a in range(1, d // 2 + 1):
            assert abs(estimate_cardinality(d * (1 - D ** a), d) - a) <= 1e-9

    def test_full_sketch_is_finite(self):
        v = estimate_cardinality(16, 16)
        assert math.isfinite(v)
        assert v == pytest.approx(math.log(ZERO_FLOOR / 16) / math.log(1 - 1 / 16))

    def test_rejects_bad_inputs(self):
        with pytest.raises(InputError):
            estimate_cardinality(5, 4)
        with pytest.raises(InputError):
            estimate_cardinality(0, 1)


class TestBinaryHamming:
    def test_identical_sketches_zero(self):
        a = BinaryVector.from_bits([1, 0, 1, 1, 0, 0, 1, 0])
        est = estimate_binary_hamming(a, a, 8)
        assert est.value == 0.0

    def test_four_bit_example(self):
        est = estimate_binary_hamming(BinaryVector.from_bits([1, 0, 0, 0]), BinaryVector.from_bits([0, 1, 0, 0]), 4)
        union = math.log(0.5) / math.log(0.75)
        assert union == pytest.approx(2.4094, abs=1e-4)
        assert est.value == pytest.approx(2 * union - 2, abs=1e-12)
        assert est.value == pytest.approx(2.8188, abs=1e-4)
        assert not est.saturated

    @pytest.mark.parametrize("d", [64, 1024])
    def test_mean_value_exact(self, d):
        D = 1 - 1 / d
        rng = np.random.default_rng(d)
        for _ in range(300):
            a, b = rng.integers(0, d // 2 + 1, size=2)
            w = int(rng.integers(0, min(a, b) + 1))
            wu, wv = d * (1 - D ** a), d * (1 - D ** b)
            z00 = d * D ** (a + b - w)
            inner = z00 - d + wu + wv
            est = hamming_from_stats(wu, wv, inner, d)
            assert abs(est.value - (a + b - 2 * w)) <= 1e-9

    def test_inconsistent_stats(self):
        with pytest.raises(InputError):
            hamming_from_stats(2, 2, 3, 8)

    def test_saturation_flag(self):
        full = BinaryVector.from_bits([1] * 8)
        assert estimate_binary_hamming(full, BinaryVector.zeros(8), 8).saturated


class TestCham:
    def test_doubles(self):
        m = build_model(4, 1, 4, 0)
        est = cham(BinaryVector.from_bits([1, 0, 0, 0]), BinaryVector.from_bits([0, 1, 0, 0]), m)
        assert est.value == pytest.approx(5.6376, abs=1e-4)

    def test_identical(self):
        m = build_model(30, 3, 16, 1)
        s = cabin(CategoricalVector.from_dense([1, 2, 3] * 10), m)
        assert cham(s, s, m).value == 0.0

    @settings(max_examples=100)
    @given(st.integers(2, 40).flatmap(
        lambda d: st.tuples(st.just(d), st.lists(st.booleans(), min_size=d, max_size=d),
                            st.lists(st.booleans(), min_size=d, max_size=d))))
    def test_matches_reference_and_symmetric(self, case):
        d, x, y = case
        a, b = BinaryVector.from_bits([int(v) for v in x]), BinaryVector.from_bits([int(v) for v in y])
        m = build_model(1, 1, d, 0)
        got = cham(a, b, m).value
        assert got == pytest.approx(oracles.cham([int(v) for v in x], [int(v) for v in y], d), abs=1e-9)
        assert got == cham(b, a, m).value
        assert got >= 0

    def test_unbiased_over_models(self):
        # HD = 400 with disjoint supports of density 400 would give 800; mix agreement in
        rng = np.random.default_rng(4)
        n, c, d = 10_000, 1000, 2000
        idx = np.sort(rng.choice(n, 600, replace=False)) + 1
        u_idx, v_idx = idx[:400], np.concatenate([idx[:200], idx[400:]])
        labels = rng.integers(1, c + 1, size=600)
        u = CategoricalVector(n, u_idx, labels[:400])
        v_lab = np.concatenate([labels[:200], labels[400:]])
        v = CategoricalVector(n, np.sort(v_idx), v_lab[np.argsort(v_idx)])
        hd = hamming_distance(u, v)
        assert hd == 400
        vals = []
        for s in range(1000):
            m = build_model(n, c, d, s)
            vals.append(cham(cabin(u, m), cabin(v, m), m).value)
        assert abs(np.mean(vals) - hd) <= 0.02 * hd


class TestBatch:
    def make(self):
        rng = np.random.default_rng(3)
        n, c = 400, 20
        rows = [rng.integers(0, c + 1, n) * (rng.random(n) < 0.15) for _ in range(60)]
        rows.append(rows[0].copy())
        ds = Dataset([CategoricalVector.from_dense(r) for r in rows], dim=n, categories=c)
        m = build_model(n, c, 128, 8)
        return sketch_dataset(ds, m), m

    def test_pairwise_matches_single(self):
        s, m = self.make()
        mat = pairwise_estimates(s, block=7)
        assert np.allclose(mat, mat.T)
        assert np.all(np.diag(mat) == 0)
        for i, j in [(0, 1), (5, 40), (12, 59)]:
            assert mat[i, j] == pytest.approx(cham(s[i], s[j], m).value, abs=1e-9)
        assert mat[0, 60] == 0.0

    def test_pair_estimates(self):
        s, m = self.make()
        left, right = np.triu_indices(len(s), 1)
        assert np.allclose(pair_estimates(s, left, right), pairwise_estimates(s)[left, right], atol=1e-9)

    def test_single_row(self):
        s = SketchSet(np.zeros((1, 1), np.uint8), 8)
        assert pairwise_estimates(s).tolist() == [[0.0]]

    def test_vectorised_flag(self):
        vals, sat = cham_values([8, 0], [0, 0], [0, 0], 8)
        assert sat.tolist() == [True, False]
        assert vals[1] == 0.0
