import io

import numpy as np
import pytest

from catsketch import evaluation as ev
from catsketch.core import CategoricalVector, hamming_distance, pairwise_hamming
from catsketch.dataio import synthetic_corpus
from catsketch.errors import InputError


@pytest.fixture(scope="module")
def corpus():
    return synthetic_corpus(60, 400, 10, 60, mean_density=30, seed=11)


def offset_estimator(k):
    def est(ds, left, right):
        return ev.exact_pair_distances(ds, left, right) + k
    return est


def test_hamming_error_signs():
    u = CategoricalVector.from_dense([1, 2, 0, 3, 0, 0, 0, 0, 0, 0, 0, 0])
    v = CategoricalVector.from_dense([0, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1])
    assert hamming_distance(u, v) == 11
    assert ev.hamming_error(u, v, 11) == 0
    w = CategoricalVector.from_dense([1, 2, 0, 3, 1, 1, 1, 1, 1, 1, 1, 1])
    assert ev.hamming_error(u, w, 12.5) == hamming_distance(u, w) - 12.5 == -4.5


class TestSelectPairs:
    def test_all_pairs(self):
        left, right = ev.select_pairs(5)
        assert list(zip(left.tolist(), right.tolist())) == [(i, j) for i in range(5) for j in range(i + 1, 5)]

    def test_budget_sample_is_valid_and_seeded(self):
        left, right = ev.select_pairs(300, budget=1000, seed=4)
        assert left.size == 1000
        assert np.all(left < right) and np.all(right < 300)
        assert len(set(zip(left.tolist(), right.tolist()))) == 1000
        l2, r2 = ev.select_pairs(300, budget=1000, seed=4)
        assert np.array_equal(left, l2) and np.array_equal(right, r2)

    def test_unranking_is_exact(self):
        m = 2001
        left, right = ev.select_pairs(m, budget=50_000, seed=1)
        rank = left * (2 * m - left - 1) // 2 + (right - left - 1)
        assert np.all(np.diff(rank) > 0)

    def test_needs_two_points(self):
        with pytest.raises(InputError):
            ev.select_pairs(1)


class TestErrorStatistics:
    def test_exact_estimator(self, corpus):
        assert ev.rmse(corpus, ev.ExactEstimator()) == 0.0
        assert ev.mae(corpus, ev.ExactEstimator()) == 0.0

    def test_constant_offset(self, corpus):
        assert ev.rmse(corpus, offset_estimator(3)) == pytest.approx(3.0)
        assert ev.mae(corpus, offset_estimator(-2)) == pytest.approx(2.0)
        report = ev.evaluate(corpus, offset_estimator(3))
        assert report.mean_error == pytest.approx(-3.0)
        assert report.variance == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("method", ["cabin", "FH", "SH", "HLSH"])
    def test_report_inequalities(self, corpus, method):
        r = ev.evaluate(corpus, ev.make_estimator(method, 64, 2))
        assert r.rmse + 1e-12 >= r.mae >= abs(r.mean_error) - 1e-12
        assert list(r.quantiles) == sorted(r.quantiles)
        assert r.pairs == 60 * 59 // 2

    def test_sampled_pairs(self, corpus):
        r = ev.evaluate(corpus, ev.make_estimator("cabin", 64, 2), pair_budget=100, seed=3)
        assert r.pairs == 100

    def test_exact_pair_distances_chunked(self):
        ds = synthetic_corpus(2100, 300, 5, 20, mean_density=8, seed=2)
        left, right = ev.select_pairs(len(ds), budget=3000, seed=0)
        got = ev.exact_pair_distances(ds, left, right, chunk=512)
        want = [hamming_distance(ds[i], ds[j]) for i, j in zip(left.tolist(), right.tolist())]
        assert got.tolist() == want

    def test_unknown_method(self):
        with pytest.raises(InputError):
            ev.make_estimator("minhash", 10)

    def test_report_serialisation(self, corpus):
        r = ev.evaluate(corpus, ev.make_estimator("cabin", 64, 2))
        block = r.to_block(timings=False)
        assert block.splitlines()[0] == "method=cabin"
        assert "sketch_ms" not in block
        assert ev.EvalReport.csv_header(False).count(",") == r.to_csv_row(False).count(",")

    def test_sweep_deterministic(self, corpus):
        a = [r.to_csv_row(False) for r in ev.sweep(corpus, "cabin", [32, 64], seed=5)]
        b = [r.to_csv_row(False) for r in ev.sweep(corpus, "cabin", [32, 64], seed=5, workers=4)]
        assert a == b


class TestHeatmap:
    def test_single_zero(self):
        text, pgm = ev.heatmap(np.zeros((1, 1)))
        assert text == "0\n"
        assert pgm == b"P5\n1 1\n255\n\x00"

    def test_constant_matrix_is_black(self):
        _, pgm = ev.heatmap(np.full((3, 3), 7.0))
        assert pgm.endswith(b"\x00" * 9)

    def test_scaling_and_rounding(self):
        m = np.array([[0.0, 1.0], [1.0, 2.0]])
        _, pgm = ev.heatmap(m)
        # 127.5 rounds half to even
        assert pgm[-4:] == bytes([0, 128, 128, 255])

    def test_csv_digits(self):
        text, _ = ev.heatmap(np.array([[0.0, 1 / 3], [1 / 3, 0.0]]))
        assert text == "0,0.333333\n0.333333,0\n"

    def test_non_square(self):
        with pytest.raises(InputError):
            ev.heatmap(np.zeros((2, 3)))

    def test_writes_streams(self):
        c, p = io.StringIO(), io.BytesIO()
        ev.heatmap(np.eye(2), c, p)
        assert c.getvalue() and p.getvalue().startswith(b"P5")

    def test_exact_matrix(self, corpus):
        assert np.array_equal(ev.estimate_matrix(corpus, "exact", 0), pairwise_hamming(corpus))


class TestTrials:
    def pair(self, n=2000, hd=100, c=500, seed=0):
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(n, 200, replace=False)) + 1
        lab = rng.integers(1, c + 1, 200)
        u = CategoricalVector(n, idx[:160], lab[:160])
        v = CategoricalVector(n, np.concatenate([idx[:100], idx[160:]]), np.concatenate([lab[:100], lab[160:]]))
        assert hamming_distance(u, v) == hd
        return u, v

    def test_exact_method_all_zero(self):
        u, v = self.pair()
        r = ev.trial_statistics(u, v, "exact", 100, trials=10)
        assert r.quantiles == (0.0,) * 5

    def test_binem_stage_consistent(self):
        u, v = self.pair()
        r = ev.trial_statistics(u, v, "cabin", 100, trials=500, seed=1, stage="binem")
        assert r.mae <= 2 * np.sqrt(100)

    def test_centered(self):
        u, v = self.pair()
        r = ev.trial_statistics(u, v, "cabin", 1000, trials=1000, seed=2)
        assert abs(r.mean_error) <= 4 * np.sqrt(r.variance / 1000) + 1.0

    def test_variance_shrinks_with_d(self):
        u, v = self.pair()
        small = ev.trial_statistics(u, v, "cabin", 500, trials=400, seed=3)
        large = ev.trial_statistics(u, v, "cabin", 2000, trials=400, seed=3)
        assert large.variance < small.variance

    def test_baseline_trials(self):
        u, v = self.pair()
        r = ev.trial_statistics(u, v, "hlsh", 500, trials=50, seed=3)
        assert r.method == "HLSH" and r.pairs == 50

    def test_rejects_bad_args(self):
        u, v = self.pair()
        with pytest.raises(InputError):
            ev.trial_statistics(u, v, "cabin", 10, trials=1)
        with pytest.raises(InputError):
            ev.trial_statistics(u, v, "FH", 10, trials=5, stage="binem")

    def test_all_pairs(self, corpus):
        r = ev.all_pairs_trials(corpus.subset(range(15)), "cabin", 64, trials=5, seed=1)
        assert r.pairs == 5 and r.method == "cabin-allpairs"
        b = ev.all_pairs_trials(corpus.subset(range(15)), "cabin", 64, trials=5, seed=1, stage="binem")
        assert b.method == "cabin-binem-allpairs"
