import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from catsketch.cabin import SketchSet, bin_em, bin_sketch, cabin, sketch_dataset
from catsketch.core import BinaryVector, CategoricalVector, Dataset
from catsketch.errors import InputError
from catsketch.model import build_model, model_from_tables

FIG_PSI = [0, 1, 0, 0, 1]
FIG_PI = [5, 6, 1, 5, 6, 2, 6, 1, 3, 3, 4, 4, 2, 1]
FIG_U = [4, 0, 2, 0, 0, 1, 0, 2, 0, 0, 3, 1, 0, 4]


@pytest.fixture
def fig_model():
    return model_from_tables(FIG_PSI, FIG_PI, 6)


def test_figure_embedding(fig_model):
    assert bin_em(CategoricalVector.from_dense(FIG_U), fig_model).positions() == [1, 6, 12, 14]


def test_figure_binning(fig_model):
    out = bin_sketch(BinaryVector.from_positions(14, [1, 6, 12, 14]), fig_model)
    assert out.positions() == [1, 2, 4, 5]


def test_figure_pipeline(fig_model):
    s = cabin(CategoricalVector.from_dense(FIG_U), fig_model)
    assert s.to_bits().tolist() == [1, 1, 0, 1, 1, 0]
    assert s.hex() == "1b"


def test_collision_sets_one_bit(fig_model):
    assert bin_sketch(BinaryVector.from_positions(14, [1, 4]), fig_model).positions() == [5]


def test_zero_vector(fig_model):
    zero = CategoricalVector(14)
    assert bin_em(zero, fig_model).weight == 0
    assert cabin(zero, fig_model).weight == 0
    assert bin_sketch(BinaryVector.zeros(14), fig_model).weight == 0


def test_all_labels_mapped_to_one_keeps_density(fig_model):
    u = CategoricalVector.from_dense([1, 4, 0, 1, 0, 0, 4, 0, 0, 0, 0, 0, 0, 1])
    assert bin_em(u, fig_model).weight == u.density


def test_label_above_c_rejected(fig_model):
    with pytest.raises(InputError):
        cabin(CategoricalVector.from_dense([5] + [0] * 13), fig_model)


def test_dimension_mismatch(fig_model):
    with pytest.raises(InputError):
        cabin(CategoricalVector(13), fig_model)


@st.composite
def vector_and_model(draw):
    n = draw(st.integers(1, 40))
    c = draw(st.integers(1, 6))
    d = draw(st.integers(1, 20))
    u = draw(st.lists(st.integers(0, c), min_size=n, max_size=n))
    return u, build_model(n, c, d, draw(st.integers(0, 2 ** 64 - 1)))


@settings(max_examples=200)
@given(vector_and_model())
def test_matches_reference(case):
    u, m = case
    cu = CategoricalVector.from_dense(u)
    psi, pi = m.psi.tolist(), m.pi.tolist()
    assert bin_em(cu, m).to_bits().tolist() == oracles.bin_em(u, psi)
    assert cabin(cu, m).to_bits().tolist() == oracles.cabin(u, psi, pi, m.d)
    assert cabin(cu, m) == bin_sketch(bin_em(cu, m), m)


@settings(max_examples=100)
@given(vector_and_model())
def test_weight_bounds(case):
    u, m = case
    cu = CategoricalVector.from_dense(u)
    emb = bin_em(cu, m)
    assert emb.weight <= cu.density
    assert cabin(cu, m).weight <= min(emb.weight, m.d)


def test_fused_equals_two_stage_random_models():
    rng = np.random.default_rng(1)
    for trial in range(1000):
        n, c, d = rng.integers(1, 60), rng.integers(1, 8), rng.integers(1, 30)
        m = build_model(int(n), int(c), int(d), trial)
        u = CategoricalVector.from_dense(rng.integers(0, c + 1, size=n) * (rng.random(n) < 0.4))
        assert cabin(u, m) == bin_sketch(bin_em(u, m), m)


class TestSketchDataset:
    def make(self, rows=700, n=300, c=9, seed=0):
        rng = np.random.default_rng(seed)
        pts = [CategoricalVector.from_dense(rng.integers(0, c + 1, n) * (rng.random(n) < 0.1)) for _ in range(rows)]
        return Dataset(pts, dim=n, categories=c)

    def test_rows_match_single_sketches(self):
        ds = self.make(rows=50)
        m = build_model(ds.dim, ds.categories, 64, 5)
        s = sketch_dataset(ds, m)
        assert len(s) == 50
        for k in range(50):
            assert s[k] == cabin(ds[k], m)

    def test_workers_do_not_change_bytes(self):
        ds = self.make()
        m = build_model(ds.dim, ds.categories, 100, 2)
        one = sketch_dataset(ds, m, workers=1)
        eight = sketch_dataset(ds, m, workers=8, block=37)
        assert one == eight
        assert one.packed.tobytes() == eight.packed.tobytes()

    def test_empty_dataset(self):
        m = build_model(5, 2, 8, 0)
        s = sketch_dataset(Dataset([], dim=5), m)
        assert len(s) == 0 and s.d == 8

    def test_bad_label_names_row(self):
        m = build_model(4, 2, 8, 0)
        ds = Dataset([CategoricalVector.from_dense([1, 0, 0, 0]), CategoricalVector.from_dense([0, 3, 0, 0])])
        with pytest.raises(InputError, match="row 1"):
            sketch_dataset(ds, m)

    def test_sketch_set_accessors(self):
        rows = [BinaryVector.from_bits([1, 0, 1]), BinaryVector.from_bits([0, 0, 1])]
        s = SketchSet.from_rows(rows, 3, seed=4)
        assert s.bits().tolist() == [[1, 0, 1], [0, 0, 1]]
        assert s.weights().tolist() == [2, 1]
        assert s.rows == rows
