import numpy as np
import pytest
from hypothesis import given, strategies as st

from evorules.data import (
    BoundsSpec,
    Dataset,
    denormalize,
    load_dataset_csv,
    normalize,
    save_dataset_csv,
    split_dataset,
)


def make_dataset(n, dx=2, da=1, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(
        rng.uniform(-1, 1, (n, dx)),
        rng.uniform(-1, 1, (n, da)),
        rng.normal(size=n),
    )


class TestNormalize:
    def test_midpoint_maps_to_center(self):
        assert normalize([0.5], [[0.0, 1.0]])[0] == 0.0

    def test_lower_bound_maps_to_minus_one(self):
        assert normalize([0.0], [[0.0, 1.0]])[0] == -1.0

    def test_affine_map(self):
        # direct evaluation: 2*(0.75-0.5)/0.5 - 1 = 0
        assert normalize([0.75], [[0.5, 1.0]])[0] == pytest.approx(0.0, abs=1e-15)

    def test_out_of_range_names_dimension(self):
        with pytest.raises(ValueError, match="component 1"):
            normalize([0.5, 3.0], [[0, 1], [0, 2]])

    def test_batch_rows(self):
        out = normalize([[0.0, 2.0], [1.0, 0.0]], [[0, 1], [0, 2]])
        np.testing.assert_allclose(out, [[-1.0, 1.0], [1.0, -1.0]])


class TestDenormalize:
    def test_center(self):
        assert denormalize([0.0], [[0.0, 1.0]])[0] == 0.5

    def test_upper_bound(self):
        assert denormalize([1.0], [[-3.0, 7.0]])[0] == 7.0

    def test_inverse_affine(self):
        # 0 + (-0.5 + 1) * 4 / 2 = 1
        assert denormalize([-0.5], [[0.0, 4.0]])[0] == pytest.approx(1.0, abs=1e-15)

    def test_out_of_range(self):
        with pytest.raises(ValueError, match="outside"):
            denormalize([1.5], [[0, 1]])


@given(
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=6),
    st.floats(min_value=-100, max_value=100),
    st.floats(min_value=1e-3, max_value=200),
)
def test_normalization_round_trip(fractions, low, span):
    bounds = np.array([[low, low + span]] * len(fractions))
    raw = np.array([low + f * span for f in fractions])
    back = denormalize(normalize(raw, bounds), bounds)
    np.testing.assert_allclose(back, raw, rtol=1e-12, atol=1e-12 * span)


class TestBoundsSpec:
    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError, match="low < high"):
            BoundsSpec([[1.0, 0.0]], [[0.0, 1.0]])

    def test_dimensions(self):
        spec = BoundsSpec([[0, 1], [0, 2]], [[0, 1]])
        assert spec.dx == 2 and spec.da == 1


class TestDataset:
    def test_rejects_out_of_range_situations(self):
        with pytest.raises(ValueError, match="situation"):
            Dataset(np.array([[1.5]]), np.array([[0.0]]), np.array([1.0]))

    def test_rejects_non_finite_quality(self):
        with pytest.raises(ValueError, match="finite"):
            Dataset(np.array([[0.5]]), np.array([[0.0]]), np.array([np.inf]))

    def test_example_access(self):
        data = make_dataset(5)
        ex = data.example(2)
        np.testing.assert_array_equal(ex.x, data.X[2])
        assert ex.q == data.q[2]


class TestSplitDataset:
    def test_half_split_100(self):
        data = make_dataset(100)
        train, valid = split_dataset(data, 0.5, np.random.default_rng(0))
        assert len(train) == 50 and len(valid) == 50

    def test_half_split_2000(self):
        data = make_dataset(2000)
        train, valid = split_dataset(data, 0.5, np.random.default_rng(0))
        assert len(train) == 1000 and len(valid) == 1000

    def test_empty_side_rejected(self):
        data = make_dataset(10)
        with pytest.raises(ValueError, match="empty side"):
            split_dataset(data, 0.04, np.random.default_rng(0))

    def test_partition_property(self):
        data = make_dataset(37)
        train, valid = split_dataset(data, 0.3, np.random.default_rng(5))
        assert len(train) + len(valid) == 37
        combined = np.vstack([train.X, valid.X])
        assert {tuple(r) for r in combined} == {tuple(r) for r in data.X}

    def test_deterministic_given_seed(self):
        data = make_dataset(40)
        a = split_dataset(data, 0.5, np.random.default_rng(9))
        b = split_dataset(data, 0.5, np.random.default_rng(9))
        np.testing.assert_array_equal(a[0].X, b[0].X)
        np.testing.assert_array_equal(a[1].q, b[1].q)


class TestCsvRoundTrip:
    def test_round_trip_lossless(self, tmp_path):
        data = make_dataset(17, dx=3, da=2)
        path = tmp_path / "data.csv"
        save_dataset_csv(data, path)
        back = load_dataset_csv(path)
        assert back.dx == 3 and back.da == 2
        np.testing.assert_array_equal(back.X, data.X)
        np.testing.assert_array_equal(back.A, data.A)
        np.testing.assert_array_equal(back.q, data.q)

    def test_header_format(self, tmp_path):
        data = make_dataset(2, dx=2, da=2)
        path = tmp_path / "data.csv"
        save_dataset_csv(data, path)
        header = path.read_text().splitlines()[0]
        assert header == "x1,x2,a1,a2,q"

    def test_rejects_malformed_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("foo,bar\n1,2\n")
        with pytest.raises(ValueError, match="header"):
            load_dataset_csv(path)
