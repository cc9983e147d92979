import numpy as np
import pytest

from spectralsvc import DataSet, generate_blobs, generate_rings, load_dense_matrix, standardize
from spectralsvc.data import DataFormatError, save_dense_matrix


class TestLoadDenseMatrix:
    def test_plain_matrix(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2\n3,4\n")
        ds = load_dense_matrix(p)
        assert ds.n == 2 and ds.d == 2
        np.testing.assert_array_equal(ds.values, [[1, 2], [3, 4]])
        assert ds.truth_labels is None

    def test_label_column(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2,0\n3,4,1\n")
        ds = load_dense_matrix(p, has_label_column=True)
        assert ds.n == 2 and ds.d == 2
        np.testing.assert_array_equal(ds.truth_labels, [0, 1])

    def test_ragged_row_reports_row_number(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(DataFormatError, match="row 2"):
            load_dense_matrix(p)

    def test_bad_cell_reports_row_and_column(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2\n3,oops\n")
        with pytest.raises(DataFormatError, match="row 2, column 2"):
            load_dense_matrix(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("")
        with pytest.raises(DataFormatError, match="no data"):
            load_dense_matrix(p)

    def test_header_skipped(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("x,y\n1,2\n")
        ds = load_dense_matrix(p, skip_header=True)
        assert ds.n == 1

    def test_roundtrip_full_precision(self, tmp_path):
        rng = np.random.default_rng(0)
        ds = DataSet(rng.standard_normal((20, 4)) * 1e3, rng.integers(0, 3, 20))
        p = tmp_path / "rt.csv"
        save_dense_matrix(ds, p, include_labels=True)
        back = load_dense_matrix(p, has_label_column=True)
        np.testing.assert_array_equal(back.values, ds.values)
        np.testing.assert_array_equal(back.truth_labels, ds.truth_labels)


class TestDataSetInvariants:
    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="NaN"):
            DataSet(np.array([[1.0, np.nan]]))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            DataSet(np.zeros((0, 2)))

    def test_rejects_label_length_mismatch(self):
        with pytest.raises(ValueError):
            DataSet(np.zeros((3, 2)), np.array([1, 2]))

    def test_values_are_readonly(self):
        ds = DataSet(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            ds.values[0, 0] = 1.0


class TestStandardize:
    def test_two_point_column(self):
        out = standardize(DataSet(np.array([[0.0], [2.0]])))
        np.testing.assert_allclose(out.values[:, 0], [-1.0, 1.0])

    def test_constant_column_maps_to_zeros(self):
        out = standardize(DataSet(np.array([[5.0], [5.0], [5.0]])))
        np.testing.assert_array_equal(out.values[:, 0], [0.0, 0.0, 0.0])

    def test_three_point_column_against_direct_zscore(self):
        col = np.array([0.0, 1.0, 2.0])
        out = standardize(DataSet(col[:, None]))
        expected = (col - col.mean()) / col.std()
        np.testing.assert_allclose(out.values[:, 0], expected, atol=1e-15)

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        ds = DataSet(np.hstack([rng.standard_normal((50, 3)) * 7 + 2, np.ones((50, 1))]))
        once = standardize(ds)
        twice = standardize(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-12)

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            standardize(DataSet(np.ones((1, 2))))

    def test_labels_preserved(self):
        ds = DataSet(np.array([[0.0], [2.0]]), np.array([4, 9]))
        np.testing.assert_array_equal(standardize(ds).truth_labels, [4, 9])


class TestGenerateBlobs:
    def test_degenerate_spread_sits_on_center(self):
        ds = generate_blobs(3, [[1.0, -2.0]], spread=1e-12, seed=0)
        assert np.max(np.abs(ds.values - [1.0, -2.0])) < 1e-6

    def test_deterministic(self):
        a = generate_blobs(10, [[0, 0], [5, 5]], 1.0, seed=42)
        b = generate_blobs(10, [[0, 0], [5, 5]], 1.0, seed=42)
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.truth_labels, b.truth_labels)

    def test_nearest_center_recovers_labels(self):
        centers = np.array([[0.0, 0.0], [20.0, 0.0]])
        ds = generate_blobs(100, centers, 1.0, seed=1)
        d2 = ((ds.values[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        np.testing.assert_array_equal(np.argmin(d2, axis=1), ds.truth_labels)

    def test_rejects_bad_spread(self):
        with pytest.raises(ValueError, match="spread"):
            generate_blobs(3, [[0.0]], 0.0, seed=0)


class TestGenerateRings:
    def test_noiseless_points_on_circle(self):
        ds = generate_rings(4, [1.0], noise=0.0, seed=0)
        np.testing.assert_allclose(np.linalg.norm(ds.values, axis=1), 1.0, atol=1e-12)

    def test_two_rings_radii(self):
        ds = generate_rings(10, [1.0, 3.0], noise=0.0, seed=0)
        norms = np.linalg.norm(ds.values, axis=1)
        np.testing.assert_allclose(norms[ds.truth_labels == 0], 1.0, atol=1e-12)
        np.testing.assert_allclose(norms[ds.truth_labels == 1], 3.0, atol=1e-12)

    def test_deterministic(self):
        a = generate_rings(10, [1.0, 2.0], noise=0.1, seed=5)
        b = generate_rings(10, [1.0, 2.0], noise=0.1, seed=5)
        np.testing.assert_array_equal(a.values, b.values)

    def test_rejects_non_increasing_radii(self):
        with pytest.raises(ValueError, match="increasing"):
            generate_rings(5, [2.0, 1.0], noise=0.0, seed=0)
