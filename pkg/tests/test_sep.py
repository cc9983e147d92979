import numpy as np
import pytest

from spectralsvc import (
    AdjacencyParams,
    DataSet,
    DescentOptions,
    KernelParams,
    descend,
    find_seps,
    generate_rings,
    radius2,
    radius2_gradient,
    sep_svc,
    train,
)
from spectralsvc.metrics import nmi
from spectralsvc.sep import default_merge_eps, save_sep_csv

from conftest import BLOB_Q, RING_Q


@pytest.fixture(scope="module")
def symmetric_pair_model():
    return train(DataSet(np.array([[0.0, 0.0], [2.0, 0.0]])), KernelParams(q=1.0, C=1.0), tol=1e-10)


class TestDescend:
    def test_starts_at_equilibrium(self, symmetric_pair_model):
        mid = np.array([1.0, 0.0])
        landed, converged = descend(symmetric_pair_model, mid, DescentOptions())
        assert converged
        np.testing.assert_array_equal(landed, mid)

    def test_single_point_model_converges_to_training_point(self):
        target = np.array([1.5, -0.5])
        model = train(DataSet(target[None, :]), KernelParams(q=1.0, C=1.0))
        landed, converged = descend(model, np.array([3.0, 1.0]), DescentOptions())
        assert converged
        assert np.linalg.norm(landed - target) < 1e-3

    def test_f_non_increasing_along_trajectory(self, two_blob_model, two_blob_400):
        trace = []
        descend(
            two_blob_model,
            two_blob_400.values[17] + 1.0,
            DescentOptions(max_iters=100),
            on_step=lambda x, f: trace.append(float(f[0])),
        )
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))

    def test_final_f_never_exceeds_start(self, two_blob_model):
        rng = np.random.default_rng(0)
        opts = DescentOptions(max_iters=50)
        for _ in range(20):
            x0 = rng.uniform(-3, 13, size=2)
            landed, _ = descend(two_blob_model, x0, opts)
            assert radius2(two_blob_model, landed) <= radius2(two_blob_model, x0) + 1e-12

    def test_option_validation(self):
        with pytest.raises(ValueError):
            DescentOptions(shrink=1.5)
        with pytest.raises(ValueError):
            DescentOptions(step0=-1.0)
        with pytest.raises(ValueError):
            DescentOptions(grad_tol=0.0)


class TestFindSeps:
    def test_two_blobs_two_seps(self, two_blob_model, two_blob_400):
        seps = find_seps(
            two_blob_model, two_blob_400, DescentOptions(), default_merge_eps(two_blob_model)
        )
        assert seps.count == 2
        # assignment separates the blobs exactly
        truth = two_blob_400.truth_labels
        assert nmi(seps.assignment, truth) == 1.0

    def test_identical_inputs_one_sep(self, two_blob_model):
        pts = DataSet(np.tile([5.0, 0.0], (6, 1)))
        seps = find_seps(two_blob_model, pts, DescentOptions(), 1e-3)
        assert seps.count == 1

    def test_huge_merge_eps_one_sep(self, two_blob_model, two_blob_400):
        seps = find_seps(two_blob_model, two_blob_400, DescentOptions(), 1e9)
        assert seps.count == 1

    def test_sep_gradient_small(self, two_blob_model, two_blob_400):
        opts = DescentOptions()
        seps = find_seps(two_blob_model, two_blob_400, opts, default_merge_eps(two_blob_model))
        assert seps.non_converged == 0
        for p in seps.sep_points:
            assert np.linalg.norm(radius2_gradient(two_blob_model, p)) <= 10 * opts.grad_tol

    def test_sep_f_below_input_f(self, two_blob_model, two_blob_400):
        seps = find_seps(
            two_blob_model, two_blob_400, DescentOptions(), default_merge_eps(two_blob_model)
        )
        f_inputs = radius2(two_blob_model, two_blob_400.values)
        f_seps = radius2(two_blob_model, seps.sep_points)
        assert np.all(f_seps[seps.assignment] <= f_inputs + 1e-9)

    def test_sep_count_monotone_in_merge_eps(self, two_blob_model, two_blob_400):
        opts = DescentOptions()
        counts = [
            find_seps(two_blob_model, two_blob_400, opts, eps).count
            for eps in (1e-4, 1e-2, 1.0, 100.0)
        ]
        assert counts == sorted(counts, reverse=True)

    def test_sep_pairwise_distances_respect_merge_eps(self, two_blob_model, two_blob_400):
        eps = default_merge_eps(two_blob_model)
        seps = find_seps(two_blob_model, two_blob_400, DescentOptions(), eps)
        d = np.linalg.norm(seps.sep_points[0] - seps.sep_points[1])
        assert d >= eps

    def test_deterministic(self, two_blob_model, two_blob_400):
        opts = DescentOptions()
        a = find_seps(two_blob_model, two_blob_400, opts, 0.05)
        b = find_seps(two_blob_model, two_blob_400, opts, 0.05)
        np.testing.assert_array_equal(a.sep_points, b.sep_points)
        np.testing.assert_array_equal(a.assignment, b.assignment)

    def test_rejects_bad_merge_eps(self, two_blob_model, two_blob_400):
        with pytest.raises(ValueError):
            find_seps(two_blob_model, two_blob_400, DescentOptions(), 0.0)


class TestSepSvc:
    def test_two_blobs_percent_match(self, two_blob_model, two_blob_400):
        labels = sep_svc(
            two_blob_model,
            two_blob_400,
            DescentOptions(),
            default_merge_eps(two_blob_model),
            AdjacencyParams(),
        )
        assert nmi(labels, two_blob_400.truth_labels) == 1.0

    def test_never_emits_outliers(self, two_blob_400):
        # C small enough to create genuine BSVs
        model = train(two_blob_400, KernelParams(q=BLOB_Q, C=0.02), tol=1e-6)
        labels = sep_svc(
            model, two_blob_400, DescentOptions(), default_merge_eps(model), AdjacencyParams()
        )
        assert np.all(labels >= 0)
        assert nmi(labels, two_blob_400.truth_labels) == 1.0

    def test_one_sep_single_cluster(self, two_blob_model, two_blob_400):
        labels = sep_svc(
            two_blob_model, two_blob_400, DescentOptions(), 1e9, AdjacencyParams()
        )
        assert set(labels.tolist()) == {0}

    def test_rings(self):
        rings = generate_rings(150, [1.0, 3.0], noise=0.05, seed=11)
        model = train(rings, KernelParams(q=RING_Q, C=1.0), tol=1e-6)
        labels = sep_svc(
            model, rings, DescentOptions(), default_merge_eps(model), AdjacencyParams()
        )
        assert nmi(labels, rings.truth_labels) == 1.0


def test_sep_csv_dump(tmp_path, two_blob_model, two_blob_400):
    seps = find_seps(
        two_blob_model, two_blob_400, DescentOptions(), default_merge_eps(two_blob_model)
    )
    pts, asg = tmp_path / "sep.csv", tmp_path / "assign.csv"
    save_sep_csv(seps, pts, asg)
    np.testing.assert_allclose(np.loadtxt(pts, delimiter=","), seps.sep_points)
    np.testing.assert_array_equal(np.loadtxt(asg, dtype=int), seps.assignment)
