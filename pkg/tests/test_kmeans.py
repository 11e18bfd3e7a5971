import numpy as np
import pytest

from ginilearn import (ConfigError, DataMatrix, MetricSpec, kmeans_fit, kmeans_predict,
                       kmeanspp_init, select_nu_silhouette)
from ginilearn.kmeans import default_nu_grid
from ginilearn.metrics import pairwise_dissimilarity
from ginilearn.ranks import build_rank_context, interpolated_insertion_ranks

from conftest import two_blobs

EUCLID = MetricSpec("euclidean")


class TestKmeansPP:
    def test_k_one_is_a_data_row(self):
        data = two_blobs(n_per_blob=5)
        c = kmeanspp_init(data, 1, EUCLID, seed=3)
        assert c.shape == (1, 2)
        assert any(np.array_equal(c[0], row) for row in data.values)

    def test_k_equals_rows_selects_every_row(self):
        rng = np.random.default_rng(0)
        values = rng.normal(size=(6, 2))
        c = kmeanspp_init(DataMatrix(values), 6, EUCLID, seed=1)
        got = sorted(map(tuple, c))
        want = sorted(map(tuple, values))
        assert got == want

    def test_duplicate_rows_still_exhaust(self):
        values = np.array([[0.0, 0.0]] * 3 + [[1.0, 1.0]] * 3)
        c = kmeanspp_init(DataMatrix(values), 6, EUCLID, seed=2)
        assert c.shape == (6, 2)

    def test_second_centroid_lands_in_opposite_blob(self):
        data = two_blobs(n_per_blob=20, separation=100.0, spread=1.0)
        hits = 0
        for seed in range(200):
            c = kmeanspp_init(data, 2, EUCLID, seed=seed)
            blob = c[:, 0] > 50.0
            hits += blob[0] != blob[1]
        assert hits / 200 >= 0.95

    def test_gini_spec_seeding_works(self):
        data = two_blobs(n_per_blob=10)
        c = kmeanspp_init(data, 2, MetricSpec("gini-gen", nu=2.5), seed=7)
        assert c.shape == (2, 2)

    def test_k_out_of_range(self):
        data = two_blobs(n_per_blob=3)
        with pytest.raises(ConfigError):
            kmeanspp_init(data, 7, EUCLID, seed=0)
        with pytest.raises(ConfigError):
            kmeanspp_init(data, 0, EUCLID, seed=0)

    def test_deterministic_per_seed(self):
        data = two_blobs(n_per_blob=10)
        a = kmeanspp_init(data, 3, EUCLID, seed=11)
        b = kmeanspp_init(data, 3, EUCLID, seed=11)
        assert np.array_equal(a, b)


class TestFit:
    def test_k_one_single_effective_iteration(self):
        rng = np.random.default_rng(1)
        values = rng.normal(size=(12, 3))
        init = kmeanspp_init(DataMatrix(values), 1, EUCLID, seed=0)
        model = kmeans_fit(values, 1, EUCLID, init)
        assert np.allclose(model.centroids[0], values.mean(axis=0))
        assert model.iterations == 1
        assert model.converged

    def test_two_blobs_partition(self):
        data = two_blobs(n_per_blob=20, separation=50.0)
        init = kmeanspp_init(data, 2, EUCLID, seed=4)
        model = kmeans_fit(data.without_labels(), 2, EUCLID, init)
        # clusters coincide with blobs (up to label swap)
        agreement = (model.labels == data.labels).mean()
        assert agreement in (0.0, 1.0)
        assert model.converged

    def test_gini_two_blobs_partition(self):
        data = two_blobs(n_per_blob=15, separation=80.0)
        for nu in (0.5, 2.0, 3.0):
            spec = MetricSpec("gini-gen", nu=nu)
            init = kmeanspp_init(data, 2, spec, seed=5)
            model = kmeans_fit(data.without_labels(), 2, spec, init)
            agreement = (model.labels == data.labels).mean()
            assert agreement in (0.0, 1.0), nu

    def test_objective_trace_has_initial_entry(self):
        data = two_blobs(n_per_blob=8)
        init = kmeanspp_init(data, 2, EUCLID, seed=6)
        model = kmeans_fit(data.without_labels(), 2, EUCLID, init)
        assert len(model.objective_trace) == model.iterations + 1

    def test_euclidean_trace_non_increasing(self):
        # for the plain squared-euclidean prametric structure the classic
        # monotonicity argument holds; check it on random data
        rng = np.random.default_rng(2)
        for trial in range(10):
            values = rng.normal(size=(40, 3))
            data = DataMatrix(values)
            init = kmeanspp_init(data, 4, EUCLID, seed=trial)
            model = kmeans_fit(values, 4, EUCLID, init)
            diffs = np.diff(model.objective_trace)
            assert np.all(diffs <= 1e-9)

    def test_termination_bounded_by_max_iter(self):
        rng = np.random.default_rng(3)
        values = rng.normal(size=(30, 2))
        init = kmeanspp_init(DataMatrix(values), 5, EUCLID, seed=0)
        model = kmeans_fit(values, 5, EUCLID, init, max_iter=2)
        assert model.iterations <= 2

    def test_empty_cluster_reseeded(self):
        # second init row far from every point: its cluster starts empty
        values = np.vstack([np.zeros((5, 2)), np.ones((5, 2))])
        init = np.array([[0.5, 0.5], [500.0, 500.0]])
        model = kmeans_fit(values, 2, EUCLID, init)
        assert np.bincount(model.labels, minlength=2).min() >= 1

    def test_determinism(self):
        data = two_blobs(n_per_blob=10, separation=5.0)
        spec = MetricSpec("gini-gen", nu=1.5)
        init = kmeanspp_init(data, 2, spec, seed=9)
        a = kmeans_fit(data.without_labels(), 2, spec, init)
        b = kmeans_fit(data.without_labels(), 2, spec, init)
        assert np.array_equal(a.labels, b.labels)
        assert a.objective_trace == b.objective_trace

    def test_validation_errors(self):
        values = np.ones((4, 2))
        with pytest.raises(ConfigError):
            kmeans_fit(values, 2, EUCLID, np.ones((3, 2)))  # wrong init rows
        with pytest.raises(ConfigError):
            kmeans_fit(values, 2, EUCLID, np.ones((2, 2)), max_iter=0)

    def test_frozen_centroid_ranks_mode(self):
        # research toggle: ranks pinned at their initial insertion values
        data = two_blobs(n_per_blob=15, separation=60.0)
        spec = MetricSpec("gini-gen", nu=3.0)
        init = kmeanspp_init(data, 2, spec, seed=12)
        frozen = kmeans_fit(data.without_labels(), 2, spec, init, update_centroid_ranks=False)
        assert frozen.converged
        agreement = (frozen.labels == data.labels).mean()
        assert agreement in (0.0, 1.0)
        again = kmeans_fit(data.without_labels(), 2, spec, init, update_centroid_ranks=False)
        assert np.array_equal(frozen.labels, again.labels)
        assert frozen.objective_trace == again.objective_trace


class TestAssignmentStepMonotonicity:
    def test_reassignment_never_increases_objective_given_fixed_centroids(self):
        # ranks and centroids held fixed: moving each point to its argmin
        # centroid cannot increase the summed squared prametric
        rng = np.random.default_rng(4)
        for trial in range(20):
            values = rng.normal(scale=5.0, size=(25, 3))
            nu = float(rng.choice([0.5, 1.5, 2.0, 3.0, 6.0]))
            spec = MetricSpec("gini-gen", nu=nu)
            ctx = build_rank_context(values, nu)
            centroids = values[rng.choice(25, 3, replace=False)] + rng.normal(scale=0.1, size=(3, 3))
            cctx = interpolated_insertion_ranks(values, centroids, nu)
            dist = pairwise_dissimilarity(spec, values, centroids, ranks_x=ctx, ranks_y=cctx)
            arbitrary = rng.integers(0, 3, size=25)
            before = (dist[np.arange(25), arbitrary] ** 2).sum()
            after = (dist.min(axis=1) ** 2).sum()
            assert after <= before + 1e-9


@pytest.mark.xfail(strict=True, reason=(
    "the convergence argument behind the mean update assumes the arithmetic "
    "mean minimizes the squared prametric objective under constant ranks; "
    "it does not (weighted least-squares counterexample, see notes/decisions.md)"))
def test_mean_minimizes_squared_objective_under_constant_ranks():
    spec = MetricSpec("gini-gen", nu=2.0)
    values = np.array([[1.0], [2.0], [10.0]])
    ctx = build_rank_context(values, 2.0)

    def objective(c):
        centroid = np.array([[c]])
        cctx = interpolated_insertion_ranks(values, centroid, 2.0)
        d = pairwise_dissimilarity(spec, values, centroid, ranks_x=ctx, ranks_y=cctx)[:, 0]
        return float((d ** 2).sum())

    mean = float(values.mean())
    rng = np.random.default_rng(5)
    for _ in range(50):
        perturbed = mean + float(rng.normal())
        assert objective(perturbed) >= objective(mean) - 1e-9


class TestPredict:
    def test_row_equal_to_centroid(self):
        data = two_blobs(n_per_blob=10, separation=30.0)
        spec = MetricSpec("gini-gen", nu=2.0)
        init = kmeanspp_init(data, 2, spec, seed=1)
        model = kmeans_fit(data.without_labels(), 2, spec, init)
        pred = kmeans_predict(model, model.centroids)
        assert np.array_equal(pred, np.arange(2))

    def test_equidistant_tie_lowest_index(self):
        values = np.array([[0.0], [2.0]])
        model = kmeans_fit(values, 2, EUCLID, values.copy())
        assert np.array_equal(kmeans_predict(model, [[1.0]]), [0])

    def test_heldout_blob_points(self):
        data = two_blobs(n_per_blob=20, separation=60.0)
        for spec in (EUCLID, MetricSpec("gini-gen", nu=3.0)):
            init = kmeanspp_init(data, 2, spec, seed=2)
            model = kmeans_fit(data.without_labels(), 2, spec, init)
            held_out = np.vstack([np.full((5, 2), 1.5), np.full((5, 2), 58.5)])
            pred = kmeans_predict(model, held_out)
            assert len(set(pred[:5])) == 1 and len(set(pred[5:])) == 1
            assert pred[0] != pred[-1]

    def test_column_mismatch(self):
        values = np.ones((4, 2))
        model = kmeans_fit(values, 1, EUCLID, values[:1])
        with pytest.raises(Exception):
            kmeans_predict(model, np.ones((2, 3)))


class TestNuSelection:
    def test_singleton_grid(self):
        data = two_blobs(n_per_blob=10)
        assert select_nu_silhouette(data, 2, nu_grid=[2.0], n_folds=2, seed=0) == 2.0

    def test_default_grid_has_59_candidates(self):
        grid = default_nu_grid()
        assert len(grid) == 59
        assert 1.0 not in grid
        assert grid[0] == 0.1 and grid[-1] == 6.0

    def test_result_in_grid(self):
        data = two_blobs(n_per_blob=12, separation=20.0)
        grid = [0.5, 2.0, 3.5]
        nu = select_nu_silhouette(data, 2, nu_grid=grid, n_folds=3, seed=1)
        assert nu in grid

    def test_empty_grid_rejected(self):
        data = two_blobs()
        with pytest.raises(ConfigError):
            select_nu_silhouette(data, 2, nu_grid=[], n_folds=2, seed=0)
        with pytest.raises(ConfigError):
            select_nu_silhouette(data, 2, nu_grid=[1.0, 2.0], n_folds=2, seed=0)

    def test_deterministic(self):
        data = two_blobs(n_per_blob=15, separation=8.0, seed=3)
        grid = [0.5, 1.5, 3.0]
        assert (select_nu_silhouette(data, 2, grid, n_folds=3, seed=4)
                == select_nu_silhouette(data, 2, grid, n_folds=3, seed=4))
