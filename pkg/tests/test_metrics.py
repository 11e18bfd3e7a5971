import math

import numpy as np
import pytest

from ginilearn import (ConfigError, DomainError, MetricSpec, build_rank_context,
                       generalized_gini_prametric, gini_mean_difference, gini_prametric,
                       pairwise_dissimilarity, parse_metric, zoo_distance)
from ginilearn.metrics import ALL_KINDS, ZOO_KINDS

NU_SUITE = (0.5, 1.5, 2.0, 3.0, 6.0)


def gini_all_pairs(values, nu=None):
    """Pairwise prametric matrix for rows of one reference matrix."""
    ctx = build_rank_context(values, nu)
    if nu is None:
        return pairwise_dissimilarity(MetricSpec("gini"), values, values,
                                      ranks_x=ctx, ranks_y=ctx)
    return pairwise_dissimilarity(MetricSpec("gini-gen", nu=nu), values, values,
                                  ranks_x=ctx, ranks_y=ctx)


def random_matrix(rng):
    n = int(rng.integers(2, 31))
    d = int(rng.integers(1, 11))
    values = rng.normal(scale=10.0, size=(n, d))
    if rng.random() < 0.3:  # sprinkle ties
        values = np.round(values)
    return values


class TestSpecGrammar:
    def test_roundtrip(self):
        for text in ("euclidean", "manhattan", "minkowski:p=3", "minkowski:p=1.5", "cosine",
                     "lorentzian", "canberra", "hellinger", "pearson-chi2", "squared-chi",
                     "jensen-shannon", "vicis-symmetric", "hassanat", "gini", "gini-gen:nu=2.48"):
            assert str(parse_metric(text)) == text

    def test_minkowski_default_p(self):
        assert parse_metric("minkowski").p == 3.0

    def test_rejects_bad_strings(self):
        for text in ("euclid", "", "minkowski:p=0", "gini-gen:nu=1", "minkowski:q=3",
                     "gini-gen:nu=abc", "euclidean:p=2"):
            with pytest.raises(ConfigError):
                parse_metric(text)

    def test_construct_validation(self):
        with pytest.raises(ConfigError):
            MetricSpec("gini-gen", nu=1.0)
        with pytest.raises(ConfigError):
            MetricSpec("banana")


class TestZoo:
    def test_euclidean_worked(self):
        assert np.isclose(zoo_distance(MetricSpec("euclidean"), [0.0, 3.0], [4.0, 2.0]),
                          math.sqrt(17.0))

    def test_hassanat_branches(self):
        spec = MetricSpec("hassanat")
        assert zoo_distance(spec, [1.0], [3.0]) == pytest.approx(0.5)
        assert zoo_distance(spec, [-1.0], [3.0]) == pytest.approx(0.8)

    def test_zero_on_equal_inputs(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=5) + 1.0
        for kind in ZOO_KINDS:
            spec = MetricSpec(kind)
            assert zoo_distance(spec, x, x) == pytest.approx(0.0, abs=1e-12), kind

    def test_canberra_degenerate_term(self):
        assert zoo_distance(MetricSpec("canberra"), [0.0], [0.0]) == 0.0

    def test_degenerate_denominators_stay_finite(self):
        x = np.array([0.0, -1.0, 2.0])
        y = np.array([0.0, 1.0, -2.0])
        for kind in ("canberra", "pearson-chi2", "squared-chi", "vicis-symmetric",
                     "jensen-shannon", "hellinger"):
            v = zoo_distance(MetricSpec(kind), x, y)
            assert math.isfinite(v) and v >= 0.0, kind

    def test_jensen_shannon_nonnegative_on_negatives(self):
        assert zoo_distance(MetricSpec("jensen-shannon"), [-2.0], [-1.0]) >= 0.0
        rng = np.random.default_rng(1)
        for _ in range(200):
            x, y = rng.normal(size=(2, 4))
            assert zoo_distance(MetricSpec("jensen-shannon"), x, y) >= 0.0

    def test_cosine_zero_vector(self):
        with pytest.raises(DomainError):
            zoo_distance(MetricSpec("cosine"), [0.0, 0.0], [1.0, 2.0])

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            zoo_distance(MetricSpec("euclidean"), [1.0], [1.0, 2.0])

    def test_gini_kind_rejected(self):
        with pytest.raises(ConfigError):
            zoo_distance(MetricSpec("gini"), [1.0], [2.0])

    def test_symmetry_except_pearson(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=6)
        y = rng.normal(size=6)
        for kind in ZOO_KINDS:
            if kind == "pearson-chi2":
                continue
            spec = MetricSpec(kind)
            assert zoo_distance(spec, x, y) == pytest.approx(zoo_distance(spec, y, x)), kind
        spec = MetricSpec("pearson-chi2")
        # dividing by y only: asymmetry must be possible
        assert zoo_distance(spec, [1.0], [2.0]) != zoo_distance(spec, [2.0], [1.0])

    def test_lorentzian_and_minkowski_forms(self):
        assert zoo_distance(MetricSpec("lorentzian"), [0.0, 1.0], [1.0, 1.0]) == pytest.approx(math.log(2.0))
        assert zoo_distance(MetricSpec("minkowski", p=3.0), [0.0], [2.0]) == pytest.approx(2.0)
        assert zoo_distance(MetricSpec("minkowski", p=3.0), [0.0, 0.0], [1.0, 1.0]) == pytest.approx(2.0 ** (1 / 3))

    def test_pairwise_matches_scalar(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(4, 3)) + 2.0
        Y = rng.normal(size=(5, 3)) + 2.0
        for kind in ZOO_KINDS:
            spec = MetricSpec(kind)
            mat = pairwise_dissimilarity(spec, X, Y)
            for i in range(4):
                for j in range(5):
                    assert mat[i, j] == pytest.approx(zoo_distance(spec, X[i], Y[j])), kind


class TestGiniPrametric:
    def test_worked_example_two_points(self):
        X = np.array([[0.0, 3.0], [4.0, 2.0]])
        ctx = build_rank_context(X)
        assert gini_prametric(X[0], X[1], ctx.asc[0], ctx.asc[1]) == 5.0

    def test_worked_example_three_point_reference(self):
        X = np.array([[0.0, 3.0], [4.0, 2.0], [2.0, 1.5]])
        ctx = build_rank_context(X)
        assert gini_prametric(X[0], X[1], ctx.asc[0], ctx.asc[1]) == 9.0

    def test_nullity_and_rank_nullity(self):
        X = np.array([[1.0, 2.0], [1.0, 2.0], [3.0, 0.0]])
        ctx = build_rank_context(X)
        assert gini_prametric(X[0], X[0], ctx.asc[0], ctx.asc[0]) == 0.0
        # duplicated rows share rank vectors -> zero even across indices
        assert gini_prametric(X[0], X[1], ctx.asc[0], ctx.asc[1]) == 0.0

    def test_termwise_nonnegative(self):
        rng = np.random.default_rng(4)
        X = np.round(rng.normal(scale=3.0, size=(12, 5)))
        ctx = build_rank_context(X)
        for i in range(12):
            for k in range(12):
                terms = (X[i] - X[k]) * (ctx.asc[i] - ctx.asc[k])
                assert np.all(terms >= 0.0)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            gini_prametric([1.0], [1.0, 2.0], [1.0], [1.0, 2.0])


class TestGeneralizedGini:
    def test_nu2_equals_worked_example(self):
        X = np.array([[0.0, 3.0], [4.0, 2.0]])
        ctx = build_rank_context(X, nu=2.0)
        assert generalized_gini_prametric(X[0], X[1], ctx.desc_pow[0], ctx.desc_pow[1], 2.0) == 5.0

    def test_nu3_worked_value(self):
        X = np.array([[0.0, 3.0], [4.0, 2.0]])
        ctx = build_rank_context(X, nu=3.0)
        assert generalized_gini_prametric(X[0], X[1], ctx.desc_pow[0], ctx.desc_pow[1], 3.0) == 15.0

    def test_nullity_any_nu(self):
        X = np.array([[1.0, 5.0], [2.0, 0.5], [0.0, 1.0]])
        for nu in NU_SUITE:
            ctx = build_rank_context(X, nu=nu)
            assert generalized_gini_prametric(X[1], X[1], ctx.desc_pow[1], ctx.desc_pow[1], nu) == 0.0

    def test_nu_one_rejected(self):
        with pytest.raises(ConfigError):
            generalized_gini_prametric([1.0], [2.0], [1.0], [2.0], 1.0)

    def test_nu2_reduction_random(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            X = random_matrix(rng)
            d_plain = gini_all_pairs(X)
            d_gen = gini_all_pairs(X, nu=2.0)
            assert np.allclose(d_plain, d_gen, atol=1e-12, rtol=0.0)


class TestPrametricPropertySuite:
    """Nullity, rank-nullity, non-negativity, symmetry, linear invariance and
    the testable rank-invariance form, over random matrices."""

    def test_suite_random_matrices(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            X = random_matrix(rng)
            mats = {None: gini_all_pairs(X)}
            for nu in NU_SUITE:
                mats[nu] = gini_all_pairs(X, nu=nu)
            for nu, mat in mats.items():
                assert np.all(np.diag(mat) == 0.0), f"nullity nu={nu}"
                assert np.all(mat >= 0.0), f"non-negativity nu={nu}"
                assert np.array_equal(mat, mat.T), f"symmetry nu={nu}"
            # linear invariance: add lambda * ones to the whole matrix
            lam = float(rng.uniform(0.5, 50.0))
            for nu in (None,) + NU_SUITE:
                shifted = gini_all_pairs(X + lam, nu=nu)
                base = mats[nu]
                scale = np.maximum(np.abs(base), 1.0)
                assert np.all(np.abs(shifted - base) / scale < 1e-9), f"linear invariance nu={nu}"

    def test_rank_invariance_append_below_minimum(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            X = random_matrix(rng)
            n = X.shape[0]
            below = X.min(axis=0) - 1.0
            X2 = np.vstack([X, below])
            ctx, ctx2 = build_rank_context(X), build_rank_context(X2)
            # every ascending rank shifts by exactly +1
            assert np.array_equal(ctx2.asc[:n], ctx.asc + 1.0)
            base = gini_all_pairs(X)
            grown = gini_all_pairs(X2)
            # all pairwise d_G between the original rows unchanged, exactly
            assert np.array_equal(base, grown[:n, :n])

    def test_rank_nullity_duplicated_rows(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            X = random_matrix(rng)
            X = np.vstack([X, X[0]])  # duplicate forces equal rank vectors
            mat = gini_all_pairs(X)
            assert mat[0, -1] == 0.0


class TestGiniMeanDifference:
    def test_direct_formula(self):
        assert gini_mean_difference([1.0, 2.0], [1.0, 2.0]) == pytest.approx(3.5)

    def test_constant_x_tie_free_identity(self):
        # sum(2R - 1) = n^2 for tie-free ranks, so GMD(const c, y) = 2c
        rng = np.random.default_rng(9)
        for n in (2, 5, 11):
            y = rng.permutation(n).astype(float)
            c = float(rng.uniform(-3, 3))
            assert gini_mean_difference(np.full(n, c), y) == pytest.approx(2.0 * c)

    def test_sorted_vs_reversed_sign_flip(self):
        # centered monotone x: reversing y's order flips the sign
        x = np.array([-1.0, 0.0, 1.0])
        up = gini_mean_difference(x, np.array([10.0, 20.0, 30.0]))
        down = gini_mean_difference(x, np.array([30.0, 20.0, 10.0]))
        assert up == pytest.approx(8.0 / 9.0)
        assert down == pytest.approx(-8.0 / 9.0)
        # brute force over all orderings of y: sorted is the max, reversed the min
        values = [gini_mean_difference(x, np.array(p, dtype=float))
                  for p in __import__("itertools").permutations([10.0, 20.0, 30.0])]
        assert max(values) == pytest.approx(up)
        assert min(values) == pytest.approx(down)

    def test_negative_values_possible(self):
        assert gini_mean_difference([-5.0, -1.0], [1.0, 2.0]) < 0.0

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            gini_mean_difference([1.0], [1.0, 2.0])


class TestPairwiseGini:
    def test_requires_ranks(self):
        with pytest.raises(DomainError):
            pairwise_dissimilarity(MetricSpec("gini"), np.ones((2, 2)), np.ones((2, 2)))

    def test_all_kinds_enumerated(self):
        assert len(ALL_KINDS) == 14
