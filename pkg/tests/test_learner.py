import io

import numpy as np
import pytest

import simplexi.learner as learner_mod
from simplexi.learner import (
    LearnerConfig,
    LearnerError,
    compute_factors,
    learn_simplex,
    load_vertex_estimates,
    save_vertex_estimates,
    select_indices,
    select_vertices,
)
from simplexi.metrics import match_vertices
from simplexi.sparsemat import column_subset_mean

from conftest import dense_to_csc, duplicated_vertex_instance, random_sparse


class TestSelectIndices:
    def test_abs_top_two(self):
        u = np.array([5.0, 1.0, 3.0, 2.0, 4.0])
        np.testing.assert_array_equal(select_indices(u, 2, "abs"), [0, 4])

    def test_abs_uses_magnitude(self):
        np.testing.assert_array_equal(select_indices(np.array([-5.0, 1.0, 3.0]), 1, "abs"), [0])

    def test_two_sided_prefers_larger_total(self):
        u = np.array([-5.0, -4.0, 3.0, 2.0])
        np.testing.assert_array_equal(select_indices(u, 2, "two_sided"), [0, 1])

    def test_two_sided_positive_side(self):
        u = np.array([-1.0, 6.0, 5.0, -2.0])
        np.testing.assert_array_equal(select_indices(u, 2, "two_sided"), [1, 2])

    def test_ties_break_to_lower_index(self):
        u = np.array([2.0, 2.0, 2.0, 1.0])
        np.testing.assert_array_equal(select_indices(u, 2, "abs"), [0, 1])

    def test_size_bounds(self):
        with pytest.raises(ValueError):
            select_indices(np.ones(3), 4, "abs")
        with pytest.raises(ValueError):
            select_indices(np.ones(3), 0, "abs")

    @pytest.mark.parametrize("mode", ["abs", "two_sided"])
    @pytest.mark.parametrize("seed", range(6))
    def test_positive_scale_invariance(self, mode, seed):
        rng = np.random.default_rng(seed)
        u = rng.standard_normal(40)
        s = int(rng.integers(1, 15))
        base = select_indices(u, s, mode)
        for c in (0.5, 3.0, 1e6, 1e-6):
            np.testing.assert_array_equal(select_indices(c * u, s, mode), base)


class TestLearnerConfig:
    def test_rejects_k_one(self):
        with pytest.raises(ValueError):
            LearnerConfig(k=1, delta=0.1)

    def test_rejects_bad_delta(self):
        with pytest.raises(ValueError):
            LearnerConfig(k=3, delta=0.0)
        with pytest.raises(ValueError):
            LearnerConfig(k=3, delta=1.5)

    def test_rejects_bad_modes(self):
        with pytest.raises(ValueError):
            LearnerConfig(k=3, delta=0.1, selection_mode="best")
        with pytest.raises(ValueError):
            LearnerConfig(k=3, delta=0.1, baseline="lanczos")

    def test_smoothing_floor_is_one(self):
        cfg = LearnerConfig(k=2, delta=0.001)
        assert cfg.smoothing_size(100) == 1
        assert cfg.smoothing_size(5000) == 5


class TestNoiselessRecovery:
    @pytest.mark.parametrize("k", [2, 4, 6])
    def test_duplicated_vertices_recovered_exactly(self, k):
        A, M, _ = duplicated_vertex_instance(d=16, k=k, n=400, delta=0.1, seed=k)
        est = learn_simplex(A, LearnerConfig(k=k, delta=0.1, seed=123))
        res = match_vertices(est, M)
        assert res.max_error <= 1e-8

    def test_abs_mode_also_recovers(self):
        A, M, _ = duplicated_vertex_instance(d=12, k=3, n=300, delta=0.1, seed=9)
        est = learn_simplex(A, LearnerConfig(k=3, delta=0.1, seed=5, selection_mode="abs"))
        assert match_vertices(est, M).max_error <= 1e-8

    def test_power_iteration_baseline_recovers(self):
        A, M, _ = duplicated_vertex_instance(d=12, k=3, n=300, delta=0.1, seed=2)
        est = learn_simplex(
            A, LearnerConfig(k=3, delta=0.1, seed=5, baseline="power_iteration")
        )
        assert match_vertices(est, M).max_error <= 1e-8


class TestNoisyRecovery:
    def test_two_vertices_under_noise(self):
        """40% copies of each of two axis vertices plus 20% midpoints,
        spectral noise at most 0.01 sqrt(n).  The 0.15 budget is three
        times the calibrated 95th-percentile error, asserted at the 95th
        percentile over 50 seeds: at k=2 a random direction occasionally
        lands near the diagonal between the vertices and blends the
        selection, which is exactly the event the success probability
        excludes.
        """
        errors = []
        for seed in range(50):
            rng = np.random.default_rng(seed)
            n = 500
            cols = [np.array([1.0, 0.0])] * 200 + [np.array([0.0, 1.0])] * 200
            cols += [np.array([0.5, 0.5])] * 100
            P = np.column_stack(cols)
            E = rng.standard_normal(P.shape)
            E *= 0.01 * np.sqrt(n) / np.linalg.svd(E, compute_uv=False)[0]
            A = dense_to_csc(P + E)
            est = learn_simplex(A, LearnerConfig(k=2, delta=0.3, seed=seed))
            errors.append(match_vertices(est, np.eye(2)).max_error)
        errors = np.asarray(errors)
        assert np.quantile(errors, 0.95) <= 0.15
        assert np.median(errors) <= 0.05


class TestDeterminismAndConsistency:
    def test_bit_for_bit_determinism(self):
        A = random_sparse(30, 400, 0.05, seed=3)
        cfg = LearnerConfig(k=3, delta=0.05, seed=8)
        a = learn_simplex(A, cfg)
        b = learn_simplex(A, cfg)
        assert np.array_equal(a.vertices, b.vertices)
        assert all(np.array_equal(x, y) for x, y in zip(a.index_sets, b.index_sets))
        assert np.array_equal(a.directions, b.directions)

    def test_vertices_are_column_means(self):
        A = random_sparse(20, 300, 0.1, seed=4)
        est = learn_simplex(A, LearnerConfig(k=4, delta=0.08, seed=1))
        for t, R in enumerate(est.index_sets):
            np.testing.assert_array_equal(est.vertices[:, t], column_subset_mean(A, R))

    def test_index_sets_have_smoothing_size(self):
        A = random_sparse(20, 300, 0.1, seed=4)
        cfg = LearnerConfig(k=3, delta=0.07, seed=1)
        est = learn_simplex(A, cfg)
        s = cfg.smoothing_size(300)
        assert all(R.size == s for R in est.index_sets)
        assert all(np.all(np.diff(R) > 0) for R in est.index_sets)

    def test_directions_recorded(self):
        A = random_sparse(20, 300, 0.1, seed=4)
        est = learn_simplex(A, LearnerConfig(k=3, delta=0.07, seed=1))
        assert est.directions.shape == (3, 300)
        # each index set re-derives from its recorded direction
        for u, R in zip(est.directions, est.index_sets):
            np.testing.assert_array_equal(select_indices(u, R.size, "two_sided"), R)


class TestIndexFreshness:
    def test_matched_true_vertices_distinct(self):
        """On clean instances the k selections hit k distinct true vertices."""
        hits = 0
        runs = 20
        for seed in range(runs):
            A, M, _ = duplicated_vertex_instance(d=14, k=5, n=500, delta=0.08, seed=seed)
            est = learn_simplex(A, LearnerConfig(k=5, delta=0.08, seed=1000 + seed))
            nearest = [
                int(np.argmin(np.linalg.norm(M - est.vertices[:, [t]], axis=0)))
                for t in range(5)
            ]
            hits += len(set(nearest)) == 5
        assert hits >= 0.9 * runs


class TestSelectionReadsOnlySelectedColumns:
    def test_access_counter(self, monkeypatch):
        """After the factorization pass, the matrix is touched only via
        the column averages of the selected index sets."""
        A = random_sparse(25, 400, 0.08, seed=6)
        cfg = LearnerConfig(k=3, delta=0.05, seed=2)
        Y, Z, _ = compute_factors(A, cfg)

        touched: list[np.ndarray] = []
        real_mean = column_subset_mean

        def counting_mean(mat, S):
            touched.append(np.asarray(S))
            return real_mean(mat, S)

        def forbidden(*args, **kwargs):
            raise AssertionError("selection phase must not run matrix products")

        monkeypatch.setattr(learner_mod, "column_subset_mean", counting_mean)
        monkeypatch.setattr(learner_mod, "mixed_lra", forbidden)
        monkeypatch.setattr(learner_mod, "subspace_power", forbidden)
        est = select_vertices(A, Y, Z, cfg)

        assert len(touched) == 3
        seen = np.concatenate(touched)
        expected = np.concatenate(est.index_sets)
        np.testing.assert_array_equal(np.sort(seen), np.sort(expected))
        s = cfg.smoothing_size(400)
        assert seen.size == 3 * s  # nothing outside the selected sets


class TestDegenerateInputs:
    def test_rank_deficient_factors_return_flagged_prefix(self):
        # rank-1 data cannot produce three distinct directions
        A = dense_to_csc(np.outer([1.0, 2.0, 1.0], np.ones(60)))
        est = learn_simplex(A, LearnerConfig(k=3, delta=0.1, seed=0))
        assert est.rank_deficient
        assert est.k <= 2

    def test_zero_factors_raise_diagnostic(self):
        A = random_sparse(10, 50, 0.2, seed=1)
        cfg = LearnerConfig(k=2, delta=0.1, seed=0)
        Y = np.zeros((10, 2))
        Z = np.zeros((50, 2))
        with pytest.raises(LearnerError, match="redraws"):
            select_vertices(A, Y, Z, cfg)

    def test_k_larger_than_matrix(self):
        A = random_sparse(3, 50, 0.3, seed=1)
        with pytest.raises(ValueError):
            learn_simplex(A, LearnerConfig(k=4, delta=0.1))


class TestEstimateSerialization:
    def test_roundtrip(self):
        A = random_sparse(15, 200, 0.1, seed=8)
        est = learn_simplex(A, LearnerConfig(k=3, delta=0.06, seed=4))
        buf = io.StringIO()
        save_vertex_estimates(est, buf)
        buf.seek(0)
        back = load_vertex_estimates(buf)
        np.testing.assert_array_equal(est.vertices, back.vertices)
        assert all(np.array_equal(a, b) for a, b in zip(est.index_sets, back.index_sets))
