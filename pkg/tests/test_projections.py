"""Tests for the structure-enforcing maps against least-squares oracles."""

import numpy as np
import pytest
import scipy.linalg

from oracles import feasible_lstsq, nearest_hermitian_lstsq, toeplitz_lstsq
from toepsdp.projections import (
    BlockMatrix2n,
    data_consistency,
    feasible_project,
    psd_trace_prox,
    symmetrize,
    toeplitz_project,
)
from toepsdp.signal_model import ObservationSet, sample_observations, synth_random


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng, n):
    A = crandn(rng, n, n)
    return 0.5 * (A + A.conj().T)


class TestSymmetrize:
    def test_fixed_point_on_hermitian(self, rng):
        H = np.empty((4, 4), dtype=complex)
        for i in range(4):
            H[i, i] = rng.standard_normal()
            for j in range(i + 1, 4):
                H[i, j] = crandn(rng)
                H[j, i] = np.conj(H[i, j])
        assert np.array_equal(symmetrize(H), H)

    def test_forced_two_by_two(self):
        got = symmetrize(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert np.array_equal(got, np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex))

    def test_output_exactly_hermitian(self, rng):
        for _ in range(20):
            S = symmetrize(crandn(rng, 5, 5))
            assert np.array_equal(S, S.conj().T)

    def test_matches_nearest_hermitian_oracle(self, rng):
        for n in (2, 3, 4, 6):
            A = crandn(rng, n, n)
            assert np.max(np.abs(symmetrize(A) - nearest_hermitian_lstsq(A))) < 1e-12

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            symmetrize(np.zeros((2, 3)))


class TestPsdTraceProx:
    def test_shift_then_clip_on_diagonal(self):
        got = psd_trace_prox(np.diag([3.0, -1.0]).astype(complex), rho=1.0)
        assert np.max(np.abs(got - np.diag([2.0, 0.0]))) < 1e-12

    def test_all_eigenvalues_above_threshold(self):
        got = psd_trace_prox(5.0 * np.eye(2, dtype=complex), rho=1.0)
        assert np.max(np.abs(got - 4.0 * np.eye(2))) < 1e-12

    def test_all_eigenvalues_below_threshold_gives_zero(self):
        assert np.array_equal(
            psd_trace_prox(-np.eye(3, dtype=complex), rho=1.0), np.zeros((3, 3))
        )

    def test_spectrum_is_shifted_clipped_input_spectrum(self, rng):
        for n in (2, 3, 5, 8):
            for rho in (0.1, 1.0, 3.0):
                A = random_hermitian(rng, n)
                out = psd_trace_prox(A, rho)
                want = np.maximum(np.linalg.eigvalsh(A) - 1.0 / rho, 0.0)
                got = np.sort(np.linalg.eigvalsh(out))
                assert np.max(np.abs(got - np.sort(want))) < 1e-9

    def test_spectrum_law_on_large_matrix(self, rng):
        # large enough to exercise the subset-eigensolver path
        A = random_hermitian(rng, 130)
        out = psd_trace_prox(A, rho=0.5)
        want = np.maximum(np.linalg.eigvalsh(A) - 2.0, 0.0)
        got = np.sort(np.linalg.eigvalsh(out))
        assert np.max(np.abs(got - np.sort(want))) < 1e-9

    def test_beats_random_psd_candidates(self, rng):
        rho = 0.1
        A = random_hermitian(rng, 3)

        def objective(M):
            return np.trace(M).real + 0.5 * rho * np.linalg.norm(M - A) ** 2

        M = psd_trace_prox(A, rho)
        base = objective(M)
        for _ in range(5000):
            w = crandn(rng, 3)
            t = rng.uniform(0.0, 1.0)
            cand = M + t * np.outer(w, w.conj())  # PSD + rank-1 PSD
            assert objective(cand) >= base - 1e-10
        for _ in range(5000):
            B = crandn(rng, 3, 3)
            t = rng.uniform(0.0, 1.0)
            cand = (1.0 - t) * M + t * (B @ B.conj().T)  # convex mix of PSD
            assert objective(cand) >= base - 1e-10

    def test_output_numerically_psd_and_hermitian(self, rng):
        for _ in range(10):
            out = psd_trace_prox(random_hermitian(rng, 6), rho=0.1)
            assert np.linalg.eigvalsh(out).min() >= -1e-10
            assert np.linalg.norm(out - out.conj().T) < 1e-12 * max(np.linalg.norm(out), 1.0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            psd_trace_prox(np.eye(2, dtype=complex), rho=0.0)
        bad = np.eye(2, dtype=complex)
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            psd_trace_prox(bad, rho=1.0)
        with pytest.raises(ValueError):
            psd_trace_prox(np.zeros((2, 3)), rho=1.0)


class TestToeplitzProject:
    def test_toeplitz_input_unchanged(self, rng):
        T = scipy.linalg.toeplitz(crandn(rng, 5), crandn(rng, 5))
        got = toeplitz_project(T)
        assert np.max(np.abs(got - T)) < 1e-14

    def test_two_by_two_mean(self):
        a, b, c, d = 1.0 + 2j, -3.0, 4j, 7.0 - 1j
        got = toeplitz_project(np.array([[a, b], [c, d]]))
        assert np.array_equal(got, np.array([[(a + d) / 2, b], [c, (a + d) / 2]]))

    def test_matches_lstsq_oracle(self, rng):
        for n in (2, 3, 4, 6, 8):
            B = crandn(rng, n, n)
            assert np.max(np.abs(toeplitz_project(B) - toeplitz_lstsq(B))) < 1e-12

    def test_output_diagonals_exactly_constant(self, rng):
        P = toeplitz_project(crandn(rng, 7, 7))
        assert np.array_equal(P[:-1, :-1], P[1:, 1:])

    def test_idempotent(self, rng):
        P = toeplitz_project(crandn(rng, 6, 6))
        assert np.max(np.abs(toeplitz_project(P) - P)) < 1e-14

    def test_residual_orthogonal_to_toeplitz(self, rng):
        for _ in range(20):
            B = crandn(rng, 5, 5)
            R = B - toeplitz_project(B)
            Z = scipy.linalg.toeplitz(crandn(rng, 5), crandn(rng, 5))
            assert abs(np.vdot(Z, R)) < 1e-10

    def test_hermitian_input_gives_exactly_hermitian_output(self, rng):
        for _ in range(10):
            P = toeplitz_project(random_hermitian(rng, 6))
            assert np.array_equal(P, P.conj().T)

    def test_preserves_real_dtype_and_rejects_non_square(self, rng):
        assert not np.iscomplexobj(toeplitz_project(rng.standard_normal((3, 3))))
        with pytest.raises(ValueError):
            toeplitz_project(np.zeros((3, 4)))


class TestDataConsistency:
    def test_full_overwrite(self, rng):
        sig = synth_random(n=4, s=2, rng_seed=0)
        obs = sample_observations(sig, m=16, rng_seed=1)
        got = data_consistency(crandn(rng, 4, 4), obs)
        assert np.array_equal(got, sig.dense)

    def test_single_overwrite_on_zeros(self):
        obs = ObservationSet(n=3, rows=[0], cols=[0], values=[7.0 + 0j])
        got = data_consistency(np.zeros((3, 3), dtype=complex), obs)
        assert got[0, 0] == 7.0 + 0j
        assert np.count_nonzero(got) == 1

    def test_unobserved_entries_untouched_and_input_not_mutated(self, rng):
        X = crandn(rng, 4, 4)
        X_orig = X.copy()
        obs = ObservationSet(n=4, rows=[1, 2], cols=[3, 0], values=[1j, -2.0])
        got = data_consistency(X, obs)
        assert np.array_equal(X, X_orig)
        mask = np.ones((4, 4), dtype=bool)
        mask[1, 3] = mask[2, 0] = False
        assert np.array_equal(got[mask], X[mask])
        assert got[1, 3] == 1j and got[2, 0] == -2.0

    def test_none_means_empty_set(self, rng):
        X = crandn(rng, 4, 4)
        got = data_consistency(X, None)
        assert np.array_equal(got, X)
        assert not np.shares_memory(got, X)

    def test_shape_mismatch_raises(self):
        obs = ObservationSet(n=3, rows=[0], cols=[0], values=[1.0])
        with pytest.raises(ValueError):
            data_consistency(np.zeros((4, 4), dtype=complex), obs)


class TestFeasibleProject:
    def _instance(self, n, m, seed):
        sig = synth_random(n=n, s=max(1, n // 4), rng_seed=seed)
        return sample_observations(sig, m=m, rng_seed=seed + 1)

    def test_exact_fixed_point_on_integer_feasible_matrix(self):
        # integer-valued diagonals make the mean of each diagonal exact
        n = 3
        TL = scipy.linalg.toeplitz([4.0, 1 + 1j, 2 - 1j], [4.0, 1 - 1j, 2 + 1j])
        BR = scipy.linalg.toeplitz([6.0, -1 + 2j, 3j], [6.0, -1 - 2j, -3j])
        TR = (np.arange(9).reshape(3, 3) + 1j * np.arange(9)[::-1].reshape(3, 3)).astype(
            complex
        )
        A = np.block([[TL, TR], [TR.conj().T, BR]])
        obs = ObservationSet(n=3, rows=[0, 2], cols=[1, 2], values=[TR[0, 1], TR[2, 2]])
        out = feasible_project(A, obs)
        assert np.array_equal(out.data, A)

    def test_generic_fixed_point_within_rounding(self, rng):
        obs = self._instance(4, 5, seed=2)
        first = feasible_project(crandn(rng, 8, 8), obs).data
        second = feasible_project(first, obs).data
        assert np.max(np.abs(second - first)) < 1e-13

    def test_matches_affine_lstsq_oracle(self, rng):
        for n, seed in ((3, 0), (4, 1), (5, 2)):
            obs = self._instance(n, n + 2, seed)
            A = crandn(rng, 2 * n, 2 * n)
            got = feasible_project(A, obs).data
            want = feasible_lstsq(A, obs)
            assert np.max(np.abs(got - want)) < 1e-12

    def test_nuclear_variant_matches_its_oracle(self, rng):
        obs = self._instance(4, 6, seed=3)
        A = crandn(rng, 8, 8)
        got = feasible_project(A, obs, variant="nuclear").data
        want = feasible_lstsq(A, obs, variant="nuclear")
        assert np.max(np.abs(got - want)) < 1e-12

    def test_nuclear_variant_keeps_hermitian_diag_blocks(self, rng):
        obs = self._instance(4, 6, seed=4)
        H = random_hermitian(rng, 8)
        out = feasible_project(H, obs, variant="nuclear")
        assert np.array_equal(out.TL, H[:4, :4])
        assert np.array_equal(out.BR, H[4:, 4:])
        assert np.array_equal(out.TR[obs.rows, obs.cols], obs.values)

    def test_observed_entries_set_bitwise(self, rng):
        obs = self._instance(5, 9, seed=5)
        out = feasible_project(crandn(rng, 10, 10), obs)
        assert np.array_equal(out.TR[obs.rows, obs.cols], obs.values)

    def test_output_is_feasible(self, rng):
        obs = self._instance(4, 5, seed=6)
        out = feasible_project(crandn(rng, 8, 8), obs)
        assert out.is_feasible(obs)
        assert out.is_feasible(obs, variant="nuclear")  # weaker constraint set

    def test_rejects_bad_inputs(self, rng):
        obs = self._instance(3, 4, seed=7)
        with pytest.raises(ValueError):
            feasible_project(crandn(rng, 7, 7), obs)
        with pytest.raises(ValueError):
            feasible_project(crandn(rng, 8, 8), obs)  # obs.n=3 but n=4
        with pytest.raises(ValueError):
            feasible_project(crandn(rng, 6, 6), obs, variant="banded")


class TestBlockMatrix2n:
    def test_views_share_memory(self):
        bm = BlockMatrix2n(np.zeros((6, 6), dtype=complex))
        bm.TL[0, 0] = 5.0
        bm.TR[2, 1] = 1j
        assert bm.data[0, 0] == 5.0
        assert bm.data[2, 4] == 1j
        assert bm.n == 3

    def test_rejects_odd_or_non_square(self):
        with pytest.raises(ValueError):
            BlockMatrix2n(np.zeros((5, 5)))
        with pytest.raises(ValueError):
            BlockMatrix2n(np.zeros((4, 6)))

    def test_is_feasible_detects_violations(self, rng):
        sig = synth_random(n=4, s=1, rng_seed=0)
        obs = sample_observations(sig, m=4, rng_seed=1)
        good = feasible_project(crandn(rng, 8, 8), obs)
        assert good.is_feasible(obs)

        broken = BlockMatrix2n(good.data.copy())
        broken.TL[0, 0] += 0.5  # breaks Toeplitz (and Hermitian defect stays small)
        assert not broken.is_feasible(obs)

        broken = BlockMatrix2n(good.data.copy())
        broken.TR[obs.rows[0], obs.cols[0]] += 1.0
        assert not broken.is_feasible(obs)

        broken = BlockMatrix2n(good.data.copy())
        broken.data[0, 5] += 1.0  # Hermitian defect
        assert not broken.is_feasible(obs)
