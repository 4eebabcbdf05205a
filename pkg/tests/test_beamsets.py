"""Beamforming-set membership, envelopes, and decompositions."""
import numpy as np
import pytest

from conftest import complex_gaussian, min_envelope_2x2
from milacsim import (
    DigitalBeamformer,
    decompose_milac,
    hybrid_digital_milac_decompose,
    milac_membership_with_power,
    min_power_envelope,
    phase_shifter_matrix,
    sample_milac_boundary,
)


def orthogonal_column_w(rng, n, k, norms):
    q = np.linalg.qr(complex_gaussian(rng, (n, k)))[0]
    return q * np.asarray(norms)


class TestMembership:
    def test_identity_equality_case(self):
        assert milac_membership_with_power(np.eye(2), np.array([1.0, 1.0]))

    def test_duplicated_column_excluded_at_unit_powers(self, rng):
        f = complex_gaussian(rng, (5, 1))
        f /= np.linalg.norm(f)
        w = np.hstack([f, f])
        # Gram is the all-ones-like rank-1 matrix with top eigenvalue 2.
        assert not milac_membership_with_power(w, np.array([1.0, 1.0]))

    def test_duplicated_column_included_at_double_powers(self, rng):
        f = complex_gaussian(rng, (5, 1))
        f /= np.linalg.norm(f)
        w = np.hstack([f, f])
        # (p1-1)(p2-1) >= 1 holds with equality at p = (2, 2).
        assert milac_membership_with_power(w, np.array([2.0, 2.0]))

    def test_negative_powers_rejected(self):
        with pytest.raises(ValueError):
            milac_membership_with_power(np.eye(2), np.array([1.0, -0.1]))


class TestMinPowerEnvelope:
    def test_diagonal_w(self):
        p = min_power_envelope(np.eye(2))
        np.testing.assert_allclose(p, [1.0, 1.0], atol=1e-9)

    def test_duplicated_column_needs_double_power(self, rng):
        f = complex_gaussian(rng, (6, 1))
        f /= np.linalg.norm(f)
        w = np.hstack([f, f])
        p = min_power_envelope(w)
        # Minimize p1+p2 subject to (p1-1)(p2-1) >= 1, p >= 1: total is 4.
        assert p.sum() == pytest.approx(4.0, abs=1e-6)

    def test_orthogonal_columns_hit_frobenius_power(self, rng):
        for _ in range(10):
            norms = rng.uniform(0.3, 2.0, 3)
            w = orthogonal_column_w(rng, 8, 3, norms)
            p = min_power_envelope(w)
            np.testing.assert_allclose(p, norms**2, rtol=1e-6, atol=1e-8)
            assert p.sum() == pytest.approx(np.linalg.norm(w) ** 2, rel=1e-6)

    def test_matches_2x2_closed_form(self, rng):
        for _ in range(10):
            w = complex_gaussian(rng, (5, 2))
            p = min_power_envelope(w)
            expected = min_envelope_2x2(w.conj().T @ w)
            assert p.sum() == pytest.approx(expected, rel=1e-6)

    def test_correlated_columns_exceed_frobenius(self, rng):
        # "only if" direction: non-orthogonal full-power W needs strictly
        # more envelope power than its Frobenius norm squared.
        for _ in range(10):
            w = complex_gaussian(rng, (6, 2))
            gram = w.conj().T @ w
            if abs(gram[0, 1]) < 0.1:
                continue
            p = min_power_envelope(w)
            assert p.sum() > np.linalg.norm(w) ** 2 + 0.1 * abs(gram[0, 1])


class TestDecompose:
    def test_identity(self):
        bf = decompose_milac(np.eye(2), np.array([1.0, 1.0]))
        np.testing.assert_allclose(bf.f, np.eye(2), atol=1e-15)

    def test_zero_power_branch(self, rng):
        w = np.zeros((4, 2), dtype=complex)
        w[:, 0] = complex_gaussian(rng, 4)
        w[:, 0] /= np.linalg.norm(w[:, 0])
        bf = decompose_milac(w, np.array([1.0, 0.0]))
        np.testing.assert_allclose(bf.f[:, 1], 0, atol=0)
        np.testing.assert_allclose(bf.w, w, atol=1e-14)

    def test_orthogonal_columns_give_orthonormal_response(self, rng):
        for _ in range(10):
            norms = rng.uniform(0.5, 1.5, 3)
            w = orthogonal_column_w(rng, 7, 3, norms)
            bf = decompose_milac(w, norms**2)
            gram = bf.f.conj().T @ bf.f
            np.testing.assert_allclose(gram, np.eye(3), atol=1e-10)
            assert np.linalg.norm(bf.f, 2) == pytest.approx(1.0, abs=1e-9)
            np.testing.assert_allclose(bf.w, w, atol=1e-12)

    def test_membership_precondition(self, rng):
        f = complex_gaussian(rng, (5, 1))
        f /= np.linalg.norm(f)
        w = np.hstack([f, f])
        with pytest.raises(ValueError):
            decompose_milac(w, np.array([1.0, 1.0]))


class TestPhaseShifter:
    def test_zero_phases_rank_one(self):
        mat = phase_shifter_matrix(np.zeros((8, 2)))
        # All-ones matrix: spectral norm sqrt(N K) / sqrt(N K) = 1 exactly.
        assert np.linalg.norm(mat.w, 2) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(mat.w) == pytest.approx(1.0, abs=1e-12)

    def test_random_phases_inside_ball(self, rng):
        for _ in range(10):
            mat = phase_shifter_matrix(rng.uniform(0, 2 * np.pi, (8, 2)))
            assert np.linalg.norm(mat.w, 2) <= 1 + 1e-12
            np.testing.assert_allclose(np.abs(mat.w), 1 / np.sqrt(16), atol=1e-15)

    def test_single_entry_pi(self):
        mat = phase_shifter_matrix(np.array([[np.pi]]))
        assert mat.w[0, 0] == pytest.approx(-1.0, abs=1e-12)


class TestHybridDecompose:
    def test_diagonal_embedding(self):
        w = np.zeros((4, 2))
        w[0, 0], w[1, 1] = 2.0, 1.0
        f, pmat = hybrid_digital_milac_decompose(DigitalBeamformer(w, power_budget=5.0))
        np.testing.assert_allclose(np.abs(f), np.eye(4)[:, :2], atol=1e-12)
        np.testing.assert_allclose(np.abs(pmat), np.diag([2.0, 1.0]), atol=1e-12)

    def test_zero_matrix(self):
        f, pmat = hybrid_digital_milac_decompose(
            DigitalBeamformer(np.zeros((4, 2)), power_budget=1.0)
        )
        np.testing.assert_allclose(pmat, 0, atol=0)
        np.testing.assert_allclose(f, np.eye(4)[:, :2], atol=0)

    def test_random_reconstruction(self, rng):
        for _ in range(10):
            w = complex_gaussian(rng, (16, 4))
            budget = np.linalg.norm(w) ** 2
            f, pmat = hybrid_digital_milac_decompose(DigitalBeamformer(w, budget))
            assert np.linalg.norm(f @ pmat - w) <= 1e-10
            assert np.linalg.norm(f.conj().T @ f - np.eye(4)) <= 1e-10
            assert np.linalg.norm(pmat) ** 2 <= budget * (1 + 1e-12)

    def test_wide_matrix_rejected(self):
        with pytest.raises(ValueError):
            hybrid_digital_milac_decompose(DigitalBeamformer(np.zeros((2, 4)), 1.0))


class TestBoundarySampler:
    def test_single_user(self):
        bf = sample_milac_boundary(6, 1, rng=5, power_budget=2.0)
        assert np.linalg.norm(bf.f) == pytest.approx(1.0, abs=1e-9)
        assert bf.p[0] == pytest.approx(2.0, abs=1e-9)

    def test_always_member(self, rng):
        for seed in range(20):
            bf = sample_milac_boundary(8, 3, rng=seed, power_budget=1.5)
            assert milac_membership_with_power(bf.w, bf.p)
            assert np.linalg.norm(bf.f, 2) == pytest.approx(1.0, abs=1e-9)
            assert bf.p.sum() == pytest.approx(1.5, abs=1e-9)

    def test_containment_in_digital_set(self, rng):
        # Realized power never exceeds the budget (set containment chain).
        for seed in range(20):
            bf = sample_milac_boundary(8, 3, rng=seed, power_budget=1.0)
            assert np.linalg.norm(bf.w) ** 2 <= 1.0 + 1e-9


class TestSpectralVsColumnNorms:
    def test_spectral_norm_dominates_column_norms(self, rng):
        # The ball constraint is at least as restrictive as per-column norms.
        for _ in range(20):
            f = complex_gaussian(rng, (6, 3))
            col_max = np.max(np.linalg.norm(f, axis=0))
            assert np.linalg.norm(f, 2) >= col_max - 1e-12
