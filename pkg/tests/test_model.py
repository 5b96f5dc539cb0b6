"""Tests for EDM recognition, profiles and the pseudoinverse identities."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from edmp import (
    DistanceMatrix,
    GramChoice,
    InstanceSpec,
    NotAnEdm,
    NotUnitSpherical,
    bdag_identity,
    bprime_dag_identity,
    cm_dag_block,
    gen_nonspherical,
    gen_unit_spherical,
    gram,
    is_edm,
    profile,
)
from edmp.linalg import pinv, rank_of
from edmp.model import centroid_gram, is_edm_array
from edmp.oracle import edm_from_points


class TestDistanceMatrix:
    def test_symmetrizes_and_freezes(self):
        d = DistanceMatrix(np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0.0]]))
        assert d.n == 3
        with pytest.raises(ValueError):
            d.d[0, 1] = 5.0

    def test_rejects_small_order(self):
        with pytest.raises(ValueError):
            DistanceMatrix(np.zeros((2, 2)))

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(ValueError):
            DistanceMatrix(np.array([[1.0, 1, 1], [1, 0, 1], [1, 1, 0]]))

    def test_rejects_negative_entries(self):
        bad = np.array([[0, -1.0, 1], [-1.0, 0, 1], [1, 1, 0]])
        with pytest.raises(ValueError):
            DistanceMatrix(bad)

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            DistanceMatrix(np.zeros((3, 4)))


class TestIsEdm:
    def test_zero_matrix(self):
        assert is_edm(DistanceMatrix(np.zeros((3, 3))))

    def test_triangle(self, triangle):
        assert is_edm(triangle)

    def test_violated_triangle_inequality(self):
        # Side lengths 1, 1, 3 cannot close a triangle: sqrt(1)+sqrt(1) < sqrt(9).
        d = np.array([[0, 1, 9], [1, 0, 1], [9, 1, 0.0]])
        assert np.sqrt(d[0, 1]) + np.sqrt(d[1, 2]) < np.sqrt(d[0, 2])
        assert not is_edm(DistanceMatrix(d))

    def test_array_variant_rejects_negative(self):
        a = np.array([[0, 1.0, -0.5], [1.0, 0, 1], [-0.5, 1, 0]])
        assert not is_edm_array(a)


class TestProfile:
    def test_triangle(self, triangle_profile):
        p = triangle_profile
        assert p.r == 2
        assert p.unit_spherical and p.spherical
        assert_allclose(p.w, [0.5, -0.5, 0.5], atol=1e-12)
        assert p.Z is None
        assert p.Z_tilde.shape == (3, 1)

    def test_square_regular(self, square_profile):
        p = square_profile
        assert p.r == 2
        assert p.regular
        assert_allclose(p.w, np.full(4, 0.125), atol=1e-12)
        assert_allclose(p.radius, 1.0, atol=1e-12)
        # Regularity pins w to e / (2 n rho^2).
        assert_allclose(p.w, np.ones(4) / (2 * 4 * p.radius**2), atol=1e-9)

    def test_antipodal(self, antipodal_profile):
        p = antipodal_profile
        assert p.r == 3
        assert not p.regular
        assert_allclose(p.w, [0.25, 0.25, 0.0, 0.0], atol=1e-12)

    def test_profile_invariants(self, square_profile, square):
        p = square_profile
        e = np.ones(4)
        assert np.linalg.norm(p.B @ e) <= 1e-12
        assert np.linalg.norm(p.P.T @ e) <= 1e-12
        assert np.linalg.norm(p.P @ p.P.T - p.B) <= 1e-10
        assert np.linalg.norm(square.d @ p.w - e) <= 1e-12
        # The Gale basis spans null(D) for a spherical EDM.
        assert np.linalg.norm(square.d @ p.Z) <= 1e-10
        assert p.Z.shape == (4, 1)

    def test_five_unit_points_in_r4(self):
        # Unit-norm points affinely spanning R^4 are circumscribed by the
        # unit sphere centered at the origin.
        rng = np.random.default_rng(23)
        pts = rng.normal(size=(5, 4))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        p = profile(edm_from_points(pts))
        assert p.r == 4
        assert_allclose(2.0 * p.w.sum(), 1.0, atol=1e-10)
        assert_allclose(p.radius, 1.0, atol=1e-10)

    def test_center_matches_radius_formula(self, triangle_profile, triangle):
        # rho^2 = |a|^2 + e.D.e / (2 n^2) with a the circumcenter.
        p = triangle_profile
        e = np.ones(3)
        rho_sq = p.center @ p.center + float(e @ triangle.d @ e) / (2 * 9)
        assert_allclose(rho_sq, p.radius**2, atol=1e-10)

    def test_not_an_edm_raises(self):
        with pytest.raises(NotAnEdm):
            profile(DistanceMatrix(np.array([[0, 1, 9], [1, 0, 1], [9, 1, 0.0]])))

    def test_permutation_invariance(self, antipodal):
        base = profile(antipodal)
        perm = np.random.default_rng(3).permutation(4)
        shuffled = DistanceMatrix(antipodal.d[np.ix_(perm, perm)])
        other = profile(shuffled)
        assert other.r == base.r
        assert_allclose(other.radius, base.radius, atol=1e-12)

    def test_nonspherical_rank(self):
        d = gen_nonspherical(4, 2, seed=8)
        p = profile(d)
        assert not p.spherical
        assert p.radius is None
        assert abs(p.w.sum()) <= 1e-9
        assert rank_of(d.d) == p.r + 2 == 4


class TestGram:
    def test_centroid_zero(self):
        out = gram(DistanceMatrix(np.zeros((3, 3))), GramChoice.CENTROID)
        assert_allclose(out, np.zeros((3, 3)))

    def test_antipodal_centroid_matches_hand_value(self, antipodal):
        expected = np.array(
            [[9, -7, -1, -1], [-7, 9, -1, -1], [-1, -1, 5, -3], [-1, -1, -3, 5]]
        ) / 8.0
        assert_allclose(gram(antipodal, GramChoice.CENTROID), expected, atol=1e-12)

    def test_wvector_mode(self, antipodal):
        out = gram(antipodal, GramChoice.WVECTOR)
        expected = np.ones((4, 4)) - 0.5 * antipodal.d
        assert_allclose(out, expected)
        # B' annihilates w.
        w = pinv(antipodal.d) @ np.ones(4)
        assert np.linalg.norm(out @ w) <= 1e-12

    def test_wvector_requires_unit_spherical(self, triangle):
        scaled = DistanceMatrix(4.0 * triangle.d)
        with pytest.raises(NotUnitSpherical):
            gram(scaled, GramChoice.WVECTOR)

    def test_both_modes_have_rank_r(self):
        for seed in (1, 2):
            d = gen_unit_spherical(InstanceSpec(n=5, r=3, seed=seed))
            p = profile(d)
            assert rank_of(gram(d, GramChoice.CENTROID)) == p.r
            assert rank_of(gram(d, GramChoice.WVECTOR)) == p.r


class TestPinvIdentities:
    def test_square_bdag_is_quarter_gram(self, square, square_profile):
        assert_allclose(bdag_identity(square), square_profile.B / 4.0, atol=1e-10)

    def test_antipodal_bdag(self, antipodal):
        expected = np.array(
            [[3, 1, -2, -2], [1, 3, -2, -2], [-2, -2, 4, 0], [-2, -2, 0, 4]]
        ) / 4.0
        assert_allclose(bdag_identity(antipodal), expected, atol=1e-10)

    def test_bdag_matches_direct_pinv(self):
        d = gen_unit_spherical(InstanceSpec(n=6, r=4, seed=12))
        direct = pinv(centroid_gram(d.d))
        assert np.linalg.norm(bdag_identity(d) - direct) <= 1e-8 * np.linalg.norm(direct)

    def test_bprime_matches_direct_pinv(self, antipodal):
        direct = pinv(np.ones((4, 4)) - 0.5 * antipodal.d)
        assert np.linalg.norm(bprime_dag_identity(antipodal) - direct) <= 1e-8

    def test_zero_w_entries_make_gram_pinvs_agree(self, antipodal):
        # Where w vanishes, the two Gram pseudoinverses share their entries
        # and both equal -2 pinv(D) there.
        b_dag = bdag_identity(antipodal)
        bp_dag = bprime_dag_identity(antipodal)
        d_dag = pinv(antipodal.d)
        for i, j in [(2, 2), (3, 3), (2, 3)]:
            assert_allclose(b_dag[i, j], bp_dag[i, j], atol=1e-10)
            assert_allclose(b_dag[i, j], -2.0 * d_dag[i, j], atol=1e-10)

    def test_proportional_w_quadratic_forms_agree(self, square):
        # x = e^k - c e^l with w_k = c w_l: the quadratic forms of both
        # Gram pseudoinverses coincide with -2 x.pinv(D).x.
        b_dag = bdag_identity(square)
        bp_dag = bprime_dag_identity(square)
        d_dag = pinv(square.d)
        x = np.zeros(4)
        x[0], x[2] = 1.0, -1.0  # c = 1 for the square's diagonal pair
        assert_allclose(x @ b_dag @ x, x @ bp_dag @ x, atol=1e-10)
        assert_allclose(x @ b_dag @ x, -2.0 * x @ d_dag @ x, atol=1e-10)

    def test_bordered_block_structure(self, square, square_profile):
        block = cm_dag_block(square)
        assert_allclose(block[0, 0], -2.0)
        assert_allclose(block[0, 1:], 2.0 * square_profile.w, atol=1e-12)
        assert_allclose(block[0, 1:], np.full(4, 0.25), atol=1e-12)

    def test_bordered_block_matches_direct_pinv(self):
        d = gen_unit_spherical(InstanceSpec(n=5, r=3, seed=21))
        bordered = np.ones((6, 6))
        bordered[0, 0] = 0.0
        bordered[1:, 1:] = d.d
        direct = pinv(bordered)
        assert np.linalg.norm(cm_dag_block(d) - direct) <= 1e-8 * np.linalg.norm(direct)

    def test_identities_require_unit_spherical(self, triangle):
        scaled = DistanceMatrix(0.25 * triangle.d)
        for op in (bdag_identity, bprime_dag_identity, cm_dag_block):
            with pytest.raises(NotUnitSpherical):
                op(scaled)
