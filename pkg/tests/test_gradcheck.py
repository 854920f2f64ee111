"""Tests for the analytic Jacobians against the finite-difference harness."""

import numpy as np
import pytest

from nala.errors import NearSingular
from nala.gradcheck import (
    SINGULAR_FLOOR,
    finite_diff_jacobian,
    jac_phi_k,
    jac_phi_q,
    max_rel_error,
)
from nala.kernels import KernelSpec, phi_k, phi_q
from nala.linalg import make_rng


def admissible_query(rng, d):
    while True:
        q = rng.standard_normal(d)
        if np.all(np.abs(q / np.linalg.norm(q)) >= SINGULAR_FLOOR):
            return q


def admissible_key(rng, d):
    while True:
        k = rng.standard_normal(d)
        if np.all(np.abs(k) >= SINGULAR_FLOOR):
            return k


class TestFiniteDiffHarness:
    def test_identity_map(self):
        rng = make_rng(0)
        x = rng.standard_normal(6)
        jac = finite_diff_jacobian(lambda v: v, x)
        np.testing.assert_allclose(jac.matrix, np.eye(6), atol=1e-10)

    def test_linear_map_recovers_matrix(self):
        rng = make_rng(1)
        A = rng.standard_normal((5, 7))
        x = rng.standard_normal(7)
        jac = finite_diff_jacobian(lambda v: A @ v, x)
        np.testing.assert_allclose(jac.matrix, A, atol=1e-9)

    def test_elementwise_square(self):
        rng = make_rng(2)
        x = rng.standard_normal(5)
        jac = finite_diff_jacobian(lambda v: v**2, x)
        np.testing.assert_allclose(jac.matrix, np.diag(2.0 * x), atol=1e-8)


class TestQueryJacobian:
    def test_matches_finite_differences(self):
        rng = make_rng(3)
        spec = KernelSpec(lam=2.0)
        for _ in range(50):
            q = admissible_query(rng, 8)
            fd = finite_diff_jacobian(lambda v: phi_q(v, spec), q, step_scale=1e-5)
            err = max_rel_error(jac_phi_q(q, spec), fd)
            assert err <= 1e-6, f"rel error {err:.3e} at {q}"

    def test_near_singular_point_rejected(self):
        q = np.array([1.0, 1e-5, 1.0, 1.0])
        with pytest.raises(NearSingular):
            jac_phi_q(q, KernelSpec())

    def test_coordinate_permutation_equivariance(self):
        rng = make_rng(4)
        spec = KernelSpec(lam=2.0)
        q = admissible_query(rng, 6)
        perm = rng.permutation(6)
        J = jac_phi_q(q, spec).matrix
        Jp = jac_phi_q(q[perm], spec).matrix
        d = q.size
        # permuting the input permutes rows within each block and columns alike
        np.testing.assert_allclose(Jp[:d], J[:d][perm][:, perm], atol=1e-13)
        np.testing.assert_allclose(Jp[d:], J[d:][perm][:, perm], atol=1e-13)

    def test_jacobian_differs_under_input_scaling(self):
        # the norm feeds the exponent, so the map is not scale-equivariant
        rng = make_rng(5)
        spec = KernelSpec(lam=2.0)
        q = admissible_query(rng, 8)
        J1 = jac_phi_q(q, spec).matrix
        J2 = jac_phi_q(2.0 * q, spec).matrix
        assert np.abs(J1 - J2).max() > 1e-6

    def test_convergence_order(self):
        # halving-by-ten the step should not worsen the agreement
        rng = make_rng(6)
        spec = KernelSpec(lam=2.0)
        q = admissible_query(rng, 8)
        J = jac_phi_q(q, spec)
        coarse = max_rel_error(J, finite_diff_jacobian(lambda v: phi_q(v, spec), q, 1e-4))
        fine = max_rel_error(J, finite_diff_jacobian(lambda v: phi_q(v, spec), q, 1e-5))
        assert fine <= coarse or fine < 1e-8


class TestKeyJacobian:
    def test_matches_finite_differences(self):
        rng = make_rng(7)
        spec = KernelSpec(lam=2.0)
        for _ in range(50):
            k = admissible_key(rng, 8)
            fd = finite_diff_jacobian(lambda v: phi_k(v, spec), k, step_scale=1e-5)
            err = max_rel_error(jac_phi_k(k, spec), fd)
            assert err <= 1e-6, f"rel error {err:.3e} at {k}"

    def test_small_entry_rejected(self):
        with pytest.raises(NearSingular):
            jac_phi_k(np.array([1.0, 1e-8]), KernelSpec())

    def test_uniform_key_has_symmetric_angle_sensitivities(self):
        # equal entries give equal direction components, so every angle
        # responds identically and the magnitude path sits on the diagonal
        spec = KernelSpec(lam=1.0)
        k = np.full(4, 2.0)
        J = jac_phi_k(k, spec).matrix
        d = k.size
        diag = np.diagonal(J[:d])
        assert np.allclose(diag, diag[0], atol=1e-13)
        off = J[:d][~np.eye(d, dtype=bool)]
        assert np.allclose(off, off[0], atol=1e-13)

    def test_lambda_one_all_positive_magnitude_derivative_is_identity_like(self):
        spec = KernelSpec(lam=1.0)
        k = np.array([0.5, 1.5, 2.5])
        J = jac_phi_k(k, spec).matrix
        fd = finite_diff_jacobian(lambda v: phi_k(v, spec), k).matrix
        np.testing.assert_allclose(J, fd, atol=1e-8)

    def test_works_at_other_exponents(self):
        rng = make_rng(8)
        for lam in (1.0, 3.0, 4.5):
            spec = KernelSpec(lam=lam)
            k = admissible_key(rng, 6)
            fd = finite_diff_jacobian(lambda v: phi_k(v, spec), k, 1e-5)
            assert max_rel_error(jac_phi_k(k, spec), fd) <= 1e-6
