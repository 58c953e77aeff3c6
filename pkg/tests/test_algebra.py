import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from qbdrive.algebra import (CoeffVector, build_gellmann_basis, check_hermitian, cross,
                             cross_matrix, make_basis, projector_coeffs, projector_from_coeffs,
                             spin_one_operators, structure_constants, to_coeffs, to_matrix)
from qbdrive.errors import DimensionMismatch, NonHermitianError, QBDriveError
from qbdrive.verify import SU3_REFERENCE, reference_tensor

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
dims = st.integers(2, 5)


def coeffs(n):
    return arrays(np.float64, n, elements=finite)


def test_table1_entries(su3):
    for (a, b, c), value in SU3_REFERENCE.items():
        assert su3.f(a, b, c) == pytest.approx(value, abs=1e-12)
    assert su3.f(1, 2, 3) == pytest.approx(math.sqrt(6))
    assert su3.f(4, 5, 8) == pytest.approx(math.sqrt(3) / 2 * math.sqrt(6))
    assert su3.f(3, 6, 7) == pytest.approx(-math.sqrt(6) / 2)


def test_untabulated_vanish(su3):
    assert np.max(np.abs(su3.structure - reference_tensor())) < 1e-12


def test_pauli_for_n2():
    B = build_gellmann_basis(2)
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1, -1])
    for got, want in zip(B.generators, (sx, sy, sz)):
        np.testing.assert_allclose(got, want, atol=1e-15)
    assert B.f(1, 2, 3) == pytest.approx(2.0)


def test_half_scale_gives_levi_civita():
    B = build_gellmann_basis(2, scale=0.5)
    assert B.f(1, 2, 3) == pytest.approx(1.0)
    np.testing.assert_allclose(cross(np.eye(3)[0], np.eye(3)[1], B), [0, 0, 1], atol=1e-15)


@given(dims)
def test_generators_orthonormal_traceless(N):
    B = build_gellmann_basis(N)
    X = B.generators
    assert B.size == N * N - 1
    gram = np.einsum("aij,bji->ab", X, X) / N
    np.testing.assert_allclose(gram, np.eye(B.size), atol=1e-13)
    np.testing.assert_allclose(np.trace(X, axis1=1, axis2=2), 0, atol=1e-13)
    np.testing.assert_allclose(X, X.conj().transpose(0, 2, 1), atol=0)


@given(dims)
def test_structure_constants_antisymmetric_and_reconstruct(N):
    B = build_gellmann_basis(N)
    f = B.structure
    np.testing.assert_allclose(f, -f.transpose(1, 0, 2), atol=1e-13)
    np.testing.assert_allclose(f, -f.transpose(0, 2, 1), atol=1e-13)
    X = B.generators
    comm = np.einsum("aij,bjk->abik", X, X) - np.einsum("bij,ajk->abik", X, X)
    np.testing.assert_allclose(comm, 1j * np.einsum("abc,cik->abik", f, X), atol=1e-12)


@given(dims)
def test_jacobi_identity(N):
    f = build_gellmann_basis(N).structure
    J = (np.einsum("abe,ecd->abcd", f, f) + np.einsum("cbe,aed->abcd", f, f)
         + np.einsum("dbe,ace->abcd", f, f))
    assert np.max(np.abs(J)) < 1e-10


@given(coeffs(8), finite)
def test_matrix_coeff_round_trip(v, s):
    B = build_gellmann_basis(3)
    H = to_matrix(v, B, scalar=s)
    c = to_coeffs(H, B)
    np.testing.assert_allclose(c.vec, v, atol=1e-12)
    assert c.scalar == pytest.approx(s, abs=1e-12)


@given(coeffs(8), coeffs(8))
def test_cross_is_commutator(h, l):
    # [h.X, l.X] = i (h x l).X
    B = build_gellmann_basis(3)
    H, L = to_matrix(h, B), to_matrix(l, B)
    np.testing.assert_allclose(H @ L - L @ H, 1j * to_matrix(cross(h, l, B), B), atol=1e-10)
    np.testing.assert_allclose(cross(h, l, B), -cross(l, h, B), atol=1e-12)
    np.testing.assert_allclose(cross_matrix(l, B) @ h, cross(h, l, B), atol=1e-12)
    assert abs(cross(h, l, B) @ h) < 1e-9 * (1 + np.linalg.norm(h) ** 2 * np.linalg.norm(l))


@given(arrays(np.float64, 6, elements=st.floats(-1, 1)))
def test_projector_round_trip(x):
    psi = x[:3] + 1j * x[3:]
    if np.linalg.norm(psi) < 1e-3:
        return
    B = build_gellmann_basis(3)
    P = projector_from_coeffs(projector_coeffs(psi, B), B)
    u = psi / np.linalg.norm(psi)
    np.testing.assert_allclose(P, np.outer(u, u.conj()), atol=1e-12)


def test_spin_one_algebra():
    S1, S2, S3 = spin_one_operators()
    np.testing.assert_allclose(S1 @ S2 - S2 @ S1, 1j * S3, atol=1e-15)
    np.testing.assert_allclose(S1 @ S1 + S2 @ S2 + S3 @ S3, 2 * np.eye(3), atol=1e-15)


def test_structure_constants_of_custom_generators():
    B = build_gellmann_basis(3)
    f = structure_constants(list(B.generators))
    np.testing.assert_allclose(f, B.structure, atol=1e-13)
    np.testing.assert_allclose(make_basis(B.generators).structure, B.structure, atol=1e-13)


def test_errors():
    B = build_gellmann_basis(3)
    with pytest.raises(NonHermitianError):
        check_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DimensionMismatch):
        check_hermitian(np.zeros((2, 3)))
    with pytest.raises(DimensionMismatch):
        to_matrix(np.zeros(3), B)
    with pytest.raises(DimensionMismatch):
        to_coeffs(np.eye(2), B)
    with pytest.raises(ValueError):
        build_gellmann_basis(1)
    with pytest.raises(IndexError):
        B[9]
    with pytest.raises(ValueError):
        CoeffVector(0.0, np.array([np.nan]))
    with pytest.raises(QBDriveError):
        make_basis(B.generators[:4])
