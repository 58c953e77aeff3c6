"""Generator bases of su(N), structure constants and coefficient vectors.

An operator on an N-dimensional Hilbert space is written as

    H = h0 * 1 + sum_a h_a X_a,        a = 1 .. N^2 - 1

where the X_a are traceless Hermitian generators normalised by
(1/N) Tr(X_a X_b) = gram * delta_ab (gram = 1 for the default basis).
Generator labels a are 1-based throughout the public API, so that
``vec[a - 1]`` is the coefficient of X_a; this keeps the Gell-Mann
labels lambda_1 .. lambda_8 readable in user code.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonHermitianError, QBDriveError

HERMITIAN_TOL = 1e-13


@dataclass(frozen=True)
class GeneratorBasis:
    """Traceless Hermitian generators with their structure constants.

    Attributes
    ----------
    dim : int
        Hilbert-space dimension N.
    generators : ndarray, shape (N^2-1, N, N)
        ``generators[a - 1]`` is X_a.
    structure : ndarray, shape (N^2-1, N^2-1, N^2-1)
        Totally antisymmetric f with [X_a, X_b] = i sum_c f_abc X_c.
    gram : float
        Common value of (1/N) Tr(X_a X_a).
    """

    dim: int
    generators: np.ndarray = field(repr=False)
    structure: np.ndarray = field(repr=False)
    gram: float = 1.0

    @property
    def size(self) -> int:
        return self.dim * self.dim - 1

    def __getitem__(self, label: int) -> np.ndarray:
        if not 1 <= label <= self.size:
            raise IndexError(f"generator label {label} outside 1..{self.size}")
        return self.generators[label - 1]

    def f(self, a: int, b: int, c: int) -> float:
        """Structure constant with 1-based labels, f(1, 2, 3) = f_123."""
        return float(self.structure[a - 1, b - 1, c - 1])


@dataclass(frozen=True)
class CoeffVector:
    """Coefficients of an operator: identity part plus generator part."""

    scalar: float
    vec: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vec, dtype=float)
        if not np.all(np.isfinite(vec)) or not np.isfinite(self.scalar):
            raise ValueError("coefficient vector has non-finite entries")
        object.__setattr__(self, "vec", vec)


def _vec(x) -> np.ndarray:
    return np.asarray(x.vec if isinstance(x, CoeffVector) else x, dtype=float)


def check_hermitian(H: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.conj().T)) > tol * scale:
        raise NonHermitianError("operator is not Hermitian")
    return H


def _gellmann_raw(N: int) -> list[np.ndarray]:
    """Unnormalised generalised Gell-Mann matrices, Tr(l_a l_b) = 2 delta_ab."""
    sym, anti, diag = {}, {}, {}
    for j in range(N):
        for k in range(j + 1, N):
            s = np.zeros((N, N), dtype=complex)
            s[j, k] = s[k, j] = 1.0
            sym[j, k] = s
            a = np.zeros((N, N), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            anti[j, k] = a
    for l in range(1, N):
        d = np.zeros(N)
        d[:l] = 1.0
        d[l] = -l
        diag[l] = np.diag(d * np.sqrt(2.0 / (l * (l + 1)))).astype(complex)

    if N == 3:
        # the standard lambda_1..lambda_8 labelling
        return [sym[0, 1], anti[0, 1], diag[1], sym[0, 2], anti[0, 2],
                sym[1, 2], anti[1, 2], diag[2]]
    pairs = sorted(sym)
    return ([sym[p] for p in pairs] + [anti[p] for p in pairs]
            + [diag[l] for l in range(1, N)])


def structure_constants(basis_or_generators, gram: float | None = None) -> np.ndarray:
    """f_abc = Tr([X_a, X_b] X_c) / (i N gram), computed from the matrices.

    Raises QBDriveError if the imaginary residue exceeds 1e-10, which
    means the generators do not close under commutation.
    """
    if isinstance(basis_or_generators, GeneratorBasis):
        X = basis_or_generators.generators
        gram = basis_or_generators.gram
    else:
        X = np.asarray(basis_or_generators, dtype=complex)
        if gram is None:
            gram = float(np.trace(X[0] @ X[0]).real / X.shape[1])
    N = X.shape[1]
    # Tr(X_a X_b X_c) for all triples
    t = np.einsum("aij,bjk,cki->abc", X, X, X)
    raw = (t - t.transpose(1, 0, 2)) / (1j * N * gram)
    if np.max(np.abs(raw.imag), initial=0.0) > 1e-10:
        raise QBDriveError("generators are not closed under commutation")
    f = raw.real.copy()
    f[np.abs(f) < 1e-14] = 0.0
    return f


def make_basis(generators, check: bool = True) -> GeneratorBasis:
    """Wrap a list of traceless Hermitian, mutually orthogonal generators."""
    X = np.array(generators, dtype=complex)
    n, N, _ = X.shape
    if n != N * N - 1:
        raise DimensionMismatch(f"need {N * N - 1} generators for N={N}, got {n}")
    gram_matrix = np.einsum("aij,bji->ab", X, X).real / N
    gram = float(gram_matrix[0, 0])
    if check:
        for Xa in X:
            check_hermitian(Xa, 1e-14)
            if abs(np.trace(Xa)) > 1e-14 * max(1.0, N * gram):
                raise QBDriveError("generator is not traceless")
        if np.max(np.abs(gram_matrix - gram * np.eye(n))) > 1e-12 * max(1.0, gram):
            raise QBDriveError("generators are not orthogonal with a common norm")
    X.setflags(write=False)
    f = structure_constants(X, gram)
    f.setflags(write=False)
    return GeneratorBasis(dim=N, generators=X, structure=f, gram=gram)


def build_gellmann_basis(N: int, scale: float | None = None) -> GeneratorBasis:
    """Generalised Gell-Mann basis scaled so that (1/N) Tr(X_a X_b) = delta_ab.

    For N = 3 the ordering is lambda_1..lambda_8 and X_a = (sqrt(6)/2) lambda_a;
    for N = 2 the generators are the Pauli matrices.  Otherwise the order is
    symmetric pairs (row-major), antisymmetric pairs, then diagonals.

    ``scale`` overrides the factor multiplying the raw Gell-Mann matrices.
    ``build_gellmann_basis(2, scale=0.5)`` gives X = sigma/2, so that
    h . X = (1/2) h . sigma and f_abc = eps_abc.
    """
    if int(N) != N or N < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {N}")
    N = int(N)
    if scale is None:
        scale = np.sqrt(N / 2.0)
    return make_basis([scale * g for g in _gellmann_raw(N)])


def to_matrix(c, basis: GeneratorBasis, scalar: float | None = None) -> np.ndarray:
    """Assemble h0 + h . X from a CoeffVector or a plain generator vector."""
    if isinstance(c, CoeffVector):
        s = c.scalar if scalar is None else scalar
        v = c.vec
    else:
        s = 0.0 if scalar is None else scalar
        v = np.asarray(c, dtype=float)
    if v.shape != (basis.size,):
        raise DimensionMismatch(f"coefficient length {v.shape} != ({basis.size},)")
    return s * np.eye(basis.dim, dtype=complex) + np.tensordot(v, basis.generators, axes=1)


def to_coeffs(H, basis: GeneratorBasis) -> CoeffVector:
    """Inverse of :func:`to_matrix` via the trace inner product."""
    H = check_hermitian(H)
    if H.shape != (basis.dim, basis.dim):
        raise DimensionMismatch(f"matrix shape {H.shape} does not match N={basis.dim}")
    N = basis.dim
    vec = np.einsum("ij,aji->a", H, basis.generators).real / (N * basis.gram)
    return CoeffVector(float(np.trace(H).real / N), vec)


def cross(h, l, basis: GeneratorBasis) -> np.ndarray:
    """Generalised vector product (h x l)_a = sum_bc f_abc h_b l_c."""
    h, l = _vec(h), _vec(l)
    if h.shape != (basis.size,) or l.shape != (basis.size,):
        raise DimensionMismatch(
            f"vectors of shape {h.shape}, {l.shape} for basis size {basis.size}")
    return np.einsum("abc,b,c->a", basis.structure, h, l)


def cross_matrix(l, basis: GeneratorBasis) -> np.ndarray:
    """Matrix M(l) with M(l) @ h == cross(h, l)."""
    return np.einsum("abc,c->ab", basis.structure, _vec(l))


def projector_coeffs(psi, basis: GeneratorBasis) -> np.ndarray:
    """Unit vector e with |psi><psi| = 1/N + (sqrt(N-1)/N) e . Y.

    Y are the generators normalised to unit gram; for the default basis
    Y = X.
    """
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise ValueError("zero state vector")
    psi = psi / norm
    N = basis.dim
    p = to_coeffs(np.outer(psi, psi.conj()), basis).vec
    return p * N * np.sqrt(basis.gram) / np.sqrt(N - 1)


def projector_from_coeffs(e, basis: GeneratorBasis) -> np.ndarray:
    N = basis.dim
    v = np.sqrt(N - 1) / N * _vec(e) / np.sqrt(basis.gram)
    return to_matrix(v, basis, scalar=1.0 / N)


def spin_one_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """S1, S2, S3 for spin 1 in the S3 eigenbasis (+1, 0, -1)."""
    r = 1 / np.sqrt(2)
    S1 = r * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
    S2 = r * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
    S3 = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return S1, S2, S3
