"""Hermitian eigendecomposition with a fixed gauge, and eigenvector tracking."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import check_hermitian
from .errors import AmbiguousTracking, NearDegeneracy, QBDriveError

GAP_TOL = 1e-8
OVERLAP_MIN = 0.9


@dataclass(frozen=True)
class EigenSystem:
    values: np.ndarray   # ascending
    vectors: np.ndarray  # columns

    @property
    def dim(self) -> int:
        return len(self.values)

    def min_gap(self) -> float:
        if self.dim < 2:
            return np.inf
        return float(np.min(np.diff(self.values)))


@dataclass(frozen=True)
class EigenPath:
    """Eigensystems on a time grid with continuous labels and phases.

    ``vectors[k][:, n]`` is branch n at ``grid[k]``.
    """

    grid: np.ndarray
    values: np.ndarray   # (M+1, N)
    vectors: np.ndarray  # (M+1, N, N)

    def __len__(self):
        return len(self.grid)

    def system(self, k: int) -> EigenSystem:
        return EigenSystem(self.values[k], self.vectors[k])

    def index_of(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.grid - t)))
        if not np.isclose(self.grid[k], t, rtol=0, atol=1e-12 * max(1.0, abs(t))):
            raise ValueError(f"t={t} is not a grid point")
        return k

    def branch(self, n: int) -> np.ndarray:
        return self.vectors[:, :, n]


def fix_phases(V: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column real and positive.

    Entries within a relative 1e-10 of the maximum count as ties; the
    first one wins, which keeps the convention deterministic.
    """
    V = np.array(V, dtype=complex)
    mags = np.abs(V)
    for n in range(V.shape[1]):
        top = mags[:, n].max()
        i = int(np.argmax(mags[:, n] >= top * (1 - 1e-10)))
        V[:, n] *= np.conj(V[i, n]) / abs(V[i, n])
        V[i, n] = abs(V[i, n])
    return V


def eigh(H) -> EigenSystem:
    """Eigenvalues in ascending order with gauge-fixed eigenvectors."""
    H = check_hermitian(H)
    try:
        w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    except np.linalg.LinAlgError as exc:
        raise QBDriveError(f"eigensolver did not converge: {exc}") from exc
    return EigenSystem(w, fix_phases(V))


def _hamiltonian_fn(source):
    # a Protocol tracks its constraint part; anything else is called directly
    return getattr(source, "hc_matrix", source)


def track_eigenpath(source, grid, gap_tol: float = GAP_TOL,
                    overlap_min: float = OVERLAP_MIN) -> EigenPath:
    """Follow each eigenvector of H(t) along ``grid``.

    ``source`` is a Protocol (its constraint Hamiltonian is tracked) or any
    callable t -> Hermitian matrix.  Branch n at t_{k+1} is the eigenvector
    with largest overlap with branch n at t_k, rephased so the overlap is
    real and positive (discrete parallel transport).
    """
    H_fn = _hamiltonian_fn(source)
    grid = np.asarray(grid, dtype=float)
    systems = []
    prev = None
    for k, t in enumerate(grid):
        es = eigh(H_fn(t))
        if es.min_gap() < gap_tol:
            raise NearDegeneracy(f"spectral gap {es.min_gap():.3e} < {gap_tol} at t={t}")
        if prev is None:
            values, vectors = es.values, es.vectors
        else:
            O = prev[1].conj().T @ es.vectors
            perm = np.argmax(np.abs(O), axis=1)
            best = np.abs(O[np.arange(len(perm)), perm])
            if len(set(perm.tolist())) != len(perm) or best.min() < overlap_min:
                raise AmbiguousTracking(
                    f"overlap {best.min():.3f} below {overlap_min} at t={t}; refine the grid")
            vectors = es.vectors[:, perm]
            phase = O[np.arange(len(perm)), perm]
            vectors = vectors * (np.conj(phase) / np.abs(phase))
            values = es.values[perm]
        systems.append((values, vectors))
        prev = (values, vectors)
    vals = np.array([s[0] for s in systems])
    vecs = np.array([s[1] for s in systems])
    return EigenPath(grid=grid, values=vals, vectors=vecs)
