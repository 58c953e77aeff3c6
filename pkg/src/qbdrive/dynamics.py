"""Schroedinger propagation and state observables."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateEigenvalue, DimensionMismatch, NonHermitianError, NoSuchEigenvalue


@dataclass
class TrajectoryRecord:
    grid: np.ndarray
    states: np.ndarray  # (M+1, N)
    scalars: dict = field(default_factory=dict)

    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.states, axis=1) - 1.0)))


def _uniform_step(grid: np.ndarray) -> float:
    if grid.ndim != 1 or len(grid) < 2:
        raise ValueError("grid needs at least two points")
    steps = np.diff(grid)
    dt = float(steps.mean())
    if np.max(np.abs(steps - dt)) > 1e-9 * max(abs(dt), 1.0):
        raise ValueError("grid must be uniform")
    return dt


def midpoints(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    return grid[:-1] + 0.5 * _uniform_step(grid)


def step_unitaries(H_fn, grid) -> np.ndarray:
    """Exponential-midpoint step operators exp(-i dt H(t_k + dt/2)).

    ``H_fn`` is a callable t -> H or an array (M, N, N) holding H at the
    midpoints already.  Returns an array of shape (M, N, N).  The
    exponentials come from one batched eigendecomposition, so each step is
    unitary to rounding.
    """
    grid = np.asarray(grid, dtype=float)
    dt = _uniform_step(grid)
    if callable(H_fn):
        Hs = np.array([H_fn(t) for t in grid[:-1] + 0.5 * dt], dtype=complex)
    else:
        Hs = np.asarray(H_fn, dtype=complex)
        if len(Hs) != len(grid) - 1:
            raise DimensionMismatch(f"need {len(grid) - 1} midpoint Hamiltonians, got {len(Hs)}")
    if Hs.ndim != 3 or Hs.shape[1] != Hs.shape[2]:
        raise DimensionMismatch("H_fn must return square matrices")
    scale = np.maximum(1.0, np.abs(Hs).max(axis=(1, 2)))
    herm_err = np.abs(Hs - Hs.conj().transpose(0, 2, 1)).max(axis=(1, 2))
    if np.any(herm_err > 1e-12 * scale):
        k = int(np.argmax(herm_err / scale))
        raise NonHermitianError(f"H is not Hermitian at t={grid[k] + 0.5 * dt}")
    w, V = np.linalg.eigh(Hs)
    phases = np.exp(-1j * dt * w)
    return np.einsum("kij,kj,klj->kil", V, phases, V.conj())


def propagate(H_fn, psi0, grid) -> TrajectoryRecord:
    """Solve i d/dt psi = H(t) psi on a uniform grid.

    psi(t + dt) = exp(-i dt H(t + dt/2)) psi(t); second order in dt and
    exactly norm preserving up to rounding.
    """
    grid = np.asarray(grid, dtype=float)
    psi = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("initial state must have unit norm")
    U = step_unitaries(H_fn, grid)
    if U.shape[1] != psi.shape[0]:
        raise DimensionMismatch(f"state of length {psi.shape[0]} for N={U.shape[1]}")
    states = np.empty((len(grid), psi.shape[0]), dtype=complex)
    states[0] = psi
    for k in range(len(U)):
        psi = U[k] @ psi
        states[k + 1] = psi
    return TrajectoryRecord(grid=grid, states=states)


def evolve_operator(F0, unitaries) -> np.ndarray:
    """F(t_k) = U(t_k) F0 U(t_k)^dagger for every grid point."""
    F = np.asarray(F0, dtype=complex)
    out = np.empty((len(unitaries) + 1,) + F.shape, dtype=complex)
    out[0] = F
    for k, U in enumerate(unitaries):
        F = U @ F @ U.conj().T
        out[k + 1] = F
    return out


def fidelity(a, b) -> float:
    """|<a|b>|^2, clipped into [0, 1]."""
    ov = np.vdot(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    return float(min(1.0, max(0.0, abs(ov) ** 2)))


def expectation(psi, A) -> float:
    psi = np.asarray(psi, dtype=complex)
    return float(np.vdot(psi, np.asarray(A) @ psi).real)


def energy_variance(psi, H) -> float:
    """<H^2> - <H>^2 (the squared energy uncertainty)."""
    psi = np.asarray(psi, dtype=complex)
    Hpsi = np.asarray(H) @ psi
    mean = np.vdot(psi, Hpsi).real
    return float(np.vdot(Hpsi, Hpsi).real - mean * mean)


def eigenvector_for(A, eigenvalue: float, tol: float = 1e-8) -> np.ndarray:
    """The (nondegenerate) eigenvector of A belonging to ``eigenvalue``."""
    w, V = np.linalg.eigh(np.asarray(A, dtype=complex))
    hits = np.flatnonzero(np.abs(w - eigenvalue) <= tol)
    if len(hits) == 0:
        raise NoSuchEigenvalue(f"{eigenvalue} is not an eigenvalue (spectrum {w})")
    if len(hits) > 1:
        raise DegenerateEigenvalue(f"eigenvalue {eigenvalue} has multiplicity {len(hits)}")
    return V[:, hits[0]]


def eigen_probability(psi, A, eigenvalue: float, tol: float = 1e-8) -> float:
    """|<a|psi>|^2 for the eigenvector a of A with the given eigenvalue."""
    a = eigenvector_for(A, eigenvalue, tol)
    return float(abs(np.vdot(a, np.asarray(psi, dtype=complex))) ** 2)
