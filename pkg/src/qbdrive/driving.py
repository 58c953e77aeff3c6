"""Transitionless driving: protocols, counter-diabatic terms and invariants.

A :class:`Protocol` fixes the constraint part of the Hamiltonian,

    H_C(t) = sum_{a in constraint_indices} h_a(t) X_a,

which here plays the role of H_0(t).  The counter-diabatic term

    H_1(t) = i sum_{m != n} |m><m|dn/dt><n|

is built from the gap formula <m|dn/dt> = <m|dH_0/dt|n> / (E_n - E_m),
which does not depend on the eigenvector gauge.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import GeneratorBasis, check_hermitian, to_matrix
from .dynamics import evolve_operator, step_unitaries
from .errors import NearDegeneracy, PreconditionError
from .spectral import GAP_TOL, EigenPath, eigh, track_eigenpath


@dataclass(frozen=True)
class Protocol:
    """Time-dependent Hamiltonian given by its constrained components.

    Parameters
    ----------
    basis : GeneratorBasis
    constraint_indices : tuple of int
        1-based generator labels carrying the externally fixed field.
    h0_fn : callable
        t -> coefficient vector of length N^2-1, zero off the constraint set.
    dh0_fn : callable, optional
        Analytic time derivative of ``h0_fn``.  When omitted a central
        difference with step ``fd_step`` is used.
    h1_fn : callable, optional
        Explicit completion on the complement.  If absent, the
        counter-diabatic term is computed spectrally.
    overlapping : bool
        Allow ``h1_fn`` to have components on the constraint set.
    """

    basis: GeneratorBasis
    constraint_indices: tuple
    h0_fn: Callable
    dh0_fn: Callable | None = None
    h1_fn: Callable | None = None
    overlapping: bool = False
    fd_step: float = 1e-4

    def __post_init__(self):
        idx = tuple(sorted(int(a) for a in self.constraint_indices))
        if not idx or idx[0] < 1 or idx[-1] > self.basis.size or len(set(idx)) != len(idx):
            raise ValueError(f"bad constraint labels {self.constraint_indices}")
        object.__setattr__(self, "constraint_indices", idx)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.basis.size, dtype=bool)
        m[[a - 1 for a in self.constraint_indices]] = True
        return m

    @property
    def complement_indices(self) -> tuple:
        return tuple(a for a in range(1, self.basis.size + 1)
                     if a not in self.constraint_indices)

    @property
    def has_analytic_derivative(self) -> bool:
        return self.dh0_fn is not None

    def _checked(self, v, what, t) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.basis.size,):
            raise ValueError(f"{what}({t}) has shape {v.shape}, expected ({self.basis.size},)")
        off = np.abs(v[~self.mask])
        if off.size and off.max() > 1e-12 * max(1.0, np.abs(v).max()):
            raise ValueError(f"{what}({t}) has components off the constraint set")
        return v

    def h0(self, t: float) -> np.ndarray:
        return self._checked(self.h0_fn(t), "h0", t)

    def dh0(self, t: float) -> np.ndarray:
        if self.dh0_fn is not None:
            return self._checked(self.dh0_fn(t), "dh0", t)
        s = self.fd_step
        return (self.h0(t + s) - self.h0(t - s)) / (2 * s)

    def h1(self, t: float) -> np.ndarray | None:
        if self.h1_fn is None:
            return None
        v = np.asarray(self.h1_fn(t), dtype=float)
        if not self.overlapping and np.abs(v[self.mask]).max(initial=0.0) > 1e-12 * max(1.0, np.abs(v).max()):
            raise ValueError(f"h1({t}) overlaps the constraint set; pass overlapping=True")
        return v

    def hc_matrix(self, t: float) -> np.ndarray:
        return to_matrix(self.h0(t), self.basis)

    def _stack(self, fn, what, times) -> np.ndarray:
        vs = np.array([fn(t) for t in times], dtype=float).reshape(len(times), self.basis.size)
        off = np.abs(vs[:, ~self.mask])
        if off.size and off.max() > 1e-12 * max(1.0, np.abs(vs).max()):
            raise ValueError(f"{what} has components off the constraint set")
        return vs

    def hc_many(self, times) -> np.ndarray:
        """H_C at every time in ``times``, shape (K, N, N)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        return np.einsum("ka,aij->kij", self._stack(self.h0_fn, "h0", times),
                         self.basis.generators)

    def dhc_many(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.dh0_fn is not None:
            d = self._stack(self.dh0_fn, "dh0", times)
        else:
            s = self.fd_step
            d = (self._stack(self.h0_fn, "h0", times + s)
                 - self._stack(self.h0_fn, "h0", times - s)) / (2 * s)
        return np.einsum("ka,aij->kij", d, self.basis.generators)

    def dhc_matrix(self, t: float) -> np.ndarray:
        return to_matrix(self.dh0(t), self.basis)

    def hamiltonian_many(self, times) -> np.ndarray:
        """Vectorised :meth:`hamiltonian`, shape (K, N, N)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.h1_fn is None:
            return self.hc_many(times) + counter_diabatic_many(self, times)
        h1 = np.array([self.h1(t) for t in times])
        return self.hc_many(times) + np.einsum("ka,aij->kij", h1, self.basis.generators)

    def hamiltonian(self, t: float) -> np.ndarray:
        """H_C(t) plus the completion (explicit, or counter-diabatic)."""
        h1 = self.h1(t)
        if h1 is None:
            return self.hc_matrix(t) + counter_diabatic(self, t)
        return self.hc_matrix(t) + to_matrix(h1, self.basis)


def _gap_check(values, gap_tol, t):
    gap = float(np.min(np.diff(values))) if len(values) > 1 else np.inf
    if gap < gap_tol:
        raise NearDegeneracy(f"spectral gap {gap:.3e} < {gap_tol} at t={t}")


def _coupling_matrix(V, E, dH) -> np.ndarray:
    """K[m, n] = <m|dn/dt> for m != n, zero on the diagonal."""
    M = V.conj().T @ dH @ V
    gaps = E[None, :] - E[:, None]
    np.fill_diagonal(gaps, 1.0)
    K = M / gaps
    np.fill_diagonal(K, 0.0)
    return K


def counter_diabatic(protocol: Protocol, t: float, gap_tol: float = GAP_TOL) -> np.ndarray:
    """Counter-diabatic Hamiltonian H_1(t) for H_0(t) = H_C(t)."""
    es = eigh(protocol.hc_matrix(t))
    _gap_check(es.values, gap_tol, t)
    K = _coupling_matrix(es.vectors, es.values, protocol.dhc_matrix(t))
    V = es.vectors
    H1 = 1j * V @ K @ V.conj().T
    return 0.5 * (H1 + H1.conj().T)


def counter_diabatic_many(protocol: Protocol, times, gap_tol: float = GAP_TOL) -> np.ndarray:
    """Vectorised :func:`counter_diabatic` over an array of times, shape (K, N, N)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    E, V = np.linalg.eigh(protocol.hc_many(times))
    if E.shape[1] > 1:
        gaps = np.diff(E, axis=1).min(axis=1)
        k = int(np.argmin(gaps))
        if gaps[k] < gap_tol:
            raise NearDegeneracy(f"spectral gap {gaps[k]:.3e} < {gap_tol} at t={times[k]}")
    Vh = V.conj().transpose(0, 2, 1)
    M = Vh @ protocol.dhc_many(times) @ V
    G = E[:, None, :] - E[:, :, None]
    N = E.shape[1]
    off = ~np.eye(N, dtype=bool)
    K = np.where(off, M / np.where(off, G, 1.0), 0.0)
    H1 = 1j * V @ K @ Vh
    return 0.5 * (H1 + H1.conj().transpose(0, 2, 1))


def offdiag_coupling(path: EigenPath, m: int, n: int, t: float,
                     protocol: Protocol | None = None, method: str = "auto") -> complex:
    """<m(t)|dn/dt> for two tracked branches m != n.

    ``method="gap"`` uses <m|dH_0/dt|n>/(E_n - E_m) and needs ``protocol``;
    ``method="path"`` differentiates the phase-aligned path numerically.
    ``"auto"`` picks the gap formula when the protocol has an analytic
    derivative.
    """
    if m == n:
        raise ValueError("offdiag_coupling needs m != n")
    k = path.index_of(t)
    E = path.values[k]
    if abs(E[n] - E[m]) < GAP_TOL:
        raise NearDegeneracy(f"branches {m}, {n} are degenerate at t={t}")
    if method == "auto":
        method = "gap" if protocol is not None and protocol.has_analytic_derivative else "path"
    if method == "gap":
        if protocol is None:
            raise ValueError("the gap formula needs the protocol")
        V = path.vectors[k]
        return complex(V[:, m].conj() @ protocol.dhc_matrix(t) @ V[:, n] / (E[n] - E[m]))
    if method != "path":
        raise ValueError(f"unknown method {method!r}")
    g, vec = path.grid, path.vectors
    if len(g) < 3:
        raise ValueError("path differentiation needs at least three grid points")
    if 0 < k < len(g) - 1:
        dn = (vec[k + 1, :, n] - vec[k - 1, :, n]) / (g[k + 1] - g[k - 1])
    elif k == 0:
        h = g[1] - g[0]
        dn = (-3 * vec[0, :, n] + 4 * vec[1, :, n] - vec[2, :, n]) / (2 * h)
    else:
        h = g[-1] - g[-2]
        dn = (3 * vec[-1, :, n] - 4 * vec[-2, :, n] + vec[-3, :, n]) / (2 * h)
    return complex(np.vdot(vec[k, :, m], dn))


def _phase_on_grid(path: EigenPath, n: int, H_fn) -> np.ndarray:
    vec = path.branch(n)
    g = path.grid
    # i<n|dn/dt> dt integrated exactly on the discrete path: -arg<n_k|n_k+1>
    overlaps = np.einsum("ki,ki->k", vec[:-1].conj(), vec[1:])
    geometric = -np.angle(overlaps)
    Hs = H_fn.hamiltonian_many(g) if isinstance(H_fn, Protocol) else np.array([H_fn(t) for t in g])
    energies = np.einsum("ki,kij,kj->k", vec.conj(), Hs, vec).real
    dynamical = 0.5 * (energies[:-1] + energies[1:]) * np.diff(g)
    return np.concatenate([[0.0], np.cumsum(geometric - dynamical)])


def lr_phase(protocol: Protocol, n: int, grid, H_fn=None, path: EigenPath | None = None,
             refine_tol: float | None = None, max_refine: int = 8) -> np.ndarray:
    """Lewis-Riesenfeld phase alpha_n(t) = int <n|(i d/dt - H)|n> dt'.

    ``H_fn`` defaults to the full driven Hamiltonian of the protocol.  The
    geometric part is taken from successive eigenvector overlaps and the
    dynamical part by the trapezoid rule.  With ``refine_tol`` the grid is
    doubled until the values on the original points change by less than
    the tolerance.
    """
    grid = np.asarray(grid, dtype=float)
    H_fn = protocol if H_fn is None else H_fn
    if path is None:
        path = track_eigenpath(protocol, grid)
    alpha = _phase_on_grid(path, n, H_fn)
    if refine_tol is None:
        return alpha
    fine = grid
    for level in range(1, max_refine + 1):
        mids = 0.5 * (fine[:-1] + fine[1:])
        fine = np.sort(np.concatenate([fine, mids]))
        a_fine = _phase_on_grid(track_eigenpath(protocol, fine), n, H_fn)[:: 2 ** level]
        if np.max(np.abs(a_fine - alpha)) < refine_tol:
            return a_fine
        alpha = a_fine
    return alpha


@dataclass(frozen=True)
class AdiabaticSolution:
    grid: np.ndarray
    weights: np.ndarray   # real constants c_n
    phases: np.ndarray    # (N, M+1)
    states: np.ndarray    # (M+1, N)
    path: EigenPath


def adiabatic_state(protocol: Protocol, c, grid, H_fn=None,
                    path: EigenPath | None = None) -> AdiabaticSolution:
    """|psi(t)> = sum_n c_n exp(i alpha_n(t)) |n(t)>."""
    c = np.asarray(c, dtype=float)
    if c.shape != (protocol.dim,):
        raise ValueError(f"need {protocol.dim} weights, got {c.shape}")
    if abs(np.sum(c * c) - 1.0) > 1e-10:
        raise PreconditionError("weights must satisfy sum c_n^2 = 1")
    grid = np.asarray(grid, dtype=float)
    H_fn = protocol if H_fn is None else H_fn
    if path is None:
        path = track_eigenpath(protocol, grid)
    phases = np.zeros((protocol.dim, len(grid)))
    for n in np.flatnonzero(c):
        phases[n] = lr_phase(protocol, n, grid, H_fn=H_fn, path=path)
    amps = c[None, :] * np.exp(1j * phases.T)              # (M+1, N)
    states = np.einsum("kin,kn->ki", path.vectors, amps)
    return AdiabaticSolution(grid=grid, weights=c, phases=phases, states=states, path=path)


@dataclass(frozen=True)
class InvariantDriftReport:
    drift: float                        # max over grid of |spectrum F(t) - spectrum F(0)|_inf
    spectrum: np.ndarray                # spectrum of the normalised F(0)
    initial_condition_residual: float | None = None
    max_condition_residual: float | None = None
    max_commutator: float | None = None  # max |[F(t), H_C(t)]| for Protocol input

    def __float__(self):
        return self.drift


def invariant_drift(F0, source, grid, psi0=None) -> InvariantDriftReport:
    """Propagate F(t) = U F(0) U^dagger and measure how much its spectrum moves.

    F(0) is scaled to unit Hilbert-Schmidt norm first; every quantity
    reported is scale invariant up to that normalisation.  ``source`` is a
    Protocol (driven by its full Hamiltonian) or a callable t -> H.  With
    ``psi0`` the residual of (1 - P) F (1 - P) = 0 is reported at t = 0 and
    its maximum along the evolution.
    """
    F0 = check_hermitian(F0)
    grid = np.asarray(grid, dtype=float)
    hs = np.linalg.norm(F0)
    F0 = F0 / hs if hs > 0 else F0
    spec0 = np.linalg.eigvalsh(F0)
    N = F0.shape[0]
    is_scalar = np.array_equal(F0, F0[0, 0] * np.eye(N))
    grid_mid = grid[:-1] + 0.5 * np.diff(grid)
    H_fn = source.hamiltonian_many(grid_mid) if isinstance(source, Protocol) else source

    if is_scalar and psi0 is None:
        return InvariantDriftReport(drift=0.0, spectrum=spec0,
                                    max_commutator=0.0 if isinstance(source, Protocol) else None)

    U = step_unitaries(H_fn, grid)
    Fs = evolve_operator(F0, U)
    drift = 0.0 if is_scalar else float(np.max(np.abs(np.linalg.eigvalsh(Fs) - spec0)))

    init_res = max_res = None
    if psi0 is not None:
        psi = np.asarray(psi0, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        residuals = []
        for k in range(len(grid)):
            Q = np.eye(N) - np.outer(psi, psi.conj())
            residuals.append(float(np.max(np.abs(Q @ Fs[k] @ Q))))
            if k < len(U):
                psi = U[k] @ psi
        init_res, max_res = residuals[0], max(residuals)

    comm = None
    if isinstance(source, Protocol):
        Hc = source.hc_many(grid)
        comm = float(np.max(np.abs(Fs @ Hc - Hc @ Fs)))
    return InvariantDriftReport(drift=drift, spectrum=spec0,
                                initial_condition_residual=init_res,
                                max_condition_residual=max_res, max_commutator=comm)
