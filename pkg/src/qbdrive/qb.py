"""Quantum-brachistochrone completions and trajectories.

With the constraint components h^(0) fixed, the remaining components
h^(1) of the Hamiltonian follow from the equation of motion of the
invariant coefficients, dl/dt = h x l.  Two solvers are provided:

* :func:`solve_completion` assumes l is parallel to h^(0) and solves the
  linear equation  dh0/dt - (d|h0|/dt / |h0|) h0 = h1 x h0  pointwise;
* :func:`solve_trajectory` integrates l(t) itself, which is needed when
  the constraint generators do not close among themselves in the other
  direction, e.g. the {3, 4, 5} subalgebra of su(3).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (GeneratorBasis, cross, cross_matrix, projector_coeffs,
                      to_matrix, _vec)
from .driving import Protocol
from .errors import (DegenerateSegment, DimensionMismatch, InitialConditionViolated,
                     NoCompletion, NoSolution, ZeroField)

SV_CUTOFF = 1e-10


def _labels_mask(indices, size) -> np.ndarray:
    mask = np.zeros(size, dtype=bool)
    mask[[a - 1 for a in indices]] = True
    return mask


def _pinv_solve(A, b, cutoff=SV_CUTOFF):
    """Minimal-norm least squares plus an orthonormal nullspace basis."""
    U, s, Vt = np.linalg.svd(A, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > cutoff * smax)) if smax > 0 else 0
    x = Vt[:rank].T @ ((U[:, :rank].T @ b) / s[:rank])
    return x, Vt[rank:], U[:, rank:]


def commutation_condition(hC, l, basis: GeneratorBasis) -> tuple[bool, float]:
    """Whether [H_C, F] = 0, i.e. h0 x l = 0, and the residual |h0 x l|."""
    hC, l = _vec(hC), _vec(l)
    res = float(np.linalg.norm(cross(hC, l, basis)))
    scale = np.linalg.norm(hC) * np.linalg.norm(l)
    return res <= 1e-10 * scale, res


@dataclass(frozen=True)
class QBCompletion:
    """Completion h^(1) on the complement of the constraint set.

    ``particular`` is the minimal-norm solution, ``nullspace`` holds one
    direction per row; adding any combination of them commutes with H_C.
    """

    particular: np.ndarray
    nullspace: np.ndarray
    residual: float
    tolerance: float

    @property
    def solvable(self) -> bool:
        return self.residual <= self.tolerance

    def with_free(self, coeffs) -> np.ndarray:
        return self.particular + np.asarray(coeffs, dtype=float) @ self.nullspace


def completion_rhs(h0, dh0) -> np.ndarray:
    """dh0 minus its component along h0: dh0 - (d|h0|/dt / |h0|) h0."""
    h0, dh0 = _vec(h0), _vec(dh0)
    n2 = h0 @ h0
    return dh0 - (h0 @ dh0) / n2 * h0


def solve_completion(h0, dh0, constraint_indices, basis: GeneratorBasis,
                     strict: bool = True) -> QBCompletion:
    """Solve dh0 - (d|h0|/|h0|) h0 = h1 x h0 for h1 on the complement.

    Raises NoCompletion when the least-squares residual exceeds
    1e-8 |dh0| (then H_0 differs from H_C); pass ``strict=False`` to get
    the inconsistent least-squares result back instead.
    """
    h0, dh0 = _vec(h0), _vec(dh0)
    if h0.shape != (basis.size,) or dh0.shape != (basis.size,):
        raise DimensionMismatch("h0 and dh0 must have length N^2-1")
    if np.linalg.norm(h0) < 1e-12:
        raise ZeroField("constraint field vanishes")
    S = _labels_mask(constraint_indices, basis.size)
    if np.abs(h0[~S]).max(initial=0.0) > 0 or np.abs(dh0[~S]).max(initial=0.0) > 0:
        raise ValueError("h0 and dh0 must be supported on the constraint indices")
    C = ~S
    rhs = completion_rhs(h0, dh0)
    A = cross_matrix(h0, basis)[:, C]  # (h1 x h0) = A @ h1_C
    x, null, _ = _pinv_solve(A, rhs)
    particular = np.zeros(basis.size)
    particular[C] = x
    nullspace = np.zeros((len(null), basis.size))
    nullspace[:, C] = null
    residual = float(np.linalg.norm(A @ x - rhs))
    tol = 1e-8 * np.linalg.norm(dh0) + 1e-14
    comp = QBCompletion(particular, nullspace, residual, tol)
    if strict and not comp.solvable:
        raise NoCompletion(
            f"completion residual {residual:.3e} exceeds {tol:.3e}; H_0 != H_C", comp)
    return comp


def solve_h1_n2(h0, dh0) -> np.ndarray:
    """Two-level closed form h1 = h0 x dh0 / |h0|^2 (ordinary cross product).

    Field convention H = (1/2) h . sigma.
    """
    h0 = np.asarray(h0, dtype=float)
    dh0 = np.asarray(dh0, dtype=float)
    n2 = float(h0 @ h0)
    if n2 < 1e-24:
        raise ZeroField("constraint field vanishes")
    return np.cross(h0, dh0) / n2


@dataclass
class QBTrajectory:
    grid: np.ndarray
    l_path: np.ndarray    # (M+1, N^2-1), supported on the constraint set
    h1_path: np.ndarray   # (M+1, N^2-1), supported on the complement
    residuals: np.ndarray
    nullspace_dims: np.ndarray
    free_params: dict = field(default_factory=dict)


class _TrajectorySystem:
    """Algebraic part of dl/dt = h x l at fixed (t, l).

    Unknowns are the complement components x of h = h0 + x.  Rows:
      * (h x l)_a = 0 for a off the constraint set;
      * for every left-null direction q of those rows (conditions x cannot
        reach), the time derivative q . [h x dl/dt + dh0/dt x l] = 0, so
        the condition keeps holding along the flow.
    """

    def __init__(self, protocol: Protocol):
        self.basis = protocol.basis
        self.protocol = protocol
        self.S = protocol.mask
        self.C = ~self.S

    def residual_and_jacobian(self, x, h0, dh0, l):
        f_S, C = self.S, self.C
        n = self.basis.size
        EC = np.eye(n)[:, C]
        Ml = cross_matrix(l, self.basis)
        y = h0.copy()
        y[C] += x
        A1 = Ml[C][:, C]
        r1 = (Ml @ y)[C]
        _, _, Q = _pinv_solve(A1, np.zeros(A1.shape[0]))
        if Q.shape[1] == 0:
            return r1, A1, 0
        u = np.where(f_S, Ml @ y, 0.0)               # dl/dt
        r2 = Q.T @ (cross(y, u, self.basis) + cross(dh0, l, self.basis))[C]
        PS_Ml = np.where(f_S[:, None], Ml, 0.0)
        # d(y x u) = dy x u + y x du, with du = P_S M(l) dy
        Yf = np.einsum("abc,b->ac", self.basis.structure, y)
        J2 = Q.T @ (cross_matrix(u, self.basis) + Yf @ PS_Ml)[C] @ EC
        return np.concatenate([r1, r2]), np.vstack([A1, J2]), Q.shape[1]

    def solve(self, t, l, free_fn=None, max_iter=20):
        h0 = self.protocol.h0(t)
        dh0 = self.protocol.dh0(t)
        x = np.zeros(int(self.C.sum()))
        null = np.zeros((0, x.size))
        for _ in range(max_iter):
            r, J, _ = self.residual_and_jacobian(x, h0, dh0, l)
            step, null, _ = _pinv_solve(J, -r)
            x = x + step
            if np.linalg.norm(step) <= 1e-14 * max(1.0, np.linalg.norm(x)):
                break
        if free_fn is not None and len(null):
            x = x + np.asarray(free_fn(t), dtype=float)[: len(null)] @ null
        r, _, _ = self.residual_and_jacobian(x, h0, dh0, l)
        scale = max(1.0, np.linalg.norm(h0), np.linalg.norm(dh0))
        return h0, x, float(np.linalg.norm(r)) / scale, len(null)

    def velocity(self, t, l, free_fn=None):
        h0, x, res, _ = self.solve(t, l, free_fn)
        y = h0.copy()
        y[self.C] += x
        return np.where(self.S, cross(y, l, self.basis), 0.0), res


def _initial_condition_residual(l0, psi0, basis: GeneratorBasis) -> float:
    """max |(1 - P) F (1 - P)| with the full invariant including its constant part."""
    N = basis.dim
    e0 = projector_coeffs(psi0, basis)
    lY = l0 * np.sqrt(basis.gram)
    norm = np.linalg.norm(lY)
    F0 = (lY @ e0) / norm / np.sqrt(N - 1) * np.eye(N) + to_matrix(l0, basis) / norm
    psi = np.asarray(psi0, dtype=complex) / np.linalg.norm(psi0)
    Q = np.eye(N) - np.outer(psi, psi.conj())
    return float(np.max(np.abs(Q @ F0 @ Q)))


def solve_trajectory(protocol: Protocol, l0, grid, free_fn=None, psi0=None,
                     tol: float = 1e-8) -> QBTrajectory:
    """Integrate l(t) and the completion h1(t) along ``grid``.

    At each time the complement components are the minimal-norm solution
    of the algebraic system in :class:`_TrajectorySystem`; remaining free
    directions are filled from ``free_fn(t)`` (default zero).  l advances on
    the constraint components with classical RK4 and is renormalised after
    every step.
    """
    basis = protocol.basis
    grid = np.asarray(grid, dtype=float)
    l = _vec(l0).copy()
    S = protocol.mask
    if np.abs(l[~S]).max(initial=0.0) > 1e-12:
        raise ValueError("l0 must be supported on the constraint indices")
    if abs(np.linalg.norm(l) - 1.0) > 1e-12:
        raise ValueError("l0 must be a unit vector")
    if psi0 is not None:
        res = _initial_condition_residual(l, psi0, basis)
        if res > 1e-10:
            raise InitialConditionViolated(
                f"(1-P)F(1-P) residual {res:.3e} at t=0 for the supplied state")

    system = _TrajectorySystem(protocol)
    M = len(grid)
    ls = np.zeros((M, basis.size))
    h1s = np.zeros((M, basis.size))
    res = np.zeros(M)
    dims = np.zeros(M, dtype=int)

    def rhs(t, lv):
        # RK stages sit slightly off the constraint manifold; only grid
        # points are checked against ``tol``
        return system.velocity(t, lv, free_fn)[0]

    for k, t in enumerate(grid):
        _, x, r, nd = system.solve(t, l, free_fn)
        if r > tol:
            raise NoSolution(f"algebraic system inconsistent at t={t} (residual {r:.3e})", t)
        ls[k] = l
        h1s[k, ~S] = x
        res[k], dims[k] = r, nd
        if k == M - 1:
            break
        dt = grid[k + 1] - t
        k1 = rhs(t, l)
        k2 = rhs(t + dt / 2, l + dt / 2 * k1)
        k3 = rhs(t + dt / 2, l + dt / 2 * k2)
        k4 = rhs(t + dt, l + dt * k3)
        l = l + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        l[~S] = 0.0
        l /= np.linalg.norm(l)

    free = {"nullspace_dim": int(dims.max()),
            "free_functions": "zero" if free_fn is None else "user supplied"}
    return QBTrajectory(grid=grid, l_path=ls, h1_path=h1s, residuals=res,
                        nullspace_dims=dims, free_params=free)


def passage_time(states, H, grid, derivative: str = "schroedinger") -> float:
    """Integral of sqrt(<dpsi|(1-P)|dpsi>) / dE over the grid (trapezoid).

    ``H`` is an array of matrices on the grid or a callable t -> H.
    ``derivative="schroedinger"`` uses dpsi/dt = -i H psi, for which the
    integrand is one on an exact trajectory; ``"difference"`` takes dpsi/dt
    from second-order finite differences of ``states`` and so also tests
    that the states actually solve the equation.
    """
    grid = np.asarray(grid, dtype=float)
    states = np.asarray(states, dtype=complex)
    Hs = np.array([H(t) for t in grid]) if callable(H) else np.asarray(H, dtype=complex)
    if derivative == "difference":
        dpsi = np.gradient(states, grid, axis=0, edge_order=2)
    elif derivative == "schroedinger":
        dpsi = -1j * np.einsum("kij,kj->ki", Hs, states)
    else:
        raise ValueError(f"unknown derivative mode {derivative!r}")
    Hpsi = np.einsum("kij,kj->ki", Hs, states)
    dE2 = (np.einsum("ki,ki->k", Hpsi.conj(), Hpsi).real
           - np.einsum("ki,ki->k", states.conj(), Hpsi).real ** 2)
    bad = np.flatnonzero(dE2 < 1e-24)
    if len(bad):
        raise DegenerateSegment(f"energy variance vanishes at t={grid[bad[0]]}")
    speed2 = (np.einsum("ki,ki->k", dpsi.conj(), dpsi).real
              - np.abs(np.einsum("ki,ki->k", states.conj(), dpsi)) ** 2)
    integrand = np.sqrt(np.maximum(speed2, 0.0) / dE2)
    return float(np.sum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(grid)))
