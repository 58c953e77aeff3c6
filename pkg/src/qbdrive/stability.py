"""Second-order instability functional I(t) and the spin-1 perturbations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import build_gellmann_basis, check_hermitian
from .driving import Protocol, counter_diabatic
from .errors import PreconditionError, ZeroVariance
from .spectral import track_eigenpath


def _moments(psi, A, B):
    psi = np.asarray(psi, dtype=complex)
    Apsi, Bpsi = A @ psi, B @ psi
    return Apsi, Bpsi, np.vdot(psi, Apsi).real, np.vdot(psi, Bpsi).real


def instability_general(psi, H, dH) -> float:
    """I = -var(dH) / (2 dE^2) + (3/8) (<{H, dH}> - 2<dH><H>)^2 / dE^4.

    Expectation values are taken in ``psi``; dE^2 is the energy variance of H.
    """
    H, dH = np.asarray(H, dtype=complex), np.asarray(dH, dtype=complex)
    Hpsi, dHpsi, h, d = _moments(psi, H, dH)
    dE2 = np.vdot(Hpsi, Hpsi).real - h * h
    if dE2 <= 1e-20:
        raise ZeroVariance(f"energy variance {dE2:.3e} too small")
    var = np.vdot(dHpsi, dHpsi).real - d * d
    anti = 2 * np.vdot(Hpsi, dHpsi).real - 2 * d * h
    return float(-var / (2 * dE2) + 0.375 * anti * anti / dE2 ** 2)


def instability_cd(psi, H1, dH, H0=None, tol: float = 1e-10) -> float:
    """I(t) for a state on an eigenstate of H_0 driven by H_0 + H_1.

    I = -var(dH) / (2 <H1^2>) + (3/8) <{H1, dH}>^2 / <H1^2>^2

    Requires <H1> = 0 in ``psi``; if ``H0`` is given, ``psi`` must also be
    one of its eigenvectors.
    """
    H1, dH = np.asarray(H1, dtype=complex), np.asarray(dH, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    H1psi, dHpsi, h1, d = _moments(psi, H1, dH)
    if abs(h1) > tol:
        raise PreconditionError(f"<H1> = {h1:.3e} is not zero; psi is not an adiabatic state")
    if H0 is not None:
        H0psi = np.asarray(H0) @ psi
        E = np.vdot(psi, H0psi)
        if np.linalg.norm(H0psi - E * psi) > tol * max(1.0, np.linalg.norm(H0psi)):
            raise PreconditionError("psi is not an eigenstate of H0")
    h1sq = np.vdot(H1psi, H1psi).real
    if h1sq <= 1e-12:
        raise ZeroVariance(f"<H1^2> = {h1sq:.3e} too small")
    var = np.vdot(dHpsi, dHpsi).real - d * d
    anti = 2 * np.vdot(H1psi, dHpsi).real
    return float(-var / (2 * h1sq) + 0.375 * anti * anti / h1sq ** 2)


@dataclass(frozen=True)
class Perturbation:
    label: str
    operator: np.ndarray              # fixed matrix multiplying the amplitude
    amplitude: Callable[[float], float]

    def __call__(self, t: float) -> np.ndarray:
        return self.amplitude(t) * self.operator

    def operator_fn(self, t: float) -> np.ndarray:
        return self(t)


def _as_profile(delta_h) -> Callable[[float], float]:
    if callable(delta_h):
        return delta_h
    value = float(delta_h)
    return lambda t: value


def spin1_perturbations(delta_h=0.5) -> list[Perturbation]:
    """The four spin-1 perturbations S3, 2 sqrt(2/3) l4, 2 sqrt(2/3) l5, (4/3) l8.

    ``delta_h`` is a constant or a function of time.  The prefactors are
    applied to the raw Gell-Mann matrices lambda_a.
    """
    amp = _as_profile(delta_h)
    g = build_gellmann_basis(3, scale=1.0)
    S3 = np.diag([1.0, 0.0, -1.0]).astype(complex)
    c = 2 * np.sqrt(2 / 3)
    ops = [("s3", S3), ("l4", c * g[4]), ("l5", c * g[5]), ("l8", 4 / 3 * g[8])]
    for _, op in ops:
        check_hermitian(op)
    return [Perturbation(label, np.array(op), amp) for label, op in ops]


def zero_perturbation(dim: int = 3) -> Perturbation:
    return Perturbation("none", np.zeros((dim, dim), dtype=complex), lambda t: 0.0)


@dataclass(frozen=True)
class StabilityReport:
    grid: np.ndarray
    I_values: np.ndarray
    classification: str   # "stable" | "unstable" | "marginal"

    @property
    def stable(self) -> bool:
        return self.classification == "stable"


def classify(values, tol: float = 1e-12) -> str:
    values = np.asarray(values)
    if np.all(values > tol):
        return "stable"
    if np.any(values < -tol):
        return "unstable"
    return "marginal"


def stability_report(protocol: Protocol, perturbation, grid, branch: int = -1,
                     tol: float = 1e-12) -> StabilityReport:
    """Evaluate I(t) on the unperturbed adiabatic state of ``branch``.

    I depends on the state only through its projector, so the tracked
    eigenvector of H_0(t) is used directly without the LR phase.
    ``perturbation`` is a Perturbation or a callable t -> dH.
    """
    grid = np.asarray(grid, dtype=float)
    path = track_eigenpath(protocol, grid)
    n = branch % protocol.dim
    values = np.empty(len(grid))
    for k, t in enumerate(grid):
        psi = path.vectors[k][:, n]
        dH = perturbation(t)
        if not np.any(dH):
            values[k] = 0.0
            continue
        values[k] = instability_cd(psi, counter_diabatic(protocol, t), dH)
    return StabilityReport(grid=grid, I_values=values, classification=classify(values, tol))
