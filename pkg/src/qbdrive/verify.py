"""Self-checks behind ``qbdrive verify``.

Each check returns ``(passed, detail)``.  They reuse the same reference
values as the test-suite but run without pytest.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .algebra import build_gellmann_basis, spin_one_operators, to_coeffs, to_matrix
from .driving import Protocol, counter_diabatic, counter_diabatic_many, invariant_drift
from .dynamics import propagate
from .errors import NoCompletion
from .experiment import adiabatic_spin1_state, s1_plus_state, spin1_protocol, time_grid
from .qb import solve_completion, solve_h1_n2, solve_trajectory
from .stability import instability_cd, spin1_perturbations

SQ6 = math.sqrt(6)
# f_abc of the normalised N=3 Gell-Mann basis, 1-based labels
SU3_REFERENCE = {
    (1, 2, 3): SQ6, (1, 4, 7): SQ6 / 2, (1, 5, 6): -SQ6 / 2,
    (2, 4, 6): SQ6 / 2, (2, 5, 7): SQ6 / 2, (3, 4, 5): SQ6 / 2,
    (3, 6, 7): -SQ6 / 2, (4, 5, 8): math.sqrt(3) / 2 * SQ6, (6, 7, 8): math.sqrt(3) / 2 * SQ6,
}


def reference_tensor() -> np.ndarray:
    """Dense antisymmetric tensor built from the nine tabulated entries."""
    f = np.zeros((8, 8, 8))
    for (a, b, c), v in SU3_REFERENCE.items():
        for (i, j, k), s in (((a, b, c), 1), ((b, c, a), 1), ((c, a, b), 1),
                             ((b, a, c), -1), ((a, c, b), -1), ((c, b, a), -1)):
            f[i - 1, j - 1, k - 1] = s * v
    return f


# -- algebra --------------------------------------------------------------------

def check_reference_constants():
    f = build_gellmann_basis(3).structure
    err = float(np.max(np.abs(f - reference_tensor())))
    return err < 1e-12, f"max |f - reference| = {err:.2e} over all 512 components"


def check_basis_invariants():
    worst = 0.0
    for N in (2, 3, 4, 5):
        B = build_gellmann_basis(N)
        X = B.generators
        gram = np.einsum("aij,bji->ab", X, X).real / N
        worst = max(worst, np.max(np.abs(gram - np.eye(B.size))),
                    np.max(np.abs(X - X.conj().transpose(0, 2, 1))),
                    np.max(np.abs(np.trace(X, axis1=1, axis2=2))))
        comm = np.einsum("aij,bjk->abik", X, X) - np.einsum("bij,ajk->abik", X, X)
        recon = 1j * np.einsum("abc,cik->abik", B.structure, X)
        worst = max(worst, np.max(np.abs(comm - recon)))
    return worst < 1e-12, f"worst invariant violation for N=2..5: {worst:.2e}"


def check_jacobi():
    f = build_gellmann_basis(3).structure
    J = (np.einsum("abe,ecd->abcd", f, f) + np.einsum("cbe,aed->abcd", f, f)
         + np.einsum("dbe,ace->abcd", f, f))
    err = float(np.max(np.abs(J)))
    return err < 1e-10, f"max Jacobi residual {err:.2e}"


# -- qb -------------------------------------------------------------------------

def _random_n2(rng):
    a, w, p = rng.normal(size=3), rng.uniform(0.2, 2.0, 3), rng.uniform(0, 2 * np.pi, 3)
    c = rng.normal(size=3)

    def h(t):
        return c + a * np.sin(w * t + p)

    def dh(t):
        return a * w * np.cos(w * t + p)

    return h, dh


def check_n2_equivalence(n_protocols=20, seed=0):
    rng = np.random.default_rng(seed)
    half = build_gellmann_basis(2, scale=0.5)
    worst = 0.0
    for _ in range(n_protocols):
        h, dh = _random_n2(rng)
        proto = Protocol(half, (1, 2, 3), h, dh)
        for t in rng.uniform(0, 10, 5):
            closed = solve_h1_n2(h(t), dh(t))
            spectral = to_coeffs(counter_diabatic(proto, t), half).vec
            worst = max(worst, np.max(np.abs(closed - spectral)))
        # two-component constraint: compare with the completion solver
        h2 = lambda t, h=h: h(t) * np.array([1.0, 1.0, 0.0])
        for t in rng.uniform(0, 10, 5):
            hv, dv = h2(t), dh(t) * np.array([1.0, 1.0, 0.0])
            comp = solve_completion(hv, dv, (1, 2), half)
            worst = max(worst, np.max(np.abs(comp.particular - solve_h1_n2(hv, dv))))
    return worst < 1e-9, f"max deviation closed form vs completion/spectral: {worst:.2e}"


def reference_h1_124(h, d):
    h1, h2, h4 = h[0], h[1], h[3]
    d1, d2, d4 = d[0], d[1], d[3]
    n2 = h @ h
    a12 = (h1 * d2 - h2 * d1) / n2
    v = np.zeros(8)
    v[2] = (1 + 3 * h4 ** 2 / (2 * n2)) * a12 / SQ6
    v[5] = math.sqrt(1.5) * h4 * h1 / n2 * a12 + math.sqrt(2 / 3) * (h2 * d4 - h4 * d2) / n2
    v[6] = -math.sqrt(1.5) * h4 * h2 / n2 * a12 - math.sqrt(2 / 3) * (h4 * d1 - h1 * d4) / n2
    v[7] = -3 * math.sqrt(2) / 4 * h4 ** 2 / n2 * a12
    return v


def check_k3_124(seed=1):
    rng = np.random.default_rng(seed)
    B = build_gellmann_basis(3)
    worst = 0.0
    for _ in range(50):
        h, d = np.zeros(8), np.zeros(8)
        h[[0, 1, 3]] = rng.normal(size=3)
        d[[0, 1, 3]] = rng.normal(size=3)
        comp = solve_completion(h, d, (1, 2, 4), B)
        diff = reference_h1_124(h, d) - comp.particular
        coef = np.linalg.lstsq(comp.nullspace.T, diff, rcond=None)[0]
        worst = max(worst, np.linalg.norm(diff - comp.nullspace.T @ coef))
    return worst < 1e-9, f"closed-form h3,h6,h7,h8 minus solver, off the nullspace: {worst:.2e}"


def protocol_345(theta_rate=0.7):
    B = build_gellmann_basis(3)

    def h0(t):
        v = np.zeros(8)
        v[2] = 0.3 + 0.2 * np.sin(t)
        v[3] = 1.2 * np.cos(theta_rate * t)
        v[4] = 1.2 * np.sin(theta_rate * t) + 0.1 * t
        return v

    def dh0(t):
        v = np.zeros(8)
        v[2] = 0.2 * np.cos(t)
        v[3] = -1.2 * theta_rate * np.sin(theta_rate * t)
        v[4] = 1.2 * theta_rate * np.cos(theta_rate * t) + 0.1
        return v

    return Protocol(B, (3, 4, 5), h0, dh0)


def h8_closed_form_345(h, d, theta, basis):
    f345, f458 = basis.f(3, 4, 5), basis.f(4, 5, 8)
    rho2 = h[3] ** 2 + h[4] ** 2
    return (f345 / f458) * ((h[3] * d[4] - h[4] * d[3]) / rho2 / f345 - h[2]
                            + math.sqrt(rho2) * math.tan(theta))


def l0_345(h, theta):
    rho = math.hypot(h[3], h[4])
    l0 = np.zeros(8)
    l0[2], l0[3], l0[4] = math.sin(theta), h[3] / rho * math.cos(theta), h[4] / rho * math.cos(theta)
    return l0


def check_k3_345(theta=0.4, t_max=5.0, dt=1e-3):
    P = protocol_345()
    try:
        solve_completion(P.h0(0.0), P.dh0(0.0), P.constraint_indices, P.basis)
        no_completion = False
    except NoCompletion:
        no_completion = True
    grid = time_grid(t_max, dt)
    tr = solve_trajectory(P, l0_345(P.h0(0.0), theta), grid)
    h8 = np.array([h8_closed_form_345(P.h0(t), P.dh0(t), theta, P.basis) for t in grid])
    err8 = float(np.max(np.abs(tr.h1_path[:, 7] - h8)))
    other = float(np.max(np.abs(tr.h1_path[:, [0, 1, 5, 6]])))
    ok = no_completion and err8 < 1e-8 and other < 1e-10
    return ok, (f"NoCompletion={no_completion}; |h8 - closed form| = {err8:.2e}; "
                f"other complement components {other:.2e}")


# -- driving --------------------------------------------------------------------

def check_spin1_cd(h0=1.0, omega=math.pi / 20):
    P = spin1_protocol(h0, omega)
    _, _, S3 = spin_one_operators()
    ts = np.linspace(0, 40, 100)
    err = float(np.max(np.abs(counter_diabatic_many(P, ts) - omega * S3)))
    return err < 1e-10, f"max |H1 - omega S3| = {err:.2e} at 100 times"


def check_transport(h0=1.0, omega=math.pi / 20, t_max=40.0, dt=1e-3):
    P = spin1_protocol(h0, omega)
    grid = time_grid(t_max, dt)
    mids = grid[:-1] + dt / 2
    rec = propagate(P.hamiltonian_many(mids), s1_plus_state(), grid)
    ideal = adiabatic_spin1_state(grid, omega)
    fid = np.abs(np.einsum("ki,ki->k", ideal.conj(), rec.states)) ** 2
    worst = float(1 - fid.min())
    return worst <= 1e-6, f"1 - min fidelity over [0, {t_max}] = {worst:.2e}"


def check_invariant(h0=1.0, omega=math.pi / 20, t_max=40.0, dt=1e-3):
    P = spin1_protocol(h0, omega)
    hc = P.h0(0.0)
    F0 = to_matrix(hc / np.linalg.norm(hc), P.basis)
    rep = invariant_drift(F0, P, time_grid(t_max, dt))
    return rep.drift < 1e-8, f"spectral drift of F(t) = {rep.drift:.2e}"


# -- stability ------------------------------------------------------------------

def closed_form_instability(label, t, delta_h, omega):
    """Reference closed forms of I(t) for the four spin-1 perturbations."""
    base = delta_h ** 2 / omega ** 2
    return base * {"s3": 1.0,
                   "l4": -2 / 3 * (1 + math.sin(2 * omega * t) ** 2),
                   "l5": -2 / 3 * (1 + math.cos(2 * omega * t) ** 2),
                   "l8": -1.0}[label]


def derived_l8_instability(delta_h, omega):
    # var term -1 and anticommutator term +2 (in units delta_h^2/omega^2)
    return delta_h ** 2 / omega ** 2


def _instability_along_ad2(label, delta_h=0.5, omega=math.pi / 20, n=200):
    pert = {p.label: p for p in spin1_perturbations(delta_h)}[label]
    _, _, S3 = spin_one_operators()
    ts = np.linspace(0, 2 * math.pi / omega, n)
    psi = adiabatic_spin1_state(ts, omega)
    return ts, np.array([instability_cd(p, omega * S3, pert(t)) for t, p in zip(ts, psi)])


def make_stability_check(label, delta_h=0.5, omega=math.pi / 20):
    def check():
        ts, vals = _instability_along_ad2(label, delta_h, omega)
        if label == "l8":
            ref = np.full_like(ts, derived_l8_instability(delta_h, omega))
            err = float(np.max(np.abs(vals - ref)))
            reference = closed_form_instability("l8", 0.0, delta_h, omega)
            return err < 1e-8, (f"max error {err:.2e} against +dh^2/w^2 "
                                f"(closed form {reference:.4g} omits the anticommutator term)")
        ref = np.array([closed_form_instability(label, t, delta_h, omega) for t in ts])
        err = float(np.max(np.abs(vals - ref)))
        return err < 1e-8, f"max error {err:.2e} against the closed form"
    return check


def check_cd_quadratic(seed=2):
    rng = np.random.default_rng(seed)
    B = build_gellmann_basis(3)
    worst = 0.0
    for _ in range(20):
        h = np.zeros(8)
        h[[0, 1]] = rng.normal(size=2)
        d = np.zeros(8)
        d[[0, 1]] = rng.normal(size=2)
        P = Protocol(B, (1, 2), lambda t, h=h, d=d: h + t * d, lambda t, d=d: d)
        H1 = counter_diabatic(P, 0.0)
        from .spectral import eigh
        es = eigh(P.hc_matrix(0.0))
        psi = es.vectors[:, -1]
        c = rng.normal()
        worst = max(worst, abs(instability_cd(psi, H1, c * H1) - c * c))
    return worst < 1e-10, f"max |I - c^2| for dH = c H1: {worst:.2e}"


SUITES: dict[str, list[tuple[str, Callable]]] = {
    "algebra": [("su(3) structure constants", check_reference_constants),
                ("basis invariants N=2..5", check_basis_invariants),
                ("Jacobi identity N=3", check_jacobi)],
    "qb": [("N=2 closed form equivalence", check_n2_equivalence),
           ("k=3 constraints {1,2,4}", check_k3_124),
           ("k=3 constraints {3,4,5}", check_k3_345)],
    "driving": [("spin-1 counter-diabatic term", check_spin1_cd),
                ("exact transitionless transport", check_transport),
                ("invariant spectrum constancy", check_invariant)],
    "stability": [("I = c^2 for dH = c H1", check_cd_quadratic)]
                 + [(f"closed-form I(t), {lab}", make_stability_check(lab))
                    for lab in ("s3", "l4", "l5", "l8")],
}


def run_suite(name: str, out=print) -> bool:
    names = list(SUITES) if name == "all" else [name]
    if any(n not in SUITES for n in names):
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    ok_all = True
    for suite in names:
        for label, check in SUITES[suite]:
            try:
                ok, detail = check()
            except Exception as exc:  # a crash is a failed check, reported as such
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            ok_all &= bool(ok)
            out(f"[{'PASS' if ok else 'FAIL'}] {suite}: {label} -- {detail}")
    return ok_all
