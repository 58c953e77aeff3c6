"""The spin-1 rotating-field experiment: configuration, runs and CSV files.

H_0(t) = h0 (cos(wt) S1 + sin(wt) S2) is driven with its counter-diabatic
term and one of four perturbations.  Each run records, on the time grid,
the fidelity with the ideal adiabatic state, the probability of the S2 = +1
eigenstate, the same probability for ideal driving, and I(t).
"""
from __future__ import annotations

import ast
import math
import operator
import os
import tempfile
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import build_gellmann_basis, spin_one_operators, to_coeffs
from .driving import Protocol, counter_diabatic_many
from .dynamics import eigenvector_for, midpoints, propagate
from .errors import ConfigError
from .stability import instability_cd, spin1_perturbations

PERTURBATIONS = ("none", "s3", "l4", "l5", "l8")
FIELDS = ("t", "fidelity", "prob_s2_plus", "prob_ideal_reference", "I_t")
# CSV column row; the ideal reference is written as "prob_ideal"
COLUMNS = ("t", "fidelity", "prob_s2_plus", "prob_ideal", "I_t")


@dataclass(frozen=True)
class ExperimentConfig:
    N: int = 3
    h0: float = 1.0
    omega: float = math.pi / 20
    delta_h: float = 0.5
    t_max: float = 40.0
    dt: float = 1e-3
    perturbation: str = "none"
    record_every: int = 10
    seed: int = 0
    out_csv: str | None = None
    out_svg: str | None = None

    def validate(self) -> "ExperimentConfig":
        if self.N != 3:
            raise ConfigError("the rotating-field experiment is defined for N=3 only")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.t_max >= self.dt:
            raise ConfigError("t_max must be at least dt")
        if not self.h0 > 0:
            raise ConfigError("h0 must be positive")
        if self.omega == 0 or not math.isfinite(self.omega):
            raise ConfigError("omega must be finite and nonzero")
        if self.perturbation not in PERTURBATIONS:
            raise ConfigError(f"perturbation must be one of {PERTURBATIONS}")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        return self

    def echo(self) -> dict:
        """Fields needed to rerun the experiment (output paths excluded)."""
        d = asdict(self)
        d.pop("out_csv")
        d.pop("out_svg")
        return d


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow,
        ast.USub: operator.neg, ast.UAdd: operator.pos}


def _number(text: str) -> float:
    """Parse a float, also accepting simple arithmetic with ``pi``."""
    try:
        return float(text)
    except ValueError:
        pass

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"cannot parse number {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, value):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    if value is None:
        return None
    kind = _FIELD_TYPES[key]
    if kind == "int":
        v = _number(str(value))
        if v != int(v):
            raise ConfigError(f"{key} must be an integer")
        return int(v)
    if kind == "float":
        return _number(str(value))
    return str(value)


def parse_config_text(text: str) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = _coerce(key, value)
    return out


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then the file, then ``overrides`` (entries that are None are skipped)."""
    values = {}
    if path is not None:
        try:
            values.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _coerce(key, value)
    return ExperimentConfig(**values).validate()


# -- the physical setup -------------------------------------------------------

def spin1_protocol(h0: float, omega: float) -> Protocol:
    """Rotating field in the S1-S2 plane expressed in the normalised Gell-Mann basis."""
    basis = build_gellmann_basis(3)
    S1, S2, _ = spin_one_operators()
    s1, s2 = to_coeffs(S1, basis).vec, to_coeffs(S2, basis).vec
    labels = tuple(int(a) + 1 for a in np.flatnonzero((np.abs(s1) + np.abs(s2)) > 1e-14))

    def h0_fn(t):
        return h0 * (math.cos(omega * t) * s1 + math.sin(omega * t) * s2)

    def dh0_fn(t):
        return h0 * omega * (-math.sin(omega * t) * s1 + math.cos(omega * t) * s2)

    return Protocol(basis, labels, h0_fn, dh0_fn)


def adiabatic_spin1_state(t, omega: float) -> np.ndarray:
    """(1/2)(exp(-iwt), sqrt 2, exp(iwt)); vectorised over t."""
    t = np.asarray(t, dtype=float)
    return 0.5 * np.stack([np.exp(-1j * omega * t), np.full(t.shape, math.sqrt(2)),
                           np.exp(1j * omega * t)], axis=-1)


def s1_plus_state() -> np.ndarray:
    return np.array([0.5, math.sqrt(0.5), 0.5], dtype=complex)


def time_grid(t_max: float, dt: float) -> np.ndarray:
    n = max(1, int(round(t_max / dt)))
    return np.linspace(0.0, n * dt, n + 1)


def perturbation_for(config: ExperimentConfig):
    if config.perturbation == "none":
        return None
    return {p.label: p for p in spin1_perturbations(config.delta_h)}[config.perturbation]


@dataclass
class RunOutput:
    config: ExperimentConfig
    t: np.ndarray
    fidelity: np.ndarray
    prob_s2_plus: np.ndarray
    prob_ideal_reference: np.ndarray
    I_t: np.ndarray
    metadata: dict

    def columns(self) -> dict:
        return {col: getattr(self, name) for col, name in zip(COLUMNS, FIELDS)}

    def mean_fidelity(self) -> float:
        return float(np.mean(self.fidelity))


def run_experiment(config: ExperimentConfig) -> RunOutput:
    """Propagate the S1(+1) eigenstate under H_0 + H_1 (+ perturbation)."""
    config.validate()
    protocol = spin1_protocol(config.h0, config.omega)
    pert = perturbation_for(config)
    _, S2, _ = spin_one_operators()

    grid = time_grid(config.t_max, config.dt)
    mids = midpoints(grid)
    H = protocol.hc_many(mids) + counter_diabatic_many(protocol, mids)
    if pert is not None:
        H = H + np.array([pert.amplitude(t) for t in mids])[:, None, None] * pert.operator
    record = propagate(H, s1_plus_state(), grid)
    keep = slice(None, None, config.record_every)
    t = grid[keep]
    if t[-1] != grid[-1]:
        t = np.append(t, grid[-1])
        states = np.vstack([record.states[keep], record.states[-1:]])
    else:
        states = record.states[keep]

    ideal = adiabatic_spin1_state(t, config.omega)
    s2_plus = eigenvector_for(S2, 1.0)
    fid = np.clip(np.abs(np.einsum("ki,ki->k", ideal.conj(), states)) ** 2, 0.0, 1.0)
    prob = np.clip(np.abs(states @ s2_plus.conj()) ** 2, 0.0, 1.0)
    prob_ideal_reference = np.clip(np.abs(ideal @ s2_plus.conj()) ** 2, 0.0, 1.0)
    if pert is None:
        I_t = np.zeros(len(t))
    else:
        H1 = counter_diabatic_many(protocol, t)
        I_t = np.array([instability_cd(psi, h1, pert(tk)) for tk, psi, h1 in zip(t, ideal, H1)])
    meta = {"version": __version__, "norm_drift": record.norm_drift()}
    return RunOutput(config, t, fid, prob, prob_ideal_reference, I_t, meta)


# -- CSV ----------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def csv_text(run: RunOutput) -> str:
    echo = run.config.echo()
    header = " ".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                      for k, v in echo.items())
    lines = [f"# {header} version={run.metadata.get('version', __version__)}",
             ",".join(COLUMNS)]
    cols = run.columns()
    for k in range(len(run.t)):
        lines.append(",".join(_fmt(cols[c][k]) for c in COLUMNS))
    return "\n".join(lines) + "\n"


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(run: RunOutput, path) -> Path:
    return atomic_write(path, csv_text(run))


def read_csv(path) -> RunOutput:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ConfigError(f"{path}: missing '# key=value' header")
    header = dict(tok.split("=", 1) for tok in lines[0][1:].split())
    version = header.pop("version", None)
    config = ExperimentConfig(**{k: _coerce(k, v) for k, v in header.items()})
    if tuple(lines[1].split(",")) != COLUMNS:
        raise ConfigError(f"{path}: unexpected column row {lines[1]!r}")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:] if ln],
                    dtype=float).reshape(-1, len(COLUMNS))
    return RunOutput(config, *(data[:, i].copy() for i in range(len(COLUMNS))),
                     metadata={"version": version})


def with_overrides(config: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None}).validate()
