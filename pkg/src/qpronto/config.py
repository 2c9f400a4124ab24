"""Problem descriptions: JSON config files and built-in presets.

A config is one JSON document carrying ``schema_version``. Complex matrices
and kets are written as ``{"re": ..., "im": ...}`` pairs; ``im`` may be
omitted for real data. Time-dependent weights and guesses are described by a
``kind`` plus parameters and are sampled onto the solver grid.
"""

import copy
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .embedding import embed_state, is_hermitian
from .model import (
    CouplingFunction,
    QuantumSystem,
    flanked_pulse,
    flanked_weight,
    state_transfer_cost,
)
from .odegrid import SampledSignal, TimeGrid
from .solver import SolverConfig

SCHEMA_VERSION = 1
KET_TOL = 1e-12
SOLVER_DEFAULTS = {
    "tol": 1e-2,
    "alpha": 0.4,
    "beta": 0.7,
    "delta": 0.6,
    "max_iters": 50,
    "max_backtracks": 40,
}


class ConfigError(ValueError):
    """Invalid problem description; ``field`` names the offending entry."""

    def __init__(self, field, message, line=None):
        self.field = field
        self.message = message
        self.line = line
        where = f" (line {line})" if line else ""
        super().__init__(f"{field}{where}: {message}")


@dataclass(eq=False)
class ProblemConfig:
    raw: dict
    system: QuantumSystem
    initial_state: np.ndarray
    target_state: np.ndarray
    horizon: float
    grid_steps: int

    @property
    def name(self):
        return self.raw.get("name", "unnamed")

    @property
    def n(self):
        return self.system.n

    @property
    def m(self):
        return self.system.m

    @property
    def grid(self):
        return TimeGrid(self.horizon, self.grid_steps)

    @property
    def x0(self):
        return embed_state(self.initial_state)

    def cost(self):
        raw = self.raw
        forbidden = raw.get("forbidden_state")
        return state_transfer_cost(
            self.target_state,
            weight_function(raw["input_weight"], self.horizon),
            m=self.m,
            forbidden=None if forbidden is None else _ket(forbidden["ket"], "forbidden_state.ket"),
            forbidden_weight=float(forbidden.get("weight", 1.0)) if forbidden else 1.0,
        )

    def initial_guess(self):
        spec = self.raw["initial_guess"]
        specs = spec if isinstance(spec, list) else [spec] * self.m
        grid = self.grid
        columns = [guess_samples(s, grid) for s in specs]
        return SampledSignal(grid, np.column_stack(columns))

    def solver_config(self):
        params = {**SOLVER_DEFAULTS, **self.raw.get("solver", {})}
        return SolverConfig(grid=self.grid, **params)

    def with_overrides(self, tol=None, grid=None):
        raw = copy.deepcopy(self.raw)
        if tol is not None:
            raw.setdefault("solver", {})["tol"] = float(tol)
        if grid is not None:
            raw["grid"] = int(grid)
        return parse_config(raw)


def _line_of(text, key):
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key.split(".")[-1].split("[")[0]), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _matrix(entry, field, n):
    try:
        re_part = np.asarray(entry["re"], dtype=float)
        im_part = np.asarray(entry.get("im", np.zeros_like(re_part)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(field, f"expected {{'re': [[...]], 'im': [[...]]}} ({exc})")
    if re_part.shape != (n, n) or im_part.shape != (n, n):
        raise ConfigError(field, f"expected a {n}x{n} matrix, got {re_part.shape}")
    M = re_part + 1j * im_part
    if not is_hermitian(M):
        raise ConfigError(field, "matrix is not Hermitian")
    return M


def _ket(entry, field, n=None):
    try:
        re_part = np.asarray(entry["re"], dtype=float)
        im_part = np.asarray(entry.get("im", np.zeros_like(re_part)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(field, f"expected {{'re': [...], 'im': [...]}} ({exc})")
    if re_part.ndim != 1 or re_part.shape != im_part.shape or (n and re_part.size != n):
        raise ConfigError(field, f"expected a ket of length {n}")
    ket = re_part + 1j * im_part
    if abs(np.linalg.norm(ket) - 1.0) > KET_TOL:
        raise ConfigError(field, f"ket is not normalized (norm {np.linalg.norm(ket):.6g})")
    return ket


def _coupling(entry, field):
    kind = entry.get("kind", "linear")
    if kind == "linear":
        return CouplingFunction.linear()
    if kind == "polynomial":
        coeffs = entry.get("coefficients")
        if not coeffs:
            raise ConfigError(field, "polynomial coupling needs 'coefficients'")
        return CouplingFunction.polynomial(coeffs)
    raise ConfigError(field, f"unknown coupling kind {kind!r}")


def _tabulated(entry, field):
    samples = np.asarray(entry.get("samples", []), dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2 or len(samples) < 2:
        raise ConfigError(field, "tabulated signals need at least two [t, value] pairs")
    if np.any(np.diff(samples[:, 0]) <= 0):
        raise ConfigError(field, "tabulated times must be strictly increasing")
    return samples


def weight_function(entry, horizon):
    """Scalar input weight ``theta(t)`` described by ``entry``."""
    kind = entry.get("kind")
    if kind == "constant":
        value = float(entry["value"])
        return lambda t: value
    if kind == "blackman_flanked":
        width = float(entry.get("width", 0.6))
        eps = float(entry.get("epsilon", 1e-6))
        return lambda t: flanked_weight(t, horizon, width, eps)
    if kind == "tabulated":
        samples = _tabulated(entry, "input_weight")
        return lambda t: float(np.interp(t, samples[:, 0], samples[:, 1]))
    raise ConfigError("input_weight.kind", f"unknown weight kind {kind!r}")


def guess_samples(entry, grid):
    kind = entry.get("kind")
    times = grid.times
    if kind == "constant":
        return np.full(times.shape, float(entry["value"]))
    if kind == "blackman_flanked":
        amp = float(entry["amplitude"])
        width = float(entry.get("width", 0.6))
        return np.array([flanked_pulse(t, grid.T, amp, width) for t in times])
    if kind == "tabulated":
        samples = _tabulated(entry, "initial_guess")
        return np.interp(times, samples[:, 0], samples[:, 1])
    raise ConfigError("initial_guess.kind", f"unknown guess kind {kind!r}")


def parse_config(raw, text=None):
    """Validate a decoded config document and build the problem objects.

    With the original ``text`` at hand, errors also carry the line number of
    the offending key.
    """
    try:
        return _parse(raw)
    except ConfigError as exc:
        if exc.line is None and text is not None:
            raise ConfigError(exc.field, exc.message, _line_of(text, exc.field)) from None
        raise


def _parse(raw):
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    version = raw.get("schema_version")
    if version is None:
        raise ConfigError("schema_version", "missing schema version tag")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version}, expected {SCHEMA_VERSION}")
    for key in ("dimension", "drift", "controls", "initial_state", "target_state",
                "horizon", "grid", "input_weight", "initial_guess"):
        if key not in raw:
            raise ConfigError(key, "required field is missing")

    n = raw["dimension"]
    if not isinstance(n, int) or n < 1:
        raise ConfigError("dimension", "must be a positive integer")
    H0 = _matrix(raw["drift"], "drift", n)
    if not raw["controls"]:
        raise ConfigError("controls", "at least one control is required")
    Hs, fs = [], []
    for j, ctrl in enumerate(raw["controls"]):
        Hs.append(_matrix(ctrl.get("hamiltonian", {}), f"controls[{j}].hamiltonian", n))
        fs.append(_coupling(ctrl.get("coupling", {}), f"controls[{j}].coupling"))
    psi0 = _ket(raw["initial_state"], "initial_state", n)
    phi = _ket(raw["target_state"], "target_state", n)
    if "forbidden_state" in raw:
        _ket(raw["forbidden_state"].get("ket", {}), "forbidden_state.ket", n)
        if float(raw["forbidden_state"].get("weight", 1.0)) < 0:
            raise ConfigError("forbidden_state.weight", "must be nonnegative")

    horizon = raw["horizon"]
    if not isinstance(horizon, (int, float)) or not horizon > 0:
        raise ConfigError("horizon", "must be a positive time")
    steps = raw["grid"]
    if not isinstance(steps, int) or steps < 2 or steps % 2:
        raise ConfigError("grid", "must be an even integer >= 2")

    wg = raw["input_weight"]
    weight_function(wg, float(horizon))
    if wg.get("kind") == "constant" and not float(wg["value"]) > 0:
        raise ConfigError("input_weight.value", "weight must be positive")
    if wg.get("kind") == "blackman_flanked":
        if not float(wg.get("width", 0.6)) > 0:
            raise ConfigError("input_weight.width", "window width must be positive")
        if not float(wg.get("epsilon", 1e-6)) > 0:
            raise ConfigError("input_weight.epsilon", "epsilon must be positive")
    if wg.get("kind") == "tabulated" and np.min(_tabulated(wg, "input_weight")[:, 1]) <= 0:
        raise ConfigError("input_weight.samples", "weights must be positive")

    guesses = raw["initial_guess"]
    if isinstance(guesses, list) and len(guesses) != len(Hs):
        raise ConfigError("initial_guess", "need one guess per control channel")

    solver = raw.get("solver", {})
    unknown = set(solver) - set(SOLVER_DEFAULTS)
    if unknown:
        raise ConfigError(f"solver.{sorted(unknown)[0]}", "unknown solver parameter")

    cfg = ProblemConfig(
        raw=raw,
        system=QuantumSystem.from_hamiltonians(H0, Hs, fs),
        initial_state=psi0,
        target_state=phi,
        horizon=float(horizon),
        grid_steps=steps,
    )
    try:
        cfg.solver_config()
    except ValueError as exc:
        raise ConfigError("solver", str(exc))
    return cfg


def load_config(path):
    """Read and validate a JSON problem description from ``path``."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", exc.msg, exc.lineno)
    return parse_config(raw, text)


def preset_names():
    return sorted(
        p.name[: -len(".json")]
        for p in resources.files("qpronto.presets").iterdir()
        if p.name.endswith(".json")
    )


def preset_text(name):
    res = resources.files("qpronto.presets").joinpath(f"{name}.json")
    if not res.is_file():
        raise ConfigError("preset", f"unknown preset {name!r}; available: {preset_names()}")
    return res.read_text()


def load_preset(name):
    text = preset_text(name)
    return parse_config(json.loads(text), text)


def describe(cfg):
    """Human-readable summary of a problem."""
    raw = cfg.raw
    sc = cfg.solver_config()
    wg = raw["input_weight"]
    if wg["kind"] == "tabulated":
        weight = f"tabulated ({len(wg['samples'])} samples)"
    elif wg["kind"] == "blackman_flanked":
        weight = f"Blackman-flanked (width {wg.get('width', 0.6)}, epsilon {wg.get('epsilon', 1e-6)})"
    else:
        weight = f"constant {wg['value']}"
    guesses = raw["initial_guess"]
    guesses = guesses if isinstance(guesses, list) else [guesses]
    guess_txt = []
    for g in guesses:
        if g["kind"] == "tabulated":
            guess_txt.append(f"tabulated ({len(g['samples'])} samples)")
        elif g["kind"] == "blackman_flanked":
            guess_txt.append(f"Blackman-flanked amplitude {g['amplitude']}")
        else:
            guess_txt.append(f"constant {g['value']}")
    forbidden = raw.get("forbidden_state")
    lines = [
        f"problem: {cfg.name}",
        f"dimension: n={cfg.n} (real state size {2 * cfg.n}), controls m={cfg.m}",
        "couplings: " + ", ".join(f.label for f in cfg.system.couplings),
        f"horizon: T={cfg.horizon:g}",
        f"grid: N={cfg.grid_steps} steps, dt={cfg.grid.dt:g}",
        f"input weight: {weight}",
        "initial guess: " + "; ".join(guess_txt),
        "transient penalty: "
        + ("P_λ = 0" if forbidden is None else f"forbidden state with weight {forbidden.get('weight', 1.0)}"),
        "solver: " + ", ".join(f"{k}={getattr(sc, k)}" for k in SOLVER_DEFAULTS),
    ]
    return "\n".join(lines)
