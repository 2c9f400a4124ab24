"""Damped Newton iteration over control signals with quasi-Newton fallback.

Each iteration builds the LQ model around the current trajectory, tries the
Newton direction first and falls back to the convex (quasi-Newton) model when
the Riccati solve fails or the Newton direction is not a descent direction.
The step is capped so the linearized state update stays comparable to the
state norm, then shrunk by Armijo backtracking.
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .lq import RiccatiFailure, StepKind, descend, linearize, solve_riccati
from .model import infidelity
from .odegrid import DivergedIntegration, SampledSignal, TimeGrid
from .projection import Trajectory, project, solve_costate, total_cost

log = logging.getLogger(__name__)


class Termination(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    LINE_SEARCH_STALLED = "line_search_stalled"
    # neither the Newton nor the quasi-Newton LQ problem could be integrated
    NUMERICAL_FAILURE = "numerical_failure"


class LineSearchStalled(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    grid: TimeGrid
    tol: float = 1e-2
    alpha: float = 0.4
    beta: float = 0.7
    delta: float = 0.6
    max_iters: int = 50
    max_backtracks: int = 40
    cross_term: str = "transpose"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.max_iters < 1 or self.max_backtracks < 1:
            raise ValueError("iteration budgets must be positive")


@dataclass(frozen=True)
class IterationRecord:
    """State of one outer iteration.

    ``cost``, ``Dg`` and ``infidelity`` are evaluated at the iterate the step
    starts from; ``gamma`` is the accepted step (0 when no step was taken).
    """

    index: int
    cost: float
    Dg: float
    gamma: float
    step_kind: StepKind
    backtracks: int
    infidelity: float


@dataclass(eq=False)
class SolveReport:
    iterations: List[IterationRecord]
    final: Trajectory
    converged: bool
    termination: Termination
    riccati_failures: int = 0
    history: List[SampledSignal] = field(default_factory=list)

    @property
    def steps(self):
        """Number of control updates actually applied."""
        return sum(1 for rec in self.iterations if rec.gamma > 0)

    @property
    def final_cost(self):
        return self.iterations[-1].cost if self.iterations else float("nan")


def cap_step(z, x0_norm, delta):
    """Largest admissible initial step: ``min(1, delta |x0| / max_t |z(t)|)``."""
    zs = np.asarray(getattr(z, "values", z), dtype=float)
    zmax = float(np.max(np.linalg.norm(zs.reshape(zs.shape[0], -1), axis=1)))
    if zmax == 0.0:
        return 1.0
    return min(1.0, delta * x0_norm / zmax)


def armijo_search(g_current, Dg, gamma0, evaluate, cfg):
    """Backtrack ``gamma = gamma0 * beta**i`` until sufficient decrease holds.

    Accepts the first ``gamma`` with ``evaluate(gamma) <= g_current + alpha *
    gamma * Dg`` and returns ``(gamma, cost, backtracks)``. Evaluations that
    diverge count as rejections.
    """
    if not Dg < 0:
        raise ValueError(f"Armijo search needs a descent direction, got Dg={Dg}")
    gamma = gamma0
    for backtracks in range(cfg.max_backtracks + 1):
        try:
            cost = evaluate(gamma)
        except DivergedIntegration:
            cost = np.inf
        if cost <= g_current + cfg.alpha * gamma * Dg:
            return gamma, cost, backtracks
        gamma *= cfg.beta
    raise LineSearchStalled(
        f"no sufficient decrease after {cfg.max_backtracks} backtracks"
    )


def descent_direction(sys, spec, xi, cross_term="transpose"):
    """Newton direction if it is usable, otherwise the quasi-Newton one.

    Returns ``(kind, coefficients, descent, reason)`` where ``reason`` says why
    the Newton direction was rejected (``None`` when it was used).
    """
    try:
        chi = solve_costate(sys, spec, xi)
        co = linearize(sys, spec, xi, chi, StepKind.NEWTON, cross_term)
        res = descend(co, solve_riccati(co))
        if np.isfinite(res.Dg) and res.Dg <= 0:
            return StepKind.NEWTON, co, res, None
        reason = "not_descent"
        log.debug("Newton direction is not a descent direction (Dg=%g)", res.Dg)
    except (RiccatiFailure, DivergedIntegration) as exc:
        reason = "riccati"
        log.debug("Newton step failed: %s", exc)
    co = linearize(sys, spec, xi, None, StepKind.QUASI_NEWTON)
    res = descend(co, solve_riccati(co))
    return StepKind.QUASI_NEWTON, co, res, reason


def solve(
    sys,
    spec,
    x0,
    u0,
    cfg,
    observer: Optional[Callable[[IterationRecord], None]] = None,
    keep_history=False,
):
    """Minimize ``g(u) = cost(project(u))`` starting from the control ``u0``.

    Terminates when ``-Dg <= cfg.tol``, when the step budget is exhausted or
    when the line search stalls; the outcome is reported, never raised.
    ``observer`` receives every :class:`IterationRecord` as it is produced.
    """
    x0 = np.asarray(x0, dtype=float)
    x0_norm = float(np.linalg.norm(x0))
    u = np.asarray(u0.values, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if not np.all(np.isfinite(u)):
        raise ValueError("initial control must be finite")
    grid = cfg.grid

    xi = project(sys, x0, SampledSignal(grid, u))
    g = total_cost(spec, xi)
    records = []
    history = [xi.u] if keep_history else []
    failures = 0
    termination = Termination.MAX_ITERS

    def emit(rec):
        records.append(rec)
        if observer is not None:
            observer(rec)

    for k in range(cfg.max_iters + 1):
        try:
            kind, co, res, reason = descent_direction(sys, spec, xi, cfg.cross_term)
        except (RiccatiFailure, DivergedIntegration) as exc:
            log.warning("no descent direction at iteration %d: %s", k, exc)
            termination = Termination.NUMERICAL_FAILURE
            break
        failures += reason == "riccati"
        fid = infidelity(spec, xi.final_state)
        log.info("iter %d  cost=%.6e  -Dg=%.3e  %s", k, g, -res.Dg, kind.value)

        if -res.Dg <= cfg.tol:
            emit(IterationRecord(k, g, res.Dg, 0.0, kind, 0, fid))
            termination = Termination.CONVERGED
            break
        if k == cfg.max_iters:
            emit(IterationRecord(k, g, res.Dg, 0.0, kind, 0, fid))
            break

        nu = res.nu.values
        trials = {}

        def evaluate(gamma):
            trial = project(sys, x0, SampledSignal(grid, u + gamma * nu))
            trials[gamma] = trial
            return total_cost(spec, trial)

        gamma0 = cap_step(res.z, x0_norm, cfg.delta)
        try:
            gamma, g_new, backtracks = armijo_search(g, res.Dg, gamma0, evaluate, cfg)
        except LineSearchStalled:
            emit(IterationRecord(k, g, res.Dg, 0.0, kind, cfg.max_backtracks, fid))
            termination = Termination.LINE_SEARCH_STALLED
            break

        emit(IterationRecord(k, g, res.Dg, gamma, kind, backtracks, fid))
        u = u + gamma * nu
        xi = trials[gamma]
        g = g_new
        if keep_history:
            history.append(xi.u)

    return SolveReport(
        iterations=records,
        final=xi,
        converged=termination is Termination.CONVERGED,
        termination=termination,
        riccati_failures=failures,
        history=history,
    )
