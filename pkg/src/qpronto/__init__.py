"""Projection-operator Newton solver for closed quantum systems.

Minimizes ``m(x(T)) + int l(x, u) dt`` over control signals ``u`` subject to
the Schrodinger equation, using Newton steps (quasi-Newton when the Newton
model is indefinite) computed from a time-varying LQ problem, with capped
Armijo backtracking.
"""

from .embedding import embed_generator, embed_observable, embed_state, extract_state
from .lq import (
    DescentResult,
    LqCoefficients,
    RiccatiFailure,
    RiccatiSolution,
    StepKind,
    descend,
    linearize,
    lq_objective,
    solve_riccati,
)
from .model import (
    CostSpec,
    CouplingFunction,
    QuantumSystem,
    blackman_window,
    flanked_pulse,
    flanked_weight,
    generator_at,
    generator_d1,
    generator_d2,
    incremental_cost,
    infidelity,
    qubit_system,
    state_transfer_cost,
    terminal_cost,
)
from .odegrid import (
    DivergedIntegration,
    SampledSignal,
    TimeGrid,
    integrate_backward,
    integrate_forward,
    interpolate,
)
from .projection import Costate, Trajectory, project, solve_costate, total_cost
from .solver import (
    IterationRecord,
    LineSearchStalled,
    SolveReport,
    SolverConfig,
    Termination,
    armijo_search,
    cap_step,
    solve,
)

__version__ = "0.1.0"
