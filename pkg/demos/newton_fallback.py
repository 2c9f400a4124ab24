"""When the Newton model is indefinite.

A cubic coupling f(u) = u^3 with a large initial pulse gives the Hamiltonian
a large second derivative in u. The Newton model picks that up through the
costate and is no longer convex, so its Riccati solve blows up. The solver
takes quasi-Newton steps instead until the Newton model becomes usable.
"""

import logging

import numpy as np

from qpronto import (
    CouplingFunction,
    QuantumSystem,
    SampledSignal,
    SolverConfig,
    TimeGrid,
    embed_state,
    flanked_pulse,
    flanked_weight,
    solve,
    state_transfer_cost,
)

logging.basicConfig(level=logging.DEBUG, format="  %(message)s")
logging.getLogger("qpronto").setLevel(logging.DEBUG)

T, N = 5.0, 2000
grid = TimeGrid(T, N)
sys = QuantumSystem.from_hamiltonians(
    np.diag([-0.5, 0.5]),
    [np.array([[0.0, 1.0], [1.0, 0.0]])],
    [CouplingFunction.polynomial([0, 0, 0, 1])],
)
spec = state_transfer_cost([0, 1], lambda t: flanked_weight(t, T))
u0 = SampledSignal.from_function(grid, lambda t: [flanked_pulse(t, T, 0.6)])

report = solve(sys, spec, embed_state([1, 0]), u0, SolverConfig(grid))
print(f"\n{report.termination.value}: {report.steps} steps, "
      f"{report.riccati_failures} refused Newton models")
print("step kinds:", [r.step_kind.value for r in report.iterations])
