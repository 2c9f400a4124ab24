"""The LQ subproblem behind every step, on cases with known answers.

1. With A = 0, B = Q = R = 1 and no terminal weight the Riccati solution is
   tanh(T - t).
2. A single integrator with a linear terminal cost pi z(T) gets the constant
   direction nu = -pi and the directional derivative -pi^2 T.
3. Around a real qubit trajectory, the predicted derivative Dg is checked
   against a central finite difference of the cost along nu.
"""

import numpy as np

from qpronto import (
    LqCoefficients,
    SampledSignal,
    StepKind,
    TimeGrid,
    descend,
    embed_state,
    flanked_pulse,
    flanked_weight,
    linearize,
    project,
    qubit_system,
    solve_riccati,
    state_transfer_cost,
    total_cost,
)


def scalar(grid, Q=0.0, pi=0.0):
    c = lambda v: SampledSignal.constant(grid, v)
    return LqCoefficients(
        A=c([[0.0]]), B=c([[1.0]]), q=c([0.0]), r=c([0.0]), Q=c([[Q]]),
        S=c([[0.0]]), R=c([[1.0]]), pi=np.array([pi]), Pi=np.zeros((1, 1)),
    )


grid = TimeGrid(5.0, 5000)
P = solve_riccati(scalar(grid, Q=1.0)).P.values[:, 0, 0]
print("Riccati vs tanh(T - t):")
for t in (0.0, 2.5, 4.5, 5.0):
    k = grid.locate(t)[0]
    print(f"  t={t:3.1f}  P={P[k]:.12f}  tanh={np.tanh(5.0 - t):.12f}")

pi, T = 0.7, 2.0
co = scalar(TimeGrid(T, 200), pi=pi)
res = descend(co, solve_riccati(co))
print(f"\nintegrator: nu in [{res.nu.values.min():.6f}, {res.nu.values.max():.6f}], "
      f"z(T)={res.z.values[-1, 0]:.6f}, Dg={res.Dg:.6f} (expected {-pi**2 * T:.6f})")

T = 5.0
grid = TimeGrid(T, 2000)
sys = qubit_system()
x0 = embed_state([1, 0])
spec = state_transfer_cost([0, 1], lambda t: flanked_weight(t, T))
xi = project(sys, x0, SampledSignal.from_function(grid, lambda t: [flanked_pulse(t, T, 0.2)]))
co = linearize(sys, spec, xi, None, StepKind.QUASI_NEWTON)
res = descend(co, solve_riccati(co))


def g(s):
    return total_cost(spec, project(sys, x0, SampledSignal(grid, xi.u.values + s * res.nu.values)))


eps = 1e-5
fd = (g(eps) - g(-eps)) / (2 * eps)
print(f"\nqubit: Dg={res.Dg:.9f}  finite difference={fd:.9f}  rel err={abs(res.Dg - fd) / abs(fd):.1e}")
