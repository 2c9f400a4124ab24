"""Projection of control signals onto dynamically feasible trajectories.

``project`` integrates the Schrodinger flow under a given control, which
turns the constrained problem into an unconstrained one over controls:
``g(u) = total_cost(project(u))``. The costate is the backward adjoint of
that flow and feeds the Newton-mode second-order terms.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .model import generator_at, incremental_cost, terminal_cost
from .odegrid import SampledSignal, SignalBundle, integrate_backward, integrate_forward

X0_NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Trajectory:
    x: SampledSignal
    u: SampledSignal

    @property
    def grid(self):
        return self.x.grid

    @property
    def final_state(self):
        return self.x.values[-1]


@dataclass(frozen=True, eq=False)
class Costate:
    chi: SampledSignal


def _as_control_signal(sys, mu):
    values = np.asarray(mu.values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[1:] != (sys.m,):
        raise ValueError(f"control signal must carry {sys.m} channels per sample")
    return SampledSignal(mu.grid, values)


def project(sys, x0, mu):
    """Trajectory obtained by integrating ``x' = H(u) x`` from ``x0`` with ``u = mu``.

    Raises :class:`~qpronto.odegrid.DivergedIntegration` if the state blows up.
    """
    x0 = np.asarray(x0, dtype=float)
    if abs(np.linalg.norm(x0) - 1.0) > X0_NORM_TOL:
        raise ValueError("initial state must have unit norm")
    u = _as_control_signal(sys, mu)

    def rhs(t, x):
        return generator_at(sys, u.at(t)) @ x

    x = integrate_forward(rhs, x0, u.grid)
    return Trajectory(x, u)


def running_cost_samples(spec, xi):
    times = xi.grid.times
    return np.array(
        [incremental_cost(spec, t, x, u) for t, x, u in zip(times, xi.x.values, xi.u.values)]
    )


def integrate_samples(grid, samples):
    """Composite Simpson rule over the grid nodes (N must be even)."""
    if grid.N % 2:
        raise ValueError("Simpson quadrature needs an even number of steps")
    return float(simpson(samples, dx=grid.dt, axis=0))


def total_cost(spec, xi):
    """Terminal penalty plus the Simpson-integrated running cost."""
    running = integrate_samples(xi.grid, running_cost_samples(spec, xi))
    return float(terminal_cost(spec, xi.final_state)) + running


def solve_costate(sys, spec, xi):
    """Backward solve of ``-chi' = H(u)^T chi + P_lambda x`` with ``chi(T) = P_notphi x(T)``."""
    P_lambda = spec.P_lambda
    xu = SignalBundle(xi.x, xi.u)

    def rhs(t, chi):
        x, u = xu.at(t)
        return generator_at(sys, u).T @ chi + P_lambda @ x

    chi_T = spec.P_notphi @ xi.final_state
    return Costate(integrate_backward(rhs, chi_T, xi.grid))
