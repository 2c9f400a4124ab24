"""Uniform time grids, sampled signals and fixed-step RK4 integration.

Every ODE solved by the optimizer (state, costate, Riccati, descent) lives on
the same uniform grid so that node values line up exactly between solves.
Coefficients needed at RK4 half-steps are obtained by linear interpolation.
"""

from dataclasses import dataclass, field

import numpy as np

DIVERGENCE_NORM = 1e8
_NODE_SNAP = 1e-9


class DivergedIntegration(ArithmeticError):
    """Raised when an integration produces non-finite or huge values.

    ``index`` is the first grid node holding a bad value.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"integration diverged at node {index}")


@dataclass(frozen=True)
class TimeGrid:
    T: float
    N: int
    t0: float = 0.0
    dt: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"grid needs N >= 2 steps, got {self.N}")
        if not self.T > self.t0:
            raise ValueError(f"horizon must exceed t0, got T={self.T}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "dt", (self.T - self.t0) / self.N)

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.N + 1)

    def locate(self, t):
        """Return ``(k, frac)`` with ``t = t_k + frac * dt`` and ``0 <= frac < 1``.

        Times within a hair of a node snap to it so node queries are exact.
        """
        s = (t - self.t0) / self.dt
        if s < -_NODE_SNAP or s > self.N + _NODE_SNAP:
            raise ValueError(f"t={t} outside [{self.t0}, {self.T}]")
        k = int(s + 0.5)
        if -_NODE_SNAP <= s - k <= _NODE_SNAP:
            return min(max(k, 0), self.N), 0.0
        k = int(s)
        return k, s - k


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Values of a vector or matrix signal at the ``N + 1`` grid nodes."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape[0] != self.grid.N + 1:
            raise ValueError(
                f"expected {self.grid.N + 1} samples, got {values.shape[0]}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape[1:]

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, k):
        return self.values[k]

    def at(self, t):
        return interpolate(self, t)

    @classmethod
    def from_function(cls, grid, fn):
        return cls(grid, np.array([fn(t) for t in grid.times], dtype=float))

    @classmethod
    def constant(cls, grid, value):
        value = np.asarray(value, dtype=float)
        return cls(grid, np.broadcast_to(value, (grid.N + 1,) + value.shape).copy())


def interpolate(sig, t):
    """Piecewise-linear interpolation of ``sig`` at time ``t``."""
    k, frac = sig.grid.locate(t)
    if frac == 0.0:
        return sig.values[k]
    return (1.0 - frac) * sig.values[k] + frac * sig.values[k + 1]


class SignalBundle:
    """Several signals on one grid, interpolated together in a single pass."""

    def __init__(self, *signals):
        grid = signals[0].grid
        if any(sig.grid != grid for sig in signals):
            raise ValueError("bundled signals must share a grid")
        self.grid = grid
        self._shapes = [sig.shape for sig in signals]
        bounds = np.cumsum([0] + [int(np.prod(shape)) for shape in self._shapes])
        self._slices = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
        flat = np.concatenate([sig.values.reshape(len(sig), -1) for sig in signals], axis=1)
        self._flat = SampledSignal(grid, flat)

    def at(self, t):
        row = interpolate(self._flat, t)
        return [row[sl].reshape(shape) for sl, shape in zip(self._slices, self._shapes)]


def rk4_step(rhs, t, y, h):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check(y, k, limit):
    if not np.all(np.isfinite(y)) or np.linalg.norm(y) > limit:
        raise DivergedIntegration(k)


def integrate_forward(rhs, y0, grid, post_step=None, limit=DIVERGENCE_NORM):
    """Classical RK4 for ``y' = rhs(t, y)`` from ``y(t0) = y0``.

    ``post_step``, if given, is applied to each new node value (e.g. to
    re-symmetrize a matrix state).
    """
    y = np.array(y0, dtype=float)
    out = np.empty((grid.N + 1,) + y.shape)
    _check(y, 0, limit)
    out[0] = y
    times = grid.times
    h = grid.dt
    for k in range(grid.N):
        y = rk4_step(rhs, times[k], y, h)
        if post_step is not None:
            y = post_step(y)
        _check(y, k + 1, limit)
        out[k + 1] = y
    return SampledSignal(grid, out)


def integrate_backward(rhs, yT, grid, post_step=None, limit=DIVERGENCE_NORM):
    """RK4 for ``-y' = rhs(t, y)`` from the terminal value ``y(T) = yT``.

    Integrates in reversed time ``tau = T - t`` where ``dy/dtau = rhs``, and
    returns samples on the original (increasing) grid.
    """
    y = np.array(yT, dtype=float)
    out = np.empty((grid.N + 1,) + y.shape)
    _check(y, grid.N, limit)
    out[grid.N] = y
    times = grid.times
    h = grid.dt

    def forward_rhs(t, y):
        return -rhs(t, y)

    for k in range(grid.N, 0, -1):
        y = rk4_step(forward_rhs, times[k], y, -h)
        if post_step is not None:
            y = post_step(y)
        _check(y, k - 1, limit)
        out[k - 1] = y
    return SampledSignal(grid, out)
