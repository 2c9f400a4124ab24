"""Controlled quantum systems and their cost data, in real-embedded form.

The Hamiltonian is ``H(u) = H0 + sum_j f_j(u_j) H_j``; after embedding, every
operator is the real skew-symmetric image of ``-iH``. Control channels are
indexed from 0.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .embedding import embed_generator, embed_observable, embed_state

SKEW_TOL = 1e-12


@dataclass(frozen=True)
class CouplingFunction:
    """Scalar coupling ``f`` together with its first and second derivative."""

    eval: Callable[[float], float]
    d1: Callable[[float], float]
    d2: Callable[[float], float]
    label: str = "custom"

    @classmethod
    def linear(cls):
        return cls(lambda u: u, lambda u: 1.0, lambda u: 0.0, label="linear")

    @classmethod
    def polynomial(cls, coefficients):
        """``f(u) = c0 + c1 u + c2 u**2 + ...`` (ascending powers)."""
        poly = np.polynomial.Polynomial(np.asarray(coefficients, dtype=float))
        dp, ddp = poly.deriv(1), poly.deriv(2)
        return cls(
            lambda u: float(poly(u)),
            lambda u: float(dp(u)),
            lambda u: float(ddp(u)),
            label=f"polynomial{tuple(float(c) for c in coefficients)}",
        )


@dataclass(frozen=True, eq=False)
class QuantumSystem:
    H0: np.ndarray
    operators: tuple
    couplings: tuple

    def __post_init__(self):
        H0 = np.asarray(self.H0, dtype=float)
        ops = tuple(np.asarray(Hj, dtype=float) for Hj in self.operators)
        if len(ops) != len(self.couplings):
            raise ValueError("one coupling function per control operator is required")
        for name, M in [("H0", H0)] + [(f"H{j + 1}", Hj) for j, Hj in enumerate(ops)]:
            if M.ndim != 2 or M.shape != H0.shape or M.shape[0] % 2:
                raise ValueError(f"{name} has shape {M.shape}, expected {H0.shape}")
            if np.max(np.abs(M + M.T), initial=0.0) > SKEW_TOL:
                raise ValueError(f"{name} is not skew-symmetric")
        object.__setattr__(self, "H0", H0)
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "couplings", tuple(self.couplings))

    @classmethod
    def from_hamiltonians(cls, H0, controls, couplings=None):
        """Build from complex Hermitian matrices; couplings default to linear."""
        if couplings is None:
            couplings = [CouplingFunction.linear() for _ in controls]
        return cls(
            embed_generator(H0),
            tuple(embed_generator(Hj) for Hj in controls),
            tuple(couplings),
        )

    @property
    def n(self):
        return self.H0.shape[0] // 2

    @property
    def m(self):
        return len(self.operators)


def _controls(sys, u):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (sys.m,):
        raise ValueError(f"expected {sys.m} control values, got shape {u.shape}")
    return u


def _channel(sys, i):
    if not 0 <= i < sys.m:
        raise IndexError(f"control index {i} out of range for {sys.m} channels")


def generator_at(sys, u):
    """Real generator ``H(u)``; skew-symmetric for every ``u``."""
    u = _controls(sys, u)
    H = sys.H0.copy()
    for Hj, fj, uj in zip(sys.operators, sys.couplings, u):
        H += fj.eval(uj) * Hj
    return H


def generator_d1(sys, u, i):
    """``dH/du_i = f_i'(u_i) H_i``."""
    u = _controls(sys, u)
    _channel(sys, i)
    return sys.couplings[i].d1(u[i]) * sys.operators[i]


def generator_d2(sys, u, i, j):
    """``d2H/du_i du_j``; zero off the diagonal since each f_j sees one channel."""
    u = _controls(sys, u)
    _channel(sys, i)
    _channel(sys, j)
    if i != j:
        return np.zeros_like(sys.H0)
    return sys.couplings[i].d2(u[i]) * sys.operators[i]


@dataclass(frozen=True, eq=False)
class CostSpec:
    """Quadratic state penalties plus a time-varying input weight.

    ``input_weight(t)`` may return a scalar (single channel, or a multiple of
    the identity) or an ``m x m`` matrix. ``target`` is only used to report
    infidelity.
    """

    P_lambda: np.ndarray
    P_notphi: np.ndarray
    input_weight: Callable[[float], object]
    m: int = 1
    target: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        for name in ("P_lambda", "P_notphi"):
            M = np.asarray(getattr(self, name), dtype=float)
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise ValueError(f"{name} must be square")
            if np.max(np.abs(M - M.T), initial=0.0) > 1e-12:
                raise ValueError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(M).min() < -1e-12:
                raise ValueError(f"{name} must be positive semidefinite")
            object.__setattr__(self, name, M)

    def R(self, t):
        w = np.asarray(self.input_weight(t), dtype=float)
        if w.ndim == 0:
            return w * np.eye(self.m)
        return w.reshape(self.m, self.m)

    def R_on(self, grid):
        Rs = np.array([self.R(t) for t in grid.times])
        if np.linalg.eigvalsh(Rs).min() <= 0.0:
            raise ValueError("input weight must be positive definite at every grid time")
        return Rs


def state_transfer_cost(target, input_weight, m=1, forbidden=None, forbidden_weight=1.0):
    """Cost for steering into ``target`` up to a global phase.

    The terminal penalty uses the complement projector ``1 - |phi><phi|``;
    ``forbidden`` optionally adds a transient penalty on population in that
    state.
    """
    phi = np.asarray(target, dtype=complex)
    phi = phi / np.linalg.norm(phi)
    n = phi.size
    P_notphi = embed_observable(np.eye(n) - np.outer(phi, phi.conj()))
    if forbidden is None:
        P_lambda = np.zeros((2 * n, 2 * n))
    else:
        lam = np.asarray(forbidden, dtype=complex)
        lam = lam / np.linalg.norm(lam)
        P_lambda = forbidden_weight * embed_observable(np.outer(lam, lam.conj()))
    return CostSpec(P_lambda, P_notphi, input_weight, m=m, target=phi)


def incremental_cost(spec, t, x, u):
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return 0.5 * x @ spec.P_lambda @ x + 0.5 * u @ spec.R(t) @ u


def terminal_cost(spec, xT):
    xT = np.asarray(xT, dtype=float)
    return 0.5 * xT @ spec.P_notphi @ xT


def infidelity(spec, xT):
    """``1 - |<phi|psi(T)>|^2``; falls back to ``xT' P_notphi xT`` without a target."""
    xT = np.asarray(xT, dtype=float)
    if spec.target is None:
        return float(xT @ spec.P_notphi @ xT)
    phi = embed_state(spec.target)
    n = phi.size // 2
    overlap_re = phi @ xT
    overlap_im = phi[:n] @ xT[n:] - phi[n:] @ xT[:n]
    return float(1.0 - (overlap_re**2 + overlap_im**2))


def blackman_window(t, width):
    """Blackman window of the given width; 0 at the edges and 1 at the centre."""
    if width <= 0:
        raise ValueError("window width must be positive")
    a = 2.0 * np.pi * np.asarray(t, dtype=float) / width
    return 0.5 * (0.84 - np.cos(a) + 0.16 * np.cos(2.0 * a))


def flanked_weight(t, T, width=0.6, epsilon=1e-6):
    """Input weight that blows up near both ends of ``[0, T]``.

    Equal to 1 away from the edges; over the first and last half-window it is
    ``(1 + eps) / (B(s) + eps)`` with ``s`` the distance to the nearest end.
    """
    rise = 0.5 * width
    if t <= rise:
        return (1.0 + epsilon) / (blackman_window(t, width) + epsilon)
    if t >= T - rise:
        return (1.0 + epsilon) / (blackman_window(T - t, width) + epsilon)
    return 1.0


def flanked_pulse(t, T, amplitude, width=0.6):
    """Flat-top pulse with Blackman rise and fall of half-window length."""
    rise = 0.5 * width
    if t <= rise:
        return amplitude * blackman_window(t, width)
    if t >= T - rise:
        return amplitude * blackman_window(T - t, width)
    return amplitude


def qubit_system(omega=1.0):
    """Qubit with drift ``-omega/2 sigma_z`` and one linear ``sigma_x`` control."""
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    return QuantumSystem.from_hamiltonians(-0.5 * omega * sz, [sx])

