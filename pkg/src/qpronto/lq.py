"""Linear-quadratic model of the cost around a trajectory and its solution.

``linearize`` assembles the time-varying LQ problem

    min  pi' z(T) + 1/2 z(T)' Pi z(T)
         + int q' z + r' nu + 1/2 [z; nu]' [[Q, S], [S', R]] [z; nu] dt
    s.t. z' = A z + B nu,  z(0) = 0,

``solve_riccati`` integrates the Riccati equation for it backward in time and
``descend`` rolls the resulting feedback law forward to get the descent
direction ``nu`` and the directional derivative ``Dg = Dg(u) . nu``.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .model import generator_at, generator_d1, generator_d2
from .odegrid import (
    DivergedIntegration,
    SampledSignal,
    SignalBundle,
    integrate_backward,
    integrate_forward,
)
from .projection import integrate_samples

R_EIG_MIN = 1e-10


class StepKind(str, enum.Enum):
    NEWTON = "newton"
    QUASI_NEWTON = "quasi_newton"


class RiccatiFailure(ArithmeticError):
    """The LQ problem has no usable solution (indefinite weight or blow-up)."""


@dataclass(frozen=True, eq=False)
class LqCoefficients:
    A: SampledSignal
    B: SampledSignal
    q: SampledSignal
    r: SampledSignal
    Q: SampledSignal
    S: SampledSignal
    R: SampledSignal
    pi: np.ndarray
    Pi: np.ndarray
    mode: StepKind = StepKind.QUASI_NEWTON

    @property
    def grid(self):
        return self.A.grid


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    P: SampledSignal
    p: SampledSignal
    Ko: SampledSignal
    vo: SampledSignal


@dataclass(frozen=True, eq=False)
class DescentResult:
    z: SampledSignal
    nu: SampledSignal
    eta: SampledSignal
    Dg: float

    @property
    def etaT(self):
        return float(self.eta.values[-1])


def linearize(sys, spec, xi, chi=None, mode=StepKind.NEWTON, cross_term="transpose"):
    """LQ coefficients around ``xi``.

    Quasi-Newton mode keeps only the (convex) cost curvature. Newton mode adds
    the costate-weighted curvature of the dynamics, which requires ``chi``.

    ``cross_term`` picks the columns of the state/input cross weight in Newton
    mode: ``"transpose"`` uses ``H_i^T chi``, which makes the LQ objective the
    exact second-order expansion of the cost; ``"as_written"`` uses
    ``H_i chi``, which for skew ``H_i`` flips the sign of that term and is kept
    only for comparison.
    """
    mode = StepKind(mode)
    if cross_term not in ("transpose", "as_written"):
        raise ValueError(f"unknown cross_term {cross_term!r}")
    if (mode is StepKind.NEWTON) != (chi is not None):
        raise ValueError("a costate is required in Newton mode and unused otherwise")
    grid = xi.grid
    times = grid.times
    xs, us = xi.x.values, xi.u.values
    m, dim = sys.m, xs.shape[1]

    A = np.array([generator_at(sys, u) for u in us])
    d1 = [[generator_d1(sys, u, i) for i in range(m)] for u in us]
    B = np.array([np.stack([Hi @ x for Hi in row], axis=1) for row, x in zip(d1, xs)])
    Rl = spec.R_on(grid)
    q = xs @ spec.P_lambda.T
    r = np.einsum("kij,kj->ki", Rl, us)
    Q = np.broadcast_to(spec.P_lambda, (len(times), dim, dim))
    S = np.zeros((len(times), dim, m))
    R = Rl.copy()

    if mode is StepKind.NEWTON:
        chis = chi.chi.values
        # chi' (dH/du_i) z = z' (H_i^T chi)
        sign = 1.0 if cross_term == "transpose" else -1.0
        S = S + sign * np.array(
            [np.stack([Hi.T @ c for Hi in row], axis=1) for row, c in zip(d1, chis)]
        )
        for k, (u, x, c) in enumerate(zip(us, xs, chis)):
            for i in range(m):
                R[k, i, i] += c @ generator_d2(sys, u, i, i) @ x

    return LqCoefficients(
        A=SampledSignal(grid, A),
        B=SampledSignal(grid, B),
        q=SampledSignal(grid, q),
        r=SampledSignal(grid, r),
        Q=SampledSignal(grid, Q),
        S=SampledSignal(grid, S),
        R=SampledSignal(grid, R),
        pi=spec.P_notphi @ xi.final_state,
        Pi=spec.P_notphi.copy(),
        mode=mode,
    )


def _gains(B, S, R, r, P, p):
    Kv = np.linalg.solve(R, np.column_stack([B.T @ P + S.T, B.T @ p + r]))
    return Kv[:, :-1], Kv[:, -1]


def solve_riccati(co):
    """Backward solution of the Riccati equation and its affine companion.

    Returns ``P, p`` together with the feedback gain ``Ko = R^-1 (B'P + S')``
    and feedforward ``vo = R^-1 (B'p + r)`` at every node.

    Raises :class:`RiccatiFailure` if ``R`` is not safely positive definite at
    some node or if the backward solve blows up.
    """
    grid = co.grid
    dim = co.A.shape[0]
    eigs = np.linalg.eigvalsh(co.R.values)
    bad = np.flatnonzero(eigs.min(axis=1) <= R_EIG_MIN)
    if bad.size:
        raise RiccatiFailure(
            f"input curvature not positive definite at t={grid.times[bad[0]]:.6g}"
        )

    def unpack(y):
        return y[: dim * dim].reshape(dim, dim), y[dim * dim :]

    coeffs = SignalBundle(co.A, co.B, co.Q, co.S, co.R, co.q, co.r)

    def rhs(t, y):
        P, p = unpack(y)
        A, B, Q, S, R, q, r = coeffs.at(t)
        K, v = _gains(B, S, R, r, P, p)
        dP = A.T @ P + P @ A - K.T @ R @ K + Q
        dp = (A - B @ K).T @ p - K.T @ r + q
        return np.concatenate([dP.ravel(), dp])

    def symmetrize(y):
        P, p = unpack(y)
        return np.concatenate([(0.5 * (P + P.T)).ravel(), p])

    yT = symmetrize(np.concatenate([np.asarray(co.Pi, float).ravel(), np.asarray(co.pi, float)]))
    try:
        sol = integrate_backward(rhs, yT, grid, post_step=symmetrize)
    except (DivergedIntegration, np.linalg.LinAlgError) as exc:
        raise RiccatiFailure(f"Riccati solve diverged: {exc}") from exc

    Ps = sol.values[:, : dim * dim].reshape(-1, dim, dim)
    ps = sol.values[:, dim * dim :]
    Ks, vs = [], []
    for k in range(grid.N + 1):
        K, v = _gains(co.B[k], co.S[k], co.R[k], co.r[k], Ps[k], ps[k])
        Ks.append(K)
        vs.append(v)
    return RiccatiSolution(
        P=SampledSignal(grid, Ps),
        p=SampledSignal(grid, ps),
        Ko=SampledSignal(grid, np.array(Ks)),
        vo=SampledSignal(grid, np.array(vs)),
    )


def descend(co, ric):
    """Forward rollout of ``nu = -vo - Ko z`` with the running first-order cost.

    ``Dg`` is ``pi' z(T) + eta(T)`` with ``eta' = q' z + r' nu``, the
    directional derivative of the cost along ``nu``.
    """
    grid = co.grid
    dim = co.A.shape[0]

    coeffs = SignalBundle(co.A, co.B, co.q, co.r, ric.Ko, ric.vo)

    def rhs(t, y):
        z = y[:dim]
        A, B, q, r, Ko, vo = coeffs.at(t)
        nu = -vo - Ko @ z
        dz = A @ z + B @ nu
        deta = q @ z + r @ nu
        return np.concatenate([dz, [deta]])

    sol = integrate_forward(rhs, np.zeros(dim + 1), grid)
    z = sol.values[:, :dim]
    eta = sol.values[:, dim]
    nu = -ric.vo.values - np.einsum("kij,kj->ki", ric.Ko.values, z)
    Dg = float(co.pi @ z[-1] + eta[-1])
    return DescentResult(
        z=SampledSignal(grid, z),
        nu=SampledSignal(grid, nu),
        eta=SampledSignal(grid, eta),
        Dg=Dg,
    )


def lq_objective(co, z, nu, linear=True, quadratic=True):
    """Value of the LQ objective at ``(z, nu)`` (Simpson in time).

    ``linear`` / ``quadratic`` select which part to include; the quadratic
    part alone is half the second directional derivative of the cost.
    """
    zs = np.asarray(getattr(z, "values", z), dtype=float)
    nus = np.asarray(getattr(nu, "values", nu), dtype=float)
    if nus.ndim == 1:
        nus = nus[:, None]
    total = 0.0
    samples = np.zeros(co.grid.N + 1)
    if linear:
        total += float(co.pi @ zs[-1])
        samples += np.einsum("ki,ki->k", co.q.values, zs)
        samples += np.einsum("ki,ki->k", co.r.values, nus)
    if quadratic:
        total += 0.5 * float(zs[-1] @ co.Pi @ zs[-1])
        samples += 0.5 * np.einsum("ki,kij,kj->k", zs, co.Q.values, zs)
        samples += np.einsum("ki,kij,kj->k", zs, co.S.values, nus)
        samples += 0.5 * np.einsum("ki,kij,kj->k", nus, co.R.values, nus)
    return total + integrate_samples(co.grid, samples)
