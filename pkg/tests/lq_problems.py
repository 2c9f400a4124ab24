"""Small hand-built LQ problems shared by the tests."""

import numpy as np

from qpronto import LqCoefficients, SampledSignal, StepKind, TimeGrid


def constant_problem(grid, A, B, Q, R, q, r, pi, Pi, S=None):
    """LQ coefficients that do not vary in time."""
    A, B = np.atleast_2d(A), np.atleast_2d(B)
    n, m = B.shape
    c = lambda v: SampledSignal.constant(grid, v)
    S = np.zeros((n, m)) if S is None else S
    return LqCoefficients(
        A=c(A), B=c(B), q=c(np.atleast_1d(q)), r=c(np.atleast_1d(r)),
        Q=c(np.atleast_2d(Q)), S=c(S), R=c(np.atleast_2d(R)),
        pi=np.atleast_1d(np.asarray(pi, float)), Pi=np.atleast_2d(np.asarray(Pi, float)),
        mode=StepKind.QUASI_NEWTON,
    )


def scalar_problem(T, N, A=0.0, B=1.0, Q=0.0, R=1.0, q=0.0, r=0.0, pi=0.0, Pi=0.0):
    return constant_problem(TimeGrid(T, N), [[A]], [[B]], [[Q]], [[R]], [q], [r], [pi], [[Pi]])


def random_problem(seed, N, T=1.0, n=4, m=2):
    """Generic constant-coefficient problem with skew ``A`` and convex weights."""
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n))
    L = rng.normal(size=(n, n))
    Lf = rng.normal(size=(n, n))
    return constant_problem(
        TimeGrid(T, N),
        A=M - M.T,
        B=rng.normal(size=(n, m)),
        Q=0.3 * L @ L.T,
        R=np.eye(m) + 0.1 * np.diag(rng.uniform(size=m)),
        q=rng.normal(size=n),
        r=rng.normal(size=m),
        pi=rng.normal(size=n),
        Pi=0.2 * Lf @ Lf.T,
    )
