import numpy as np
import pytest

from qpronto import (
    RiccatiFailure,
    SampledSignal,
    StepKind,
    TimeGrid,
    descend,
    embed_state,
    flanked_pulse,
    flanked_weight,
    linearize,
    lq_objective,
    project,
    qubit_system,
    solve_costate,
    solve_riccati,
    state_transfer_cost,
    total_cost,
)

from lq_problems import random_problem, scalar_problem
from qp_oracle import solve_qp

X0 = embed_state([1, 0])


def qubit_iterate(N=400, T=5.0, amplitude=0.2):
    g = TimeGrid(T, N)
    sys = qubit_system()
    spec = state_transfer_cost([0, 1], lambda t: flanked_weight(t, T))
    u = SampledSignal.from_function(g, lambda t: [flanked_pulse(t, T, amplitude)])
    return sys, spec, project(sys, X0, u)


def test_tanh_riccati():
    co = scalar_problem(T=3.0, N=3000, Q=1.0)
    ric = solve_riccati(co)
    exact = np.tanh(3.0 - co.grid.times)
    assert np.max(np.abs(ric.P.values[:, 0, 0] - exact)) < 1e-8


def test_zero_first_order_data_gives_zero_direction():
    co = scalar_problem(T=1.0, N=50, Q=1.0, Pi=2.0)
    res = descend(co, solve_riccati(co))
    assert not res.nu.values.any()
    assert res.Dg == 0.0


def test_costate_like_p_without_input():
    co = scalar_problem(T=1.0, N=50, B=0.0, pi=1.0)
    ric = solve_riccati(co)
    np.testing.assert_allclose(ric.p.values, 1.0, atol=1e-14)


def test_scalar_integrator_chain():
    # z' = nu with a linear terminal cost pi z(T): nu = -pi, z = -pi t, Dg = -pi^2 T
    pi, T = 0.7, 2.0
    co = scalar_problem(T=T, N=200, pi=pi)
    res = descend(co, solve_riccati(co))
    np.testing.assert_allclose(res.nu.values, -pi, atol=1e-12)
    np.testing.assert_allclose(res.z.values[:, 0], -pi * co.grid.times, atol=1e-12)
    assert res.Dg == pytest.approx(-pi**2 * T, rel=1e-12)


def test_indefinite_input_weight_fails():
    co = scalar_problem(T=1.0, N=10, R=-1.0)
    with pytest.raises(RiccatiFailure):
        solve_riccati(co)


def test_riccati_blow_up_fails():
    # -P' = -P^2 with P(T) = -1 escapes to -inf at t = T - 1
    co = scalar_problem(T=3.0, N=300, Pi=-1.0)
    with pytest.raises(RiccatiFailure):
        solve_riccati(co)


def test_riccati_solution_is_symmetric():
    ric = solve_riccati(random_problem(3, N=200))
    P = ric.P.values
    assert np.array_equal(P, np.transpose(P, (0, 2, 1)))


@pytest.mark.parametrize("seed", range(3))
def test_descent_minimizes_lq_objective(seed):
    co = random_problem(seed, N=200)
    res = descend(co, solve_riccati(co))
    base = lq_objective(co, res.z, res.nu)
    rng = np.random.default_rng(seed)
    for _ in range(3):
        # perturb nu and re-integrate the linear dynamics for the matching z
        dnu = 0.1 * rng.normal(size=(co.grid.N + 1, 2))
        nu = res.nu.values + dnu
        z = np.zeros_like(res.z.values)
        A, B, h = co.A[0], co.B[0], co.grid.dt
        for k in range(co.grid.N):
            # constant A, B: trapezoidal update is accurate enough for a strict comparison
            rhs = z[k] + 0.5 * h * (A @ z[k] + B @ nu[k] + B @ nu[k + 1])
            z[k + 1] = np.linalg.solve(np.eye(4) - 0.5 * h * A, rhs)
        assert lq_objective(co, z, nu) > base


def test_lq_objective_equals_half_Dg():
    # at the LQ minimizer the objective is half its linear part
    co = random_problem(4, N=400)
    res = descend(co, solve_riccati(co))
    assert lq_objective(co, res.z, res.nu) == pytest.approx(0.5 * res.Dg, rel=1e-5)
    assert lq_objective(co, res.z, res.nu, quadratic=False) == pytest.approx(res.Dg, rel=1e-5)


@pytest.mark.parametrize("N", [64, 256])
def test_trapezoidal_qp_oracle_converges(N):
    co = random_problem(0, N)
    res = descend(co, solve_riccati(co))
    nu, z = solve_qp(co)
    err = np.max(np.abs(res.nu.values - nu)) / np.max(np.abs(nu))
    # the trapezoidal QP is first-order accurate at the endpoints
    assert err < 1.2 / N


def test_quasi_newton_direction_descends():
    sys, spec, xi = qubit_iterate()
    co = linearize(sys, spec, xi, None, StepKind.QUASI_NEWTON)
    res = descend(co, solve_riccati(co))
    assert res.Dg < 0


def test_linearized_dynamics_match_projection_sensitivity():
    sys, spec, xi = qubit_iterate(N=1000)
    co = linearize(sys, spec, xi, None, StepKind.QUASI_NEWTON)
    res = descend(co, solve_riccati(co))
    eps = 1e-5
    plus = project(sys, X0, SampledSignal(xi.grid, xi.u.values + eps * res.nu.values))
    minus = project(sys, X0, SampledSignal(xi.grid, xi.u.values - eps * res.nu.values))
    fd = (plus.x.values - minus.x.values) / (2 * eps)
    assert np.max(np.abs(fd - res.z.values)) < 1e-4 * np.max(np.abs(res.z.values))


def second_difference(sys, spec, xi, res, eps):
    g = lambda s: total_cost(spec, project(sys, X0, SampledSignal(xi.grid, xi.u.values + s * res.nu.values)))
    return (g(eps) - 2 * g(0.0) + g(-eps)) / eps**2


@pytest.mark.parametrize("cross_term, agrees", [("transpose", True), ("as_written", False)])
def test_newton_model_is_second_order_expansion(cross_term, agrees):
    sys, spec, xi = qubit_iterate(N=1000)
    qn = linearize(sys, spec, xi, None, StepKind.QUASI_NEWTON)
    res = descend(qn, solve_riccati(qn))
    chi = solve_costate(sys, spec, xi)
    co = linearize(sys, spec, xi, chi, StepKind.NEWTON, cross_term=cross_term)
    model = 2 * lq_objective(co, res.z, res.nu, linear=False)
    # Richardson extrapolation of the O(eps^2) central second difference
    d1 = second_difference(sys, spec, xi, res, 2e-2)
    d2 = second_difference(sys, spec, xi, res, 1e-2)
    fd = (4 * d2 - d1) / 3
    rel = abs(model - fd) / abs(fd)
    assert (rel < 1e-3) == agrees


def test_newton_mode_requires_costate():
    sys, spec, xi = qubit_iterate(N=20)
    with pytest.raises(ValueError):
        linearize(sys, spec, xi, None, StepKind.NEWTON)
    with pytest.raises(ValueError):
        linearize(sys, spec, xi, solve_costate(sys, spec, xi), StepKind.QUASI_NEWTON)
    with pytest.raises(ValueError):
        linearize(sys, spec, xi, solve_costate(sys, spec, xi), StepKind.NEWTON, cross_term="flip")
