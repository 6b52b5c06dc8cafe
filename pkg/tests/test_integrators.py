import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermoacoustics.excitation import HeatPulse
from thermoacoustics.grid import StaggeredGrid, init_equilibrium
from thermoacoustics.integrators import (
    InstabilityError,
    backward_half_step,
    check_time_step,
    diffusive_limits,
    irreversible_field,
    irreversible_half_step,
    reversible_field,
    reversible_step,
    rk4_step,
    semi_discrete_rhs,
    splitting_step,
    synchronous_view,
)
from thermoacoustics.kernels import advance_state
from thermoacoustics.params import DimensionlessParams, ValidationError, wave_test_params

from oracles import generator, local_errors, set_state


def unit_params(**over):
    kw = dict(gamma=1.0, B=0.0, Ec_a=0.0, Pe_a=1.0, r_eta=0.0, T0_hat=1.0, rho0_hat=1.0)
    kw.update(over)
    return DimensionlessParams.from_groups(**kw)


# -- hand-evaluated cases -------------------------------------------------------


def test_reversible_hand_case():
    p, g = unit_params(), StaggeredGrid(2)
    s = set_state(init_equilibrium(g, p), [1.0, 1.0], [0.0, 1.0, 0.0], [1.0, 1.0], p, g)
    reversible_step(s, p, g, 0.1)
    np.testing.assert_allclose(s.rho, [0.8, 1.2], rtol=1e-15)
    assert s.v[1] == pytest.approx(0.92, rel=1e-15)
    np.testing.assert_array_equal(s.rho_prev, [1.0, 1.0])
    assert s.v[0] == 0.0 and s.v[2] == 0.0


def test_irreversible_hand_case():
    # Pe = 1, gamma = 1, rho0 = 1, dx = 1/2, dt/2 = 0.1:
    # q1 = -2 -> quarter stage T = (1.2, 1.8) -> q1 = -1.2 -> T = (1.24, 1.76)
    p, g = unit_params(), StaggeredGrid(2)
    s = set_state(init_equilibrium(g, p), [1.0, 1.0], [0.0, 0.0, 0.0], [1.0, 2.0], p, g)
    assert s.q[1] == pytest.approx(-2.0)
    irreversible_half_step(s, p, g, 0.2, lambda t: 0.0, 0.0)
    np.testing.assert_allclose(s.T, [1.24, 1.76], rtol=1e-14)
    np.testing.assert_array_equal(s.rho, [1.0, 1.0])


def test_rhs_hand_case():
    p, g = unit_params(), StaggeredGrid(2)
    drho, dv, dT = semi_discrete_rhs(np.ones(2), np.array([0.0, 1.0, 0.0]), np.array([1.0, 2.0]), p, g)
    np.testing.assert_allclose(drho, [-2.0, 2.0])
    np.testing.assert_allclose(dv, [0.0, 0.0, 0.0])
    np.testing.assert_allclose(dT, [4.0, -4.0])


def test_linear_temperature_gives_uniform_flux():
    p = wave_test_params(Pe_a=1e3)
    g = StaggeredGrid(10)
    s = set_state(init_equilibrium(g, p), np.full(10, p.rho0_hat), np.zeros(11), 0.3 * g.x_half, p, g)
    np.testing.assert_allclose(s.q[1:-1], -p.gamma * p.rho0_hat * 0.3 / p.Pe_a, rtol=1e-12)


def test_inviscid_nonconducting_irreversible_is_identity():
    p = unit_params(Pe_a=float("inf"))
    g = StaggeredGrid(5)
    rng = np.random.default_rng(0)
    s = set_state(init_equilibrium(g, p), rng.random(5), np.r_[0, rng.random(4), 0], rng.random(5), p, g)
    v0, T0 = s.v.copy(), s.T.copy()
    irreversible_half_step(s, p, g, 0.1, lambda t: 0.0, 0.0)
    np.testing.assert_array_equal(s.v, v0)
    np.testing.assert_array_equal(s.T, T0)


# -- structural properties -------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_rhs_is_sum_of_parts(N, seed):
    p = wave_test_params(Pe_a=1e3, viscous=True)
    g = StaggeredGrid(N)
    rng = np.random.default_rng(seed)
    rho, T = rng.normal(size=N), rng.normal(size=N)
    v = np.r_[0.0, rng.normal(size=N - 1), 0.0]
    pulse = HeatPulse(0.001, 0.1)
    full = semi_discrete_rhs(rho, v, T, p, g, 0.03, pulse)
    from thermoacoustics.excitation import pulse_flux
    rev = reversible_field(rho, v, T, p, g)
    irr = irreversible_field(rho, v, T, p, g, pulse_flux(0.03, pulse, p.rho0_hat))
    for a, b, c in zip(full, rev, irr):
        np.testing.assert_array_equal(a, b + c)


@pytest.mark.parametrize("staggered", [True, False])
def test_equilibrium_fixed_point(staggered):
    p = wave_test_params(viscous=True)
    g = StaggeredGrid(16)
    s = init_equilibrium(g, p, staggered=staggered)
    ref = s.copy()
    for j in range(50):
        if staggered:
            splitting_step(s, p, g, 0.95 / 16, None, j * 0.95 / 16)
        else:
            rk4_step(s, p, g, 0.95 / 16, None, j * 0.95 / 16)
    for name in ("rho", "v", "T", "q", "Pi"):
        np.testing.assert_array_equal(getattr(s, name), getattr(ref, name))


def test_integrators_reject_wrong_staggering():
    p, g = wave_test_params(), StaggeredGrid(4)
    with pytest.raises(ValidationError):
        rk4_step(init_equilibrium(g, p, staggered=True), p, g, 0.1, None, 0.0)
    with pytest.raises(ValidationError):
        splitting_step(init_equilibrium(g, p, staggered=False), p, g, 0.1, None, 0.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 20), st.integers(0, 2**32 - 1), st.integers(1, 40))
def test_mass_conserved(N, seed, steps):
    p = wave_test_params(Pe_a=1e3, viscous=True)
    g = StaggeredGrid(N)
    rng = np.random.default_rng(seed)
    s = set_state(init_equilibrium(g, p), p.rho0_hat + 0.01 * rng.normal(size=N),
                  np.r_[0.0, 0.01 * rng.normal(size=N - 1), 0.0], p.T0_hat + 0.01 * rng.normal(size=N), p, g)
    m0 = s.rho.sum()
    dt = 0.5 / N
    for j in range(steps):
        splitting_step(s, p, g, dt, HeatPulse(0.001, 0.1), j * dt)
    assert abs(s.rho.sum() - m0) / m0 <= 1e-13


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 16), st.integers(0, 2**32 - 1), st.floats(0.0, 0.1))
def test_heat_budget_per_step(N, seed, t_start):
    p = wave_test_params(Pe_a=1e3, viscous=True)
    g = StaggeredGrid(N)
    rng = np.random.default_rng(seed)
    s = set_state(init_equilibrium(g, p), p.rho0_hat + 1e-3 * rng.normal(size=N),
                  np.r_[0.0, 1e-3 * rng.normal(size=N - 1), 0.0], p.T0_hat + 1e-3 * rng.normal(size=N), p, g)
    dt = 0.95 / N
    before = s.T.sum()
    rep = splitting_step(s, p, g, dt, HeatPulse(0.001, 0.1), t_start)
    stored = p.rho0_hat * g.dx * (s.T.sum() - before)
    expected = 0.5 * dt * sum(rep.flux_values)
    assert rep.flux_times == pytest.approx((t_start + 0.25 * dt, t_start + 0.75 * dt))
    assert abs(stored - expected) <= 1e-12 * abs(expected) + 1e-15


def test_walls_closed_after_step():
    p, g = wave_test_params(viscous=True), StaggeredGrid(10)
    s = init_equilibrium(g, p)
    for j in range(30):
        splitting_step(s, p, g, 0.095, HeatPulse(0.001, 0.1), j * 0.095)
        assert s.v[0] == 0.0 and s.v[-1] == 0.0 and s.q[-1] == 0.0
    assert s.q[0] == 0.0  # pulse is over


# -- order against the exact flow ---------------------------------------------------


def test_splitting_local_order_three():
    hs, errs = local_errors("splitting", wave_test_params(viscous=True))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert 2.7 <= slope <= 3.3


def test_rk4_local_order_five():
    hs, errs = local_errors("rk4", wave_test_params(viscous=True), hs=0.2 * 2.0 ** -np.arange(5))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert 4.6 <= slope <= 5.4


def test_generator_matches_rhs():
    p, N = wave_test_params(Pe_a=1e3, viscous=True), 5
    y = np.random.default_rng(3).normal(size=3 * N - 1)
    drho, dv, dT = semi_discrete_rhs(y[:N], np.r_[0.0, y[N:2 * N - 1], 0.0], y[2 * N - 1:], p, StaggeredGrid(N))
    np.testing.assert_allclose(generator(p, N) @ y, np.r_[drho, dv[1:-1], dT], rtol=1e-12, atol=1e-12)


# -- wave behaviour -------------------------------------------------------------------


def leapfrog(rho, v, steps, dt, dx, gamma, rho0):
    """Decoupled staggered leapfrog for the isothermal wave, closed ends."""
    rho, v = rho.copy(), v.copy()
    for _ in range(steps):
        rho = rho - dt * rho0 * (v[1:] - v[:-1]) / dx
        v[1:-1] = v[1:-1] - dt / (gamma * rho0) * (rho[1:] - rho[:-1]) / dx
    return rho, v


def test_decoupled_wave_one_cell_per_step():
    N = 40
    p = unit_params(Pe_a=1e3)
    g = StaggeredGrid(N)
    rho0 = np.ones(N)
    rho0[20] += 1e-3
    s = set_state(init_equilibrium(g, p), rho0, np.zeros(N + 1), np.ones(N), p, g)
    dt = g.dx  # Co = 1 with unit sound speed
    for k in range(1, 11):
        splitting_step(s, p, g, dt, None, (k - 1) * dt)
        ref_rho, ref_v = leapfrog(rho0, np.zeros(N + 1), k, dt, g.dx, 1.0, 1.0)
        np.testing.assert_allclose(s.rho, ref_rho, rtol=0, atol=1e-15)
        np.testing.assert_allclose(s.v, ref_v, rtol=0, atol=1e-15)
        support = np.flatnonzero(np.abs(s.rho - 1.0) > 1e-12)
        # rho first moves on the second step, since v starts at rest
        assert support.min() == 20 - (k - 1) and support.max() == 20 + (k - 1)


def test_no_secular_growth():
    N = 50
    p = unit_params(Pe_a=float("inf"))
    g = StaggeredGrid(N)
    s = init_equilibrium(g, p)
    s.v[:] = np.sin(np.pi * g.x_nodes)
    s.v[0] = s.v[-1] = 0.0
    v_max0 = np.max(np.abs(s.v))
    dt = 0.95 * g.dx
    peak = 0.0
    for _ in range(1000):
        advance_state(s, p, dt, 100, None, float(np.sum(s.rho)))
        peak = max(peak, float(np.max(np.abs(s.v))))
    assert s.step == 100_000
    assert peak <= 1.05 * v_max0


def test_instability_detected():
    p = wave_test_params()
    g = StaggeredGrid(20)
    s = init_equilibrium(g, p)
    s.v[5] = 1.0
    with pytest.raises(InstabilityError), np.errstate(all="ignore"):
        for j in range(5000):
            splitting_step(s, p, g, 3.0 * g.dx, None, j * 3.0 * g.dx)


# -- helpers ---------------------------------------------------------------------------


def test_diffusive_limits_and_warning():
    p = wave_test_params(Pe_a=10.0, viscous=True)
    g = StaggeredGrid(100)
    lim = diffusive_limits(p, g)
    assert lim["conduction"] == pytest.approx(1e-4 * 10.0 / (2 * p.gamma))
    with pytest.warns(RuntimeWarning):
        check_time_step(p, g, 0.01)
    assert diffusive_limits(wave_test_params(), g)["viscosity"] == float("inf")


def test_backward_half_step_round_trip():
    p = wave_test_params(viscous=True)
    g = StaggeredGrid(8)
    rng = np.random.default_rng(11)
    rho, v, T = (p.rho0_hat + 1e-3 * rng.normal(size=8), np.r_[0.0, 1e-3 * rng.normal(size=7), 0.0],
                 p.T0_hat + 1e-3 * rng.normal(size=8))
    errs = []
    for h in (0.02, 0.01):
        s = set_state(init_equilibrium(g, p, staggered=False), rho, v, T, p, g)
        backward_half_step(s, p, g, h)
        assert s.staggered
        rho_s, _, T_s = synchronous_view(s, p, g, h)
        errs.append(np.linalg.norm(np.r_[rho_s - rho, T_s - T]))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
