"""Fused, jit-compiled splitting steps for long runs.

Performs exactly the same floating-point operations, in the same order, as
``integrators.splitting_step``; ``tests/test_kernels.py`` holds the two paths
to bitwise agreement. Only the harness uses this module.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .grid import FieldState, Phase
from .integrators import InstabilityError
from .params import DimensionlessParams


@njit(cache=True)
def _flux(t, q_hat, tP, rho0):
    if q_hat == 0.0:
        return 0.0
    if t < 0.0 or t > tP:
        return 0.0
    return (q_hat / tP) * (1.0 - math.cos(2.0 * math.pi * t / tP)) / rho0


@njit(cache=True)
def _constitutive(T, v, q, Pi, dx, neg_k, neg_m, q0):
    N = T.size
    for n in range(1, N):
        q[n] = neg_k * ((T[n] - T[n - 1]) / dx)
    q[0] = q0
    q[N] = 0.0
    for n in range(N):
        Pi[n] = neg_m * ((v[n + 1] - v[n]) / dx)


@njit(cache=True)
def _irreversible(T, v, q, Pi, v_old, T_old, dx, dt, inv_rho0, neg_k, neg_m, q_quarter):
    N = T.size
    quarter = 0.25 * dt
    half = 0.5 * dt
    cq = quarter * inv_rho0
    ch = half * inv_rho0
    for n in range(N + 1):
        v_old[n] = v[n]
    for n in range(N):
        T_old[n] = T[n]
    for n in range(1, N):
        v[n] = v_old[n] - cq * ((Pi[n] - Pi[n - 1]) / dx)
    for n in range(N):
        T[n] = T_old[n] - cq * ((q[n + 1] - q[n]) / dx)
    _constitutive(T, v, q, Pi, dx, neg_k, neg_m, q_quarter)
    for n in range(1, N):
        v[n] = v_old[n] - ch * ((Pi[n] - Pi[n - 1]) / dx)
    for n in range(N):
        T[n] = T_old[n] - ch * ((q[n + 1] - q[n]) / dx)


@njit(cache=True)
def advance_splitting(
    n_steps, j0, dt, dx,
    rho0, inv_rho0, neg_k, neg_m, c_rho, c_T, c_vT, c_vrho,
    q_hat, tP,
    rho, rho_prev, v, T, q, Pi, v_old, T_old,
    mass_start, mass_scale,
):
    """Run ``n_steps`` splitting steps starting at step index ``j0``.

    Mass drift is ``|sum(rho) - mass_start| / mass_scale``.
    Returns (injected heat over the chunk, max relative mass drift seen,
    max absolute per-step heat-budget residual, index of the first
    non-finite step or -1).
    """
    N = T.size
    injected = 0.0
    max_drift = 0.0
    max_res = 0.0
    for k in range(n_steps):
        j = j0 + k
        t = j * dt
        sum_before = 0.0
        for n in range(N):
            sum_before += T[n]
        q_a = _flux(t + 0.25 * dt, q_hat, tP, rho0)
        _irreversible(T, v, q, Pi, v_old, T_old, dx, dt, inv_rho0, neg_k, neg_m, q_a)

        # reversible step
        for n in range(N):
            rho_prev[n] = rho[n]
        for n in range(N):
            dv = (v[n + 1] - v[n]) / dx
            rho[n] = rho[n] - c_rho * dv
            T[n] = T[n] - c_T * dv
        for n in range(1, N):
            v[n] -= dt * (c_vT * ((T[n] - T[n - 1]) / dx) + ((rho[n] - rho[n - 1]) / dx) / c_vrho)
        v[0] = 0.0
        v[N] = 0.0
        _constitutive(T, v, q, Pi, dx, neg_k, neg_m, _flux(t + 0.5 * dt, q_hat, tP, rho0))

        t2 = t + 0.5 * dt
        q_b = _flux(t2 + 0.25 * dt, q_hat, tP, rho0)
        _irreversible(T, v, q, Pi, v_old, T_old, dx, dt, inv_rho0, neg_k, neg_m, q_b)
        v[0] = 0.0
        v[N] = 0.0
        _constitutive(T, v, q, Pi, dx, neg_k, neg_m, _flux(t + dt, q_hat, tP, rho0))

        step_heat = 0.5 * dt * (q_a + q_b)
        injected += step_heat
        mass = 0.0
        sum_after = 0.0
        ok = True
        for n in range(N):
            mass += rho[n]
            sum_after += T[n]
            if not (math.isfinite(rho[n]) and math.isfinite(T[n]) and math.isfinite(v[n])):
                ok = False
        if not ok:
            return injected, max_drift, max_res, j
        drift = abs(mass - mass_start) / mass_scale
        if drift > max_drift:
            max_drift = drift
        res = abs(rho0 * dx * (sum_after - sum_before) - step_heat)
        if res > max_res:
            max_res = res
    return injected, max_drift, max_res, -1


def step_coefficients(params: DimensionlessParams, dt: float):
    """Scalars in the same arithmetic form the reference integrator uses."""
    return (
        params.rho0_hat,
        1.0 / params.rho0_hat,
        -params.conduction_coeff,
        -params.viscous_coeff,
        dt * params.rho0_hat,
        dt * params.B * params.Ec_a,
        params.B / (params.gamma * params.T0_hat),
        params.gamma * params.rho0_hat,
    )


def advance_state(state: FieldState, params: DimensionlessParams, dt: float, n_steps: int, pulse, mass_start: float, mass_scale: float | None = None):
    """Advance ``state`` in place by ``n_steps``.

    ``mass_scale`` defaults to ``|mass_start|``; pass the absolute mass when
    the state stores density deviations.

    Returns (injected heat, max mass drift, max per-step heat residual).
    """
    N = state.N
    q_hat, tP = (pulse.q_hat, pulse.tP_hat) if pulse is not None else (0.0, 1.0)
    for name in ("rho", "rho_prev", "T"):
        setattr(state, name, np.ascontiguousarray(getattr(state, name), dtype=float).copy())
    injected, drift, residual, bad = advance_splitting(
        n_steps, state.step, dt, 1.0 / N, *step_coefficients(params, dt), q_hat, tP,
        state.rho, state.rho_prev, state.v, state.T, state.q, state.Pi,
        np.empty(N + 1), np.empty(N), mass_start, abs(mass_start) if mass_scale is None else mass_scale,
    )
    if bad >= 0:
        state.step = int(bad)
        raise InstabilityError(int(bad), "splitting kernel")
    state.step += n_steps
    state.phase = Phase.COMPLETE
    return injected, drift, residual
