"""Time integrators for the semi-discrete thermoacoustic system.

The splitting step composes

    irreversible half-step (explicit midpoint on viscous stress and heat flux)
    -> reversible full step (rho, T from v, then v from the new rho, T)
    -> irreversible half-step

on the space-time staggered fields. ``rk4_step`` integrates the same
semi-discrete right-hand side with classical RK4 on a synchronous copy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .excitation import HeatPulse, apply_closed_walls, pulse_sampler
from .grid import FieldState, Phase, StaggeredGrid, diff_half_to_nodes, diff_nodes_to_half
from .params import DimensionlessParams, ValidationError


class InstabilityError(RuntimeError):
    """A non-finite value appeared during a step."""

    def __init__(self, step: int, where: str):
        super().__init__(f"non-finite value in {where} at step {step}")
        self.step = step
        self.where = where


@dataclass
class StepReport:
    step: int
    flux_times: tuple
    flux_values: tuple
    max_change: dict = field(default_factory=dict)
    stable: bool = True


def _check_finite(state: FieldState, where: str) -> None:
    if not (np.isfinite(state.v).all() and np.isfinite(state.T).all() and np.isfinite(state.rho).all()):
        raise InstabilityError(state.step, where)


# -- vector fields -----------------------------------------------------------


def reversible_field(rho, v, T, params: DimensionlessParams, grid: StaggeredGrid):
    """Entropy-preserving tendencies; boundary velocity tendencies are zero."""
    dx = grid.dx
    Dv = diff_nodes_to_half(v, dx)
    drho = -params.rho0_hat * Dv
    dT = -params.B * params.Ec_a * Dv
    dv = np.zeros_like(v)
    dv[1:-1] = (
        -params.B / (params.gamma * params.T0_hat) * diff_half_to_nodes(T, dx)
        - diff_half_to_nodes(rho, dx) / (params.gamma * params.rho0_hat)
    )
    return drho, dv, dT


def irreversible_field(rho, v, T, params: DimensionlessParams, grid: StaggeredGrid, q0: float = 0.0, qN: float = 0.0):
    """Dissipative tendencies (viscous stress and heat conduction); rho is untouched."""
    dx = grid.dx
    q = np.empty_like(v)
    q[1:-1] = -params.conduction_coeff * diff_half_to_nodes(T, dx)
    q[0], q[-1] = q0, qN
    Pi = -params.viscous_coeff * diff_nodes_to_half(v, dx)
    dv = np.zeros_like(v)
    dv[1:-1] = -diff_half_to_nodes(Pi, dx) / params.rho0_hat
    dT = -diff_nodes_to_half(q, dx) / params.rho0_hat
    return np.zeros_like(rho), dv, dT


def semi_discrete_rhs(rho, v, T, params: DimensionlessParams, grid: StaggeredGrid, t_hat: float = 0.0, pulse: HeatPulse | None = None):
    """Full right-hand side: reversible plus irreversible tendencies."""
    q0 = pulse_sampler(pulse, params.rho0_hat)(t_hat)
    r = reversible_field(rho, v, T, params, grid)
    i = irreversible_field(rho, v, T, params, grid, q0)
    return tuple(a + b for a, b in zip(r, i))


# -- splitting substeps --------------------------------------------------------


def update_constitutive(state: FieldState, params: DimensionlessParams, grid: StaggeredGrid, bc_flux_left: float = 0.0, bc_flux_right: float = 0.0) -> None:
    """Recompute heat flux and viscous stress from the current T and v."""
    dx = grid.dx
    state.q[1:-1] = -params.conduction_coeff * diff_half_to_nodes(state.T, dx)
    state.q[0] = bc_flux_left
    state.q[-1] = bc_flux_right
    state.Pi[:] = -params.viscous_coeff * diff_nodes_to_half(state.v, dx)


def irreversible_half_step(state: FieldState, params: DimensionlessParams, grid: StaggeredGrid, dt_hat: float, flux_at, t_start: float) -> float:
    """Explicit midpoint over ``dt_hat / 2`` for the dissipative part.

    The stage-one tendencies come from the ``q``/``Pi`` currently stored on
    the state; the boundary flux for the quarter-stage recomputation is
    sampled at ``t_start + dt_hat / 4``. Returns that sampled flux.
    """
    if dt_hat <= 0:
        raise ValidationError(f"dt_hat must be positive, got {dt_hat!r}")
    dx = grid.dx
    inv_rho0 = 1.0 / params.rho0_hat
    v_old = state.v.copy()
    T_old = state.T

    quarter = 0.25 * dt_hat
    state.v[1:-1] = v_old[1:-1] - quarter * inv_rho0 * diff_half_to_nodes(state.Pi, dx)
    state.T = T_old - quarter * inv_rho0 * diff_nodes_to_half(state.q, dx)
    q0 = flux_at(t_start + quarter)
    update_constitutive(state, params, grid, q0)

    half = 0.5 * dt_hat
    state.v[1:-1] = v_old[1:-1] - half * inv_rho0 * diff_half_to_nodes(state.Pi, dx)
    state.T = T_old - half * inv_rho0 * diff_nodes_to_half(state.q, dx)
    _check_finite(state, "irreversible half-step")
    return q0


def reversible_step(state: FieldState, params: DimensionlessParams, grid: StaggeredGrid, dt_hat: float, bc_v=(0.0, 0.0), bc_flux_left: float = 0.0) -> None:
    """Quasi-symplectic step: rho and T from the current v, then v from the new rho and T."""
    dx = grid.dx
    Dv = diff_nodes_to_half(state.v, dx)
    state.rho_prev = state.rho
    state.rho = state.rho - dt_hat * params.rho0_hat * Dv
    state.T = state.T - dt_hat * params.B * params.Ec_a * Dv
    state.v[1:-1] -= dt_hat * (
        params.B / (params.gamma * params.T0_hat) * diff_half_to_nodes(state.T, dx)
        + diff_half_to_nodes(state.rho, dx) / (params.gamma * params.rho0_hat)
    )
    state.v[0], state.v[-1] = bc_v
    update_constitutive(state, params, grid, bc_flux_left)
    _check_finite(state, "reversible step")


def splitting_step(state: FieldState, params: DimensionlessParams, grid: StaggeredGrid, dt_hat: float, pulse: HeatPulse | None, t_start: float, report: bool = True) -> StepReport | None:
    """Advance one full step of the reversible-irreversible splitting scheme."""
    if not state.staggered:
        raise ValidationError("splitting_step needs a time-staggered state")
    flux_at = pulse_sampler(pulse, params.rho0_hat)
    if report:
        before = {"rho": state.rho, "v": state.v.copy(), "T": state.T}

    state.phase = Phase.AT_STEP_START
    q_a = irreversible_half_step(state, params, grid, dt_hat, flux_at, t_start)
    state.phase = Phase.AFTER_FIRST_IRREV
    reversible_step(state, params, grid, dt_hat, bc_flux_left=flux_at(t_start + 0.5 * dt_hat))
    state.phase = Phase.AFTER_REV
    q_b = irreversible_half_step(state, params, grid, dt_hat, flux_at, t_start + 0.5 * dt_hat)
    q_end = flux_at(t_start + dt_hat)
    apply_closed_walls(state, q_end)
    update_constitutive(state, params, grid, q_end)
    state.step += 1
    state.phase = Phase.COMPLETE

    if not report:
        return None
    return StepReport(
        step=state.step - 1,
        flux_times=(t_start + 0.25 * dt_hat, t_start + 0.75 * dt_hat),
        flux_values=(q_a, q_b),
        max_change={k: float(np.max(np.abs(getattr(state, k) - old))) for k, old in before.items()},
    )


def backward_half_step(state: FieldState, params: DimensionlessParams, grid: StaggeredGrid, dt_hat: float) -> None:
    """Shift rho and T of a synchronous initial state back to ``-dt_hat / 2``.

    One explicit-midpoint step of the reversible field with step
    ``-dt_hat / 2``; v stays at level 0. Constitutive fields are refreshed
    from the shifted T.
    """
    h = -0.5 * dt_hat
    d = reversible_field(state.rho, state.v, state.T, params, grid)
    mid = [x + 0.5 * h * dx_ for x, dx_ in zip((state.rho, state.v, state.T), d)]
    drho, _, dT = reversible_field(*mid, params, grid)
    state.rho = state.rho + h * drho
    state.T = state.T + h * dT
    state.rho_prev = state.rho.copy()
    state.staggered = True
    update_constitutive(state, params, grid, state.q[0], state.q[-1])


# -- RK4 baseline --------------------------------------------------------------


def rk4_step(state: FieldState, params: DimensionlessParams, grid: StaggeredGrid, dt_hat: float, pulse: HeatPulse | None, t_start: float) -> None:
    """Classical RK4 on the synchronous (rho, v, T) system."""
    if state.staggered:
        raise ValidationError("rk4_step needs a synchronous (non-staggered) state")
    y = (state.rho, state.v, state.T)

    def f(t, u):
        return semi_discrete_rhs(*u, params, grid, t, pulse)

    h = dt_hat
    k1 = f(t_start, y)
    k2 = f(t_start + 0.5 * h, [a + 0.5 * h * b for a, b in zip(y, k1)])
    k3 = f(t_start + 0.5 * h, [a + 0.5 * h * b for a, b in zip(y, k2)])
    k4 = f(t_start + h, [a + h * b for a, b in zip(y, k3)])
    new = [a + h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]

    state.rho_prev = state.rho
    state.rho, state.v, state.T = new
    q_end = pulse_sampler(pulse, params.rho0_hat)(t_start + h)
    apply_closed_walls(state, q_end)
    update_constitutive(state, params, grid, q_end)
    state.step += 1
    state.phase = Phase.COMPLETE
    _check_finite(state, "rk4 step")


# -- step-size guidance --------------------------------------------------------


def diffusive_limits(params: DimensionlessParams, grid: StaggeredGrid) -> dict:
    """Explicit-diffusion step limits for heat conduction and viscosity."""
    dx2 = grid.dx**2
    limits = {"conduction": dx2 * params.Pe_a / (2.0 * params.gamma)}
    if params.inv_Re > 0:
        limits["viscosity"] = dx2 * params.Re_a / (2.0 * (params.r_eta + 4.0 / 3.0))
    else:
        limits["viscosity"] = float("inf")
    return limits


def check_time_step(params: DimensionlessParams, grid: StaggeredGrid, dt_hat: float) -> list:
    """Warn (never raise) when ``dt_hat`` exceeds a diffusive limit."""
    messages = []
    for name, limit in diffusive_limits(params, grid).items():
        if dt_hat > limit:
            msg = f"dt_hat={dt_hat:.3e} exceeds the explicit {name} limit {limit:.3e}"
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            messages.append(msg)
    return messages


def synchronous_view(state: FieldState, params: DimensionlessParams, grid: StaggeredGrid, dt_hat: float):
    """(rho, v, T) all at the integer time level of ``v``.

    The staggered scheme keeps the reversible parts of rho and T half a step
    behind v; a forward half drift with the current v brings them level. For
    inviscid runs the density equals the two-level average
    ``(rho^{j+1/2} + rho^{j-1/2}) / 2`` exactly.
    """
    if not state.staggered:
        return state.rho, state.v, state.T
    Dv = diff_nodes_to_half(state.v, grid.dx)
    half = 0.5 * dt_hat
    rho = state.rho - half * params.rho0_hat * Dv
    T = state.T - half * params.B * params.Ec_a * Dv
    return rho, state.v, T
