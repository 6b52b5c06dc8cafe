"""Raised-cosine heat pulse at the left wall and the closed-pipe conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .grid import FieldState
from .params import ValidationError


@dataclass(frozen=True)
class HeatPulse:
    q_hat: float
    tP_hat: float

    def __post_init__(self):
        if not (math.isfinite(self.tP_hat) and self.tP_hat > 0):
            raise ValidationError(f"tP_hat must be positive, got {self.tP_hat!r}")
        if not (math.isfinite(self.q_hat) and self.q_hat >= 0):
            raise ValidationError(f"q_hat must be >= 0, got {self.q_hat!r}")


def pulse_flux(t_hat: float, pulse: HeatPulse, rho0_hat: float) -> float:
    """Left-wall heat flux; nonzero only on the closed interval [0, tP]."""
    if not 0.0 <= t_hat <= pulse.tP_hat:
        return 0.0
    return (pulse.q_hat / pulse.tP_hat) * (1.0 - math.cos(2.0 * math.pi * t_hat / pulse.tP_hat)) / rho0_hat


def pulse_sampler(pulse: HeatPulse | None, rho0_hat: float):
    """Return ``t -> q0(t)``; a missing pulse means an adiabatic wall."""
    if pulse is None or pulse.q_hat == 0.0:
        return lambda t: 0.0
    return lambda t: pulse_flux(t, pulse, rho0_hat)


def apply_closed_walls(state: FieldState, q0: float = 0.0) -> None:
    """Rigid walls at both ends, adiabatic right wall, prescribed left flux."""
    state.v[0] = 0.0
    state.v[-1] = 0.0
    state.q[0] = q0
    state.q[-1] = 0.0
