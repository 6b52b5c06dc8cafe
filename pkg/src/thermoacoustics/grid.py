"""Staggered grid, discrete fields and central-difference operators.

Layout on the unit domain with ``N`` cells:

* ``v`` and ``q`` live on the ``N + 1`` integer nodes ``x = n dx``;
* ``rho``, ``T`` and ``Pi`` live on the ``N`` half-nodes ``x = (n + 1/2) dx``.

In time, the splitting scheme keeps ``rho`` half a step behind ``v``: after
step ``j`` completes, ``rho`` holds level ``j + 1/2`` while the other fields
hold level ``j + 1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .params import DimensionlessParams, ValidationError


@dataclass(frozen=True)
class StaggeredGrid:
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValidationError(f"N must be an integer >= 2, got {self.N!r}")

    @property
    def dx(self) -> float:
        return 1.0 / self.N

    @property
    def x_nodes(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.dx

    @property
    def x_half(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.dx


def diff_nodes_to_half(u, dx: float) -> np.ndarray:
    """(u[n+1] - u[n]) / dx for a node array, giving one value per cell."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 3:
        raise ValidationError(f"node array must be 1-D with length N+1 >= 3, got shape {u.shape}")
    return (u[1:] - u[:-1]) / dx


def diff_half_to_nodes(w, dx: float) -> np.ndarray:
    """(w[n+1/2] - w[n-1/2]) / dx on interior nodes 1..N-1 only."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValidationError(f"half-node array must be 1-D with length N >= 2, got shape {w.shape}")
    return (w[1:] - w[:-1]) / dx


class Phase(enum.Enum):
    AT_STEP_START = "at_step_start"
    AFTER_FIRST_IRREV = "after_first_irrev"
    AFTER_REV = "after_rev"
    COMPLETE = "complete"


@dataclass
class FieldState:
    """The five discrete fields plus time-level bookkeeping.

    ``rho_prev`` keeps the density one (half-)level back so that pressure can
    be reported at integer time levels. ``staggered`` is False for the
    synchronous copy the RK4 baseline works on.

    ``rho`` and ``T`` (and ``rho_prev``) may be stored as deviations from the
    constants ``rho_ref`` and ``T_ref``. The update operators only see
    differences, so the evolution is the same, but small thermal increments
    no longer round away against an O(1) background.
    """

    rho: np.ndarray
    v: np.ndarray
    T: np.ndarray
    q: np.ndarray
    Pi: np.ndarray
    rho_prev: np.ndarray
    step: int = 0
    phase: Phase = Phase.COMPLETE
    staggered: bool = True
    rho_ref: float = 0.0
    T_ref: float = 0.0

    @property
    def N(self) -> int:
        return self.rho.size

    def absolute(self, rho, T):
        """Add the references back to (deviation) arrays ``rho`` and ``T``."""
        return self.rho_ref + np.asarray(rho), self.T_ref + np.asarray(T)

    def check_shapes(self) -> None:
        N = self.N
        for name, size in (("T", N), ("Pi", N), ("rho_prev", N), ("v", N + 1), ("q", N + 1)):
            arr = getattr(self, name)
            if arr.shape != (size,):
                raise ValidationError(f"{name} has shape {arr.shape}, expected ({size},)")

    def copy(self) -> "FieldState":
        return FieldState(
            rho=self.rho.copy(), v=self.v.copy(), T=self.T.copy(), q=self.q.copy(),
            Pi=self.Pi.copy(), rho_prev=self.rho_prev.copy(), step=self.step,
            phase=self.phase, staggered=self.staggered, rho_ref=self.rho_ref, T_ref=self.T_ref,
        )


def init_equilibrium(grid: StaggeredGrid, params: DimensionlessParams, staggered: bool = True, deviations: bool = False) -> FieldState:
    """Homogeneous static equilibrium.

    The backward half-step of ``rho``/``T`` is the identity here because the
    reversible tendencies vanish, so the stored values are already at level
    ``-1/2``. With ``deviations=True`` the arrays start at zero and the
    equilibrium values go into ``rho_ref``/``T_ref``.
    """
    N = grid.N
    rho_ref, T_ref = (params.rho0_hat, params.T0_hat) if deviations else (0.0, 0.0)
    rho = np.full(N, params.rho0_hat - rho_ref)
    return FieldState(
        rho=rho,
        v=np.zeros(N + 1),
        T=np.full(N, params.T0_hat - T_ref),
        q=np.zeros(N + 1),
        Pi=np.zeros(N),
        rho_prev=rho.copy(),
        staggered=staggered,
        rho_ref=rho_ref,
        T_ref=T_ref,
    )


class ProbeLocation(enum.Enum):
    FRONT = "front"
    REAR = "rear"
    NODE = "node"
    HALF_NODE = "half_node"


PROBE_FIELDS = ("T", "rho", "p", "v", "q")


@dataclass(frozen=True)
class Probe:
    """A fixed sampling point.

    ``FRONT`` means half-node ``1/2`` (for T, rho, p) and node 0 (for v, q);
    ``REAR`` means half-node ``N - 1/2`` and node ``N``. No extrapolation to
    the wall is done.
    """

    location: ProbeLocation
    index: int = 0
    fields: tuple = PROBE_FIELDS

    def __post_init__(self):
        bad = set(self.fields) - set(PROBE_FIELDS)
        if bad:
            raise ValidationError(f"unknown probe fields {sorted(bad)}")

    def half_index(self, N: int) -> int:
        if self.location is ProbeLocation.FRONT:
            return 0
        if self.location is ProbeLocation.REAR:
            return N - 1
        if self.location is ProbeLocation.HALF_NODE:
            if not 0 <= self.index < N:
                raise ValidationError(f"half-node index {self.index} outside 0..{N - 1}")
            return self.index
        # nearest cell to the left of the node
        return min(self.index, N - 1)

    def node_index(self, N: int) -> int:
        if self.location is ProbeLocation.FRONT:
            return 0
        if self.location is ProbeLocation.REAR:
            return N
        if self.location is ProbeLocation.NODE:
            if not 0 <= self.index <= N:
                raise ValidationError(f"node index {self.index} outside 0..{N}")
            return self.index
        return self.index

    def validate(self, N: int) -> None:
        self.half_index(N)
        self.node_index(N)
