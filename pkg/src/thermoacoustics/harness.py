"""Simulation driver, diagnostics and the verification studies."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import median_filter

from . import kernels
from .excitation import HeatPulse
from .grid import (
    FieldState,
    Probe,
    ProbeLocation,
    StaggeredGrid,
    diff_half_to_nodes,
    init_equilibrium,
)
from .integrators import InstabilityError, check_time_step, rk4_step, splitting_step, synchronous_view
from .params import DimensionlessParams, ValidationError, pressure_field

INTEGRATORS = ("splitting", "rk4")

# Fixed columns of probes.csv, in order.
PROBE_COLUMNS = (
    "t_hat", "t_hat_half", "T_front", "T_rear", "rho_front_half", "rho_rear_half",
    "p_front", "p_rear", "v_mid", "q0",
)


@dataclass
class SimulationConfig:
    params: DimensionlessParams
    N: int
    Co: float
    t_end_hat: float
    pulse: HeatPulse
    integrator: str = "splitting"
    probes: tuple = ()
    probe_stride: int = 1
    snapshot_times: tuple = ()
    fast: bool = True

    def __post_init__(self):
        StaggeredGrid(self.N)
        if not (math.isfinite(self.Co) and self.Co > 0):
            raise ValidationError(f"Co must be positive, got {self.Co!r}")
        if not (math.isfinite(self.t_end_hat) and self.t_end_hat > 0):
            raise ValidationError(f"t_end_hat must be positive, got {self.t_end_hat!r}")
        if self.integrator not in INTEGRATORS:
            raise ValidationError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if int(self.probe_stride) != self.probe_stride or self.probe_stride < 1:
            raise ValidationError(f"probe_stride must be a positive integer, got {self.probe_stride!r}")
        for t in self.snapshot_times:
            if not 0 <= t <= self.t_end_hat:
                raise ValidationError(f"snapshot time {t!r} outside [0, {self.t_end_hat!r}]")
        for p in self.probes:
            p.validate(self.N)

    @property
    def grid(self) -> StaggeredGrid:
        return StaggeredGrid(self.N)

    @property
    def dt(self) -> float:
        return self.Co / self.N

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end_hat / self.dt - 1e-9))


@dataclass
class Snapshot:
    """All fields at one integer time level (rho and T synchronised)."""

    t_hat: float
    step: int
    x_half: np.ndarray
    x_nodes: np.ndarray
    fields: dict


@dataclass
class RunResult:
    config: SimulationConfig
    series: dict
    snapshots: list
    ledger: dict
    stable: bool = True
    error: str = ""
    wall_time: float = 0.0
    final_state: FieldState | None = None

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.series[name])


def snapshot_of(state: FieldState, params: DimensionlessParams, grid: StaggeredGrid, dt: float, t_hat: float) -> Snapshot:
    rho, v, T = synchronous_view(state, params, grid, dt)
    rho, T = state.absolute(rho, T)
    q = state.q.copy()
    q[1:-1] = -params.conduction_coeff * diff_half_to_nodes(T, grid.dx)
    return Snapshot(
        t_hat=t_hat,
        step=state.step,
        x_half=grid.x_half,
        x_nodes=grid.x_nodes,
        fields={
            "rho": np.array(rho), "v": v.copy(), "T": np.array(T), "q": q,
            "Pi": state.Pi.copy(), "p": pressure_field(T, rho, params),
            "rho_half": state.rho_ref + state.rho,
        },
    )


def _probe_record(state, params, grid, dt, probes):
    rho_sync, v, T_sync = synchronous_view(state, params, grid, dt)
    rho_sync, T_sync = state.absolute(rho_sync, T_sync)
    rho_half = state.rho_ref + state.rho
    N = grid.N
    p = pressure_field(T_sync[[0, N - 1]], rho_sync[[0, N - 1]], params)
    row = {
        "T_front": T_sync[0],
        "T_rear": T_sync[N - 1],
        "rho_front_half": rho_half[0],
        "rho_rear_half": rho_half[N - 1],
        "p_front": p[0],
        "p_rear": p[1],
        "v_mid": v[N // 2],
        "q0": state.q[0],
    }
    for probe in probes:
        label = probe.location.value if probe.location in (ProbeLocation.FRONT, ProbeLocation.REAR) else f"{probe.location.value}{probe.index}"
        i, n = probe.half_index(N), probe.node_index(N)
        values = {
            "T": T_sync[i], "rho": rho_sync[i],
            "p": pressure_field(T_sync[i:i + 1], rho_sync[i:i + 1], params)[0],
            "v": v[n], "q": state.q[n],
        }
        for f in probe.fields:
            row[f"{f}_{label}"] = values[f]
    return {k: float(val) for k, val in row.items()}


def run_simulation(config: SimulationConfig, keep_state: bool = False) -> RunResult:
    """Step from t=0 to at least ``t_end_hat``, recording probes, snapshots and the ledger.

    An instability stops the run; everything recorded so far is returned
    with ``stable=False``.
    """
    params, grid, dt = config.params, config.grid, config.dt
    check_time_step(params, grid, dt)
    staggered = config.integrator == "splitting"
    # deviation storage keeps slow diffusive tails above the rounding floor
    state = init_equilibrium(grid, params, staggered=staggered, deviations=True)
    n_steps = config.n_steps
    dx = grid.dx

    mass0 = float(np.sum(state.rho))
    mass_scale = grid.N * params.rho0_hat
    heat0 = float(np.sum(state.T))
    injected = 0.0
    max_drift = 0.0
    max_step_residual = 0.0

    series = {name: [] for name in PROBE_COLUMNS}
    ledger = {"t_hat": [], "mass_drift": [], "heat_residual": [], "injected": []}
    snap_steps = {}
    for t in config.snapshot_times:
        snap_steps.setdefault(int(round(t / dt)), []).append(t)
    snapshots = []

    def record(step):
        t = step * dt
        row = _probe_record(state, params, grid, dt, config.probes)
        for k, val in row.items():
            series.setdefault(k, []).append(val)
        series["t_hat"].append(t)
        series["t_hat_half"].append(t - 0.5 * dt if staggered else t)
        stored = params.rho0_hat * dx * (float(np.sum(state.T)) - heat0)
        ledger["t_hat"].append(t)
        ledger["mass_drift"].append(abs(float(np.sum(state.rho)) - mass0) / mass_scale)
        ledger["heat_residual"].append(stored - injected)
        ledger["injected"].append(injected)

    def snap(step):
        for t in snap_steps.get(step, ()):
            snapshots.append(snapshot_of(state, params, grid, dt, step * dt))

    stable, error = True, ""
    start = time.perf_counter()
    record(0)
    snap(0)
    use_kernel = staggered and config.fast
    breakpoints = sorted({s for s in snap_steps if 0 < s <= n_steps} | set(range(config.probe_stride, n_steps + 1, config.probe_stride)) | {n_steps})
    j = 0
    try:
        for target in breakpoints:
            if use_kernel:
                chunk_injected, drift, residual = kernels.advance_state(state, params, dt, target - j, config.pulse, mass0, mass_scale)
                injected += chunk_injected
                max_drift = max(max_drift, drift)
                max_step_residual = max(max_step_residual, residual)
                j = target
            else:
                while j < target:
                    if staggered:
                        sum_before = float(np.sum(state.T))
                        rep = splitting_step(state, params, grid, dt, config.pulse, j * dt)
                        step_heat = 0.5 * dt * sum(rep.flux_values)
                        residual = params.rho0_hat * dx * (float(np.sum(state.T)) - sum_before) - step_heat
                        max_step_residual = max(max_step_residual, abs(residual))
                    else:
                        rk4_step(state, params, grid, dt, config.pulse, j * dt)
                        step_heat = _simpson_flux(config.pulse, params, j * dt, dt)
                    injected += step_heat
                    max_drift = max(max_drift, abs(float(np.sum(state.rho)) - mass0) / mass_scale)
                    j += 1
            if target % config.probe_stride == 0 or target == n_steps:
                record(target)
            snap(target)
    except InstabilityError as exc:
        stable, error = False, str(exc)

    ledger = {k: np.asarray(v) for k, v in ledger.items()}
    ledger["max_mass_drift"] = max_drift
    ledger["max_step_heat_residual"] = max_step_residual
    ledger["total_injected"] = injected
    return RunResult(
        config=config,
        series={k: np.asarray(v) for k, v in series.items()},
        snapshots=snapshots,
        ledger=ledger,
        stable=stable,
        error=error,
        wall_time=time.perf_counter() - start,
        final_state=state if keep_state else None,
    )


def _simpson_flux(pulse, params, t, dt):
    from .excitation import pulse_sampler

    f = pulse_sampler(pulse, params.rho0_hat)
    return dt / 6.0 * (f(t) + 4.0 * f(t + 0.5 * dt) + f(t + dt))


# -- diagnostics ---------------------------------------------------------------


def l2_error(sol, ref, dx: float | None = None) -> float:
    """sqrt(dx * sum((sol - ref)^2)) for two fields on the same staggering."""
    sol = np.asarray(sol, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if sol.shape != ref.shape:
        raise ValidationError(f"staggering mismatch: {sol.shape} vs {ref.shape}")
    if dx is None:
        # node arrays carry N+1 entries, half-node arrays N
        dx = 1.0 / (sol.size - 1) if sol.size % 2 == 1 else 1.0 / sol.size
    return float(np.sqrt(dx * np.sum((sol - ref) ** 2)))


def restrict(fine, factor: int, on_nodes: bool) -> np.ndarray:
    """Sample a fine-grid field at coarse-grid locations.

    Nodes coincide for integer refinement factors. Coarse cell centres fall
    between two fine cells for even factors, so their average is used.
    """
    fine = np.asarray(fine)
    if on_nodes:
        return fine[::factor].copy()
    if factor % 2 == 1:
        return fine[factor // 2::factor].copy()
    return 0.5 * (fine[factor // 2 - 1::factor] + fine[factor // 2::factor])


def dispersion_metrics(series, T0_hat: float, window: int) -> dict:
    """Undershoot below the baseline and ripple energy of a probe series."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValidationError("empty series")
    undershoot = max(0.0, T0_hat - float(series.min()))
    window = max(1, int(window))
    if window % 2 == 0:
        window += 1
    trend = median_filter(series, size=window, mode="nearest")
    ripple = series - trend
    energy = float(np.sum(np.diff(ripple) ** 2))
    return {"max_undershoot": undershoot, "oscillation_energy": energy}


# -- studies -------------------------------------------------------------------

CONVERGENCE_FIELDS = ("rho", "v", "T", "q", "Pi")
NODE_FIELDS = {"v", "q"}


@dataclass
class ConvergenceResult:
    levels: list
    dts: list
    errors: dict
    orders: dict
    t_compare: float
    reference_N: int


def _snapshot_run(config: SimulationConfig, t_compare: float) -> Snapshot:
    cfg = replace(config, t_end_hat=t_compare, snapshot_times=(t_compare,), probe_stride=max(1, config.n_steps))
    res = run_simulation(cfg)
    if not res.stable:
        raise InstabilityError(-1, f"convergence run N={config.N}: {res.error}")
    return res.snapshots[0]


def convergence_study(base: SimulationConfig, levels=(50, 100, 200, 400), ref_factor: int = 8, t_compare: float = 2.0) -> ConvergenceResult:
    """L2 errors against a finer run at fixed Courant number, with fitted orders.

    Fields whose errors are all zero (no excitation, or Pi when inviscid)
    report ``"degenerate"`` instead of an order.
    """
    levels = sorted(levels)
    if len(levels) < 3:
        raise ValidationError("need at least three levels")
    ref_N = levels[-1] * ref_factor
    for N in levels:
        if ref_N % N:
            raise ValidationError(f"reference N={ref_N} not a multiple of {N}")
    ref = _snapshot_run(replace(base, N=ref_N, probes=()), t_compare)
    errors = {f: [] for f in CONVERGENCE_FIELDS}
    dts = []
    for N in levels:
        cfg = replace(base, N=N, probes=())
        snap = _snapshot_run(cfg, t_compare)
        dts.append(cfg.dt)
        for f in CONVERGENCE_FIELDS:
            on_nodes = f in NODE_FIELDS
            r = restrict(ref.fields[f], ref_N // N, on_nodes)
            errors[f].append(l2_error(snap.fields[f], r, 1.0 / N))
    orders = {}
    for f, errs in errors.items():
        e = np.asarray(errs)
        if np.all(e == 0) or np.max(e) < 1e-300:
            orders[f] = "degenerate"
        else:
            orders[f] = float(np.polyfit(np.log(dts), np.log(e), 1)[0])
    return ConvergenceResult(levels=list(levels), dts=dts, errors=errors, orders=orders, t_compare=t_compare, reference_N=ref_N)


GRID_STUDY_FIELDS = ("T", "rho", "p", "v", "q")


def grid_study(base: SimulationConfig, cell_counts=(20, 50), reference_N: int = 100, normalization: str = "excursion") -> dict:
    """Max relative deviation of rear-probe series from the reference grid.

    Series are compared at common times. With ``normalization="excursion"``
    the deviation is divided by the reference signal's largest excursion from
    equilibrium; ``"value"`` divides by its largest absolute value instead.
    Returns ``{N: {field: deviation}}``.
    """
    if normalization not in ("excursion", "value"):
        raise ValidationError(f"unknown normalization {normalization!r}")
    # probe times must coincide: pick a record spacing common to all grids
    dt_common = base.Co / math.gcd(*cell_counts, reference_N)
    runs = {}
    for N in sorted(set(cell_counts) | {reference_N}):
        if reference_N % N and N % reference_N:
            raise ValidationError(f"N={N} incompatible with reference N={reference_N}")
        cfg = replace(base, N=N, probes=(Probe(ProbeLocation.REAR),), probe_stride=int(round(dt_common / (base.Co / N))))
        res = run_simulation(cfg)
        if not res.stable:
            raise InstabilityError(-1, f"grid study N={N}: {res.error}")
        runs[N] = res
    eq = {"T": base.params.T0_hat, "rho": base.params.rho0_hat, "p": base.params.p0_hat, "v": 0.0, "q": 0.0}
    ref = runs[reference_N]
    out = {}
    for N in sorted(cell_counts):
        res = runs[N]
        n = min(len(res.series["t_hat"]), len(ref.series["t_hat"]))
        out[N] = {}
        for f in GRID_STUDY_FIELDS:
            u = res.series[f"{f}_rear"][:n]
            r = ref.series[f"{f}_rear"][:n]
            base_level = eq[f] if normalization == "excursion" else 0.0
            scale = float(np.max(np.abs(r - base_level)))
            out[N][f] = 0.0 if scale == 0 else float(np.max(np.abs(u - r)) / scale)
    return out


def compare_integrators(base: SimulationConfig) -> dict:
    """Same settings with both integrators; rear-probe dispersion metrics for each."""
    out = {}
    for name in INTEGRATORS:
        res = run_simulation(replace(base, integrator=name))
        window = max(1, int(round(1.0 / (base.dt * base.probe_stride))))
        out[name] = {
            "result": res,
            "metrics": dispersion_metrics(res.series["T_rear"], base.params.T0_hat, window),
        }
    return out
