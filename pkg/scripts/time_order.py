"""Temporal order of the splitting scheme at a fixed grid.

The reference is RK4 at a much smaller step, which converges to the exact
semi-discrete flow. On coarse steps the error ratio per halving is near 4.
As the step shrinks, the ratio drifts toward 2 at a pace set by the
dissipation: slowly with heat conduction alone at Pe=1e5, and quickly once
viscosity is added at Pe=1e4.

    python scripts/time_order.py
"""

import numpy as np

from thermoacoustics.excitation import HeatPulse
from thermoacoustics.harness import SimulationConfig, l2_error, run_simulation
from thermoacoustics.params import wave_test_params

N, T_END = 100, 2.0


def final_fields(params, Co, integrator):
    cfg = SimulationConfig(params=params, N=N, Co=Co, t_end_hat=T_END, pulse=HeatPulse(0.001, 0.5),
                           integrator=integrator, probe_stride=10**9, snapshot_times=(T_END,))
    return run_simulation(cfg).snapshots[-1].fields


def main():
    cos = 0.8 * 2.0 ** -np.arange(5)
    for label, params in (("inviscid Pe=1e5", wave_test_params()),
                          ("viscous Pe=1e4", wave_test_params(Pe_a=1e4, viscous=True))):
        ref = final_fields(params, cos[-1] / 8, "rk4")
        errs = [l2_error(final_fields(params, co, "splitting")["v"], ref["v"]) for co in cos]
        ratios = [a / b for a, b in zip(errs, errs[1:])]
        print(f"{label}: v errors " + " ".join(f"{e:.2e}" for e in errs))
        print("  ratios per halving " + " ".join(f"{r:.2f}" for r in ratios))


if __name__ == "__main__":
    main()
