"""Piston-effect runs: supercritical CO2 against the ideal-gas reference.

Prints how much of the final rear temperature change has arrived by the end
of the heat pulse, and how uniform the pressure stays.

    python scripts/pistons.py [--out runs/pistons]
"""

import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from thermoacoustics.harness import run_simulation
from thermoacoustics.io import load_case, write_run

CASES = Path(__file__).resolve().parents[1] / "cases"


def summarize(res):
    cfg = res.config
    t, T = res.series["t_hat"], res.series["T_rear"]
    k = int(np.argmin(np.abs(t - cfg.pulse.tP_hat)))
    frac = (T[k] - T[0]) / (T[-1] - T[0])
    late = [s for s in res.snapshots if s.t_hat > 2.0]
    rise = max(abs(float(np.mean(s.fields["p"])) - cfg.params.p0_hat) for s in late)
    spread = max(float(np.ptp(s.fields["p"])) for s in late)
    return frac, spread / rise


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/pistons")
    args = ap.parse_args()
    for name in ("sc_piston", "ideal_gas_piston"):
        cfg = load_case(CASES / f"{name}.yaml").config
        times = tuple(np.arange(2.5, 200.0 + 1e-9, 2.5)) + (1000.0, cfg.t_end_hat)
        res = run_simulation(replace(cfg, snapshot_times=times))
        write_run(res, Path(args.out) / name)
        frac, spread = summarize(res)
        print(f"{name}: {cfg.n_steps} steps in {res.wall_time:.1f} s; "
              f"rear dT fraction by tP = {frac:.3f}; pressure spread / rise = {spread:.2e}")


if __name__ == "__main__":
    main()
