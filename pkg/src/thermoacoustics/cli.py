"""Command-line entry point: ``run``, ``study`` and ``params`` subcommands."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .harness import compare_integrators, convergence_study, grid_study, run_simulation
from .integrators import InstabilityError
from .io import load_case, probes_csv, table_csv, write_run, write_text
from .params import CO2_RHO_CRIT, CO2_T_CRIT, ValidationError, derive_dimensionless, load_material_row

EXIT_OK = 0
EXIT_MISSING_FILE = 3
EXIT_SCHEMA = 4
EXIT_INSTABILITY = 5


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def cmd_run(args) -> int:
    case = load_case(args.config)  # validated before anything is written
    result = run_simulation(case.config)
    write_run(result, args.out)
    L = result.ledger
    _say(args, f"{case.name}: {case.config.n_steps} steps, max mass drift {L['max_mass_drift']:.3e}, "
               f"heat residual {L['max_step_heat_residual']:.3e}, injected {L['total_injected']:.6e}")
    if not result.stable:
        print(f"error: {result.error} (partial output kept in {args.out})", file=sys.stderr)
        return EXIT_INSTABILITY
    return EXIT_OK


def cmd_study(args) -> int:
    case = load_case(args.config)
    cfg, st = case.config, case.study
    out = Path(args.out)
    if args.kind == "convergence":
        res = convergence_study(cfg, levels=st.levels, ref_factor=st.ref_factor, t_compare=st.t_compare)
        out.mkdir(parents=True, exist_ok=True)
        rows = [(f, "degenerate" if isinstance(o, str) else float(o)) for f, o in res.orders.items()]
        write_text(out / "orders.csv", table_csv(["field", "order"], rows))
        fields = list(res.errors)
        err_rows = [[N, float(dt)] + [float(res.errors[f][i]) for f in fields] for i, (N, dt) in enumerate(zip(res.levels, res.dts))]
        write_text(out / "errors.csv", table_csv(["N", "dt_hat"] + fields, err_rows))
        for f, o in res.orders.items():
            _say(args, f"{f}: {o if isinstance(o, str) else f'{o:.3f}'}")
    elif args.kind == "grid":
        dev = grid_study(cfg, cell_counts=st.cell_counts, reference_N=st.reference_N)
        dev_v = grid_study(cfg, cell_counts=st.cell_counts, reference_N=st.reference_N, normalization="value")
        rows = [(N, f, float(d), float(dev_v[N][f])) for N in sorted(dev) for f, d in dev[N].items()]
        out.mkdir(parents=True, exist_ok=True)
        write_text(out / "deviations.csv", table_csv(["N", "field", "deviation", "value_deviation"], rows))
        for N, f, d, dv in rows:
            _say(args, f"N={N} {f}: {d:.4f} (value-normalised {dv:.2e})")
    else:
        res = compare_integrators(cfg)
        out.mkdir(parents=True, exist_ok=True)
        rows = []
        for name in sorted(res):
            write_text(out / f"probes_{name}.csv", probes_csv(res[name]["result"]))
            m = res[name]["metrics"]
            rows.append((name, float(m["max_undershoot"]), float(m["oscillation_energy"])))
            _say(args, f"{name}: undershoot {m['max_undershoot']:.3e}, energy {m['oscillation_energy']:.3e}")
        write_text(out / "dispersion_metrics.csv", table_csv(["integrator", "max_undershoot", "oscillation_energy"], rows))
        if not all(res[n]["result"].stable for n in res):
            return EXIT_INSTABILITY
    return EXIT_OK


def cmd_params(args) -> int:
    mat = load_material_row(args.table, args.T, args.p, r_eta=args.r_eta, T_c=args.Tc, rho_c=args.rhoc, material=args.material)
    p = derive_dimensionless(mat, args.X, allow_inviscid=args.inviscid)
    values = p.as_dict()
    for k, v in values.items():
        print(f"{k} = {'inf' if math.isinf(v) else repr(v)}")
    if args.csv_out:
        write_text(Path(args.csv_out), table_csv(list(values), [list(map(float, values.values()))]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thermoacoustics", description="1-D linear thermoacoustics simulator")
    ap.add_argument("--quiet", action="store_true", help="suppress progress output")
    ap.add_argument("--seedless", action="store_true", help="reserved; nothing here is random")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one case file")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.set_defaults(func=cmd_run)

    study = sub.add_parser("study", help="convergence, grid or integrator comparison study")
    study.add_argument("kind", choices=("convergence", "grid", "compare"))
    study.add_argument("--config", required=True)
    study.add_argument("--out", required=True)
    study.set_defaults(func=cmd_study)

    par = sub.add_parser("params", help="dimensionless groups from a property table row")
    par.add_argument("--table", required=True, help="CSV with columns [material,]T,p,rho,cp,as,betap,gamma,nu,ath")
    par.add_argument("--material", default=None, help="row label, needed when phases share (T, p)")
    par.add_argument("--T", type=float, required=True)
    par.add_argument("--p", type=float, required=True)
    par.add_argument("--X", type=float, required=True, help="pipe length [m]")
    par.add_argument("--Tc", type=float, default=CO2_T_CRIT)
    par.add_argument("--rhoc", type=float, default=CO2_RHO_CRIT)
    par.add_argument("--r-eta", dest="r_eta", type=float, default=0.0)
    par.add_argument("--inviscid", action="store_true", help="allow nu = 0 (Re_a = inf)")
    par.add_argument("--csv-out", dest="csv_out", default=None)
    par.set_defaults(func=cmd_params)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except InstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY


if __name__ == "__main__":
    sys.exit(main())
