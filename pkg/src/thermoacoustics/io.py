"""Case files (YAML) and deterministic CSV writers.

Every float is written as ``%.16e`` (17 significant digits), lines end in LF
and each file starts with a header row, so identical runs give identical
bytes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .excitation import HeatPulse
from .grid import PROBE_FIELDS, Probe, ProbeLocation
from .harness import PROBE_COLUMNS, RunResult, SimulationConfig, Snapshot
from .params import DimensionlessParams, ValidationError

PARAM_KEYS = {"gamma", "B", "Ec_a", "Pe_a", "Re_a", "Pr", "r_eta", "T0_hat", "rho0_hat", "p0_hat"}
REQUIRED_PARAM_KEYS = {"gamma", "B", "Ec_a", "Pe_a", "r_eta", "T0_hat", "rho0_hat"}
TOP_KEYS = {"name", "description", "params", "grid", "run", "pulse", "probes", "study"}
GRID_KEYS = {"N", "Co"}
RUN_KEYS = {"t_end_hat", "integrator", "probe_stride", "snapshot_times"}
PULSE_KEYS = {"q_hat", "tP_hat"}
PROBE_KEYS = {"location", "index", "fields"}
STUDY_KEYS = {"levels", "ref_factor", "t_compare", "cell_counts", "reference_N"}


@dataclass
class StudySettings:
    levels: tuple = (50, 100, 200, 400)
    ref_factor: int = 8
    t_compare: float = 2.0
    cell_counts: tuple = (20, 50)
    reference_N: int = 100


@dataclass
class CaseFile:
    """A :class:`SimulationConfig` plus metadata. All quantities are dimensionless."""

    name: str
    config: SimulationConfig
    description: str = ""
    study: StudySettings = field(default_factory=StudySettings)


def fmt(x) -> str:
    x = float(x) + 0.0  # folds -0.0 into 0.0
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.16e" % x


def _float(section: str, key: str, value) -> float:
    if isinstance(value, bool):
        raise ValidationError(f"{section}.{key}: expected a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{section}.{key}: expected a number, got {value!r}") from None


def _int(section: str, key: str, value) -> int:
    f = _float(section, key, value)
    if f != int(f):
        raise ValidationError(f"{section}.{key}: expected an integer, got {value!r}")
    return int(f)


def _check_keys(section: str, data, allowed: set, required: set = frozenset()) -> None:
    if not isinstance(data, dict):
        raise ValidationError(f"{section}: expected a mapping, got {type(data).__name__}")
    unknown = set(data) - allowed
    if unknown:
        raise ValidationError(f"{section}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(data)
    if missing:
        raise ValidationError(f"{section}: missing keys {sorted(missing)}")


def parse_params(data: dict) -> DimensionlessParams:
    _check_keys("params", data, PARAM_KEYS, REQUIRED_PARAM_KEYS)
    values = {k: _float("params", k, v) for k, v in data.items()}
    if "Re_a" in values and "Pr" in values:
        values.setdefault("p0_hat", 0.0)
        return DimensionlessParams(**values)
    return DimensionlessParams.from_groups(**values)


def parse_case(data: dict) -> CaseFile:
    _check_keys("case", data, TOP_KEYS, {"name", "params", "grid", "run", "pulse"})
    params = parse_params(data["params"])

    _check_keys("grid", data["grid"], GRID_KEYS, GRID_KEYS)
    run = data["run"]
    _check_keys("run", run, RUN_KEYS, {"t_end_hat"})
    _check_keys("pulse", data["pulse"], PULSE_KEYS, PULSE_KEYS)
    pulse = HeatPulse(**{k: _float("pulse", k, v) for k, v in data["pulse"].items()})

    probes = []
    for i, p in enumerate(data.get("probes") or ()):
        _check_keys(f"probes[{i}]", p, PROBE_KEYS, {"location"})
        try:
            loc = ProbeLocation(p["location"])
        except ValueError:
            raise ValidationError(f"probes[{i}].location: unknown value {p['location']!r}") from None
        probes.append(Probe(loc, _int(f"probes[{i}]", "index", p.get("index", 0)), tuple(p.get("fields", PROBE_FIELDS))))

    study_data = data.get("study") or {}
    _check_keys("study", study_data, STUDY_KEYS)
    study = StudySettings()
    if "levels" in study_data:
        study.levels = tuple(_int("study", "levels", x) for x in study_data["levels"])
    if "cell_counts" in study_data:
        study.cell_counts = tuple(_int("study", "cell_counts", x) for x in study_data["cell_counts"])
    for key in ("ref_factor", "reference_N"):
        if key in study_data:
            setattr(study, key, _int("study", key, study_data[key]))
    if "t_compare" in study_data:
        study.t_compare = _float("study", "t_compare", study_data["t_compare"])

    name = data["name"]
    if not isinstance(name, str) or not name:
        raise ValidationError("name: expected a non-empty string")
    config = SimulationConfig(
        params=params,
        N=_int("grid", "N", data["grid"]["N"]),
        Co=_float("grid", "Co", data["grid"]["Co"]),
        t_end_hat=_float("run", "t_end_hat", run["t_end_hat"]),
        pulse=pulse,
        integrator=str(run.get("integrator", "splitting")),
        probes=tuple(probes),
        probe_stride=_int("run", "probe_stride", run.get("probe_stride", 1)),
        snapshot_times=tuple(_float("run", "snapshot_times", t) for t in run.get("snapshot_times") or ()),
    )
    return CaseFile(name=name, description=str(data.get("description", "")), config=config, study=study)


def load_case(path: str | Path) -> CaseFile:
    path = Path(path)
    text = path.read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"{path}: not valid YAML ({exc})") from None
    return parse_case(data)


def case_to_dict(case: CaseFile) -> dict:
    cfg = case.config
    p = cfg.params
    params = {k: getattr(p, k) for k in ("gamma", "B", "Ec_a", "Pe_a", "Re_a", "Pr", "r_eta", "T0_hat", "rho0_hat", "p0_hat")}
    out = {
        "name": case.name,
        "description": case.description,
        "params": params,
        "grid": {"N": cfg.N, "Co": cfg.Co},
        "run": {
            "t_end_hat": cfg.t_end_hat,
            "integrator": cfg.integrator,
            "probe_stride": cfg.probe_stride,
            "snapshot_times": list(cfg.snapshot_times),
        },
        "pulse": {"q_hat": cfg.pulse.q_hat, "tP_hat": cfg.pulse.tP_hat},
        "probes": [{"location": pr.location.value, "index": pr.index, "fields": list(pr.fields)} for pr in cfg.probes],
        "study": {
            "levels": list(case.study.levels),
            "ref_factor": case.study.ref_factor,
            "t_compare": case.study.t_compare,
            "cell_counts": list(case.study.cell_counts),
            "reference_N": case.study.reference_N,
        },
    }
    return out


def dump_case(case: CaseFile) -> str:
    return yaml.safe_dump(case_to_dict(case), sort_keys=False)


# -- CSV -----------------------------------------------------------------------


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def write_text(path: Path, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def probes_csv(result: RunResult) -> str:
    extra = [k for k in result.series if k not in PROBE_COLUMNS]
    header = list(PROBE_COLUMNS) + extra
    cols = [np.asarray(result.series[k], dtype=float) for k in header]
    return _csv_text(header, zip(*cols))


def snapshot_name(t: float) -> str:
    return f"snapshot_{t:g}.csv"


def snapshot_csv(snap: Snapshot) -> str:
    """One row per node; half-node columns are empty on the last row."""
    f = snap.fields
    N = snap.x_half.size
    header = ["index", "x_node", "v", "q", "x_half", "rho", "rho_half", "T", "p", "Pi"]
    rows = []
    for n in range(N + 1):
        row = [n, float(snap.x_nodes[n]), float(f["v"][n]), float(f["q"][n])]
        if n < N:
            row += [float(snap.x_half[n])] + [float(f[k][n]) for k in ("rho", "rho_half", "T", "p", "Pi")]
        else:
            row += [""] * 6
        rows.append(row)
    return _csv_text(header, rows)


def ledger_csv(result: RunResult) -> str:
    L = result.ledger
    header = ["t_hat", "mass_drift", "heat_residual", "injected"]
    return _csv_text(header, zip(*(np.asarray(L[k], dtype=float) for k in header)))


def write_run(result: RunResult, out_dir: str | Path) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in [("probes.csv", probes_csv(result)), ("ledger.csv", ledger_csv(result))]:
        write_text(out / name, text)
        written.append(out / name)
    requested = list(result.config.snapshot_times)
    for snap in result.snapshots:
        # label the file with the requested time, not the nearest step time
        t_req = min(requested, key=lambda t: abs(t - snap.t_hat)) if requested else snap.t_hat
        path = out / snapshot_name(t_req)
        write_text(path, snapshot_csv(snap))
        written.append(path)
    return written


def table_csv(header, rows) -> str:
    return _csv_text(header, rows)
