"""Convergence, grid-independence and RK4 comparison studies through the CLI.

    python scripts/studies.py [--out runs/studies]
"""

import argparse
from pathlib import Path

from thermoacoustics.cli import main as cli

CASES = Path(__file__).resolve().parents[1] / "cases"
STUDIES = {"convergence": "wave_convergence", "grid": "wave_grid", "compare": "wave_compare"}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/studies")
    args = ap.parse_args()
    code = 0
    for kind, case in STUDIES.items():
        print(f"== {kind}")
        code = max(code, cli(["study", kind, "--config", str(CASES / f"{case}.yaml"), "--out", str(Path(args.out) / kind)]))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
