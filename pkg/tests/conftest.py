from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
TABLE = ROOT / "data" / "properties.csv"
CASES = ROOT / "cases"

WATER_CRIT = dict(T_c=647.096, rho_c=322.0)
CO2_CRIT = dict(T_c=304.128, rho_c=467.6)

# label, T, p, r_eta, critical point, tabulated (B, Gamma0, Pr, gamma/Pr)
TABLE_ROWS = [
    ("L-H2O", 280.0, 1e5, 3.0, WATER_CRIT, (0.013, 0.023, 10.529, 0.095)),
    ("sL-H2O", 372.76, 1e5, 0.0, WATER_CRIT, (0.281, 0.426, 1.671, 0.635)),
    ("sV-H2O", 372.76, 1e5, 0.0, WATER_CRIT, (1.082, 0.311, 1.016, 1.316)),
    ("V-CO2", 305.0, 1e5, 0.4, CO2_CRIT, (1.015, 0.286, 0.769, 1.679)),
    ("SC-CO2", 305.0, 7.4e6, 6.0, CO2_CRIT, (41.746, 0.284, 5.794, 2.221)),
]


@pytest.fixture
def table_path():
    return TABLE


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LOG:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.LOG, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
