"""Material data, dimensionless groups and the linearized equation of state.

The simulation itself only ever sees :class:`DimensionlessParams`; the
dimensional :class:`MaterialState` and :func:`derive_dimensionless` are a
calculator front-end for tabulated fluid properties.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

# CO2 critical point, used as default reference state for the calculator.
CO2_T_CRIT = 304.128  # K
CO2_RHO_CRIT = 467.600  # kg/m^3
WATER_T_CRIT = 647.096  # K
WATER_RHO_CRIT = 322.0  # kg/m^3

MATERIAL_CSV_HEADER = ("T", "p", "rho", "cp", "as", "betap", "gamma", "nu", "ath")


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


@dataclass(frozen=True)
class MaterialState:
    """One dimensional thermodynamic state (SI units)."""

    T_bar: float
    p_bar: float
    rho_bar: float
    c_p: float
    a_s: float
    beta_p: float
    gamma: float
    nu: float
    a_th: float
    r_eta: float
    T_c: float = CO2_T_CRIT
    rho_c: float = CO2_RHO_CRIT

    def validate(self, allow_inviscid: bool = False) -> None:
        for name in ("T_bar", "rho_bar", "c_p", "a_s", "a_th", "T_c", "rho_c"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be positive, got {value!r}")
        if not math.isfinite(self.gamma) or self.gamma < 1:
            raise ValidationError(f"gamma must be >= 1, got {self.gamma!r}")
        if not math.isfinite(self.r_eta) or self.r_eta < 0:
            raise ValidationError(f"r_eta must be >= 0, got {self.r_eta!r}")
        if not math.isfinite(self.beta_p):
            raise ValidationError(f"beta_p must be finite, got {self.beta_p!r}")
        if not math.isfinite(self.nu) or self.nu < 0:
            raise ValidationError(f"nu must be >= 0, got {self.nu!r}")
        if self.nu == 0 and not allow_inviscid:
            raise ValidationError("nu must be positive (pass allow_inviscid=True for the inviscid limit)")


@dataclass(frozen=True)
class DimensionlessParams:
    """Dimensionless groups of the 1-D linear thermoacoustic system.

    ``Re_a = inf`` switches viscous stress off (``Pr`` is then 0) while heat
    conduction stays governed by ``Pe_a``. ``Pe_a = inf`` additionally
    switches conduction off and is only allowed together with ``Re_a = inf``.
    """

    gamma: float
    B: float
    Ec_a: float
    Pr: float
    Re_a: float
    Pe_a: float
    r_eta: float
    T0_hat: float
    rho0_hat: float
    p0_hat: float = 0.0
    Gamma0: float | None = None  # informational; only set by the calculator

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("Re_a", "Pe_a", "Gamma0"):
                continue
            if not math.isfinite(value):
                raise ValidationError(f"{f.name} must be finite, got {value!r}")
        if self.gamma < 1:
            raise ValidationError(f"gamma must be >= 1, got {self.gamma!r}")
        for name in ("T0_hat", "rho0_hat", "Pe_a"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)!r}")
        if math.isnan(self.Pe_a) or (math.isinf(self.Pe_a) and not math.isinf(self.Re_a)):
            raise ValidationError(f"Pe_a must be finite unless Re_a is infinite, got {self.Pe_a!r}")
        if not self.Re_a > 0:
            raise ValidationError(f"Re_a must be positive (or inf), got {self.Re_a!r}")
        if self.r_eta < 0:
            raise ValidationError(f"r_eta must be >= 0, got {self.r_eta!r}")
        if math.isinf(self.Re_a):
            if self.Pr != 0:
                raise ValidationError("Pr must be 0 when Re_a is infinite")
        else:
            if self.Pr <= 0:
                raise ValidationError(f"Pr must be positive, got {self.Pr!r}")
            if not math.isclose(self.Pr * self.Re_a, self.Pe_a, rel_tol=1e-12):
                raise ValidationError(
                    f"Pe_a={self.Pe_a!r} inconsistent with Pr*Re_a={self.Pr * self.Re_a!r}"
                )

    @classmethod
    def from_groups(
        cls,
        *,
        gamma: float,
        B: float,
        Ec_a: float,
        Pe_a: float,
        r_eta: float,
        T0_hat: float,
        rho0_hat: float,
        Re_a: float | None = None,
        Pr: float | None = None,
        p0_hat: float = 0.0,
        Gamma0: float | None = None,
    ) -> "DimensionlessParams":
        """Build from the Peclet number plus either ``Re_a`` or ``Pr``.

        Leaving both out gives the inviscid limit ``Re_a = inf``.
        """
        if Re_a is not None and Pr is not None:
            raise ValidationError("give Re_a or Pr, not both")
        if Pr is not None:
            Re_a = Pe_a / Pr
        elif Re_a is None:
            Re_a = math.inf
        Pr = 0.0 if math.isinf(Re_a) else Pe_a / Re_a
        return cls(
            gamma=gamma, B=B, Ec_a=Ec_a, Pr=Pr, Re_a=Re_a, Pe_a=Pe_a, r_eta=r_eta,
            T0_hat=T0_hat, rho0_hat=rho0_hat, p0_hat=p0_hat, Gamma0=Gamma0,
        )

    @property
    def inv_Re(self) -> float:
        return 0.0 if math.isinf(self.Re_a) else 1.0 / self.Re_a

    @property
    def conduction_coeff(self) -> float:
        """Factor k in q = -k dT/dx."""
        return self.gamma * self.rho0_hat / self.Pe_a

    @property
    def viscous_coeff(self) -> float:
        """Factor m in Pi = -m dv/dx."""
        return self.rho0_hat * self.inv_Re * (self.r_eta + 4.0 / 3.0)

    def as_dict(self) -> dict:
        return asdict(self)


def derive_dimensionless(mat: MaterialState, X: float, allow_inviscid: bool = False) -> DimensionlessParams:
    """Dimensionless groups for a pipe of length ``X`` [m] filled with ``mat``."""
    mat.validate(allow_inviscid=allow_inviscid)
    if not (math.isfinite(X) and X > 0):
        raise ValidationError(f"X must be positive, got {X!r}")
    Pe_a = mat.a_s * X / mat.a_th
    if mat.nu == 0:
        Re_a, Pr = math.inf, 0.0
    else:
        Re_a = mat.a_s * X / mat.nu
        Pr = mat.nu / mat.a_th
    return DimensionlessParams(
        gamma=mat.gamma,
        B=mat.beta_p * mat.T_bar,
        Ec_a=mat.a_s**2 / (mat.c_p * mat.T_c),
        Pr=Pr,
        Re_a=Re_a,
        Pe_a=Pe_a,
        r_eta=mat.r_eta,
        T0_hat=mat.T_bar / mat.T_c,
        rho0_hat=mat.rho_bar / mat.rho_c,
        Gamma0=mat.beta_p * mat.a_s**2 / mat.c_p,
    )


def pressure_field(T_hat, rho_hat, p: DimensionlessParams) -> np.ndarray:
    """Linearized equation of state evaluated at every half-node."""
    T_hat = np.asarray(T_hat, dtype=float)
    rho_hat = np.asarray(rho_hat, dtype=float)
    if T_hat.shape != rho_hat.shape:
        raise ValidationError(f"shape mismatch: T {T_hat.shape} vs rho {rho_hat.shape}")
    thermal = p.rho0_hat * p.B / (p.gamma * p.T0_hat)
    return p.p0_hat + thermal * (T_hat - p.T0_hat) + (rho_hat - p.rho0_hat) / p.gamma


def load_material_row(
    path: str | Path,
    T: float,
    p: float,
    *,
    r_eta: float = 0.0,
    T_c: float = CO2_T_CRIT,
    rho_c: float = CO2_RHO_CRIT,
    material: str | None = None,
) -> MaterialState:
    """Select the row with exactly matching ``(T, p)`` from a property CSV.

    An optional leading ``material`` column disambiguates coexisting phases
    that share a state point (saturated liquid and vapour).
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = tuple(h.strip() for h in (reader.fieldnames or ()))
        has_label = header[:1] == ("material",)
        if header[int(has_label):] != MATERIAL_CSV_HEADER:
            raise ValidationError(f"unexpected header {header}, expected {MATERIAL_CSV_HEADER}")
        if material is not None and not has_label:
            raise ValidationError("material selector given but the file has no material column")
        matches = []
        for row in reader:
            row = {k.strip(): v.strip() for k, v in row.items()}
            label = row.pop("material", None)
            try:
                values = {k: float(v) for k, v in row.items()}
            except ValueError as exc:
                raise ValidationError(f"non-numeric entry in {path}: {exc}") from None
            if values["T"] == T and values["p"] == p and (material is None or label == material):
                matches.append((label, values))
    if not matches:
        raise ValidationError(f"no row with T={T!r}, p={p!r}" + (f", material={material!r}" if material else "") + f" in {path}")
    if len(matches) > 1:
        raise ValidationError(f"{len(matches)} rows match T={T!r}, p={p!r}; select one with material=")
    _, row = matches[0]
    return MaterialState(
        T_bar=row["T"], p_bar=row["p"], rho_bar=row["rho"], c_p=row["cp"],
        a_s=row["as"], beta_p=row["betap"], gamma=row["gamma"], nu=row["nu"],
        a_th=row["ath"], r_eta=r_eta, T_c=T_c, rho_c=rho_c,
    )


# Groups used by the experiments, taken as given rather than recomputed from
# rounded property tables. The SC Eckert number is kept at full precision:
# rounded to 0.007 it makes the dimensionless sound speed 1.011 instead of 1,
# and Co = 1 is then beyond the stability limit.
SC_CO2_EC = 184.164**2 / (16328.205 * CO2_T_CRIT)
SC_CO2 = dict(
    gamma=12.868, B=41.744, Ec_a=SC_CO2_EC, r_eta=6.0,
    T0_hat=305.0 / CO2_T_CRIT, rho0_hat=321.083 / CO2_RHO_CRIT,
)
SC_CO2_PR = 5.805
IDEAL_GAS_CO2 = dict(
    gamma=1.291, B=1.015, Ec_a=0.283, r_eta=0.4,
    T0_hat=305.0 / CO2_T_CRIT, rho0_hat=1.744 / CO2_RHO_CRIT,
)


def sound_speed(p: DimensionlessParams) -> float:
    """Dimensionless isentropic sound speed implied by the groups (1 when consistent)."""
    return math.sqrt(1.0 / p.gamma + p.B**2 * p.Ec_a / (p.gamma * p.T0_hat))


def wave_test_params(Pe_a: float = 1e5, viscous: bool = False) -> DimensionlessParams:
    """SC-CO2 groups for the damped-wave test (inviscid unless ``viscous``)."""
    if viscous:
        return DimensionlessParams.from_groups(Pe_a=Pe_a, Pr=SC_CO2_PR, **SC_CO2)
    return DimensionlessParams.from_groups(Pe_a=Pe_a, **SC_CO2)


def sc_piston_params() -> DimensionlessParams:
    return DimensionlessParams.from_groups(Pe_a=1e7, Re_a=1722695.711, **SC_CO2)


def ideal_gas_piston_params() -> DimensionlessParams:
    return DimensionlessParams.from_groups(Pe_a=16134.536, Re_a=21185.723, **IDEAL_GAS_CO2)
