"""Power-balance vehicle model for a power-split hybrid.

The powertrain is reduced to three coupled quantities:

* traction power demanded at the wheels (longitudinal force balance),
* battery state of charge, stepped by a switching polynomial model whose
  branches depend on whether the A/C system is drawing power,
* engine fuel rate, read off an optimal-operating-line map.

Everything here is plain arithmetic on floats or numpy arrays, so the
same functions serve scalar closed-loop simulation and vectorized grid
sweeps in the power-split optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

GRAVITY = 9.81  # m/s^2

# Switching SOC-step coefficients identified on a 2017 Prius test vehicle.
# Order: five A/C-on terms (P_mg, P_mg^2, P_mg*P_ac, P_ac, P_ac^2), the
# A/C-on constant, two A/C-off terms (P_mg, P_mg^2), the A/C-off constant.
# Units assume power in watts, SOC in percent, and a 1 s step.
PRIUS_SOC_COEFFS = (
    -4.74e-5,
    -4.11e-10,
    6.17e-9,
    -3.8e-5,
    8.63e-9,
    -0.03,
    -4.46e-5,
    -4.84e-10,
    -0.01,
)


class OutOfMapDomain(ValueError):
    """Engine power outside the fuel map's grid while the engine is on."""


class EngineMode(IntEnum):
    OFF = 1
    ON = 2


@dataclass(frozen=True)
class VehicleParams:
    """Longitudinal-dynamics parameters.

    mass in kg, frontal_area in m^2, rho_air in kg/m^3; the rolling and
    drag coefficients are dimensionless.  eta_trac is a constant driveline
    efficiency applied between wheel and electric/mechanical sources.
    """

    mass: float = 1500.0
    c_r: float = 0.009
    c_d: float = 0.28
    frontal_area: float = 2.2
    rho_air: float = 1.2
    eta_trac: float = 0.9

    def __post_init__(self):
        if min(self.mass, self.c_r, self.c_d, self.frontal_area, self.rho_air) <= 0:
            raise ValueError("vehicle parameters must be positive")
        if not 0.0 < self.eta_trac <= 1.0:
            raise ValueError("eta_trac must lie in (0, 1]")


@dataclass(frozen=True)
class SocModel:
    """Switching battery SOC step model (percent units, 1 s sampling)."""

    xi: tuple = PRIUS_SOC_COEFFS
    soc_min: float = 30.0
    soc_max: float = 90.0
    dt: float = 1.0

    def __post_init__(self):
        if len(self.xi) != 9:
            raise ValueError("SocModel needs exactly nine coefficients")
        if self.soc_min >= self.soc_max:
            raise ValueError("soc_min must be below soc_max")
        if self.dt != 1.0:
            raise ValueError("the SOC model is identified at a 1 s step")


@dataclass(frozen=True)
class FuelMap:
    """Fuel rate along the engine's optimal operating line.

    p_eng is an ascending grid in watts; w_f the fuel rate in g/s at each
    grid point; omega the operating-line engine speed in rad/s.  w_f must
    be nondecreasing and strictly positive at the low end (idle penalty).
    """

    p_eng: np.ndarray
    w_f: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p_eng, dtype=float)
        w = np.asarray(self.w_f, dtype=float)
        o = np.asarray(self.omega, dtype=float)
        if not (len(p) == len(w) == len(o)) or len(p) < 2:
            raise ValueError("fuel map grids must share a length of at least 2")
        if np.any(np.diff(p) <= 0):
            raise ValueError("p_eng grid must be strictly increasing")
        if np.any(np.diff(w) < 0):
            raise ValueError("w_f must be nondecreasing in p_eng")
        if w[0] <= 0:
            raise ValueError("fuel rate at the bottom of the map must be positive")
        object.__setattr__(self, "p_eng", p)
        object.__setattr__(self, "w_f", w)
        object.__setattr__(self, "omega", o)

    @property
    def p_max(self) -> float:
        return float(self.p_eng[-1])

    @classmethod
    def willans(
        cls,
        idle_power_w: float = 350.0,
        inverse_efficiency: float = 1.0 / 0.36,
        lhv_j_per_g: float = 42500.0,
        p_max_w: float = 60e3,
        step_w: float = 1e3,
        omega_min_rpm: float = 1000.0,
        omega_max_rpm: float = 4000.0,
    ) -> "FuelMap":
        """Synthetic affine (Willans-line) map standing in for proprietary data."""
        p = np.arange(0.0, p_max_w + 0.5 * step_w, step_w)
        w_f = (idle_power_w + inverse_efficiency * p) / lhv_j_per_g
        omega = np.linspace(omega_min_rpm, omega_max_rpm, len(p)) * (2 * np.pi / 60.0)
        return cls(p_eng=p, w_f=w_f, omega=omega)

    @classmethod
    def from_dict(cls, d: dict) -> "FuelMap":
        return cls(
            p_eng=np.asarray(d["p_eng_w"], dtype=float),
            w_f=np.asarray(d["w_f_g_per_s"], dtype=float),
            omega=np.asarray(d["omega_rad_per_s"], dtype=float),
        )

    def to_dict(self) -> dict:
        return {
            "p_eng_w": self.p_eng.tolist(),
            "w_f_g_per_s": self.w_f.tolist(),
            "omega_rad_per_s": self.omega.tolist(),
        }


@dataclass
class EngineState:
    """Instantaneous engine operating point."""

    mode: EngineMode
    omega_eng: float = 0.0
    p_eng: float = 0.0
    w_f: float = 0.0

    def __post_init__(self):
        if self.mode == EngineMode.OFF:
            if self.p_eng != 0.0 or self.omega_eng != 0.0 or self.w_f != 0.0:
                raise ValueError("engine-off state must carry zero power, speed, fuel")
        elif self.p_eng <= 0.0:
            raise ValueError("engine-on state needs positive power")


@dataclass(frozen=True)
class EnergyConfig:
    """Constants for converting fuel mass and SOC change to joules."""

    lhv_j_per_g: float = 42500.0
    battery_capacity_j: float = 4.68e6
    charge_equivalence: float = 2.4


@dataclass
class EnergyReport:
    """Fuel, net SOC change, and the combined equivalent energy in joules."""

    fuel_grams: float
    delta_soc: float
    equivalent_energy: float
    breakdown: dict = field(default_factory=dict)


def traction_power(v, a, params: VehicleParams):
    """Demanded traction power in watts for speed v (m/s) and accel a (m/s^2).

    Wheel power is speed times the sum of rolling, aerodynamic, and inertial
    forces.  Driveline losses divide positive (propelling) wheel power and
    multiply negative (regenerating) wheel power.
    """
    v = np.asarray(v, dtype=float)
    a = np.asarray(a, dtype=float)
    f_roll = params.c_r * params.mass * GRAVITY
    f_aero = 0.5 * params.rho_air * params.frontal_area * params.c_d * v**2
    p_wheel = v * (f_roll + f_aero + params.mass * a)
    p = np.where(p_wheel >= 0, p_wheel / params.eta_trac, p_wheel * params.eta_trac)
    return float(p) if p.ndim == 0 else p


def soc_delta(p_mg, p_ac, ac_on, model: SocModel):
    """One-step SOC increment in percent, before any clamping."""
    x = model.xi
    p_mg = np.asarray(p_mg, dtype=float)
    p_ac = np.asarray(p_ac, dtype=float)
    on = x[0] * p_mg + x[1] * p_mg**2 + x[2] * p_mg * p_ac + x[3] * p_ac + x[4] * p_ac**2 + x[5]
    off = x[6] * p_mg + x[7] * p_mg**2 + x[8]
    d = np.where(ac_on, on, off)
    return float(d) if d.ndim == 0 else d


def soc_step(soc, p_mg, p_ac, ac_on, model: SocModel):
    """Advance SOC one second; returns (new_soc, saturated).

    The raw polynomial step is clamped into [soc_min, soc_max]; the flag
    reports whether clamping acted.
    """
    raw = np.asarray(soc, dtype=float) + soc_delta(p_mg, p_ac, ac_on, model)
    clamped = np.clip(raw, model.soc_min, model.soc_max)
    saturated = raw != clamped
    if clamped.ndim == 0:
        return float(clamped), bool(saturated)
    return clamped, saturated


def mg_power(p_trac, p_eng):
    """Electric-machine power balance: the motors cover what the engine does not."""
    return p_trac - p_eng


def fuel_rate(mode: EngineMode, p_eng, fuel_map: FuelMap):
    """Fuel rate in g/s; zero when off, interpolated on the map when on."""
    if mode == EngineMode.OFF:
        return 0.0
    p = np.asarray(p_eng, dtype=float)
    if np.any(p < fuel_map.p_eng[0]) or np.any(p > fuel_map.p_max):
        raise OutOfMapDomain(f"engine power {p_eng} outside map [{fuel_map.p_eng[0]}, {fuel_map.p_max}] W")
    w = np.interp(p, fuel_map.p_eng, fuel_map.w_f)
    return float(w) if w.ndim == 0 else w


def equivalent_energy(fuel_grams, delta_soc, cfg: EnergyConfig = EnergyConfig()):
    """Fuel energy plus a charge-equivalence correction for the net SOC change.

    delta_soc is soc_end - soc_start in percentage points; a net SOC drop
    adds positive equivalent energy, a net gain subtracts.
    """
    soc_term = (-delta_soc) / 100.0 * cfg.battery_capacity_j * cfg.charge_equivalence
    return fuel_grams * cfg.lhv_j_per_g + soc_term
