"""Cabin and evaporator thermal plant with A/C actuator power surrogates.

Four lumped temperature states: cabin air, interior mass (seats, panels),
shell, and evaporator wall.  The evaporator tracks its commanded setpoint
as a first-order lag; the cabin air exchanges heat with the vent stream,
the interior, and the shell; the shell couples the cabin to ambient; solar
load lands on the interior.

Actuator electrical draw is modeled by monotone surrogates: a bilinear
compressor law in blower flow and temperature lift, and a cubic fan law
for the blower.  A speed-dependent efficiency factor scales the effective
electrical cost of compressor work: pulling heat while the vehicle moves
fast is cheaper than while it idles.

All step functions accept floats or numpy arrays in any broadcastable
shape, so controller code can roll out many candidate command sequences
at once.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

# Actuator command boxes (hard limits, enforced by construction everywhere).
W_BL_MIN = 0.05   # kg/s
W_BL_MAX = 0.15   # kg/s
T_EVAP_SP_MIN = 3.0   # degC
T_EVAP_SP_MAX = 10.0  # degC

# Efficiency factor anchors: 1.0 at standstill, 1.3 at/above 25 m/s.
AC_EFF_SPEED_MAX = 25.0
AC_EFF_GAIN = 0.3


@dataclass
class ThermalState:
    """Lumped temperatures in degC.  Fields may be scalars or arrays."""

    t_cab: float
    t_int: float
    t_shell: float
    t_evap: float

    def as_array(self) -> np.ndarray:
        return np.stack(
            [
                np.asarray(self.t_cab, dtype=float),
                np.asarray(self.t_int, dtype=float),
                np.asarray(self.t_shell, dtype=float),
                np.asarray(self.t_evap, dtype=float),
            ]
        )

    @classmethod
    def uniform(cls, temp: float) -> "ThermalState":
        return cls(temp, temp, temp, temp)


@dataclass(frozen=True)
class AcCommand:
    """Blower flow (kg/s) and evaporator setpoint (degC)."""

    w_bl: float
    t_evap_sp: float

    def __post_init__(self):
        if np.any(np.asarray(self.w_bl) < W_BL_MIN) or np.any(np.asarray(self.w_bl) > W_BL_MAX):
            raise ValueError(f"blower flow outside [{W_BL_MIN}, {W_BL_MAX}] kg/s")
        if np.any(np.asarray(self.t_evap_sp) < T_EVAP_SP_MIN) or np.any(
            np.asarray(self.t_evap_sp) > T_EVAP_SP_MAX
        ):
            raise ValueError(f"evaporator setpoint outside [{T_EVAP_SP_MIN}, {T_EVAP_SP_MAX}] degC")


@dataclass(frozen=True)
class Ambient:
    t_amb: float          # degC
    solar_load: float = 0.0  # W absorbed by the interior


@dataclass(frozen=True)
class ThermalPlantParams:
    """Capacities (J/K), conductances (W/K), and surrogate power coefficients.

    Defaults are sized for a compact car in summer: an ~80 s pull-down from
    a 40 degC hot soak to the 26 degC comfort band at maximum cooling, and a
    steady compressor draw of a few hundred watts.
    """

    c_cab: float = 20e3
    c_int: float = 80e3
    c_shell: float = 30e3
    u_cab_int: float = 60.0
    u_cab_shell: float = 120.0
    u_shell_amb: float = 180.0
    tau_evap: float = 30.0
    c_p_air: float = 1005.0
    comp_c1: float = 120.0   # W*s/(kg*K)
    comp_c2: float = 0.01    # 1/K
    blower_b0: float = 20.0  # W
    blower_b1: float = 8.0e4  # W*(s/kg)^3

    def __post_init__(self):
        vals = (
            self.c_cab, self.c_int, self.c_shell, self.u_cab_int, self.u_cab_shell,
            self.u_shell_amb, self.tau_evap, self.c_p_air,
        )
        if min(vals) <= 0:
            raise ValueError("capacities, conductances, and time constants must be positive")


def thermal_step(
    state: ThermalState,
    cmd: AcCommand,
    amb: Ambient,
    params: ThermalPlantParams = ThermalPlantParams(),
    dt: float = 1.0,
) -> ThermalState:
    """Explicit-Euler step of the four-state plant over dt seconds."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    vent = cmd.w_bl * params.c_p_air * (state.t_evap - state.t_cab)
    cab_int = params.u_cab_int * (state.t_int - state.t_cab)
    cab_shell = params.u_cab_shell * (state.t_shell - state.t_cab)
    t_cab = state.t_cab + dt / params.c_cab * (vent + cab_int + cab_shell)
    t_int = state.t_int + dt / params.c_int * (
        params.u_cab_int * (state.t_cab - state.t_int) + amb.solar_load
    )
    t_shell = state.t_shell + dt / params.c_shell * (
        params.u_cab_shell * (state.t_cab - state.t_shell)
        + params.u_shell_amb * (amb.t_amb - state.t_shell)
    )
    t_evap = state.t_evap + dt / params.tau_evap * (cmd.t_evap_sp - state.t_evap)
    return ThermalState(t_cab, t_int, t_shell, t_evap)


def compressor_power(w_bl, t_amb, t_evap, params: ThermalPlantParams = ThermalPlantParams()):
    """Compressor draw in watts: bilinear in flow and temperature lift.

    Zero when the evaporator is no colder than ambient (no lift to sustain).
    """
    lift = np.maximum(np.asarray(t_amb, dtype=float) - np.asarray(t_evap, dtype=float), 0.0)
    p = params.comp_c1 * np.asarray(w_bl, dtype=float) * lift * (1.0 + params.comp_c2 * lift)
    return float(p) if p.ndim == 0 else p


def blower_power(w_bl, params: ThermalPlantParams = ThermalPlantParams()):
    """Blower draw in watts: cubic fan law plus a small electronics floor."""
    p = params.blower_b0 + params.blower_b1 * np.asarray(w_bl, dtype=float) ** 3
    return float(p) if p.ndim == 0 else p


def ac_efficiency(v):
    """Speed-dependent A/C efficiency factor, 1.0 at rest rising to 1.3 at 25 m/s."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ValueError("vehicle speed must be nonnegative")
    eta = 1.0 + AC_EFF_GAIN * np.minimum(v, AC_EFF_SPEED_MAX) / AC_EFF_SPEED_MAX
    return float(eta) if eta.ndim == 0 else eta


def ac_electrical_power(p_comp, p_bl, v):
    """Battery-side A/C draw: compressor work divided by the speed factor, plus blower."""
    return p_comp / ac_efficiency(v) + p_bl


def read_ambient_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read an ambient profile CSV with columns time, t_amb, solar_load."""
    times, t_amb, solar = [], [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            times.append(float(row["time"]))
            t_amb.append(float(row["t_amb"]))
            solar.append(float(row["solar_load"]))
    return np.asarray(times), np.asarray(t_amb), np.asarray(solar)


def write_ambient_csv(path, times, t_amb, solar) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "t_amb", "solar_load"])
        for row in zip(times, t_amb, solar):
            writer.writerow([repr(float(v)) for v in row])
