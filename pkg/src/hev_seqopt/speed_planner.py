"""Eco-driving speed trajectory planning toward a signalized intersection.

Given a green window (the interval in which the intersection can be
crossed), the planner picks one of four strategies: hold the current
speed, speed up, slow down, or come to a full stop and relaunch.  The
moving strategies share a three-segment trigonometric speed profile: a
cosine ramp away from the initial speed, a quarter-sine blend, and a
constant cruise to the stop bar.

The first segment's sharpness is set by the acceleration and jerk limits;
the blend rate is then the single remaining degree of freedom and is
solved in closed form so the profile integrates exactly to the planning
distance.  The blend is therefore not jerk-limited; it is typically short
and mild because the cruise speed sits close to the required average.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

DEFAULT_DT = 0.1       # s, trajectory sample period
MIN_CRUISE_FRACTION = 0.7   # of the speed limit; slower cruising disrupts traffic
STOP_SETBACK = 2.0     # m short of the stop bar for a full stop


class OutOfDomain(ValueError):
    """Profile evaluated outside its time domain [0, t_arr]."""


class InfeasibleProfile(ValueError):
    """No profile satisfies the kinematic limits over the given horizon."""


class StrategyKind(Enum):
    SLOW_DOWN = "slow_down"
    SPEED_UP = "speed_up"
    CRUISE = "cruise"
    STOP = "stop"


@dataclass(frozen=True)
class KinematicLimits:
    a_max: float = 2.5      # m/s^2, must be > 0
    a_min: float = -3.0     # m/s^2, must be < 0
    jerk_max: float = 2.0   # m/s^3, must be > 0

    def __post_init__(self):
        if self.a_max <= 0 or self.a_min >= 0 or self.jerk_max <= 0:
            raise ValueError("need a_max > 0, a_min < 0, jerk_max > 0")


@dataclass(frozen=True)
class ProfileParams:
    """Trigonometric profile parameters.

    v0 initial speed (m/s), d_stop distance to the stop bar (m), t_arr
    arrival time at the bar measured from profile start (s), h saturation
    headway (s).  m and n are the segment rates (1/s); t_p and t_q the
    segment boundaries.  The derived v_p = d_stop/t_arr is the required
    average speed and v_r = v_p - v0 the ramp amplitude.
    """

    v0: float
    d_stop: float
    t_arr: float
    h: float = 2.0
    m: float = 1.0
    n: float = 1.0
    t_p: float = 0.0
    t_q: float = 0.0

    def __post_init__(self):
        if self.v0 < 0 or self.d_stop <= 0 or self.t_arr <= 0:
            raise ValueError("need v0 >= 0, d_stop > 0, t_arr > 0")
        if not (0 <= self.t_p <= self.t_q <= self.t_arr):
            raise ValueError("segment boundaries must satisfy 0 <= t_p <= t_q <= t_arr")
        if self.m <= 0 or self.n <= 0:
            raise ValueError("segment rates must be positive")

    @property
    def v_p(self) -> float:
        return self.d_stop / self.t_arr

    @property
    def v_r(self) -> float:
        return self.v_p - self.v0


@dataclass(frozen=True)
class GreenWindowLike:
    """Minimal protocol for a green window: absolute earliest/latest passage times."""

    earliest: float
    latest: float


@dataclass
class Trajectory:
    """Sampled speed plan.

    time is absolute seconds; samples are uniform at dt except that the
    final sample may land off-grid so the plan ends exactly at arrival.
    position is the running trapezoidal integral of speed, accel the
    finite difference of speed.
    """

    dt: float
    time: np.ndarray
    speed: np.ndarray
    position: np.ndarray
    accel: np.ndarray

    @classmethod
    def from_speed(cls, time, speed, dt: float = DEFAULT_DT) -> "Trajectory":
        time = np.asarray(time, dtype=float)
        speed = np.asarray(speed, dtype=float)
        if time.shape != speed.shape or time.ndim != 1 or len(time) < 2:
            raise ValueError("time and speed must be matching 1-D arrays of length >= 2")
        steps = np.diff(time)
        if np.any(steps <= 0):
            raise ValueError("time samples must be strictly increasing")
        increments = 0.5 * (speed[:-1] + speed[1:]) * steps
        position = np.concatenate([[0.0], np.cumsum(increments)])
        accel = np.gradient(speed, time)
        return cls(dt=dt, time=time, speed=speed, position=position, accel=accel)

    @property
    def final_position(self) -> float:
        return float(self.position[-1])

    @property
    def final_time(self) -> float:
        return float(self.time[-1])

    def speed_at(self, t) -> np.ndarray:
        return np.interp(t, self.time, self.speed)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "speed", "position", "accel"])
            for row in zip(self.time, self.speed, self.position, self.accel):
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def read_csv(cls, path, dt: float = DEFAULT_DT) -> "Trajectory":
        cols = {"time": [], "speed": [], "position": [], "accel": []}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                for key in cols:
                    cols[key].append(float(row[key]))
        return cls(
            dt=dt,
            time=np.asarray(cols["time"]),
            speed=np.asarray(cols["speed"]),
            position=np.asarray(cols["position"]),
            accel=np.asarray(cols["accel"]),
        )


def trig_speed(t, p: ProfileParams):
    """Evaluate the three-segment trigonometric profile at time(s) t."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > p.t_arr):
        raise OutOfDomain(f"t outside [0, {p.t_arr}]")
    v_p, v_r = p.v_p, p.v_r
    # v_p - v_r*cos(mt) rewritten so the value at t = 0 is bit-exactly v0.
    ramp = p.v0 + v_r * (1.0 - np.cos(p.m * t))
    blend = v_p - v_r * (p.m / p.n) * np.cos(p.n * (t + math.pi / (2 * p.n) - p.t_p))
    cruise = v_p + v_r * (p.m / p.n)
    v = np.where(t < p.t_p, ramp, np.where(t < p.t_q, blend, cruise))
    return float(v) if v.ndim == 0 else v


def calibrate_mn(
    p: ProfileParams,
    a_max: float = KinematicLimits().a_max,
    a_min: float = KinematicLimits().a_min,
    jerk_max: float = KinematicLimits().jerk_max,
) -> tuple[float, float, float, float]:
    """Pick (m, n, t_p, t_q) for the profile under acceleration and jerk limits.

    The ramp rate m is pushed as high as the first segment's peak
    acceleration |v_r*m| and peak jerk |v_r*m^2| allow, so the cruise
    segment starts as early as possible.  t_p = pi/(2m) ends the ramp at
    its acceleration peak.  The blend rate n then solves the quadratic

        (n/m)^2 - (t_arr - t_p)*n + (pi/2 - 1) = 0

    whose larger root makes the profile's integral equal d_stop exactly;
    t_q = t_p + pi/(2n) hands over to the constant cruise at
    v_p + v_r*(m/n).
    """
    if a_max <= 0 or a_min >= 0 or jerk_max <= 0:
        raise ValueError("need a_max > 0, a_min < 0, jerk_max > 0")
    v_r = p.v_r
    if v_r == 0.0:
        return 1.0, 1.0, 0.0, 0.0
    a_bound = a_max if v_r > 0 else -a_min
    m = min(a_bound / abs(v_r), math.sqrt(jerk_max / abs(v_r)))
    t_p = math.pi / (2 * m)
    horizon = p.t_arr - t_p
    if horizon <= 0 or m * horizon <= math.pi / 2:
        raise InfeasibleProfile(
            f"ramp at m={m:.4g} leaves no room for a cruise segment within t_arr={p.t_arr:.4g}"
        )
    disc = horizon**2 - 4 * (math.pi / 2 - 1) / m**2
    n = 0.5 * m**2 * (horizon + math.sqrt(disc))
    t_q = t_p + math.pi / (2 * n)
    return m, n, t_p, t_q


def calibrated_profile(p: ProfileParams, limits: KinematicLimits = KinematicLimits()) -> ProfileParams:
    """Return a copy of p with calibrated (m, n, t_p, t_q)."""
    m, n, t_p, t_q = calibrate_mn(p, limits.a_max, limits.a_min, limits.jerk_max)
    return replace(p, m=m, n=n, t_p=t_p, t_q=t_q)


def select_strategy(
    window: GreenWindowLike,
    v0: float,
    d_stop: float,
    speed_limit: float,
    t_now: float,
) -> StrategyKind:
    """Pick the profile type that can hit the green window.

    A strategy is viable only if some admissible constant target speed --
    between 70% of the speed limit and the limit itself -- lands the
    arrival inside [earliest, latest].  A vehicle that cannot do so
    stops.
    """
    if d_stop <= 0 or speed_limit <= 0:
        raise ValueError("need d_stop > 0 and speed_limit > 0")
    v_floor = MIN_CRUISE_FRACTION * speed_limit

    def arrival(v):
        return t_now + d_stop / v

    if v0 > 0 and v0 >= v_floor and window.earliest <= arrival(v0) <= window.latest:
        return StrategyKind.CRUISE

    # Speed up: some v in (v0, speed_limit], at or above the floor, hits the window.
    lo = max(v0, v_floor)
    if speed_limit > lo:
        earliest_reach = arrival(speed_limit)
        latest_reach = arrival(lo) if lo > 0 else math.inf
        if earliest_reach <= window.latest and latest_reach > window.earliest:
            if not (v0 > 0 and window.earliest <= arrival(v0) <= window.latest):
                return StrategyKind.SPEED_UP

    # Slow down: some v in [v_floor, v0) hits the window.
    if v0 > v_floor:
        earliest_reach = arrival(v0)
        latest_reach = arrival(v_floor)
        if earliest_reach < window.latest and latest_reach >= window.earliest:
            return StrategyKind.SLOW_DOWN

    return StrategyKind.STOP


def _snap_to_grid(t_rel: float, dt: float) -> float:
    return max(round(t_rel / dt), 1) * dt


def _sample_profile(p: ProfileParams, t_now: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    n_steps = int(round(p.t_arr / dt))
    rel = np.arange(n_steps + 1) * dt
    if rel[-1] < p.t_arr - 1e-9:
        rel = np.append(rel, p.t_arr)
    else:
        rel[-1] = p.t_arr
    return t_now + rel, trig_speed(rel, p)


def _half_cosine_ramp(v_from: float, v_to: float, duration: float, dt: float):
    """Times and speeds of a smooth ramp between two speeds over duration."""
    n_steps = max(int(round(duration / dt)), 1)
    rel = np.arange(n_steps + 1) * dt
    rel[-1] = min(rel[-1], duration)
    if rel[-1] < duration - 1e-9:
        rel = np.append(rel, duration)
    shape = 0.5 * (1.0 - np.cos(math.pi * rel / duration))
    return rel, v_from + (v_to - v_from) * shape


def plan_trajectory(
    window: GreenWindowLike,
    v0: float,
    d_stop: float,
    speed_limit: float,
    h: float,
    t_now: float,
    limits: KinematicLimits = KinematicLimits(),
    dt: float = DEFAULT_DT,
) -> tuple[StrategyKind, Trajectory]:
    """Plan the approach to the stop bar; returns the chosen strategy and plan.

    Moving strategies target arrival one saturation headway after the
    window opens (clamped into the window and to what the speed band can
    reach); the stop strategy brakes to a standstill just short of the
    bar, waits for the window, and relaunches to the minimum cruise speed.
    The trajectory's final position equals d_stop.
    """
    strategy = select_strategy(window, v0, d_stop, speed_limit, t_now)
    v_floor = MIN_CRUISE_FRACTION * speed_limit

    if strategy == StrategyKind.CRUISE:
        t_arr = d_stop / v0
        n_steps = int(round(t_arr / dt))
        rel = np.arange(n_steps + 1) * dt
        if rel[-1] < t_arr - 1e-9:
            rel = np.append(rel, t_arr)
        else:
            rel[-1] = t_arr
        speeds = np.full(len(rel), v0)
        return strategy, Trajectory.from_speed(t_now + rel, speeds, dt)

    if strategy in (StrategyKind.SPEED_UP, StrategyKind.SLOW_DOWN):
        if strategy == StrategyKind.SPEED_UP:
            reach_lo = t_now + d_stop / speed_limit
            reach_hi = t_now + d_stop / max(v0, v_floor) if max(v0, v_floor) > 0 else math.inf
        else:
            reach_lo = t_now + d_stop / v0
            reach_hi = t_now + d_stop / v_floor
        lo = max(window.earliest, reach_lo)
        hi = min(window.latest, reach_hi)
        target = min(max(window.earliest + h, lo), hi)
        t_arr_rel = _snap_to_grid(target - t_now, dt)
        t_arr_abs = t_now + t_arr_rel
        if t_arr_abs > hi:
            t_arr_rel -= dt
        elif t_arr_abs < lo:
            t_arr_rel += dt
        p = calibrated_profile(
            ProfileParams(v0=v0, d_stop=d_stop, t_arr=t_arr_rel, h=h), limits
        )
        times, speeds = _sample_profile(p, t_now, dt)
        return strategy, Trajectory.from_speed(times, speeds, dt)

    # Full stop: brake, idle until the window opens, launch to the floor speed.
    times = [t_now]
    speeds = [v0]
    brake_dist = max(d_stop - STOP_SETBACK, 0.0)
    if v0 > 0:
        if brake_dist <= 0:
            raise InfeasibleProfile("no distance left to brake in")
        t_brake = 2.0 * brake_dist / v0
        if v0 * math.pi / (2 * t_brake) > -limits.a_min + 1e-12:
            raise InfeasibleProfile(
                f"stopping within {brake_dist:.1f} m from {v0:.1f} m/s exceeds the braking limit"
            )
        rel, ramp = _half_cosine_ramp(v0, 0.0, t_brake, dt)
        times.extend(t_now + rel[1:])
        speeds.extend(ramp[1:])
    t_stopped = times[-1]
    launch_at = max(window.earliest, t_stopped)
    if launch_at > t_stopped + 1e-9:
        idle = np.arange(t_stopped + dt, launch_at, dt)
        times.extend(idle)
        speeds.extend(np.zeros(len(idle)))
        if times[-1] < launch_at - 1e-9:
            times.append(launch_at)
            speeds.append(0.0)
    launch_start = times[-1]
    v_t = v_floor
    t_launch = max(
        math.pi * v_t / (2 * limits.a_max),
        math.pi * math.sqrt(v_t / (2 * limits.jerk_max)),
    )
    rel, ramp = _half_cosine_ramp(0.0, v_t, t_launch, dt)
    launch_travel = float(np.trapezoid(ramp, rel))
    remaining = d_stop - brake_dist
    if launch_travel < remaining:
        extra = remaining - launch_travel
        n_tail = int(math.ceil(extra / (v_t * dt))) + 1
        tail = rel[-1] + dt * np.arange(1, n_tail + 1)
        rel = np.concatenate([rel, tail])
        ramp = np.concatenate([ramp, np.full(n_tail, v_t)])
    times.extend(launch_start + rel[1:])
    speeds.extend(ramp[1:])
    traj = Trajectory.from_speed(np.asarray(times), np.asarray(speeds), dt)
    # Truncate where the running integral reaches the bar; solve the final
    # partial step exactly so the trapezoidal position ends at d_stop.
    idx = int(np.searchsorted(traj.position, d_stop))
    if idx >= len(traj.position):
        raise InfeasibleProfile("launch segment never reaches the stop bar")
    if idx == 0:
        raise InfeasibleProfile("stop-bar distance shorter than one sample step")
    t_lo, t_hi = traj.time[idx - 1], traj.time[idx]
    v_lo, v_hi = traj.speed[idx - 1], traj.speed[idx]
    rem = d_stop - traj.position[idx - 1]
    slope = (v_hi - v_lo) / (t_hi - t_lo)
    if abs(slope) < 1e-12:
        tau = rem / v_lo
    else:
        tau = (-v_lo + math.sqrt(v_lo**2 + 2 * slope * rem)) / slope
    t_cross = t_lo + tau
    v_cross = v_lo + slope * tau
    final_t = np.concatenate([traj.time[:idx], [t_cross]])
    final_v = np.concatenate([traj.speed[:idx], [v_cross]])
    return strategy, Trajectory.from_speed(final_t, final_v, dt)
