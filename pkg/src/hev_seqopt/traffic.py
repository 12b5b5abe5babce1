"""Signalized-intersection queue prediction from connected-vehicle messages.

Every vehicle near the intersection broadcasts its position and speed.
From the latest message per vehicle, the predictor decides who will join
the stopping queue (a vehicle stops when its projected arrival falls in
red or behind a still-standing queue), places each stopper one jam
spacing behind the previous one, and schedules the launch cascade after
the green onset with a per-position driver reaction delay.  Stop and
launch events then yield the four critical instants of the queue profile:

* t1 - the queue stops growing,
* t2 - the tail of the queue starts to move,
* t3 - the tail crosses the stop bar, opening the green window.

Wave speeds are fitted through the event points (queuing waves through
stop events, the discharge wave through launch events); where fewer than
two events exist they fall back to kinematic-wave interface speeds on a
triangular flow-density diagram.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

SAMPLE_PERIOD = 0.1  # s, matches the drive-data collection rate


class DegenerateShockwave(ValueError):
    """Interface speed is undefined between states of equal density."""


@dataclass(frozen=True)
class SignalTiming:
    """Fixed-time signal: one green interval per cycle, red otherwise."""

    cycle_length: float
    green_start: float
    green_duration: float

    def __post_init__(self):
        if not 0 <= self.green_start < self.cycle_length:
            raise ValueError("green_start must lie within the cycle")
        if not 0 < self.green_duration <= self.cycle_length:
            raise ValueError("green_duration must be positive and fit the cycle")
        if self.green_start + self.green_duration > self.cycle_length:
            raise ValueError("green phase may not wrap across the cycle boundary")

    def is_green(self, t: float) -> bool:
        c = t % self.cycle_length
        return self.green_start <= c < self.green_start + self.green_duration

    def next_green_start(self, t: float) -> float:
        """Onset of the green phase covering t, else of the next one."""
        return self.current_or_next_green(t)[0]

    def current_or_next_green(self, t: float) -> tuple[float, float]:
        """The (start, end) of the green phase containing t, else the next one."""
        cycle_index = math.floor(t / self.cycle_length)
        for k in (cycle_index, cycle_index + 1):
            start = k * self.cycle_length + self.green_start
            end = start + self.green_duration
            if end > t:
                return start, end
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class Intersection:
    """Stop bar plus the triangular fundamental diagram of its approach."""

    id: int
    stop_bar_position: float    # m along the corridor
    signal: SignalTiming
    saturation_flow: float = 0.5   # veh/s
    jam_density: float = 0.15      # veh/m
    free_flow_speed: float = 15.0  # m/s

    def __post_init__(self):
        if self.stop_bar_position < 0:
            raise ValueError("stop bar position must be nonnegative")
        if min(self.saturation_flow, self.jam_density, self.free_flow_speed) <= 0:
            raise ValueError("fundamental-diagram parameters must be positive")
        if self.critical_density >= self.jam_density:
            raise ValueError("critical density must fall below jam density")

    @property
    def critical_density(self) -> float:
        return self.saturation_flow / self.free_flow_speed

    @property
    def jam_spacing(self) -> float:
        return 1.0 / self.jam_density


@dataclass(frozen=True)
class BsmRecord:
    """One basic safety message: where a vehicle was and how fast it moved."""

    vehicle_id: int
    time: float
    position: float
    speed: float

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("BSM speed must be nonnegative")


@dataclass(frozen=True)
class QueueForecast:
    t0: float
    t1: float
    t2: float
    t3: float
    q_max: float
    w0: float
    w1: float
    w2: float
    w3: float

    def __post_init__(self):
        if not (self.t0 <= self.t1 <= self.t2 <= self.t3):
            raise ValueError("queue forecast instants must be ordered t0 <= t1 <= t2 <= t3")
        if self.q_max < 0:
            raise ValueError("queue length must be nonnegative")


@dataclass(frozen=True)
class GreenWindow:
    earliest: float
    latest: float

    def __post_init__(self):
        if self.earliest > self.latest:
            raise ValueError("green window must satisfy earliest <= latest")


@dataclass(frozen=True)
class QueueKinematics:
    """Stop/launch kinematics applied to each queued vehicle."""

    decel: float = 2.5            # m/s^2 constant braking
    accel: float = 2.0            # m/s^2 constant launch
    launch_reaction: float = 1.0  # s of driver delay per queue position


@dataclass
class VehicleEvents:
    """Resolved stop/launch schedule of one approaching vehicle."""

    vehicle_id: int
    stops: bool
    record: BsmRecord
    slot: int = -1
    stop_pos: float = math.nan
    brake_start: float = math.nan
    stop_time: float = math.nan
    launch_time: float = math.nan
    cross_time: float = math.nan


def shockwave_speed(flow_a: float, density_a: float, flow_b: float, density_b: float) -> float:
    """Interface speed between two traffic states: flow jump over density jump."""
    if density_a == density_b:
        raise DegenerateShockwave("equal densities leave the interface speed undefined")
    return (flow_b - flow_a) / (density_b - density_a)


def _time_to_cover(distance: float, accel: float, v_cap: float) -> float:
    """Time to cover distance from standstill at constant accel, capped at v_cap."""
    if distance <= 0:
        return 0.0
    d_ramp = v_cap**2 / (2 * accel)
    if distance <= d_ramp:
        return math.sqrt(2 * distance / accel)
    return v_cap / accel + (distance - d_ramp) / v_cap


def _vehicle_events(
    intersection: Intersection,
    records: list[BsmRecord],
    kin: QueueKinematics,
) -> list[VehicleEvents]:
    """Resolve stop/launch events, processing vehicles nearest the bar first."""
    bar = intersection.stop_bar_position
    spacing = intersection.jam_spacing
    signal = intersection.signal
    approaching = sorted(
        (r for r in records if r.position <= bar),
        key=lambda r: -r.position,
    )
    events: list[VehicleEvents] = []
    queued: list[VehicleEvents] = []
    green_onset = math.nan
    for rec in approaching:
        ev = VehicleEvents(vehicle_id=rec.vehicle_id, stops=False, record=rec)
        slot = len(queued)
        slot_pos = bar if slot == 0 else queued[-1].stop_pos - spacing
        if rec.speed == 0.0:
            # Already standing: it is part of the queue by observation.
            ev.stops = True
            ev.slot = slot
            ev.stop_pos = rec.position
            ev.brake_start = rec.time
            ev.stop_time = rec.time
        else:
            t_bar = rec.time + (bar - rec.position) / rec.speed
            brake_gap = rec.speed**2 / (2 * kin.decel)
            brake_point = slot_pos - brake_gap
            if rec.position <= brake_point:
                brake_start = rec.time + (brake_point - rec.position) / rec.speed
                stop_time = brake_start + rec.speed / kin.decel
            else:
                # Already inside the nominal braking zone: triangular hard stop.
                brake_start = rec.time
                stop_time = rec.time + 2 * max(slot_pos - rec.position, 0.0) / rec.speed
            if queued:
                ahead = queued[-1]
                if stop_time < ahead.launch_time:
                    ev.stops = True
            elif not signal.is_green(t_bar):
                ev.stops = True
            if ev.stops:
                ev.slot = slot
                ev.stop_pos = slot_pos
                ev.brake_start = brake_start
                ev.stop_time = stop_time
        if ev.stops:
            if not queued:
                green_onset = signal.next_green_start(ev.stop_time)
            ev.launch_time = max(
                green_onset + (ev.slot + 1) * kin.launch_reaction, ev.record.time
            )
            ev.cross_time = ev.launch_time + _time_to_cover(
                bar - ev.stop_pos, kin.accel, intersection.free_flow_speed
            )
            queued.append(ev)
        events.append(ev)
    return events


def _fit_wave(points: list[tuple[float, float]]) -> float | None:
    """Least-squares slope through (time, position) event points."""
    if len(points) < 2:
        return None
    t = np.asarray([p[0] for p in points])
    x = np.asarray([p[1] for p in points])
    if float(np.ptp(t)) < 1e-9:
        return None
    return float(np.polyfit(t, x, 1)[0])


def _fallback_queuing_wave(
    intersection: Intersection, queued: list[VehicleEvents]
) -> float:
    """Kinematic-wave speed between the estimated arrival state and jam."""
    speeds = [e.record.speed for e in queued if e.record.speed > 0]
    if not speeds:
        return 0.0
    v_mean = float(np.mean(speeds))
    q_arr = len(queued) / intersection.signal.cycle_length
    k_arr = min(q_arr / v_mean, 0.9 * intersection.jam_density)
    return shockwave_speed(q_arr, k_arr, 0.0, intersection.jam_density)


def predict_queue(
    intersection: Intersection,
    bsms: list[BsmRecord],
    t0: float,
    kin: QueueKinematics = QueueKinematics(),
) -> QueueForecast:
    """Forecast the queue profile and its critical instants as of time t0."""
    signal = intersection.signal
    events = _vehicle_events(intersection, bsms, kin)
    queued = [e for e in events if e.stops]
    if not queued:
        t3 = t0 if signal.is_green(t0) else signal.next_green_start(t0)
        return QueueForecast(t0=t0, t1=t0, t2=t0, t3=max(t3, t0), q_max=0.0,
                             w0=0.0, w1=0.0, w2=0.0, w3=0.0)

    green_onset = signal.next_green_start(queued[0].stop_time)
    tail = queued[-1]
    t1 = min(max(max(e.stop_time for e in queued), t0), max(green_onset, t0))
    t2 = max(tail.launch_time, t1)
    t3 = max(tail.cross_time, t2)
    q_max = (intersection.stop_bar_position - tail.stop_pos) + intersection.jam_spacing

    observed = [(e.stop_time, e.stop_pos) for e in queued if e.stop_time <= t0]
    predicted = [(e.stop_time, e.stop_pos) for e in queued if e.stop_time > t0]
    all_stops = observed + predicted
    w0 = _fit_wave(observed)
    w1 = _fit_wave(predicted)
    if w1 is None:
        w1 = _fit_wave(all_stops)
    if w0 is None:
        w0 = w1 if w1 is not None else _fallback_queuing_wave(intersection, queued)
    if w1 is None:
        w1 = _fallback_queuing_wave(intersection, queued)
    w2 = _fit_wave([(e.launch_time, e.stop_pos) for e in queued])
    if w2 is None:
        w2 = shockwave_speed(
            0.0,
            intersection.jam_density,
            intersection.saturation_flow,
            intersection.critical_density,
        )
    if t3 > t2:
        w3 = (intersection.stop_bar_position - tail.stop_pos) / (t3 - t2)
    else:
        w3 = 0.0
    return QueueForecast(t0=t0, t1=t1, t2=t2, t3=t3, q_max=q_max,
                         w0=w0, w1=w1, w2=w2, w3=w3)


def green_window(forecast: QueueForecast, signal: SignalTiming, t0: float) -> GreenWindow:
    """Passable interval: queue clearance clipped into the relevant green phase."""
    anchor = max(forecast.t3, t0)
    start, end = signal.current_or_next_green(anchor)
    return GreenWindow(earliest=max(forecast.t3, start), latest=end)


def vehicle_state_at(
    intersection: Intersection,
    event: VehicleEvents,
    t: float,
    kin: QueueKinematics = QueueKinematics(),
) -> tuple[float, float]:
    """Position and speed of a scripted vehicle at time t from its event schedule."""
    rec = event.record
    v_ff = intersection.free_flow_speed
    if t <= rec.time:
        return rec.position, rec.speed
    if not event.stops:
        return rec.position + rec.speed * (t - rec.time), rec.speed
    if t <= event.brake_start:
        return rec.position + rec.speed * (t - rec.time), rec.speed
    if t <= event.stop_time:
        # Constant deceleration from the brake point down to standstill.
        tau = t - event.brake_start
        span = event.stop_time - event.brake_start
        x_brake = rec.position + rec.speed * (event.brake_start - rec.time)
        dec = rec.speed / span if span > 0 else kin.decel
        v = max(rec.speed - dec * tau, 0.0)
        x = x_brake + rec.speed * tau - 0.5 * dec * tau**2
        return min(x, event.stop_pos), v
    if t <= event.launch_time:
        return event.stop_pos, 0.0
    tau = t - event.launch_time
    t_ramp = v_ff / kin.accel
    if tau <= t_ramp:
        return event.stop_pos + 0.5 * kin.accel * tau**2, kin.accel * tau
    x = event.stop_pos + 0.5 * kin.accel * t_ramp**2 + v_ff * (tau - t_ramp)
    return x, v_ff


def bsm_snapshot(
    intersection: Intersection,
    arrivals: list[BsmRecord],
    t: float,
    kin: QueueKinematics = QueueKinematics(),
) -> list[BsmRecord]:
    """Project scripted arrivals forward and report each vehicle's state at t.

    Vehicles that have already crossed the stop bar are omitted; the rest
    come back as fresh messages stamped at t.
    """
    events = _vehicle_events(intersection, arrivals, kin)
    snapshot = []
    for ev in events:
        pos, speed = vehicle_state_at(intersection, ev, t, kin)
        if pos <= intersection.stop_bar_position:
            snapshot.append(BsmRecord(ev.vehicle_id, t, pos, speed))
    return snapshot


def read_bsm_csv(path) -> list[BsmRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                BsmRecord(
                    vehicle_id=int(row["vehicle_id"]),
                    time=float(row["time"]),
                    position=float(row["position"]),
                    speed=float(row["speed"]),
                )
            )
    return records


def write_bsm_csv(path, records: list[BsmRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "vehicle_id", "position", "speed"])
        for r in records:
            writer.writerow([repr(r.time), r.vehicle_id, repr(r.position), repr(r.speed)])


@dataclass
class Corridor:
    """A stretch of road with signalized intersections and scripted traffic."""

    length: float
    intersections: list[Intersection]
    arrivals: list[BsmRecord] = field(default_factory=list)

    def arrivals_for(self, index: int) -> list[BsmRecord]:
        """Arrivals assigned to intersection `index`: between it and its upstream neighbor."""
        bar = self.intersections[index].stop_bar_position
        lower = (
            self.intersections[index - 1].stop_bar_position if index > 0 else -math.inf
        )
        return [r for r in self.arrivals if lower < r.position <= bar]

    @classmethod
    def from_dict(cls, d: dict) -> "Corridor":
        intersections = [
            Intersection(
                id=i["id"],
                stop_bar_position=i["stop_bar_position"],
                signal=SignalTiming(
                    cycle_length=i["signal"]["cycle_length"],
                    green_start=i["signal"]["green_start"],
                    green_duration=i["signal"]["green_duration"],
                ),
                saturation_flow=i.get("saturation_flow", 0.5),
                jam_density=i.get("jam_density", 0.15),
                free_flow_speed=i.get("free_flow_speed", 15.0),
            )
            for i in d["intersections"]
        ]
        arrivals = [
            BsmRecord(
                vehicle_id=a["vehicle_id"],
                time=a["time"],
                position=a["position"],
                speed=a["speed"],
            )
            for a in d.get("arrivals", [])
        ]
        return cls(length=d["length"], intersections=intersections, arrivals=arrivals)

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "intersections": [
                {
                    "id": i.id,
                    "stop_bar_position": i.stop_bar_position,
                    "signal": {
                        "cycle_length": i.signal.cycle_length,
                        "green_start": i.signal.green_start,
                        "green_duration": i.signal.green_duration,
                    },
                    "saturation_flow": i.saturation_flow,
                    "jam_density": i.jam_density,
                    "free_flow_speed": i.free_flow_speed,
                }
                for i in self.intersections
            ],
            "arrivals": [
                {
                    "vehicle_id": a.vehicle_id,
                    "time": a.time,
                    "position": a.position,
                    "speed": a.speed,
                }
                for a in self.arrivals
            ],
        }
