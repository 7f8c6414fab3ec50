"""Tricopter kinematics, battery drain, altitude rule and mission failsafes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .errors import ConfigError

INITIAL_ALTITUDE_M = 1.0
CROP_CLEARANCE_M = 0.20
ARRIVAL_TOL_M = 0.05
LANDING_TOL_M = 0.1


class Mode(str, enum.Enum):
    IDLE = "Idle"
    TAKEOFF = "Takeoff"
    ALTITUDE_CHECK = "AltitudeCheck"
    CRUISE = "Cruise"
    RETURN = "Return"
    LANDED = "Landed"
    CRASHED = "Crashed"
    BEACON = "Beacon"


AIRBORNE = frozenset({Mode.TAKEOFF, Mode.ALTITUDE_CHECK, Mode.CRUISE, Mode.RETURN})


class EventKind(str, enum.Enum):
    TAKEOFF_COMPLETE = "TakeoffComplete"
    LAP_COMPLETE = "LapComplete"
    LOW_BATTERY_ALARM = "LowBatteryAlarm"
    RETURN_INITIATED = "ReturnInitiated"
    LANDED_HOME = "LandedHome"
    CRASH_LANDED = "CrashLanded"
    BEACON_PING = "BeaconPing"


@dataclass(frozen=True)
class TricopterParams:
    cruise_speed_mps: float = 3.0
    climb_rate_mps: float = 1.0
    yaw_rate_dps: float = 180.0
    hover_power_w: float = 90.0
    cruise_power_w: float = 110.0
    battery_capacity_j: float = 400_000.0
    low_battery_fraction: float = 0.20

    def __post_init__(self):
        for name in ("cruise_speed_mps", "climb_rate_mps", "yaw_rate_dps",
                     "hover_power_w", "cruise_power_w", "battery_capacity_j"):
            if not getattr(self, name) > 0:
                raise ConfigError("must be positive", f"tricopter.{name}")
        if not 0 < self.low_battery_fraction < 1:
            raise ConfigError("must be in (0, 1)", "tricopter.low_battery_fraction")


@dataclass(frozen=True)
class MissionEvent:
    time_s: float
    kind: EventKind
    position: tuple[float, float, float]
    agent_id: int = 0
    day: int = 0

    def to_dict(self) -> dict:
        return {
            "day": self.day,
            "time_s": round(self.time_s, 6),
            "agent_id": self.agent_id,
            "kind": self.kind.value,
            "position": [round(float(c), 6) for c in self.position],
        }


@dataclass(frozen=True)
class AgentState:
    position: tuple[float, float, float]
    battery_j: float
    mode: Mode = Mode.IDLE
    waypoint_index: int = 0
    home: tuple[float, float] = (0.0, 0.0)
    crash_position: tuple[float, float, float] | None = None
    alarm_raised: bool = False
    dwell_s: float = 0.0
    time_s: float = 0.0

    @property
    def airborne(self) -> bool:
        return self.mode in AIRBORNE


def cruise_altitude(crop_height_m: float) -> float:
    if crop_height_m < 0:
        raise ConfigError(f"crop height must be >= 0, got {crop_height_m}", "field.crop_height_m")
    return max(INITIAL_ALTITUDE_M, crop_height_m + CROP_CLEARANCE_M)


def _toward(a: float, b: float, step: float) -> float:
    if abs(b - a) <= step:
        return b
    return a + math.copysign(step, b - a)


def step_agent(st: AgentState, target, p: TricopterParams, dt_s: float) -> AgentState:
    """Advance one step toward ``target`` (x, y, z) without overshooting.

    Horizontal and vertical motion proceed independently at cruise speed and
    climb rate. Battery drains at cruise power while moving horizontally,
    hover power otherwise. Reaching the target bumps ``waypoint_index``.
    """
    if dt_s <= 0:
        raise ValueError("dt_s must be positive")
    x, y, z = st.position
    tx, ty, tz = target
    if st.dwell_s > 0:
        return replace(st, battery_j=max(0.0, st.battery_j - p.hover_power_w * dt_s),
                       dwell_s=max(0.0, st.dwell_s - dt_s), time_s=st.time_s + dt_s)

    horiz = math.hypot(tx - x, ty - y)
    moved_h = False
    if horiz > 0:
        reach = p.cruise_speed_mps * dt_s
        if horiz <= reach:
            x, y = tx, ty
        else:
            x += (tx - x) * reach / horiz
            y += (ty - y) * reach / horiz
        moved_h = True
    z = _toward(z, tz, p.climb_rate_mps * dt_s)

    power = p.cruise_power_w if moved_h else p.hover_power_w
    index = st.waypoint_index
    if math.dist((x, y, z), (tx, ty, tz)) <= ARRIVAL_TOL_M:
        index += 1
    return replace(st, position=(x, y, max(z, 0.0)),
                   battery_j=max(0.0, st.battery_j - power * dt_s),
                   waypoint_index=index, time_s=st.time_s + dt_s)


def failsafe_check(st: AgentState, p: TricopterParams):
    """Apply the low-battery, crash and landing rules. Returns (state, events)."""
    events = []
    pos = st.position
    t = st.time_s
    if st.mode == Mode.CRASHED:
        st = replace(st, mode=Mode.BEACON)
    if st.mode == Mode.BEACON:
        events.append(MissionEvent(t, EventKind.BEACON_PING, st.crash_position))
        return st, events
    if st.airborne and st.battery_j <= 0:
        crash = (pos[0], pos[1], 0.0)
        st = replace(st, mode=Mode.CRASHED, position=crash, crash_position=crash)
        events.append(MissionEvent(t, EventKind.CRASH_LANDED, crash))
        return st, events
    if (st.mode == Mode.CRUISE and not st.alarm_raised
            and st.battery_j / p.battery_capacity_j < p.low_battery_fraction):
        st = replace(st, mode=Mode.RETURN, alarm_raised=True, dwell_s=0.0)
        events.append(MissionEvent(t, EventKind.LOW_BATTERY_ALARM, pos))
        events.append(MissionEvent(t, EventKind.RETURN_INITIATED, pos))
        return st, events
    if (st.mode == Mode.RETURN and pos[2] <= 0.0
            and math.dist(pos[:2], st.home) <= LANDING_TOL_M):
        st = replace(st, mode=Mode.LANDED, position=(pos[0], pos[1], 0.0))
        events.append(MissionEvent(t, EventKind.LANDED_HOME, st.position))
    return st, events


def _turn_angle_deg(a, b, c) -> float:
    v1 = (b[0] - a[0], b[1] - a[1])
    v2 = (c[0] - b[0], c[1] - b[1])
    n1, n2 = math.hypot(*v1), math.hypot(*v2)
    if n1 == 0 or n2 == 0:
        return 0.0
    cos = max(-1.0, min(1.0, (v1[0] * v2[0] + v1[1] * v2[1]) / (n1 * n2)))
    return math.degrees(math.acos(cos))


@dataclass
class Route:
    """What one agent flies on one day."""

    home: tuple[float, float]
    waypoints: list
    cruise_z: float
    lap_ends: frozenset = frozenset()


@dataclass
class MissionTrace:
    positions: np.ndarray           # (steps, 3) after each step
    emitting: np.ndarray            # (steps,) bool
    events: list = dc_field(default_factory=list)
    final: AgentState | None = None
    energy_used_j: float = 0.0

    @property
    def steps(self) -> int:
        return len(self.positions)


def _target(st: AgentState, route: Route):
    hx, hy = route.home
    if st.mode == Mode.TAKEOFF:
        return (hx, hy, INITIAL_ALTITUDE_M)
    if st.mode == Mode.ALTITUDE_CHECK:
        return (hx, hy, route.cruise_z)
    if st.mode == Mode.CRUISE:
        wx, wy = route.waypoints[st.waypoint_index]
        return (wx, wy, route.cruise_z)
    x, y, z = st.position
    if math.hypot(x - hx, y - hy) > ARRIVAL_TOL_M:
        return (hx, hy, z)
    return (hx, hy, 0.0)


def mission_step(st: AgentState, route: Route, p: TricopterParams, dt_s: float):
    """One controller tick: pick a target, move, then run the failsafes."""
    events = []
    if st.mode == Mode.IDLE:
        st = replace(st, mode=Mode.TAKEOFF)
    if st.mode in (Mode.LANDED,):
        return replace(st, time_s=st.time_s + dt_s), events
    if st.mode in (Mode.CRASHED, Mode.BEACON):
        st = replace(st, time_s=st.time_s + dt_s)
        return failsafe_check(st, p)

    before = st.waypoint_index
    new = step_agent(st, _target(st, route), p, dt_s)
    arrived = new.waypoint_index > before
    if st.mode == Mode.TAKEOFF:
        new = replace(new, waypoint_index=before)
        if arrived:
            new = replace(new, mode=Mode.ALTITUDE_CHECK)
            events.append(MissionEvent(new.time_s, EventKind.TAKEOFF_COMPLETE, new.position))
    elif st.mode == Mode.ALTITUDE_CHECK:
        new = replace(new, waypoint_index=before)
        if arrived:
            new = replace(new, mode=Mode.CRUISE if route.waypoints else Mode.RETURN)
    elif st.mode == Mode.CRUISE and arrived:
        i = before
        if i in route.lap_ends:
            events.append(MissionEvent(new.time_s, EventKind.LAP_COMPLETE, new.position))
        if i + 1 >= len(route.waypoints):
            new = replace(new, mode=Mode.RETURN)
        elif i > 0:
            wp = route.waypoints
            new = replace(new, dwell_s=_turn_angle_deg(wp[i - 1], wp[i], wp[i + 1]) / p.yaw_rate_dps)
    elif st.mode == Mode.RETURN:
        new = replace(new, waypoint_index=before)

    new, fs_events = failsafe_check(new, p)
    return new, events + fs_events


def fly_mission(route: Route, p: TricopterParams, dt_s: float, *, battery_j: float | None = None,
                beacon_steps: int = 10, max_steps: int = 2_000_000,
                agent_id: int = 0, day: int = 0) -> MissionTrace:
    """Fly a route from takeoff to Landed, or to Beacon plus ``beacon_steps`` pings."""
    hx, hy = route.home
    st = AgentState((hx, hy, 0.0), p.battery_capacity_j if battery_j is None else battery_j,
                    Mode.IDLE, 0, (hx, hy))
    start_j = st.battery_j
    positions, emitting, events = [], [], []
    pings = 0
    for _ in range(max_steps):
        st, ev = mission_step(st, route, p, dt_s)
        positions.append(st.position)
        emitting.append(st.airborne and st.position[2] > 0)
        for e in ev:
            events.append(replace(e, agent_id=agent_id, day=day))
            if e.kind == EventKind.BEACON_PING:
                pings += 1
        if st.mode == Mode.LANDED or (st.mode == Mode.BEACON and pings >= beacon_steps):
            break
    else:
        raise RuntimeError("mission did not terminate within max_steps")
    return MissionTrace(np.array(positions, dtype=float).reshape(-1, 3),
                        np.array(emitting, dtype=bool), events, st,
                        start_j - st.battery_j)


def extend_beacon(trace: MissionTrace, steps: int, dt_s: float, agent_id: int = 0, day: int = 0):
    """Pad a finished trace to ``steps`` entries; a beaconing agent keeps pinging."""
    extra = steps - trace.steps
    if extra <= 0:
        return trace
    last = trace.positions[-1]
    trace.positions = np.vstack([trace.positions, np.repeat(last[None, :], extra, axis=0)])
    trace.emitting = np.concatenate([trace.emitting, np.zeros(extra, dtype=bool)])
    if trace.final is not None and trace.final.mode == Mode.BEACON:
        t0 = trace.final.time_s
        for k in range(1, extra + 1):
            trace.events.append(MissionEvent(t0 + k * dt_s, EventKind.BEACON_PING,
                                             trace.final.crash_position, agent_id, day))
    return trace
