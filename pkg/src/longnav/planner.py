"""Dynamic Window Approach tracking of the selected trajectory."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial import cKDTree

from .frames import world_to_body
from .georoute import LocalPoint
from .sim.sensing import RangeScan
from .sim.world import V_MAX, W_MAX, RobotState
from .trajgen import Trajectory


class VelocityMode(Enum):
    NORMAL = "Normal"
    SLOW = "Slow"
    STOP = "Stop"

    @property
    def cap(self) -> float:
        return {"Normal": 1.0, "Slow": 0.5, "Stop": 0.0}[self.value]


@dataclass(frozen=True)
class DwaConfig:
    accel_v: float = 1.0  # m/s^2
    accel_w: float = 2.0  # rad/s^2
    samples_v: int = 5
    samples_w: int = 11
    horizon: float = 2.0
    rollout_dt: float = 0.1
    control_dt: float = 0.1
    w_heading: float = 0.6
    w_clearance: float = 0.3
    w_velocity: float = 0.1
    robot_radius: float = 0.3
    clearance_cap: float = 2.0
    w_rotate: float = 0.5
    lookahead: float = 2.0
    min_target_length: float = 2.0  # shorter selected trajectories count as blocked

    def __post_init__(self):
        for name, val in self.__dict__.items():
            if not val > 0:
                raise ValueError(f"dwa.{name} must be positive, got {val}")
        if self.samples_v < 3 or self.samples_w < 3:
            raise ValueError("dwa sample counts must be >= 3")


@dataclass(frozen=True)
class DwaDecision:
    v: float
    w: float
    recovery: bool
    heading: float = 0.0
    clearance: float = 0.0
    velocity: float = 0.0
    admissible: int = 0
    turn_side: float = 0.0  # recovery turn direction, +1 left / -1 right

    @property
    def command(self) -> tuple[float, float]:
        return (self.v, self.w)


def lookahead_waypoint(target: Trajectory, robot: RobotState, d: float = 2.0) -> LocalPoint:
    """First waypoint at least ``d`` of arc length past the robot's closest
    point on ``target``; the last waypoint if none is."""
    if d <= 0:
        raise ValueError("lookahead distance must be positive")
    wps = target.waypoints
    a, b = wps[:-1], wps[1:]
    ab = b - a
    seg_len = np.hypot(ab[:, 0], ab[:, 1])
    q = np.array([robot.x, robot.y])
    t = np.clip(((q - a) * ab).sum(axis=1) / np.maximum(seg_len**2, 1e-18), 0.0, 1.0)
    dist = np.hypot(*(a + t[:, None] * ab - q).T)
    k = int(np.argmin(dist))
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    s_robot = cum[k] + t[k] * seg_len[k]
    ahead = np.flatnonzero(cum - s_robot >= d - 1e-12)
    idx = int(ahead[0]) if len(ahead) else len(wps) - 1
    return LocalPoint(float(wps[idx, 0]), float(wps[idx, 1]))


def dynamic_window(robot: RobotState, mode: VelocityMode, cfg: DwaConfig) -> tuple[float, float, float, float]:
    """(v_lo, v_hi, w_lo, w_hi) reachable in one control step under the cap.

    When the cap lies below the reachable speeds, the cap wins.
    """
    cap = min(V_MAX, mode.cap)
    v_hi = min(robot.v + cfg.accel_v * cfg.control_dt, cap)
    v_lo = max(robot.v - cfg.accel_v * cfg.control_dt, 0.0)
    v_lo = min(v_lo, v_hi)
    w_lo = max(robot.w - cfg.accel_w * cfg.control_dt, -W_MAX)
    w_hi = min(robot.w + cfg.accel_w * cfg.control_dt, W_MAX)
    if w_lo > w_hi:
        w_lo = w_hi = min(max(robot.w, -W_MAX), W_MAX)
    return v_lo, max(v_hi, 0.0), w_lo, w_hi


def rollout(v: np.ndarray, w: np.ndarray, times: np.ndarray):
    """Body-frame unicycle positions and headings for each (v, w) at ``times``."""
    v, w = v[:, None], w[:, None]
    th = w * times[None, :]
    straight = np.abs(w) <= 1e-6
    safe_w = np.where(straight, 1.0, w)
    x = np.where(straight, v * times, v / safe_w * np.sin(th))
    y = np.where(straight, 0.0, v / safe_w * (1.0 - np.cos(th)))
    return x, y, th


def free_side(scan: RangeScan) -> float:
    """+1 when the left half of the scan is more open than the right, else -1."""
    a = np.asarray(scan.angles)
    r = np.asarray(scan.ranges)
    left, right = r[(a > 0) & (a < math.pi)], r[(a < 0) & (a > -math.pi)]
    return 1.0 if left.sum() >= right.sum() else -1.0


def _recover(v_lo, w_lo, w_hi, scan: RangeScan, cfg: DwaConfig, turn_hint: float | None) -> DwaDecision:
    side = math.copysign(1.0, turn_hint) if turn_hint else free_side(scan)
    turn = side * cfg.w_rotate
    return DwaDecision(float(v_lo), float(min(max(turn, w_lo), w_hi)), True, turn_side=side)


def dwa_evaluate(
    robot: RobotState,
    target: Trajectory,
    scan: RangeScan,
    mode: VelocityMode,
    cfg: DwaConfig = DwaConfig(),
    turn_hint: float | None = None,
) -> DwaDecision:
    """Best admissible (v, w) on the sample lattice, or a recovery turn.

    Recovery happens when the target is shorter than ``min_target_length`` or
    no sample is admissible. The turn goes toward the more open half of the
    scan unless ``turn_hint`` fixes its sign (callers pass the previous
    recovery direction to avoid dithering).
    """
    if mode is VelocityMode.STOP:
        return DwaDecision(0.0, 0.0, False)
    v_lo, v_hi, w_lo, w_hi = dynamic_window(robot, mode, cfg)
    if target.length < cfg.min_target_length:
        return _recover(v_lo, w_lo, w_hi, scan, cfg, turn_hint)
    goal = world_to_body([lookahead_waypoint(target, robot, cfg.lookahead)], robot.pose)[0]
    vs = np.linspace(v_lo, v_hi, cfg.samples_v)
    ws = np.linspace(w_lo, w_hi, cfg.samples_w)
    V, W = (a.ravel() for a in np.meshgrid(vs, ws, indexing="ij"))
    steps = max(1, int(round(cfg.horizon / cfg.rollout_dt)))
    times = cfg.rollout_dt * np.arange(1, steps + 1)
    x, y, th = rollout(V, W, times)

    obstacles = scan.obstacle_points()
    reach = v_hi * cfg.horizon + cfg.robot_radius + cfg.clearance_cap
    if len(obstacles):
        obstacles = obstacles[np.hypot(obstacles[:, 0], obstacles[:, 1]) <= reach]
    if len(obstacles):
        d, _ = cKDTree(obstacles).query(np.column_stack([x.ravel(), y.ravel()]))
        min_d = d.reshape(x.shape).min(axis=1)
        d_now = float(np.hypot(obstacles[:, 0], obstacles[:, 1]).min())
    else:
        min_d = np.full(len(V), np.inf)
        d_now = np.inf
    clear = min_d - cfg.robot_radius
    # already inside the footprint margin: only rollouts that do not close in further
    limit = min(cfg.robot_radius, 0.9 * d_now)
    admissible = (min_d > limit) & (V > 1e-9)

    xe, ye, the = x[:, -1], y[:, -1], th[:, -1]
    bearing = np.arctan2(goal[1] - ye, goal[0] - xe)
    err = np.abs(np.arctan2(np.sin(bearing - the), np.cos(bearing - the)))
    near = np.hypot(goal[0] - xe, goal[1] - ye) < 1e-6
    heading = np.where(near, 1.0, 1.0 - err / math.pi)
    clearance = np.clip(clear, 0.0, cfg.clearance_cap) / cfg.clearance_cap
    velocity = V / V_MAX
    total = cfg.w_heading * heading + cfg.w_clearance * clearance + cfg.w_velocity * velocity

    n_ok = int(admissible.sum())
    if n_ok == 0:
        return _recover(v_lo, w_lo, w_hi, scan, cfg, turn_hint)
    total = np.where(admissible, total, -np.inf)
    k = int(np.argmax(total))  # first maximum in lattice order
    return DwaDecision(
        float(V[k]), float(W[k]), False, float(heading[k]), float(clearance[k]), float(velocity[k]), n_ok
    )


def dwa_plan(
    robot: RobotState, target: Trajectory, scan: RangeScan, mode: VelocityMode, cfg: DwaConfig = DwaConfig()
) -> tuple[float, float]:
    """(v, w) command; ``target`` is in the world frame, ``scan`` robot-relative."""
    return dwa_evaluate(robot, target, scan, mode, cfg).command
