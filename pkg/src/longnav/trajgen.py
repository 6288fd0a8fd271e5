"""Candidate trajectory generation.

The learned generator is replaced by a deterministic fan of constant-curvature
arcs. Anything implementing :class:`TrajectoryGenerator` can be dropped in.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Protocol, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .frames import Pose, change_frame
from .sim.sensing import RangeScan

MAX_WAYPOINT_SPACING = 2.0
DEFAULT_KAPPA_MAX = 0.5
DEFAULT_D_SAFE = 2.0
DEFAULT_WAYPOINTS = 20
DEFAULT_N = 6
PERCEPTION_RANGE = 50.0


class NoScan(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Waypoint polyline (W, 2) in the frame it was generated in."""

    waypoints: np.ndarray
    confidence: float = 1.0

    def __post_init__(self):
        wps = np.array(self.waypoints, dtype=float).reshape(-1, 2)
        wps.setflags(write=False)
        object.__setattr__(self, "waypoints", wps)
        if len(wps) < 2:
            raise ValueError("trajectory needs at least 2 waypoints")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        gaps = np.hypot(*np.diff(wps, axis=0).T)
        if gaps.max(initial=0.0) > MAX_WAYPOINT_SPACING + 1e-9:
            raise ValueError(f"waypoint spacing {gaps.max():.3f} m exceeds {MAX_WAYPOINT_SPACING} m")

    @property
    def length(self) -> float:
        return float(np.hypot(*np.diff(self.waypoints, axis=0).T).sum())


@dataclass(frozen=True, eq=False)
class CandidateSet:
    trajectories: tuple[Trajectory, ...]
    frame_pose: Pose = (0.0, 0.0, 0.0)
    timestamp: float = 0.0
    # frames since generation, and generator slot, per trajectory
    ages: tuple[int, ...] = ()
    slots: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        n = len(self.trajectories)
        if n < 1:
            raise ValueError("candidate set must hold at least one trajectory")
        object.__setattr__(self, "frame_pose", tuple(float(v) for v in self.frame_pose))
        if not self.ages:
            object.__setattr__(self, "ages", (0,) * n)
        if not self.slots:
            object.__setattr__(self, "slots", tuple(range(n)))
        if len(self.ages) != n or len(self.slots) != n:
            raise ValueError("ages/slots must match trajectory count")

    def __len__(self) -> int:
        return len(self.trajectories)


@dataclass
class VelocityHistory:
    maxlen: int = 10
    samples: deque = field(default_factory=deque)

    def push(self, t: float, v: float, w: float) -> None:
        if self.samples and t <= self.samples[-1][0]:
            raise ValueError("velocity timestamps must be strictly increasing")
        self.samples.append((float(t), float(v), float(w)))
        while len(self.samples) > self.maxlen:
            self.samples.popleft()

    def __len__(self) -> int:
        return len(self.samples)


def confidence_from_clearance(traj: Trajectory, scan: RangeScan, d_safe: float = DEFAULT_D_SAFE) -> float:
    """Minimum waypoint-to-obstacle distance over ``d_safe``, clamped to [0, 1].

    ``traj`` must be in the scan's (robot) frame.
    """
    obstacles = scan.obstacle_points()
    if len(obstacles) == 0:
        return 1.0
    d, _ = cKDTree(obstacles).query(traj.waypoints)
    return float(np.clip(d.min() / d_safe, 0.0, 1.0))


def arc_points(kappa: float, s: np.ndarray) -> np.ndarray:
    if abs(kappa) < 1e-12:
        return np.column_stack([s, np.zeros_like(s)])
    return np.column_stack([np.sin(kappa * s) / kappa, (1.0 - np.cos(kappa * s)) / kappa])


class TrajectoryGenerator(Protocol):
    def generate(
        self,
        scan_history: Sequence[RangeScan],
        vel: VelocityHistory,
        n: int,
        *,
        pose: Pose = (0.0, 0.0, 0.0),
        timestamp: float = 0.0,
    ) -> CandidateSet: ...


@dataclass(frozen=True)
class ArcFanGenerator:
    """Fan of ``n`` arcs with curvatures evenly spaced over [-kappa_max, kappa_max].

    Each arc runs until the perception range, a quarter turn, or the first
    point closer than ``margin`` to a scan return, whichever comes first.
    Only the latest scan is used; velocity history is accepted for interface
    parity with learned generators.
    """

    kappa_max: float = DEFAULT_KAPPA_MAX
    waypoints: int = DEFAULT_WAYPOINTS
    d_safe: float = DEFAULT_D_SAFE
    perception_range: float = PERCEPTION_RANGE
    max_turn: float = math.pi / 2
    margin: float = 0.3
    step: float = 0.1

    def kappas(self, n: int) -> np.ndarray:
        return np.linspace(-self.kappa_max, self.kappa_max, n)

    def arc_length(self, kappa: float, tree: cKDTree | None) -> float:
        limit = self.perception_range
        if abs(kappa) > 1e-12:
            limit = min(limit, self.max_turn / abs(kappa))
        if tree is None:
            return limit
        s = np.append(np.arange(0.0, limit, self.step), limit)
        d, _ = tree.query(arc_points(kappa, s))
        bad = np.flatnonzero(d < self.margin)
        if len(bad) == 0:
            return limit
        return float(s[bad[0] - 1]) if bad[0] > 0 else 0.0

    def generate(self, scan_history, vel, n, *, pose=(0.0, 0.0, 0.0), timestamp=0.0) -> CandidateSet:
        if not scan_history:
            raise NoScan("trajectory generation needs at least one scan")
        if not 2 <= n <= 16:
            raise ValueError(f"n={n} outside [2, 16]")
        scan = scan_history[-1]
        obstacles = scan.obstacle_points()
        tree = cKDTree(obstacles) if len(obstacles) else None
        trajs = []
        for kappa in self.kappas(n):
            length = self.arc_length(kappa, tree)
            w = max(self.waypoints, math.ceil(length / MAX_WAYPOINT_SPACING) + 1)
            traj = Trajectory(arc_points(kappa, np.linspace(0.0, length, w)))
            trajs.append(replace(traj, confidence=confidence_from_clearance(traj, scan, self.d_safe)))
        return CandidateSet(tuple(trajs), pose, timestamp)


def generate_candidates(
    scan_history: Sequence[RangeScan],
    vel: VelocityHistory,
    n: int = DEFAULT_N,
    generator: TrajectoryGenerator | None = None,
    **kwargs,
) -> CandidateSet:
    return (generator or ArcFanGenerator()).generate(scan_history, vel, n, **kwargs)


def transform_candidates(cands: CandidateSet, from_pose: Pose, to_pose: Pose) -> CandidateSet:
    """Re-express every waypoint of ``cands`` in the ``to_pose`` body frame."""
    if tuple(from_pose) == tuple(to_pose):
        return replace(cands, frame_pose=tuple(to_pose))
    trajs = tuple(
        Trajectory(change_frame(t.waypoints, from_pose, to_pose), t.confidence) for t in cands.trajectories
    )
    return replace(cands, trajectories=trajs, frame_pose=tuple(to_pose))
