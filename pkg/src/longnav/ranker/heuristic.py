"""Deterministic rule-based stand-in for the vision-language ranker."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..frames import body_to_world, world_to_body
from ..scoring import rasterize_trajectory
from ..sim.world import WHEELED_TRAVERSABLE, Label, WorldState
from ..trajgen import CandidateSet, Trajectory
from .prompt import PromptSpec
from .response import RankResponse

PATH_CLEARANCE_M = 2.0
STOP_RADIUS_M = 0.5
SLOW_RADIUS_M = 4.0
OPEN_SPACE_MIN = -2.0
SIGN_VIEW_M = 15.0


@dataclass(frozen=True)
class SceneFacts:
    """Per-label facts (index = right-to-left label) plus global context.

    ``pedestrians`` holds body-frame ``(x, y, vx, vy)`` relative to the robot.
    """

    ped_near_path: tuple[bool, ...]
    offroad_fraction: tuple[float, ...]
    crosswalk_crossing: tuple[bool, ...]
    goal_misalignment: tuple[float, ...]
    pedestrians: tuple[tuple[float, float, float, float], ...] = ()
    sign: str = "none"

    def __post_init__(self):
        lens = {len(self.ped_near_path), len(self.offroad_fraction), len(self.crosswalk_crossing), len(self.goal_misalignment)}
        if len(lens) != 1:
            raise ValueError("per-trajectory facts must all have the same length")

    @property
    def n(self) -> int:
        return len(self.ped_near_path)


def trajectory_scores(facts: SceneFacts) -> list[float]:
    return [
        -2.0 * near - 1.0 * off + 0.5 * cross - mis / math.pi
        for near, off, cross, mis in zip(
            facts.ped_near_path, facts.offroad_fraction, facts.crosswalk_crossing, facts.goal_misalignment
        )
    ]


def _approaching(p) -> bool:
    x, y, vx, vy = p
    d = math.hypot(x, y)
    return d < SLOW_RADIUS_M and (x * vx + y * vy) < -1e-9


def heuristic_rank(facts: SceneFacts, spec: PromptSpec) -> RankResponse:
    if facts.n != spec.n:
        raise ValueError(f"facts cover {facts.n} trajectories, prompt expects {spec.n}")
    scores = trajectory_scores(facts)
    ranking = sorted(range(spec.n), key=lambda i: (-scores[i], i))
    reasons = []
    if any(math.hypot(p[0], p[1]) < STOP_RADIUS_M for p in facts.pedestrians):
        mode = "Stop"
        reasons.append("pedestrian too close")
    elif max(scores) <= OPEN_SPACE_MIN:
        mode = "Stop"
        reasons.append("no open space")
    elif any(_approaching(p) for p in facts.pedestrians):
        mode = "Slow"
        reasons.append("pedestrians approaching")
    elif facts.sign in ("stop", "yield"):
        mode = "Slow"
        reasons.append(f"{facts.sign} sign ahead")
    else:
        mode = "Normal"
    best = ranking[0]
    why = []
    if not facts.ped_near_path[best] and any(facts.ped_near_path):
        why.append("keeps away from pedestrians")
    if facts.offroad_fraction[best] < 1e-9:
        why.append("stays on road or sidewalk")
    if facts.crosswalk_crossing[best]:
        why.append("crosses at the crosswalk")
    reasons.append(f"trajectory {best} " + (", ".join(why) if why else "best aligns with the goal"))
    return RankResponse(mode, tuple(ranking), "; ".join(reasons))


def _polyline_distance(points: np.ndarray, q: np.ndarray) -> float:
    a, b = points[:-1], points[1:]
    ab = b - a
    denom = np.maximum((ab**2).sum(axis=1), 1e-12)
    t = np.clip(((q - a) * ab).sum(axis=1) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return float(np.hypot(*(proj - q).T).min())


def extract_facts(
    world: WorldState,
    candidates: CandidateSet,
    labels: Sequence[int],
    goal_body: Sequence[float],
    allowed: Iterable[Label] = WHEELED_TRAVERSABLE,
    view_range: float = 50.0,
) -> SceneFacts:
    """Build :class:`SceneFacts` for body-frame candidates at the robot pose."""
    n = len(candidates)
    pose = world.robot.pose
    allowed = {int(a) for a in allowed}
    grid = world.grid
    by_label: list[Trajectory] = [None] * n  # type: ignore[list-item]
    for i, lab in enumerate(labels):
        by_label[lab] = candidates.trajectories[i]

    c, s = math.cos(pose[2]), math.sin(pose[2])
    rv = world.robot.v
    peds = []
    for p in world.pedestrians:
        rel = world_to_body([p.position], pose)[0]
        if math.hypot(*rel) > view_range:
            continue
        vx = c * p.velocity[0] + s * p.velocity[1] - rv
        vy = -s * p.velocity[0] + c * p.velocity[1]
        peds.append((float(rel[0]), float(rel[1]), float(vx), float(vy)))

    goal_bearing = math.atan2(goal_body[1], goal_body[0])
    near, off, cross, mis = [], [], [], []
    for traj in by_label:
        wps = traj.waypoints
        near.append(any(_polyline_distance(wps, np.array(p[:2])) < PATH_CLEARANCE_M for p in peds))
        cells = rasterize_trajectory(
            Trajectory(body_to_world(wps, pose), traj.confidence), grid
        )
        inside = [cl for cl in cells if cl.inside]
        good = sum(1 for cl in inside if int(grid.labels[cl.row, cl.col]) in allowed)
        off.append(1.0 - good / len(cells))
        road = [cl for cl in inside if grid.labels[cl.row, cl.col] == Label.ROAD]
        cross.append(bool(road) and all(grid.crosswalk[cl.row, cl.col] for cl in road))
        end = wps[-1]
        b = math.atan2(end[1], end[0]) if math.hypot(*end) > 1e-9 else 0.0
        mis.append(abs(math.atan2(math.sin(b - goal_bearing), math.cos(b - goal_bearing))))

    sign = "none"
    best_d = SIGN_VIEW_M
    for sg in world.signs:
        rel = world_to_body([sg.position], pose)[0]
        d = math.hypot(*rel)
        if rel[0] > 0 and d < best_d and sg.kind != "none":
            sign, best_d = sg.kind, d
    return SceneFacts(tuple(near), tuple(off), tuple(cross), tuple(mis), tuple(peds), sign)
