"""Evaluation metrics over executed paths."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..sim.world import WHEELED_TRAVERSABLE, Label, SemanticGrid


class EmptyPath(ValueError):
    pass


class ZeroLength(ValueError):
    pass


def traversability_metric(
    path: Sequence[Sequence[float]], grid: SemanticGrid, allowed: Iterable[Label] = WHEELED_TRAVERSABLE
) -> float:
    """Percentage of path waypoints whose containing cell is allowed terrain."""
    pts = np.asarray(path, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise EmptyPath("path has no waypoints")
    labels = grid.label_at(pts[:, 0], pts[:, 1])
    ok = np.isin(labels, [int(a) for a in allowed])
    return 100.0 * int(ok.sum()) / len(pts)


def distance_to_target_raw(d_traj: float, d_opt: float, traj_len: float) -> float:
    if not traj_len > 0:
        raise ZeroLength("trajectory length must be positive")
    if d_traj < 0 or d_opt < 0:
        raise ValueError("distances must be non-negative")
    return 1.0 - (d_traj - d_opt) / traj_len


def distance_to_target_metric(d_traj: float, d_opt: float, traj_len: float) -> float:
    """``1 - (d_traj - d_opt) / traj_len`` clamped to [0, 1]."""
    return min(1.0, max(0.0, distance_to_target_raw(d_traj, d_opt, traj_len)))


def path_length(path: Sequence[Sequence[float]]) -> float:
    pts = np.asarray(path, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        return 0.0
    return float(np.hypot(*np.diff(pts, axis=0).T).sum())


@dataclass
class MetricsReport:
    traversability_pct: float
    distance_to_target_pct: float
    path_length_m: float
    status: str
    steps: int
    distance_to_target_raw: float | None = None
    final_goal_distance_m: float = math.nan
    latency_s: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("traversability_pct", "distance_to_target_pct"):
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise ValueError(f"{name}={v} outside [0, 100]")

    def as_dict(self, with_latency: bool = True) -> dict:
        d = asdict(self)
        if not with_latency:
            d.pop("latency_s")
        return d


def compute_report(
    path: Sequence[Sequence[float]],
    grid: SemanticGrid,
    goal: Sequence[float],
    d_opt: float,
    status: str,
    steps: int,
    allowed: Iterable[Label] = WHEELED_TRAVERSABLE,
    latency_s: dict[str, float] | None = None,
) -> MetricsReport:
    trav = traversability_metric(path, grid, allowed)
    end = np.asarray(path, dtype=float).reshape(-1, 2)[-1]
    d_traj = float(math.hypot(end[0] - goal[0], end[1] - goal[1]))
    length = path_length(path)
    try:
        raw = distance_to_target_raw(d_traj, d_opt, length)
        dtt = 100.0 * min(1.0, max(0.0, raw))
    except ZeroLength:
        # robot never moved: full marks only if it already sat at the optimum
        raw = None
        dtt = 100.0 if d_traj <= d_opt or status == "goal_reached" else 0.0
    return MetricsReport(trav, dtt, length, status, steps, raw, d_traj, dict(latency_s or {}))
