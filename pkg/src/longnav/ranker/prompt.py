"""Ranking prompt template and goal-direction discretization."""

from __future__ import annotations

import math
from dataclasses import dataclass

DIRECTIONS = ("Front", "Front Left", "Front Right", "Left", "Right", "Back")

TEMPLATE = (
    "The {n} trajectories are labeled with numbers [0-{last}] from right to left in sequence. "
    "The goal is {k} meters at [{direction}]. Rank trajectories for social navigation.\n"
    "\n"
    "1. keep away from the groups of pedestrians. The robot has three mode, Normal, Slow, and Stop. "
    "If the people are approaching, the robot needs to Slow. If people are too close or there is "
    "no open space, the robots Stops.\n"
    "2. follow the traffic rules, and if going across the street, the robot should keep in crosswalks.\n"
    "3. recognize the traffic signs and behave accordingly.\n"
    "4. avoid off-road terrain for small wheeled robots.\n"
    "\n"
    "Given the picture, the target is at {k} meters {direction}. Rank the trajectories by the "
    "criteria. output the format: [robot mode], [ranked numbers], reason"
)


@dataclass(frozen=True)
class PromptSpec:
    n: int
    goal_distance_m: float
    goal_direction: str = "Front"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.goal_distance_m > 0:
            raise ValueError("goal distance must be positive")
        if self.goal_direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.goal_direction!r}")


def format_distance(k: float) -> str:
    """Shortest exact decimal for ``k``; integral values drop the ``.0``."""
    s = repr(float(k))
    return s[:-2] if s.endswith(".0") else s


def build_prompt(spec: PromptSpec) -> str:
    k = format_distance(spec.goal_distance_m)
    return TEMPLATE.format(n=spec.n, last=spec.n - 1, k=k, direction=spec.goal_direction)


def goal_direction(bearing: float) -> str:
    """Bucket a body-frame bearing (rad, left positive) into 60 degree sectors
    centred on Front."""
    deg = math.degrees(math.atan2(math.sin(bearing), math.cos(bearing)))
    a = abs(deg)
    if a <= 30.0:
        return "Front"
    if a <= 90.0:
        return "Front Left" if deg > 0 else "Front Right"
    if a <= 150.0:
        return "Left" if deg > 0 else "Right"
    return "Back"
