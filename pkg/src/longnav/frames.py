"""Rigid 2D frame changes. A pose is ``(x, y, heading)`` of a body frame in the
world; body x points forward, y to the left."""

from __future__ import annotations

import math

import numpy as np

Pose = tuple[float, float, float]


def body_to_world(points, pose: Pose) -> np.ndarray:
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    c, s = math.cos(pose[2]), math.sin(pose[2])
    return np.column_stack([pose[0] + c * p[:, 0] - s * p[:, 1], pose[1] + s * p[:, 0] + c * p[:, 1]])


def world_to_body(points, pose: Pose) -> np.ndarray:
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    c, s = math.cos(pose[2]), math.sin(pose[2])
    dx, dy = p[:, 0] - pose[0], p[:, 1] - pose[1]
    return np.column_stack([c * dx + s * dy, -s * dx + c * dy])


def change_frame(points, from_pose: Pose, to_pose: Pose) -> np.ndarray:
    return world_to_body(body_to_world(points, from_pose), to_pose)
