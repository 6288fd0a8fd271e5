"""Pinhole camera looking at the ground plane from the robot body."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..trajgen import CandidateSet


class UnprojectableTrajectory(ValueError):
    pass


@dataclass(frozen=True)
class CameraModel:
    """Camera at ``height`` above the body origin, optical axis along body x,
    tilted down by ``pitch``."""

    height: float = 0.8
    pitch: float = 0.26
    focal: float = 500.0
    width: int = 640
    image_height: int = 480
    cx: float | None = None
    cy: float | None = None

    def __post_init__(self):
        if self.focal <= 0 or self.width <= 0 or self.image_height <= 0:
            raise ValueError("focal length and image size must be positive")
        if not 0.0 <= self.pitch < math.pi / 2:
            raise ValueError("pitch must lie in [0, pi/2)")
        if self.cx is None:
            object.__setattr__(self, "cx", self.width / 2)
        if self.cy is None:
            object.__setattr__(self, "cy", self.image_height / 2)

    def camera_coords(self, pts):
        """Body-frame ground points (N, 2) to camera (x right, y down, z optical)."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        X, Y = pts[:, 0], pts[:, 1]
        sp, cp = math.sin(self.pitch), math.cos(self.pitch)
        xc = -Y
        yc = -X * sp + self.height * cp
        zc = X * cp + self.height * sp
        return xc, yc, zc

    def project(self, pts):
        """(u, v) pixel arrays plus a mask of points in front of the camera."""
        xc, yc, zc = self.camera_coords(pts)
        front = zc > 1e-6
        safe = np.where(front, zc, 1.0)
        u = self.cx + self.focal * xc / safe
        v = self.cy + self.focal * yc / safe
        return u, v, front

    def ground_ray(self, u, v):
        """Body-frame ground point seen at pixel (u, v); NaN above the horizon."""
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        xc = (u - self.cx) / self.focal
        yc = (v - self.cy) / self.focal
        sp, cp = math.sin(self.pitch), math.cos(self.pitch)
        # camera ray direction in body (forward, left, up) components, z_c = 1
        fwd = cp - yc * sp
        left = -xc
        up = -sp - yc * cp
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(up < -1e-9, self.height / -up, np.nan)
        return s * fwd, s * left


BEHIND = None


def project_point(cam: CameraModel, p) -> tuple[float, float] | None:
    """Pixel of a body-frame ground point, or ``None`` (Behind)."""
    u, v, front = cam.project([p])
    if not front[0]:
        return BEHIND
    return float(u[0]), float(v[0])


def number_right_to_left(candidates: CandidateSet, cam: CameraModel) -> list[int]:
    """Label per trajectory: 0 for the rightmost last waypoint in the image.

    Equal columns put the farther (smaller v) endpoint first.
    """
    keys = []
    for i, traj in enumerate(candidates.trajectories):
        px = project_point(cam, traj.waypoints[-1])
        if px is BEHIND:
            raise UnprojectableTrajectory(f"trajectory {i} ends behind the camera")
        keys.append((-px[0], px[1], i))
    labels = [0] * len(keys)
    for label, (_, _, i) in enumerate(sorted(keys)):
        labels[i] = label
    return labels
