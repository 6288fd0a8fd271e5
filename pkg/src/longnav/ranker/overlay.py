"""Perspective overlay of numbered candidate trajectories on the semantic view."""

from __future__ import annotations

import re
from pathlib import Path
from typing import Sequence

import numpy as np

from ..frames import body_to_world
from ..scoring import bresenham
from ..sim.world import Label, SemanticGrid
from ..trajgen import CandidateSet
from .camera import CameraModel

SKY = (135, 170, 210)
LABEL_COLORS = {
    Label.ROAD: (90, 90, 90),
    Label.SIDEWALK: (200, 190, 160),
    Label.VEGETATION: (60, 140, 50),
    Label.BUILDING: (150, 60, 50),
    Label.OTHER: (30, 30, 30),
}
CROSSWALK = (235, 235, 235)
TRAJ_COLORS = [
    (255, 40, 40), (40, 120, 255), (255, 200, 0), (255, 0, 255),
    (0, 230, 230), (255, 128, 0), (150, 80, 255), (0, 255, 100),
]
BOX_BG = (0, 0, 0)
GLYPH_FG = (255, 255, 255)
GLYPH_SCALE = 2

# 3x5 digit bitmaps, rows top to bottom
DIGITS = {
    "0": ("111", "101", "101", "101", "111"),
    "1": ("010", "110", "010", "010", "111"),
    "2": ("111", "001", "111", "100", "111"),
    "3": ("111", "001", "111", "001", "111"),
    "4": ("101", "101", "111", "001", "001"),
    "5": ("111", "100", "111", "001", "111"),
    "6": ("111", "100", "111", "101", "111"),
    "7": ("111", "001", "010", "010", "010"),
    "8": ("111", "101", "111", "101", "111"),
    "9": ("111", "101", "111", "001", "111"),
}


def render_ground(crop: SemanticGrid, cam: CameraModel, pose) -> np.ndarray:
    """Colour every pixel by the crop label under its ground ray."""
    h, w = cam.image_height, cam.width
    vv, uu = np.mgrid[0:h, 0:w]
    gx, gy = cam.ground_ray(uu + 0.5, vv + 0.5)
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[:] = SKY
    ground = np.isfinite(gx)
    pts = body_to_world(np.column_stack([gx[ground], gy[ground]]), pose)
    col, row = crop.to_cell(pts[:, 0], pts[:, 1])
    inside = crop.inside(col, row)
    labels = np.full(len(pts), Label.OTHER, dtype=np.uint8)
    labels[inside] = crop.labels[row[inside], col[inside]]
    cross = np.zeros(len(pts), dtype=bool)
    cross[inside] = crop.crosswalk[row[inside], col[inside]]
    palette = np.array([LABEL_COLORS[Label(i)] for i in range(len(Label))], dtype=np.uint8)
    rgb = palette[labels]
    rgb[cross] = CROSSWALK
    img[ground] = rgb
    return img


def _plot(img: np.ndarray, x: int, y: int, color) -> None:
    if 0 <= y < img.shape[0] and 0 <= x < img.shape[1]:
        img[y, x] = color


def draw_polyline(img: np.ndarray, us: Sequence[float], vs: Sequence[float], color, thickness: int = 1) -> None:
    pts = [(int(np.floor(u)), int(np.floor(v))) for u, v in zip(us, vs)]
    lim = 4 * max(img.shape)
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        if max(abs(x0), abs(y0), abs(x1), abs(y1)) > lim:
            continue  # far off-screen, skip rather than walk a huge segment
        for x, y in bresenham(x0, y0, x1, y1):
            for dx in range(-(thickness // 2), thickness // 2 + 1):
                _plot(img, x + dx, y, color)


def label_box(text: str, cu: float, cv: float, scale: int = GLYPH_SCALE) -> tuple[int, int, int, int]:
    """(left, top, width, height) of the label box centred at (cu, cv)."""
    w = (4 * len(text) + 1) * scale
    h = 7 * scale
    return int(round(cu - w / 2)), int(round(cv - h / 2)), w, h


def draw_label(img: np.ndarray, text: str, cu: float, cv: float, scale: int = GLYPH_SCALE) -> None:
    left, top, w, h = label_box(text, cu, cv, scale)
    H, W = img.shape[:2]
    img[max(top, 0):max(min(top + h, H), 0), max(left, 0):max(min(left + w, W), 0)] = BOX_BG
    for k, ch in enumerate(text):
        ox = left + (1 + 4 * k) * scale
        oy = top + scale
        for r, bits in enumerate(DIGITS[ch]):
            for c, bit in enumerate(bits):
                if bit == "1":
                    for sy in range(scale):
                        for sx in range(scale):
                            _plot(img, ox + c * scale + sx, oy + r * scale + sy, GLYPH_FG)


def render_overlay(
    crop: SemanticGrid, candidates: CandidateSet | None, labels: Sequence[int], cam: CameraModel, pose=None
) -> np.ndarray:
    """(H, W, 3) uint8 image of the scene with labelled trajectories.

    Trajectories are body-frame at ``candidates.frame_pose`` (or ``pose``).
    """
    if pose is None:
        pose = candidates.frame_pose if candidates is not None else (0.0, 0.0, 0.0)
    img = render_ground(crop, cam, pose)
    if candidates is None or len(labels) == 0:
        return img
    if len(labels) != len(candidates):
        raise ValueError("labels must cover every candidate")
    anchors = []
    for i, traj in enumerate(candidates.trajectories):
        u, v, front = cam.project(traj.waypoints)
        color = TRAJ_COLORS[labels[i] % len(TRAJ_COLORS)]
        # cut the polyline where it leaves the front half space
        keep = np.flatnonzero(~front)
        stop = keep[0] if len(keep) else len(u)
        draw_polyline(img, u[:stop], v[:stop], color, thickness=3)
        if front[-1]:
            anchors.append((str(labels[i]), u[-1], v[-1]))
    for text, u, v in anchors:
        cu = min(max(u, 0.0), cam.width - 1.0)
        cv = min(max(v, 0.0), cam.image_height - 1.0)
        draw_label(img, text, cu, cv)
    return img


def write_ppm(path: str | Path, img: np.ndarray) -> None:
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape[:2]
    Path(path).write_bytes(f"P6\n{w} {h}\n255\n".encode() + img.tobytes())


def read_ppm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = re.match(rb"P6\s+(\d+)\s+(\d+)\s+255\s", data)
    if m is None:
        raise ValueError("not an 8-bit binary PPM")
    w, h = int(m.group(1)), int(m.group(2))
    return np.frombuffer(data[m.end(): m.end() + w * h * 3], dtype=np.uint8).reshape(h, w, 3)
