"""Per-candidate scores and weighted trajectory selection."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple, Sequence

from .frames import Pose
from .sim.world import WHEELED_TRAVERSABLE, Label, SemanticGrid
from .trajgen import CandidateSet, Trajectory, transform_candidates

DEFAULT_GAMMA = 0.8
DEFAULT_WINDOW = 3


class EmptyRasterization(ValueError):
    pass


class RankOutOfRange(ValueError):
    pass


class MissingScore(ValueError):
    pass


class EmptyHistory(ValueError):
    pass


class Cell(NamedTuple):
    col: int
    row: int
    inside: bool


@dataclass(frozen=True)
class ScoreWeights:
    beta1: float = 0.25  # geometric confidence
    beta2: float = 0.35  # semantic traversability
    beta3: float = 0.25  # ranking
    beta4: float = 0.15  # goal distance

    def __post_init__(self):
        ws = self.as_tuple()
        if any(w < 0 for w in ws) or not any(w > 0 for w in ws):
            raise ValueError(f"weights must be >= 0 and not all zero, got {ws}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.beta1, self.beta2, self.beta3, self.beta4)

    def scaled(self, lam: float) -> "ScoreWeights":
        return ScoreWeights(*(lam * w for w in self.as_tuple()))


@dataclass(frozen=True)
class ScoredCandidate:
    index: int
    c: float
    t: float
    r: float
    g: float
    total: float

    def __post_init__(self):
        for name in ("c", "t", "r", "g"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"score {name}={v} outside [0, 1]")


def weighted_total(c: float, t: float, r: float, g: float, w: ScoreWeights) -> float:
    return w.beta1 * c + w.beta2 * t + w.beta3 * r + w.beta4 * g


def score_candidate(index: int, c: float, t: float, r: float, g: float, w: ScoreWeights) -> ScoredCandidate:
    return ScoredCandidate(index, c, t, r, g, weighted_total(c, t, r, g, w))


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def bresenham(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Classic 8-connected line, both endpoints included.

    One cell per step of the major axis; the minor coordinate is the nearest
    integer to the ideal line, exact half-way ties rounding toward the lower
    endpoint. Reversing the segment reverses the cell list.
    """
    dx, dy = x1 - x0, y1 - y0
    if abs(dy) < abs(dx):
        if dx < 0:
            return bresenham(x1, y1, x0, y0)[::-1]
        s = 1 if dy >= 0 else -1
        return [(x0 + i, y0 + s * _ceil_div(2 * i * abs(dy) - dx, 2 * dx)) for i in range(dx + 1)]
    if dy < 0:
        return bresenham(x1, y1, x0, y0)[::-1]
    if dy == 0:
        return [(x0, y0)]
    s = 1 if dx >= 0 else -1
    return [(x0 + s * _ceil_div(2 * i * abs(dx) - dy, 2 * dy), y0 + i) for i in range(dy + 1)]


def rasterize_trajectory(traj: Trajectory, grid: SemanticGrid) -> list[Cell]:
    """Cells under the waypoint polyline; ``traj`` must be in the grid's frame."""
    cols, rows = grid.to_cell(traj.waypoints[:, 0], traj.waypoints[:, 1])
    cells: list[tuple[int, int]] = []
    for i in range(len(cols)):
        if i == 0:
            seg = [(int(cols[0]), int(rows[0]))]
        else:
            seg = bresenham(int(cols[i - 1]), int(rows[i - 1]), int(cols[i]), int(rows[i]))
        for cell in seg:
            if not cells or cells[-1] != cell:
                cells.append(cell)
    w, h = grid.width, grid.height
    return [Cell(c, r, 0 <= c < w and 0 <= r < h) for c, r in cells]


def semantic_traversability(
    traj: Trajectory, grid: SemanticGrid, allowed: Iterable[Label] = WHEELED_TRAVERSABLE
) -> float:
    """Fraction of rasterized cells whose label is allowed; off-grid cells fail."""
    cells = rasterize_trajectory(traj, grid)
    if not cells:
        raise EmptyRasterization("trajectory rasterized to zero cells")
    allowed = {int(a) for a in allowed}
    good = sum(1 for c in cells if c.inside and int(grid.labels[c.row, c.col]) in allowed)
    return good / len(cells)


def ranking_score(p: int, n: int) -> float:
    """(n - p) / n for 0-indexed rank position ``p``."""
    if n < 1 or not 0 <= p < n:
        raise RankOutOfRange(f"rank position {p} not in [0, {n})")
    return (n - p) / n


def argmax_lowest(totals: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(totals)):
        if totals[i] > totals[best]:
            best = i
    return best


def select_trajectory(candidates: CandidateSet, scores: Sequence[ScoredCandidate], w: ScoreWeights) -> int:
    """Index of the highest weighted total, lowest index on ties."""
    n = len(candidates)
    by_index = {}
    for s in scores:
        if s.index in by_index:
            raise MissingScore(f"duplicate score for candidate {s.index}")
        by_index[s.index] = s
    if sorted(by_index) != list(range(n)):
        raise MissingScore(f"scores cover {sorted(by_index)}, expected 0..{n - 1}")
    totals = [weighted_total(*(getattr(by_index[i], k) for k in "ctrg"), w) for i in range(n)]
    return argmax_lowest(totals)


def aggregate_frames(
    history: Sequence[CandidateSet],
    current_pose: Pose,
    window: int = DEFAULT_WINDOW,
    gamma: float = DEFAULT_GAMMA,
) -> CandidateSet:
    """Merge the last ``window`` candidate sets in the current body frame.

    Newest trajectories come first; confidences decay by ``gamma**age``.
    """
    if not history:
        raise EmptyHistory("no candidate sets to aggregate")
    if window < 1:
        raise ValueError("window must be >= 1")
    recent = list(history[-window:])[::-1]
    trajs, ages, slots = [], [], []
    for age, cs in enumerate(recent):
        moved = transform_candidates(cs, cs.frame_pose, current_pose)
        decay = gamma**age
        for traj, slot, a0 in zip(moved.trajectories, cs.slots, cs.ages):
            trajs.append(replace(traj, confidence=traj.confidence * decay) if age else traj)
            ages.append(a0 + age)
            slots.append(slot)
    return CandidateSet(tuple(trajs), tuple(current_pose), recent[0].timestamp, tuple(ages), tuple(slots))

