"""GPS route handling: subgoal resampling, local tangent-plane conversion, and
subgoal progression."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

EARTH_RADIUS_M = 6_371_000.0
M_PER_DEG_LAT = EARTH_RADIUS_M * math.pi / 180.0  # 111,194.93 m (spherical)
LOCAL_VALIDITY_M = 100_000.0

DEFAULT_SPACING_M = 50.0
DEFAULT_THRESHOLD_M = 10.0
DEFAULT_GOAL_RANGE_M = 50.0


class RouteError(ValueError):
    pass


class EmptyRoute(RouteError):
    pass


class DegenerateRoute(RouteError):
    pass


class OutOfRange(RouteError):
    pass


class EmptyTrajectory(ValueError):
    pass


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0) or not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"invalid GeoPoint ({self.lat}, {self.lon})")


class LocalPoint(NamedTuple):
    """Metric offset in the local tangent plane (east, north)."""

    east: float
    north: float


def _wrap_lon(dlon: float) -> float:
    return (dlon + 180.0) % 360.0 - 180.0


def geo_to_local(origin: GeoPoint, p: GeoPoint) -> LocalPoint:
    """Equirectangular projection of ``p`` around ``origin``."""
    north = (p.lat - origin.lat) * M_PER_DEG_LAT
    east = _wrap_lon(p.lon - origin.lon) * M_PER_DEG_LAT * math.cos(math.radians(origin.lat))
    if math.hypot(east, north) >= LOCAL_VALIDITY_M:
        raise OutOfRange(f"{p} is beyond {LOCAL_VALIDITY_M / 1000:.0f} km of {origin}")
    return LocalPoint(east, north)


def local_to_geo(origin: GeoPoint, p: LocalPoint) -> GeoPoint:
    if math.hypot(p[0], p[1]) >= LOCAL_VALIDITY_M:
        raise OutOfRange(f"{p} is beyond {LOCAL_VALIDITY_M / 1000:.0f} km of origin")
    lat = origin.lat + p[1] / M_PER_DEG_LAT
    coslat = math.cos(math.radians(origin.lat))
    lon = origin.lon + p[0] / (M_PER_DEG_LAT * coslat)
    return GeoPoint(lat, _wrap_lon(lon) if not -180.0 <= lon <= 180.0 else lon)


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    dphi = phi2 - phi1
    dlmb = math.radians(_wrap_lon(b.lon - a.lon))
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


@dataclass(frozen=True)
class RoutePlan:
    subgoals: tuple[GeoPoint, ...]
    spacing_m: float = DEFAULT_SPACING_M
    active_index: int = 0
    origin: GeoPoint | None = None
    goal_reached: bool = False

    def __post_init__(self):
        if not self.subgoals:
            raise EmptyRoute("route plan has no subgoals")
        if not 0 <= self.active_index < len(self.subgoals):
            raise IndexError(f"active_index {self.active_index} out of range")
        if self.origin is None:
            object.__setattr__(self, "origin", self.subgoals[0])

    @property
    def active(self) -> GeoPoint:
        return self.subgoals[self.active_index]

    @property
    def is_last(self) -> bool:
        return self.active_index == len(self.subgoals) - 1

    def local_subgoals(self) -> list[LocalPoint]:
        return [geo_to_local(self.origin, g) for g in self.subgoals]

    def active_local(self) -> LocalPoint:
        return geo_to_local(self.origin, self.active)


def resample_route(
    polyline: Sequence[GeoPoint],
    spacing_m: float = DEFAULT_SPACING_M,
    origin: GeoPoint | None = None,
) -> RoutePlan:
    """Place subgoals at every ``spacing_m`` of arc length, plus the final point.

    Interpolation happens in the local frame anchored at ``origin`` (the first
    polyline point if omitted).
    """
    if len(polyline) < 2:
        raise EmptyRoute(f"route needs at least 2 points, got {len(polyline)}")
    if spacing_m <= 0:
        raise ValueError("spacing_m must be positive")
    origin = origin or polyline[0]
    pts = np.array([geo_to_local(origin, p) for p in polyline], dtype=float)
    seg = np.hypot(*np.diff(pts, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total <= 0.0:
        raise DegenerateRoute("route polyline has zero length")

    n_full = int(math.floor(total / spacing_m + 1e-9))
    stations = [k * spacing_m for k in range(n_full + 1) if k * spacing_m < total - 1e-6]
    stations.append(total)
    east = np.interp(stations, cum, pts[:, 0])
    north = np.interp(stations, cum, pts[:, 1])
    subgoals = [local_to_geo(origin, LocalPoint(float(e), float(n))) for e, n in zip(east, north)]
    # exact endpoints, no projection round-off
    subgoals[0] = polyline[0]
    subgoals[-1] = polyline[-1]
    return RoutePlan(tuple(subgoals), spacing_m=spacing_m, active_index=0, origin=origin)


def advance_subgoal(
    plan: RoutePlan, robot: LocalPoint, threshold_m: float = DEFAULT_THRESHOLD_M
) -> RoutePlan:
    """Move to the next subgoal once within ``threshold_m`` of the active one.

    At most one index per call. At the final subgoal the index stays put and
    ``goal_reached`` is set instead.
    """
    if threshold_m <= 0:
        raise ValueError("threshold_m must be positive")
    target = plan.active_local()
    d = math.hypot(robot[0] - target[0], robot[1] - target[1])
    if d >= threshold_m:
        return plan
    if plan.is_last:
        return plan if plan.goal_reached else replace(plan, goal_reached=True)
    return replace(plan, active_index=plan.active_index + 1)


def goal_distance_score(traj, subgoal: Sequence[float], range_m: float = DEFAULT_GOAL_RANGE_M) -> float:
    """Linear closeness score of the trajectory endpoint to ``subgoal``.

    ``traj`` is anything with a ``waypoints`` (W, 2) array in the same frame as
    ``subgoal``.
    """
    wps = np.asarray(traj.waypoints, dtype=float)
    if wps.size == 0:
        raise EmptyTrajectory("trajectory has no waypoints")
    if range_m <= 0:
        raise ValueError("range_m must be positive")
    d_end = math.hypot(wps[-1, 0] - subgoal[0], wps[-1, 1] - subgoal[1])
    return 1.0 - min(d_end, range_m) / range_m


def load_route(path: str | Path) -> list[GeoPoint]:
    """Read a ``lat,lon`` per line route file; ``#`` starts a comment."""
    points = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            lat_s, lon_s = line.split(",")
            points.append(GeoPoint(float(lat_s), float(lon_s)))
        except ValueError as exc:
            raise RouteError(f"{path}:{lineno}: bad route line {raw!r} ({exc})") from None
    return points


def save_route(path: str | Path, points: Sequence[GeoPoint]) -> None:
    lines = ["# lat,lon"] + [f"{p.lat!r},{p.lon!r}" for p in points]
    Path(path).write_text("\n".join(lines) + "\n")
