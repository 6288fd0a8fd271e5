"""Plain-text scenario files.

Layout (``#`` comments and blank lines are ignored)::

    [world]
    time = 0.0
    geo_origin = 38.8315, -77.3075
    d_opt = 0.0
    [grid]
    width = 4
    height = 2
    resolution = 0.5
    origin = 0.0, 0.0
    [labels]
    RRSS        # first row listed is the top (northmost) grid row
    VVBB
    [crosswalk]
    1100
    0000
    [elevation]   # optional, whitespace separated floats, same row order
    [robot]
    x = 0.5
    y = 0.5
    heading = 0.0
    [pedestrians]
    x, y, vx, vy, group
    [signs]
    x, y, kind
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..georoute import GeoPoint, LocalPoint
from .world import Label, Pedestrian, RobotState, SemanticGrid, Sign, WorldState

SECTIONS = ("world", "grid", "labels", "crosswalk", "elevation", "robot", "pedestrians", "signs")


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {msg}" if where else msg)
        self.line = line
        self.field = field


def _floats(text: str, n: int, line: int, field: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise ParseError(f"expected {n} comma separated numbers, got {text!r}", line, field) from None
    if len(vals) != n:
        raise ParseError(f"expected {n} values, got {len(vals)}", line, field)
    return vals


def _split_sections(text: str) -> dict[str, list[tuple[int, str]]]:
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in SECTIONS:
                raise ParseError(f"unknown section [{current}]", lineno)
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", lineno)
            sections[current] = []
            continue
        if current is None:
            raise ParseError("content before first section header", lineno)
        sections[current].append((lineno, line))
    return sections


def _keyvals(lines: list[tuple[int, str]], section: str) -> dict[str, tuple[int, str]]:
    out = {}
    for lineno, line in lines:
        if "=" not in line:
            raise ParseError(f"expected key = value in [{section}]", lineno)
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = (lineno, v)
    return out


def _require(kv: dict, key: str, section: str, header_line: int | None = None):
    if key not in kv:
        raise ParseError(f"missing key in [{section}]", header_line, key)
    return kv[key]


def _rows(lines: list[tuple[int, str]], height: int, width: int, section: str, parse_row):
    if len(lines) != height:
        # name the first absent row so the diagnostic points somewhere useful
        missing = len(lines)
        raise ParseError(
            f"[{section}] has {len(lines)} rows, expected {height}; row {missing} missing"
            if len(lines) < height
            else f"[{section}] has {len(lines)} rows, expected {height}",
            lines[-1][0] if lines else None,
            f"{section} row {missing}" if len(lines) < height else section,
        )
    arr = []
    for i, (lineno, line) in enumerate(lines):
        row = parse_row(line, lineno, f"{section} row {i}")
        if len(row) != width:
            raise ParseError(f"row has {len(row)} cells, expected {width}", lineno, f"{section} row {i}")
        arr.append(row)
    # file lists the top row first
    return np.array(arr[::-1])


def _label_row(line, lineno, field):
    try:
        return [Label.from_char(c) for c in line.replace(" ", "")]
    except ValueError:
        raise ParseError(f"bad label characters in {line!r} (use R/S/V/B/O)", lineno, field) from None


def _mask_row(line, lineno, field):
    s = line.replace(" ", "")
    if set(s) - {"0", "1"}:
        raise ParseError(f"crosswalk rows use 0/1, got {line!r}", lineno, field)
    return [c == "1" for c in s]


def _elev_row(line, lineno, field):
    try:
        return [float(t) for t in line.split()]
    except ValueError:
        raise ParseError(f"bad elevation row {line!r}", lineno, field) from None


def parse_scenario(text: str) -> WorldState:
    sec = _split_sections(text)
    for name in ("grid", "labels", "robot"):
        if name not in sec:
            raise ParseError(f"missing section [{name}]")

    g = _keyvals(sec["grid"], "grid")
    try:
        width = int(_require(g, "width", "grid")[1])
        height = int(_require(g, "height", "grid")[1])
        resolution = float(_require(g, "resolution", "grid")[1])
    except ValueError as exc:
        raise ParseError(str(exc), field="grid") from None
    origin = LocalPoint(0.0, 0.0)
    if "origin" in g:
        ln, v = g["origin"]
        origin = LocalPoint(*_floats(v, 2, ln, "origin"))

    labels = _rows(sec["labels"], height, width, "labels", _label_row).astype(np.uint8)
    cross = None
    if "crosswalk" in sec:
        cross = _rows(sec["crosswalk"], height, width, "crosswalk", _mask_row).astype(bool)
    elev = None
    if sec.get("elevation"):
        elev = _rows(sec["elevation"], height, width, "elevation", _elev_row).astype(float)
    try:
        grid = SemanticGrid(labels, resolution, origin, cross, elev)
    except ValueError as exc:
        raise ParseError(str(exc), field="grid") from None

    r = _keyvals(sec["robot"], "robot")
    try:
        robot = RobotState(**{k: float(r[k][1]) for k in ("x", "y", "heading", "v", "w") if k in r})
    except ValueError as exc:
        raise ParseError(str(exc), field="robot") from None
    for k in ("x", "y"):
        _require(r, k, "robot")

    peds = []
    for lineno, line in sec.get("pedestrians", []):
        vals = _floats(line, 5, lineno, "pedestrians")
        try:
            peds.append(Pedestrian(LocalPoint(vals[0], vals[1]), (vals[2], vals[3]), int(vals[4])))
        except ValueError as exc:
            raise ParseError(str(exc), lineno, "pedestrians") from None

    signs = []
    for lineno, line in sec.get("signs", []):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ParseError("expected x, y, kind", lineno, "signs")
        try:
            signs.append(Sign(LocalPoint(float(parts[0]), float(parts[1])), parts[2]))
        except ValueError as exc:
            raise ParseError(str(exc), lineno, "signs") from None

    w = _keyvals(sec.get("world", []), "world")
    time = float(w["time"][1]) if "time" in w else 0.0
    d_opt = float(w["d_opt"][1]) if "d_opt" in w else 0.0
    geo = None
    if "geo_origin" in w:
        ln, v = w["geo_origin"]
        try:
            geo = GeoPoint(*_floats(v, 2, ln, "geo_origin"))
        except ValueError as exc:
            raise ParseError(str(exc), ln, "geo_origin") from None

    world = WorldState(grid, robot, tuple(peds), tuple(signs), time, geo, d_opt)
    if not grid.inside(*grid.to_cell(robot.x, robot.y)):
        raise ParseError("robot lies outside the grid", field="robot")
    return world


def format_scenario(world: WorldState) -> str:
    g = world.grid
    out = ["[world]", f"time = {world.time!r}", f"d_opt = {world.d_opt!r}"]
    if world.geo_origin is not None:
        out.append(f"geo_origin = {world.geo_origin.lat!r}, {world.geo_origin.lon!r}")
    out += [
        "[grid]",
        f"width = {g.width}",
        f"height = {g.height}",
        f"resolution = {g.resolution!r}",
        f"origin = {g.origin[0]!r}, {g.origin[1]!r}",
        "[labels]",
    ]
    out += ["".join(Label(c).char for c in row) for row in g.labels[::-1]]
    if g.crosswalk.any():
        out.append("[crosswalk]")
        out += ["".join("1" if c else "0" for c in row) for row in g.crosswalk[::-1]]
    if np.any(g.elevation != 0):
        out.append("[elevation]")
        out += [" ".join(repr(float(e)) for e in row) for row in g.elevation[::-1]]
    r = world.robot
    out += ["[robot]", f"x = {r.x!r}", f"y = {r.y!r}", f"heading = {r.heading!r}", f"v = {r.v!r}", f"w = {r.w!r}"]
    if world.pedestrians:
        out.append("[pedestrians]")
        for p in world.pedestrians:
            out.append(f"{p.position[0]!r}, {p.position[1]!r}, {p.velocity[0]!r}, {p.velocity[1]!r}, {p.group_id}")
    if world.signs:
        out.append("[signs]")
        out += [f"{s.position[0]!r}, {s.position[1]!r}, {s.kind}" for s in world.signs]
    return "\n".join(out) + "\n"


def load_scenario(path: str | Path) -> WorldState:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(text)


def save_scenario(world: WorldState, path: str | Path) -> None:
    Path(path).write_text(format_scenario(world))
