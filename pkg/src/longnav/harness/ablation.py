"""Run weight ablations over a fixed scenario set."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..georoute import GeoPoint, load_route
from ..scoring import ScoreWeights
from ..sim import WorldState, load_scenario
from .config import ConfigError, EpisodeConfig
from .episode import run_episode


@dataclass(frozen=True)
class Ablation:
    name: str
    weights: ScoreWeights


@dataclass(frozen=True)
class AblationRow:
    name: str
    weights: tuple[float, float, float, float]
    episodes: int
    traversability_pct: float
    distance_to_target_pct: float
    path_length_m: float
    goal_reached: int
    collisions: int

    def format(self) -> str:
        b = ", ".join(f"{w:g}" for w in self.weights)
        return (
            f"{self.name:<16} [{b}]  trav={self.traversability_pct:6.2f}%  dtt={self.distance_to_target_pct:6.2f}%"
            f"  len={self.path_length_m:7.2f}m  goal={self.goal_reached}/{self.episodes}  coll={self.collisions}"
        )


def parse_ablations(text: str) -> list[Ablation]:
    """``name = b1, b2, b3, b4`` per line; ``#`` starts a comment."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"ablations line {lineno}: expected name = b1, b2, b3, b4")
        name, rhs = (s.strip() for s in line.split("=", 1))
        try:
            vals = [float(v) for v in rhs.split(",")]
            if len(vals) != 4:
                raise ValueError(f"need 4 weights, got {len(vals)}")
            out.append(Ablation(name, ScoreWeights(*vals)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"ablations line {lineno}: {exc}") from None
    return out


def load_ablations(path: str | Path) -> list[Ablation]:
    try:
        return parse_ablations(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read ablations {path}: {exc}") from None


def scenario_set(cfg: EpisodeConfig) -> list[tuple[WorldState, list[GeoPoint]]]:
    """A directory in ``cfg.scenario`` means every ``*.scn`` in it, each
    paired with the ``.route`` of the same stem."""
    p = Path(cfg.scenario)
    if p.is_dir():
        pairs = []
        for scn in sorted(p.glob("*.scn")):
            rte = scn.with_suffix(".route")
            if not rte.is_file():
                raise ConfigError(f"no route file for {scn}")
            pairs.append((load_scenario(scn), load_route(rte)))
        if not pairs:
            raise ConfigError(f"no .scn files in {p}")
        return pairs
    cfg.validate()
    return [(load_scenario(cfg.scenario), load_route(cfg.route))]


def compare_ablations(
    cfg: EpisodeConfig,
    ablations: Sequence[Ablation],
    scenarios: Sequence[tuple[WorldState, Sequence[GeoPoint]]] | None = None,
) -> list[AblationRow]:
    if len(ablations) < 2:
        raise ValueError("compare_ablations needs at least two ablations")
    if scenarios is None:
        scenarios = scenario_set(cfg)
    rows = []
    for ab in ablations:
        c = cfg.with_weights(ab.weights)
        reports = [run_episode(c, world, route)[1] for world, route in scenarios]
        rows.append(
            AblationRow(
                ab.name,
                ab.weights.as_tuple(),
                len(reports),
                float(np.mean([r.traversability_pct for r in reports])),
                float(np.mean([r.distance_to_target_pct for r in reports])),
                float(np.mean([r.path_length_m for r in reports])),
                sum(r.status == "goal_reached" for r in reports),
                sum(r.status == "collision" for r in reports),
            )
        )
    return rows


def rows_as_dicts(rows: Sequence[AblationRow]) -> list[dict]:
    return [dataclasses.asdict(r) for r in rows]
