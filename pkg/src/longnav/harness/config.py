"""Episode configuration and its flat ``key = value`` file format.

Keys are dotted (``routing.spacing_m = 50``); a ``[routing]`` header line
prefixes the keys that follow it. Top level keys: ``scenario``, ``route``,
``seed``, ``max_steps``. Relative paths resolve against the config file.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..planner import DwaConfig
from ..scoring import ScoreWeights
from ..sim.world import Label


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RoutingConfig:
    spacing_m: float = 50.0
    threshold_m: float = 10.0
    gps_noise_sigma_m: float = 0.0  # 2.5 models consumer GPS; 0 keeps runs exact
    goal_range_m: float = 50.0


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.1
    n_beams: int = 180
    max_range: float = 50.0
    scan_history: int = 3
    semantic_window_m: float = 100.0


@dataclass(frozen=True)
class TrajgenConfig:
    n: int = 6
    kappa_max: float = 0.5
    d_safe_m: float = 2.0
    waypoints: int = 20
    max_turn: float = math.pi / 2


@dataclass(frozen=True)
class ScoringConfig:
    beta1: float = 0.25
    beta2: float = 0.35
    beta3: float = 0.25
    beta4: float = 0.15
    window: int = 3
    gamma: float = 0.8
    traversable: str = "road,sidewalk"

    @property
    def weights(self) -> ScoreWeights:
        return ScoreWeights(self.beta1, self.beta2, self.beta3, self.beta4)

    @property
    def allowed(self) -> frozenset[Label]:
        return frozenset(Label.parse(s) for s in self.traversable.split(",") if s.strip())


@dataclass(frozen=True)
class RankerConfig:
    backend: str = "heuristic"
    every: int = 5
    timeout_s: float = 3.0
    camera_height: float = 0.8
    camera_pitch: float = 0.26
    focal: float = 500.0
    image_width: int = 640
    image_height: int = 480


@dataclass(frozen=True)
class EpisodeConfig:
    scenario: str = ""
    route: str = ""
    seed: int = 0
    max_steps: int = 3000
    routing: RoutingConfig = field(default_factory=RoutingConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    trajgen: TrajgenConfig = field(default_factory=TrajgenConfig)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    ranker: RankerConfig = field(default_factory=RankerConfig)
    dwa: DwaConfig = field(default_factory=DwaConfig)

    def validate(self, check_files: bool = True) -> "EpisodeConfig":
        if self.max_steps <= 0:
            raise ConfigError("max_steps must be > 0")
        if check_files:
            for key in ("scenario", "route"):
                p = getattr(self, key)
                if not p or not Path(p).is_file():
                    raise ConfigError(f"{key} file not found: {p!r}")
        if self.ranker.backend not in ("heuristic", "external"):
            raise ConfigError(f"ranker.backend must be heuristic or external, got {self.ranker.backend!r}")
        if not 2 <= self.trajgen.n <= 16:
            raise ConfigError("trajgen.n must lie in [2, 16]")
        try:
            self.scoring.weights
            self.scoring.allowed
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"scoring: {exc}") from None
        return self

    def with_weights(self, w: ScoreWeights) -> "EpisodeConfig":
        sc = dataclasses.replace(self.scoring, beta1=w.beta1, beta2=w.beta2, beta3=w.beta3, beta4=w.beta4)
        return dataclasses.replace(self, scoring=sc)

    def override(self, key: str, value: Any) -> "EpisodeConfig":
        return apply_overrides(self, {key: value})

    def flat(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for f in dataclasses.fields(self):
            val = getattr(self, f.name)
            if dataclasses.is_dataclass(val):
                for sub in dataclasses.fields(val):
                    out[f"{f.name}.{sub.name}"] = getattr(val, sub.name)
            else:
                out[f.name] = val
        return out


SECTIONS = ("routing", "sim", "trajgen", "scoring", "ranker", "dwa")


def _coerce(raw: Any, default: Any, key: str) -> Any:
    if not isinstance(raw, str):
        return type(default)(raw)
    s = raw.strip().strip('"').strip("'") if isinstance(default, str) else raw.strip()
    try:
        if isinstance(default, bool):
            if s.lower() in ("1", "true", "yes", "on"):
                return True
            if s.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(s)
        if isinstance(default, int):
            return int(s)
        if isinstance(default, float):
            return float(s)
        return s
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(default).__name__}") from None


def apply_overrides(cfg: EpisodeConfig, values: dict[str, Any]) -> EpisodeConfig:
    top: dict[str, Any] = {}
    nested: dict[str, dict[str, Any]] = {s: {} for s in SECTIONS}
    for key, raw in values.items():
        if "." in key:
            sec, name = key.split(".", 1)
            if sec not in SECTIONS:
                raise ConfigError(f"unknown config section in key {key!r}")
            sub = getattr(cfg, sec)
            if name not in {f.name for f in dataclasses.fields(sub)}:
                raise ConfigError(f"unknown config key {key!r}")
            nested[sec][name] = _coerce(raw, getattr(sub, name), key)
        else:
            if key not in ("scenario", "route", "seed", "max_steps"):
                raise ConfigError(f"unknown config key {key!r}")
            top[key] = _coerce(raw, getattr(cfg, key), key)
    try:
        for sec, kv in nested.items():
            if kv:
                top[sec] = dataclasses.replace(getattr(cfg, sec), **kv)
        return dataclasses.replace(cfg, **top)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_config_text(text: str, base_dir: Path | None = None) -> EpisodeConfig:
    values: dict[str, str] = {}
    prefix = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            prefix = line[1:-1].strip()
            if prefix and prefix not in SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{prefix}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if prefix and "." not in k:
            k = f"{prefix}.{k}"
        values[k] = v
    cfg = apply_overrides(EpisodeConfig(), values).validate(check_files=False)
    if base_dir is not None:
        for key in ("scenario", "route"):
            p = getattr(cfg, key)
            if p and not Path(p).is_absolute():
                cfg = dataclasses.replace(cfg, **{key: str((base_dir / p).resolve())})
    return cfg


def load_config(path: str | Path) -> EpisodeConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, path.parent)


def format_config(cfg: EpisodeConfig) -> str:
    lines = []
    for key, val in cfg.flat().items():
        lines.append(f"{key} = {val!r}" if isinstance(val, float) else f"{key} = {val}")
    return "\n".join(lines) + "\n"
