"""Closed-loop episode runner: sense, generate, score, rank, plan, step."""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import time
from collections import defaultdict, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..frames import body_to_world, world_to_body
from ..georoute import GeoPoint, RoutePlan, advance_subgoal, goal_distance_score, load_route, resample_route
from ..planner import VelocityMode, dwa_evaluate
from ..ranker import (
    CameraModel,
    PromptSpec,
    RankingService,
    extract_facts,
    goal_direction,
    make_backend,
    number_right_to_left,
    render_overlay,
    write_ppm,
)
from ..scoring import (
    aggregate_frames,
    ranking_score,
    score_candidate,
    select_trajectory,
    semantic_traversability,
)
from ..sim import Label, WorldState, load_scenario, sense_range, sense_semantics, step
from ..trajgen import ArcFanGenerator, Trajectory, VelocityHistory
from .config import EpisodeConfig
from .metrics import MetricsReport, compute_report

log = logging.getLogger(__name__)

STATUSES = ("goal_reached", "collision", "timeout")
EXIT_CODES = {"goal_reached": 0, "timeout": 2, "collision": 3}
STAGES = ("sense", "generate", "score", "rank", "plan", "step")


def _r(x: float, nd: int = 6) -> float:
    return round(float(x), nd)


@dataclass
class EpisodeLog:
    header: dict
    records: list[dict] = field(default_factory=list)
    status: str = "timeout"
    summary: dict = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [json.dumps({"type": "header", **self.header}, sort_keys=True)]
        out += [json.dumps({"type": "step", **r}, sort_keys=True) for r in self.records]
        out.append(json.dumps({"type": "end", "status": self.status, **self.summary}, sort_keys=True))
        return out

    def to_jsonl(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def read(cls, path: str | Path) -> "EpisodeLog":
        header, records, end = {}, [], {}
        for line in Path(path).read_text().splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.pop("type")
            if kind == "header":
                header = rec
            elif kind == "step":
                records.append(rec)
            elif kind == "end":
                end = rec
        status = end.pop("status", "timeout")
        return cls(header, records, status, end)

    def path(self) -> list[tuple[float, float]]:
        start = tuple(self.header["start"])
        return [start] + [(r["x"], r["y"]) for r in self.records]


def build_plan(route: Sequence[GeoPoint], origin: GeoPoint, spacing: float) -> RoutePlan:
    if len(route) == 1:
        return RoutePlan((route[0],), spacing, 0, origin)
    return resample_route(route, spacing, origin=origin)


def run_episode(
    cfg: EpisodeConfig,
    world: WorldState | None = None,
    route: Sequence[GeoPoint] | None = None,
    overlay_dir: str | Path | None = None,
    backend=None,
) -> tuple[EpisodeLog, MetricsReport]:
    """Run one closed-loop episode.

    ``world``/``route`` override the files named in ``cfg``. With
    ``overlay_dir`` set, every ranker query writes its overlay as PPM.
    """
    if world is None:
        world = load_scenario(cfg.scenario)
    if route is None:
        route = load_route(cfg.route)
    rc, sc, tc, kc, rk = cfg.routing, cfg.sim, cfg.trajgen, cfg.scoring, cfg.ranker
    weights, allowed = kc.weights, kc.allowed
    origin = world.geo_origin or route[0]
    plan = build_plan(route, origin, rc.spacing_m)
    goal = plan.local_subgoals()[-1]
    rng = np.random.default_rng(cfg.seed)
    cam = CameraModel(rk.camera_height, rk.camera_pitch, rk.focal, rk.image_width, rk.image_height)
    generator = ArcFanGenerator(tc.kappa_max, tc.waypoints, tc.d_safe_m, sc.max_range, tc.max_turn)
    service = RankingService(backend or make_backend(rk.backend, rk.timeout_s), rk.timeout_s)
    window_m = min(sc.semantic_window_m, max(world.grid.extent))
    dwa_cfg = dataclasses.replace(cfg.dwa, control_dt=sc.dt)  # the window spans one sim step
    if overlay_dir is not None:
        Path(overlay_dir).mkdir(parents=True, exist_ok=True)

    scans: deque = deque(maxlen=sc.scan_history)
    history: deque = deque(maxlen=kc.window)
    vel = VelocityHistory()
    slot_rank: dict[int, int] = {}
    mode = VelocityMode.NORMAL
    turn_hint = None
    timing: dict[str, list[float]] = defaultdict(list)

    header = {
        "scenario": str(cfg.scenario),
        "route": str(cfg.route),
        "seed": cfg.seed,
        "config": {k: v for k, v in cfg.flat().items() if k not in ("scenario", "route")},
        "start": [world.robot.x, world.robot.y],
        "goal": [goal[0], goal[1]],
        "d_opt": world.d_opt,
        "subgoals": [list(p) for p in plan.local_subgoals()],
        "traversable": sorted(a.name.lower() for a in allowed),
    }
    elog = EpisodeLog(header)
    path = [(world.robot.x, world.robot.y)]
    status = "timeout"

    for k in range(cfg.max_steps + 1):
        robot = world.robot
        fix = (robot.x, robot.y)
        if rc.gps_noise_sigma_m > 0:
            noise = rng.normal(0.0, rc.gps_noise_sigma_m, 2)
            fix = (robot.x + noise[0], robot.y + noise[1])
        prev_index = plan.active_index
        plan = advance_subgoal(plan, fix, rc.threshold_m)
        if plan.goal_reached:
            status = "goal_reached"
            break
        if k == cfg.max_steps:
            break
        sub = plan.active_local()
        fix_pose = (fix[0], fix[1], robot.heading)
        sub_body = world_to_body([sub], fix_pose)[0]

        t0 = time.perf_counter()
        scan = sense_range(world, sc.n_beams, sc.max_range)
        scans.append(scan)
        crop = sense_semantics(world, window_m)
        t1 = time.perf_counter()
        cands = generator.generate(list(scans), vel, tc.n, pose=robot.pose, timestamp=world.time)
        history.append(cands)
        agg = aggregate_frames(list(history), robot.pose, kc.window, kc.gamma)
        t2 = time.perf_counter()

        ranked_now = False
        rank_source = ""
        if k % rk.every == 0 or not slot_rank:
            labels = number_right_to_left(cands, cam)
            facts = extract_facts(world, cands, labels, sub_body, allowed, sc.max_range)
            dist = math.hypot(*sub_body)
            spec = PromptSpec(tc.n, max(round(dist, 1), 0.1), goal_direction(math.atan2(sub_body[1], sub_body[0])))
            image = None
            if overlay_dir is not None or rk.backend == "external":
                image = render_overlay(crop, cands, labels, cam)
            resp, rank_source = service.rank(spec, facts, image)
            if overlay_dir is not None:
                write_ppm(Path(overlay_dir) / f"overlay_{k:05d}.ppm", image)
            slot_rank = {slot: resp.position_of(labels[slot]) for slot in range(tc.n)}
            mode = VelocityMode(resp.mode)
            ranked_now = True
        t3 = time.perf_counter()

        scored, world_trajs = [], []
        for i, traj in enumerate(agg.trajectories):
            wt = Trajectory(body_to_world(traj.waypoints, robot.pose), traj.confidence)
            world_trajs.append(wt)
            t = semantic_traversability(wt, crop, allowed)
            g = goal_distance_score(traj, sub_body, rc.goal_range_m)
            r = ranking_score(slot_rank[agg.slots[i]], tc.n) if agg.ages[i] == 0 else 0.0
            scored.append(score_candidate(i, traj.confidence, t, r, g, weights))
        best = select_trajectory(agg, scored, weights)
        t4 = time.perf_counter()

        decision = dwa_evaluate(robot, world_trajs[best], scan, mode, dwa_cfg, turn_hint)
        turn_hint = decision.turn_side if decision.recovery else None
        t5 = time.perf_counter()
        world = step(world, decision.command, sc.dt)
        t6 = time.perf_counter()
        vel.push(world.time, decision.v, decision.w)
        path.append((world.robot.x, world.robot.y))

        # ranker time is reported separately from the rest of scoring
        for name, dt_s in zip(STAGES, (t1 - t0, t2 - t1, t4 - t3, t3 - t2, t5 - t4, t6 - t5)):
            if name != "rank" or ranked_now:
                timing[name].append(dt_s)

        r_ = world.robot
        elog.records.append(
            {
                "step": k,
                "t": _r(world.time, 9),
                "x": _r(r_.x),
                "y": _r(r_.y),
                "heading": _r(r_.heading),
                "v": _r(r_.v),
                "w": _r(r_.w),
                "fix": [_r(fix[0]), _r(fix[1])],
                "active_index": plan.active_index,
                "advanced": plan.active_index != prev_index,
                "subgoal": [_r(sub[0]), _r(sub[1])],
                "subgoal_dist": _r(math.hypot(fix[0] - sub[0], fix[1] - sub[1])),
                "selected": best,
                "mode": mode.value,
                "ranked": ranked_now,
                "rank_source": rank_source,
                "command": [_r(decision.v), _r(decision.w)],
                "recovery": decision.recovery,
                "scores": [[_r(s.c), _r(s.t), _r(s.r), _r(s.g), _r(s.total)] for s in scored],
                "label": Label(int(world.grid.label_at(r_.x, r_.y))).name.lower(),
                "collision": world.collision_reason,
            }
        )
        if world.collided:
            status = "collision"
            break

    service.close()
    elog.status = status
    latency = {name: float(np.mean(v)) for name, v in timing.items() if v}
    report = compute_report(path, world.grid, goal, world.d_opt, status, len(elog.records), allowed, latency)
    elog.summary = {"steps": len(elog.records), "metrics": report.as_dict(with_latency=False)}
    return elog, report


def metrics_from_log(elog: EpisodeLog, world: WorldState | None = None) -> MetricsReport:
    """Recompute metrics from a log; the scenario is reloaded from the header."""
    if world is None:
        world = load_scenario(elog.header["scenario"])
    allowed = [Label[name.upper()] for name in elog.header.get("traversable", ["road", "sidewalk"])]
    return compute_report(
        elog.path(), world.grid, elog.header["goal"], elog.header.get("d_opt", world.d_opt),
        elog.status, len(elog.records), allowed,
    )
