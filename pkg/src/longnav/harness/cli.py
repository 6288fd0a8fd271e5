"""Command line entry point: ``longnav run | metrics | ablate``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..georoute import RouteError
from ..sim.scenario_io import ParseError
from .ablation import compare_ablations, load_ablations, rows_as_dicts
from .config import ConfigError, load_config
from .episode import EXIT_CODES, EpisodeLog, metrics_from_log, run_episode

EXIT_CONFIG = 64


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="longnav", description="Long-range navigation simulator and evaluation harness.")
    p.add_argument("-v", "--verbose", action="store_true", help="log ranker repairs and fallbacks")
    sub = p.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="run one episode")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--dump-overlays", action="store_true", help="write every ranker overlay as PPM")
    run.add_argument("--out", default="out", help="output directory (default: out)")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")

    met = sub.add_parser("metrics", help="recompute metrics from an episode log")
    met.add_argument("--log", required=True)
    met.add_argument("--scenario", help="scenario file, if not the one named in the log")

    abl = sub.add_parser("ablate", help="compare weight settings on the configured scenario set")
    abl.add_argument("--config", required=True)
    abl.add_argument("--ablations", required=True)
    abl.add_argument("--out", help="write the table as JSON here")
    abl.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return p


def _load(path: str, sets: list[str], seed: int | None = None):
    cfg = load_config(path)
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        cfg = cfg.override(k.strip(), v.strip())
    if seed is not None:
        cfg = cfg.override("seed", seed)
    return cfg


def _run(args) -> int:
    cfg = _load(args.config, args.set, args.seed).validate()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    elog, report = run_episode(cfg, overlay_dir=out / "overlays" if args.dump_overlays else None)
    elog.write(out / "episode.jsonl")
    (out / "metrics.json").write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n")
    print(json.dumps(report.as_dict(with_latency=False), sort_keys=True))
    return EXIT_CODES[elog.status]


def _metrics(args) -> int:
    elog = EpisodeLog.read(args.log)
    world = None
    if args.scenario:
        from ..sim import load_scenario

        world = load_scenario(args.scenario)
    report = metrics_from_log(elog, world)
    print(json.dumps(report.as_dict(with_latency=False), sort_keys=True))
    return 0


def _ablate(args) -> int:
    cfg = _load(args.config, args.set)
    rows = compare_ablations(cfg, load_ablations(args.ablations))
    for row in rows:
        print(row.format())
    if args.out:
        Path(args.out).write_text(json.dumps(rows_as_dicts(rows), indent=2) + "\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return {"run": _run, "metrics": _metrics, "ablate": _ablate}[args.cmd](args)
    except (ConfigError, ParseError, RouteError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
