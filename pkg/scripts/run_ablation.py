#!/usr/bin/env python3
"""Full fusion vs. geometric-only on the ambiguous-boundary suite.

Runs in memory, so no scenario files are needed. Prints one row per weight
setting and the traversability gap.
"""

import argparse
import json
import logging

from longnav.harness import EpisodeConfig, compare_ablations, rows_as_dicts
from longnav.harness.ablation import Ablation
from longnav.harness.scenarios import ambiguous_suite
from longnav.scoring import ScoreWeights

ABLATIONS = [
    Ablation("full", ScoreWeights(0.25, 0.35, 0.25, 0.15)),
    Ablation("geometric", ScoreWeights(0.25, 0.0, 0.0, 0.15)),
    Ablation("no_ranker", ScoreWeights(0.25, 0.35, 0.0, 0.15)),
    Ablation("no_semantic", ScoreWeights(0.25, 0.0, 0.25, 0.15)),
]


def main() -> None:
    ap = argparse.ArgumentParser(description="weight ablation on synthetic boundary scenarios")
    ap.add_argument("-n", type=int, default=10, help="number of scenarios")
    ap.add_argument("--dt", type=float, default=0.2)
    ap.add_argument("--steps", type=int, default=1500)
    ap.add_argument("--all", action="store_true", help="also run the single-term ablations")
    ap.add_argument("--out", help="write rows as JSON")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    cfg = EpisodeConfig(max_steps=args.steps).override("sim.dt", args.dt).override("trajgen.n", 7)
    suite = [(sc.world, sc.route) for sc in ambiguous_suite(args.n)]
    rows = compare_ablations(cfg, ABLATIONS if args.all else ABLATIONS[:2], suite)
    for row in rows:
        print(row.format())
    print(f"traversability gap full - geometric: {rows[0].traversability_pct - rows[1].traversability_pct:+.1f} pp")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rows_as_dicts(rows), fh, indent=2)


if __name__ == "__main__":
    main()
