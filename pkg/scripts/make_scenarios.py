#!/usr/bin/env python3
"""Write the synthetic scenario sets used by the configs in ``configs/``.

Layout under ``--out`` (default ``scenarios/``)::

    corridor.scn/.route   walled.scn/.route   route_400m.scn/.route
    mazes/maze_<i>.scn/.route
    boundary/boundary_<i>.scn/.route
"""

import argparse
from pathlib import Path

from longnav.harness.scenarios import ambiguous_suite, long_route, maze_suite, straight_corridor, walled_corridor


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="scenarios")
    ap.add_argument("--mazes", type=int, default=5)
    ap.add_argument("--boundaries", type=int, default=10)
    args = ap.parse_args()
    out = Path(args.out)

    for sc in (straight_corridor(), walled_corridor(), long_route(400.0)):
        sc.save(out)
        print(f"{sc.name:<14} d_opt={sc.world.d_opt:.2f} m")
    for sub, suite in (("mazes", maze_suite(args.mazes)), ("boundary", ambiguous_suite(args.boundaries))):
        for sc in suite:
            sc.save(out / sub)
        print(f"{sub:<14} {len(suite)} scenarios")


if __name__ == "__main__":
    main()
