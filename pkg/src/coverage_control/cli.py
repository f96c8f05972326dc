"""Command line entry point: ``run``, ``validate`` and ``replay``.

Exit codes: 0 on success or convergence, 2 when a run ends without
converging, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import CoverageError
from .scenario_io import (check_descent, emit_trajectory, frame_svg, parse_scenario, read_trajectory,
                          run_scenario)


def _cmd_run(args) -> int:
    cfg = parse_scenario(Path(args.scenario).read_text())
    result = run_scenario(cfg, seed=args.seed)
    with_energy = cfg.algorithm == "pd"
    if args.out:
        out = Path(args.out)
        out.write_text(emit_trajectory(result.records, with_energy=with_energy))
        if args.svg_every:
            recs = result.records
            picks = list(range(0, len(recs), args.svg_every))
            if picks[-1] != len(recs) - 1:
                picks.append(len(recs) - 1)
            for k in picks:
                trails = [r.positions for r in recs[: k + 1]]
                path = out.with_name(f"{out.stem}_{k:06d}.svg")
                path.write_text(frame_svg(cfg, recs[k], trails))
    elif not args.summary:
        sys.stdout.write(emit_trajectory(result.records, with_energy=with_energy))
    if args.summary:
        print(json.dumps(result.summary(), sort_keys=True))
    return 0 if result.converged else 2


def _cmd_validate(args) -> int:
    cfg = parse_scenario(Path(args.scenario).read_text())
    print(f"ok: {cfg.algorithm}, n = {cfg.n}")
    return 0


def _cmd_replay(args) -> int:
    recs = read_trajectory(Path(args.trajectory).read_text())
    print(f"{len(recs)} records")
    if args.check_descent:
        bad = check_descent(recs, args.tol)
        if bad:
            print(f"descent violated at records {bad[:20]}")
            return 1
        print("descent ok")
    return 0


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1; code 2 is reserved for non-convergence
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="coverage-control", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="execute a scenario")
    run.add_argument("scenario")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--out", help="trajectory CSV path (stdout when omitted)")
    run.add_argument("--svg-every", type=int, default=0, metavar="K", help="write an SVG every K records")
    run.add_argument("--summary", action="store_true", help="print a JSON summary")
    run.set_defaults(func=_cmd_run)
    val = sub.add_parser("validate", help="parse and check a scenario")
    val.add_argument("scenario")
    val.set_defaults(func=_cmd_validate)
    rep = sub.add_parser("replay", help="read back a trajectory CSV")
    rep.add_argument("trajectory")
    rep.add_argument("--check-descent", action="store_true")
    rep.add_argument("--tol", type=float, default=1e-6, help="relative slack for the descent check")
    rep.set_defaults(func=_cmd_replay)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "svg_every", 0) < 0:
        print("error: --svg-every must be nonnegative", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (CoverageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
