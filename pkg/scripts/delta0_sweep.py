"""Sweep the control duration of behaviour I and report convergence and cost rises.

    python3 scripts/delta0_sweep.py --deltas 0.4 0.2 0.1 0.05 --horizon 60 --out sweep.csv
"""

import argparse
import csv
import logging
import sys
from pathlib import Path

from coverage_control.distributed import coverage_behavior_I
from coverage_control.scenario_io import parse_scenario

ROOT = Path(__file__).resolve().parents[1]
log = logging.getLogger("sweep")


def sweep(cfg, deltas, horizon, seed=None):
    for d in deltas:
        tr, net = coverage_behavior_I(cfg.region, cfg.initial_positions(seed), cfg.density.build(), d, horizon,
                                      cfg.network_config(seed))
        rises = tr.descent_violations(1e-6)
        if rises:
            log.warning("delta0 = %g: cost rose %d times", d, len(rises))
        h = tr.totals
        yield {"delta0": d, "events": len(tr), "HV_start": h[0], "HV_end": h[-1], "residual": tr.residuals[-1],
               "cost_rises": len(rises), "max_rise": float(max((h[k] - h[k - 1] for k in rises), default=0.0))}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", type=Path, default=ROOT / "scenarios" / "dist_I.scn")
    ap.add_argument("--deltas", type=float, nargs="+", default=[0.4, 0.2, 0.1, 0.05, 0.02])
    ap.add_argument("--horizon", type=float, default=60.0)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--out", type=Path, default=None, help="CSV file; stdout when omitted")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    cfg = parse_scenario(args.scenario.read_text())
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = None
    for row in sweep(cfg, args.deltas, args.horizon, args.seed):
        if w is None:
            w = csv.DictWriter(fh, fieldnames=list(row))
            w.writeheader()
        w.writerow(row)
        fh.flush()
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
