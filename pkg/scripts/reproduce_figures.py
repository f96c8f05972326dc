"""Run the shipped figure scenarios and write trajectories, SVG frames and summaries.

    python3 scripts/reproduce_figures.py --out runs/ [--only fig2 fig6] [--frames 6]
"""

import argparse
import json
import logging
import time
from pathlib import Path

from coverage_control.scenario_io import emit_trajectory, frame_svg, parse_scenario, run_scenario

ROOT = Path(__file__).resolve().parents[1]
FIGURES = {
    "fig2": "fig2_gaussian_flow.scn",
    "fig3": "fig3_pd.scn",
    "fig4": "fig4_ellipse.scn",
    "fig5": "fig5_disk.scn",
    "fig6": "fig6_unicycle.scn",
}


def reproduce(name: str, out: Path, frames: int) -> dict:
    cfg = parse_scenario((ROOT / "scenarios" / FIGURES[name]).read_text())
    t0 = time.perf_counter()
    res = run_scenario(cfg)
    summary = {"figure": name, "seconds": round(time.perf_counter() - t0, 2), **res.summary()}
    (out / f"{name}.csv").write_text(emit_trajectory(res.records, with_energy=cfg.algorithm == "pd"))
    recs = res.records
    picks = sorted({round(k * (len(recs) - 1) / max(frames - 1, 1)) for k in range(frames)})
    for k in picks:
        trails = [r.positions for r in recs[: k + 1]]
        (out / f"{name}_{k:06d}.svg").write_text(frame_svg(cfg, recs[k], trails))
    return summary


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs"))
    ap.add_argument("--only", nargs="*", choices=sorted(FIGURES), default=sorted(FIGURES))
    ap.add_argument("--frames", type=int, default=6, help="SVG frames per run, first and last included")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING)
    args.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for name in args.only:
        row = reproduce(name, args.out, args.frames)
        print(json.dumps(row, sort_keys=True), flush=True)
        rows.append(row)
    (args.out / "summary.json").write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
