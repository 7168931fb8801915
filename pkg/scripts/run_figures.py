#!/usr/bin/env python3
"""Run every committed experiment config and (optionally) render the figures.

    python scripts/run_figures.py --out-dir results [--workers 4] [--plots]

Desk-scale settings finish in a few minutes; pass --trials to push the
outage runs further on bigger hardware.
"""

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

EXPERIMENTS = [
    ("outage", "fig2_outage.json"),
    ("pdf", "fig3_pdf.json"),
    ("hardening", "fig4_hardening.json"),
    ("power-pdec", "fig5_power_pdec.json"),
    ("power-m", "fig6_power_m_v15.json"),
    ("power-m", "fig6_power_m_v5.json"),
    ("recycling", "fig7_recycling.json"),
    ("power-m", "fig8_power_m_gstbc_v5.json"),
    ("power-m", "fig9_power_m_gstbc_v15.json"),
    ("bounds-compare", "bounds_compare.json"),
]

FIGURES = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"]


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--plots", action="store_true", help="render figures (needs figplots)")
    args = ap.parse_args()

    for sub, config in EXPERIMENTS:
        cmd = [sys.executable, "-m", "agedmimo.cli", sub,
               "--config", str(ROOT / "configs" / config),
               "--out-dir", args.out_dir, "--workers", str(args.workers)]
        if args.trials is not None and sub in ("outage", "recycling"):
            cmd += ["--trials", str(args.trials)]
        print("+", " ".join(cmd), flush=True)
        subprocess.run(cmd, check=True)

    if args.plots:
        for fig in FIGURES:
            spec = ROOT / "figplots" / "specs" / f"{fig}.json"
            out = Path(args.out_dir) / f"{fig}.png"
            cmd = [sys.executable, "-m", "figplots.cli",
                   "--spec", str(spec), "--out", str(out),
                   "--csv-dir", args.out_dir]
            print("+", " ".join(cmd), flush=True)
            subprocess.run(cmd, check=True)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
