#!/usr/bin/env python3
"""Sweep the critical exponent across the geometry transition.

For each ell the flat-gap ratios tau_n either decay geometrically
(degenerate geometry) or stay bounded away from zero (bounded geometry).
Writes a CSV of the fitted decay rates and an SVG of the tau curves.
"""

import argparse
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from flatcircle.pipeline import default_template, run_pipeline
from flatcircle.precision import PrecisionContext
from flatcircle.reporting import svg_line_chart, write_csv
from flatcircle.rotation import preset
from flatcircle.stats import log_decay_fit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ells", default="1.5,2,2.5,3,4")
    ap.add_argument("--n-max", type=int, default=10)
    ap.add_argument("--precision", type=int, default=512)
    ap.add_argument("--target", default="golden")
    ap.add_argument("--out", default="out/phase_transition")
    args = ap.parse_args()

    ctx = PrecisionContext(bits=args.precision)
    target = preset(args.target, args.n_max + 6)
    os.makedirs(args.out, exist_ok=True)

    rows, curves = [], {}
    for ell in args.ells.split(","):
        ell = ell.strip()
        res = run_pipeline(default_template(ell, ctx), target, args.n_max,
                           ctx, stages=("partition", "scalings"))
        ns = list(res.scalings.ns())
        taus = [float(res.scalings.tau[n]) for n in ns]
        fit = log_decay_fit(taus, ns)
        half = len(taus) // 2
        bounded = min(taus[half:]) >= 0.5 * min(taus[:half])
        regime = ("degenerate" if fit.slope < -0.1 and fit.r2 > 0.9
                  else "bounded")
        rows.append((ell, fit.slope, fit.r2, min(taus), regime))
        curves[f"ell={ell}"] = [(n, math.log(t)) for n, t in zip(ns, taus)]
        print(f"ell={ell:>4}  slope={fit.slope:+.4f}  r2={fit.r2:.4f}  "
              f"min tau={min(taus):.3e}  -> {regime}")

    write_csv(os.path.join(args.out, "phase_transition.csv"),
              ("ell", "tau_slope", "r2", "min_tau", "regime"), rows)
    svg_line_chart(os.path.join(args.out, "tau_curves.svg"), curves,
                   "log tau_n across the transition", "n", "log tau_n")


if __name__ == "__main__":
    main()
