"""Noiseless p_err curves (crude, old, unrenormalized, renormalized) at n = 20.

Writes results/noiseless.csv and results/noiseless.gp; render with `gnuplot -p results/noiseless.gp`.
"""

import argparse
import math
import sys
from pathlib import Path

from wimpyrg.cli import main
from wimpyrg.dist import entropy

Q = [0.20, 0.30, 0.13, 0.37]

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=40)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--outdir", default="results")
    a = ap.parse_args()
    out = Path(a.outdir)
    out.mkdir(exist_ok=True)
    h = entropy(Q)
    sys.exit(main([
        "noiseless-sweep", "--q", ",".join(map(str, Q)), "--n", "20", "--sfin", "7.5",
        "--r-min", f"{h - 0.25:.10g}", "--r-max", f"{math.log(4) - 1e-4:.10g}",
        "--steps", str(a.steps), "--jobs", str(a.jobs),
        "--out", str(out / "noiseless.csv"), "--plot", str(out / "noiseless.gp"),
    ]))
