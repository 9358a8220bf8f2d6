"""Noisy p_err curves for BSC(0.01), uniform input, n = 20, t-orders 2, 3, 4.

The CSV footer lists the window of converged rows for each order.
Writes results/noisy.csv and results/noisy.gp.
"""

import argparse
import sys
from pathlib import Path

from wimpyrg.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=36)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--outdir", default="results")
    a = ap.parse_args()
    out = Path(a.outdir)
    out.mkdir(exist_ok=True)
    sys.exit(main([
        "noisy-sweep", "--bsc", "0.01", "--q", "0.5,0.5", "--n", "20", "--sfin", "7.5",
        "--r-min", "0.287146", "--r-max", "0.737146", "--t-order", "2,3,4",
        "--steps", str(a.steps), "--jobs", str(a.jobs),
        "--out", str(out / "noisy.csv"), "--plot", str(out / "noisy.gp"),
    ]))
