"""Print the diagnostics block for the noiseless reference point (n = 20, dR = -0.15825)."""

import sys

from wimpyrg.cli import main

if __name__ == "__main__":
    sys.exit(main(["diag", "--q", "0.20,0.30,0.13,0.37", "--n", "20", "--dr", "-0.15825", "--sfin", "7.5"]))
