"""Rewiring without added susceptance, and one trajectory on the original network."""
import math
import sys

from kronsync.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "results/fig08"
SEED = 2024

if __name__ == "__main__":
    code = main(["optimize", "case30", "--rewire", "--gamma", repr(math.pi / 4),
                 "--psi", "0.45", "--out", OUT])
    code = code or main(["simulate", "case30", "--random", "--sigma", "1", "--seed", str(SEED),
                         "--horizon", "20", "--out", OUT])
    sys.exit(code)
