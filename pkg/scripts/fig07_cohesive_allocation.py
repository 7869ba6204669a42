"""Budget allocation with the cohesion constraint gamma = pi/4, psi = 0.45."""
import math
import sys

from kronsync.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "results/fig07"

if __name__ == "__main__":
    code = main(["optimize", "case30", "--alpha", "50", "--gamma", repr(math.pi / 4),
                 "--psi", "0.45", "--out", OUT])
    code = code or main(["certify", "case30", "--gamma", repr(math.pi / 4), "--psi", "0.45",
                         "--alpha", "50", "--out", OUT])
    sys.exit(code)
