"""Baseline and budget-optimal allocation on the 30-bus case (alpha = 50)."""
import sys

from kronsync.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "results/fig05"

if __name__ == "__main__":
    code = main(["reduce", "case30", "--out", OUT])
    code = code or main(["optimize", "case30", "--alpha", "50", "--out", OUT])
    sys.exit(code)
