"""Rewired network against the original over 500 Gaussian step disturbances."""
import math
import sys

from kronsync.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "results/fig09"
SEED = 2024

if __name__ == "__main__":
    sys.exit(main(["montecarlo", "case30", "--strategies", "rewired,original",
                   "--gamma", repr(math.pi / 4), "--psi", "0.45",
                   "-N", "500", "--sigma", "1", "--seed", str(SEED),
                   "--dt", "0.01", "--horizon", "50", "--out", OUT]))
