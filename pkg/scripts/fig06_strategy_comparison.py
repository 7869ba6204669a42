"""Optimal allocation against proportional, uniform and random allocations
over 500 Gaussian step disturbances."""
import sys

from kronsync.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "results/fig06"
SEED = 2024

if __name__ == "__main__":
    sys.exit(main(["montecarlo", "case30", "--strategies", "optimal,proportional,uniform,random",
                   "--alpha", "50", "-N", "500", "--sigma", "1", "--seed", str(SEED),
                   "--dt", "0.01", "--horizon", "50", "--out", OUT]))
