"""Largest feasible psi and the optimal rewiring along the psi grid, for
several cohesion arcs."""
import math
import sys

from kronsync.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "results/fig10"
GAMMAS = [math.pi / 12, math.pi / 6, math.pi / 4, math.pi / 3]

if __name__ == "__main__":
    sys.exit(main(["sweep", "case30", "--rewire", "--gamma", *map(repr, GAMMAS),
                   "--psi-step", "1e-3", "--stride", "10", "--out", OUT]))
