"""
Weight precision on TSPLIB instances
====================================

Solves a few public instances at 2, 3 and 4 bits per weight and prints the
ratio to the known optimum, averaged over seeds.
"""

import json
from pathlib import Path

import numpy as np

from isingtsp.solver import SolveConfig, solve_hierarchical
from isingtsp.tsplib import read_instance

data = Path(__file__).resolve().parent.parent / "tests" / "data" / "tsplib"
optima = json.loads((data / "optima.json").read_text())

print(f"{'instance':10s} {'m':>3s}  " + "  ".join(f"B={b}" for b in (2, 3, 4)))
for name in ("eil51", "berlin52", "st70", "kroA100", "ch130"):
    inst = read_instance(data / f"{name}.tsp")
    for m in (8, 12):
        ratios = []
        for bits in (2, 3, 4):
            lengths = [
                solve_hierarchical(inst.coords, SolveConfig(m=m, bits=bits, seed=s))[1].tour_length
                for s in range(3)
            ]
            ratios.append(np.mean(lengths) / optima[name])
        print(f"{name:10s} {m:3d}  " + "  ".join(f"{r:.3f}" for r in ratios))
