"""
One macro, step by step
=======================

Walks a single 8-city cycle through the five macro operations, then runs
the full write-current ramp and compares the result with the exact tour.
"""

import numpy as np

from isingtsp.distance import build_distance_matrix, quantize_weights, tour_length
from isingtsp.macro import (
    MacroState,
    SpinStorage,
    anneal,
    argmax_select,
    calibrate_stochastic_model,
    candidate_set,
    mac_currents,
    macro_rng,
    stochastic_mask,
    superpose,
    update_spin,
)
from isingtsp.oracle import held_karp_cycle

rng = np.random.default_rng(3)
points = rng.uniform(0, 100, (8, 2))
dm = build_distance_matrix(points)
weights = quantize_weights(dm, bits=4)
print("distances\n", dm.d)
print("4-bit conductances (shortest pair -> 15)\n", weights.w)

# spin storage starts in input order; order 0 is the rotation anchor
spins = SpinStorage.initial(8)
print("\ninitial order", spins.assign, "length", tour_length(spins.assign, dm))

# optimize order 3: drive the rows of its two neighbours
order = 3
u = superpose(spins, order)
print("superposed input", u)

d_hat = mac_currents(weights, u)
print("column currents ", d_hat)

# at 20% switching probability only a few columns get through
model = calibrate_stochastic_model()
p = float(model.probability(420.0))
mask = stochastic_mask(8, p, rng)
cand = candidate_set(spins, order, mask)
print(f"p={p:.2f} mask {mask.astype(int)} -> candidates {np.flatnonzero(cand)}")

city = argmax_select(d_hat, cand)
spins = update_spin(spins, order, city)
print("winner", city, "-> order now", spins.assign)

# the full ramp: 1340 sweeps from 420 uA down to 353 uA
state = MacroState(weights, SpinStorage.initial(8), macro_rng(0))
result = anneal(state, dm)
for step, current, prob, length in result.trace[::200] + result.trace[-1:]:
    print(f"sweep {step:4d}  {current:6.2f} uA  p={prob:.3f}  length {length}")

best, best_tour = held_karp_cycle(dm)
print("\nannealed", result.tour, tour_length(result.tour, dm))
print("exact   ", best_tour, best)
