#!/usr/bin/env python3
# Whole populations: every newborn starts its own copy of the birth line.
#
# tau_n is the birth time of the n-th individual.  For unit rates (a Yule
# process) tau_n grows like log n; for rates i^2 tau_n converges -- the
# population explodes in finite time.

import numpy as np

from cmjtrees.cmj import explosion_probe, simulate, tau_trajectory
from cmjtrees.purebirth import Count, Horizon
from cmjtrees.rates import RateSequence
from cmjtrees.rng import stream

yule = RateSequence.constant(1)
square = RateSequence.power(2)

g = simulate(yule, Count(10_000), stream(1))
traj = tau_trajectory(g)
print("# Yule process: tau_n against log n")
for n in (10, 100, 1000, 9999):
    print(f"n = {n:5d}  tau_n = {traj[n][1]:7.3f}  log n = {np.log(n):7.3f}")

g = simulate(square, Count(10_000), stream(1))
print("\n# rates i^2: tau_n levels off")
for n in (10, 100, 1000, 9999):
    print(f"n = {n:5d}  tau_n = {g.birth_time[n]:.6f}")

g = simulate(square, Horizon(3.0), stream(2), cap=20_000)
print(f"\nhorizon 3 with population cap 2*10^4: status = {g.status}, size = {len(g)}")

horizons = [0.5, 1.0, 2.0, 5.0, 10.0]
for name, seq in (("unit", yule), ("square", square)):
    probe = explosion_probe(seq, 1000, horizons, reps=200, seed=3)
    row = "  ".join(f"T={T:g}: {p:.2f}" for T, p, _ in probe.rows())
    print(f"P(tau_1000 <= T), {name:6s} {row}")
