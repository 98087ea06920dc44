#!/usr/bin/env python3
# One individual's birth times: a unit-rate line versus a line with rates i^2.
#
# With lambda_i = 1 the arrivals form a Poisson process; with lambda_i = i^2 the
# holding times shrink so fast that infinitely many births fit before a finite
# time (their total has mean pi^2/6).

import math

import numpy as np

from cmjtrees.purebirth import Count, Horizon, estimate_intensity, sample_arrivals
from cmjtrees.rates import RateSequence, reciprocal_partial_sum
from cmjtrees.rng import stream

unit = RateSequence.parse("constant:1")
square = RateSequence.parse("powerpa:2")

print("# first five birth times of each line (seed 1)")
print("unit   ", np.round(sample_arrivals(unit, Count(5), stream(1)).times, 3))
print("square ", np.round(sample_arrivals(square, Count(5), stream(1)).times, 3))

# how many births before t = 1?  Poisson(1) for the unit line
est = estimate_intensity(unit, 1.0, reps=20_000, seed=2)
print(f"\nunit line: mean births in [0, 1] = {est.mean:.4f} +- {est.se:.4f}")

# the square line runs out of index budget before t = 2 most of the time
est = estimate_intensity(square, 2.0, reps=200, seed=3, cap=10_000)
print(f"square line: {est.cap_hits}/{est.reps} replicates hit the 10^4-arrival cap before t = 2")
print(f"sum of 1/i^2 up to 10^6 = {reciprocal_partial_sum(square, 1, 10**6):.6f} (pi^2/6 = {math.pi**2/6:.6f})")

# a long horizon sample stays sorted and finite
s = sample_arrivals(unit, Horizon(20.0), stream(4))
print(f"\nunit line up to t = 20: {len(s)} births, last at {s.times[-1]:.3f}")
