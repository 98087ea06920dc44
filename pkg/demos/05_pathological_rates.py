#!/usr/bin/env python3
# An explosive rate sequence whose reciprocal series diverges.
#
# Rates: 1, then alpha_k = 2^(2^(k^3)) repeated d_k = 4^(k^2) times, then 1
# again, for k = 1, 2, ...  The ones make sum 1/lambda_i infinite; the huge
# blocks make whole families of births happen in (almost) no time.  The
# certificate tracks log2 lower bounds on the probability that one individual
# produces more than M_{i+1} children before 2^-i.

from cmjtrees.certificates import check_condition_i, counterexample_certificate, default_grid, partition
from cmjtrees.cmj import simulate
from cmjtrees.purebirth import Count
from cmjtrees.rates import RateSequence
from cmjtrees.rng import stream

seq = RateSequence.pathological()
print("log2 of the first rates:", [seq.log2(i) for i in range(1, 8)])
print(check_condition_i(seq, default_grid()).notes[-2])

rep = counterexample_certificate(300)
print("\nverdict for i <= 300:", rep.verdict)
print("  i   log2 M_i   main-product log2")
for r in rep.rows:
    if r["i"] in (1, 2, 5, 10, 11, 12, 20, 40, 100, 244, 245, 246, 300):
        print(f"{r['i']:4d} {r['M_log2']:10.1f} {r['main_product_log2']:16.3f}")
print(*rep.notes[2:], sep="\n")
print("\nlast block entering the Gamma set:", partition(244)[1], "->", partition(245)[1])

rep40 = counterexample_certificate(40)
print("verdict for i <= 40:", rep40.verdict, "| positive and increasing from i =",
      rep40.parameters["positive_increasing_from"])

g = simulate(seq, Count(5000), stream(1))
print(f"\nsimulated 5000 individuals: {g.underflows} holding times underflowed to zero; "
      f"last birth at {g.birth_time[-1]:.4f}")
