#!/usr/bin/env python3
# Non-explosion evidence for rates lambda_i = i log i.
#
# The reciprocal series diverges, yet lambda_i / i -> infinity.  The check
# walks four stages on a grid of indices: growing slope, non-vanishing window
# sums, a witness triple (t, beta, r), and the Chernoff bound on the intensity
# falling below n^-2.  Grid evidence is an extrapolation, and the report says so.

from cmjtrees.certificates import check_condition_i, check_condition_ii, default_grid, iterated_log_window
from cmjtrees.rates import RateSequence

seq = RateSequence.iterated_log(1, 1)
grid = default_grid(2, 6, 4)

rep = check_condition_ii(seq, eps=1.0, n_grid=grid)
print("verdict:", rep.verdict)
print("witness:", rep.parameters["triple"], " window liminf proxy:", round(rep.parameters["liminf_proxy"], 4))
for e in rep.evidence:
    if e.name == "chernoff_term_log2" and e.holds is not None and e.index in (grid[8], grid[12], grid[-1]):
        print(f"  n = {e.index:8d}  log2 Chernoff term = {e.value:10.2f}  (need <= {e.threshold:.2f})")
print("notes:", *rep.notes, sep="\n  ")

print("\n# window sums against their asymptotic form (convergence is slow)")
for c, k, n in ((1, 0, 10**6), (2, 0, 10**6), (1, 1, 10**7)):
    (row,) = iterated_log_window(c, k, [n]).rows
    print(f"c={c} k={k} n={n:.0e}: exact {row[1]:.4f}  asymptotic {row[2]:.4f}  ratio {row[3]:.4f}")

print("\n# lambda_i = i fails the slope stage on its own but is dominated by i log i")
lin = RateSequence.affine(1, 0)
print("own:", check_condition_ii(lin, 1.0, grid).verdict,
      " with majorant:", check_condition_ii(lin, 1.0, grid, majorant=seq).verdict)

print("\n# the reciprocal-series check cannot decide i log i: increments shrink, but only like 1/log n")
rep_i = check_condition_i(seq, grid)
print(rep_i.verdict, "-", rep_i.notes[-1])
