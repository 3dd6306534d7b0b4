# Build quadratic stochastic operators and classify them.
#
# A QSO is defined by heredity coefficients p[i,j,k] (parents i,j -> child k),
# nonnegative with unit row sums.  Three classical patterns matter here:
# Volterra (the child repeats a parent), strictly non-Volterra (it never
# does), and two-sex operators (F-QSOs), whose same-sex pairs always produce
# the absorbing "empty body" state 0.

import numpy as np

from qsodyn import (
    build_fqso_m2,
    classify,
    count_first_row,
    cubic_from_skew,
    preset,
    SkewMatrix,
    validate_stochastic,
)

# The three-state two-sex family: one male (state 1), one female (state 2),
# and the free offspring distribution (a, b, c) of the single mixed pair.
P = build_fqso_m2(a=0.2, b=0.5, c=0.3)
print("three-state two-sex operator, mixed pair -> (0.2, 0.5, 0.3)")
print("valid:", validate_stochastic(P).ok)

report = classify(P)
print("volterra:", report.is_volterra)
print("strictly non-volterra:", report.is_strictly_non_volterra)
print("female sets found:", [sorted(s) for s in report.f_qso_sets])
# Note: a female set and its complement describe the same partition, so they
# always appear in pairs ({1} and {2} here).

counts = count_first_row(P)
print(
    f"first-row counts: N1={counts.n1} (certain empty-body pairs), "
    f"N1~={counts.n1_tilde}, of {counts.total_pairs} pairs"
)
print(f"bounds from the partition: N1 >= {counts.n1_lower_bound}, N1~ <= {counts.n1_tilde_upper_bound}")
print()

# The preset zoo carries the classical three-state family V_lambda =
# (1-lambda) V0 + lambda V1: a Volterra endpoint with famously irregular
# trajectories, and a non-Volterra endpoint.
for name in ("ganikhodzhaev_v0", "ganikhodzhaev_v1"):
    rep = classify(preset(name))
    print(f"{name}: volterra={rep.is_volterra}, strictly_non_volterra={rep.is_strictly_non_volterra}")

blend = preset("ganikhodzhaev_lambda", lam=0.5)
print("lambda=0.5 blend volterra:", classify(blend).is_volterra)
print()

# Volterra operators have a canonical skew-symmetric form a[k,i] = 2 p[i,k,k] - 1.
# The rock-paper-scissors signs reproduce the Volterra endpoint exactly.
a = np.array(
    [
        [0.0, 1.0, -1.0],
        [-1.0, 0.0, 1.0],
        [1.0, -1.0, 0.0],
    ]
)
P_rps = cubic_from_skew(SkewMatrix(a))
print("skew form with RPS signs equals the Volterra preset:", np.array_equal(P_rps.p, preset("ganikhodzhaev_v0").p))
