"""Independent oracles for constants frozen into the C++ tests.

Run with: python3 tests/oracles/frozen_values.py
Uses scipy's LP solver and direct enumeration; shares no code with the C++ library.
"""
import itertools
import math

import numpy as np
from scipy.optimize import brentq, linprog


def conj_row(m, subset_mask):
    return np.array([1.0 if (a & subset_mask) == subset_mask else 0.0 for a in range(1 << m)])


def interval(m, constraints, key):
    a_eq = [np.ones(1 << m)] + [conj_row(m, s) for s, _ in constraints]
    b_eq = [1.0] + [v for _, v in constraints]
    c = conj_row(m, key)
    lo = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    hi = linprog(-c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return lo.fun, -hi.fun


def entropy(p):
    return -sum(x * math.log(x) for x in p if x > 0)


# Folk-Predictions CMD entropy by direct summation.
folk = [0.1255, 0.2570, 0.0645, 0.0030, 0.0745, 0.0930, 0.0855, 0.2970]
print("folk_entropy = %.17g" % entropy(folk))

# Interval for Pr(P) after Pr(F)=.45, Pr(N)=.55, Pr(N&F)=.35 (F bit0, N bit1, P bit2).
print("forecaster_pr_p_interval = %.17g %.17g" % interval(3, [(1, .45), (2, .55), (3, .35)], 4))

# Interval for Pr(F&N) after the two marginals.
print("forecaster_fn_interval = %.17g %.17g" % interval(3, [(1, .45), (2, .55)], 3))

# Max-entropy triple value for a 3-variable LEG with all pairs fixed: atoms are affine
# in t = Pr(a&b&c); the entropy maximum is the root of dH/dt, found by Brent's method.
pa, pb, pab, pc, pac, pbc = 0.5, 0.4, 0.25, 0.55, 0.3, 0.28


def atoms(t):
    # inclusion-exclusion from conjunction values
    v = {0: 1.0, 1: pa, 2: pb, 3: pab, 4: pc, 5: pac, 6: pbc, 7: t}
    out = []
    for a in range(8):
        s = 0.0
        for sup in range(8):
            if (sup & a) == a:
                s += (-1) ** (bin(sup).count("1") - bin(a).count("1")) * v[sup]
        out.append(s)
    return out


lo, hi = interval(3, [(1, pa), (2, pb), (3, pab), (4, pc), (5, pac), (6, pbc)], 7)


def d_entropy(t):
    p = atoms(t)
    return math.log(p[0] * p[3] * p[5] * p[6]) - math.log(p[1] * p[2] * p[4] * p[7])


root = brentq(d_entropy, lo + 1e-12, hi - 1e-12, xtol=1e-16)
print("triple_interval = %.17g %.17g" % (lo, hi))
print("triple_default = %.17g" % root)

# Canonical keys with order <= 2 for 5 variables where variables 0,1,2 are pairwise forbidden.
forbidden = [(0, 1), (0, 2), (1, 2)]
count = 0
for mask in range(1, 32):
    if bin(mask).count("1") > 2:
        continue
    if any((mask >> a) & 1 and (mask >> b) & 1 for a, b in forbidden):
        continue
    count += 1
print("count_5var_trio_order2 =", count)
