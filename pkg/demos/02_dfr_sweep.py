"""Failure rate of the bit-flipping decoder as the error weight grows.

Full-spectrum codes decode almost everything up to a point, then fall off a
cliff a little below t = 3 r0 / 4.
"""

import numpy as np

from monomial_mceliece import SchemeParams, estimate_dfr, keygen

TRIALS = 2000

for p in (17, 23, 29):
    par = SchemeParams.full(p, 1)
    keys = keygen(par, np.random.default_rng(p))
    print(f"\np={p} (r0={par.r0}, n={par.n})")
    for t in range(3 * par.r0 // 4 - 4, 3 * par.r0 // 4 + 2):
        est = estimate_dfr(keys, t, TRIALS, 0)
        bar = "#" * round(40 * est.rate)
        print(f"  t={t:>2}  DFR={est.rate:.3f}  [{est.ci_low:.3f}, {est.ci_high:.3f}]  {bar}")
