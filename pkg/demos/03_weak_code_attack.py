"""Reaction attack against a generic (not full-spectrum) monomial code.

Bob leaks one bit per query: did decoding fail? Counting failures by the
cyclic distance between pairs of error positions is enough to read off which
distances occur in the secret key. Takes under a minute at 200k queries.
"""

import time

import numpy as np

from monomial_mceliece import SchemeParams, distance_spectrum, estimate_dfr, keygen
from monomial_mceliece.reaction_attack import BobOracle, classify_spectrum, run_attack, spectrum_accuracy

QUERIES = 200_000

par = SchemeParams.generic(p=101, r0=5, n0=6, t=27)
sk, pk = keygen(par, np.random.default_rng(3))
print(f"DFR at t={par.t}: {estimate_dfr((sk, pk), par.t, 2000, 1).rate:.3f}")

t0 = time.monotonic()
counters = run_attack(BobOracle(sk), pk, QUERIES, 5)
print(f"{QUERIES} queries in {time.monotonic() - t0:.0f}s")

# r0 is public, so the classifier can ask for exactly r0 distances per pair
est = classify_spectrum(counters, expected_size=par.r0)
truth = distance_spectrum(sk.W)
acc = spectrum_accuracy(est, truth)
print(f"precision={acc.precision:.3f} recall={acc.recall:.3f}")

i, j = 0, 1
ratios = counters.ratios()[i, j]
print(f"\nblock pair ({i},{j}), true distances {sorted(truth[i, j])}")
for d in np.argsort(ratios)[:8]:  # present distances fail less often
    mark = "*" if d in truth[i, j] else " "
    print(f"  d={d:>2} {mark} failure ratio {ratios[d]:.4f}")
