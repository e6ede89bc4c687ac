"""Build a small full-spectrum key pair and push a few messages through it."""

import numpy as np

from monomial_mceliece import DecodingFailure, SchemeParams, decrypt, encrypt, keygen
from monomial_mceliece.monomial_code import distance_spectrum, is_full_spectrum, standard_form
from monomial_mceliece.qc_algebra import is_zero_product

rng = np.random.default_rng(2024)
par = SchemeParams.full(p=13, t=3)
sk, pk = keygen(par, rng)

print(f"p={par.p} r0={par.r0} n0={par.n0}  ->  n={par.n}, k={par.k}")

# exponent matrix behind H, in the standard form (first row and column zero)
print("secret exponents (standard form):")
print(standard_form(sk.W).w)

S = distance_spectrum(sk.W)
print("every block pair sees every distance:", is_full_spectrum(S))
print("H G^T == 0:", is_zero_product(sk.H, pk.G))

for _ in range(3):
    u = rng.integers(0, 2, par.k, dtype=np.uint8)
    e = np.zeros(par.n, dtype=np.uint8)
    e[rng.choice(par.n, par.t, replace=False)] = 1
    out = decrypt(sk, encrypt(pk, u, e))
    if isinstance(out, DecodingFailure):
        print("  decoding failure")
    else:
        print(f"  plaintext recovered: {bool((out == u).all())}")
