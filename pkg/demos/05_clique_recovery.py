"""Turning a distance spectrum back into candidate keys.

Each block pair constrains which residues can sit in the same row; rows of
the secret exponent matrix are then cliques with one node per column. For a
generic code the clique list is short and contains the true rows. For a
full-spectrum code every residue tuple consistent with the pattern survives.
"""

import numpy as np

from monomial_mceliece import SchemeParams, keygen
from monomial_mceliece.monomial_code import (
    build_exponent_matrix,
    distance_spectrum,
    random_monomial,
    row_equivalent,
    standard_form,
)
from monomial_mceliece.spectrum_recovery import make_probes, recover, validate_candidate

W = random_monomial(11, 2, 3, np.random.default_rng(1))
G, found, cands = recover(distance_spectrum(W), r0=2, limit=10_000)
print(f"generic p=11: {len(G.nodes)} nodes, {len(G.edges())} edges, {len(found)} cliques")
print("true rows:", standard_form(W).w.tolist())
print("cliques:  ", [list(c.residues) for c in found.cliques])
print("candidates matching up to row order:", sum(row_equivalent(c, standard_form(W)) for c in cands))

W5, _ = build_exponent_matrix(5, np.random.default_rng(0))
_, found5, _ = recover(distance_spectrum(W5), r0=3, limit=10_000)
print(f"\nfull-spectrum p=5: {len(found5)} cliques (truncated={found5.truncated})")

# a candidate is only worth anything if it decodes real ciphertexts
sk, pk = keygen(SchemeParams.full(13, 3), np.random.default_rng(6))
probes = make_probes(pk, 3, 20, np.random.default_rng(7))
print("\ntrue key passes the probes:", validate_candidate(standard_form(sk.W), probes))
other, _ = build_exponent_matrix(13, np.random.default_rng(99))
print("unrelated key passes the probes:", validate_candidate(standard_form(other), probes))
