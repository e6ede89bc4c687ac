"""Rebuild candidate exponent matrices from a distance spectrum.

Nodes are labelled ``j * p + r``: residue ``r`` in block column ``j``.
Column 0 only holds node 0, since candidates are in standard form (first
column all zero). A row of the secret matrix is then an ``n0``-clique with
one node per column, and its negation mod p is another one.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

from .crypto_scheme import DecoderConfig, PublicKey, bit_flip_decode_batch, encrypt_batch
from .monomial_code import DistanceSpectrum, ExponentMatrix, distance
from . import _runtime


@dataclass(frozen=True)
class SpectrumGraph:
    """Apex node 0 plus one residue group per block column 1..n0-1.

    ``masks[j][r]`` is a bitmask over residues of every column: bit ``c*p + s``
    is set iff node ``j*p + r`` is adjacent to node ``c*p + s``.
    """

    p: int
    n0: int
    masks: tuple[dict[int, int], ...]

    @property
    def nodes(self) -> list[int]:
        return [j * self.p + r for j, col in enumerate(self.masks) for r in sorted(col)]

    def column_of(self, node: int) -> int:
        return node // self.p

    def residues(self, j: int) -> list[int]:
        return sorted(self.masks[j])

    def adjacent(self, u: int, v: int) -> bool:
        ju, ru = divmod(u, self.p)
        return ru in self.masks[ju] and bool(self.masks[ju][ru] >> v & 1)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u in self.nodes:
            ju, ru = divmod(u, self.p)
            m = self.masks[ju][ru]
            for v in self.nodes:
                if v > u and m >> v & 1:
                    out.append((u, v))
        return out

    def to_edgelist(self) -> str:
        lines = [f"# p={self.p} n0={self.n0}", f"# nodes={len(self.nodes)}"]
        lines += [f"{u} {v}" for u, v in self.edges()]
        return "\n".join(lines) + "\n"


def build_graph(S: DistanceSpectrum) -> SpectrumGraph:
    if not S.is_complete():
        raise ValueError("spectrum must cover every block-column pair")
    p, n0 = S.p, S.n0
    cols: list[set[int]] = [{0}] + [set() for _ in range(n0 - 1)]
    for j in range(1, n0):
        for d in S[0, j]:
            cols[j].update({d % p, (p - d) % p})
    masks: list[dict[int, int]] = [{r: 0 for r in c} for c in cols]

    def link(a: tuple[int, int], b: tuple[int, int]) -> None:
        masks[a[0]][a[1]] |= 1 << (b[0] * p + b[1])
        masks[b[0]][b[1]] |= 1 << (a[0] * p + a[1])

    for j in range(1, n0):
        for r in cols[j]:
            link((0, 0), (j, r))
    for i in range(1, n0):
        for j in range(i + 1, n0):
            lam = S[i, j]
            for ri in cols[i]:
                for rj in cols[j]:
                    if distance(ri, rj, p) in lam:
                        link((i, ri), (j, rj))
    return SpectrumGraph(p, n0, tuple(masks))


@dataclass(frozen=True)
class Clique:
    nodes: tuple[int, ...]
    p: int

    @property
    def residues(self) -> tuple[int, ...]:
        return tuple(v % self.p for v in self.nodes)


@dataclass(frozen=True)
class CliqueSearch:
    cliques: tuple[Clique, ...]
    truncated: bool
    limit: int

    def __len__(self):
        return len(self.cliques)

    def to_text(self) -> str:
        head = f"# cliques={len(self.cliques)} truncated={str(self.truncated).lower()}"
        return "\n".join([head] + [" ".join(map(str, c.residues)) for c in self.cliques]) + "\n"


def enumerate_cliques(G: SpectrumGraph, limit: int) -> CliqueSearch:
    """Cliques through node 0 with one node per column, in lexicographic order.

    Exhaustive when the total is at most ``limit``; otherwise the first
    ``limit`` are returned and ``truncated`` is set.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    p, n0 = G.p, G.n0
    col_mask = [sum(1 << (j * p + r) for r in G.masks[j]) for j in range(n0)]
    found: list[Clique] = []
    path = [0]

    def walk(j: int, allowed: int) -> bool:
        if j == n0:
            found.append(Clique(tuple(path), p))
            return len(found) > limit
        cand = allowed & col_mask[j]
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            path.append(v)
            stop = walk(j + 1, allowed & G.masks[j][v - j * p])
            path.pop()
            if stop:
                return True
        return False

    if n0 == 1:
        found.append(Clique((0,), p))
    else:
        walk(1, G.masks[0][0])
    truncated = len(found) > limit
    return CliqueSearch(tuple(found[:limit]), truncated, limit)


def is_clique(G: SpectrumGraph, c: Clique) -> bool:
    if len(c.nodes) != G.n0 or c.nodes[0] != 0:
        return False
    if any(G.column_of(v) != j for j, v in enumerate(c.nodes)):
        return False
    return all(G.adjacent(u, v) for u, v in combinations(c.nodes, 2))


def mirror_clique(c: Clique, p: int | None = None) -> Clique:
    p = c.p if p is None else p
    return Clique(tuple(p * (g // p) + (p - g % p) % p for g in c.nodes), p)


def assemble_candidate(cliques: Iterable[Clique], S: DistanceSpectrum, r0: int,
                       max_candidates: int = 64, budget: int = 1_000_000) -> list[ExponentMatrix]:
    """Stack r0 distinct clique rows into standard-form candidates.

    Any set of clique rows has a spectrum contained in ``S``; candidates whose
    spectrum equals ``S`` are returned, or the compatible ones if none does.
    Rows are taken in the given order and ``budget`` bounds the search nodes.
    """
    rows = list(dict.fromkeys(c.residues for c in cliques))
    p, n0 = S.p, S.n0
    if r0 < 1 or len(rows) < r0:
        return []
    pairs = [(i, j) for i in range(n0) for j in range(i + 1, n0)]
    need = np.array([len(S[ij]) for ij in pairs])
    dist = np.array([[distance(r[i], r[j], p) for i, j in pairs] for r in rows])
    exact: list[tuple[int, ...]] = []
    loose: list[tuple[int, ...]] = []
    steps = 0

    def walk(start: int, chosen: list[int], cover: list[set[int]]) -> bool:
        nonlocal steps
        steps += 1
        if steps > budget:
            return True
        left = r0 - len(chosen)
        gaps = need - np.array([len(c) for c in cover])
        if left == 0:
            (exact if not gaps.any() else loose).append(tuple(chosen))
            return len(exact) >= max_candidates
        if gaps.max() > left and len(loose) >= max_candidates:
            return False
        for k in range(start, len(rows) - left + 1):
            chosen.append(k)
            stop = walk(k + 1, chosen, [c | {int(d)} for c, d in zip(cover, dist[k])])
            chosen.pop()
            if stop:
                return True
        return False

    walk(0, [], [set() for _ in pairs])
    picks = exact if exact else loose[:max_candidates]
    return [ExponentMatrix(p, np.array([rows[k] for k in ks])) for ks in picks]


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ProbeSet:
    """Ciphertexts together with the error vectors used to make them."""

    X: np.ndarray
    E: np.ndarray


def make_probes(pk: PublicKey, t: int, count: int, rng) -> ProbeSet:
    crng = np.random.default_rng(_runtime.base_seed(rng))
    par = pk.params
    U = crng.integers(0, 2, size=(count, par.k), dtype=np.uint8)
    E = _runtime.random_errors(crng, count, par.n, t)
    return ProbeSet(encrypt_batch(pk, U, E), E)


def validate_candidate(W_hat: ExponentMatrix, probes: ProbeSet,
                       decoder: DecoderConfig = DecoderConfig()) -> bool:
    """True iff decoding under ``W_hat`` recovers every probe's error vector."""
    H = W_hat.parity_check()
    if H.shape[1] != probes.X.shape[1]:
        return False
    C, ok, _, _ = bit_flip_decode_batch(H, probes.X, decoder)
    return bool(ok.all() and ((C ^ probes.X) == probes.E).all())


def recover(S: DistanceSpectrum, r0: int, limit: int, max_candidates: int = 64):
    """Graph, clique search and assembled candidates for one spectrum."""
    G = build_graph(S)
    found = enumerate_cliques(G, limit)
    return G, found, assemble_candidate(found.cliques, S, r0, max_candidates)

