"""Exponent matrices of monomial codes and their distance spectra.

A monomial parity-check matrix has r0 x n0 circulant permutation blocks
``x^w[i][j]``; the integer matrix ``w`` is the exponent matrix. The
full-spectrum construction picks a random offset vector ``y``, a permutation
``v`` of [0, p-1] and a permutation ``q`` of [0, p//2] and sets
``w[i][j] = y[i] + v[j] * q[i] mod p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .qc_algebra import CircPoly, QcMatrix, clmul, fold_mod, poly_inverse, systematic_from_solution


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % f for f in range(3, math.isqrt(n) + 1, 2))


def distance(v1: int, v2: int, p: int) -> int:
    """Cyclic distance between two positions modulo p."""
    d = (v1 - v2) % p
    return min(d, p - d)


@dataclass(frozen=True, eq=False)
class ExponentMatrix:
    p: int
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=np.int64)
        if w.ndim != 2 or 0 in w.shape:
            raise ValueError(f"exponent matrix must be a non-empty 2-D array, got shape {w.shape}")
        if (w < 0).any() or (w >= self.p).any():
            raise ValueError(f"exponents must lie in [0, {self.p - 1}]")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def r0(self) -> int:
        return self.w.shape[0]

    @property
    def n0(self) -> int:
        return self.w.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ExponentMatrix):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.w, other.w)

    def __hash__(self):
        return hash((self.p, self.w.tobytes(), self.w.shape))

    def __repr__(self):
        return f"ExponentMatrix(p={self.p}, r0={self.r0}, n0={self.n0})"

    def parity_check(self) -> QcMatrix:
        return QcMatrix.from_exponents(self.p, self.w)

    def to_text(self) -> str:
        lines = [f"{self.p} {self.r0} {self.n0}"]
        lines += [" ".join(str(int(e)) for e in row) for row in self.w]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExponentMatrix":
        lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or len(lines[0]) != 3:
            raise ValueError("missing 'p r0 n0' header")
        p, r0, n0 = (int(x) for x in lines[0])
        rows = lines[1:]
        if len(rows) != r0 or any(len(r) != n0 for r in rows):
            raise ValueError(f"expected {r0} rows of {n0} exponents")
        return cls(p, np.array([[int(x) for x in r] for r in rows]))


@dataclass(frozen=True)
class ConstructionSecret:
    """Random choices of the full-spectrum construction."""

    y: tuple[int, ...]
    v: tuple[int, ...]
    q: tuple[int, ...]

    def __post_init__(self):
        p = len(self.v)
        if sorted(self.v) != list(range(p)):
            raise ValueError("v must be a permutation of [0, p-1]")
        if sorted(self.q) != list(range(p // 2 + 1)):
            raise ValueError("q must be a permutation of [0, p//2]")
        if len(self.y) != len(self.q) or any(not 0 <= yi < p for yi in self.y):
            raise ValueError("y must have r0 entries in [0, p-1]")

    @property
    def p(self) -> int:
        return len(self.v)

    def standard_v(self) -> tuple[int, ...]:
        """v shifted so its first entry is 0 (the standard-form column labels)."""
        return tuple((vi - self.v[0]) % self.p for vi in self.v)


def exponent_matrix_from_secret(secret: ConstructionSecret) -> ExponentMatrix:
    p = secret.p
    y = np.array(secret.y, dtype=np.int64)
    v = np.array(secret.v, dtype=np.int64)
    q = np.array(secret.q, dtype=np.int64)
    return ExponentMatrix(p, (y[:, None] + q[:, None] * v[None, :]) % p)


def build_exponent_matrix(p: int, rng: np.random.Generator) -> tuple[ExponentMatrix, ConstructionSecret]:
    """Random full-spectrum exponent matrix of size ceil(p/2) x p."""
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if p < 5:
        raise ValueError("the construction needs p >= 5")
    r0 = p // 2 + 1
    secret = ConstructionSecret(
        y=tuple(int(x) for x in rng.integers(0, p, size=r0)),
        v=tuple(int(x) for x in rng.permutation(p)),
        q=tuple(int(x) for x in rng.permutation(r0)),
    )
    return exponent_matrix_from_secret(secret), secret


def random_monomial(p: int, r0: int, n0: int, rng: np.random.Generator,
                    distinct: bool = True, max_tries: int = 10_000) -> ExponentMatrix:
    """Random generic exponent matrix.

    With ``distinct`` the matrix is resampled until every distance set has
    exactly r0 elements and no row is constant, so its rows and their mirrors
    give 2*r0 different cliques in the recovery graph.
    """
    if not distinct:
        return ExponentMatrix(p, rng.integers(0, p, size=(r0, n0)))
    if r0 > p // 2 + 1:
        raise ValueError("r0 distinct distances need r0 <= p//2 + 1")
    tries = 0
    while tries < max_tries:
        cols = [rng.integers(0, p, size=r0)]
        while len(cols) < n0 and tries < max_tries:
            tries += 1
            cand = rng.integers(0, p, size=r0)
            if all(len({distance(int(a), int(b), p) for a, b in zip(prev, cand)}) == r0
                   for prev in cols):
                cols.append(cand)
        if len(cols) < n0:
            break
        w = np.stack(cols, axis=1)
        if n0 < 2 or not any(len(set(row.tolist())) == 1 for row in w):
            return ExponentMatrix(p, w)
    raise RuntimeError("could not sample an exponent matrix with distinct distances")


@dataclass(frozen=True)
class DistanceSpectrum:
    p: int
    n0: int
    sets: dict[tuple[int, int], frozenset[int]] = field(hash=False)

    def __post_init__(self):
        half = self.p // 2
        clean = {}
        for key, val in self.sets.items():
            i, j = key
            if not 0 <= i < j < self.n0:
                raise ValueError(f"bad column pair {key}")
            val = frozenset(int(d) for d in val)
            if any(d < 0 or d > half for d in val):
                raise ValueError(f"distances of pair {key} exceed p//2 = {half}")
            clean[(i, j)] = val
        object.__setattr__(self, "sets", clean)

    def __getitem__(self, ij: tuple[int, int]) -> frozenset[int]:
        return self.sets.get(ij, frozenset())

    def is_complete(self) -> bool:
        return set(self.sets) == set(combinations(range(self.n0), 2))

    def to_text(self) -> str:
        lines = [f"{self.p} {self.n0}"]
        for (i, j), ds in sorted(self.sets.items()):
            lines.append(f"{i} {j}: " + " ".join(str(d) for d in sorted(ds)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DistanceSpectrum":
        lines = [ln for ln in text.strip().splitlines() if ln.strip() and not ln.startswith("#")]
        p, n0 = (int(x) for x in lines[0].split())
        sets = {}
        for ln in lines[1:]:
            head, _, tail = ln.partition(":")
            i, j = (int(x) for x in head.split())
            sets[(i, j)] = frozenset(int(x) for x in tail.split())
        return cls(p, n0, sets)


def distance_spectrum(W: ExponentMatrix) -> DistanceSpectrum:
    sets = {}
    for i, j in combinations(range(W.n0), 2):
        sets[(i, j)] = frozenset(distance(int(a), int(b), W.p) for a, b in zip(W.w[:, i], W.w[:, j]))
    return DistanceSpectrum(W.p, W.n0, sets)


def is_full_spectrum(S: DistanceSpectrum) -> bool:
    full = frozenset(range(S.p // 2 + 1))
    return S.is_complete() and all(s == full for s in S.sets.values())


def standard_form(W: ExponentMatrix) -> ExponentMatrix:
    return ExponentMatrix(W.p, (W.w - W.w[:, :1]) % W.p)


def row_equivalent(A: ExponentMatrix, B: ExponentMatrix) -> bool:
    if A.p != B.p or A.w.shape != B.w.shape:
        raise ValueError("row equivalence needs matrices of equal p and shape")
    return sorted(map(tuple, A.w.tolist())) == sorted(map(tuple, B.w.tolist()))


def multiplier_permutations_oracle(p: int, z=None) -> bool:
    """Check that alpha * z (mod p), alpha = 1..p-1, are p-1 distinct permutations of [1, p-1]."""
    z = list(range(1, p)) if z is None else [int(x) for x in z]
    if sorted(z) != list(range(1, p)):
        raise ValueError("z must be a permutation of [1, p-1]")
    target = list(range(1, p))
    seen = set()
    for alpha in range(1, p):
        image = tuple(alpha * zi % p for zi in z)
        if sorted(image) != target or image in seen:
            return False
        seen.add(image)
    return len(seen) == p - 1


def half_range_escape_oracle(p: int) -> bool:
    """For every alpha in [2, p//2] some beta in [2, p//2] has alpha*beta mod p > p//2."""
    half = p // 2
    return all(any(a * b % p > half for b in range(2, half + 1)) for a in range(2, half + 1))


def count_candidates_log2(p: int) -> float:
    """log2((p-1)!), the number of standard-form candidates of a full-spectrum key."""
    return math.fsum(math.log2(i) for i in range(2, p))


class _CyclotomicRing:
    """Arithmetic in GF(2)[x]/(1 + x + ... + x^(p-1)) on packed ints."""

    def __init__(self, p: int):
        self.p = p
        self.phi = (1 << p) - 1
        self._inv_xd1 = [0] + [poly_inverse(self.reduce((1 << d) | 1), self.phi) for d in range(1, p)]

    def reduce(self, a: int) -> int:
        a = fold_mod(a, self.p)
        if a >> (self.p - 1):
            a ^= self.phi
        return a

    def mul(self, a: int, b: int) -> int:
        return self.reduce(clmul(a, b))

    def shift(self, a: int, k: int) -> int:
        return self.reduce(a << (k % self.p))

    def inv_binomial(self, d: int) -> int:
        """Inverse of x^d + 1 for d not divisible by p."""
        return self._inv_xd1[d % self.p]


def construction_generator(secret: ConstructionSecret) -> QcMatrix:
    """Systematic generator of the full-spectrum code, by Lagrange interpolation.

    The right r0 x r0 block of H is a Vandermonde matrix in the nodes x^v[j]
    (rows scaled by the units x^y[i]), so the parity part of ``[I | P]``
    follows from Lagrange basis polynomials. Away from x = 1 the solution is
    unique; at x = 1 the all-ones system is completed by choosing the first
    parity block. Equivalent to dense elimination but O(p^3) ring-free work
    is replaced by O(p^2) polynomial products.
    """
    p = secret.p
    r0 = len(secret.q)
    k0 = p - r0
    ring = _CyclotomicRing(p)
    v = secret.v
    vb = v[k0:]
    one = 1
    inv_den = []
    for l in range(r0):
        acc = one
        for m in range(r0):
            if m != l:
                acc = ring.mul(ring.shift(acc, -vb[m]), ring.inv_binomial(vb[l] - vb[m]))
        inv_den.append(acc)
    y = np.zeros((k0, r0, p), dtype=np.uint8)
    for c in range(k0):
        alpha = ring.reduce(1 << v[c])
        full = one
        for m in range(r0):
            full = ring.mul(full, alpha ^ ring.reduce(1 << vb[m]))
        for l in range(r0):
            val = ring.mul(ring.shift(full, -vb[l]), ring.inv_binomial(v[c] - vb[l]))
            val = ring.mul(val, inv_den[l])
            # lift to x^p - 1: at x = 1 the parity blocks must sum to 1
            if (val.bit_count() & 1) != (l == 0):
                val ^= ring.phi
            y[c, l] = CircPoly.from_int(p, val).bits()
    return systematic_from_solution(p, y)
