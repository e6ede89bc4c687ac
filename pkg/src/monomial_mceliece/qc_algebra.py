"""Binary circulant arithmetic and quasi-cyclic matrices.

A p x p binary circulant is identified with a polynomial in GF(2)[x]/(x^p - 1)
through its first row: row ``r`` of the matrix is the first row cyclically
shifted right by ``r``. With this convention a row vector ``v`` times the
circulant of ``a`` equals the product ``v(x) a(x)``, and the transposed
circulant corresponds to ``a(x^-1)``.

Bit vectors are plain ``numpy.uint8`` arrays holding 0/1 values. In a QC
context a vector of length ``blocks * p`` is read block by block.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class KeyGenRetry(Exception):
    """The systematic generator does not exist for this parity-check matrix."""


# ---------------------------------------------------------------------------
# GF(2)[x] polynomials packed in Python ints (bit i = coefficient of x^i)


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[x] polynomials packed in ints."""
    if a.bit_count() > b.bit_count():
        a, b = b, a
    out = 0
    while a:
        low = a & -a
        out ^= b << (low.bit_length() - 1)
        a ^= low
    return out


def poly_divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("polynomial division by zero")
    q = 0
    db = b.bit_length()
    while a.bit_length() >= db:
        shift = a.bit_length() - db
        q |= 1 << shift
        a ^= b << shift
    return q, a


def poly_inverse(a: int, modulus: int) -> int:
    """Inverse of ``a`` modulo ``modulus`` in GF(2)[x]; ValueError if none."""
    r0, r1 = modulus, poly_divmod(a, modulus)[1]
    s0, s1 = 0, 1
    while r1:
        q, r = poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 ^ clmul(q, s1)
    if r0 != 1:
        raise ValueError("polynomial is not invertible")
    return poly_divmod(s0, modulus)[1]


def fold_mod(a: int, p: int) -> int:
    """Reduce modulo x^p - 1."""
    mask = (1 << p) - 1
    while a >> p:
        a = (a & mask) ^ (a >> p)
    return a


def ring_inverse(a: int, p: int) -> int:
    """Inverse in GF(2)[x]/(x^p - 1)."""
    return poly_inverse(fold_mod(a, p), (1 << p) | 1)


# ---------------------------------------------------------------------------
# Circulants


@dataclass(frozen=True)
class CircPoly:
    """Element of GF(2)[x]/(x^p - 1) stored by its support (sorted exponents)."""

    p: int
    support: tuple[int, ...] = ()

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"modulus must be positive, got {self.p}")
        supp = tuple(int(s) for s in self.support)
        if any(s < 0 or s >= self.p for s in supp):
            raise ValueError(f"exponents must lie in [0, {self.p - 1}]: {supp}")
        if len(set(supp)) != len(supp):
            raise ValueError(f"duplicated exponents in support {supp}")
        object.__setattr__(self, "support", tuple(sorted(supp)))

    @classmethod
    def monomial(cls, p: int, k: int) -> "CircPoly":
        return cls(p, (k % p,))

    @classmethod
    def zero(cls, p: int) -> "CircPoly":
        return cls(p, ())

    @classmethod
    def one(cls, p: int) -> "CircPoly":
        return cls(p, (0,))

    @classmethod
    def from_exponents(cls, p: int, exponents: Iterable[int]) -> "CircPoly":
        """Sum of x^e over ``exponents`` reduced mod p; repeated terms cancel."""
        odd: set[int] = set()
        for e in exponents:
            odd ^= {int(e) % p}
        return cls(p, tuple(odd))

    @classmethod
    def from_int(cls, p: int, value: int) -> "CircPoly":
        value = fold_mod(value, p)
        supp = []
        while value:
            low = value & -value
            supp.append(low.bit_length() - 1)
            value ^= low
        return cls(p, tuple(supp))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "CircPoly":
        bits = np.asarray(bits)
        return cls(len(bits), tuple(np.flatnonzero(bits & 1)))

    def __int__(self) -> int:
        out = 0
        for s in self.support:
            out |= 1 << s
        return out

    def bits(self) -> np.ndarray:
        out = np.zeros(self.p, dtype=np.uint8)
        out[list(self.support)] = 1
        return out

    @property
    def weight(self) -> int:
        return len(self.support)

    def is_zero(self) -> bool:
        return not self.support

    def is_monomial(self) -> bool:
        return len(self.support) == 1

    def _check(self, other: "CircPoly"):
        if not isinstance(other, CircPoly):
            return NotImplemented
        if other.p != self.p:
            raise ValueError(f"moduli differ: {self.p} != {other.p}")

    def __add__(self, other: "CircPoly") -> "CircPoly":
        self._check(other)
        return CircPoly(self.p, tuple(set(self.support) ^ set(other.support)))

    __sub__ = __add__

    def __mul__(self, other: "CircPoly") -> "CircPoly":
        return circ_mul(self, other)

    def shift(self, k: int) -> "CircPoly":
        """Multiply by x^k."""
        return CircPoly(self.p, tuple((s + k) % self.p for s in self.support))

    def transpose(self) -> "CircPoly":
        return circ_transpose(self)

    def dense(self) -> np.ndarray:
        """The p x p circulant matrix (first row = coefficients)."""
        first = self.bits()
        return np.stack([np.roll(first, r) for r in range(self.p)])

    def __repr__(self):
        if not self.support:
            return f"CircPoly(p={self.p}, 0)"
        terms = " + ".join("1" if s == 0 else f"x^{s}" for s in self.support)
        return f"CircPoly(p={self.p}, {terms})"


def circ_mul(a: CircPoly, b: CircPoly) -> CircPoly:
    """Product of two circulants, reduced mod x^p - 1 over GF(2)."""
    if a.p != b.p:
        raise ValueError(f"moduli differ: {a.p} != {b.p}")
    if a.weight * b.weight <= 4 * a.p:
        return CircPoly.from_exponents(a.p, (s + t for s in a.support for t in b.support))
    return CircPoly.from_int(a.p, clmul(int(a), int(b)))


def circ_transpose(a: CircPoly) -> CircPoly:
    return CircPoly(a.p, tuple((a.p - s) % a.p for s in a.support))


# ---------------------------------------------------------------------------
# Quasi-cyclic matrices


@dataclass(frozen=True, eq=False)
class QcMatrix:
    """Block matrix of p x p circulants."""

    p: int
    blocks: tuple[tuple[CircPoly, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(row) for row in self.blocks)
        if not blocks or not blocks[0]:
            raise ValueError("QcMatrix needs at least one block")
        width = len(blocks[0])
        for row in blocks:
            if len(row) != width:
                raise ValueError("ragged block rows")
            for blk in row:
                if blk.p != self.p:
                    raise ValueError(f"block modulus {blk.p} != {self.p}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_exponents(cls, p: int, w) -> "QcMatrix":
        """Monomial matrix with block (i, j) = x^w[i][j]."""
        w = np.asarray(w, dtype=np.int64)
        return cls(p, tuple(tuple(CircPoly.monomial(p, int(e)) for e in row) for row in w))

    @classmethod
    def from_dense_blocks(cls, p: int, rows: Sequence[Sequence[np.ndarray]]) -> "QcMatrix":
        return cls(p, tuple(tuple(CircPoly.from_bits(b) for b in row) for row in rows))

    @property
    def rows_b(self) -> int:
        return len(self.blocks)

    @property
    def cols_b(self) -> int:
        return len(self.blocks[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows_b * self.p, self.cols_b * self.p

    def __getitem__(self, ij: tuple[int, int]) -> CircPoly:
        i, j = ij
        return self.blocks[i][j]

    def __eq__(self, other):
        if not isinstance(other, QcMatrix):
            return NotImplemented
        return self.p == other.p and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.p, self.blocks))

    def is_monomial(self) -> bool:
        return all(b.is_monomial() for row in self.blocks for b in row)

    def exponents(self) -> np.ndarray:
        if not self.is_monomial():
            raise ValueError("not a monomial matrix")
        return np.array([[b.support[0] for b in row] for row in self.blocks], dtype=np.int64)

    def transpose(self) -> "QcMatrix":
        return QcMatrix(self.p, tuple(
            tuple(self.blocks[i][j].transpose() for i in range(self.rows_b))
            for j in range(self.cols_b)))

    def dense(self) -> np.ndarray:
        return np.block([[b.dense() for b in row] for row in self.blocks]).astype(np.uint8)

    @cached_property
    def sparse(self) -> sp.csr_matrix:
        """CSR matrix of the expanded binary matrix (int32 entries).

        Row ``i*p + k`` has ones at columns ``j*p + (k + s) % p`` for every
        exponent ``s`` of block (i, j).
        """
        p = self.p
        rows, cols = [], []
        k = np.arange(p)
        for i, row in enumerate(self.blocks):
            for j, blk in enumerate(row):
                for s in blk.support:
                    rows.append(i * p + k)
                    cols.append(j * p + (k + s) % p)
        if rows:
            rows = np.concatenate(rows)
            cols = np.concatenate(cols)
        data = np.ones(len(rows), dtype=np.int32)
        mat = sp.csr_matrix((data, (rows, cols)), shape=self.shape, dtype=np.int32)
        mat.sum_duplicates()
        return mat

    @cached_property
    def sparse_t(self) -> sp.csr_matrix:
        return self.sparse.T.tocsr()

    @cached_property
    def bit_column_weights(self) -> np.ndarray:
        """Number of ones in each column of the expanded matrix."""
        return np.asarray(self.sparse.sum(axis=0)).ravel()

    def row_weights(self) -> list[int]:
        return [sum(b.weight for b in row) for row in self.blocks]

    def column_weights(self) -> list[int]:
        return [sum(self.blocks[i][j].weight for i in range(self.rows_b))
                for j in range(self.cols_b)]


def _as_blocks(v: np.ndarray, blocks: int, p: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.uint8)
    if v.ndim != 1 or v.shape[0] != blocks * p:
        raise ValueError(f"expected a vector of length {blocks * p}, got shape {v.shape}")
    return v.reshape(blocks, p)


def qc_syndrome(H: QcMatrix, v: np.ndarray) -> np.ndarray:
    """Syndrome ``s_i = sum_j v_j * H_ij^T`` of a bit vector, block by block."""
    vb = _as_blocks(v, H.cols_b, H.p)
    out = np.zeros((H.rows_b, H.p), dtype=np.uint8)
    for i, row in enumerate(H.blocks):
        for j, blk in enumerate(row):
            for s in blk.support:
                out[i] ^= np.roll(vb[j], -s)
    return out.reshape(-1)


def qc_vecmul(v: np.ndarray, G: QcMatrix) -> np.ndarray:
    """Row vector times QC matrix: ``c_j = sum_i v_i G_ij``."""
    vb = _as_blocks(v, G.rows_b, G.p)
    out = np.zeros((G.cols_b, G.p), dtype=np.uint8)
    for i, row in enumerate(G.blocks):
        if not vb[i].any():
            continue
        for j, blk in enumerate(row):
            for s in blk.support:
                out[j] ^= np.roll(vb[i], s)
    return out.reshape(-1)


def qc_matmul(A: QcMatrix, B: QcMatrix) -> QcMatrix:
    if A.p != B.p or A.cols_b != B.rows_b:
        raise ValueError("incompatible QC matrices")
    p = A.p
    out = []
    for i in range(A.rows_b):
        row = []
        for j in range(B.cols_b):
            acc = 0
            for k in range(A.cols_b):
                acc ^= clmul(int(A[i, k]), int(B[k, j]))
            row.append(CircPoly.from_int(p, acc))
        out.append(tuple(row))
    return QcMatrix(p, tuple(out))


def first_rows(G: QcMatrix) -> np.ndarray:
    """First row of every block row, shape (rows_b, cols_b * p)."""
    return np.stack([np.concatenate([b.bits() for b in row]) for row in G.blocks])


def is_zero_product(H: QcMatrix, G: QcMatrix) -> bool:
    """True iff H * G^T == 0 exactly.

    Each block of H G^T is a circulant, which vanishes iff its first column
    does, so only the first row of every block row of G is multiplied.
    """
    if H.p != G.p or H.cols_b != G.cols_b:
        raise ValueError("incompatible QC matrices")
    prod = H.sparse @ first_rows(G).T.astype(np.int32)
    return not (prod & 1).any()


# ---------------------------------------------------------------------------
# Dense GF(2) linear algebra on bit-packed rows


def _pack_rows(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.uint8)
    words = -(-a.shape[1] // 64)
    padded = np.zeros((a.shape[0], words * 64), dtype=np.uint8)
    padded[:, : a.shape[1]] = a & 1
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").copy()


def _unpack_rows(packed: np.ndarray, ncols: int) -> np.ndarray:
    bits = np.unpackbits(packed.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :ncols]


def _eliminate(packed: np.ndarray, ncols: int) -> list[tuple[int, int]]:
    """In-place Gauss-Jordan over the first ``ncols`` columns; returns pivots."""
    nrows = packed.shape[0]
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        w, b = divmod(c, 64)
        col = (packed[r:, w] >> np.uint64(b)) & np.uint64(1)
        hits = np.flatnonzero(col)
        if hits.size == 0:
            continue
        piv = r + int(hits[0])
        if piv != r:
            packed[[r, piv]] = packed[[piv, r]]
        mask = ((packed[:, w] >> np.uint64(b)) & np.uint64(1)).astype(bool)
        mask[r] = False
        if mask.any():
            # row r is zero left of column c, so words before w are untouched
            packed[mask, w:] ^= packed[r, w:]
        pivots.append((r, c))
        r += 1
    return pivots


def gf2_rank(a: np.ndarray) -> int:
    a = np.asarray(a)
    return len(_eliminate(_pack_rows(a), a.shape[1]))


def gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One solution X of A X = B over GF(2), free variables set to zero.

    Raises ValueError when the system is inconsistent.
    """
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    if a.shape[0] != b.shape[0]:
        raise ValueError("row count mismatch")
    n = a.shape[1]
    packed = _pack_rows(np.hstack([a, b]))
    pivots = _eliminate(packed, n)
    full = _unpack_rows(packed, n + b.shape[1])
    rank = len(pivots)
    if full[rank:, n:].any():
        raise ValueError("inconsistent GF(2) system")
    x = np.zeros((n, b.shape[1]), dtype=np.uint8)
    for r, c in pivots:
        x[c] = full[r, n:]
    return x[:, 0] if vec else x


def qc_nullspace_systematic(H: QcMatrix) -> QcMatrix:
    """Systematic generator ``[I | P]`` with ``H G^T = 0``.

    ``H`` has r0 block rows and n0 block columns; the result has
    k0 = n0 - r0 block rows and its rightmost r0 block columns are generic
    circulants. Raises :class:`KeyGenRetry` when no such generator exists.
    """
    p, r0, n0 = H.p, H.rows_b, H.cols_b
    k0 = n0 - r0
    if k0 < 1:
        raise ValueError("need more block columns than block rows")
    # unknowns y_l = P[c][l]^T solve  sum_l H[i][k0+l] y_l = H[i][c]
    a = np.block([[H[i, k0 + l].transpose().dense() for l in range(r0)] for i in range(r0)])
    rhs = np.stack([np.concatenate([H[i, c].bits() for i in range(r0)]) for c in range(k0)], axis=1)
    try:
        y = gf2_solve(a, rhs)
    except ValueError as exc:
        raise KeyGenRetry(str(exc)) from None
    G = systematic_from_solution(p, y.T.reshape(k0, r0, p))
    if not is_zero_product(H, G):
        raise KeyGenRetry("generator check H G^T = 0 failed")
    return G


def systematic_from_solution(p: int, y: np.ndarray) -> QcMatrix:
    """Assemble ``[I | P]`` from ``y[c, l]`` = coefficient bits of P[c][l]^T."""
    k0, r0 = y.shape[:2]
    one, zero = CircPoly.one(p), CircPoly.zero(p)
    rows = []
    for c in range(k0):
        ident = [one if j == c else zero for j in range(k0)]
        parity = [CircPoly.from_bits(y[c, l]).transpose() for l in range(r0)]
        rows.append(tuple(ident + parity))
    return QcMatrix(p, tuple(rows))


class BlockProduct:
    """Batched row-vector product ``V -> V M`` for a fixed QC matrix ``M``.

    Circulant products are cyclic convolutions, so they are evaluated with
    real FFTs and rounded; integer sums stay far below float64 precision.
    """

    def __init__(self, M: QcMatrix):
        self.p = M.p
        self.rows_b, self.cols_b = M.rows_b, M.cols_b
        bits = np.array([[b.bits() for b in row] for row in M.blocks], dtype=np.float64)
        # (freq, rows_b, cols_b) so the block sum is a batched matmul
        self._hat = np.ascontiguousarray(np.fft.rfft(bits, axis=-1).transpose(2, 0, 1))

    def __call__(self, V: np.ndarray) -> np.ndarray:
        V = np.atleast_2d(np.asarray(V, dtype=np.uint8))
        if V.shape[1] != self.rows_b * self.p:
            raise ValueError(f"expected rows of length {self.rows_b * self.p}, got {V.shape[1]}")
        vb = V.reshape(V.shape[0], self.rows_b, self.p).astype(np.float64)
        vhat = np.fft.rfft(vb, axis=-1).transpose(2, 0, 1)
        out = np.matmul(vhat, self._hat).transpose(1, 2, 0)
        vals = np.fft.irfft(out, n=self.p, axis=-1)
        return (np.rint(vals).astype(np.int64) & 1).astype(np.uint8).reshape(V.shape[0], -1)
