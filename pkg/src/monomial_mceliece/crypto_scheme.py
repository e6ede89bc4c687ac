"""McEliece encryption with monomial private codes.

The scrambling matrix S is always the identity. The transformation matrix Q
is the identity by default (``m = 1``); with odd ``m > 1`` it is a block
permutation whose nonzero blocks are random invertible circulants of
weight m, so every row and column of Q has weight exactly m.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.stats import binomtest

from . import _runtime
from .monomial_code import (
    ConstructionSecret,
    ExponentMatrix,
    build_exponent_matrix,
    construction_generator,
    is_prime,
    random_monomial,
)
from .qc_algebra import (
    BlockProduct,
    CircPoly,
    KeyGenRetry,
    QcMatrix,
    is_zero_product,
    qc_matmul,
    qc_nullspace_systematic,
    ring_inverse,
)

log = logging.getLogger(__name__)

FILE_MAGIC = "MONOMIAL-MCELIECE v1"


class KeyGenError(RuntimeError):
    """Key generation gave up after the configured number of retries."""


class KeyFileError(ValueError):
    pass


@dataclass(frozen=True)
class DecoderConfig:
    """Bit-flipping knobs; ``threshold=None`` flips on a strict majority of unsatisfied checks."""

    max_iters: int = 10
    threshold: int | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.threshold is not None and self.threshold < 1:
            raise ValueError("fixed threshold must be >= 1")


@dataclass(frozen=True)
class SchemeParams:
    p: int
    r0: int
    n0: int
    t: int
    m: int = 1
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    full_spectrum: bool = True

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.n0 < self.r0 + 1:
            raise ValueError("need n0 >= r0 + 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.m > 1 and self.m % 2 == 0:
            raise ValueError("weight-m circulants are invertible only for odd m")
        if self.full_spectrum and (self.r0 != self.p // 2 + 1 or self.n0 != self.p):
            raise ValueError("full-spectrum codes have r0 = ceil(p/2) and n0 = p")

    @classmethod
    def full(cls, p: int, t: int, **kw) -> "SchemeParams":
        return cls(p=p, r0=p // 2 + 1, n0=p, t=t, full_spectrum=True, **kw)

    @classmethod
    def generic(cls, p: int, r0: int, n0: int, t: int, **kw) -> "SchemeParams":
        return cls(p=p, r0=r0, n0=n0, t=t, full_spectrum=False, **kw)

    @property
    def k0(self) -> int:
        return self.n0 - self.r0

    @property
    def n(self) -> int:
        return self.n0 * self.p

    @property
    def k(self) -> int:
        """Information length of the public generator (k0 * p)."""
        return self.k0 * self.p


# SL -> (p, t) as designed for the three security levels
PRESETS = {
    "sl80": (80, 103, 84),
    "sl128": (128, 137, 132),
    "sl256": (256, 257, 261),
}


def preset_params(name: str, **kw) -> SchemeParams:
    _, p, t = PRESETS[name]
    return SchemeParams.full(p, t, **kw)


@dataclass(frozen=True, eq=False)
class PublicKey:
    params: SchemeParams
    G: QcMatrix

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def k0(self) -> int:
        return self.params.k0

    @property
    def systematic(self) -> bool:
        return self.params.m == 1

    @property
    def P(self) -> QcMatrix:
        """Non-identity part of a systematic generator (k0 x r0 blocks)."""
        if not self.systematic:
            raise ValueError("generator is not systematic when Q != I")
        k0 = self.k0
        return QcMatrix(self.p, tuple(row[k0:] for row in self.G.blocks))

    @cached_property
    def _product(self) -> BlockProduct:
        return BlockProduct(self.P if self.systematic else self.G)

    def encode(self, U: np.ndarray) -> np.ndarray:
        """Codewords ``U G'`` for a batch of information rows."""
        U = np.atleast_2d(np.asarray(U, dtype=np.uint8))
        if self.systematic:
            return np.hstack([U, self._product(U)])
        return self._product(U)

    def __eq__(self, other):
        return isinstance(other, PublicKey) and self.params == other.params and self.G == other.G

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PrivateKey:
    params: SchemeParams
    W: ExponentMatrix
    Q: QcMatrix | None = None
    secret: ConstructionSecret | None = None

    @cached_property
    def H(self) -> QcMatrix:
        return self.W.parity_check()

    @cached_property
    def _q_product(self) -> BlockProduct | None:
        return None if self.Q is None else BlockProduct(self.Q)

    def transform(self, X: np.ndarray) -> np.ndarray:
        """``X Q`` (identity when m = 1)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
        return X if self._q_product is None else self._q_product(X)

    def __eq__(self, other):
        return (isinstance(other, PrivateKey) and self.params == other.params and self.W == other.W
                and self.Q == other.Q)

    __hash__ = None


@dataclass(frozen=True)
class DecodingFailure:
    """Bit flipping stopped with a nonzero syndrome."""

    iterations: int
    syndrome_weight: int

    def __bool__(self):
        return False


# ---------------------------------------------------------------------------
# key generation


def _random_q(p: int, n0: int, m: int, rng: np.random.Generator) -> tuple[QcMatrix, QcMatrix]:
    """Sparse QC transform of row/column weight m and its inverse."""
    perm = rng.permutation(n0)
    zero = CircPoly.zero(p)
    q_blocks = [[zero] * n0 for _ in range(n0)]
    inv_blocks = [[zero] * n0 for _ in range(n0)]
    for j in range(n0):
        while True:
            a = CircPoly(p, tuple(int(s) for s in rng.choice(p, size=m, replace=False)))
            try:
                a_inv = CircPoly.from_int(p, ring_inverse(int(a), p))
            except ValueError:
                continue
            break
        q_blocks[j][perm[j]] = a
        inv_blocks[perm[j]][j] = a_inv
    return (QcMatrix(p, tuple(map(tuple, q_blocks))), QcMatrix(p, tuple(map(tuple, inv_blocks))))


def keygen(params: SchemeParams, rng: np.random.Generator, max_retries: int = 20,
           solver: str = "auto") -> tuple[PrivateKey, PublicKey]:
    """Generate a key pair.

    ``solver="auto"`` uses Lagrange interpolation for full-spectrum codes and
    dense GF(2) elimination otherwise; ``"dense"`` forces elimination.
    """
    if solver not in ("auto", "dense"):
        raise ValueError(f"unknown solver {solver!r}")
    for attempt in range(max_retries + 1):
        secret = None
        if params.full_spectrum:
            W, secret = build_exponent_matrix(params.p, rng)
        else:
            W = random_monomial(params.p, params.r0, params.n0, rng)
        H = W.parity_check()
        try:
            if secret is not None and solver == "auto":
                G = construction_generator(secret)
                if not is_zero_product(H, G):
                    raise KeyGenRetry("structured generator failed the H G^T = 0 check")
            else:
                G = qc_nullspace_systematic(H)
        except KeyGenRetry as exc:
            log.debug("keygen attempt %d rejected: %s", attempt, exc)
            continue
        Q = None
        if params.m > 1:
            Q, Q_inv = _random_q(params.p, params.n0, params.m, rng)
            G = qc_matmul(G, Q_inv)
        return PrivateKey(params, W, Q, secret), PublicKey(params, G)
    raise KeyGenError(f"no systematic generator after {max_retries + 1} attempts")


# ---------------------------------------------------------------------------
# encryption and decoding


def encrypt(pk: PublicKey, u: np.ndarray, e: np.ndarray) -> np.ndarray:
    """x = u G' + e for a single message."""
    u = np.asarray(u, dtype=np.uint8)
    e = np.asarray(e, dtype=np.uint8)
    par = pk.params
    if u.shape != (par.k,):
        raise ValueError(f"plaintext must have length {par.k}, got {u.shape}")
    if e.shape != (par.n,):
        raise ValueError(f"error vector must have length {par.n}, got {e.shape}")
    w = int(e.sum())
    if w not in (0, par.t):
        raise ValueError(f"error weight must be {par.t}, got {w}")
    return pk.encode(u[None])[0] ^ e


def encrypt_batch(pk: PublicKey, U: np.ndarray, E: np.ndarray) -> np.ndarray:
    return pk.encode(U) ^ np.asarray(E, dtype=np.uint8)


def bit_flip_decode_batch(H: QcMatrix, X: np.ndarray, cfg: DecoderConfig = DecoderConfig()):
    """Parallel bit flipping on a batch of received words.

    Returns ``(C, ok, iterations, syndrome_weight)``; rows of ``C`` with
    ``ok`` are codewords of ker H.
    """
    Hs, HsT, colw = H.sparse, H.sparse_t, H.bit_column_weights
    X = np.array(np.atleast_2d(X), dtype=np.uint8)
    if X.shape[1] != H.shape[1]:
        raise ValueError(f"received words must have length {H.shape[1]}")
    S = (Hs @ X.T.astype(np.int32)) & 1
    iters = np.zeros(X.shape[0], dtype=np.int64)
    active = np.flatnonzero(S.any(axis=0))
    for _ in range(cfg.max_iters):
        if active.size == 0:
            break
        Sa = S[:, active]
        upc = HsT @ Sa
        if cfg.threshold is None:
            flip = 2 * upc > colw[:, None]
        else:
            flip = upc >= cfg.threshold
        X[active] ^= flip.T.astype(np.uint8)
        Sa = (Sa + Hs @ flip.astype(np.int32)) & 1
        S[:, active] = Sa
        iters[active] += 1
        # words with no flip this round are stuck for good
        active = active[Sa.any(axis=0) & flip.any(axis=0)]
    synd_w = S.sum(axis=0)
    return X, synd_w == 0, iters, synd_w


def bit_flip_decode(H: QcMatrix, x: np.ndarray, cfg: DecoderConfig = DecoderConfig()):
    """Decode one word; returns the codeword or a :class:`DecodingFailure`."""
    C, ok, iters, sw = bit_flip_decode_batch(H, np.asarray(x)[None], cfg)
    if not ok[0]:
        return DecodingFailure(int(iters[0]), int(sw[0]))
    return C[0]


def decrypt_batch(sk: PrivateKey, X: np.ndarray):
    """Returns ``(U, ok, error_weight)`` where ``error_weight`` is |x Q - c'|."""
    Xq = sk.transform(X)
    C, ok, _, _ = bit_flip_decode_batch(sk.H, Xq, sk.params.decoder)
    return C[:, : sk.params.k], ok, (C ^ Xq).sum(axis=1)


def decrypt(sk: PrivateKey, x: np.ndarray):
    """Plaintext bits, or a :class:`DecodingFailure` the sender can observe."""
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (sk.params.n,):
        raise ValueError(f"ciphertext must have length {sk.params.n}, got {x.shape}")
    res = bit_flip_decode(sk.H, sk.transform(x)[0], sk.params.decoder)
    if isinstance(res, DecodingFailure):
        return res
    return res[: sk.params.k]


# ---------------------------------------------------------------------------
# Monte-Carlo DFR


@dataclass(frozen=True)
class DfrEstimate:
    trials: int
    failures: int
    miscorrections: int
    ci_low: float
    ci_high: float

    @property
    def rate(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def miscorrection_rate(self) -> float:
        return self.miscorrections / self.trials if self.trials else 0.0


def estimate_dfr(keys: tuple[PrivateKey, PublicKey], t: int, trials: int, rng,
                 chunk: int = 256) -> DfrEstimate:
    """Fraction of decoding failures over random plaintexts and weight-t errors.

    ``rng`` is a Generator or an integer seed; chunk ``i`` draws from a stream
    derived from (seed, i), so the result does not depend on worker count.
    Miscorrections (wrong plaintext without a decoding failure) are counted
    separately. The interval is the exact 95% binomial (Clopper-Pearson) one.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sk, pk = keys
    par = sk.params
    seed = _runtime.base_seed(rng)

    def run(_index, size, crng):
        U = crng.integers(0, 2, size=(size, par.k), dtype=np.uint8)
        E = _runtime.random_errors(crng, size, par.n, t)
        U_hat, ok, _ = decrypt_batch(sk, encrypt_batch(pk, U, E))
        wrong = ok & (U_hat != U).any(axis=1)
        return int((~ok).sum()), int(wrong.sum())

    parts = _runtime.map_chunks(run, trials, chunk, seed)
    fails = sum(f for f, _ in parts)
    mis = sum(w for _, w in parts)
    ci = binomtest(fails, trials).proportion_ci(confidence_level=0.95, method="exact")
    return DfrEstimate(trials, fails, mis, float(ci.low), float(ci.high))


# ---------------------------------------------------------------------------
# key files


def _hex(blk: CircPoly) -> str:
    return np.packbits(blk.bits(), bitorder="little").tobytes().hex()


def _unhex(text: str, p: int) -> CircPoly:
    raw = bytes.fromhex(text)
    if len(raw) != -(-p // 8):
        raise KeyFileError(f"block {text!r} should have {-(-p // 8)} bytes")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    if bits[p:].any():
        raise KeyFileError(f"block {text!r} has bits beyond x^{p - 1}")
    return CircPoly.from_bits(bits[:p])


def _header(par: SchemeParams) -> list[str]:
    return [FILE_MAGIC, f"{par.p} {par.r0} {par.n0} {par.t} {par.m}"]


def _parse_header(text: str):
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) < 2 or lines[0] != FILE_MAGIC:
        raise KeyFileError(f"missing '{FILE_MAGIC}' header")
    try:
        p, r0, n0, t, m = (int(x) for x in lines[1].split())
    except ValueError:
        raise KeyFileError("second line must be 'p r0 n0 t m'") from None
    full = r0 == p // 2 + 1 and n0 == p
    try:
        par = SchemeParams(p=p, r0=r0, n0=n0, t=t, m=m, full_spectrum=full)
    except ValueError as exc:
        raise KeyFileError(str(exc)) from None
    return par, lines[2:]


def format_private_key(sk: PrivateKey) -> str:
    lines = _header(sk.params)
    lines += [" ".join(str(int(e)) for e in row) for row in sk.W.w]
    if sk.Q is not None:
        lines += [" ".join(_hex(b) for b in row) for row in sk.Q.blocks]
    return "\n".join(lines) + "\n"


def format_public_key(pk: PublicKey) -> str:
    lines = _header(pk.params)
    M = pk.P if pk.systematic else pk.G
    lines += [" ".join(_hex(b) for b in row) for row in M.blocks]
    return "\n".join(lines) + "\n"


def parse_private_key(text: str, decoder: DecoderConfig | None = None) -> PrivateKey:
    par, body = _parse_header(text)
    if decoder is not None:
        par = SchemeParams(par.p, par.r0, par.n0, par.t, par.m, decoder, par.full_spectrum)
    expected = par.r0 + (par.n0 if par.m > 1 else 0)
    if len(body) != expected:
        raise KeyFileError(f"expected {expected} body lines, found {len(body)}")
    try:
        rows = [[int(x) for x in ln.split()] for ln in body[: par.r0]]
        W = ExponentMatrix(par.p, np.array(rows))
    except ValueError as exc:
        raise KeyFileError(f"bad exponent rows: {exc}") from None
    if W.w.shape != (par.r0, par.n0):
        raise KeyFileError("exponent matrix shape does not match header")
    Q = None
    if par.m > 1:
        Q = QcMatrix(par.p, tuple(tuple(_unhex(h, par.p) for h in ln.split()) for ln in body[par.r0:]))
        if (Q.rows_b, Q.cols_b) != (par.n0, par.n0):
            raise KeyFileError("Q must have n0 x n0 blocks")
    return PrivateKey(par, W, Q)


def parse_public_key(text: str) -> PublicKey:
    par, body = _parse_header(text)
    p, k0 = par.p, par.k0
    width = par.r0 if par.m == 1 else par.n0
    if len(body) != k0:
        raise KeyFileError(f"expected {k0} block rows, found {len(body)}")
    rows = []
    for c, ln in enumerate(body):
        blocks = [_unhex(h, p) for h in ln.split()]
        if len(blocks) != width:
            raise KeyFileError(f"block row {c} has {len(blocks)} blocks, expected {width}")
        if par.m == 1:
            ident = [CircPoly.one(p) if j == c else CircPoly.zero(p) for j in range(k0)]
            blocks = ident + blocks
        rows.append(tuple(blocks))
    return PublicKey(par, QcMatrix(p, tuple(rows)))
