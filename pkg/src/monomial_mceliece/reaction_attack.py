"""Decryption-failure reaction attack against monomial keys.

Eve sends ciphertexts built from random plaintexts and random weight-t
errors. For every pair of error positions lying in different blocks she
increments ``b[zi, zj, d]``, with d the cyclic distance of the in-block
positions, and also ``a[zi, zj, d]`` when Bob reports a failure. Distances
that belong to the secret spectrum make syndrome cancellations likely, which
moves their failure ratio ``a / b`` away from the rest.
"""

from __future__ import annotations

import io
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from . import _runtime
from .crypto_scheme import PrivateKey, PublicKey, decrypt_batch, encrypt_batch
from .monomial_code import DistanceSpectrum

Oracle = Callable[[np.ndarray], np.ndarray]

PRESENT, ABSENT, UNDECIDED = 1, 0, -1


class AttackAborted(RuntimeError):
    """The oracle failed; ``counters`` holds every chunk completed before it."""

    def __init__(self, msg: str, counters: "AttackCounters"):
        super().__init__(msg)
        self.counters = counters


class BobOracle:
    """In-process decryption oracle: True means Bob reports a failure.

    A word counts as a failure when bit flipping does not converge or, for
    m = 1, when the removed error pattern does not have weight t (the check
    a CCA2 conversion performs; it catches miscorrections). ``t`` is the
    weight Bob expects, the key's nominal one unless overridden.
    """

    def __init__(self, sk: PrivateKey, t: int | None = None):
        self.sk = sk
        self.t = sk.params.t if t is None else t
        self.calls = 0

    def __call__(self, X: np.ndarray) -> np.ndarray:
        self.calls += len(X)
        _, ok, err_w = decrypt_batch(self.sk, X)
        if self.sk.params.m == 1:
            ok &= err_w == self.t
        return ~ok


@dataclass
class AttackCounters:
    p: int
    n0: int
    a: np.ndarray = field(default=None, repr=False)
    b: np.ndarray = field(default=None, repr=False)
    queries: int = 0
    failures: int = 0

    def __post_init__(self):
        shape = (self.n0, self.n0, self.p // 2 + 1)
        if self.a is None:
            self.a = np.zeros(shape, dtype=np.int64)
        if self.b is None:
            self.b = np.zeros(shape, dtype=np.int64)
        if self.a.shape != shape or self.b.shape != shape:
            raise ValueError(f"counter arrays must have shape {shape}")

    @property
    def n_dist(self) -> int:
        return self.p // 2 + 1

    def pairs(self) -> list[tuple[int, int]]:
        return list(combinations(range(self.n0), 2))

    def __add__(self, other: "AttackCounters") -> "AttackCounters":
        if (self.p, self.n0) != (other.p, other.n0):
            raise ValueError("counters of different shapes")
        return AttackCounters(self.p, self.n0, self.a + other.a, self.b + other.b,
                              self.queries + other.queries, self.failures + other.failures)

    def ratios(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.b > 0, self.a / np.maximum(self.b, 1), np.nan)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("i,j,d,a,b\n")
        if self.queries == 0:
            return out.getvalue()
        for i, j in self.pairs():
            for d in range(self.n_dist):
                out.write(f"{i},{j},{d},{self.a[i, j, d]},{self.b[i, j, d]}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, p: int, n0: int) -> "AttackCounters":
        c = cls(p, n0)
        lines = text.strip().splitlines()
        if not lines or lines[0].strip() != "i,j,d,a,b":
            raise ValueError("counter CSV must start with 'i,j,d,a,b'")
        for ln in lines[1:]:
            i, j, d, a, b = (int(x) for x in ln.split(","))
            if a > b or a < 0:
                raise ValueError(f"invalid counts on line {ln!r}")
            c.a[i, j, d], c.b[i, j, d] = a, b
        return c


def count_pairs(E: np.ndarray, failed: np.ndarray, p: int, n0: int) -> AttackCounters:
    """Counters for one batch of error vectors and the oracle's verdicts."""
    E = np.atleast_2d(E)
    failed = np.asarray(failed, dtype=bool)
    D = p // 2 + 1
    size = n0 * n0 * D
    c = AttackCounters(p, n0, queries=len(E), failures=int(failed.sum()))
    if len(E) == 0:
        return c
    weights = E.sum(axis=1)
    for w in np.unique(weights):
        rows = np.flatnonzero(weights == w)
        if w < 2:
            continue
        pos = np.nonzero(E[rows])[1].reshape(len(rows), int(w))
        ia, ib = np.triu_indices(int(w), 1)
        p1, p2 = pos[:, ia], pos[:, ib]
        z1, z2 = p1 // p, p2 // p
        diff = (p1 - p2) % p
        d = np.minimum(diff, p - diff)
        cross = z1 != z2
        flat = (z1 * n0 + z2) * D + d
        c.b += np.bincount(flat[cross], minlength=size).reshape(c.b.shape)
        fail_mask = cross & failed[rows][:, None]
        c.a += np.bincount(flat[fail_mask], minlength=size).reshape(c.a.shape)
    return c


def run_attack(oracle: Oracle, pk: PublicKey, queries: int, rng, t: int | None = None,
               chunk: int = 512, progress: Callable[[int, int, float], None] | None = None,
               ) -> AttackCounters:
    """Query the oracle with ``queries`` random ciphertexts and fill the counters.

    ``t`` overrides the error weight (weight inflation for desk-scale runs).
    Chunk ``i`` uses a random stream derived from (seed, i).
    """
    par = pk.params
    t = par.t if t is None else t
    seed = _runtime.base_seed(rng)
    sizes = _runtime.chunk_sizes(queries, chunk)
    start = time.monotonic()

    def job(index: int, size: int) -> AttackCounters:
        crng = _runtime.chunk_rng(seed, index)
        U = crng.integers(0, 2, size=(size, par.k), dtype=np.uint8)
        E = _runtime.random_errors(crng, size, par.n, t)
        failed = np.asarray(oracle(encrypt_batch(pk, U, E)), dtype=bool)
        if failed.shape != (size,):
            raise ValueError(f"oracle answered {failed.shape} verdicts for {size} queries")
        return count_pairs(E, failed, par.p, par.n0)

    total = AttackCounters(par.p, par.n0)
    workers = _runtime.worker_count()
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for wave in range(0, len(sizes), max(workers, 1)):
            idx = range(wave, min(wave + max(workers, 1), len(sizes)))
            try:
                if pool is None:
                    parts = [job(i, sizes[i]) for i in idx]
                else:
                    parts = list(pool.map(lambda i: job(i, sizes[i]), idx))
            except Exception as exc:
                raise AttackAborted(f"oracle failed after {total.queries} queries: {exc}", total) from exc
            for part in parts:
                total = total + part
            if progress is not None:
                progress(total.queries, total.failures, time.monotonic() - start)
    finally:
        if pool is not None:
            pool.shutdown()
    return total


def stderr_progress(queries: int, failures: int, elapsed: float) -> None:
    print(f"{queries},{failures},{elapsed:.2f}", file=sys.stderr, flush=True)


# ---------------------------------------------------------------------------
# classification


@dataclass
class SpectrumEstimate:
    p: int
    n0: int
    status: np.ndarray
    ratio: np.ndarray

    def present(self, i: int, j: int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.status[i, j] == PRESENT).tolist())

    def undecided(self, i: int, j: int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.status[i, j] == UNDECIDED).tolist())

    def to_spectrum(self) -> DistanceSpectrum:
        return DistanceSpectrum(self.p, self.n0, {
            (i, j): self.present(i, j) for i, j in combinations(range(self.n0), 2)})

    def all_present(self) -> bool:
        return all(self.present(i, j) == frozenset(range(self.p // 2 + 1))
                   for i, j in combinations(range(self.n0), 2))

    def all_undecided(self) -> bool:
        return all(len(self.undecided(i, j)) == self.p // 2 + 1
                   for i, j in combinations(range(self.n0), 2))


def _two_means(x: np.ndarray) -> int:
    """Size of the low cluster of the best 1-D two-cluster split of sorted ``x``."""
    n = len(x)
    csum = np.cumsum(x)
    csq = np.cumsum(x * x)
    best, best_k = np.inf, 0
    for k in range(1, n):
        left = csq[k - 1] - csum[k - 1] ** 2 / k
        rs, rq = csum[-1] - csum[k - 1], csq[-1] - csq[k - 1]
        right = rq - rs ** 2 / (n - k)
        if left + right < best - 1e-15:
            best, best_k = left + right, k
    return best_k


def classify_spectrum(c: AttackCounters, expected_size: int | None = None, min_samples: int = 1,
                      lower_is_present: bool = True, z_min: float = 5.0) -> SpectrumEstimate:
    """Guess each distance set from the failure ratios.

    With ``expected_size`` the ``expected_size`` most extreme ratios (lowest
    by default) of every pair are marked present; values tied across the
    cut are marked absent. Without it, a 1-D two-means split is kept only if
    the pooled ratios of the two clusters differ by at least ``z_min``
    standard errors; otherwise the whole pair is undecided. Distances seen
    fewer than ``min_samples`` times are undecided.
    """
    D = c.p // 2 + 1
    ratio = c.ratios()
    status = np.full((c.n0, c.n0, D), UNDECIDED, dtype=np.int8)
    sign = 1.0 if lower_is_present else -1.0
    for i, j in c.pairs():
        ok = np.flatnonzero(c.b[i, j] >= max(min_samples, 1))
        if ok.size == 0:
            continue
        key = sign * ratio[i, j, ok]
        order = np.argsort(key, kind="stable")
        if expected_size is not None:
            k = min(expected_size, ok.size)
            chosen = order[:k]
            if k < ok.size:
                cut = key[order[k]]
                chosen = chosen[key[chosen] != cut]
            status[i, j, ok] = ABSENT
            status[i, j, ok[chosen]] = PRESENT
            continue
        if ok.size < 2:
            continue
        k = _two_means(key[order])
        lo, hi = ok[order[:k]], ok[order[k:]]
        a_lo, b_lo = c.a[i, j, lo].sum(), c.b[i, j, lo].sum()
        a_hi, b_hi = c.a[i, j, hi].sum(), c.b[i, j, hi].sum()
        pooled = (a_lo + a_hi) / (b_lo + b_hi)
        se = np.sqrt(pooled * (1 - pooled) * (1 / b_lo + 1 / b_hi))
        z = abs(a_lo / b_lo - a_hi / b_hi) / se if se > 0 else 0.0
        if z >= z_min:
            status[i, j, ok] = ABSENT
            status[i, j, lo] = PRESENT
    return SpectrumEstimate(c.p, c.n0, status, ratio)


@dataclass(frozen=True)
class SpectrumAccuracy:
    precision: float
    recall: float
    per_pair: dict[tuple[int, int], tuple[float, float]]


def _pr(tp: int, npred: int, ntrue: int) -> tuple[float, float]:
    prec = tp / npred if npred else float("nan")
    rec = tp / ntrue if ntrue else float("nan")
    return prec, rec


def spectrum_accuracy(est: SpectrumEstimate, truth: DistanceSpectrum) -> SpectrumAccuracy:
    """Precision and recall of the 'present' marks; NaN where undefined."""
    if (est.p, est.n0) != (truth.p, truth.n0):
        raise ValueError("estimate and truth describe different codes")
    per_pair = {}
    tp_all = pred_all = true_all = 0
    for i, j in combinations(range(est.n0), 2):
        pred, real = est.present(i, j), truth[i, j]
        tp = len(pred & real)
        per_pair[(i, j)] = _pr(tp, len(pred), len(real))
        tp_all += tp
        pred_all += len(pred)
        true_all += len(real)
    prec, rec = _pr(tp_all, pred_all, true_all)
    return SpectrumAccuracy(prec, rec, per_pair)


# ---------------------------------------------------------------------------
# held-out separation statistic


@dataclass(frozen=True)
class SeparationResult:
    auc: float
    null_band: float
    null: np.ndarray = field(repr=False)

    @property
    def excess(self) -> float:
        return self.auc - 0.5

    @property
    def separated(self) -> bool:
        return self.excess > self.null_band


def _mean_auc(vals: np.ndarray, labels: np.ndarray) -> float:
    """Mean over rows of P(unlabelled value > labelled value), ties count 1/2."""
    aucs = []
    for v, lab in zip(vals, labels):
        pos, neg = v[lab], v[~lab]
        if pos.size == 0 or neg.size == 0:
            continue
        gt = (neg[:, None] > pos[None, :]).mean()
        eq = (neg[:, None] == pos[None, :]).mean()
        aucs.append(gt + 0.5 * eq)
    return float(np.mean(aucs)) if aucs else 0.5


def heldout_separation(train: AttackCounters, test: AttackCounters, split_size: int,
                       rng: np.random.Generator, n_perm: int = 1000,
                       exclude: tuple[int, ...] = (0,), lower_is_present: bool = True,
                       ) -> SeparationResult:
    """Does the most present-looking ``split_size`` distances of ``train`` separate in ``test``?

    For every block pair, the ``split_size`` distances with the most extreme
    ratios in ``train`` are labelled; the mean within-pair AUC of ``test``
    ratios between labelled and unlabelled distances is compared with the
    95% band of the same statistic under uniformly random labellings.
    """
    keep = np.array([d for d in range(train.n_dist) if d not in exclude])
    if not 0 < split_size < keep.size:
        raise ValueError(f"split size must lie in (0, {keep.size})")
    sign = 1.0 if lower_is_present else -1.0
    pairs = train.pairs()
    tr = np.array([train.ratios()[i, j, keep] for i, j in pairs]) * sign
    te = np.array([test.ratios()[i, j, keep] for i, j in pairs]) * sign
    tr = np.nan_to_num(tr, nan=np.inf)
    te = np.nan_to_num(te, nan=np.inf)
    labels = np.zeros(te.shape, dtype=bool)
    for row, vals in enumerate(tr):
        labels[row, np.argsort(vals, kind="stable")[:split_size]] = True
    auc = _mean_auc(te, labels)
    null = np.empty(n_perm)
    for k in range(n_perm):
        perm = np.zeros(te.shape, dtype=bool)
        for row in range(te.shape[0]):
            perm[row, rng.choice(keep.size, size=split_size, replace=False)] = True
        null[k] = _mean_auc(te, perm)
    band = float(np.quantile(np.abs(null - 0.5), 0.95))
    return SeparationResult(auc, band, null)
