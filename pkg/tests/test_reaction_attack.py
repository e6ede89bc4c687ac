import numpy as np
import pytest

from monomial_mceliece.crypto_scheme import SchemeParams, keygen
from monomial_mceliece.monomial_code import DistanceSpectrum, distance_spectrum
from monomial_mceliece.reaction_attack import (
    ABSENT,
    PRESENT,
    AttackAborted,
    AttackCounters,
    BobOracle,
    classify_spectrum,
    count_pairs,
    heldout_separation,
    run_attack,
    spectrum_accuracy,
)


def test_no_queries_no_counts(small_generic_keys):
    sk, pk = small_generic_keys
    c = run_attack(BobOracle(sk), pk, 0, 1)
    assert c.queries == 0 and not c.a.any() and not c.b.any()
    assert c.to_csv() == "i,j,d,a,b\n"


def test_errors_in_one_block_count_nothing():
    E = np.zeros((1, 21), dtype=np.uint8)
    E[0, [7, 9, 12]] = 1
    c = count_pairs(E, np.array([True]), 7, 3)
    assert not c.b.any() and c.queries == 1 and c.failures == 1


def test_hand_counted_pair():
    E = np.zeros((1, 21), dtype=np.uint8)
    E[0, [7 + 1, 14 + 4]] = 1
    c = count_pairs(E, np.array([False]), 7, 3)
    assert c.b[1, 2, 3] == 1 and c.b.sum() == 1 and not c.a.any()


def test_counts_match_naive_loop():
    rng = np.random.default_rng(0)
    p, n0 = 11, 4
    E = np.zeros((30, p * n0), dtype=np.uint8)
    for row in E:
        row[rng.choice(p * n0, rng.integers(0, 7), replace=False)] = 1
    failed = rng.random(30) < 0.4
    c = count_pairs(E, failed, p, n0)
    a = np.zeros_like(c.a)
    b = np.zeros_like(c.b)
    for row, f in zip(E, failed):
        pos = np.flatnonzero(row)
        for x in range(len(pos)):
            for y in range(x + 1, len(pos)):
                zi, zj = pos[x] // p, pos[y] // p
                if zi == zj:
                    continue
                d = (pos[x] - pos[y]) % p
                d = min(d, p - d)
                b[zi, zj, d] += 1
                a[zi, zj, d] += f
    assert np.array_equal(c.a, a) and np.array_equal(c.b, b)


def test_merging_is_order_free(small_generic_keys):
    sk, pk = small_generic_keys
    whole = run_attack(BobOracle(sk), pk, 600, 3, chunk=100)
    parts = [run_attack(BobOracle(sk), pk, 200, s, chunk=100) for s in (1, 2, 3)]
    merged = parts[0] + parts[1] + parts[2]
    rev = parts[2] + parts[1] + parts[0]
    assert np.array_equal(merged.a, rev.a) and merged.queries == 600
    again = run_attack(BobOracle(sk), pk, 600, 3, chunk=100)
    assert np.array_equal(whole.a, again.a) and np.array_equal(whole.b, again.b)


def test_worker_count_does_not_change_counters(small_generic_keys, monkeypatch):
    sk, pk = small_generic_keys
    monkeypatch.setenv("MONOMIAL_MCELIECE_THREADS", "1")
    one = run_attack(BobOracle(sk), pk, 800, 9, chunk=100)
    monkeypatch.setenv("MONOMIAL_MCELIECE_THREADS", "3")
    many = run_attack(BobOracle(sk), pk, 800, 9, chunk=100)
    assert one.to_csv() == many.to_csv()


def test_csv_round_trip(small_generic_keys):
    sk, pk = small_generic_keys
    c = run_attack(BobOracle(sk), pk, 300, 4)
    back = AttackCounters.from_csv(c.to_csv(), c.p, c.n0)
    assert np.array_equal(back.a, c.a) and np.array_equal(back.b, c.b)
    with pytest.raises(ValueError):
        AttackCounters.from_csv("x,y\n", c.p, c.n0)


def test_oracle_failure_keeps_partial_counters(small_generic_keys):
    sk, pk = small_generic_keys
    bob = BobOracle(sk)
    calls = []

    def flaky(X):
        calls.append(len(X))
        if len(calls) > 2:
            raise ConnectionError("link down")
        return bob(X)

    with pytest.raises(AttackAborted) as info:
        run_attack(flaky, pk, 1000, 1, chunk=100)
    assert info.value.counters.queries % 100 == 0


def test_weight_override_is_honoured(small_generic_keys):
    sk, pk = small_generic_keys
    c = run_attack(BobOracle(sk, t=1), pk, 200, 2, t=1)
    assert c.failures == 0


def _synthetic(p, n0, present, lo=0.1, hi=0.2, b=10**6):
    c = AttackCounters(p, n0)
    for i, j in c.pairs():
        c.b[i, j] = b
        c.a[i, j] = int(hi * b)
        for d in present[(i, j)]:
            c.a[i, j, d] = int(lo * b)
    c.queries = 1
    return c


def test_classifier_on_clean_ratios():
    p, n0 = 13, 3
    truth = DistanceSpectrum(p, n0, {(0, 1): {1, 4}, (0, 2): {0, 6}, (1, 2): {2, 3}})
    c = _synthetic(p, n0, truth.sets)
    for est in (classify_spectrum(c, expected_size=2), classify_spectrum(c)):
        acc = spectrum_accuracy(est, truth)
        assert acc.precision == acc.recall == 1.0
        assert est.to_spectrum() == truth
    flipped = classify_spectrum(c, expected_size=5, lower_is_present=False)
    assert (flipped.status[0, 1, [1, 4]] == ABSENT).all()


def test_flat_ratios_stay_undecided():
    p, n0 = 13, 3
    c = _synthetic(p, n0, {ij: set() for ij in [(0, 1), (0, 2), (1, 2)]})
    est = classify_spectrum(c)
    assert est.all_undecided() and not est.all_present()
    assert (classify_spectrum(c, expected_size=7).status[0, 1] == PRESENT).all()


def test_accuracy_undefined_without_marks():
    p, n0 = 7, 2
    est = classify_spectrum(AttackCounters(p, n0))
    acc = spectrum_accuracy(est, DistanceSpectrum(p, n0, {(0, 1): {1}}))
    assert np.isnan(acc.precision) and acc.recall == 0.0


def test_heldout_statistic_detects_planted_split():
    p, n0 = 23, 4
    rng = np.random.default_rng(0)
    present = {ij: set(rng.choice(np.arange(1, 12), 3, replace=False).tolist())
               for ij in AttackCounters(p, n0).pairs()}
    train, test = _synthetic(p, n0, present), _synthetic(p, n0, present)
    res = heldout_separation(train, test, 3, np.random.default_rng(1), n_perm=200)
    assert res.auc == pytest.approx(1.0) and res.separated
    null = {ij: set() for ij in present}
    flat = heldout_separation(_synthetic(p, n0, null), _synthetic(p, n0, null), 3,
                              np.random.default_rng(1), n_perm=200)
    assert not flat.separated


def test_attack_finds_weak_spectrum():
    # small weak code; enough queries for a clean separation
    sk, pk = keygen(SchemeParams.generic(53, 3, 4, 8), np.random.default_rng(2))
    c = run_attack(BobOracle(sk), pk, 40000, 1)
    assert 0 < c.failures < c.queries
    acc = spectrum_accuracy(classify_spectrum(c, expected_size=3), distance_spectrum(sk.W))
    assert acc.precision >= 0.5
