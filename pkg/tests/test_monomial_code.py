import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from monomial_mceliece.monomial_code import (
    ConstructionSecret,
    DistanceSpectrum,
    ExponentMatrix,
    build_exponent_matrix,
    count_candidates_log2,
    distance,
    distance_spectrum,
    exponent_matrix_from_secret,
    half_range_escape_oracle,
    is_full_spectrum,
    is_prime,
    multiplier_permutations_oracle,
    random_monomial,
    row_equivalent,
    standard_form,
)

SMALL_PRIMES = [5, 7, 11, 13, 29]


@pytest.mark.parametrize("a,b,p,d", [(3, 3, 7, 0), (1, 6, 7, 2), (0, 51, 103, 51)])
def test_distance_examples(a, b, p, d):
    assert distance(a, b, p) == d


@pytest.mark.parametrize("p", [p for p in range(2, 32) if is_prime(p)])
def test_distance_symmetric_and_bounded(p):
    for a, b in itertools.product(range(p), repeat=2):
        assert distance(a, b, p) == distance(b, a, p) <= p // 2


def test_construction_with_zero_offsets():
    secret = ConstructionSecret(y=(0, 0, 0), v=(0, 1, 2, 3, 4), q=(0, 1, 2))
    W = exponent_matrix_from_secret(secret)
    for j in range(5):
        assert W.w[:, j].tolist() == [0, j, 2 * j % 5]
    assert standard_form(W) == W


def test_construction_rejects_non_primes_and_tiny_p():
    with pytest.raises(ValueError):
        build_exponent_matrix(9, np.random.default_rng(0))
    with pytest.raises(ValueError):
        build_exponent_matrix(3, np.random.default_rng(0))


def test_construction_is_seed_deterministic():
    a, _ = build_exponent_matrix(7, np.random.default_rng(42))
    b, _ = build_exponent_matrix(7, np.random.default_rng(42))
    assert a == b


@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_constructed_codes_are_full_spectrum(p):
    rng = np.random.default_rng(p)
    first = None
    for _ in range(25):
        W, _ = build_exponent_matrix(p, rng)
        S = distance_spectrum(W)
        assert is_full_spectrum(S)
        assert all(S[ij] == frozenset(range(p // 2 + 1)) for ij in S.sets)
        # every construction output shares one spectrum
        first = S if first is None else first
        assert S == first


def test_spectrum_examples():
    assert distance_spectrum(ExponentMatrix(7, [[2, 2]]))[0, 1] == {0}
    assert distance_spectrum(ExponentMatrix(7, [[0, 1], [0, 3]]))[0, 1] == {1, 3}


def test_incomplete_spectrum_is_not_full():
    W, _ = build_exponent_matrix(7, np.random.default_rng(1))
    S = distance_spectrum(W)
    sets = dict(S.sets)
    sets[(0, 1)] = sets[(0, 1)] - {2}
    assert not is_full_spectrum(DistanceSpectrum(7, 7, sets))


@given(st.integers(0, 2**32 - 1))
def test_few_rows_never_full_spectrum(seed):
    W = ExponentMatrix(11, np.random.default_rng(seed).integers(0, 11, size=(5, 6)))
    assert not is_full_spectrum(distance_spectrum(W))


@given(st.sampled_from([7, 11, 13]), st.integers(1, 4), st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_standard_form_keeps_spectrum(p, r0, n0, seed):
    W = ExponentMatrix(p, np.random.default_rng(seed).integers(0, p, size=(r0, n0)))
    Ws = standard_form(W)
    assert not Ws.w[:, 0].any()
    assert standard_form(Ws) == Ws
    assert distance_spectrum(Ws) == distance_spectrum(W)


def test_standard_form_example():
    assert standard_form(ExponentMatrix(5, [[1, 2], [3, 0]])).w.tolist() == [[0, 1], [0, 2]]


def test_row_equivalence():
    A = ExponentMatrix(11, [[0, 1, 2], [0, 3, 5], [0, 7, 1]])
    assert row_equivalent(A, ExponentMatrix(11, A.w[::-1]))
    changed = A.w.copy()
    changed[1, 2] = 6
    assert not row_equivalent(A, ExponentMatrix(11, changed))
    with pytest.raises(ValueError):
        row_equivalent(A, ExponentMatrix(11, A.w[:2]))


def test_different_column_labels_give_different_standard_forms():
    rng = np.random.default_rng(4)
    for _ in range(50):
        W0, s0 = build_exponent_matrix(11, rng)
        W1, s1 = build_exponent_matrix(11, rng)
        if s0.standard_v() != s1.standard_v():
            assert not row_equivalent(standard_form(W0), standard_form(W1))


@pytest.mark.parametrize("p", [3, 5, 7])
def test_multiplier_permutations_exhaustive(p):
    for z in itertools.permutations(range(1, p)):
        assert multiplier_permutations_oracle(p, z)


@pytest.mark.parametrize("p", [p for p in range(5, 100) if is_prime(p)])
def test_number_theory_oracles(p):
    assert multiplier_permutations_oracle(p)
    assert half_range_escape_oracle(p)


def test_half_range_oracle_small_case():
    # alpha = 2, beta = 2 gives 4 > 2 at p = 5
    assert half_range_escape_oracle(5)


@pytest.mark.parametrize("p,expected", [(103, 538), (137, 773), (257, 1684)])
def test_candidate_count(p, expected):
    assert abs(count_candidates_log2(p) - expected) <= 1


def test_candidate_count_tiny():
    assert count_candidates_log2(3) == pytest.approx(1.0)


@pytest.mark.parametrize("shape", [(3, 4), (5, 6), (5, 8), (2, 3)])
def test_random_monomial_has_distinct_distances(shape):
    r0, n0 = shape
    W = random_monomial(53, r0, n0, np.random.default_rng(1))
    S = distance_spectrum(W)
    assert all(len(S[ij]) == r0 for ij in S.sets)
    assert all(len(set(row)) > 1 for row in W.w.tolist())


def test_text_round_trips():
    W, _ = build_exponent_matrix(11, np.random.default_rng(3))
    assert ExponentMatrix.from_text(W.to_text()) == W
    S = distance_spectrum(random_monomial(31, 3, 4, np.random.default_rng(2)))
    assert DistanceSpectrum.from_text(S.to_text()) == S


def test_exponents_validated():
    with pytest.raises(ValueError):
        ExponentMatrix(5, [[0, 5]])
    with pytest.raises(ValueError):
        DistanceSpectrum(5, 3, {(0, 1): {3}})
