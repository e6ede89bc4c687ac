import numpy as np
import pytest
from hypothesis import given, strategies as st

from monomial_mceliece.crypto_scheme import (
    DecoderConfig,
    DecodingFailure,
    KeyFileError,
    SchemeParams,
    bit_flip_decode,
    bit_flip_decode_batch,
    decrypt,
    decrypt_batch,
    encrypt,
    encrypt_batch,
    estimate_dfr,
    format_private_key,
    format_public_key,
    keygen,
    parse_private_key,
    parse_public_key,
    preset_params,
)
from monomial_mceliece.qc_algebra import gf2_rank, is_zero_product


def _error(n, positions):
    e = np.zeros(n, dtype=np.uint8)
    e[list(positions)] = 1
    return e


def test_full_spectrum_key_shape(small_full_keys):
    sk, pk = small_full_keys
    assert (sk.params.r0, sk.params.n0) == (7, 13)
    assert sk.H.row_weights() == [13] * 7
    assert is_zero_product(sk.H, pk.G)


def test_generic_key_null_product(small_generic_keys):
    sk, pk = small_generic_keys
    assert is_zero_product(sk.H, pk.G)
    assert pk.systematic


def test_dense_and_structured_generators_both_valid():
    # H has dependent rows, so the parity part is not unique; both must still work
    par = SchemeParams.full(11, 2)
    sk_a, pk_a = keygen(par, np.random.default_rng(9))
    sk_b, pk_b = keygen(par, np.random.default_rng(9), solver="dense")
    assert sk_a == sk_b
    for pk in (pk_a, pk_b):
        assert pk.systematic and is_zero_product(sk_a.H, pk.G)
        assert gf2_rank(pk.G.dense()) == par.k


def test_keygen_is_seed_deterministic():
    par = SchemeParams.full(17, 3)
    a = keygen(par, np.random.default_rng(5))
    b = keygen(par, np.random.default_rng(5))
    assert format_private_key(a[0]) == format_private_key(b[0])
    assert format_public_key(a[1]) == format_public_key(b[1])


def test_params_validation():
    with pytest.raises(ValueError):
        SchemeParams.full(15, 3)
    with pytest.raises(ValueError):
        SchemeParams.generic(11, 4, 4, 2)
    with pytest.raises(ValueError):
        SchemeParams(p=11, r0=5, n0=11, t=2)
    with pytest.raises(ValueError):
        SchemeParams.generic(11, 2, 3, 2, m=2)
    assert preset_params("sl128").p == 137


def test_encrypt_trivial_cases(small_full_keys):
    sk, pk = small_full_keys
    par = pk.params
    zero_u = np.zeros(par.k, dtype=np.uint8)
    assert not encrypt(pk, zero_u, np.zeros(par.n, dtype=np.uint8)).any()
    e = _error(par.n, [3, 77])
    assert np.array_equal(encrypt(pk, zero_u, e), e)
    u = np.random.default_rng(0).integers(0, 2, par.k, dtype=np.uint8)
    assert np.array_equal(decrypt(sk, encrypt(pk, u, np.zeros(par.n, dtype=np.uint8))), u)


def test_encrypt_checks_lengths_and_weight(small_full_keys):
    _, pk = small_full_keys
    par = pk.params
    with pytest.raises(ValueError):
        encrypt(pk, np.zeros(par.k - 1, dtype=np.uint8), np.zeros(par.n, dtype=np.uint8))
    with pytest.raises(ValueError):
        encrypt(pk, np.zeros(par.k, dtype=np.uint8), _error(par.n, [1, 2, 3]))


def test_zero_syndrome_word_is_untouched(small_full_keys):
    sk, pk = small_full_keys
    u = np.ones(pk.params.k, dtype=np.uint8)
    x = pk.encode(u[None])[0]
    C, ok, iters, sw = bit_flip_decode_batch(sk.H, x[None])
    assert ok[0] and iters[0] == 0 and sw[0] == 0
    assert np.array_equal(C[0], x)


def test_every_single_error_fixed_in_one_iteration(small_full_keys):
    sk, pk = small_full_keys
    n = pk.params.n
    X = np.eye(n, dtype=np.uint8)
    C, ok, iters, _ = bit_flip_decode_batch(sk.H, X)
    assert ok.all() and (iters == 1).all() and not C.any()


@given(st.integers(0, 2**32 - 1))
def test_round_trip_whenever_decoding_succeeds(seed):
    par = SchemeParams.generic(31, 3, 5, 3)
    rng = np.random.default_rng(seed)
    sk, pk = keygen(par, np.random.default_rng(5))
    U = rng.integers(0, 2, size=(40, par.k), dtype=np.uint8)
    E = np.zeros((40, par.n), dtype=np.uint8)
    for row in E:
        row[rng.choice(par.n, par.t, replace=False)] = 1
    X = encrypt_batch(pk, U, E)
    U_hat, ok, err_w = decrypt_batch(sk, X)
    # a success with the right error weight is never a wrong plaintext
    good = ok & (err_w == par.t)
    assert np.array_equal(U_hat[good], U[good])
    # re-encoding exposes a weight-t difference
    assert ((pk.encode(U_hat[good]) ^ X[good]).sum(axis=1) == par.t).all()


def test_overweight_errors_fail(small_full_keys):
    sk, pk = small_full_keys
    par = pk.params
    rng = np.random.default_rng(1)
    X = rng.integers(0, 2, size=(300, par.n), dtype=np.uint8)
    _, ok, _, _ = bit_flip_decode_batch(sk.H, X)
    assert (~ok).mean() > 0.99
    res = bit_flip_decode(sk.H, X[np.flatnonzero(~ok)[0]])
    assert isinstance(res, DecodingFailure) and not res


def test_dfr_edge_cases(small_full_keys):
    keys = small_full_keys
    n = keys[0].params.n
    assert estimate_dfr(keys, 0, 50, 1).rate == 0.0
    # odd row weight: an all-ones error leaves every check unsatisfied, so one
    # round of flipping removes it completely
    assert estimate_dfr(keys, n, 50, 1).rate == 0.0
    assert estimate_dfr(keys, n // 2, 200, 1).rate > 0.99
    with pytest.raises(ValueError):
        estimate_dfr(keys, 1, 0, 1)


def test_dfr_reproducible_and_has_interval(small_full_keys):
    a = estimate_dfr(small_full_keys, 4, 500, 7)
    b = estimate_dfr(small_full_keys, 4, 500, 7)
    assert a == b
    assert a.ci_low <= a.rate <= a.ci_high


def test_dfr_independent_of_worker_count(small_full_keys, monkeypatch):
    monkeypatch.setenv("MONOMIAL_MCELIECE_THREADS", "1")
    a = estimate_dfr(small_full_keys, 4, 600, 3, chunk=100)
    monkeypatch.setenv("MONOMIAL_MCELIECE_THREADS", "4")
    b = estimate_dfr(small_full_keys, 4, 600, 3, chunk=100)
    assert a == b


def test_dfr_monotone_over_sweep():
    keys = keygen(SchemeParams.full(19, 7), np.random.default_rng(3))
    ests = [estimate_dfr(keys, t, 800, 2) for t in range(5, 11)]
    # each step either overlaps or increases at 95% confidence
    for lo, hi in zip(ests, ests[1:]):
        assert hi.ci_high >= lo.ci_low


def test_fixed_threshold_knob():
    cfg = DecoderConfig(max_iters=3, threshold=30)
    H = keygen(SchemeParams.full(13, 2), np.random.default_rng(0))[0].H
    _, ok, _, _ = bit_flip_decode_batch(H, np.eye(H.shape[1], dtype=np.uint8)[:5], cfg)
    # with 7 checks per bit a threshold of 30 never flips
    assert not ok.any()
    with pytest.raises(ValueError):
        DecoderConfig(max_iters=0)


def test_key_files_round_trip(small_full_keys, small_generic_keys):
    for sk, pk in (small_full_keys, small_generic_keys):
        sk2 = parse_private_key(format_private_key(sk))
        pk2 = parse_public_key(format_public_key(pk))
        assert sk2 == sk and pk2 == pk


def test_key_files_with_transform_round_trip():
    sk, pk = keygen(SchemeParams.full(13, 1, m=3), np.random.default_rng(4))
    assert parse_private_key(format_private_key(sk)) == sk
    assert parse_public_key(format_public_key(pk)) == pk
    u = np.random.default_rng(1).integers(0, 2, pk.params.k, dtype=np.uint8)
    e = _error(pk.params.n, [40])
    res = decrypt(sk, encrypt(pk, u, e))
    assert not isinstance(res, DecodingFailure)
    assert np.array_equal(res, u)


@pytest.mark.parametrize("text", ["", "garbage\n1 2 3", "MONOMIAL-MCELIECE v1\n13 7 13 2\n"])
def test_malformed_key_files(text):
    with pytest.raises(KeyFileError):
        parse_private_key(text)
    with pytest.raises(KeyFileError):
        parse_public_key(text)
