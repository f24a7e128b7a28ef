"""Encoder, CRC, and SC/SCL decoder tests."""

import numpy as np
import pytest

from polarseq.beta_expansion import ReliabilitySequence, rank_by_pw
from polarseq.codec import (
    CodeConfig,
    Codeword,
    assemble,
    crc_attach,
    crc_check,
    encode,
    sc_decode,
    scl_decode,
    select_frozen,
)

REFERENCE_ORDER_16 = (0, 1, 2, 4, 8, 3, 5, 6, 9, 10, 12, 7, 11, 13, 14, 15)


def noisy_llr(x, sigma, rng):
    symbols = 1.0 - 2.0 * x.astype(np.float64)
    y = symbols + sigma * rng.standard_normal(x.size)
    return 2.0 * y / sigma**2


def test_encode_zero_and_single_butterfly():
    assert np.array_equal(encode(np.zeros(8, dtype=np.uint8), 3), np.zeros(8))
    for u0 in (0, 1):
        for u1 in (0, 1):
            x = encode(np.array([u0, u1], dtype=np.uint8), 1)
            assert list(x) == [u0 ^ u1, u1]


def test_encode_is_involution_exhaustive_small():
    from polarseq.codec import _transform_rows

    for n in range(1, 5):
        size = 1 << n
        words = np.arange(1 << size, dtype=np.int64)
        rows = ((words[:, None] >> np.arange(size)[None, :]) & 1).astype(np.uint8)
        twice = _transform_rows(_transform_rows(rows.copy()))
        assert np.array_equal(twice, rows)


def test_encode_is_involution_randomized():
    rng = np.random.default_rng(3)
    for n in (5, 6):
        for _ in range(50):
            u = rng.integers(0, 2, size=1 << n, dtype=np.uint8)
            assert np.array_equal(encode(encode(u, n), n), u)


def test_encode_length_validation():
    with pytest.raises(ValueError):
        encode(np.zeros(6, dtype=np.uint8), 3)
    with pytest.raises(ValueError):
        encode(np.zeros((2, 4), dtype=np.uint8), 3)


def test_select_frozen_reference_order():
    seq = ReliabilitySequence(4, REFERENCE_ORDER_16)
    config = select_frozen(seq, 8)
    assert config.frozen_set == frozenset({0, 1, 2, 4, 8, 3, 5, 6})
    assert select_frozen(seq, 16).frozen_set == frozenset()
    assert select_frozen(seq, 0).frozen_set == frozenset(range(16))
    with pytest.raises(ValueError):
        select_frozen(seq, 15, crc_bits=8)


def test_code_config_validation():
    with pytest.raises(ValueError):
        CodeConfig(3, 4, frozenset({0, 1, 2}))  # wrong frozen count
    with pytest.raises(ValueError):
        CodeConfig(3, 4, frozenset({0, 1, 2, 9}))  # out of range
    config = CodeConfig(3, 4, frozenset({0, 1, 2, 3}))
    assert config.payload_positions == (4, 5, 6, 7)


def test_assemble_round_trip():
    seq = rank_by_pw(3, 1.1892)
    config = select_frozen(seq, 4)
    word = assemble(config, [1, 0, 1, 1])
    assert isinstance(word, Codeword)
    assert np.array_equal(encode(word.x, 3), word.u)
    assert all(word.u[i] == 0 for i in config.frozen_set)


@pytest.mark.parametrize("width", [0, 8, 16, 19])
def test_crc_round_trip(width):
    rng = np.random.default_rng(width)
    for _ in range(100):
        info = rng.integers(0, 2, size=40, dtype=np.uint8)
        coded = crc_attach(info, width)
        assert coded.size == 40 + width
        assert crc_check(coded, width)


def test_crc_detects_single_flips():
    rng = np.random.default_rng(5)
    for _ in range(20):
        info = rng.integers(0, 2, size=30, dtype=np.uint8)
        coded = crc_attach(info, 19)
        for pos in range(coded.size):
            flipped = coded.copy()
            flipped[pos] ^= 1
            assert not crc_check(flipped, 19)


def test_crc_width_zero_is_identity():
    info = np.array([1, 0, 1], dtype=np.uint8)
    assert np.array_equal(crc_attach(info, 0), info)
    assert crc_check(info, 0)


def test_crc_unsupported_width():
    with pytest.raises(ValueError):
        crc_attach(np.zeros(4, dtype=np.uint8), 5)


@pytest.mark.parametrize("n", range(2, 9))
def test_sc_noiseless_recovery_any_frozen_set(n):
    rng = np.random.default_rng(n)
    size = 1 << n
    for _ in range(6):
        k = int(rng.integers(1, size))
        frozen = frozenset(map(int, rng.permutation(size)[: size - k]))
        config = CodeConfig(n, k, frozen)
        payload = rng.integers(0, 2, size=k, dtype=np.uint8)
        word = assemble(config, payload)
        llr = 40.0 * (1.0 - 2.0 * word.x.astype(np.float64))
        assert np.array_equal(sc_decode(llr, config), payload)


def test_sc_all_frozen():
    config = CodeConfig(3, 0, frozenset(range(8)))
    llr = 40.0 * np.ones(8)
    assert sc_decode(llr, config).size == 0


def test_scl_list_one_equals_sc():
    rng = np.random.default_rng(17)
    for n in (3, 4, 5, 6):
        seq = rank_by_pw(n, 1.1892)
        config = select_frozen(seq, (1 << n) // 2, list_size=1)
        for _ in range(75):
            payload = rng.integers(0, 2, size=config.info_count, dtype=np.uint8)
            word = assemble(config, payload)
            llr = noisy_llr(word.x, 1.0, rng)
            assert np.array_equal(sc_decode(llr, config), scl_decode(llr, config))


def test_scl_noiseless_any_list_size():
    rng = np.random.default_rng(23)
    seq = rank_by_pw(4, 1.1892)
    for L in (1, 2, 4, 8):
        config = select_frozen(seq, 8, list_size=L)
        payload = rng.integers(0, 2, size=8, dtype=np.uint8)
        word = assemble(config, payload)
        llr = 40.0 * (1.0 - 2.0 * word.x.astype(np.float64))
        assert np.array_equal(scl_decode(llr, config), payload)


def test_scl_crc_selects_checking_path():
    rng = np.random.default_rng(29)
    seq = rank_by_pw(5, 1.1892)
    config = select_frozen(seq, 10, crc_bits=8, list_size=4)
    hits = 0
    for _ in range(60):
        info = rng.integers(0, 2, size=10, dtype=np.uint8)
        payload = crc_attach(info, 8)
        word = assemble(config, payload)
        llr = noisy_llr(word.x, 0.9, rng)
        decoded, diag = scl_decode(llr, config, with_diagnostics=True)
        if diag.crc_passed:
            hits += 1
            assert crc_check(decoded, 8)
        assert diag.path_metric >= 0.0
    assert hits > 0


def test_scl_path_metric_increments_nonnegative():
    # the per-decision penalty log(1 + exp(-(1-2u) llr)) is never negative
    llrs = np.linspace(-30, 30, 101)
    for u in (0, 1):
        penalties = np.logaddexp(0.0, -(1.0 - 2.0 * u) * llrs)
        assert np.all(penalties >= 0.0)


def test_min_sum_variant_matches_exact_at_high_snr():
    rng = np.random.default_rng(31)
    seq = rank_by_pw(5, 1.1892)
    config = select_frozen(seq, 16)
    for _ in range(20):
        payload = rng.integers(0, 2, size=16, dtype=np.uint8)
        word = assemble(config, payload)
        llr = noisy_llr(word.x, 0.4, rng)
        assert np.array_equal(
            sc_decode(llr, config, min_sum=True), sc_decode(llr, config)
        )
