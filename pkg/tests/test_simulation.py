"""Monte-Carlo harness and convergence-study tests."""

import math

import numpy as np
import pytest

from polarseq.beta_expansion import rank_by_pw
from polarseq.codec import select_frozen
from polarseq.simulation import (
    BlerPoint,
    SimConfig,
    convergence_study,
    format_bler_csv,
    format_study_tsv,
    required_snr_from_points,
    run_bler,
    transmit,
)

KEEP = 2.0 ** 0.25


def small_sim(**overrides):
    seq = rank_by_pw(3, 1.1892)
    defaults = dict(
        code=select_frozen(seq, 4),
        modulation="bpsk",
        snr_points_db=(2.0,),
        max_trials=200,
        target_errors=50,
        seed=42,
    )
    defaults.update(overrides)
    return SimConfig(**defaults)


def test_transmit_signs_at_high_snr():
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, size=64, dtype=np.uint8)
    llr = transmit(bits, 40.0, "bpsk", rng)
    assert np.all((llr < 0) == (bits == 1))


def test_transmit_conditional_mean():
    rng = np.random.default_rng(1)
    bits = np.zeros(100000, dtype=np.uint8)
    snr_db = 1.0
    sigma2 = 1.0 / (2.0 * 10.0 ** (snr_db / 10.0))
    llr = transmit(bits, snr_db, "bpsk", rng)
    assert llr.mean() == pytest.approx(2.0 / sigma2, rel=0.03)


def test_transmit_qpsk_matches_bpsk_statistics():
    bits = np.zeros(100000, dtype=np.uint8)
    a = transmit(bits, 0.0, "bpsk", np.random.default_rng(2))
    b = transmit(bits, 0.0, "qpsk", np.random.default_rng(3))
    assert a.mean() == pytest.approx(b.mean(), rel=0.05)
    assert a.std() == pytest.approx(b.std(), rel=0.05)


def test_transmit_validation():
    with pytest.raises(ValueError):
        transmit(np.zeros(3, dtype=np.uint8), 0.0, "qpsk", np.random.default_rng(0))
    with pytest.raises(ValueError):
        transmit(np.zeros(4, dtype=np.uint8), 0.0, "8psk", np.random.default_rng(0))


def test_run_bler_deterministic():
    sim = small_sim()
    assert run_bler(sim) == run_bler(sim)


def test_run_bler_noiseless():
    sim = small_sim(snr_points_db=(100.0,), max_trials=5, target_errors=1)
    (point,) = run_bler(sim)
    assert point.block_errors == 0
    assert point.bler == 0.0
    assert point.under_resolved


def test_run_bler_monotone_in_snr():
    seq = rank_by_pw(3, 1.1892)
    sim = SimConfig(
        code=select_frozen(seq, 4),
        snr_points_db=(-2.0, 2.0, 6.0),
        max_trials=2000,
        target_errors=2000,
        seed=9,
    )
    points = run_bler(sim)
    blers = [p.bler for p in points]
    assert blers[0] > blers[1] > blers[2]


def test_run_bler_counts_are_consistent():
    sim = small_sim(snr_points_db=(0.0,), max_trials=256, target_errors=10000)
    (point,) = run_bler(sim)
    assert point.trials == 256
    assert point.bler == point.block_errors / point.trials
    assert 0.0 <= point.half_width_95 <= 1.0


def test_run_bler_crc_errors_are_mostly_detected():
    seq = rank_by_pw(6, 1.1892)
    code = select_frozen(seq, 24, crc_bits=8, list_size=2)
    sim = SimConfig(code=code, snr_points_db=(-1.5,), max_trials=1500,
                    target_errors=30, seed=77)
    (point,) = run_bler(sim)
    assert point.block_errors == point.detected_errors + point.undetected_errors
    assert point.block_errors >= 10
    assert point.detected_errors >= point.undetected_errors


def test_required_snr_exact_hit_and_interpolation():
    pts = [
        BlerPoint(1.0, 1000, 3, 3e-3, 0.0),
        BlerPoint(1.5, 1000, 1, 5e-4, 0.0),
    ]
    value = required_snr_from_points(pts, 1e-3)
    assert 1.0 < value < 1.5
    exact = [BlerPoint(2.0, 100, 10, 1e-1, 0.0)]
    assert required_snr_from_points(exact, 1e-1) == 2.0
    with pytest.raises(ValueError):
        required_snr_from_points(pts, 1e-6)


def test_convergence_study_matches_reference_table():
    steps = convergence_study(6)
    by_label = {s.step: s for s in steps}
    assert list(by_label) == ["4->8", "8->16", "16->32", "32->64"]
    assert by_label["4->8"].interval.hi == pytest.approx(1.618034, abs=2e-3)
    assert by_label["8->16"].interval.hi == pytest.approx(1.324718, abs=2e-3)
    step32 = by_label["16->32"]
    assert step32.interval.lo == pytest.approx(1.179, abs=2e-3)
    assert step32.interval.hi == pytest.approx(1.221, abs=2e-3)
    assert step32.new_pairs == 5
    step64 = by_label["32->64"]
    assert step64.interval.lo == pytest.approx(1.179, abs=5e-3)
    assert step64.interval.hi == pytest.approx(1.194, abs=5e-3)
    assert 8 <= step64.new_pairs <= 12


def test_convergence_study_intervals_nest_and_keep_reference():
    steps = convergence_study(8)
    previous_lo, previous_hi = 1.0, math.inf
    for step in steps:
        assert previous_lo <= step.interval.lo < step.interval.hi <= previous_hi
        assert step.interval.contains(KEEP)
        previous_lo, previous_hi = step.interval.lo, step.interval.hi


def test_convergence_study_empty_below_width_3():
    assert convergence_study(2) == []


def test_convergence_study_width_bound():
    with pytest.raises(ValueError):
        convergence_study(11)


def test_bler_csv_format():
    points = [BlerPoint(1.0, 10, 1, 0.1, 0.186)]
    text = format_bler_csv(points)
    assert text == (
        "snr_db,trials,block_errors,bler,ci95\n"
        "1.000000,10,1,0.100000,0.186000\n"
    )


def test_study_tsv_format():
    steps = convergence_study(3)
    text = format_study_tsv(steps)
    lines = text.splitlines()
    assert lines[0] == "step\tlo\thi\tnew_pairs"
    assert lines[1] == "4->8\t1.000000\t1.618034\t1"
