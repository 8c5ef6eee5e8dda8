import numpy as np
import pytest
from hypothesis import given, strategies as st

from ifs_lab.circle import Identity, Ifs, compose_word
from ifs_lab.errors import PrecisionError
from ifs_lab.families import arnold, north_south, rotation, translate_ifs
from ifs_lab.reachability import detect_strictly_absorbing
from ifs_lab.random_dynamics import EmpiricalMeasure
from ifs_lab.rotation import (eps_interval, gap_word_search, measure_growth_diagnostic, rho_crossing_search,
                              translated_word_rho, translation_number, verify_gap)

GOLDEN = (np.sqrt(5) - 1) / 2


def test_translation_number_examples():
    est = translation_number(rotation(0.35), 10_000)
    assert est.value == pytest.approx(0.35, abs=1e-4)
    assert est.error_bound == 1e-4 and est.iterations == 10_000
    ns = translation_number(north_south(0, 0.5, 100), 1000)
    assert abs(ns.value) <= ns.error_bound
    with pytest.raises(PrecisionError):
        translation_number(rotation(0.1), 0)


def test_translation_number_doubling_stable():
    f = arnold(0.3, 0.1)
    a = translation_number(f, 100_000).value
    b = translation_number(f, 200_000).value
    assert abs(a - b) < 1e-5


def test_gap_search_absorbing_not_found():
    F = Ifs((north_south(0, 0.5, 100),))
    res = gap_word_search(F, 1e-4, max_len=60)
    assert not res.found
    assert detect_strictly_absorbing(F, 1e-4, 2.5e-5).found


def test_gap_search_witness_rechecks():
    F = Ifs((rotation(GOLDEN), north_south(0, 0.5, 50)))
    res = gap_word_search(F, 0.01, max_len=200)
    assert res.found
    w = res.witness
    assert w.upper - w.lower > 1
    lo, hi = eps_interval(F, w.word, 0.01)
    assert abs(lo - w.lower) < 1e-9 and abs(hi - w.upper) < 1e-9
    assert verify_gap(F, w)
    assert not detect_strictly_absorbing(F, 0.01, 0.0025).found


def test_gap_search_identity():
    eps = 0.5
    F = Ifs((Identity(),))
    res = gap_word_search(F, eps, max_len=10)
    assert res.found
    n = int(np.ceil(1 / (2 * eps))) + 1
    lo, hi = eps_interval(F, "1" * n, eps)
    assert hi > lo + 1
    assert len(res.witness.word) <= n


def test_rho_crossing_examples():
    F = Ifs((rotation(0.3),))
    r = rho_crossing_search(F, "1", "1/3", (-0.05, 0.05))
    assert r.crossed and r.hi - r.lo < 1e-10
    assert r.midpoint == pytest.approx(1 / 30, abs=1e-10)
    # both letters are shifted, so rho of the square is 0.6 + 2 delta
    r2 = rho_crossing_search(F, "11", "2/3", (-0.05, 0.05))
    assert r2.midpoint == pytest.approx(1 / 30, abs=1e-10)
    assert float(translated_word_rho(F, "11", [r2.hi], 10_000)[0]) == pytest.approx(2 / 3, abs=1e-4)
    none = rho_crossing_search(F, "1", "1/2", (-0.05, 0.05))
    assert not none.crossed


def test_rho_crossing_on_gap_word():
    F = Ifs((rotation(GOLDEN), north_south(0, 0.5, 50)))
    w = gap_word_search(F, 0.01, max_len=200).witness.word
    r0 = float(translated_word_rho(F, w, [0.0], 10_000)[0])
    target = (np.floor(r0 * 7) + 1) / 7
    r = rho_crossing_search(F, w, target, (-0.01, 0.01))
    assert r.crossed
    n = 100_000
    lo = translation_number(compose_word(translate_ifs(F, r.lo), w), n)
    hi = translation_number(compose_word(translate_ifs(F, r.hi), w), n)
    assert lo.value <= target + 2 * lo.error_bound + 1e-4
    assert hi.value >= target - 2 * hi.error_bound - 1e-4


def test_measure_growth_identity():
    eps = 0.01
    mu = EmpiricalMeasure.uniform_grid(4096)
    series = measure_growth_diagnostic(Ifs((Identity(),)), eps, trials=8, horizon=20, mu=mu)
    assert series[0] == 0.0
    n = np.arange(21)
    assert np.max(np.abs(series - 2 * eps * n)) < 2 / 4096


def test_measure_growth_exceeds_one():
    F = Ifs((rotation(GOLDEN), north_south(0, 0.5, 50)))
    series = measure_growth_diagnostic(F, 0.01, trials=128, horizon=150, rng_seed=3, stationary_n=20_000)
    assert series[-1] > 1
    # non-decreasing up to Monte-Carlo noise
    assert np.all(series >= np.maximum.accumulate(series) - 0.05)


@given(st.floats(0.01, 0.49), st.floats(-0.2, 0.2))
def test_square_translation_number(a, amp):
    f = arnold(a, amp)
    n = 2000
    one = translation_number(f, 2 * n)
    two = translation_number(compose_word(Ifs((f,)), "11"), n)
    assert abs(two.value - 2 * one.value) <= two.error_bound + 2 * one.error_bound


@given(st.floats(-0.05, 0.05), st.floats(0.0, 0.05))
def test_rho_monotone_in_delta(d, step):
    F = Ifs((rotation(GOLDEN), north_south(0, 0.5, 5)))
    r = translated_word_rho(F, "12", [d, d + step], 2000)
    assert r[1] >= r[0] - 2 / 2000
