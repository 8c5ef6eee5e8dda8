import numpy as np
import pytest
from hypothesis import given, strategies as st

from ifs_lab.circle import Identity, Ifs
from ifs_lab.factorization import lift_to_cover
from ifs_lab.families import north_south, rotation
from ifs_lab.random_dynamics import (EmpiricalMeasure, averaged_repeller_measure, backward_stationary, circle_w1,
                                     empirical_stationary, estimate_d, repeller_pushforward_check,
                                     repellers_of_word, sample_word, sample_words, stationarity_residual,
                                     synchronization_test)

SQ = np.sqrt(2) - 1
SYNC = Ifs((rotation(SQ), north_south(0, 0.5, 2)), (0.5, 0.5))


def test_sample_word_examples():
    assert set(sample_word(1, [1.0], 50, 3).symbols) == {1}
    w = sample_word(2, [0.5, 0.5], 100_000, 7)
    freq = np.mean(np.array(w.symbols) == 1)
    assert abs(freq - 0.5) < 0.01
    assert sample_word(3, [0.2, 0.3, 0.5], 500, 11) == sample_word(3, [0.2, 0.3, 0.5], 500, 11)
    a = sample_words(2, [0.5, 0.5], 100, 4, 5)
    assert np.array_equal(a, sample_words(2, [0.5, 0.5], 100, 4, 5))


def test_w1_oracles():
    d = lambda x: EmpiricalMeasure([x])  # noqa: E731
    assert circle_w1(d(0.1), d(0.3)) == pytest.approx(0.2)
    assert circle_w1(d(0.05), d(0.95)) == pytest.approx(0.1)
    # uniform vs a point mass: mean circle distance to the atom
    assert circle_w1(EmpiricalMeasure.uniform_grid(4096), d(0.0)) == pytest.approx(0.25, abs=1e-6)


def test_stationary_north_south_concentrates():
    F = Ifs((north_south(0.2, 0.7, 10),), (1.0,))
    mu = empirical_stationary(F, 0.5, 100_000, None, 0)
    assert mu.mass(0.19, 0.02) >= 0.99


def test_stationary_rotation_uniform():
    F = Ifs((rotation(SQ),), (1.0,))
    mu = empirical_stationary(F, 0.0, 100_000, None, 0)
    x = np.linspace(0, 1, 2001)
    assert np.max(np.abs(mu.cdf(x) - x)) < 0.02
    assert stationarity_residual(F, mu) < 0.02


def test_stationarity_residual_examples():
    mu = EmpiricalMeasure(np.random.default_rng(0).random(100))
    assert stationarity_residual(Ifs((Identity(),)), mu) == pytest.approx(0.0, abs=1e-15)
    F = Ifs((north_south(0.0, 0.5, 10), north_south(0.0, 0.3, 3)))
    assert stationarity_residual(F, EmpiricalMeasure([0.0])) < 1e-12
    assert stationarity_residual(Ifs((rotation(0.3),)), EmpiricalMeasure.uniform_grid(1024)) < 1e-3


def test_sync_minimal_system_collapses():
    s = synchronization_test(SYNC, 32, 3000, 5, rng_seed=1)
    assert s.mean_collapse == pytest.approx(1.0)
    assert all(c == 1 for c in s.cluster_counts)


def test_sync_rotation_preserves_distances():
    s = synchronization_test(Ifs((rotation(SQ),)), 16, 500, 3, rng_seed=1)
    assert s.mean_collapse == 0.0
    assert all(c == 16 for c in s.cluster_counts)


def test_sync_two_cover_gives_antipodal_clusters():
    F2 = lift_to_cover(SYNC, 2)
    s = synchronization_test(F2, 32, 3000, 5, rng_seed=1, tol=1e-6)
    assert all(c == 2 for c in s.cluster_counts)
    assert s.mean_collapse == pytest.approx((2 * 16 * 15 / 2) / (32 * 31 / 2))


def test_estimate_d_small():
    r1 = estimate_d(SYNC, 2048, 2000, 10, rng_seed=1)
    assert r1.d_estimate == 1
    r2 = estimate_d(lift_to_cover(SYNC, 2), 2048, 2000, 10, rng_seed=1)
    assert r2.d_estimate == 2
    assert all(len(r) == 2 for r in r2.repeller_samples)


def test_estimate_d_rotation_inconclusive():
    r = estimate_d(Ifs((rotation(SQ),)), 256, 200, 5, rng_seed=1)
    assert not r.conclusive and r.d_estimate is None


def test_pushforward_identity_first_symbol():
    F = Ifs((rotation(SQ), north_south(0, 0.5, 2), Identity()))
    omega = np.concatenate([[2], sample_words(2, [0.5, 0.5], 2000, 1, 4)[0]])
    assert repeller_pushforward_check(F, omega) == 0.0


def test_pushforward_small_on_sync_system():
    omega = sample_words(2, [0.5, 0.5], 2000, 1, 9)[0]
    R = repellers_of_word(SYNC, omega)
    assert len(R) == 1
    assert repeller_pushforward_check(SYNC, omega) < 1 / 2048
    omega2 = sample_words(2, [0.5, 0.5], 2000, 1, 10)[0]
    assert repeller_pushforward_check(lift_to_cover(SYNC, 2), omega2) < 2 / 2048


def test_stationary_measure_has_no_atoms():
    mu = empirical_stationary(SYNC, 0.0, 100_000, None, 2)
    assert mu.max_ball_mass(0.01) < 0.1
    assert stationarity_residual(SYNC, mu) < 0.05


def test_averaged_repellers_match_backward_measure():
    F2 = lift_to_cover(SYNC, 2)
    rep = estimate_d(F2, 2048, 2000, 30, rng_seed=1)
    mum = backward_stationary(F2, 0.0, 100_000, None, 5)
    assert circle_w1(averaged_repeller_measure(rep), mum) < 0.05


@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=30))
def test_cdf_monotone_and_normalized(pts):
    mu = EmpiricalMeasure(pts)
    assert abs(mu.weights.sum() - 1) < 1e-12
    c = mu.cdf(np.linspace(0, 1, 101))
    assert np.all(np.diff(c) >= 0) and c[-1] == pytest.approx(1.0)


@given(st.integers(0, 2**32), st.integers(1, 200))
def test_sampling_deterministic(seed, n):
    assert sample_word(3, [0.2, 0.3, 0.5], n, seed) == sample_word(3, [0.2, 0.3, 0.5], n, seed)
