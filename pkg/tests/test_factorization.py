import numpy as np
import pytest
from hypothesis import given, strategies as st

from ifs_lab.circle import Ifs
from ifs_lab.errors import AtomError
from ifs_lab.factorization import (commutation_residual, deck_rotation, factorization_report, lift_to_cover,
                                   measure_rotation, power_identity_error)
from ifs_lab.families import north_south, rotation
from ifs_lab.random_dynamics import EmpiricalMeasure, empirical_stationary

SQ = np.sqrt(2) - 1
SYNC = Ifs((rotation(SQ), north_south(0, 0.5, 2)), (0.5, 0.5))
X = np.arange(4096) / 4096


def quantile_measure(M=100_000):
    # atoms at the (k + 1/2)/M quantiles of the CDF x^2
    return EmpiricalMeasure(np.sqrt((np.arange(M) + 0.5) / M))


def test_uniform_measure_gives_rotation():
    for d in (2, 3, 5):
        T = measure_rotation(EmpiricalMeasure.uniform_grid(1024), d)
        assert np.max(np.abs(T.lift(X) - (X + 1 / d))) < 1e-12


def test_square_cdf_half_turn():
    T = measure_rotation(quantile_measure(), 2)
    assert float(T.apply(0.0)) == pytest.approx(1 / np.sqrt(2), abs=1e-4)


def test_power_identity():
    mu = empirical_stationary(SYNC, 0.0, 20_000, None, 3)
    T = measure_rotation(mu, 3)
    assert power_identity_error(T, 3) < 1e-6


def test_heavy_atom_rejected():
    with pytest.raises(AtomError):
        measure_rotation(EmpiricalMeasure([0.1, 0.2, 0.3], [0.6, 0.2, 0.2]), 2)


def test_commutation_examples():
    F = Ifs((rotation(SQ),))
    assert commutation_residual(rotation(0.5), F, X) < 1e-12
    F2 = lift_to_cover(SYNC, 2)
    assert commutation_residual(deck_rotation(2), F2, X) < 1e-12


def test_lift_examples():
    assert lift_to_cover(SYNC, 1) is SYNC
    F3 = lift_to_cover(Ifs((rotation(0.3),)), 3)
    assert np.max(np.abs(F3[1].lift(X) - (X + 0.1))) < 1e-12
    F3k = lift_to_cover(Ifs((rotation(0.3),)), 3, [1])
    assert np.max(np.abs(F3k[1].lift(X) - (X + 0.1 + 1 / 3))) < 1e-12


def test_report_synchronizing():
    rep = factorization_report(SYNC, trials=10, rng_seed=1)
    assert rep.d == 1 and rep.verdict == "globally synchronizing"


def test_report_two_cover():
    rep = factorization_report(lift_to_cover(SYNC, 2), N=100_000, rng_seed=1, d=2)
    assert rep.verdict == "factorizable"
    assert rep.residual_full < 0.02 and rep.residual_minus < 0.02
    assert rep.power_error < 1e-6


@given(st.floats(0, 1, exclude_max=True), st.floats(0.001, 0.999))
def test_measure_rotation_preserves_arc_mass(x, length):
    mu = empirical_stationary(SYNC, 0.0, 5_000, None, 4)
    T = measure_rotation(mu, 2)
    tx = float(T.lift(x))
    ty = float(T.lift(x + length))
    before = mu.lifted_cdf(x + length) - mu.lifted_cdf(x)
    after = mu.lifted_cdf(ty) - mu.lifted_cdf(tx)
    assert abs(before - after) <= 4 * mu.weights.max() + 1e-12


@given(st.integers(2, 5), st.lists(st.integers(0, 4), min_size=2, max_size=2))
def test_cover_lifts_commute_with_deck(d, ks):
    F = lift_to_cover(SYNC, d, [k % d for k in ks])
    assert commutation_residual(deck_rotation(d), F, X[::8]) < 1e-12
