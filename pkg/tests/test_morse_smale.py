import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from ifs_lab.circle import Identity, circle_distance, Ifs, Word, compose_word, fd_derivative
from ifs_lab.errors import NoFixedPointsError, NotFixedError, SmoothnessError
from ifs_lab.factorization import lift_to_cover
from ifs_lab.families import arnold, bump_perturbation, north_south, rotation
from ifs_lab.morse_smale import (distinct_multipliers_check, fixed_points, multiplier_perturbation_experiment,
                                 word_multiplier)
from ifs_lab.zoo import build_cantor_pair

SQ = np.sqrt(2) - 1
NS = Ifs((north_south(0, 0.5, 100),))


def two_attractor_system(second_slope=50 / 80):
    A = lift_to_cover(Ifs((north_south(0, 0.5, 50),)), 2)[1]
    B = bump_perturbation(Identity(), 0.5, second_slope, 0.05)
    return Ifs((A, B))


def test_fixed_points_examples():
    assert fixed_points(Identity()).neutral_everywhere
    fps = fixed_points(north_south(0, 0.5, 100))
    pts = {round(p.x, 9): (p.kind, p.multiplier) for p in fps.points}
    assert pts[0.0][0] == "attractor" and pts[0.0][1] == pytest.approx(0.01, rel=1e-9)
    assert pts[0.5][0] == "repeller" and pts[0.5][1] == pytest.approx(100, rel=1e-9)
    assert fps.is_morse_smale
    with pytest.raises(NoFixedPointsError):
        fixed_points(rotation(0.3))


def test_word_multiplier_examples():
    assert word_multiplier(NS, "", 0.3) == 1.0
    assert word_multiplier(NS, "1", 0.0) == pytest.approx(0.01, rel=1e-9)
    assert word_multiplier(NS, "11", 0.0) == pytest.approx(1e-4, rel=1e-9)
    with pytest.raises(NotFixedError):
        word_multiplier(NS, "1", 0.2)


def test_word_multiplier_needs_derivative():
    Z = build_cantor_pair(2)
    g = Z.ifs[3]
    assert not g.has_derivative
    x = 0.0  # infinity is fixed by g
    with pytest.raises(SmoothnessError):
        word_multiplier(Ifs((g,)), "1", x)


def test_distinct_examples():
    one = distinct_multipliers_check(NS, "1")
    assert one.verdict == "distinct" and len(one.multipliers) == 1
    F = two_attractor_system()
    rep = distinct_multipliers_check(F, "12")
    assert rep.verdict == "distinct"
    assert sorted(rep.multipliers) == pytest.approx([1 / 80, 1 / 50], rel=1e-6)
    assert rep.min_relative_gap == pytest.approx(0.375, rel=1e-6)
    # equalize the second multiplier with a bump at the same point
    G = Ifs((F[1], bump_perturbation(F[2], 0.5, 1.0, 0.05)))
    assert distinct_multipliers_check(G, "12").verdict == "not distinct"


def test_disjointness_precondition():
    F = two_attractor_system()
    rep = distinct_multipliers_check(F, "12", prefix="1")
    assert rep.orbit_disjoint is False  # attractors are fixed by f_1
    rep2 = distinct_multipliers_check(Ifs((F[1], F[2], rotation(0.1))), "12", prefix="3")
    assert rep2.orbit_disjoint and rep2.orbit_clearance == pytest.approx(0.1, abs=1e-9)


def test_perturbation_experiment():
    F = Ifs((arnold(0, 0.15, 2), rotation(SQ)))
    e = multiplier_perturbation_experiment(F, "2", 1, 408, eta=1e-3)
    assert all(e.counts_match)
    assert e.monotone
    assert e.others_max_relative_change < 1e-6
    assert e.target_relative_change > 0.1


FD_SYS = Ifs((north_south(0, 0.5, 5), north_south(0.3, 0.7, 3), arnold(0.02, 0.3)))


@given(st.lists(st.integers(1, 3), min_size=1, max_size=6))
def test_multiplier_matches_fd(u):
    f = compose_word(FD_SYS, Word(tuple(u)))
    try:
        fps = fixed_points(f)
    except NoFixedPointsError:
        assume(False)
    assume(not fps.neutral_everywhere and fps.points)
    for p in fps.points:
        m = word_multiplier(FD_SYS, Word(tuple(u)), p.x)
        fd = float(fd_derivative(f.lift, p.x, 1e-6))
        assert abs(m - fd) <= 1e-5 * abs(fd)


@given(st.lists(st.integers(1, 2), min_size=2, max_size=6), st.integers(1, 5))
def test_multiplier_cyclicity(u, shift):
    F = FD_SYS
    w = Word(tuple(u))
    try:
        fps = fixed_points(compose_word(F, w))
    except NoFixedPointsError:
        assume(False)
    assume(fps.points)
    k = shift % len(u)
    rotated = w[k:] + w[:k]
    # re-locate fixed points of the conjugate: pushing a repeller forward loses digits
    others = np.array([q.x for q in fixed_points(compose_word(F, rotated)).points])
    for p in fps.points:
        b2 = compose_word(F, w[:k]).apply(p.x)
        b2 = others[np.argmin(circle_distance(others, b2))]
        assert word_multiplier(F, rotated, b2) == pytest.approx(word_multiplier(F, w, p.x), rel=1e-8)


@given(st.floats(0.3, 3.0))
def test_bump_changes_only_targeted_factor(slope_factor):
    F = two_attractor_system()
    base = distinct_multipliers_check(F, "12")
    A = F[1]
    G = Ifs((A, bump_perturbation(F[2], 0.5, slope_factor * 50 / 80, 0.05)))
    after = distinct_multipliers_check(G, "12")
    i0 = int(np.argmin([abs(x - 0.0) for x in [p.x for p in base.fixed.attractors]]))
    assert after.multipliers[i0] == pytest.approx(base.multipliers[i0], rel=1e-9)
