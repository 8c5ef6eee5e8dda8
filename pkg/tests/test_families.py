import numpy as np
import pytest
from hypothesis import given, strategies as st

from ifs_lab.blowup import denjoy_blowup, geometric_lengths
from ifs_lab.circle import Arc, Ifs, circle_distance, compose_word, fd_derivative
from ifs_lab.errors import (DegenerateError, MeasureError, OrientationError, PerturbationTooLargeError)
from ifs_lab.families import (FlowBumpParams, MobiusParams, bump_perturbation, flow_bump, from_chart,
                              mobius, north_south, rotation, to_chart, translate_ifs)
from ifs_lab.morse_smale import fixed_points
from ifs_lab.rotation import translation_number

X = np.arange(1024) / 1024
SQ = np.sqrt(2) - 1


def test_rotation_examples():
    assert np.allclose(rotation(0).lift(X), X)
    f4 = compose_word(Ifs((rotation(0.25),)), "1111")
    assert np.max(circle_distance(f4.apply(X), X)) < 1e-12
    assert translation_number(rotation(SQ), 100_000).value == pytest.approx(SQ, abs=1e-4)


def test_mobius_identity_and_orientation():
    assert np.max(np.abs(mobius((1, 0, 0, 1)).lift(X) - X)) < 1e-12
    with pytest.raises(OrientationError):
        mobius((0, 1, 1, 0))


def test_mobius_contraction_fixed_points():
    T0 = mobius((0.1, 0, 0, 10))  # t -> t/100
    fps = fixed_points(T0)
    xs = np.array([p.x for p in fps.points])
    # x = 0 is infinity and x = 1/2 is t = 0 in the projective chart
    assert xs.size == 2
    assert circle_distance(xs, 0.0).min() < 1e-9 and circle_distance(xs, 0.5).min() < 1e-9
    assert [p.kind for p in fps.points if abs(p.x - 0.5) < 1e-6] == ["attractor"]
    # derivative in the real chart at the attractor t = 0
    t = 0.0
    h = 1e-6
    fd = (T0.act(t + h) - T0.act(t - h)) / (2 * h)
    assert fd == pytest.approx(0.01, rel=1e-8)


def test_chart_roundtrip():
    t = np.array([-50.0, -1.0, 0.0, 0.3, 7.0])
    assert np.allclose(to_chart(from_chart(t)), t)
    assert from_chart(0.0) == pytest.approx(0.5)


def test_mobius_group_law():
    A = mobius((2.0, 1.0, 1.0, 1.0))
    B = mobius((1.0, 0.5, 0.0, 1.0))
    AB = A.compose(B)
    assert np.max(circle_distance(AB.apply(X), A.apply(B.apply(X)))) < 1e-8


def test_north_south_examples():
    f = north_south(0.0, 0.5, 100)
    y = f.apply(0.25)
    assert 0.0 < y < 0.25
    fps = fixed_points(f)
    assert sorted(round(p.x, 9) for p in fps.points) == [0.0, 0.5]
    assert fd_derivative(f.lift, 0.0, 1e-6) == pytest.approx(0.01, abs=1e-6)
    assert fd_derivative(f.lift, 0.5, 1e-6) == pytest.approx(100.0, rel=1e-6)
    with pytest.raises(DegenerateError):
        north_south(0.2, 0.2, 10)


def test_flow_bump_examples():
    S = Arc(0.2, 0.3)
    assert np.allclose(flow_bump(FlowBumpParams(S, 0.0)).lift(X), X)
    a = flow_bump(FlowBumpParams(S, 1.0))
    b = flow_bump(FlowBumpParams(S, -1.0))
    assert np.max(np.abs(b.lift(a.lift(X)) - X)) < 1e-6
    outside = np.array([0.0, 0.1, 0.2, 0.5, 0.6, 0.9])
    assert np.allclose(a.lift(outside), outside)


def test_flow_bump_integrator_self_consistency():
    S = Arc(0.2, 0.3)
    f = flow_bump(FlowBumpParams(S, 1.0))
    m = S.midpoint
    y256 = f.lift_with_steps(m, 256)
    y512 = f.lift_with_steps(m, 512)
    assert abs(y256 - y512) < 1e-8
    # independent oracle: closed form of the sin^2 flow
    assert abs(float(f.lift(m)) - float(y512)) < 1e-8


def test_flow_bump_semigroup():
    S = Arc(0.7, 0.4)
    a = flow_bump(FlowBumpParams(S, 0.4))
    b = flow_bump(FlowBumpParams(S, 0.9))
    ab = flow_bump(FlowBumpParams(S, 1.3))
    assert np.max(np.abs(b.lift(a.lift(X)) - ab.lift(X))) < 1e-9


def test_denjoy_blowup_examples():
    base = Ifs((rotation(SQ),))
    r0 = denjoy_blowup(base, 0.1, [], 0)
    assert r0.ifs is base and np.allclose(r0.project(X), X)
    res = denjoy_blowup(base, 0.1, geometric_lengths(20, 0.5, 0.1), 20)
    assert res.total_length == pytest.approx(0.1 * (1 - 2.0**-20), abs=1e-12)
    assert res.total_length == pytest.approx(0.0999998, abs=1e-6)
    G, g = res.ifs[1], base[1]
    lhs = res.project(G.lift(X))
    rhs = g.lift(res.project(X))
    assert np.max(circle_distance(lhs, rhs)) < 1e-6
    with pytest.raises(MeasureError):
        denjoy_blowup(base, 0.1, [0.6, 0.6], 2)


def test_translate_ifs_examples():
    F = Ifs((rotation(0.2), north_south(0.1, 0.6, 5)))
    assert translate_ifs(F, 0.0) is F
    T = translate_ifs(F, 0.03)
    assert np.allclose(T[1].lift(X), rotation(0.23).lift(X))
    for i in (1, 2):
        assert T[i].lift(0.0) - F[i].lift(0.0) == pytest.approx(0.03, abs=1e-15)


def test_bump_perturbation_examples():
    f = north_south(0.0, 0.5, 100)
    same = bump_perturbation(f, 0.0, float(f.derivative(0.0)), 0.05)
    assert np.max(np.abs(same.lift(X) - f.lift(X))) < 1e-12
    g = bump_perturbation(f, 0.0, 0.02, 0.01)
    assert abs(float(g.lift(0.0)) - float(f.lift(0.0))) < 1e-12
    assert fd_derivative(g.lift, 0.0, 1e-6) == pytest.approx(0.02, abs=1e-4)
    far = X[circle_distance(X, 0.0) > 0.01]
    assert np.max(np.abs(g.lift(far) - f.lift(far))) < 1e-15
    with pytest.raises(PerturbationTooLargeError):
        bump_perturbation(rotation(0.1), 0.3, 50.0, 0.2)


@given(st.floats(0, 1, exclude_max=True), st.floats(0.05, 0.45), st.floats(1.5, 500))
def test_north_south_multipliers(a, gap, k):
    r = a + gap + 0.25
    f = north_south(a, r, k)
    assert float(f.derivative(a)) == pytest.approx(1 / k, rel=1e-8)
    assert float(f.derivative(r)) == pytest.approx(k, rel=1e-8)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_flow_semigroup_property(s, t):
    S = Arc(0.35, 0.2)
    fs = flow_bump(FlowBumpParams(S, s))
    ft = flow_bump(FlowBumpParams(S, t))
    fst = flow_bump(FlowBumpParams(S, s + t))
    assert np.max(np.abs(ft.lift(fs.lift(X)) - fst.lift(X))) < 1e-8


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_mobius_matrix_product(m1, m2):
    A, B = np.reshape(m1, (2, 2)), np.reshape(m2, (2, 2))
    if np.linalg.det(A) < 0.1 or np.linalg.det(B) < 0.1:
        return
    fa, fb = mobius(MobiusParams.from_matrix(A)), mobius(MobiusParams.from_matrix(B))
    fab = mobius(MobiusParams.from_matrix(A @ B))
    assert np.max(circle_distance(fab.apply(X), fa.apply(fb.apply(X)))) < 1e-8


def test_constructors_validate():
    maps = [rotation(0.3), north_south(0.2, 0.4, 50), flow_bump(FlowBumpParams(Arc(0.9, 0.3), 2.0)),
            bump_perturbation(north_south(0, 0.5, 10), 0.25, 0.3, 0.02)]
    for f in maps:
        f.validate()
