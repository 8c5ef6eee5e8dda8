import numpy as np
import pytest
from hypothesis import given, strategies as st

from ifs_lab.circle import (Arc, Identity, Ifs, IntervalDomain, Word, apply_lift, circle_distance,
                            compose_word, domain_image, domain_normalize, orbit_of_word)
from ifs_lab.errors import AlphabetError, EmptyDomainError, FullCircleError, ProbabilityError
from ifs_lab.families import mobius, north_south, rotation

ROT = Ifs((rotation(0.3), rotation(0.5)))


def test_compose_examples():
    assert compose_word(Ifs((rotation(0.25),)), "11").apply(0.0) == pytest.approx(0.5)
    assert compose_word(ROT, "12").apply(0.1) == pytest.approx(0.9)
    e = compose_word(ROT, "")
    assert isinstance(e, Identity)
    assert e.apply(0.37) == pytest.approx(0.37)


def test_compose_alphabet_error():
    with pytest.raises(AlphabetError):
        compose_word(ROT, "13")


def test_apply_lift_examples():
    assert apply_lift(rotation(0.3), 0.9) == pytest.approx(1.2)
    t = np.linspace(-3, 3, 13)
    assert np.allclose(apply_lift(Identity(), t), t)
    assert apply_lift(compose_word(ROT, "12"), 0.0) == pytest.approx(0.8)


def test_orbit_of_word():
    F = Ifs((rotation(0.25),))
    assert orbit_of_word(F, "", 0.0) == []
    assert np.allclose(orbit_of_word(F, "111", 0.0), [0.25, 0.5, 0.75])
    G = Ifs((north_south(0, 0.5, 10), rotation(0.3)))
    orb = orbit_of_word(G, "1221", 0.1)
    assert orb[-1] == pytest.approx(compose_word(G, "1221").apply(0.1))


def test_domain_normalize_examples():
    U = domain_normalize([Arc(0.1, 0.2), Arc(0.25, 0.1)])
    assert len(U) == 1 and U.arcs[0].close_to(Arc(0.1, 0.25))
    W = domain_normalize([Arc(0.9, 0.2)])
    assert len(W) == 1 and W.arcs[0].close_to(Arc(0.9, 0.2))
    with pytest.raises(FullCircleError):
        domain_normalize([Arc(0.0, 0.5), Arc(0.5, 0.5)])
    with pytest.raises(EmptyDomainError):
        domain_normalize([])


def test_domain_normalize_wraparound_merge():
    U = domain_normalize([Arc(0.9, 0.15), Arc(0.02, 0.1)])
    assert len(U) == 1 and U.arcs[0].close_to(Arc(0.9, 0.22))


def test_domain_image_examples():
    U = IntervalDomain([Arc(0.1, 0.2), Arc(0.5, 0.1)])
    assert domain_image(Identity(), U).close_to(U)
    V = domain_image(rotation(0.5), IntervalDomain([Arc(0.1, 0.2)]))
    assert V.arcs[0].close_to(Arc(0.6, 0.2))
    f = north_south(0.1, 0.6, 20)
    assert len(domain_image(f, U)) == len(U)


def test_probability_validation():
    with pytest.raises(ProbabilityError):
        Ifs((rotation(0.1), rotation(0.2)), (0.5, 0.6))
    with pytest.raises(ProbabilityError):
        Ifs((rotation(0.1),), (0.5, 0.5))
    Ifs((rotation(0.1), rotation(0.2)), (0.25, 0.75))


def test_complement_duality():
    U = IntervalDomain([Arc(0.1, 0.2), Arc(0.5, 0.1)])
    C = U.complement()
    assert C.measure + U.measure == pytest.approx(1.0)
    assert C.complement().close_to(U)


def test_descriptor_roundtrip_shape():
    d = Ifs((rotation(0.3), north_south(0, 0.5, 2))).to_descriptor()
    assert set(d) == {"kind", "parameters", "children"}
    assert [c["kind"] for c in d["children"]] == ["rotation", "mobius"]


# -- properties

_maps = [rotation(0.3), north_south(0.1, 0.7, 30), mobius((2.0, 1.0, 1.0, 1.0)),
         Ifs((rotation(0.2), north_south(0.3, 0.9, 5))).generators[1].inverse]
words = st.lists(st.integers(1, 3), min_size=0, max_size=8).map(tuple)
F3 = Ifs((rotation(np.sqrt(2) - 1), north_south(0.0, 0.5, 10), north_south(0.25, 0.75, 3)))


@given(st.floats(-5, 5))
def test_apply_is_fractional_part_of_lift(t):
    for f in _maps:
        y = f.lift(t)
        assert circle_distance(f.apply(t), y - np.floor(y)) < 1e-12
        assert f.lift(t + 1.0) == pytest.approx(y + 1.0, abs=1e-9)


@given(words, words)
def test_compose_concatenation(u, v):
    x = np.arange(1024) / 1024
    fuv = compose_word(F3, Word(u + v))
    fvu = compose_word(F3, Word(v)).lift(compose_word(F3, Word(u)).lift(x))
    assert np.max(np.abs(fuv.lift(x) - fvu)) < 1e-9


@given(words)
def test_inverse_apply_roundtrip(u):
    x = np.arange(1024) / 1024
    f = compose_word(F3, Word(u))
    assert np.max(circle_distance(f.inverse_apply(f.apply(x)), x)) < 1e-9


@given(st.floats(0, 1, exclude_max=True), st.floats(0.01, 0.4), st.floats(0.01, 0.3), st.integers(0, 2))
def test_domain_image_inverse(left, length, gap, k):
    U = domain_normalize([Arc(left, length), Arc(left + length + gap, 0.2)])
    f = _maps[k]
    back = domain_image(f.inverse, domain_image(f, U))
    assert len(back) == len(U)
    for b in U.arcs:
        a = min(back.arcs, key=lambda c: circle_distance(c.left, b.left))
        assert circle_distance(a.left, b.left) < 1e-9
        assert abs(a.length - b.length) < 1e-9


@given(st.lists(st.tuples(st.floats(0, 1, exclude_max=True), st.floats(0.01, 0.1)), min_size=1, max_size=5))
def test_domain_normalize_idempotent(spans):
    U = domain_normalize([Arc(a, l) for a, l in spans])
    assert domain_normalize(U.arcs).close_to(U)
