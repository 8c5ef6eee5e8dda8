"""Circle arithmetic, arcs, interval-domains, words, and the map/IFS abstractions.

The circle is the unit interval ``[0, 1)`` with endpoints identified. Every
map is represented by a lift to the real line, a strictly increasing function
``L`` with ``L(t + 1) = L(t) + 1``. All lift methods are vectorized over numpy
arrays and return a python float when given a scalar.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    AlphabetError,
    EmptyDomainError,
    FullCircleError,
    MonotonicityError,
    ProbabilityError,
    SmoothnessError,
)

ATOL = 1e-9
DEFAULT_GRID = 4096


def _out(t, result):
    if np.ndim(t) == 0:
        return float(result)
    return result


def normalize(x):
    """Reduce ``x`` to ``[0, 1)``."""
    r = np.mod(x, 1.0)
    # np.mod(-1e-17, 1.0) == 1.0 in floating point
    r = np.where(r >= 1.0, 0.0, r)
    return _out(x, r)


def signed_diff(a, b):
    """Representative of ``a - b`` in ``[-1/2, 1/2)``."""
    d = np.mod(np.asarray(a, float) - np.asarray(b, float) + 0.5, 1.0) - 0.5
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return float(d)
    return d


def circle_distance(a, b):
    d = np.abs(np.mod(np.asarray(a, float) - np.asarray(b, float) + 0.5, 1.0) - 0.5)
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return float(d)
    return d


def points_close(a, b, tol=ATOL):
    return bool(np.all(circle_distance(a, b) <= tol))


def grid(n=DEFAULT_GRID, offset=0.0):
    """``n`` equispaced points of the circle, optionally shifted by ``offset/n``."""
    return (np.arange(n) + offset) / n


# ---------------------------------------------------------------------------
# arcs and interval-domains


@dataclass(frozen=True)
class Arc:
    """Open arc starting at ``left`` (in ``[0,1)``) going counterclockwise."""

    left: float
    length: float

    def __post_init__(self):
        if not (0.0 < self.length < 1.0):
            raise FullCircleError(f"arc length must be in (0,1), got {self.length}")
        object.__setattr__(self, "left", normalize(float(self.left)))

    @classmethod
    def from_endpoints(cls, a, b):
        """Arc from ``a`` counterclockwise to ``b``."""
        return cls(a, normalize(b - a))

    @classmethod
    def centered(cls, center, length):
        return cls(center - length / 2.0, length)

    @property
    def right(self):
        return normalize(self.left + self.length)

    @property
    def midpoint(self):
        return normalize(self.left + self.length / 2.0)

    def contains(self, p):
        return np.mod(np.asarray(p, float) - self.left, 1.0) < self.length

    def __contains__(self, p):
        return bool(self.contains(p))

    def shrink(self, factor):
        """Concentric arc with length scaled by ``factor``."""
        return Arc.centered(self.midpoint, self.length * factor)

    def subarc_of(self, other, tol=ATOL):
        off = np.mod(self.left - other.left + tol, 1.0) - tol
        return off >= -tol and off + self.length <= other.length + tol

    def close_to(self, other, tol=ATOL):
        return points_close(self.left, other.left, tol) and abs(self.length - other.length) <= tol

    def to_dict(self):
        return {"left": self.left, "length": self.length}


class IntervalDomain:
    """Finite union of disjoint, non-adjacent open arcs; never empty, never the circle."""

    def __init__(self, arcs: Sequence[Arc]):
        arcs = tuple(sorted(arcs, key=lambda a: a.left))
        if not arcs:
            raise EmptyDomainError("interval-domain needs at least one arc")
        self.arcs = arcs

    def __len__(self):
        return len(self.arcs)

    def __iter__(self):
        return iter(self.arcs)

    def __repr__(self):
        inner = ", ".join(f"({a.left:.6g}, len {a.length:.6g})" for a in self.arcs)
        return f"IntervalDomain([{inner}])"

    @property
    def measure(self):
        return float(sum(a.length for a in self.arcs))

    def contains(self, p):
        p = np.asarray(p, float)
        out = np.zeros(p.shape, bool)
        for a in self.arcs:
            out |= a.contains(p)
        return out

    def __contains__(self, p):
        return bool(self.contains(p))

    def component_of(self, p):
        for i, a in enumerate(self.arcs):
            if p in a:
                return i
        return None

    def close_to(self, other, tol=ATOL):
        return len(self) == len(other) and all(
            a.close_to(b, tol) for a, b in zip(self.arcs, other.arcs)
        )

    def complement(self):
        arcs = []
        n = len(self.arcs)
        for i, a in enumerate(self.arcs):
            b = self.arcs[(i + 1) % n]
            gap = np.mod(b.left - (a.left + a.length), 1.0)
            if n == 1:
                gap = 1.0 - a.length
            if gap > 0:
                arcs.append(Arc(a.left + a.length, gap))
        return IntervalDomain(arcs)

    def to_dict(self):
        return [a.to_dict() for a in self.arcs]

    @classmethod
    def from_dict(cls, items):
        return cls([Arc(d["left"], d["length"]) for d in items])


def domain_normalize(arcs: Iterable[Arc], tol=0.0) -> IntervalDomain:
    """Merge overlapping or touching arcs into a sorted disjoint representation."""
    arcs = list(arcs)
    if not arcs:
        raise EmptyDomainError("no arcs given")
    spans = sorted([a.left, a.left + a.length] for a in arcs)
    merged = [spans[0]]
    for lo, hi in spans[1:]:
        if lo <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    # wraparound: the last span may run past 1 into the first spans
    while len(merged) > 1 and merged[-1][1] >= merged[0][0] + 1.0 - tol:
        first = merged.pop(0)
        merged[-1][1] = max(merged[-1][1], first[1] + 1.0)
    for lo, hi in merged:
        if hi - lo >= 1.0 - tol:
            raise FullCircleError("arcs cover the whole circle")
    return IntervalDomain([Arc(lo, hi - lo) for lo, hi in merged])


def domain_image(f: "CircleMap", U: IntervalDomain) -> IntervalDomain:
    """Image of an interval-domain under a homeomorphism, endpoint by endpoint."""
    lefts = np.array([a.left for a in U.arcs])
    rights = lefts + np.array([a.length for a in U.arcs])
    lo = np.atleast_1d(f.lift(lefts))
    hi = np.atleast_1d(f.lift(rights))
    return domain_normalize([Arc(a, b - a) for a, b in zip(lo, hi)])


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class Word:
    """Finite word over ``{1..s}``; symbol ``symbols[0]`` is applied first."""

    symbols: tuple = ()
    s: int | None = None

    def __post_init__(self):
        syms = tuple(int(c) for c in self.symbols)
        object.__setattr__(self, "symbols", syms)
        if self.s is not None:
            check_alphabet(syms, self.s)

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Word(self.symbols[i], self.s)
        return self.symbols[i]

    def __add__(self, other):
        return Word(self.symbols + tuple(as_word(other).symbols), self.s)

    def __mul__(self, k):
        return Word(self.symbols * int(k), self.s)

    def __str__(self):
        if all(c < 10 for c in self.symbols):
            return "".join(str(c) for c in self.symbols)
        return ",".join(str(c) for c in self.symbols)

    def to_list(self):
        return list(self.symbols)


def as_word(w) -> Word:
    """Accept a Word, a digit string like ``"121"``, a comma list, or a sequence of ints."""
    if isinstance(w, Word):
        return w
    if isinstance(w, str):
        w = w.strip()
        if not w:
            return Word(())
        if "," in w:
            return Word(tuple(int(c) for c in w.split(",")))
        return Word(tuple(int(c) for c in w))
    return Word(tuple(int(c) for c in w))


def check_alphabet(symbols, s):
    for c in symbols:
        if not 1 <= c <= s:
            raise AlphabetError(f"symbol {c} outside alphabet 1..{s}")


# ---------------------------------------------------------------------------
# maps


def fd_derivative(fn: Callable, t, h=1e-4):
    """Central difference with one Richardson step (error O(h^4))."""
    t = np.asarray(t, float)
    d1 = (fn(t + h) - fn(t - h)) / (2 * h)
    d2 = (fn(t + h / 2) - fn(t - h / 2)) / h
    return _out(t, (4 * d2 - d1) / 3)


class CircleMap:
    """Orientation-preserving circle homeomorphism given by its lift.

    Subclasses implement ``_lift`` (vectorized) and optionally ``_inverse_lift``
    and ``_derivative``. When no inverse is provided it is computed by bisection.
    """

    kind = "generic"
    has_derivative = False

    def __init__(self, name=None):
        self.name = name
        self._phi_bounds = None

    # -- subclass hooks
    def _lift(self, t):
        raise NotImplementedError

    def _inverse_lift(self, y):
        return self._bisect_inverse(y)

    def _derivative(self, t):
        raise SmoothnessError(f"{self.kind} map has no analytic derivative")

    def parameters(self):
        return {}

    def children(self):
        return []

    # -- public API
    def lift(self, t):
        t = np.asarray(t, float)
        return _out(t, self._lift(t))

    def inverse_lift(self, y):
        y = np.asarray(y, float)
        return _out(y, self._inverse_lift(y))

    def apply(self, x):
        return normalize(self.lift(x))

    def inverse_apply(self, x):
        return normalize(self.inverse_lift(x))

    __call__ = apply

    def derivative(self, t):
        t = np.asarray(t, float)
        return _out(t, self._derivative(t))

    def slope(self, t, h=1e-6):
        """Analytic derivative if available, else Richardson-extrapolated central difference."""
        if self.has_derivative:
            return self.derivative(t)
        return fd_derivative(self.lift, t, h)

    @property
    def inverse(self) -> "CircleMap":
        return InverseMap(self)

    def then(self, other: "CircleMap") -> "CircleMap":
        """``other ∘ self`` (self applied first)."""
        return Composite([self, other])

    def to_descriptor(self):
        d = {"kind": self.kind, "parameters": self.parameters()}
        ch = self.children()
        d["children"] = [c.to_descriptor() for c in ch]
        return d

    def __repr__(self):
        return f"<{type(self).__name__} {self.kind} {self.parameters()}>"

    # -- numerics
    def displacement_bounds(self, n=DEFAULT_GRID):
        if self._phi_bounds is None:
            x = grid(n)
            phi = np.asarray(self._lift(x)) - x
            self._phi_bounds = (float(phi.min()), float(phi.max()))
        return self._phi_bounds

    def _bisect_inverse(self, y, iters=64):
        y = np.atleast_1d(np.asarray(y, float))
        lo_phi, hi_phi = self.displacement_bounds()
        lo = y - hi_phi - 0.01
        hi = y - lo_phi + 0.01
        for _ in range(8):
            bad = self._lift(lo) > y
            if not bad.any():
                break
            lo = np.where(bad, lo - 0.5, lo)
        for _ in range(8):
            bad = self._lift(hi) < y
            if not bad.any():
                break
            hi = np.where(bad, hi + 0.5, hi)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            below = self._lift(mid) < y
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 4e-16 * np.maximum(1.0, np.abs(y))):
                break
        return 0.5 * (lo + hi)

    def validate(self, n=DEFAULT_GRID, tol=1e-12):
        """Strict monotonicity and degree-one checks on an ``n``-point grid."""
        x = grid(n)
        L = np.asarray(self._lift(x))
        L1 = np.asarray(self._lift(x + 1.0))
        steps = np.diff(np.append(L, L[0] + 1.0))
        if not np.all(steps > 0):
            i = int(np.argmin(steps))
            raise MonotonicityError(f"{self.kind} lift not increasing near x={x[i]:.6g}")
        err = np.max(np.abs(L1 - L - 1.0))
        if err > tol * max(1.0, float(np.max(np.abs(L)))):
            raise MonotonicityError(f"{self.kind} lift not degree one (error {err:.3g})")
        return self


class Identity(CircleMap):
    kind = "identity"
    has_derivative = True

    def _lift(self, t):
        return t + 0.0

    def _inverse_lift(self, y):
        return y + 0.0

    def _derivative(self, t):
        return np.ones_like(t)


class InverseMap(CircleMap):
    kind = "inverse"

    def __init__(self, base: CircleMap):
        super().__init__()
        self.base = base
        self.has_derivative = base.has_derivative

    def _lift(self, t):
        return self.base._inverse_lift(t)

    def _inverse_lift(self, y):
        return self.base._lift(y)

    def _derivative(self, t):
        return 1.0 / self.base._derivative(self.base._inverse_lift(t))

    @property
    def inverse(self):
        return self.base

    def children(self):
        return [self.base]


class Composite(CircleMap):
    """Lazy composition; ``maps[0]`` is applied first. Lifts are threaded, never resampled."""

    kind = "composite"

    def __init__(self, maps: Sequence[CircleMap]):
        super().__init__()
        flat = []
        for m in maps:
            if isinstance(m, Composite):
                flat.extend(m.maps)
            else:
                flat.append(m)
        self.maps = tuple(flat)
        self.has_derivative = all(m.has_derivative for m in self.maps)

    def _lift(self, t):
        for m in self.maps:
            t = m._lift(t)
        return t

    def _inverse_lift(self, y):
        for m in reversed(self.maps):
            y = m._inverse_lift(y)
        return y

    def _derivative(self, t):
        d = np.ones_like(t)
        for m in self.maps:
            d = d * m._derivative(t)
            t = m._lift(t)
        return d

    def children(self):
        return list(self.maps)


class Translated(CircleMap):
    """Lift shifted by a constant: ``t -> L(t) + delta``."""

    kind = "perturbed"

    def __init__(self, base: CircleMap, delta: float):
        super().__init__()
        self.base = base
        self.delta = float(delta)
        self.has_derivative = base.has_derivative

    def _lift(self, t):
        return self.base._lift(t) + self.delta

    def _inverse_lift(self, y):
        return self.base._inverse_lift(y - self.delta)

    def _derivative(self, t):
        return self.base._derivative(t)

    def parameters(self):
        return {"delta": self.delta}

    def children(self):
        return [self.base]


# ---------------------------------------------------------------------------
# IFS


@dataclass(frozen=True)
class Ifs:
    """Ordered tuple of generators, optionally with probabilities (an RDS)."""

    generators: tuple
    probabilities: tuple | None = None
    names: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise AlphabetError("an IFS needs at least one generator")
        object.__setattr__(self, "generators", gens)
        if self.probabilities is not None:
            p = tuple(float(v) for v in self.probabilities)
            check_probabilities(p, len(gens))
            object.__setattr__(self, "probabilities", p)

    @property
    def s(self):
        return len(self.generators)

    def __len__(self):
        return len(self.generators)

    def __getitem__(self, i):
        """1-based generator access, matching word symbols."""
        return self.generators[i - 1]

    def with_probabilities(self, p=None):
        if p is None:
            p = [1.0 / self.s] * self.s
        return Ifs(self.generators, tuple(p), self.names)

    @property
    def probs(self):
        if self.probabilities is None:
            return np.full(self.s, 1.0 / self.s)
        return np.asarray(self.probabilities)

    def inverse(self) -> "Ifs":
        """IFS of inverse generators with the same probabilities."""
        return Ifs(tuple(g.inverse for g in self.generators), self.probabilities, self.names)

    def extended(self, extra: Sequence[CircleMap]) -> "Ifs":
        return Ifs(self.generators + tuple(extra))

    def to_descriptor(self):
        d = {
            "kind": "ifs",
            "parameters": {"probabilities": list(self.probabilities) if self.probabilities else None},
            "children": [g.to_descriptor() for g in self.generators],
        }
        if self.names:
            d["parameters"]["names"] = list(self.names)
        return d


def check_probabilities(p, s):
    if len(p) != s:
        raise ProbabilityError(f"probabilities: expected {s} values, got {len(p)}")
    if any(not np.isfinite(v) or v <= 0 for v in p):
        raise ProbabilityError("probabilities must be positive")
    if abs(sum(p) - 1.0) > 1e-12:
        raise ProbabilityError(f"probabilities must sum to 1 (sum={sum(p)!r})")


def compose_word(F: Ifs, w) -> CircleMap:
    """``f_w = f_{w_{n-1}} ∘ ... ∘ f_{w_0}`` as a lazy composite."""
    w = as_word(w)
    check_alphabet(w.symbols, F.s)
    if len(w) == 0:
        return Identity()
    if len(w) == 1:
        return F[w[0]]
    return Composite([F[c] for c in w])


def apply_lift(f: CircleMap, t):
    return f.lift(t)


def orbit_of_word(F: Ifs, w, x) -> list:
    """The ``|w|`` intermediate images ``f_{w,1}(x), ..., f_{w,|w|}(x)``."""
    w = as_word(w)
    check_alphabet(w.symbols, F.s)
    out = []
    t = float(x)
    for c in w:
        t = F[c].lift(t)
        out.append(normalize(t))
    return out


def lift_orbit(F: Ifs, w, t) -> np.ndarray:
    """Lifted intermediate images (real line), starting value excluded."""
    w = as_word(w)
    check_alphabet(w.symbols, F.s)
    out = np.empty(len(w))
    t = float(t)
    for i, c in enumerate(w):
        t = F[c].lift(t)
        out[i] = t
    return out
