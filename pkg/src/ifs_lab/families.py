"""Constructors for the concrete circle maps used throughout the package.

Projective chart: ``x in [0,1)`` corresponds to ``t = tan(pi (x - 1/2))`` on
the projective line, with ``x = 0`` the point at infinity and ``x = 1/2`` the
origin. Moebius maps act through this chart.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circle import (
    Arc,
    CircleMap,
    Identity,
    Ifs,
    Translated,
    normalize,
    signed_diff,
)
from .errors import (
    ConstructionError,
    DegenerateError,
    OrientationError,
    PerturbationTooLargeError,
    SmoothnessError,
)


def to_chart(x):
    """Circle coordinate to the projective line (``x = 0`` is infinity)."""
    return np.tan(np.pi * (np.asarray(x, float) - 0.5))


def from_chart(t):
    """Projective line to the circle; ``+-inf`` maps to 0."""
    return normalize(np.arctan(np.asarray(t, float)) / np.pi + 0.5)


def _chart_vector(x):
    th = np.pi * (np.asarray(x, float) - 0.5)
    return np.stack([np.sin(th), np.cos(th)])


# ---------------------------------------------------------------------------
# rotations and simple analytic families


class Rotation(CircleMap):
    kind = "rotation"
    has_derivative = True

    def __init__(self, alpha):
        super().__init__()
        self.alpha = float(alpha)

    def _lift(self, t):
        return t + self.alpha

    def _inverse_lift(self, y):
        return y - self.alpha

    def _derivative(self, t):
        return np.ones_like(t)

    @property
    def inverse(self):
        return Rotation(-self.alpha)

    def parameters(self):
        return {"alpha": self.alpha}


def rotation(alpha) -> Rotation:
    return Rotation(alpha)


class ArnoldMap(CircleMap):
    """``t -> t + shift + amplitude sin(2 pi k t) / (2 pi k)``; a diffeomorphism for ``|amplitude| < 1``."""

    kind = "arnold"
    has_derivative = True

    def __init__(self, shift, amplitude, k=1):
        super().__init__()
        if abs(amplitude) >= 1:
            raise ConstructionError("arnold map needs |amplitude| < 1")
        self.shift = float(shift)
        self.amplitude = float(amplitude)
        self.k = int(k)

    def _lift(self, t):
        w = 2 * np.pi * self.k
        return t + self.shift + self.amplitude * np.sin(w * t) / w

    def _derivative(self, t):
        return 1.0 + self.amplitude * np.cos(2 * np.pi * self.k * t)

    def parameters(self):
        return {"shift": self.shift, "amplitude": self.amplitude, "k": self.k}


def arnold(shift, amplitude, k=1) -> ArnoldMap:
    return ArnoldMap(shift, amplitude, k).validate()


# ---------------------------------------------------------------------------
# Moebius maps


@dataclass(frozen=True)
class MobiusParams:
    a: float
    b: float
    c: float
    d: float

    @property
    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]], float)

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def normalized(self) -> "MobiusParams":
        """Scale to determinant one and non-negative trace (same projective action)."""
        m = self.matrix
        det = np.linalg.det(m)
        if det <= 0:
            raise OrientationError(f"ad - bc = {det:.6g} must be positive")
        m = m / np.sqrt(det)
        if np.trace(m) < 0:
            m = -m
        return MobiusParams.from_matrix(m)


class MobiusMap(CircleMap):
    """Projective action of an SL(2,R) matrix, expressed in the ``[0,1)`` chart.

    The lift is ``x + delta(x)/pi`` where ``delta`` is the signed angle between a
    unit vector ``v`` representing ``x`` and ``M v``. Normalizing to trace >= 0
    rules out negative eigenvalues, so ``delta`` never reaches ``+-pi`` and the
    lift is continuous.
    """

    kind = "mobius"
    has_derivative = True

    def __init__(self, params: MobiusParams, meta=None):
        super().__init__()
        self.params = params.normalized()
        self.m = self.params.matrix
        self.meta = dict(meta or {})

    def _image(self, t):
        v = _chart_vector(t)
        w = self.m @ v.reshape(2, -1)
        return v.reshape(2, -1), w

    def _lift(self, t):
        t = np.asarray(t, float)
        v, w = self._image(t)
        cross = w[0] * v[1] - w[1] * v[0]
        dot = w[0] * v[0] + w[1] * v[1]
        delta = np.arctan2(cross, dot).reshape(t.shape)
        return t + delta / np.pi

    def _inverse_lift(self, y):
        return self.inverse._lift(y)

    def _derivative(self, t):
        t = np.asarray(t, float)
        _, w = self._image(t)
        return (1.0 / (w[0] ** 2 + w[1] ** 2)).reshape(t.shape)

    @property
    def inverse(self):
        a, b, c, d = self.params.a, self.params.b, self.params.c, self.params.d
        return MobiusMap(MobiusParams(d, -b, -c, a))

    def act(self, t):
        """Action on the projective line in the ``t`` chart."""
        t = np.asarray(t, float)
        a, b, c, d = self.params.a, self.params.b, self.params.c, self.params.d
        with np.errstate(divide="ignore"):
            return (a * t + b) / (c * t + d)

    def power(self, s) -> "MobiusMap":
        """Real power ``M^s`` for a hyperbolic matrix (the time-``s`` map of its flow)."""
        vals, vecs = np.linalg.eig(self.m)
        if np.any(np.abs(vals.imag) > 1e-14) or np.any(vals.real <= 0):
            raise DegenerateError("real powers need a hyperbolic matrix with positive eigenvalues")
        ms = (vecs.real * vals.real**s) @ np.linalg.inv(vecs.real)
        return MobiusMap(MobiusParams.from_matrix(ms))

    def fixed_points(self):
        """Fixed points on the circle (empty for elliptic maps)."""
        vals, vecs = np.linalg.eig(self.m)
        if np.any(np.abs(vals.imag) > 1e-14):
            return []
        pts = [normalize(np.arctan2(v[0], v[1]) / np.pi + 0.5) for v in vecs.real.T]
        return sorted(set(round(p, 15) for p in pts))

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """``self ∘ other`` as a single Moebius map (matrix product)."""
        return MobiusMap(MobiusParams.from_matrix(self.m @ other.m))

    def parameters(self):
        p = {"a": self.params.a, "b": self.params.b, "c": self.params.c, "d": self.params.d}
        p.update(self.meta)
        return p


def mobius(params) -> MobiusMap:
    if not isinstance(params, MobiusParams):
        params = MobiusParams(*params)
    return MobiusMap(params).validate()


def north_south(attractor, repeller, strength) -> MobiusMap:
    """Hyperbolic Moebius map with derivative ``1/strength`` at the attractor and ``strength`` at the repeller."""
    if strength <= 1:
        raise DegenerateError("north_south needs strength > 1")
    if abs(signed_diff(attractor, repeller)) < 1e-12:
        raise DegenerateError("attractor and repeller coincide")
    P = np.column_stack([_chart_vector(repeller), _chart_vector(attractor)])
    D = np.diag([strength**-0.5, strength**0.5])
    M = P @ D @ np.linalg.inv(P)
    meta = {"attractor": float(attractor), "repeller": float(repeller), "strength": float(strength)}
    return MobiusMap(MobiusParams.from_matrix(M), meta).validate()


# ---------------------------------------------------------------------------
# maps supported on an arc


class ArcSupported(CircleMap):
    """Equal to ``inner`` on ``arc`` and to the identity elsewhere.

    ``inner`` must fix both endpoints of the arc (so it maps the arc onto itself).
    """

    kind = "flow-bump"

    def __init__(self, inner: CircleMap, arc: Arc, label=None):
        super().__init__()
        self.inner = inner
        self.arc = arc
        self.label = label
        self.has_derivative = inner.has_derivative

    def _piece(self, t, fn):
        t = np.asarray(t, float)
        u = np.mod(t - self.arc.left, 1.0)
        inside = (u > 0) & (u < self.arc.length)
        if not inside.any():
            return t + 0.0
        base = t - u
        v = np.mod(fn(t[inside]) - self.arc.left, 1.0)
        # endpoints are fixed; guard against wrap from rounding
        v = np.where(v > 0.5 * (1 + self.arc.length), 0.0, v)
        v = np.clip(v, 0.0, self.arc.length)
        out = t + 0.0
        out[inside] = base[inside] + v
        return out

    def _lift(self, t):
        return self._piece(np.atleast_1d(t), self.inner._lift).reshape(np.shape(t))

    def _inverse_lift(self, y):
        return self._piece(np.atleast_1d(y), self.inner._inverse_lift).reshape(np.shape(y))

    def _derivative(self, t):
        t = np.asarray(t, float)
        inside = self.arc.contains(t)
        d = np.ones_like(t)
        if np.any(inside):
            d = np.where(inside, self.inner._derivative(t), 1.0)
        return d

    @property
    def inverse(self):
        return ArcSupported(self.inner.inverse, self.arc, self.label)

    def parameters(self):
        p = {"support": self.arc.to_dict()}
        if self.label:
            p["label"] = self.label
        return p

    def children(self):
        return [self.inner]


def _sin2(u):
    return np.sin(np.pi * u) ** 2


def _sin2_prime(u):
    return np.pi * np.sin(2 * np.pi * u)


@dataclass(frozen=True)
class FlowBumpParams:
    support: Arc
    time: float
    profile: Callable = _sin2
    profile_prime: Callable = _sin2_prime
    amplitude: float = 1.0


class FlowBump(CircleMap):
    """Time-``T`` map of ``dx/dt = amplitude * profile((x - l)/len)`` on the support, identity elsewhere.

    Fixed-step RK4 integration; the derivative comes from the variational equation.
    """

    kind = "flow-bump"
    has_derivative = True

    def __init__(self, p: FlowBumpParams, steps=256):
        super().__init__()
        self.p = p
        self.steps = int(steps)

    def _field(self, u):
        L = self.p.support.length
        return self.p.amplitude * self.p.profile(u / L)

    def _field_prime(self, u):
        L = self.p.support.length
        return self.p.amplitude * self.p.profile_prime(u / L) / L

    def _integrate(self, u, with_derivative=False, steps=None):
        n = self.steps if steps is None else steps
        h = self.p.time / n
        d = np.ones_like(u)
        f, fp = self._field, self._field_prime
        for _ in range(n):
            k1 = f(u)
            k2 = f(u + 0.5 * h * k1)
            k3 = f(u + 0.5 * h * k2)
            k4 = f(u + h * k3)
            if with_derivative:
                j1 = fp(u) * d
                j2 = fp(u + 0.5 * h * k1) * (d + 0.5 * h * j1)
                j3 = fp(u + 0.5 * h * k2) * (d + 0.5 * h * j2)
                j4 = fp(u + h * k3) * (d + h * j3)
                d = d + h / 6 * (j1 + 2 * j2 + 2 * j3 + j4)
            u = u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return u, d

    def _local(self, t):
        t = np.atleast_1d(np.asarray(t, float))
        u = np.mod(t - self.p.support.left, 1.0)
        inside = (u > 0) & (u < self.p.support.length)
        return t, u, inside

    @property
    def exact(self):
        """The default ``sin^2`` profile has a closed-form flow."""
        return self.p.profile is _sin2 and self.p.profile_prime is _sin2_prime

    def _closed_form(self, u, time):
        # cot(pi s(t)) = cot(pi s0) - pi A t / L for ds/dt = (A/L) sin^2(pi s)
        L = self.p.support.length
        s0 = np.pi * u / L
        c = np.cos(s0) / np.sin(s0) - np.pi * self.p.amplitude * time / L
        s1 = np.arctan2(1.0, c)
        return s1 * L / np.pi, (np.sin(s1) / np.sin(s0)) ** 2

    def _lift(self, t, steps=None):
        shape = np.shape(t)
        t, u, inside = self._local(t)
        out = t + 0.0
        if inside.any() and self.p.time != 0:
            if self.exact and steps is None:
                v, _ = self._closed_form(u[inside], self.p.time)
            else:
                v, _ = self._integrate(u[inside], steps=steps)
            v = np.clip(v, 0.0, self.p.support.length)
            out[inside] = t[inside] - u[inside] + v
        return out.reshape(shape)

    def _derivative(self, t):
        shape = np.shape(t)
        t, u, inside = self._local(t)
        out = np.ones_like(t)
        if inside.any() and self.p.time != 0:
            if self.exact:
                _, d = self._closed_form(u[inside], self.p.time)
            else:
                _, d = self._integrate(u[inside], with_derivative=True)
            out[inside] = d
        return out.reshape(shape)

    def _inverse_lift(self, y):
        if not self.exact:
            return super()._inverse_lift(y)
        shape = np.shape(y)
        y, u, inside = self._local(y)
        out = y + 0.0
        if inside.any():
            v, _ = self._closed_form(u[inside], -self.p.time)
            out[inside] = y[inside] - u[inside] + np.clip(v, 0.0, self.p.support.length)
        return out.reshape(shape)

    def lift_with_steps(self, t, steps):
        return self._lift(np.asarray(t, float), steps=steps)

    def parameters(self):
        return {
            "support": self.p.support.to_dict(),
            "time": self.p.time,
            "amplitude": self.p.amplitude,
            "steps": self.steps,
        }


def flow_bump(p: FlowBumpParams, steps=256) -> CircleMap:
    if p.time == 0:
        return Identity()
    return FlowBump(p, steps).validate()


# ---------------------------------------------------------------------------
# perturbations


def translate_ifs(F: Ifs, delta) -> Ifs:
    """Shift every generator's lift by the same ``delta``."""
    if delta == 0:
        return F
    return Ifs(tuple(Translated(g, delta) for g in F.generators), F.probabilities, F.names)


def _bump_shape(s):
    # compactly supported C^1 piecewise cubic with phi(0)=0, phi'(0)=1
    a = np.abs(s)
    return np.where(a < 1, s * (1 - a) ** 2, 0.0)


def _bump_shape_prime(s):
    a = np.abs(s)
    return np.where(a < 1, (1 - a) ** 2 - 2 * a * (1 - a), 0.0)


class BumpPerturbed(CircleMap):
    """``L(t) + c r phi((t-b)/r)``: changes the slope at ``b`` by ``c`` and keeps the value there."""

    kind = "perturbed"

    def __init__(self, base: CircleMap, center, slope_change, radius):
        super().__init__()
        self.base = base
        self.center = float(center)
        self.c = float(slope_change)
        self.radius = float(radius)
        self.has_derivative = base.has_derivative

    def _s(self, t):
        return signed_diff(np.asarray(t, float), self.center) / self.radius

    def _lift(self, t):
        return self.base._lift(t) + self.c * self.radius * _bump_shape(self._s(t))

    def _derivative(self, t):
        return self.base._derivative(t) + self.c * _bump_shape_prime(self._s(t))

    def parameters(self):
        return {"center": self.center, "slope_change": self.c, "radius": self.radius}

    def children(self):
        return [self.base]


def bump_perturbation(f: CircleMap, b, new_derivative, radius) -> CircleMap:
    """Change ``f'(b)`` to ``new_derivative`` inside the radius-neighbourhood of ``b``."""
    if not f.has_derivative:
        raise SmoothnessError("bump_perturbation needs a differentiable map")
    if new_derivative <= 0:
        raise PerturbationTooLargeError("new derivative must be positive")
    if not 0 < radius < 0.5:
        raise PerturbationTooLargeError("radius must be in (0, 1/2)")
    c = float(new_derivative - f.derivative(b))
    g = BumpPerturbed(f, b, c, radius)
    s = np.linspace(-1, 1, 4001)
    t = b + radius * s
    if np.any(g.derivative(t) <= 0):
        raise PerturbationTooLargeError("perturbation destroys monotonicity")
    return g


# ---------------------------------------------------------------------------
# piecewise lifts and maps of the projective line


class PiecewiseLinearLift(CircleMap):
    """Lift interpolating ``(xs[i], ys[i])`` linearly, extended by ``L(t+1) = L(t)+1``."""

    kind = "piecewise-linear"

    def __init__(self, xs, ys, label=None):
        super().__init__()
        xs = np.asarray(xs, float)
        ys = np.asarray(ys, float)
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ConstructionError("knots must be strictly increasing")
        if not (xs[-1] < xs[0] + 1 and ys[-1] < ys[0] + 1):
            raise ConstructionError("knots must span less than one period")
        self.xs = np.append(xs, xs[0] + 1)
        self.ys = np.append(ys, ys[0] + 1)
        self.label = label

    def _eval(self, t, xs, ys):
        t = np.asarray(t, float)
        k = np.floor((t - xs[0]))
        return np.interp(t - k, xs, ys) + k

    def _lift(self, t):
        return self._eval(t, self.xs, self.ys)

    def _inverse_lift(self, y):
        return self._eval(y, self.ys, self.xs)

    def parameters(self):
        p = {"xs": self.xs[:-1].tolist(), "ys": self.ys[:-1].tolist()}
        if self.label:
            p["label"] = self.label
        return p


def monotone_cubic(x0, y0, m0, x1, y1, m1):
    """Hermite cubic on ``[x0, x1]`` with slopes limited so that it stays monotone."""
    delta = (y1 - y0) / (x1 - x0)
    if delta <= 0:
        raise ConstructionError("monotone interpolation needs increasing data")
    a, b = m0 / delta, m1 / delta
    r = a * a + b * b
    if r > 9:
        tau = 3.0 / np.sqrt(r)
        m0, m1 = tau * a * delta, tau * b * delta
    h = x1 - x0

    def fn(x):
        s = (np.asarray(x, float) - x0) / h
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1

    xs = np.linspace(x0, x1, 2001)
    if np.any(np.diff(fn(xs)) <= 0):
        raise ConstructionError("interpolating branch is not monotone")
    return fn


class RealLineMap(CircleMap):
    """Increasing homeomorphism of the projective line fixing infinity, in the ``[0,1)`` chart."""

    kind = "piecewise-linear"

    def __init__(self, fn, label, inverse_fn=None, params=None):
        super().__init__()
        self.fn = fn
        self.inverse_fn = inverse_fn
        self.label = label
        self.params = dict(params or {})

    def _lift(self, t):
        t = np.asarray(t, float)
        k = np.floor(t)
        u = t - k
        with np.errstate(over="ignore"):
            y = np.arctan(self.fn(to_chart(u))) / np.pi + 0.5
        return k + y

    def _inverse_lift(self, y):
        if self.inverse_fn is None:
            return self._bisect_inverse(y)
        y = np.asarray(y, float)
        k = np.floor(y)
        u = y - k
        return k + np.arctan(self.inverse_fn(to_chart(u))) / np.pi + 0.5

    def parameters(self):
        p = {"label": self.label}
        p.update(self.params)
        return p


class GluedMap(CircleMap):
    """Given maps on disjoint arcs, joined across the gaps by monotone cubic pieces."""

    kind = "glued"

    def __init__(self, pieces, label=None):
        super().__init__()
        if not pieces:
            raise ConstructionError("need at least one piece")
        x0 = pieces[0][0].left
        order = sorted(range(len(pieces)), key=lambda i: np.mod(pieces[i][0].left - x0, 1.0))
        self.label = label
        self.x0 = float(x0)
        self.arcs = []
        self.maps = []
        self.offsets = []
        lefts, rights, yl, yr = [], [], [], []
        for i in order:
            arc, f = pieces[i]
            a = self.x0 + float(np.mod(arc.left - self.x0, 1.0))
            b = a + arc.length
            ya = float(f.lift(a))
            if lefts:
                k = np.ceil(yr[-1] - ya)
                if ya + k <= yr[-1]:
                    k += 1
            else:
                k = 0.0
            lefts.append(a)
            rights.append(b)
            yl.append(ya + k)
            yr.append(float(f.lift(b)) + k)
            self.arcs.append(arc)
            self.maps.append(f)
            self.offsets.append(float(k))
        if np.any(np.array(lefts[1:]) < np.array(rights[:-1])) or rights[-1] > self.x0 + 1:
            raise ConstructionError("pieces overlap")
        if yr[-1] >= yl[0] + 1:
            raise ConstructionError("pieces do not fit into one turn")
        self.lefts, self.rights = np.array(lefts), np.array(rights)
        self.y0 = yl[0]
        self.gaps = []
        for j in range(len(lefts)):
            nj = (j + 1) % len(lefts)
            xa, xb = rights[j], lefts[nj] + (1.0 if nj == 0 else 0.0)
            ya, yb = yr[j], yl[nj] + (1.0 if nj == 0 else 0.0)
            if xb - xa <= 0:
                if abs(yb - ya) > 1e-9:
                    raise ConstructionError("adjacent pieces do not match")
                continue
            ma = float(self.maps[j].slope(rights[j]))
            mb = float(self.maps[nj].slope(lefts[nj]))
            self.gaps.append((xa, xb, monotone_cubic(xa, ya, ma, xb, yb, mb)))

    def _lift(self, t):
        t = np.asarray(t, float)
        k = np.floor(t - self.x0)
        u = np.clip(t - k, self.x0, np.nextafter(self.x0 + 1.0, 0.0))
        out = np.empty_like(u)
        for a, b, f, off in zip(self.lefts, self.rights, self.maps, self.offsets):
            m = (u >= a) & (u <= b)
            if np.any(m):
                out[m] = f._lift(u[m]) + off
        for xa, xb, fn in self.gaps:
            m = (u > xa) & (u < xb)
            if np.any(m):
                out[m] = fn(u[m])
        return out + k

    def _inverse_lift(self, y):
        y = np.asarray(y, float)
        k = np.floor(y - self.y0)
        v = np.clip(y - k, self.y0, np.nextafter(self.y0 + 1.0, 0.0))
        out = np.empty_like(v)
        done = np.zeros(v.shape, bool)
        for a, b, f, off in zip(self.lefts, self.rights, self.maps, self.offsets):
            ya, yb = f._lift(np.array([a, b])) + off
            m = (v >= ya) & (v <= yb)
            if np.any(m):
                out[m] = f._inverse_lift(v[m] - off)
                done |= m
        for xa, xb, fn in self.gaps:
            ya, yb = fn(xa), fn(xb)
            m = ~done & (v > ya) & (v < yb)
            if np.any(m):
                lo = np.full(int(m.sum()), xa)
                hi = np.full(lo.size, xb)
                target = v[m]
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    below = fn(mid) < target
                    lo = np.where(below, mid, lo)
                    hi = np.where(below, hi, mid)
                out[m] = 0.5 * (lo + hi)
                done |= m
        return out + k

    def parameters(self):
        p = {"pieces": [a.to_dict() for a in self.arcs]}
        if self.label:
            p["label"] = self.label
        return p

    def children(self):
        return list(self.maps)
