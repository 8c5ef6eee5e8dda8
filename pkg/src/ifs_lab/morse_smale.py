"""Fixed points, attractor/repeller classification, and multipliers of compositions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circle import CircleMap, Ifs, Word, as_word, check_alphabet, circle_distance, compose_word, normalize
from .errors import NoFixedPointsError, NotFixedError, PrecisionError, SmoothnessError
from .families import bump_perturbation

DEAD_ZONE = 1e-6
FIXED_TOL = 1e-8


@dataclass(frozen=True)
class FixedPoint:
    x: float
    kind: str
    multiplier: float | None

    def to_dict(self):
        return {"x": self.x, "kind": self.kind, "multiplier": self.multiplier}


@dataclass(frozen=True)
class FixedPointSet:
    points: tuple
    neutral_everywhere: bool = False

    @property
    def attractors(self):
        return [p for p in self.points if p.kind == "attractor"]

    @property
    def repellers(self):
        return [p for p in self.points if p.kind == "repeller"]

    @property
    def is_morse_smale(self):
        if self.neutral_everywhere or not self.points:
            return False
        if any(p.kind == "neutral" for p in self.points):
            return False
        kinds = [p.kind for p in self.points]
        return all(kinds[i] != kinds[(i + 1) % len(kinds)] for i in range(len(kinds)))

    def to_dict(self):
        return {
            "neutral_everywhere": self.neutral_everywhere,
            "fixed_points": [p.to_dict() for p in self.points],
        }


def classify(multiplier, dead_zone=DEAD_ZONE):
    if multiplier < 1 - dead_zone:
        return "attractor"
    if multiplier > 1 + dead_zone:
        return "repeller"
    return "neutral"


def fixed_points(f: CircleMap, resolution: float = 1 / 4096, tol: float = 1e-12) -> FixedPointSet:
    """Zeros of ``lift(x) - x - k`` located by bisection to ``tol``.

    Fixed points exist iff the displacement ``lift(x) - x`` takes an integer
    value ``k``; otherwise the translation number is not an integer.
    """
    if resolution <= 0:
        raise PrecisionError("resolution must be positive")
    n = int(round(1.0 / resolution))
    x = np.arange(n + 1) / n
    disp = f.lift(x) - x
    k = np.ceil(disp.min() - 1e-15)
    if k > disp.max() + 1e-15:
        raise NoFixedPointsError("translation number is not an integer: no fixed points")
    phi = disp - k
    if np.all(np.abs(phi) < 1e-14):
        return FixedPointSet((), neutral_everywhere=True)
    # a root sitting exactly on a grid point shows up as rounding noise of either sign
    phi = np.where(np.abs(phi) <= 1e-13, 0.0, phi)
    roots = list(x[:-1][phi[:-1] == 0.0])
    a, b = x[:-1], x[1:]
    pa, pb = phi[:-1], phi[1:]
    br = (pa * pb < 0)
    lo, hi, plo = a[br], b[br], pa[br]
    while lo.size and np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        pm = f.lift(mid) - mid - k
        left = np.sign(pm) == np.sign(plo)
        lo = np.where(left, mid, lo)
        plo = np.where(left, pm, plo)
        hi = np.where(left, hi, mid)
    roots.extend(0.5 * (lo + hi))
    roots = np.sort(normalize(np.array(roots, float)))
    keep = []
    for r in roots:
        if not keep or circle_distance(r, keep[-1]) > 1e-9:
            keep.append(float(r))
    if len(keep) > 1 and circle_distance(keep[0], keep[-1]) <= 1e-9:
        keep.pop()
    pts = []
    for r in keep:
        m = float(f.slope(r))
        pts.append(FixedPoint(r, classify(m), m))
    return FixedPointSet(tuple(pts))


def word_multiplier(F: Ifs, u, b) -> float:
    """Chain-rule product of generator derivatives along the orbit of the fixed point ``b``.

    Uses exactly ``|u|`` factors, one per letter.
    """
    u = as_word(u)
    check_alphabet(u.symbols, F.s)
    if len(u) == 0:
        return 1.0
    fu = compose_word(F, u)
    if circle_distance(fu.apply(float(b)), b) > FIXED_TOL:
        raise NotFixedError(f"{b!r} is not fixed by f_{u}")
    t = float(b)
    prod = 1.0
    for c in u:
        g = F[c]
        if not g.has_derivative:
            raise SmoothnessError(f"generator {c} has no derivative")
        prod *= float(g.derivative(t))
        t = g.lift(t)
    return prod


def orbit_points(F: Ifs, v, x):
    from .circle import orbit_of_word

    return np.array(orbit_of_word(F, v, x))


@dataclass
class MultiplierReport:
    verdict: str
    fixed: FixedPointSet | None
    multipliers: list = field(default_factory=list)
    min_relative_gap: float | None = None
    orbit_disjoint: bool | None = None
    orbit_clearance: float | None = None

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "fixed_points": self.fixed.to_dict()["fixed_points"] if self.fixed else [],
            "multipliers": self.multipliers,
            "min_relative_gap": self.min_relative_gap,
            "orbit_disjoint": self.orbit_disjoint,
            "orbit_clearance": self.orbit_clearance,
        }


def relative_gaps(values):
    v = np.asarray(values, float)
    if v.size < 2:
        return np.inf
    i, j = np.triu_indices(v.size, 1)
    return float(np.min(np.abs(v[i] - v[j]) / np.maximum(np.abs(v[i]), np.abs(v[j]))))


def orbit_clearance(F: Ifs, v, attractors) -> float:
    """Distance from the union of the ``v``-orbits of the attractors to the attractor set."""
    a = np.asarray(attractors, float)
    orbit = np.concatenate([orbit_points(F, v, x) for x in a]) if len(v) else np.zeros(0)
    if orbit.size == 0 or a.size == 0:
        return np.inf
    return float(np.min(circle_distance(orbit[:, None], a[None, :])))


def distinct_multipliers_check(F: Ifs, u, tol: float = 1e-3, prefix=None,
                               resolution: float = 1 / 4096, disjoint_tol: float = 1e-9) -> MultiplierReport:
    """Are the multipliers at the attractors of ``f_u`` pairwise different (relative gap > tol)?"""
    u = as_word(u)
    fps = fixed_points(compose_word(F, u), resolution)
    if fps.neutral_everywhere or any(p.kind == "neutral" for p in fps.points):
        return MultiplierReport("inconclusive", fps)
    att = [p.x for p in fps.attractors]
    mults = [word_multiplier(F, u, a) for a in att]
    gap = relative_gaps(mults)
    rep = MultiplierReport("distinct" if gap > tol else "not distinct", fps, mults,
                           None if np.isinf(gap) else gap)
    if prefix is not None:
        c = orbit_clearance(F, as_word(prefix), att)
        rep.orbit_clearance = None if np.isinf(c) else c
        rep.orbit_disjoint = bool(c > disjoint_tol)
    return rep


def near_identity_power(f: CircleMap, eta: float, m_max: int = 10_000, n: int = 512):
    """Smallest ``m >= 1`` with ``sup |f^m - id| < eta`` on a grid, or ``None``."""
    x = np.arange(n) / n
    y = x.copy()
    for m in range(1, m_max + 1):
        y = f.lift(y)
        d = y - x
        k = np.round(d.mean())
        if np.max(np.abs(d - k)) < eta:
            return m
    return None


@dataclass
class PerturbationExperiment:
    n_values: list
    base_attractors: list
    distances: list
    counts_match: list
    target_index: int | None = None
    multipliers_before: list = field(default_factory=list)
    multipliers_after: list = field(default_factory=list)
    others_max_relative_change: float | None = None
    target_relative_change: float | None = None
    bump_radius: float | None = None
    orbit_clearance: float | None = None
    mismatch: str | None = None

    @property
    def monotone(self):
        d = np.asarray(self.distances, float)
        return bool(d.size > 0 and np.all(np.diff(d) < 0))

    def to_dict(self):
        return {
            "n_values": self.n_values,
            "base_attractors": self.base_attractors,
            "distances": self.distances,
            "monotone": self.monotone,
            "counts_match": self.counts_match,
            "target_index": self.target_index,
            "multipliers_before": self.multipliers_before,
            "multipliers_after": self.multipliers_after,
            "others_max_relative_change": self.others_max_relative_change,
            "target_relative_change": self.target_relative_change,
            "bump_radius": self.bump_radius,
            "orbit_clearance": self.orbit_clearance,
            "mismatch": self.mismatch,
        }


def multiplier_perturbation_experiment(F: Ifs, w, k: int, m: int, n_values=(1, 2, 4, 8),
                                       eta: float = 1e-2, new_slope_factor: float = 1.5,
                                       resolution: float = 1 / 4096) -> PerturbationExperiment:
    """Attractors of ``f_{u(n)}``, ``u(n) = w^m 1^{kn}``, against those of ``f_1^k``, then a local bump.

    The bump is applied to the first generator of ``w`` at one attractor of the
    largest ``u(n)``; its radius avoids the ``w^m``-orbits of all attractors, so
    only the targeted multiplier may change.
    """
    w = as_word(w)
    check_alphabet(w.symbols, F.s)
    n_values = [int(v) for v in n_values]
    fk = compose_word(F, Word((1,) * k, F.s))
    base = fixed_points(fk, resolution)
    a = np.array([p.x for p in base.attractors])
    v = w * m
    fv = compose_word(F, v)
    xg = np.arange(512) / 512
    dv = fv.lift(xg) - xg
    if np.max(np.abs(dv - np.round(dv.mean()))) >= eta:
        raise PrecisionError(f"f_w^m is not within {eta} of the identity")
    exp = PerturbationExperiment(n_values, a.tolist(), [], [])
    last = None
    for n in n_values:
        u = v + Word((1,) * (k * n), F.s)
        fps = fixed_points(compose_word(F, u), resolution)
        b = np.array([p.x for p in fps.attractors])
        ok = b.size == a.size
        exp.counts_match.append(bool(ok))
        if not ok:
            exp.mismatch = f"n={n}: {b.size} attractors vs {a.size}"
            exp.distances.append(None)
            continue
        d = circle_distance(b[:, None], a[None, :]).min(axis=0)
        exp.distances.append(float(d.max()))
        last = (u, b)
    if last is None:
        return exp
    u, b = last
    before = [word_multiplier(F, u, x) for x in b]
    i = 0
    own = orbit_points(F, v, b[i])[:-1]
    others = np.concatenate([orbit_points(F, v, x) for j, x in enumerate(b) if j != i] + [b[np.arange(b.size) != i]])
    obstacles = np.concatenate([own, others]) if own.size else others
    clear = float(circle_distance(obstacles, b[i]).min()) if obstacles.size else 0.25
    radius = min(0.5 * clear, 1e-2)
    g = F[w[0]]
    g2 = bump_perturbation(g, b[i], new_slope_factor * float(g.derivative(b[i])), radius)
    gens = list(F.generators)
    gens[w[0] - 1] = g2
    G = Ifs(tuple(gens), F.probabilities, F.names)
    after = [word_multiplier(G, u, x) for x in b]
    rel = np.abs(np.array(after) - np.array(before)) / np.abs(np.array(before))
    exp.target_index = i
    exp.multipliers_before = before
    exp.multipliers_after = after
    exp.target_relative_change = float(rel[i])
    exp.others_max_relative_change = float(np.max(np.delete(rel, i))) if b.size > 1 else 0.0
    exp.bump_radius = radius
    exp.orbit_clearance = clear
    return exp
