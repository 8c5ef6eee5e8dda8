"""Executable versions of the example systems, each with machine-checkable predictions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blowup import denjoy_blowup, geometric_lengths
from .circle import Arc, Ifs, IntervalDomain, circle_distance, domain_normalize, normalize
from .errors import ConstructionError
from .families import (
    ArcSupported,
    FlowBumpParams,
    GluedMap,
    MobiusMap,
    MobiusParams,
    PiecewiseLinearLift,
    RealLineMap,
    flow_bump,
    from_chart,
    monotone_cubic,
    north_south,
    rotation,
    to_chart,
)

SQRT2 = float(np.sqrt(2.0))


@dataclass
class ZooSystem:
    name: str
    ifs: Ifs
    predictions: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        return {
            "name": self.name,
            "system": self.ifs.to_descriptor(),
            "predictions": _plain(self.predictions),
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (Arc, IntervalDomain)):
        return obj.to_dict()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def cells_of(U: IntervalDomain | list, n: int) -> np.ndarray:
    """Cells ``[k/n, (k+1)/n)`` meeting any arc of ``U`` (closed arcs, so points count)."""
    arcs = U.arcs if isinstance(U, IntervalDomain) else list(U)
    mask = np.zeros(n, bool)
    for a in arcs:
        lo = int(np.floor(a.left * n))
        hi = int(np.floor((a.left + a.length) * n))
        mask[np.mod(np.arange(lo, hi + 1), n)] = True
    return mask


def image_arcs(f, arcs):
    out = []
    for a in arcs:
        y0 = float(f.lift(a.left))
        y1 = float(f.lift(a.left + a.length))
        out.append(Arc(normalize(y0), y1 - y0))
    return out


# ---------------------------------------------------------------------------
# one-sided minimality: Schottky pair, flow in the fixed gap, and a glued contraction


def expanding_arc(f, n=200_000) -> Arc:
    """The arc on which ``f' >= 1`` (the repelling disc of a hyperbolic Moebius map)."""
    x = (np.arange(n) + 0.5) / n
    big = f.derivative(x) >= 1.0
    if big.all() or not big.any():
        raise ConstructionError("derivative does not cross 1")
    start = int(np.argmin(big))
    m = np.roll(big, -start)
    i = int(np.argmax(m))
    j = i + int(np.argmin(m[i:])) if not m[i:].all() else n
    return Arc(normalize((start + i) / n), (j - i) / n)


class SchottkyPair:
    """Discs and limit-set covers of ``<f1, f2>``."""

    def __init__(self, f1: MobiusMap, f2: MobiusMap):
        self.maps = {"a": f1, "A": f1.inverse, "b": f2, "B": f2.inverse}
        self.inv = {"a": "A", "A": "a", "b": "B", "B": "b"}
        # repelling disc of each letter; the attracting disc is the one of its inverse
        self.rep = {k: expanding_arc(m) for k, m in self.maps.items()}
        self.disc = {k: self.rep[self.inv[k]] for k in self.maps}
        for k in self.maps:
            for j in self.maps:
                if k < j and _arcs_meet(self.disc[k], self.disc[j]):
                    raise ConstructionError("Schottky discs overlap")

    def level(self, k: int):
        """``4 * 3**k`` arcs ``g_w(D)`` over reduced words, each tagged with its first letter's disc."""
        arcs = [(key, self.disc[key]) for key in self.maps]
        for _ in range(k):
            nxt = []
            for key, f in self.maps.items():
                for tag, a in arcs:
                    if tag == self.inv[key]:
                        continue
                    nxt.append((key, image_arcs(f, [a])[0]))
            arcs = nxt
        return arcs

    def cover(self, k: int) -> IntervalDomain:
        return domain_normalize([a for _, a in self.level(k)])


def _arcs_meet(a: Arc, b: Arc):
    d = np.mod(b.left - a.left, 1.0)
    return d < a.length or np.mod(a.left - b.left, 1.0) < b.length


def build_one_sided_minimal(strength: float = 100.0, depth: int = 3) -> ZooSystem:
    """Schottky pair, their inverses, the gap flow ``f3`` and the glued contraction ``f4``."""
    f1 = north_south(0.0, 0.5, strength)
    f2 = north_south(0.25, 0.75, strength)
    S = SchottkyPair(f1, f2)
    # commutator oriented so that it translates I0 in the positive direction
    comm = f2.compose(f1).compose(f2.inverse).compose(f1.inverse)
    a, b = comm.fixed_points()
    I0 = Arc.from_endpoints(a, b)
    if comm.lift(I0.midpoint) - I0.midpoint < 0:
        I0 = Arc.from_endpoints(b, a)
    f3 = ArcSupported(comm.power(-SQRT2), I0, label="f3").validate()
    A = Arc.from_endpoints(0.65, 0.1)
    B = Arc.from_endpoints(0.15, 0.6)
    f4 = GluedMap([(A, f1), (B, f2)], label="f4").validate()
    F = Ifs((f1, f1.inverse, f2, f2.inverse, f3, f4), None, ("f1", "f1^-1", "f2", "f2^-1", "f3", "f4"))
    lam = S.cover(depth)
    gaps = sorted(lam.complement().arcs, key=lambda g: -g.length)
    preds = {
        "generators": 6,
        "forward_minimal": "proper cover (limit set)",
        "backward_minimal": "full circle",
        "I0": I0,
        "limit_set_depth": depth,
        "limit_set_measure": lam.measure,
        "f4_strictly_inside": f4_inside_margin(f4, lam) > 0,
        "verified_by": "minimal_set_estimate",
    }
    extras = {"schottky": S, "commutator": comm, "I0": I0, "limit_cover": lam, "gaps": gaps, "A": A, "B": B}
    return ZooSystem("one-sided-minimal", F, preds, extras)


def f4_inside_margin(f4, lam: IntervalDomain) -> float:
    """Smallest clearance of ``f4(arc)`` inside the arcs of ``lam`` (negative if some image escapes)."""
    worst = np.inf
    for img in image_arcs(f4, lam.arcs):
        best = -np.inf
        for c in lam.arcs:
            off = np.mod(img.left - c.left, 1.0)
            if off > 1 - 1e-12:
                off -= 1.0
            best = max(best, min(off, c.length - off - img.length))
        worst = min(worst, best)
    return float(worst)


# ---------------------------------------------------------------------------
# Denjoy blow-up of the previous example


def build_denjoy_nested(depth: int = 30, orbit_seed: float = 0.1, ratio: float = 0.5,
                        scale: float = 0.1) -> ZooSystem:
    """Blow up the first ``depth`` points of a full orbit of the one-sided example."""
    if depth < 1:
        raise ConstructionError("depth must be at least 1")
    base = build_one_sided_minimal()
    lengths = geometric_lengths(depth, ratio, scale)
    res = denjoy_blowup(base.ifs, orbit_seed, lengths, depth)
    programmed = scale * ratio * (1 - ratio**depth) / (1 - ratio)
    preds = {
        "forward_minimal": "proper, inside backward",
        "backward_minimal": "proper (blown intervals removed)",
        "total_blown_length": res.total_length,
        "programmed_length": programmed,
        "blown_intervals": [Arc(normalize(a), l) for a, l in res.intervals()],
        "verified_by": "minimal_set_estimate",
    }
    return ZooSystem("denjoy-nested", res.ifs, preds, {"blowup": res, "base": base, "pullback": True})


# ---------------------------------------------------------------------------
# Cantorvals: a Denjoy map with two blown orbits


def _two_flows(I0: Arc, J0: Arc, time: float):
    from .circle import Composite

    a = flow_bump(FlowBumpParams(I0, time, amplitude=I0.length))
    b = flow_bump(FlowBumpParams(J0, time, amplitude=J0.length))
    return Composite([a, b])


def _short_flows(I0: Arc, J0: Arc):
    """Short-time flows that equal words in the two flows, per direction.

    Forward: ``f1^41 f2^29`` (time ``41 - 29 sqrt2``) and ``f1^99 f2^70``
    (time ``99 - 70 sqrt2``); backward uses the inverses. Their orbits fill the
    flow lines inside ``I0`` and ``J0``, which bounded words leave coarse.
    """
    times = (41 - 29 * SQRT2, 99 - 70 * SQRT2)
    return {"forward": [_two_flows(I0, J0, t) for t in times],
            "backward": [_two_flows(I0, J0, -t) for t in times]}


def build_cantorval(depth: int = 12, alpha: float = SQRT2 - 1, scale: float = 0.08,
                    ratio: float = 0.5) -> ZooSystem:
    """Denjoy map with intervals ``I_i`` (orbit of 0) and ``J_i`` (orbit of 1/2), two flows and ``g``.

    ``g`` is piecewise linear through ``p1 -> p1``, ``p2 -> q1 + |J|/10``,
    ``p1' -> q2 - |J|/10``, ``p2' -> p2'`` and the identity elsewhere.
    """
    if depth < 1:
        raise ConstructionError("depth must be at least 1")
    base = Ifs((rotation(alpha),))
    lengths = [geometric_lengths(depth, ratio, scale)] * 2
    res = denjoy_blowup(base, [0.0, 0.5], lengths, depth)
    f = res.ifs[1]
    arcs = [Arc(normalize(a), l) for a, l in res.intervals()]
    I, J = arcs[:depth], arcs[depth:]
    I0, J0 = I[0], J[0]
    f1 = _two_flows(I0, J0, 1.0)
    f2 = _two_flows(I0, J0, -SQRT2)
    Jk = J0
    before = min(I, key=lambda a: np.mod(Jk.left - a.left, 1.0))
    after = min(I, key=lambda a: np.mod(a.left - Jk.left, 1.0))
    p1, p2 = before.left, before.left + before.length
    q1 = p1 + np.mod(Jk.left - p1, 1.0)
    q2 = q1 + Jk.length
    pp1 = p1 + np.mod(after.left - p1, 1.0)
    pp2 = pp1 + after.length
    gap = 0.1 * Jk.length
    g = PiecewiseLinearLift([p1, p2, pp1, pp2], [p1, q1 + gap, q2 - gap, pp2], label="g").validate()
    F = Ifs((f, f.inverse, f1, f2, g), None, ("f", "f^-1", "f1", "f2", "g"))
    preds = {
        "forward_minimal": "C2: complement of the I intervals",
        "backward_minimal": "C1: complement of the J intervals",
        "nested": False,
        "I_intervals": I,
        "J_intervals": J,
        "g_support": Arc(normalize(p1), pp2 - p1),
        "verified_by": "minimal_set_estimate",
    }
    extras = {"blowup": res, "I": I, "J": J, "A": Arc(normalize(p1), pp2 - p1), "Jk": Jk,
              "pinned": (p1, p2, q1, q2, pp1, pp2),
              # orbits of the rotation-like f are followed directly; arcs would hide sub-cell gaps
              "estimator": {"run_length": None, "power_steps": 8192, "max_depth": 10, "max_points": 200_000,
                            "prune": False, "power_words": _short_flows(I0, J0), "word_steps": 3000}}
    return ZooSystem("cantorval", F, preds, extras)


def cantorval_skeleton(I_or_J, n: int) -> np.ndarray:
    """Cells not lying inside one of the given intervals."""
    mask = np.ones(n, bool)
    for a in I_or_J:
        lo = int(np.ceil(a.left * n))
        hi = int(np.floor((a.left + a.length) * n))
        mask[np.mod(np.arange(lo, hi), n)] = False
    return mask


def cantorval_inclusion(Z: ZooSystem, n: int = 4096) -> dict:
    """Cellwise ``g(C2) ⊆ C2`` on the truncation, and the largest move of ``g`` outside ``A``.

    ``C2`` is the complement of the ``I`` intervals; its images are taken arc by
    arc through the lift, so the check is exact up to the cell size.
    """
    g = Z.ifs[5]
    I = sorted(Z.extras["I"], key=lambda a: a.left)
    skeleton = cantorval_skeleton(I, n)
    pieces = []
    for a, b in zip(I, I[1:] + [Arc(I[0].left, I[0].length)]):
        lo = a.left + a.length
        hi = b.left + (1.0 if b.left < lo else 0.0)
        if hi > lo:
            pieces.append((lo, hi))
    lo = np.array([p[0] for p in pieces])
    hi = np.array([p[1] for p in pieces])
    ga, gb = g.lift(lo), g.lift(hi)
    img = np.zeros(n, bool)
    for a, b in zip(ga, gb):
        k0, k1 = int(np.floor(a * n)), int(np.floor(b * n))
        # closed image arcs: an endpoint on a cell boundary only touches the cell before it
        if b * n == k1:
            k1 -= 1
        img[np.mod(np.arange(k0, max(k0, k1) + 1), n)] = True
    A = Z.extras["A"]
    x = (np.arange(n) + 0.5) / n
    out = ~A.contains(x)
    moved = float(np.max(circle_distance(g.apply(x[out]), x[out]))) if out.any() else 0.0
    return {"g_C2_cells_outside": int(np.sum(img & ~skeleton)), "C2_cells": int(skeleton.sum()),
            "g_moves_outside_A": moved}


# ---------------------------------------------------------------------------
# a pair of Cantor sets meeting at {0, infinity}

T1 = lambda t: 1.0 + (t - 1.0) / 100.0  # noqa: E731
TM1 = lambda t: -1.0 + (t + 1.0) / 100.0  # noqa: E731


class CantorPairG:
    """The map ``g`` of the projective line in the ``t`` chart, with its four branches."""

    def __init__(self):
        self.b0, self.b1, self.b2, self.b3, self.b4 = -10.0, -9.9, -9.8, -1.0, 1.0
        # free branch from Q(1) at Q^{-1}(T_{-1}(1)) to T_1(-1) at -1
        self.cubic = monotone_cubic(self.b2, 0.1, 1.0, self.b3, T1(-1.0), 0.01)

    def __call__(self, t):
        t = np.asarray(t, float)
        out = t.copy()
        m = (t >= self.b3) & (t <= self.b4)
        out[m] = T1(t[m])
        m = (t >= self.b0) & (t < self.b1)
        out[m] = 100.0 * t[m] + 990.0
        m = (t >= self.b1) & (t <= self.b2)
        out[m] = t[m] + 9.9
        m = (t > self.b2) & (t < self.b3)
        out[m] = self.cubic(t[m])
        return out

    def inverse(self, y):
        y = np.asarray(y, float)
        out = y.copy()
        m = (y >= T1(-1.0)) & (y <= 1.0)
        out[m] = 1.0 + 100.0 * (y[m] - 1.0)
        m = (y >= -10.0) & (y < 0.0)
        out[m] = (y[m] - 990.0) / 100.0
        m = (y >= 0.0) & (y <= 0.1)
        out[m] = y[m] - 9.9
        m = (y > 0.1) & (y < T1(-1.0))
        if m.any():
            lo = np.full(int(m.sum()), self.b2)
            hi = np.full(lo.size, self.b3)
            target = y[m]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                below = self.cubic(mid) < target
                lo = np.where(below, mid, lo)
                hi = np.where(below, hi, mid)
            out[m] = 0.5 * (lo + hi)
        return out


def cantor_intervals(depth: int):
    """``3**depth`` intervals of the level-``depth`` cover of ``C`` in ``[-1, 1]`` (t chart)."""
    iv = np.array([[-1.0, 1.0]])
    for _ in range(depth):
        parts = []
        for c in (-1.0, 0.0, 1.0):
            parts.append(c + (iv - c) / 100.0)
        iv = np.concatenate(parts)
    return iv[np.argsort(iv[:, 0])]


def k_plus_intervals(depth: int, max_power: int = 7):
    """Truncation of ``K_+``: ``C`` at ``depth`` and the copies ``T0^{-i}(C_{+-1})``, ``i <= max_power``."""
    C = cantor_intervals(depth)
    side = C[(C[:, 0] >= 0.98 - 1e-15) | (C[:, 1] <= -0.98 + 1e-15)]
    parts = [C] + [side * 100.0**i for i in range(1, max_power + 1)]
    return np.concatenate(parts)


def t_intervals_to_arcs(iv, pad: float = 0.0):
    lo = from_chart(iv[:, 0])
    hi = from_chart(iv[:, 1])
    return [Arc(normalize(a - pad), (b - a) + 2 * pad) for a, b in zip(lo, hi)]


def build_cantor_pair(depth: int = 6, max_power: int = 7) -> ZooSystem:
    """Generators ``(T0, T0^{-1}, g, g~)`` with ``T0(t) = t/100`` and ``g~(t) = -g(-t)``."""
    if depth < 1:
        raise ConstructionError("depth must be at least 1")
    T0 = MobiusMap(MobiusParams(1.0, 0.0, 0.0, 100.0), {"label": "T0"})
    Q = MobiusMap(MobiusParams(1.0, 0.0, 0.0, 10.0), {"label": "Q"})
    G = CantorPairG()
    knots = {"chart": "t", "breakpoints": [G.b0, G.b1, G.b2, G.b3, G.b4]}
    g = RealLineMap(G, "g", G.inverse, knots).validate()
    gt = RealLineMap(lambda t: -G(-np.asarray(t, float)), "g~",
                     lambda y: -G.inverse(-np.asarray(y, float)),
                     {"chart": "t", "conjugate_of": "g", "by": "t -> -t"}).validate()
    F = Ifs((T0, T0.inverse, g, gt), None, ("T0", "T0^-1", "g", "g~"))
    kp = k_plus_intervals(depth, max_power)
    km = kp / 10.0
    preds = {
        "forward_minimal": "K+",
        "backward_minimal": "K-",
        "intersection": [from_chart(0.0), 0.0],
        "depth": depth,
        "breakpoints": {"-10": -10.0, "-9.9": 0.0, "-9.8": 0.1, "-1": T1(-1.0), "1": 1.0},
        "verified_by": "essential_intersection",
    }
    # the two covers meet only at isolated points, so one shared cell suffices
    extras = {"Q": Q, "T0": T0, "g_t": G, "k_plus": kp, "k_minus": km,
              "intersection": {"min_cells": 1}}
    return ZooSystem("cantor-pair", F, preds, extras)


def _t_image(fn, iv):
    a, b = fn(iv[:, 0]), fn(iv[:, 1])
    return np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)


def t_cells(iv, n: int) -> np.ndarray:
    """Cells meeting any closed ``t``-interval of ``iv`` (rows ``[lo, hi]``)."""
    lo = np.floor(np.asarray(from_chart(iv[:, 0])) * n).astype(np.int64)
    hi = np.floor(np.asarray(from_chart(iv[:, 1])) * n).astype(np.int64)
    diff = np.zeros(n + 1, np.int64)
    np.add.at(diff, np.clip(lo, 0, n), 1)
    np.add.at(diff, np.clip(hi + 1, 0, n), -1)
    return np.cumsum(diff[:n]) > 0


def _intervals_outside(iv, cover, tol=1e-12) -> int:
    """Number of rows of ``iv`` not contained in a single row of ``cover``."""
    cover = cover[np.argsort(cover[:, 0])]
    k = np.searchsorted(cover[:, 0], iv[:, 0] + tol * np.maximum(1.0, np.abs(iv[:, 0])), side="right") - 1
    ok = k >= 0
    kk = np.clip(k, 0, None)
    ok &= iv[:, 1] <= cover[kk, 1] + tol * np.maximum(1.0, np.abs(iv[:, 1]))
    return int(np.sum(~ok))


def cantor_pair_inclusions(Z: ZooSystem, n: int = 4096) -> dict:
    """Cellwise checks of ``g(K+) ⊆ K+`` and ``g^{-1}(K- ∩ [-10, 1]) ⊆ K-`` on truncations.

    Counts are image cells outside the cover of the target set; both are 0
    when the inclusions hold at this resolution.
    """
    G = Z.extras["g_t"]
    kp, km = Z.extras["k_plus"], Z.extras["k_minus"]
    plus, minus = t_cells(kp, n), t_cells(km, n)
    img = t_cells(_t_image(G, kp), n)
    win = km[(km[:, 0] >= -10.0) & (km[:, 1] <= 1.0)]
    pre = t_cells(_t_image(G.inverse, win), n)
    return {"g_K_plus_outside": int(np.sum(img & ~plus)),
            "g_K_plus_intervals_outside": _intervals_outside(_t_image(G, kp), kp),
            "g_inv_K_minus_intervals_outside": _intervals_outside(_t_image(G.inverse, win), km),
            "g_inv_K_minus_outside": int(np.sum(pre & ~minus)),
            "K_plus_cells": int(plus.sum()), "K_minus_cells": int(minus.sum())}


def cantor_pair_breakpoints(Z: ZooSystem) -> float:
    """Largest deviation of ``g`` (and of its one-sided limits) from the programmed breakpoint values."""
    G = Z.extras["g_t"]
    bp = Z.predictions["breakpoints"]
    t = np.array([float(k) for k in bp])
    v = np.array(list(bp.values()))
    h = 1e-12
    err = np.abs(G(t) - v)
    err = np.maximum(err, np.abs(G(t - h) - v) - 200 * h)
    err = np.maximum(err, np.abs(G(t + h) - v) - 200 * h)
    return float(err.max())


# ---------------------------------------------------------------------------
# lift to a d-fold cover with one perturbed gap


def build_lifted_perturbed(base: ZooSystem, d: int = 2, bump_gap_index: int = 0,
                           time: float = 1.0) -> ZooSystem:
    """Lift ``base`` to the ``d``-fold cover and append a flow supported in one lifted gap."""
    from .factorization import lift_to_cover

    gaps = base.extras.get("gaps")
    if not gaps:
        raise ConstructionError("base system has no identified gap intervals")
    if not 0 <= bump_gap_index < len(gaps):
        raise ConstructionError(f"gap index {bump_gap_index} out of range (0..{len(gaps) - 1})")
    gap = gaps[bump_gap_index]
    J = Arc(gap.left / d, gap.length / d)
    bump = flow_bump(FlowBumpParams(J, time, amplitude=J.length))
    lifted = lift_to_cover(base.ifs, d)
    names = tuple(lifted.names or ()) + ("bump",) if lifted.names else None
    F = Ifs(tuple(lifted.generators) + (bump,), None, names)
    others = [Arc(normalize(J.left + k / d), J.length) for k in range(1, d)]
    preds = {
        "d": d,
        "bump_arc": J,
        "bump_translates": others,
        "residual_above": 0.01,
        "residual_elsewhere_below": 1e-9,
        "verified_by": "estimate_d, commutation_profile",
    }
    return ZooSystem(f"{base.name}-lift{d}-bump", F, preds,
                     {"base": base, "J": J, "lifted": lifted, "bump": bump})


def estimate_minimal(Z: ZooSystem, direction: str = "forward", resolution: float = 1 / 4096, **kw):
    """``minimal_set_estimate`` with the system's recommended settings.

    Denjoy blow-ups of another zoo system are estimated on the base system and
    pulled back through the collapse map, with the blown intervals removed.
    """
    from .blowup import pullback_mask
    from .minimality import MinimalSetEstimate, minimal_set_estimate, prune_cover

    if Z.extras.get("pullback"):
        # the base grid is twice as fine, so pulled-back cells are not coarser than base cells
        base = minimal_set_estimate(Z.extras["base"].ifs, direction, resolution / 2, **kw)
        n = int(round(1.0 / resolution))
        G = Z.ifs if direction == "forward" else Z.ifs.inverse()
        mask = prune_cover(G, pullback_mask(Z.extras["blowup"], base.mask, n))
        return MinimalSetEstimate(direction, mask, 1.0 / n, base.depth, base.seeds, base.seed_disagreement)
    opts = dict(Z.extras.get("estimator", {}))
    if isinstance(opts.get("power_words"), dict):
        opts["power_words"] = opts["power_words"][direction]
    opts.update(kw)
    return minimal_set_estimate(Z.ifs, direction, resolution, **opts)


def fidelity_checks(Z: ZooSystem, n: int = 4096) -> dict:
    """Construction checks that need no dynamics, per system."""
    out = {}
    if Z.name == "cantor-pair":
        Q, T0 = Z.extras["Q"], Z.extras["T0"]
        x = np.linspace(0.0, 1.0, 4097)
        out["Q_squared_error"] = float(np.max(circle_distance(Q.apply(Q.apply(x)), T0.apply(x))))
        out["breakpoint_error"] = cantor_pair_breakpoints(Z)
        out.update(cantor_pair_inclusions(Z, n))
    elif Z.name == "cantorval":
        out.update(cantorval_inclusion(Z, n))
    elif Z.name == "one-sided-minimal":
        out["f4_margin"] = f4_inside_margin(Z.ifs[6], Z.extras["limit_cover"])
    elif "bump_arc" in Z.predictions:
        J = Z.predictions["bump_arc"]
        x = (np.arange(n) + 0.5) / n
        off = ~J.contains(x)
        out["bump_moves_outside"] = float(np.max(circle_distance(Z.extras["bump"].apply(x[off]), x[off])))
    return out


BUILDERS = {
    "one-sided-minimal": lambda depth=None: build_one_sided_minimal(),
    "denjoy-nested": lambda depth=None: build_denjoy_nested(depth or 30),
    "cantorval": lambda depth=None: build_cantorval(depth or 12),
    "cantor-pair": lambda depth=None: build_cantor_pair(depth or 6),
    "lifted-perturbed": lambda depth=None: build_lifted_perturbed(build_one_sided_minimal(), 2, 0),
}


def build(name: str, depth: int | None = None) -> ZooSystem:
    if name not in BUILDERS:
        raise ConstructionError(f"unknown zoo system {name!r}; choose from {sorted(BUILDERS)}")
    return BUILDERS[name](depth)
