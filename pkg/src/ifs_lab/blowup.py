"""Denjoy-style blow-up of a finite piece of an orbit.

Each orbit point ``q`` is replaced by an interval ``I_q`` and every generator
is extended affinely ``I_q -> I_{g(q)}``. Only finitely many points can be
blown up, so the orbit is truncated after ``depth`` points (breadth-first over
generators and their inverses). Neighbours of the truncated orbit that would
otherwise create a flat piece or a jump receive "virtual" intervals of
negligible length ``eta``; the remaining defects have size ``eta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle import CircleMap, Ifs, circle_distance, normalize
from .errors import MeasureError

MATCH_TOL = 1e-11
# large enough that the affine stretch I_v -> I_q stays well conditioned
VIRTUAL_LENGTH = 1e-9


class _Blown:
    """Sorted blown points with their interval lengths, and the collapse map."""

    def __init__(self, points, lengths):
        order = np.argsort(points)
        self.q = np.asarray(points, float)[order]
        self.ell = np.asarray(lengths, float)[order]
        self.total = float(self.ell.sum())
        self.cum = np.concatenate([[0.0], np.cumsum(self.ell)])
        # left endpoints of the inserted intervals in the new circle
        self.left = (1.0 - self.total) * self.q + self.cum[:-1]

    def match(self, x):
        """Index of the blown point within MATCH_TOL of ``x`` (or -1), vectorized."""
        x = normalize(np.atleast_1d(np.asarray(x, float)))
        j = np.searchsorted(self.q, x)
        best = np.full(x.shape, -1)
        bestd = np.full(x.shape, np.inf)
        n = len(self.q)
        for cand in (j - 1, j, j + 1):
            c = np.mod(cand, n)
            d = circle_distance(x, self.q[c])
            upd = (d < bestd) & (d <= MATCH_TOL)
            best = np.where(upd, c, best)
            bestd = np.where(upd, d, bestd)
        return best

    def h_left(self, t):
        """Old-circle lift value to new-circle lift (left end at blown points)."""
        t = np.asarray(t, float)
        k = np.floor(t)
        u = t - k
        n_before = np.searchsorted(self.q, u, side="left")
        return k + (1.0 - self.total) * u + self.cum[n_before]

    def locate(self, y):
        """For new-circle lift ``y``: (integer part, old point, blown index or -1, offset in interval)."""
        y = np.asarray(y, float)
        k = np.floor(y)
        v = y - k
        j = np.searchsorted(self.left, v, side="right") - 1
        jc = np.clip(j, 0, len(self.q) - 1)
        off = v - self.left[jc]
        inside = (j >= 0) & (off <= self.ell[jc])
        before = np.where(j >= 0, self.cum[jc + 1], 0.0)
        x = np.where(inside, self.q[jc], (v - before) / (1.0 - self.total))
        return k, x, np.where(inside, jc, -1), np.where(inside, off, 0.0)

    def project(self, y):
        if self.q.size == 0:
            return np.asarray(y, float) + 0.0
        k, x, _, _ = self.locate(y)
        return k + x


class DenjoyMap(CircleMap):
    kind = "denjoy"

    def __init__(self, base: CircleMap, blown: _Blown, label=None):
        super().__init__()
        self.base = base
        self.blown = blown
        self.label = label

    def _lift(self, y):
        B = self.blown
        shape = np.shape(y)
        y = np.atleast_1d(np.asarray(y, float))
        k, x, idx, off = B.locate(y)
        gx = self.base._lift(x)
        out = B.h_left(gx)
        inside = idx >= 0
        if np.any(inside):
            tgt = B.match(gx[inside])
            ell_src = B.ell[idx[inside]]
            ell_tgt = np.where(tgt >= 0, B.ell[np.maximum(tgt, 0)], 0.0)
            g_in = gx[inside]
            # exact interval start of the matched target, on the correct sheet
            start = np.where(
                tgt >= 0,
                np.round(g_in - B.q[np.maximum(tgt, 0)]) + B.left[np.maximum(tgt, 0)],
                B.h_left(g_in),
            )
            out = out.copy()
            out[inside] = start + off[inside] / ell_src * ell_tgt
        return (k + out).reshape(shape)

    def _inverse_lift(self, y):
        return self.inverse._lift(y)

    @property
    def inverse(self):
        return DenjoyMap(self.base.inverse, self.blown, self.label)

    def parameters(self):
        p = {"blown_points": len(self.blown.q), "total_length": self.blown.total}
        if self.label:
            p["label"] = self.label
        return p

    def children(self):
        return [self.base]


@dataclass(frozen=True)
class BlowupResult:
    """Blown-up IFS with its collapse map ``project`` (new circle -> old circle)."""

    ifs: Ifs
    orbit: tuple
    lengths: tuple
    blown: object

    @property
    def total_length(self):
        return float(sum(self.lengths))

    def project(self, y):
        """Semiconjugacy ``pi`` on lifts: ``pi(G(y)) = g(pi(y))``."""
        y = np.asarray(y, float)
        out = self.blown.project(y)
        return float(out) if np.ndim(y) == 0 else out

    def intervals(self):
        """Blown intervals of the real orbit points as ``(left, length)`` pairs in the new circle."""
        B = self.blown
        idx = B.match(np.asarray(self.orbit))
        return [(float(B.left[i]), float(B.ell[i])) for i in idx]


def _bfs_orbit(maps, x0, depth):
    pts = [normalize(float(x0))]
    frontier = [pts[0]]
    while len(pts) < depth and frontier:
        nxt = []
        for p in frontier:
            for m in maps:
                q = m.apply(p)
                if min(circle_distance(q, r) for r in pts) > MATCH_TOL:
                    pts.append(q)
                    nxt.append(q)
                    if len(pts) >= depth:
                        return pts
        frontier = nxt
    return pts


def denjoy_blowup(base: Ifs, orbit_seed, lengths, depth: int, virtual_length=VIRTUAL_LENGTH) -> BlowupResult:
    """Blow up the first ``depth`` points of the orbit of ``orbit_seed`` under generators and inverses.

    Point number ``k`` (1-based, breadth-first order) receives ``lengths[k-1]``.
    With a sequence of seeds, ``lengths`` holds one length list per seed and
    each orbit is truncated separately.
    """
    seeds = list(np.atleast_1d(np.asarray(orbit_seed, float)))
    multi = np.ndim(orbit_seed) > 0
    per_seed = [list(v) for v in lengths] if multi else [list(lengths)]
    if len(per_seed) != len(seeds):
        raise MeasureError("need one length list per seed")
    if depth < 0:
        raise MeasureError("depth must be non-negative")
    per_seed = [[float(v) for v in ls[:depth]] for ls in per_seed]
    if any(len(ls) < depth for ls in per_seed):
        raise MeasureError("not enough lengths for the requested depth")
    if any(v <= 0 for ls in per_seed for v in ls):
        raise MeasureError("lengths must be positive")
    if depth == 0:
        return BlowupResult(base, (), (), _Blown(np.zeros(0), np.zeros(0)))
    if sum(sum(ls) for ls in per_seed) >= 1:
        raise MeasureError("total inserted length must be below 1")
    maps = list(base.generators) + [g.inverse for g in base.generators]
    orbit, kept = [], []
    for x0, ls in zip(seeds, per_seed):
        orb = _bfs_orbit(maps, x0, depth)
        for p, ell in zip(orb, ls):
            if all(circle_distance(p, r) > MATCH_TOL for r in orbit):
                orbit.append(p)
                kept.append(ell)
    pts = list(orbit)
    ells = list(kept)
    # one layer of virtual neighbours removes flats and jumps at the truncation boundary
    for p in orbit:
        for m in maps:
            q = m.apply(p)
            if min(circle_distance(q, r) for r in pts) > MATCH_TOL:
                pts.append(q)
                ells.append(virtual_length)
    if sum(ells) >= 1:
        raise MeasureError("total inserted length must be below 1")
    blown = _Blown(np.array(pts), np.array(ells))
    gens = tuple(DenjoyMap(g, blown) for g in base.generators)
    return BlowupResult(Ifs(gens, base.probabilities, base.names), tuple(orbit), tuple(kept), blown)


def geometric_lengths(depth, ratio=0.5, scale=0.1):
    """``scale * ratio**k`` for ``k = 1..depth``."""
    return [scale * ratio**k for k in range(1, depth + 1)]


def pullback_mask(res: BlowupResult, base_mask, n: int | None = None) -> np.ndarray:
    """Cells of the blown-up circle over marked cells of ``base_mask``, minus cells inside blown intervals.

    A cell is kept when its projection meets a marked base cell and it does
    not lie strictly inside one of the blown intervals of the real orbit.
    """
    base_mask = np.asarray(base_mask, bool)
    m = base_mask.size
    n = m if n is None else int(n)
    edges = np.arange(n + 1) / n
    p = res.project(edges)
    lo = np.floor(p[:-1] * m).astype(np.int64)
    hi = np.floor(p[1:] * m).astype(np.int64)
    # prefix sums over two periods answer "any marked cell in [lo, hi]"
    cum = np.concatenate([[0], np.cumsum(np.tile(base_mask, 3))])
    lo3, hi3 = lo + m, np.maximum(hi, lo) + m
    out = cum[hi3 + 1] - cum[lo3] > 0
    for left, ell in res.intervals():
        a = int(np.floor(left * n)) + 1
        b = int(np.ceil((left + ell) * n)) - 1
        if b > a:
            out[np.mod(np.arange(a, b), n)] = False
    return out
