"""Epsilon-orbit reachability on a grid, absorbing-domain detection, and covering words."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle import Arc, Ifs, IntervalDomain, Word, normalize
from .errors import FullCircleError, InconsistencyError, PrecisionError


def _cells(resolution):
    n = int(round(1.0 / resolution))
    return n, (np.arange(n) + 0.5) / n


def _mark_balls(n, y, radius):
    """Boolean mask of cells whose centre lies within ``< radius`` of some point of ``y``."""
    y = np.asarray(y, float)
    # centre (j + 0.5)/n within radius of y  <=>  j in (n(y - r) - 0.5, n(y + r) - 0.5)
    lo = np.floor(n * (y - radius) - 0.5).astype(np.int64) + 1
    hi = np.ceil(n * (y + radius) - 0.5).astype(np.int64) - 1
    diff = np.zeros(n + 1, np.int64)
    full = hi - lo + 1 >= n
    if full.any():
        return np.ones(n, bool)
    ok = hi >= lo
    lo, hi = lo[ok], hi[ok]
    lo_m = np.mod(lo, n)
    hi_m = lo_m + (hi - lo)
    wrap = hi_m >= n
    np.add.at(diff, lo_m, 1)
    np.add.at(diff, np.where(wrap, n, hi_m + 1), -1)
    np.add.at(diff, np.zeros(int(wrap.sum()), np.int64), 1)
    np.add.at(diff, hi_m[wrap] - n + 1, -1)
    return np.cumsum(diff[:n]) > 0


def mask_to_domain(mask) -> IntervalDomain:
    """Union of marked cells as an interval-domain (cells ``[k/n, (k+1)/n]``)."""
    m = np.asarray(mask, bool)
    n = m.size
    if m.all():
        raise FullCircleError("mask covers the circle")
    if not m.any():
        from .errors import EmptyDomainError

        raise EmptyDomainError("mask is empty")
    start = int(np.argmin(m))
    arcs = []
    k = 0
    while k < n:
        i = (start + k) % n
        if m[i]:
            L = 0
            while k < n and m[(start + k) % n]:
                L += 1
                k += 1
            arcs.append(Arc(i / n, L / n))
        else:
            k += 1
    return IntervalDomain(arcs)


def domain_to_mask(U: IntervalDomain, n: int) -> np.ndarray:
    return U.contains((np.arange(n) + 0.5) / n)


@dataclass(frozen=True)
class ReachabilityResult:
    reached_all: bool
    reached_set: IntervalDomain | None
    grid_resolution: float
    epsilon: float
    steps: int
    mask: np.ndarray

    def to_dict(self):
        return {
            "reached_all": self.reached_all,
            "reached_set": "full-circle" if self.reached_all else self.reached_set.to_dict(),
            "grid_resolution": self.grid_resolution,
            "epsilon": self.epsilon,
            "steps": self.steps,
        }


def _check_resolution(epsilon, resolution):
    if resolution <= 0 or resolution > epsilon / 4 * (1 + 1e-12):
        raise PrecisionError(f"resolution {resolution} must be in (0, epsilon/4]")


def epsilon_reachable(F: Ifs, x, epsilon: float, resolution: float) -> ReachabilityResult:
    """Cells reached in at least one epsilon-step from ``x``, by breadth-first search."""
    _check_resolution(epsilon, resolution)
    n, centers = _cells(resolution)
    reached = np.zeros(n, bool)
    imgs = [normalize(g.apply(centers)) for g in F.generators]
    first = np.array([g.apply(float(x)) for g in F.generators])
    frontier_mask = _mark_balls(n, first, epsilon)
    steps = 1
    while True:
        new = frontier_mask & ~reached
        if not new.any():
            break
        reached |= new
        idx = np.flatnonzero(new)
        ys = np.concatenate([im[idx] for im in imgs])
        frontier_mask = _mark_balls(n, ys, epsilon)
        steps += 1
    if reached.all():
        return ReachabilityResult(True, None, 1.0 / n, float(epsilon), steps, reached)
    return ReachabilityResult(False, mask_to_domain(reached), 1.0 / n, float(epsilon), steps, reached)


def invariance_margin(F: Ifs, U: IntervalDomain) -> float:
    """Smallest clearance of ``f_i(A)`` inside the component of ``U`` containing it.

    Negative when some image leaves ``U`` or straddles two components.
    """
    worst = np.inf
    comps = U.arcs
    for g in F.generators:
        for A in comps:
            a = g.lift(A.left)
            b = g.lift(A.left + A.length)
            best = -np.inf
            for C in comps:
                off = np.mod(a - C.left, 1.0)
                # allow images touching the left endpoint up to rounding
                if off > 1.0 - 1e-12:
                    off -= 1.0
                right_gap = C.length - (off + (b - a))
                best = max(best, min(off, right_gap))
            worst = min(worst, best)
    return float(worst)


def check_invariant_domain(F: Ifs, U: IntervalDomain, strict_margin: float = 0.0, tol=1e-12) -> bool:
    """``f_i(U) ⊂ U`` for all generators, with clearance at least ``strict_margin``."""
    return invariance_margin(F, U) >= strict_margin - tol


@dataclass(frozen=True)
class AbsorbingResult:
    domain: IntervalDomain | None
    margin: float | None
    start: float | None
    epsilon: float
    resolution: float

    @property
    def found(self):
        return self.domain is not None

    def to_dict(self):
        return {
            "found": self.found,
            "components": self.domain.to_dict() if self.found else [],
            "margin": self.margin,
            "start": self.start,
            "epsilon": self.epsilon,
            "resolution": self.resolution,
        }


def detect_strictly_absorbing(F: Ifs, epsilon: float, resolution: float, starts=None) -> AbsorbingResult:
    """Reached set of the first start that fails to reach every cell, verified to be strictly absorbing.

    When several starts fail, the candidate of smallest measure is returned.
    """
    _check_resolution(epsilon, resolution)
    if starts is None:
        starts = (np.arange(16) + 0.5) / 16
    best = None
    for x in starts:
        r = epsilon_reachable(F, x, epsilon, resolution)
        if r.reached_all:
            continue
        if best is None or r.reached_set.measure < best[1].reached_set.measure:
            best = (float(x), r)
    if best is None:
        return AbsorbingResult(None, None, None, float(epsilon), float(resolution))
    x, r = best
    U = r.reached_set
    margin = invariance_margin(F, U)
    if margin < epsilon - 2 * r.grid_resolution - 1e-12:
        raise InconsistencyError(
            f"candidate margin {margin:.3g} below epsilon - 2 resolution; refine the grid"
        )
    return AbsorbingResult(U, margin, x, float(epsilon), r.grid_resolution)


def covering_word(F: Ifs, x, J: Arc, epsilon: float, resolution: float, max_len: int = 200):
    """Nonempty word ``w`` with ``[(f-eps)_w(x), (f+eps)_w(x)] ⊃ J``, found along an ``eps/2``-orbit.

    Returns ``None`` when no ``eps/2``-orbit reaches the centre of ``J`` within ``max_len`` steps.
    """
    if J.length > epsilon * (1 + 1e-12):
        raise PrecisionError("|J| must not exceed epsilon")
    _check_resolution(epsilon, resolution)
    half = 0.5 * epsilon
    n, centers = _cells(resolution)
    target = J.midpoint
    gens = F.generators
    parent = np.full(n, -1, np.int64)
    symbol = np.full(n, -1, np.int64)
    seen = np.zeros(n, bool)

    def hit(points):
        for i, g in enumerate(gens):
            y = g.apply(points)
            d = np.abs(np.mod(y - target + 0.5, 1.0) - 0.5)
            ok = np.flatnonzero(d < half)
            if ok.size:
                return int(ok[0]), i
        return None

    h = hit(np.array([float(x)]))
    if h is not None:
        return _certify(F, Word((h[1] + 1,), F.s), x, J, epsilon)
    frontier = []
    for i, g in enumerate(gens):
        m = _mark_balls(n, [g.apply(float(x))], half) & ~seen
        idx = np.flatnonzero(m)
        seen[idx] = True
        parent[idx] = -2
        symbol[idx] = i
        frontier.extend(idx.tolist())
    for _ in range(1, max_len):
        if not frontier:
            return None
        fr = np.array(frontier)
        h = hit(centers[fr])
        if h is not None:
            k = int(fr[h[0]])
            syms = [h[1] + 1]
            while k != -2:
                syms.append(int(symbol[k]) + 1)
                k = int(parent[k])
            return _certify(F, Word(tuple(reversed(syms)), F.s), x, J, epsilon)
        nxt = []
        for i, g in enumerate(gens):
            ys = g.apply(centers[fr])
            for src, y in zip(fr, ys):
                m = _mark_balls(n, [y], half) & ~seen
                idx = np.flatnonzero(m)
                if idx.size:
                    seen[idx] = True
                    parent[idx] = src
                    symbol[idx] = i
                    nxt.extend(idx.tolist())
        frontier = nxt
    return None


def word_covers(F: Ifs, w: Word, x, J: Arc, epsilon: float) -> bool:
    from .rotation import eps_interval

    lo, hi = eps_interval(F, w, epsilon, float(x))
    m = np.ceil(lo - J.left)
    return bool(J.left + m + J.length <= hi)


def _certify(F, w, x, J, epsilon):
    if not word_covers(F, w, x, J, epsilon):
        raise InconsistencyError("covering word failed its certificate")
    return w
