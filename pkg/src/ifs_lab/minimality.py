"""Grid estimates of the forward/backward minimal sets, essential intersections, and Hutchinson certificates."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .circle import Arc, CircleMap, Ifs, IntervalDomain, Word, circle_distance, compose_word, normalize
from .errors import PrecisionError

FULL_CIRCLE = "full-circle"


def _ncells(resolution):
    if resolution <= 0:
        raise PrecisionError("resolution must be positive")
    return int(round(1.0 / resolution))


def _cell_of(x, n):
    return np.minimum((normalize(np.asarray(x, float)) * n).astype(np.int64), n - 1)


def dilate(mask, r=1):
    out = mask.copy()
    for k in range(1, r + 1):
        out |= np.roll(mask, k) | np.roll(mask, -k)
    return out


@dataclass
class MinimalSetEstimate:
    direction: str
    mask: np.ndarray = field(repr=False)
    resolution: float
    depth: int
    seeds: int = 1
    seed_disagreement: int = 0

    @property
    def full(self):
        return bool(self.mask.all())

    @property
    def cover(self):
        """``IntervalDomain`` of marked cells, or the full-circle marker."""
        if self.full:
            return FULL_CIRCLE
        from .reachability import mask_to_domain

        return mask_to_domain(self.mask)

    @property
    def measure(self):
        return float(self.mask.mean())

    def cells(self):
        return np.flatnonzero(self.mask)

    def to_dict(self):
        cov = self.cover
        return {
            "direction": self.direction,
            "cover": cov if isinstance(cov, str) else cov.to_dict(),
            "measure": self.measure,
            "resolution": self.resolution,
            "depth": self.depth,
            "seeds": self.seeds,
            "seed_disagreement": self.seed_disagreement,
        }

    def indicator_csv(self):
        return "cell,left,marked\n" + "".join(
            f"{k},{k * self.resolution!r},{int(m)}\n" for k, m in enumerate(self.mask)
        )


class _KeySet:
    """Set of int64 keys: a large sorted array plus a small sorted buffer."""

    def __init__(self):
        self.main = np.zeros(0, np.int64)
        self.buf = np.zeros(0, np.int64)

    def __len__(self):
        return self.main.size + self.buf.size

    def unseen(self, k):
        m = np.ones(k.size, bool)
        for arr in (self.main, self.buf):
            if arr.size:
                p = np.minimum(np.searchsorted(arr, k), arr.size - 1)
                m &= arr[p] != k
        return m

    def add(self, k):
        self.buf = np.union1d(self.buf, k)
        if self.buf.size > max(1 << 20, self.main.size // 4):
            self.main = np.union1d(self.main, self.buf)
            self.buf = np.zeros(0, np.int64)


def _orbit_cells(G: Ifs, seeds, n, max_depth, tol, max_points):
    """Cells met by the exact orbit of ``seeds`` (breadth first, points merged within ``tol``)."""
    x = normalize(np.atleast_1d(np.asarray(seeds, float)))
    mask = np.zeros(n, bool)
    mask[_cell_of(x, n)] = True
    keys = _KeySet()
    keys.add(np.unique(np.round(x / tol).astype(np.int64)))
    depth = 0
    while depth < max_depth and x.size and len(keys) < max_points:
        ys = normalize(np.concatenate([g.apply(x) for g in G.generators]))
        k, idx = np.unique(np.round(ys / tol).astype(np.int64), return_index=True)
        ys = ys[idx]
        new = keys.unseen(k)
        k, x = k[new], ys[new]
        keys.add(k)
        mask[_cell_of(x, n)] = True
        depth += 1
    return mask, depth


def _runs(mask):
    """Maximal cyclic runs of marked cells as ``(start, length)``."""
    n = mask.size
    if mask.all():
        return [(0, n)]
    if not mask.any():
        return []
    start = int(np.argmin(mask))
    m = np.roll(mask, -start).astype(np.int8)
    d = np.diff(np.concatenate([[0], m, [0]]))
    lo = np.flatnonzero(d == 1)
    hi = np.flatnonzero(d == -1)
    return [((int(a) + start) % n, int(b - a)) for a, b in zip(lo, hi)]


def _propagate_arcs(G: Ifs, mask, run_length, rounds):
    """Treat runs of at least ``run_length`` marked cells as arcs and mark their images.

    The end cells of each run are dropped before mapping, and only cells lying
    inside an image arc are marked.
    """
    n = mask.size
    for r in range(rounds):
        added = 0
        for s, L in _runs(mask):
            if L < run_length:
                continue
            a, b = (s + 1) / n, (s + L - 1) / n
            for g in G.generators:
                ya, yb = float(g.lift(a)), float(g.lift(b))
                lo, hi = int(np.ceil(ya * n)), int(np.floor(yb * n))
                if hi - lo >= n:
                    mask[:] = True
                    return mask, r + 1
                idx = np.mod(np.arange(lo, hi), n)
                added += int((~mask[idx]).sum())
                mask[idx] = True
        if added == 0 or mask.all():
            return mask, r
    return mask, rounds


def _any_marked(mask, lo, hi):
    """For cell ranges ``[lo, hi]`` (unwrapped, length < n): does ``mask`` have a marked cell there?"""
    n = mask.size
    cum = np.concatenate([[0], np.cumsum(np.tile(mask, 3))])
    base = np.floor_divide(lo, n) * n
    lo, hi = lo - base + n, np.minimum(hi - base, lo - base + n - 1) + n
    return cum[hi + 1] - cum[lo] > 0


def prune_cover(G: Ifs, mask, max_rounds: int = 1000):
    """Drop marked cells whose image under some generator misses every marked cell, until stable.

    Sound for any cover of an invariant set: such a cell cannot meet the set.
    """
    n = mask.size
    mask = mask.copy()
    for _ in range(max_rounds):
        cells = np.flatnonzero(mask)
        if cells.size == 0 or cells.size == n:
            return mask
        bad = np.zeros(cells.size, bool)
        for g in G.generators:
            a = g.lift(cells / n)
            b = g.lift((cells + 1) / n)
            lo = np.floor(a * n).astype(np.int64)
            hi = np.ceil(b * n).astype(np.int64) - 1
            bad |= ~_any_marked(mask, lo, np.maximum(hi, lo))
        if not bad.any():
            return mask
        mask[cells[bad]] = False
    return mask


def attracting_points(G: Ifs, resolution=1 / 1024):
    """Attracting fixed points of the generators, strongest first."""
    from .errors import NoFixedPointsError
    from .morse_smale import fixed_points

    found = []
    for g in G.generators:
        try:
            fps = fixed_points(g, resolution)
        except NoFixedPointsError:
            continue
        found.extend((p.multiplier, p.x) for p in fps.attractors)
    found.sort()
    out = []
    for _, x in found:
        if all(circle_distance(x, y) > 1e-9 for y in out):
            out.append(x)
    return out


def _power_orbits(G: Ifs, mask, steps, sample=256, maps=None):
    """Mark the cells met by ``g^k(x)``, ``k <= steps``, for every generator and up to ``sample`` marked cells."""
    n = mask.size
    cells = np.flatnonzero(mask)
    if cells.size > sample:
        cells = cells[np.linspace(0, cells.size - 1, sample).astype(np.int64)]
    x = (cells + 0.5) / n
    for g in (G.generators if maps is None else maps):
        y = x.copy()
        for _ in range(steps):
            y = normalize(g.apply(y))
            mask[_cell_of(y, n)] = True
    return mask


def _sweep(G: Ifs, mask, rounds):
    """Mark the cells of ``g(c)`` for every marked cell centre ``c``, ``rounds`` times."""
    n = mask.size
    for _ in range(rounds):
        x = (np.flatnonzero(mask) + 0.5) / n
        before = int(mask.sum())
        for g in G.generators:
            mask[_cell_of(normalize(g.apply(x)), n)] = True
        if int(mask.sum()) == before:
            break
    return mask


def minimal_set_estimate(F: Ifs, direction: str = "forward", resolution: float = 1 / 4096,
                         max_depth: int = 20, seeds: int = 4, tol: float = 1e-10,
                         run_length: int | None = 8, max_points: int = 2_000_000, rng_seed: int = 0,
                         burn_in: int = 2_000, power_steps: int = 0, prune: bool = True,
                         power_words=(), word_steps: int = 0, sweep_rounds: int = 0) -> MinimalSetEstimate:
    """Grid estimate of the forward (or backward) minimal set.

    Seeds are attracting fixed points of the generators (of the inverses for
    ``"backward"``), which lie in the minimal set; without any, a point at the
    end of a random orbit of length ``burn_in`` is used. Seeds fixed by every
    generator are skipped when others exist. From each seed the exact orbit is explored breadth first to ``max_depth`` with points merged
    within ``tol``. With ``power_steps``, each generator is then iterated that
    many times from the marked cells, which resolves orbits of rotation-like
    generators. Finally the cells are closed by mapping every run of at least
    ``run_length`` marked cells as an arc (``None`` skips this; runs can hide
    sub-cell gaps that the dynamics expands). The closures of different
    seeds are intersected after a one-cell dilation; disagreement of more than
    two cells is reported with a warning. Before ``power_steps``, the words in
    ``power_words`` (symbols of the iterated system, or maps equal to such
    compositions) are iterated
    ``word_steps`` times, and ``sweep_rounds`` pushes every marked cell centre
    through all generators that many times. With ``prune``, cells whose image
    under some generator misses the cover are then dropped (sound for a cover
    from above; skip it when the marks come from orbits alone).
    """
    from .random_dynamics import make_rng, random_orbit, trial_seeds

    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    n = _ncells(resolution)
    G = F if direction == "forward" else F.inverse()
    starts = attracting_points(G)
    # a point fixed by every generator is a minimal set of its own; prefer the other seeds
    moved = [x for x in starts if max(circle_distance(g.apply(x), x) for g in G.generators) > tol]
    starts = (moved or starts)[:seeds]
    if not starts:
        if G.probabilities is None:
            G = G.with_probabilities()
        for s in trial_seeds(rng_seed, seeds):
            x0 = float(make_rng(s).random())
            starts.append(float(random_orbit(G, x0, burn_in, s)[0, -1]))
    masks = []
    depth = 0
    for x0 in starts:
        m, d = _orbit_cells(G, [x0], n, max_depth, tol, max_points)
        if power_words and word_steps:
            maps = [w if isinstance(w, CircleMap) else compose_word(G, w) for w in power_words]
            m = _power_orbits(G, m, word_steps, maps=maps)
        if sweep_rounds:
            m = _sweep(G, m, sweep_rounds)
        if power_steps:
            m = _power_orbits(G, m, power_steps)
        if run_length:
            m, _ = _propagate_arcs(G, m, run_length, rounds=4 * n)
        masks.append(m)
        depth = max(depth, d)
    out = masks[0].copy()
    for m in masks[1:]:
        out &= dilate(m)
    if prune:
        out = prune_cover(G, out)
    worst = max(int(np.sum(m ^ out)) for m in masks)
    if worst > 2:
        warnings.warn(f"closures from different seeds disagree on {worst} cells", RuntimeWarning)
    return MinimalSetEstimate(direction, out, 1.0 / n, depth, len(starts), worst)


def closure_defect(F: Ifs, est: MinimalSetEstimate) -> float:
    """Fraction of (cell, generator) pairs whose image arc misses the one-cell dilation of the cover."""
    G = F if est.direction == "forward" else F.inverse()
    n = est.mask.size
    cells = est.cells()
    near = dilate(est.mask)
    bad = 0
    for g in G.generators:
        a = g.lift(cells / n)
        b = g.lift((cells + 1) / n)
        ca = np.floor(a * n).astype(np.int64)
        cb = np.floor(b * n).astype(np.int64)
        for lo, hi in zip(ca, cb):
            idx = np.mod(np.arange(lo, hi + 1), n)
            if not near[idx].any():
                bad += 1
    return bad / max(1, cells.size * G.s)


def symmetric_difference(A: MinimalSetEstimate, B: MinimalSetEstimate) -> float:
    """Measure of the symmetric difference, compared on the finer grid."""
    na, nb = A.mask.size, B.mask.size
    n = max(na, nb)
    a = np.repeat(A.mask, n // na)
    b = np.repeat(B.mask, n // nb)
    return float(np.mean(a ^ b))


# ---------------------------------------------------------------------------
# essential intersection


def essential_intersection(Mp: MinimalSetEstimate, Mm: MinimalSetEstimate, resolution: float | None = None,
                           window: int = 8, min_cells: int = 3) -> list:
    """Grid points approached from the same side by both covers.

    A grid point ``k/n`` qualifies when a cell adjacent to it lies in both
    covers and, within ``window`` cells on one side, each cover has at least
    ``min_cells`` cells. Runs of consecutive qualifying points are reported by
    their middle point; two full covers give ``[0.0]``.
    """
    if Mp.mask.size != Mm.mask.size:
        raise PrecisionError("estimates must share a resolution")
    a, b = Mp.mask, Mm.mask
    n = a.size
    if a.all() and b.all():
        return [0.0]
    both = a & b
    adjacent = both | np.roll(both, 1)  # cell k or cell k-1

    def count(mask, side):
        c = np.zeros(n, np.int64)
        for j in range(window):
            # right side: cells k..k+W-1, left side: cells k-W..k-1
            c += np.roll(mask, -j if side > 0 else j + 1)
        return c

    ok = np.zeros(n, bool)
    for side in (1, -1):
        ok |= (count(a, side) >= min_cells) & (count(b, side) >= min_cells)
    q = np.flatnonzero(ok & adjacent)
    if q.size == 0:
        return []
    runs = np.split(q, np.flatnonzero(np.diff(q) > 1) + 1)
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == n - 1:
        runs[0] = np.concatenate([runs[-1] - n, runs[0]])
        runs.pop()
    return sorted(float(np.mod(r[len(r) // 2], n) / n) for r in runs)


# ---------------------------------------------------------------------------
# Hutchinson certificate

SLOPE_GRID = 4096


@dataclass
class HutchinsonCertificate:
    I: Arc
    J: Arc
    words: list
    contraction_factors: list
    clearances: list
    covering_margin: float
    valid: bool = True

    @property
    def margin(self):
        """Robustness scale: the smallest of the three margins."""
        return float(min(1.0 - max(self.contraction_factors), min(self.clearances), self.covering_margin))

    def to_dict(self):
        return {
            "valid": True,
            "I": self.I.to_dict(),
            "J": self.J.to_dict(),
            "words": [str(w) for w in self.words],
            "contraction_factors": self.contraction_factors,
            "clearances": self.clearances,
            "covering_margin": self.covering_margin,
            "margin": self.margin,
        }


@dataclass
class HutchinsonFailure:
    condition: str
    witness: float | None = None
    word: Word | None = None
    valid: bool = False

    def to_dict(self):
        return {
            "valid": False,
            "condition": self.condition,
            "witness": self.witness,
            "word": None if self.word is None else str(self.word),
        }


def _offset(y, left):
    """Position of the lift value ``y`` relative to ``left`` in ``[0, 1)``, tolerating rounding below 0."""
    off = np.mod(y - left, 1.0)
    return np.where(off > 1.0 - 1e-12, off - 1.0, off)


def word_on_arc(g, I: Arc, J: Arc, n: int = SLOPE_GRID):
    """Max secant slope of ``g`` on ``I``, clearance of ``g(I)`` in ``I`` and ``g(J)`` relative to ``I.left``."""
    x = I.left + np.linspace(0.0, I.length, n + 1)
    y = g.lift(x)
    sec = np.diff(y) / np.diff(x)
    k = int(np.argmax(sec))
    lo = float(_offset(y[0], I.left))
    hi = lo + float(y[-1] - y[0])
    clearance = min(lo, I.length - hi)
    ja, jb = g.lift(J.left), g.lift(J.left + J.length)
    jl = float(_offset(ja, I.left))
    return float(sec[k]), float(x[k]), clearance, (jl, jl + float(jb - ja))


def cover_margin(intervals, lo: float, hi: float):
    """``min over x in [lo, hi]`` of the depth ``max_i min(x - l_i, r_i - x)``, with its minimizer.

    The depth is a maximum of tent functions, so its minimum is attained at an
    endpoint or where a falling side meets a rising side.
    """
    if not len(intervals):
        return -np.inf, lo
    iv = np.asarray(intervals, float)
    L, R = iv[:, 0], iv[:, 1]
    cand = np.concatenate([[lo, hi], (0.5 * (L[:, None] + R[None, :])).ravel()])
    cand = cand[(cand >= lo) & (cand <= hi)]
    depth = np.max(np.minimum(cand[:, None] - L[None, :], R[None, :] - cand[:, None]), axis=1)
    k = int(np.argmin(depth))
    return float(depth[k]), float(cand[k])


def hutchinson_certificate(F: Ifs, I: Arc, J: Arc, candidate_words, n: int = SLOPE_GRID):
    """Check that every ``g_w`` contracts ``I`` into itself and that the ``g_w(J)`` cover ``J``.

    Returns a ``HutchinsonCertificate`` or a ``HutchinsonFailure`` naming the
    first violated condition and a witness point.
    """
    from .circle import as_word

    jl = float(_offset(J.left, I.left))
    if jl + J.length > I.length + 1e-15 or I.length >= 1:
        return HutchinsonFailure("J not contained in I", float(J.left))
    words = [as_word(w) for w in candidate_words]
    if not words:
        return HutchinsonFailure("covering", float(J.midpoint))
    factors, clear, images = [], [], []
    for w in words:
        slope, x, c, img = word_on_arc(compose_word(F, w), I, J, n)
        if slope >= 1.0:
            return HutchinsonFailure("contraction", x, w)
        if c <= 0.0:
            return HutchinsonFailure("image in I", float(I.left), w)
        factors.append(slope)
        clear.append(c)
        images.append(img)
    margin, x = cover_margin(images, jl, jl + J.length)
    if margin <= 0.0:
        return HutchinsonFailure("covering", float(normalize(I.left + x)))
    return HutchinsonCertificate(I, J, words, factors, clear, margin)


def rotation_family_words(F: Ifs, rotation_index: int, map_index: int, J: Arc,
                          n_max: int = 4000, overlap: float = 0.25) -> list:
    """Words ``R^n f`` whose images ``R^n f(J)`` cover ``J``, chosen greedily.

    The images are translates of ``f(J)`` along the ``R``-orbit, so candidate
    positions come from iterating the two endpoints. Consecutive chosen images
    overlap by at least ``overlap`` times their width. Returns ``[]`` when no
    cover exists within ``n_max`` rotations.
    """
    R, f = F[rotation_index], F[map_index]
    u = np.array([f.lift(J.left)], float)
    v = np.array([f.lift(J.left + J.length)], float)
    lo = np.empty(n_max + 1)
    hi = np.empty(n_max + 1)
    for k in range(n_max + 1):
        # offsets from J.left taken in [-1/2, 1/2)
        lo[k] = np.mod(u[0] - J.left + 0.5, 1.0) - 0.5
        hi[k] = lo[k] + (v[0] - u[0])
        u, v = R.lift(u), R.lift(v)
    chosen, reach = [], 0.0
    idx = np.arange(n_max + 1)
    while reach < J.length:
        need = reach - overlap * (hi[idx] - lo[idx])
        cand = idx[(lo[idx] <= need) & (hi[idx] > reach)]
        if cand.size == 0:
            return []
        k = int(cand[np.argmax(hi[cand])])
        chosen.append(k)
        reach = hi[k]
    return [Word((map_index,) + (rotation_index,) * k, F.s) for k in chosen]


# ---------------------------------------------------------------------------
# robust minimality for a rotation and a map with a hyperbolic attractor


@dataclass
class RobustMinimalityReport:
    verdict: str
    reason: str | None = None
    rotation_number: float | None = None
    attractor: float | None = None
    attractor_slope: float | None = None
    certificate: object = None
    rotation_steps: list = field(default_factory=list)
    rotation_cover_margin: float | None = None
    inverse_cover_margin: float | None = None
    delta: float | None = None
    translated_valid: bool | None = None

    @property
    def margins(self):
        c = self.certificate
        if not isinstance(c, HutchinsonCertificate):
            return {}
        return {
            "contraction": 1.0 - max(c.contraction_factors),
            "clearance": min(c.clearances),
            "covering": c.covering_margin,
            "rotation_cover": self.rotation_cover_margin,
            "inverse_cover": self.inverse_cover_margin,
        }

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "rotation_number": self.rotation_number,
            "attractor": self.attractor,
            "attractor_slope": self.attractor_slope,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "rotation_steps": self.rotation_steps,
            "margins": self.margins,
            "delta": self.delta,
            "translated_valid": self.translated_valid,
        }


def near_rational(rho: float, err: float, q_max: int = 20):
    """A fraction ``p/q`` (``q <= q_max``) within ``2 * err`` of ``rho``, or ``None``."""
    for q in range(1, q_max + 1):
        p = round(rho * q)
        if abs(rho - p / q) <= 2 * err:
            return p, q
    return None


def _rotation_cover(R, J: Arc, steps, inverse=False):
    """Covering margin of ``S^1`` by ``R^m(J)`` (or ``R^{-m}(J)``), ``m`` in ``steps``."""
    iv = []
    for m in steps:
        a, b = J.left, J.left + J.length
        for _ in range(m):
            a, b = (R.inverse_lift(a), R.inverse_lift(b)) if inverse else (R.lift(a), R.lift(b))
        a0 = float(np.mod(a, 1.0))
        iv.extend([(a0 + s, a0 + s + float(b - a)) for s in (-1.0, 0.0, 1.0)])
    return cover_margin(iv, 0.0, 1.0)[0]


def _select_words(F: Ifs, I: Arc, J: Arc, cands, shifted):
    """Greedy cover of ``J`` by candidate images, each image taken as its worst case over ``shifted`` systems."""
    arcs, keep = [], []
    for w in cands:
        worst = None
        ok = True
        for G in shifted:
            slope, _, c, (l, r) = word_on_arc(compose_word(G, w), I, J, 1024)
            if slope >= 0.98 or c <= 0:
                ok = False
                break
            worst = (l, r, c) if worst is None else (max(worst[0], l), min(worst[1], r), min(worst[2], c))
        if ok and worst[1] > worst[0]:
            arcs.append(worst)
            keep.append(w)
    if not arcs:
        return [], -np.inf
    jl = float(_offset(J.left, I.left))
    jr = jl + J.length
    A = np.array(arcs)

    def greedy(mu):
        lo = A[:, 0] + mu
        hi = A[:, 1] - mu
        use = (hi > lo) & (A[:, 2] > mu)
        cur, chosen = jl, []
        while cur < jr:
            reach = np.where(use & (lo <= cur), hi, -np.inf)
            k = int(np.argmax(reach))
            if reach[k] <= cur:
                return None
            chosen.append(k)
            cur = reach[k]
        return chosen

    lo_mu, hi_mu = 0.0, 0.5 * J.length
    best = greedy(0.0)
    if best is None:
        return [], -np.inf
    for _ in range(40):
        mid = 0.5 * (lo_mu + hi_mu)
        c = greedy(mid)
        if c is None:
            hi_mu = mid
        else:
            lo_mu, best = mid, c
    return [keep[k] for k in best], lo_mu


def contraction_arc(f, x0: float, kappa: float = 0.9, n: int = SLOPE_GRID) -> Arc:
    """Largest grid arc around ``x0`` on which the secant slope of ``f`` stays below ``kappa``."""
    x = np.arange(n + 1) / n
    ok = np.diff(f.lift(x)) * n < kappa
    if ok.all():
        raise PrecisionError("slope below kappa on the whole circle")
    k = int(_cell_of([x0], n)[0])
    if not ok[k]:
        raise PrecisionError("slope at the attractor is not below kappa")
    lo = hi = k
    while ok[(lo - 1) % n] and hi - lo < n - 2:
        lo -= 1
    while ok[(hi + 1) % n] and hi - lo < n - 2:
        hi += 1
    # drop one cell at each end so the arc sits strictly inside
    return Arc(normalize((lo + 1) / n), (hi - lo - 1) / n)


SETTINGS = ((0.2, 0.02), (0.9, 0.035), (0.4, 0.025), (0.3, 0.02), (0.6, 0.03))


def robust_minimality_check(F: Ifs, rotation_index: int, ns_index: int, n: int = 10_000,
                            settings=SETTINGS, max_shift: int = 80, max_pre: int = 100,
                            max_steps: int = 200, delta: float = 1e-4,
                            I: Arc | None = None, J: Arc | None = None) -> RobustMinimalityReport:
    """Certificate of robust forward minimality from words ``R^a f R^b`` (1-based generator indices).

    ``R`` is the generator at ``rotation_index`` and ``f`` the one at
    ``ns_index``. For each ``(kappa, u)`` in ``settings``, ``I`` is the largest
    arc around the strongest attractor of ``f`` on which ``f`` has slope below
    ``kappa`` and ``J`` is ``I`` shrunk by ``u`` at both ends. Pre-rotations
    ``R^b`` are those keeping ``f R^b`` contracting on ``I``. Words are picked
    so that the certificate also holds for the systems translated by
    ``+delta`` and ``-delta``; the first setting that works is reported. The
    rotation steps ``m_j`` are the first ones for which ``R^{m_j}(J)`` and
    ``R^{-m_j}(J)`` both cover the circle.
    """
    from .circle import fd_derivative
    from .errors import NoFixedPointsError
    from .families import translate_ifs
    from .morse_smale import fixed_points
    from .rotation import translation_number

    r, f = rotation_index, ns_index
    R, g = F[r], F[f]
    est = translation_number(R, n)
    rep = RobustMinimalityReport("precondition failed", rotation_number=est.value, delta=delta)
    pq = near_rational(est.value, est.error_bound)
    if pq is not None:
        rep.reason = f"rotation number within {2 * est.error_bound:g} of {pq[0]}/{pq[1]}"
        return rep
    try:
        att = fixed_points(g, 1 / 1024).attractors
    except NoFixedPointsError:
        att = []
    if not att:
        rep.reason = "no attracting fixed point"
        return rep
    a = min(att, key=lambda p: p.multiplier).x
    slope = float(fd_derivative(g.lift, a, 1e-6))
    rep.attractor, rep.attractor_slope = a, slope
    if slope >= 0.95:
        rep.reason = f"attractor slope {slope:.3g} is not below 0.95"
        return rep
    rep.verdict = "inconclusive"
    shifted = [F, translate_ifs(F, delta), translate_ifs(F, -delta)] if delta else [F]
    if I is not None and J is not None:
        pairs = [(I, J)]
    else:
        pairs = []
        for kappa, u in settings:
            try:
                I0 = contraction_arc(g, a, kappa)
            except PrecisionError:
                continue
            if I0.length > 2 * u:
                pairs.append((I0, Arc(normalize(I0.left + u), I0.length - 2 * u)))
    for I, J in pairs:
        pre = [b for b in range(max_pre + 1)
               if word_on_arc(compose_word(F, Word((r,) * b + (f,), F.s)), I, J, 256)[0] < 0.98]
        cands = [Word((r,) * b + (f,) + (r,) * s, F.s) for b in pre for s in range(max_shift + 1)]
        words, mu = _select_words(F, I, J, cands, shifted)
        if not words:
            continue
        cert = hutchinson_certificate(F, I, J, words)
        if not cert.valid:
            continue
        rep.certificate = cert
        if delta:
            rep.translated_valid = all(hutchinson_certificate(G, I, J, words).valid for G in shifted[1:])
        for M in range(max_steps + 1):
            steps = list(range(M + 1))
            fwd = _rotation_cover(R, J, steps)
            if fwd > 0:
                inv = _rotation_cover(R, J, steps, inverse=True)
                if inv > 0:
                    rep.rotation_steps = steps
                    rep.rotation_cover_margin, rep.inverse_cover_margin = fwd, inv
                    break
        if rep.rotation_steps:
            rep.verdict = "robustly minimal"
            rep.reason = None
        else:
            rep.reason = f"no rotation cover within {max_steps} steps"
        return rep
    rep.reason = "no covering family of words found"
    return rep
