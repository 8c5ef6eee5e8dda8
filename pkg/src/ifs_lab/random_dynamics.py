"""Random iteration: words, empirical stationary measures, synchronization, and the repeller count d.

RNG: numpy ``Generator(PCG64(seed))``. Per-trial streams come from
``SeedSequence(seed).spawn(trials)``, so results are reproducible across
platforms and independent of how trials are scheduled.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .circle import Ifs, Word, check_probabilities, circle_distance, normalize
from .errors import MeasureError, PrecisionError


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def trial_seeds(seed, trials):
    """Independent child seed sequences, one per trial (documented split function)."""
    return np.random.SeedSequence(seed).spawn(trials)


def sample_word(s: int, probabilities, n: int, rng_seed=0) -> Word:
    """``n`` i.i.d. symbols in ``1..s`` with the given probabilities."""
    p = np.asarray(probabilities, float)
    check_probabilities(tuple(p), s)
    syms = make_rng(rng_seed).choice(s, size=n, p=p) + 1
    return Word(tuple(int(c) for c in syms), s)


def sample_words(s: int, probabilities, n: int, trials: int, rng_seed=0) -> np.ndarray:
    """``trials x n`` array of 0-based symbols, one row per trial stream."""
    p = np.asarray(probabilities, float)
    check_probabilities(tuple(p), s)
    rows = [make_rng(ss).choice(s, size=n, p=p) for ss in trial_seeds(rng_seed, trials)]
    return np.array(rows, dtype=int).reshape(trials, n)


# ---------------------------------------------------------------------------
# empirical measures


class EmpiricalMeasure:
    """Finite atomic probability measure on the circle with CDF queries.

    ``cdf(x)`` is the mass of ``[0, x]``; ``lifted_cdf(t) = floor(t) + cdf(frac t)``.
    """

    def __init__(self, points, weights=None):
        pts = normalize(np.atleast_1d(np.asarray(points, float)))
        if pts.size == 0:
            raise MeasureError("empty measure")
        w = np.full(pts.size, 1.0 / pts.size) if weights is None else np.asarray(weights, float)
        if w.shape != pts.shape or np.any(w <= 0):
            raise MeasureError("weights must be positive, one per point")
        if abs(w.sum() - 1.0) > 1e-9:
            raise MeasureError(f"weights sum to {w.sum()!r}, expected 1")
        w = w / w.sum()
        order = np.argsort(pts, kind="stable")
        pts, w = pts[order], w[order]
        uniq, inv = np.unique(pts, return_inverse=True)
        self.points = uniq
        self.weights = np.bincount(inv, weights=w)
        self.cum = np.cumsum(self.weights)

    def __len__(self):
        return self.points.size

    @classmethod
    def uniform_grid(cls, n):
        return cls((np.arange(n) + 0.5) / n)

    def cdf(self, x):
        x = np.asarray(x, float)
        k = np.searchsorted(self.points, x, side="right")
        out = np.where(k > 0, self.cum[np.maximum(k - 1, 0)], 0.0)
        return float(out) if np.ndim(x) == 0 else out

    def lifted_cdf(self, t):
        t = np.asarray(t, float)
        k = np.floor(t)
        return k + self.cdf(t - k)

    def mass(self, left, length):
        """Mass of the closed arc ``[left, left + length]``."""
        a = float(left)
        return float(self.lifted_cdf(a + length) - self.lifted_cdf(np.nextafter(a, -np.inf)))

    def max_ball_mass(self, radius):
        """Largest mass of a closed arc of length ``2 radius`` centred on an atom."""
        return float(max(self.mass(p - radius, 2 * radius) for p in self.points))

    def pushforward(self, f):
        return EmpiricalMeasure(f.apply(self.points), self.weights)

    def interp_cdf(self):
        """Continuous increasing CDF through the atom midpoints of each jump, linear in between."""
        x = self.points
        y = self.cum - 0.5 * self.weights
        return x, y

    def histogram(self, bins=256):
        h, edges = np.histogram(self.points, bins=bins, range=(0.0, 1.0), weights=self.weights)
        return {"edges": edges.tolist(), "mass": h.tolist()}

    def to_csv(self):
        lines = ["point,weight"] + [f"{p!r},{w!r}" for p, w in zip(self.points, self.weights)]
        return "\n".join(lines) + "\n"


def mixture(measures, coeffs) -> EmpiricalMeasure:
    pts = np.concatenate([m.points for m in measures])
    w = np.concatenate([c * m.weights for m, c in zip(measures, coeffs)])
    return EmpiricalMeasure(pts, w / w.sum())


def circle_w1(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """Wasserstein-1 distance on the circle: ``min_c int_0^1 |F_mu - F_nu - c| dx``.

    The optimal ``c`` is a length-weighted median of ``F_mu - F_nu``.
    """
    xs = np.unique(np.concatenate([[0.0], mu.points, nu.points, [1.0]]))
    lengths = np.diff(xs)
    D = mu.cdf(xs[:-1]) - nu.cdf(xs[:-1])
    keep = lengths > 0
    D, lengths = D[keep], lengths[keep]
    order = np.argsort(D)
    cw = np.cumsum(lengths[order])
    c = D[order][np.searchsorted(cw, 0.5 * cw[-1])]
    return float(np.sum(lengths * np.abs(D - c)))


# ---------------------------------------------------------------------------
# stationary measures


def random_orbit(F: Ifs, x0, n: int, rng_seed=0, chains: int = 1):
    """Points ``f_{omega,k}(x0)``, ``k = 1..n``, for ``chains`` independent streams (shape ``chains x n``)."""
    if F.probabilities is None:
        F = F.with_probabilities()
    out = np.empty((chains, n))
    seeds = trial_seeds(rng_seed, chains) if chains > 1 else [rng_seed]
    syms = np.array([make_rng(s).choice(F.s, size=n, p=F.probs) for s in seeds])
    t = np.full(chains, normalize(float(x0)))
    gens = F.generators
    for k in range(n):
        col = syms[:, k]
        if chains == 1:
            t = normalize(gens[col[0]]._lift(t))
        else:
            for i, g in enumerate(gens):
                sel = col == i
                if sel.any():
                    t[sel] = normalize(g._lift(t[sel]))
        out[:, k] = t
    return out


def empirical_stationary(F: Ifs, x0=0.0, N: int = 100_000, burn_in=None, rng_seed=0,
                         chains: int = 1) -> EmpiricalMeasure:
    """Birkhoff average of point masses along a random orbit after ``burn_in`` steps (default ``N/10``).

    With ``chains > 1`` the ``N`` steps are split evenly over independent orbits.
    """
    if burn_in is None:
        burn_in = N // 10
    if N <= burn_in:
        raise PrecisionError("N must exceed burn_in")
    per = N // chains
    b = burn_in // chains
    orb = random_orbit(F, x0, per, rng_seed, chains)
    return EmpiricalMeasure(orb[:, b:].ravel())


def backward_stationary(F: Ifs, x0=0.0, N: int = 100_000, burn_in=None, rng_seed=0, chains=1):
    """Forward stationary estimate for the inverse IFS (same probabilities)."""
    return empirical_stationary(F.inverse(), x0, N, burn_in, rng_seed, chains)


def stationarity_residual(F: Ifs, mu: EmpiricalMeasure) -> float:
    """``W1(mu, sum_i p_i (f_i)_* mu)`` on the circle."""
    if F.probabilities is None:
        F = F.with_probabilities()
    pts = np.concatenate([g.apply(mu.points) for g in F.generators])
    w = np.concatenate([p * mu.weights for p in F.probs])
    return circle_w1(mu, EmpiricalMeasure(pts, w / w.sum()))


# ---------------------------------------------------------------------------
# synchronization


def drive(F: Ifs, x, syms) -> np.ndarray:
    """Apply the common random word ``syms`` (0-based) to the lifted points ``x``."""
    t = np.asarray(x, float).copy()
    gens = F.generators
    for c in syms:
        t = gens[c]._lift(t)
    return t


def clusters(points, tol):
    """Sizes of groups of circle points chained by gaps ``<= tol``."""
    p = np.sort(normalize(np.asarray(points, float)))
    gaps = np.diff(np.append(p, p[0] + 1.0))
    breaks = np.flatnonzero(gaps > tol)
    if breaks.size == 0:
        return [p.size]
    sizes = np.diff(np.append(breaks, breaks[0] + p.size))
    return sorted(int(v) for v in sizes)


@dataclass
class SyncStats:
    collapse_fraction: list
    cluster_counts: list
    spread: list
    n: int
    tol: float

    @property
    def mean_collapse(self):
        return float(np.mean(self.collapse_fraction))

    def to_dict(self):
        return {
            "collapse_fraction": self.collapse_fraction,
            "mean_collapse": self.mean_collapse,
            "cluster_counts": self.cluster_counts,
            "spread": self.spread,
            "n": self.n,
            "tol": self.tol,
        }


def synchronization_test(F: Ifs, cloud_size: int = 64, n: int = 1000, trials: int = 10,
                         rng_seed=0, tol: float = 1e-6) -> SyncStats:
    """Drive an equispaced cloud by one common random word per trial.

    Reports the fraction of point pairs closer than ``tol``, the number of
    clusters (gaps ``> tol``), and the spread (length of the smallest arc
    holding all points).
    """
    if cloud_size < 2:
        raise PrecisionError("cloud_size must be at least 2")
    if F.probabilities is None:
        F = F.with_probabilities()
    x0 = np.arange(cloud_size) / cloud_size
    words = sample_words(F.s, F.probs, n, trials, rng_seed)
    frac, counts, spread = [], [], []
    iu = np.triu_indices(cloud_size, 1)
    for row in words:
        y = normalize(drive(F, x0, row))
        d = circle_distance(y[:, None], y[None, :])[iu]
        frac.append(float(np.mean(d < tol)))
        counts.append(len(clusters(y, tol)))
        p = np.sort(y)
        gaps = np.diff(np.append(p, p[0] + 1.0))
        spread.append(float(1.0 - gaps.max()))
    return SyncStats(frac, counts, spread, n, tol)


# ---------------------------------------------------------------------------
# repeller count d


def _runs(mask):
    """Maximal cyclic runs of True as ``(start, length)``; ``None`` if all True."""
    m = np.asarray(mask, bool)
    P = m.size
    if m.all():
        return None
    if not m.any():
        return []
    start = int(np.argmin(m))  # a False position; scan cyclically from there
    runs = []
    k = 0
    while k < P:
        i = (start + k) % P
        if m[i]:
            L = 0
            while k < P and m[(start + k) % P]:
                L += 1
                k += 1
            runs.append((i, L))
        else:
            k += 1
    return runs


def word_lift(F: Ifs, syms, t):
    """Lift of ``f_w`` (``syms`` 0-based, first symbol applied first)."""
    return drive(F, t, syms)


def repellers_of_word(F: Ifs, syms, partition_size=2048, contraction_tol=None,
                      ratio=0.5, refine=True):
    """Repeller estimates of ``f_w``: one point per maximal run of non-contracted partition arcs.

    An arc is contracted when its image is shorter than both ``contraction_tol``
    and ``ratio`` times its own length. Inside each run the point whose image is
    the midpoint of the run's image is located by two 256-point zoom passes.
    Returns ``None`` when no arc is contracted (the count is undefined).
    """
    P = int(partition_size)
    tol = 4.0 / P if contraction_tol is None else contraction_tol
    e = np.arange(P + 1) / P
    L = word_lift(F, syms, e)
    img = np.diff(L)
    contracted = (img < tol) & (img < ratio / P)
    runs = _runs(~contracted)
    if runs is None:
        return None
    a = np.array([st / P for st, _ in runs])
    b = np.array([(st + ln) / P for st, ln in runs])
    if refine:
        ends = word_lift(F, syms, np.concatenate([a, b]))
        target = 0.5 * (ends[: a.size] + ends[a.size :])
        K = 256
        for _ in range(2):
            xs = a[:, None] + (b - a)[:, None] * np.linspace(0.0, 1.0, K + 1)[None, :]
            Ls = word_lift(F, syms, xs.ravel()).reshape(xs.shape)
            k = np.clip((Ls < target[:, None]).sum(axis=1) - 1, 0, K - 1)
            rows = np.arange(a.size)
            a, b = xs[rows, k], xs[rows, k + 1]
    pts = [normalize(float(v)) for v in 0.5 * (a + b)]
    return sorted(pts)


@dataclass
class SyncReport:
    d_estimate: int | None
    conclusive: bool
    histogram: dict
    repeller_samples: list = field(repr=False)
    partition_size: int = 0
    n: int = 0
    contraction_curve: list = field(default_factory=list)

    @property
    def agreement(self):
        total = sum(self.histogram.values())
        if not total or self.d_estimate is None:
            return 0.0
        return self.histogram.get(self.d_estimate, 0) / total

    def to_dict(self):
        return {
            "d_estimate": self.d_estimate,
            "conclusive": self.conclusive,
            "agreement": self.agreement,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items(), key=lambda kv: str(kv[0]))},
            "repeller_samples": self.repeller_samples,
            "partition_size": self.partition_size,
            "n": self.n,
            "contraction_curve": self.contraction_curve,
        }


def estimate_d(F: Ifs, partition_size: int = 2048, n: int = 2000, trials: int = 50,
               contraction_tol=None, rng_seed=0, majority: float = 0.5, refine=True) -> SyncReport:
    """Mode over sampled words of the number of non-contracted runs of ``f_{omega,n}``.

    The contraction curve lists, for ``n`` in a doubling sequence, the mean
    total image length of the contracted arcs, averaged over trials.
    """
    if F.probabilities is None:
        F = F.with_probabilities()
    words = sample_words(F.s, F.probs, n, trials, rng_seed)
    hist = Counter()
    samples = []
    for row in words:
        r = repellers_of_word(F, row, partition_size, contraction_tol, refine=refine)
        d = None if r is None else len(r)
        hist[d] += 1
        samples.append(r)
    mode, count = max(hist.items(), key=lambda kv: (kv[1], -1 if kv[0] is None else -kv[0]))
    conclusive = mode is not None and mode >= 1 and count > majority * trials
    keep = [r for r in samples if r is not None and len(r) == mode] if conclusive else []
    curve = _contraction_curve(F, words[: min(trials, 8)], partition_size, n)
    return SyncReport(mode if conclusive else None, conclusive, dict(hist), keep,
                      int(partition_size), int(n), curve)


def _contraction_curve(F, words, P, n):
    e = np.arange(P + 1) / P
    out = []
    m = 1
    while m <= n:
        vals = []
        for row in words:
            img = np.diff(word_lift(F, row[:m], e))
            vals.append(float(np.sort(img)[: max(1, P - P // 16)].sum()))
        out.append({"n": m, "mean_mass_outside_top_arcs": float(np.mean(vals))})
        m *= 4
    return out


def hausdorff(A, B) -> float:
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    if A.size == 0 or B.size == 0:
        return float("inf") if A.size != B.size else 0.0
    d = circle_distance(A[:, None], B[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def repeller_pushforward_check(F: Ifs, omega, partition_size=2048, repellers=None,
                               shifted_repellers=None) -> float:
    """Hausdorff distance between ``f_{omega_0}(R(omega))`` and ``R(sigma omega)``.

    ``omega`` is a 0-based symbol array (or a Word); repellers are estimated
    from ``f_{omega,n}`` and ``f_{sigma omega, n-1}`` when not supplied.
    """
    syms = np.asarray(omega.symbols if isinstance(omega, Word) else omega, int)
    if isinstance(omega, Word):
        syms = syms - 1
    R = repellers if repellers is not None else repellers_of_word(F, syms, partition_size)
    S = shifted_repellers if shifted_repellers is not None else repellers_of_word(F, syms[1:], partition_size)
    if R is None or S is None:
        return float("inf")
    pushed = F.generators[syms[0]].apply(np.asarray(R, float))
    return hausdorff(np.atleast_1d(pushed), S)


def averaged_repeller_measure(report: SyncReport) -> EmpiricalMeasure:
    pts = np.concatenate([np.asarray(r, float) for r in report.repeller_samples])
    return EmpiricalMeasure(pts)
