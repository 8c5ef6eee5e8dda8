"""Translation numbers, gap-word search, and crossing search under uniform lift translation."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .circle import Ifs, Word, as_word, check_alphabet, CircleMap
from .errors import InconsistencyError, PrecisionError


@dataclass(frozen=True)
class TranslationEstimate:
    value: float
    error_bound: float
    iterations: int

    def to_dict(self):
        return {"value": self.value, "error_bound": self.error_bound, "iterations": self.iterations}


def translation_number(f: CircleMap, n: int = 100_000, t0: float = 0.0) -> TranslationEstimate:
    """``f~^n(t0)/n`` with the standard bound ``|value - rho| <= 1/n``."""
    if n < 1:
        raise PrecisionError("n must be at least 1")
    t = np.array([float(t0)])
    lift = f._lift
    for _ in range(n):
        t = lift(t)
    return TranslationEstimate(float((t[0] - t0) / n), 1.0 / n, int(n))


def _word_orbit_end(F: Ifs, w: Word, deltas, n):
    """``((F + delta)_w)^n (0)`` for a vector of deltas, threading all lifts at once."""
    maps = [F[c] for c in w]
    t = np.zeros_like(deltas)
    for _ in range(n):
        for m in maps:
            t = m._lift(t) + deltas
    return t


def translated_word_rho(F: Ifs, w, deltas, n: int = 100_000):
    """Translation-number estimates of ``(F + delta)_w`` for each delta (error bound ``1/n``)."""
    w = as_word(w)
    check_alphabet(w.symbols, F.s)
    if len(w) == 0:
        return np.zeros(np.shape(deltas))
    d = np.atleast_1d(np.asarray(deltas, float))
    return _word_orbit_end(F, w, d, n) / n


# ---------------------------------------------------------------------------
# gap search


@dataclass(frozen=True)
class GapWitness:
    word: Word
    lower: float
    upper: float
    epsilon: float

    @property
    def spread(self):
        return self.upper - self.lower

    def to_dict(self):
        return {"word": str(self.word), "lower": self.lower, "upper": self.upper,
                "spread": self.spread, "epsilon": self.epsilon}


def eps_interval(F: Ifs, w, epsilon, t0=0.0):
    """``((f~ - eps)_w(t0), (f~ + eps)_w(t0))`` by direct evaluation."""
    w = as_word(w)
    check_alphabet(w.symbols, F.s)
    lo = hi = float(t0)
    for c in w:
        lo = F[c].lift(lo) - epsilon
        hi = F[c].lift(hi) + epsilon
    return lo, hi


def verify_gap(F: Ifs, witness: GapWitness, tol=1e-9) -> bool:
    lo, hi = eps_interval(F, witness.word, witness.epsilon)
    return abs(lo - witness.lower) <= tol and abs(hi - witness.upper) <= tol and hi > lo + 1


@dataclass(frozen=True)
class GapSearchResult:
    found: bool
    witness: GapWitness | None
    best_spread: float
    lengths_explored: int

    def to_dict(self):
        return {
            "found": self.found,
            "witness": self.witness.to_dict() if self.witness else None,
            "best_spread": self.best_spread,
            "lengths_explored": self.lengths_explored,
        }


def gap_word_search(F: Ifs, epsilon: float, max_len: int = 200, beam: int = 64) -> GapSearchResult:
    """Beam search for a word ``v`` with ``(f~+eps)_v(0) > (f~-eps)_v(0) + 1``.

    States are pairs ``(lower, upper)``; each length keeps the ``beam`` widest.
    A not-found result is not a proof that no such word exists.
    """
    if epsilon <= 0:
        raise PrecisionError("epsilon must be positive")
    s = F.s
    lower = np.zeros(1)
    upper = np.zeros(1)
    words = [()]
    best = 0.0
    for length in range(1, max_len + 1):
        lo = np.stack([F[i]._lift(lower) for i in range(1, s + 1)], axis=1) - epsilon
        hi = np.stack([F[i]._lift(upper) for i in range(1, s + 1)], axis=1) + epsilon
        width = (hi - lo).ravel()
        # deterministic ranking: width descending, then insertion order
        order = np.lexsort((np.arange(width.size), -width))
        keep = []
        seen = set()
        for k in order:
            key = (round(float(lo.ravel()[k]) % 1.0, 12), round(float(width[k]), 12))
            if key in seen:
                continue
            seen.add(key)
            keep.append(k)
            if len(keep) >= beam:
                break
        keep = np.array(keep)
        parents, syms = np.divmod(keep, s)
        lower = lo.ravel()[keep]
        upper = hi.ravel()[keep]
        words = [words[p] + (c + 1,) for p, c in zip(parents, syms)]
        best = max(best, float(width[keep[0]]))
        if width[keep[0]] > 1.0:
            w = Word(words[0], s)
            lo0, hi0 = eps_interval(F, w, epsilon)
            witness = GapWitness(w, lo0, hi0, float(epsilon))
            if not hi0 > lo0 + 1:
                raise InconsistencyError("gap witness failed re-evaluation")
            return GapSearchResult(True, witness, best, length)
    return GapSearchResult(False, None, best, max_len)


# ---------------------------------------------------------------------------
# crossing search


@dataclass(frozen=True)
class CrossingResult:
    crossed: bool
    lo: float | None
    hi: float | None
    rho_lo: float | None
    rho_hi: float | None
    target: float
    iterations: int

    @property
    def midpoint(self):
        return 0.5 * (self.lo + self.hi)

    def to_dict(self):
        return {
            "crossed": self.crossed,
            "delta_interval": [self.lo, self.hi] if self.crossed else None,
            "rho_lo": self.rho_lo,
            "rho_hi": self.rho_hi,
            "target": self.target,
            "iterations": self.iterations,
        }


def _as_target(target):
    if isinstance(target, str):
        return float(Fraction(target))
    return float(target)


def rho_crossing_search(F: Ifs, w, target, delta_range, n: int = 10_000,
                        width: float = 1e-10, probes: int = 64) -> CrossingResult:
    """Locate ``delta`` where the translation number of ``(F + delta)_w`` crosses ``target``.

    The translation number is non-decreasing in ``delta``, so the predicate
    ``rho >= target`` is monotone. Each round evaluates ``probes`` interior
    points at once (a vectorized multisection) until the bracket is narrower
    than ``width``.
    """
    w = as_word(w)
    check_alphabet(w.symbols, F.s)
    target = _as_target(target)
    a, b = float(delta_range[0]), float(delta_range[1])
    if not a < b:
        raise PrecisionError("delta_range must be increasing")
    err = 1.0 / n
    ends = translated_word_rho(F, w, [a, b], n)
    ra, rb = float(ends[0]), float(ends[1])
    if not (ra + err < target < rb - err):
        return CrossingResult(False, None, None, ra, rb, target, n)
    lo, hi, rlo, rhi = a, b, ra, rb
    while hi - lo >= width:
        d = np.linspace(lo, hi, probes + 2)[1:-1]
        r = translated_word_rho(F, w, d, n)
        above = r >= target
        k = int(np.argmax(above)) if above.any() else probes
        if k < probes:
            hi, rhi = float(d[k]), float(r[k])
        if k > 0:
            lo, rlo = float(d[k - 1]), float(r[k - 1])
    return CrossingResult(True, lo, hi, rlo, rhi, target, n)


# ---------------------------------------------------------------------------
# growth of the random intervals I_{omega,n}


def measure_growth_diagnostic(F: Ifs, epsilon: float, trials: int, horizon: int, rng_seed=0,
                              mu=None, stationary_n: int = 100_000):
    """Monte-Carlo mean of the lifted ``mu_-``-mass of ``I_{omega,n}``, ``n = 0..horizon``.

    ``mu`` defaults to a backward-stationary estimate (forward stationary for the inverse IFS).
    """
    from .random_dynamics import empirical_stationary, sample_words

    if F.probabilities is None:
        F = F.with_probabilities()
    if mu is None:
        mu = empirical_stationary(F.inverse(), 0.0, stationary_n, None, rng_seed)
    words = sample_words(F.s, F.probs, horizon, trials, rng_seed)
    lower = np.zeros(trials)
    upper = np.zeros(trials)
    series = np.zeros(horizon + 1)
    gens = F.generators
    for n in range(horizon):
        syms = words[:, n]
        for i, g in enumerate(gens):
            sel = syms == i
            if sel.any():
                lower[sel] = g._lift(lower[sel]) - epsilon
                upper[sel] = g._lift(upper[sel]) + epsilon
        series[n + 1] = float(np.mean(mu.lifted_cdf(upper) - mu.lifted_cdf(lower)))
    return series
