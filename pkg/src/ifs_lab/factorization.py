"""The 1/d measure-rotation of a stationary measure, commutation tests, and d-fold cover lifts."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circle import Arc, CircleMap, Ifs, circle_distance, grid, normalize
from .errors import AtomError, DegenerateError
from .families import PiecewiseLinearLift, Rotation


class CoverLift(CircleMap):
    """``t -> (L(d t) + k) / d``: a lift of ``base`` to the d-fold cover, commuting with ``t -> t + 1/d``."""

    kind = "cover-lift"

    def __init__(self, base: CircleMap, d: int, k: int = 0):
        super().__init__()
        self.base = base
        self.d = int(d)
        self.k = int(k)
        self.has_derivative = base.has_derivative

    def _lift(self, t):
        return (self.base._lift(self.d * np.asarray(t, float)) + self.k) / self.d

    def _inverse_lift(self, y):
        return self.base._inverse_lift(self.d * np.asarray(y, float) - self.k) / self.d

    def _derivative(self, t):
        return self.base._derivative(self.d * np.asarray(t, float))

    @property
    def inverse(self):
        return CoverLift(self.base.inverse, self.d, -self.k)

    def parameters(self):
        return {"d": self.d, "k": self.k}

    def children(self):
        return [self.base]


def lift_to_cover(F: Ifs, d: int, rotation_choice=None) -> Ifs:
    """Lift every generator to the d-fold cover; ``rotation_choice[i]`` picks the deck translate ``k_i/d``."""
    if d < 1:
        raise DegenerateError("d must be at least 1")
    if d == 1:
        return F
    ks = [0] * F.s if rotation_choice is None else list(rotation_choice)
    if len(ks) != F.s:
        raise DegenerateError("rotation_choice needs one entry per generator")
    gens = tuple(CoverLift(g, d, k) for g, k in zip(F.generators, ks))
    return Ifs(gens, F.probabilities, F.names)


def deck_rotation(d: int) -> Rotation:
    return Rotation(1.0 / d)


class MeasureRotation(CircleMap):
    """``T(x) = Phi^{-1}(Phi(x) + 1/d)`` with ``Phi`` the interpolated lifted CDF."""

    kind = "composite"

    def __init__(self, phi: PiecewiseLinearLift, d: int, cdf_gap: float):
        super().__init__()
        self.phi = phi
        self.d = int(d)
        self.cdf_gap = float(cdf_gap)

    def _lift(self, t):
        return self.phi._inverse_lift(self.phi._lift(t) + 1.0 / self.d)

    def _inverse_lift(self, y):
        return self.phi._inverse_lift(self.phi._lift(y) - 1.0 / self.d)

    def power(self, k):
        return MeasureRotationPower(self, k)

    def parameters(self):
        return {"d": self.d, "cdf_gap": self.cdf_gap, "atoms": int(self.phi.xs.size - 1)}


class MeasureRotationPower(CircleMap):
    kind = "composite"

    def __init__(self, T: MeasureRotation, k: int):
        super().__init__()
        self.T = T
        self.k = int(k)

    def _lift(self, t):
        return self.T.phi._inverse_lift(self.T.phi._lift(t) + self.k / self.T.d)


def measure_rotation(mu, d: int) -> MeasureRotation:
    """Rotation by ``1/d`` in the coordinate given by the CDF of ``mu``.

    The CDF is linearly interpolated through the midpoints of its jumps
    (``cum_j - w_j/2`` at atom ``x_j``), which makes it continuous and strictly
    increasing; ``cdf_gap`` reports the widest spacing between atoms.
    """
    if d < 2:
        raise DegenerateError("d must be at least 2")
    if mu.weights.max() >= 1.0 / d:
        raise AtomError(f"atom of weight {mu.weights.max():.4g} >= 1/d")
    x, y = mu.interp_cdf()
    if x.size < 2:
        raise AtomError("need at least two atoms")
    gaps = np.diff(np.append(x, x[0] + 1.0))
    phi = PiecewiseLinearLift(x, y)
    return MeasureRotation(phi, d, float(gaps.max()))


def commutation_residual(T: CircleMap, F: Ifs, sample, variant: str = "both") -> float:
    """Max circle distance between ``T f_j`` and ``f_j T`` (and/or the inverse-map variant) over the sample."""
    return float(np.max(commutation_profile(T, F, sample, variant)))


def commutation_profile(T: CircleMap, F: Ifs, sample, variant: str = "both") -> np.ndarray:
    """Pointwise residual (max over generators) at each sample point."""
    x = np.atleast_1d(np.asarray(sample, float))
    out = np.zeros(x.shape)
    for g in F.generators:
        if variant in ("forward", "both"):
            out = np.maximum(out, circle_distance(T.apply(g.apply(x)), g.apply(T.apply(x))))
        if variant in ("inverse", "both"):
            out = np.maximum(out, circle_distance(T.apply(g.inverse_apply(x)), g.inverse_apply(T.apply(x))))
    return out


def residual_by_arcs(profile_x, profile_v, arcs):
    """Max residual inside each arc."""
    out = []
    for a in arcs:
        m = a.contains(profile_x)
        out.append(float(profile_v[m].max()) if m.any() else 0.0)
    return out


def power_identity_error(T: CircleMap, d: int, n: int = 4096) -> float:
    """``max |T^d(x) - x - 1|`` on a grid (lift level)."""
    x = grid(n)
    y = x
    for _ in range(d):
        y = T._lift(y)
    return float(np.max(np.abs(y - x - 1.0)))


@dataclass
class FactorizationReport:
    verdict: str
    d: int | None
    T: CircleMap | None = field(default=None, repr=False)
    residual_minus: float | None = None
    residual_full: float | None = None
    power_error: float | None = None
    cdf_gap: float | None = None
    residual_profile: list = field(default_factory=list)
    sync: object = field(default=None, repr=False)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "d": self.d,
            "residual_max": self.residual_full,
            "residual_on_minus_sample": self.residual_minus,
            "power_error": self.power_error,
            "cdf_gap": self.cdf_gap,
            "residual_profile": [
                {"arc": a.to_dict(), "value": v} for a, v in self.residual_profile
            ],
        }


def factorization_report(F: Ifs, partition_size=2048, n=2000, trials=50, N=100_000,
                         sample_size=2000, residual_tol=0.02, profile_arcs=None,
                         variant="forward", rng_seed=0, d=None, T=None) -> FactorizationReport:
    """estimate_d, then ``T`` from the forward stationary estimate, then commutation residuals.

    Residuals are measured on a sample of the backward stationary estimate and
    on a uniform grid; the full-grid residual is also reported arc by arc.
    Pass ``d`` to skip the estimation step, and ``T`` to test a given map
    instead of the one built from the stationary measure.
    """
    from .random_dynamics import backward_stationary, empirical_stationary, estimate_d

    if F.probabilities is None:
        F = F.with_probabilities()
    sync = None
    if d is None:
        sync = estimate_d(F, partition_size, n, trials, rng_seed=rng_seed)
        if not sync.conclusive:
            return FactorizationReport("inconclusive", None, sync=sync)
        d = sync.d_estimate
    if d == 1:
        return FactorizationReport("globally synchronizing", 1, sync=sync)
    if T is None:
        T = measure_rotation(empirical_stationary(F, 0.0, N, None, rng_seed), d)
    mu_minus = backward_stationary(F, 0.0, N, None, rng_seed + 1)
    rng = np.random.Generator(np.random.PCG64(rng_seed + 2))
    minus_sample = rng.choice(mu_minus.points, size=min(sample_size, len(mu_minus)),
                              p=mu_minus.weights, replace=True)
    res_minus = commutation_residual(T, F, minus_sample, variant)
    xg = grid(4 * partition_size, 0.5)
    prof = commutation_profile(T, F, xg, variant)
    if profile_arcs is None:
        m = 64
        profile_arcs = [Arc(k / m, 1.0 / m) for k in range(m)]
    values = residual_by_arcs(xg, prof, profile_arcs)
    perr = power_identity_error(T, d)
    res_full = float(prof.max())
    verdict = "factorizable" if res_full < residual_tol else "not factorizable on the full circle"
    return FactorizationReport(verdict, d, T, res_minus, res_full, perr, getattr(T, "cdf_gap", None),
                               list(zip(profile_arcs, values)), sync)
