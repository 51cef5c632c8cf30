"""Effective kinetic relation of a wiggly gradient system.

The effective dual potential has derivative K(xi), the harmonic mean over
one period of dR*(xi - p(y)).  K vanishes on the sticking interval
[p_min, p_max]; R_eff* is its integral and R_eff the conjugate of that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .potentials import DissipationPotential
from .profiles import WigglyProfile, _GL_W, _GL_X

__all__ = [
    "KineticRelation",
    "DepinningPrediction",
    "S_alpha",
    "harmonic_mean_K",
    "depinning_expansion",
    "log_depinning",
    "large_xi_defect",
    "fit_power_law",
    "bounds_report",
    "alpha_of_v",
]

_E0 = 1e-14   # innermost excess panel for the integral of K


@dataclass(frozen=True)
class DepinningPrediction:
    K: float
    exponent: float
    prefactor: float


@dataclass(frozen=True)
class KineticRelation:
    """K, R_eff* and R_eff for a fixed potential and profile."""

    potential: DissipationPotential
    profile: WigglyProfile
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def p_max(self) -> float:
        return self.profile.p_max

    @property
    def p_min(self) -> float:
        return self.profile.p_min

    @property
    def sticking_interval(self) -> tuple:
        return self.p_min, self.p_max

    @property
    def _trivial(self) -> bool:
        return self.profile.is_zero

    # K ------------------------------------------------------------------------
    def _K_excess(self, e, side: int):
        """K at distance e >= 0 outside the sticking interval (side +1 above, -1 below)."""
        e = np.atleast_1d(np.asarray(e, dtype=float))
        pot = self.potential
        if side > 0:
            rule = self.profile.rule(level=self.p_max)
            d = rule.gap
        else:
            rule = self.profile.rule(level=self.p_min)
            d = rule.rise
        with np.errstate(divide="ignore"):
            inv = 1.0 / pot.dR_star(e[:, None] + d[None, :])
            h = inv @ rule.w
            out = np.where(np.isfinite(h), 1.0 / h, 0.0)
        return side * out

    def _flat_top_limit(self, side: int) -> float:
        """Limit of |K| when xi approaches the sticking boundary from outside."""
        prof = self.profile
        if prof.is_discrete or self._trivial:
            return 0.0
        a = prof.alpha
        pot = self.potential
        if a is None:
            return 0.0
        # 1/dR*(c x^a) ~ x^(-a (q - 1)) near the extremum; integrable iff < 1
        if pot.is_power_law:
            q = pot.p_dual
            if a * (q - 1.0) >= 1.0:
                return 0.0
        else:
            if a >= 1.0:
                return 0.0
        if side < 0:
            return 0.0
        return float(self._K_excess(0.0, side)[0])

    @property
    def sigma_star(self) -> float:
        """Right limit of K at p_max (zero unless the top is a cusp)."""
        key = ("sigma",)
        if key not in self._cache:
            self._cache[key] = self._flat_top_limit(+1)
        return self._cache[key]

    def K(self, xi):
        """Single-valued selection of dR_eff*, zero on the closed sticking interval."""
        xi = np.asarray(xi, dtype=float)
        flat = np.atleast_1d(xi)
        out = np.zeros_like(flat)
        if self._trivial:
            out = np.asarray(self.potential.dR_star(flat), dtype=float)
        else:
            up = flat > self.p_max
            lo = flat < self.p_min
            if np.any(up):
                out[up] = self._K_excess(flat[up] - self.p_max, +1)
            if np.any(lo):
                out[lo] = self._K_excess(self.p_min - flat[lo], -1)
        out = out.reshape(xi.shape)
        return out if out.ndim else float(out)

    def K_interval(self, xi: float) -> tuple:
        """The full subdifferential of R_eff* at xi."""
        if xi == self.p_max and self.sigma_star > 0:
            return 0.0, self.sigma_star
        k = self.K(xi)
        return k, k

    # R_eff* -------------------------------------------------------------------------
    def _panel(self, side: int, k: int) -> float:
        key = ("panel", side, k)
        if key not in self._cache:
            if k == 0:
                a, b = 0.0, _E0
            else:
                a, b = _E0 * 2.0 ** (k - 1), _E0 * 2.0 ** k
            e = a + (b - a) * _GL_X
            self._cache[key] = float((b - a) * np.dot(_GL_W, np.abs(self._K_excess(e, side))))
        return self._cache[key]

    def _cumulative(self, side: int, k: int) -> float:
        key = ("cum", side)
        cum = self._cache.setdefault(key, [])
        while len(cum) <= k:
            j = len(cum)
            cum.append((cum[-1] if cum else 0.0) + self._panel(side, j))
        return cum[k]

    def _R_star_excess(self, e: float, side: int) -> float:
        if e <= 0:
            return 0.0
        if e <= _E0:
            a = 0.0
            base = 0.0
        else:
            k = int(math.floor(math.log2(e / _E0)))
            while _E0 * 2.0 ** (k + 1) <= e:
                k += 1
            while k > 0 and _E0 * 2.0 ** k > e:
                k -= 1
            a = _E0 * 2.0 ** k
            base = self._cumulative(side, k)
        nodes = a + (e - a) * _GL_X
        return base + (e - a) * float(np.dot(_GL_W, np.abs(self._K_excess(nodes, side))))

    def R_eff_star(self, xi):
        xi = np.asarray(xi, dtype=float)
        flat = np.atleast_1d(xi)
        out = np.zeros_like(flat)
        for i, x in enumerate(flat):
            if self._trivial:
                out[i] = self.potential.R_star(x)
            elif x > self.p_max:
                out[i] = self._R_star_excess(x - self.p_max, +1)
            elif x < self.p_min:
                out[i] = self._R_star_excess(self.p_min - x, -1)
        out = out.reshape(xi.shape)
        return out if out.ndim else float(out)

    # inverse of K and R_eff ----------------------------------------------------------------
    def _excess_for_velocity(self, v: float) -> float:
        """e >= 0 with |K(boundary + side e)| = |v|; side = sign(v)."""
        side = 1 if v > 0 else -1
        w = abs(v)
        if side > 0 and w <= self.sigma_star:
            return 0.0
        span = self.p_max - self.p_min
        hi = float(self.potential.dR(w)) + span
        hi = max(hi, 1e-300)
        while abs(float(self._K_excess(hi, side)[0])) < w:
            hi = 2.0 * hi + 1.0
        lo = max(float(self.potential.dR(w)) - span, 0.0)
        lo = max(lo, hi * 1e-280)

        def f(t):
            return abs(float(self._K_excess(math.exp(t), side)[0])) - w

        tl, th = math.log(lo), math.log(hi)
        if f(tl) >= 0:
            return lo if lo > hi * 1e-279 else 0.0
        if f(th) <= 0:
            return hi
        t = brentq(f, tl, th, xtol=1e-15, rtol=1e-15, maxiter=400)
        return math.exp(t)

    def dR_eff(self, v):
        """Derivative of R_eff, the inverse of K; at v = 0 the selection 0 is returned."""
        v = np.asarray(v, dtype=float)
        flat = np.atleast_1d(v)
        out = np.zeros_like(flat)
        for i, x in enumerate(flat):
            if x == 0:
                out[i] = 0.0
            elif self._trivial:
                out[i] = self.potential.dR(x)
            elif x > 0:
                out[i] = self.p_max + self._excess_for_velocity(x)
            else:
                out[i] = self.p_min - self._excess_for_velocity(x)
        out = out.reshape(v.shape)
        return out if out.ndim else float(out)

    def subdiff_R_eff(self, v: float) -> tuple:
        if v == 0 and not self._trivial:
            return self.p_min, self.p_max
        d = float(self.dR_eff(v))
        return d, d

    def R_eff(self, v):
        v = np.asarray(v, dtype=float)
        flat = np.atleast_1d(v)
        out = np.zeros_like(flat)
        for i, x in enumerate(flat):
            if x == 0:
                continue
            if self._trivial:
                out[i] = self.potential.R(x)
                continue
            side = 1 if x > 0 else -1
            e = self._excess_for_velocity(x)
            bound = self.p_max if side > 0 else self.p_min
            out[i] = (bound + side * e) * x - self._R_star_excess(e, side)
        out = out.reshape(v.shape)
        return out if out.ndim else float(out)

    # export ----------------------------------------------------------------
    def sample(self, xi_grid, v_grid) -> dict:
        xi_grid = np.asarray(xi_grid, dtype=float)
        v_grid = np.asarray(v_grid, dtype=float)
        return {
            "xi": xi_grid,
            "K": np.asarray(self.K(xi_grid)),
            "R_eff_star": np.asarray(self.R_eff_star(xi_grid)),
            "v": v_grid,
            "R_eff": np.asarray(self.R_eff(v_grid)),
            "dR_eff": np.asarray(self.dR_eff(v_grid)),
        }


def harmonic_mean_K(pot: DissipationPotential, prof: WigglyProfile, xi):
    return KineticRelation(pot, prof).K(xi)


def S_alpha(alpha: float, terms: int = 40) -> float:
    """2 sum_n (-1)^n (1/(alpha n + 1) + 1/(alpha (n+1) - 1)), alpha > 1.

    Summed with the Cohen-Rodriguez Villegas-Zagier acceleration, which is
    exact to roughly 5.8^-terms for these completely monotone terms.
    """
    if not alpha > 1:
        raise ValueError("the series converges only for alpha > 1")
    n = terms
    d = (3.0 + math.sqrt(8.0)) ** n
    d = 0.5 * (d + 1.0 / d)
    b, c, s = -1.0, -d, 0.0
    for k in range(n):
        c = b - c
        s += c * (1.0 / (alpha * k + 1.0) + 1.0 / (alpha * (k + 1) - 1.0))
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0))
    return 2.0 * s / d


def _require_quadratic(rel: KineticRelation):
    pot = rel.potential
    if not (pot.is_power_law and pot.p == 2.0):
        raise ValueError("expansion is stated for quadratic dissipation only")
    return pot.mu


def depinning_expansion(rel: KineticRelation, xi: float) -> DepinningPrediction:
    """Leading-order K just above p_max for a top of the form p_max - c|y - z*|^alpha."""
    mu = _require_quadratic(rel)
    a, c = rel.profile.alpha, rel.profile.c_star
    if a is None or c is None:
        raise ValueError("profile has no power-law maximum")
    if a <= 1:
        raise ValueError("alpha <= 1: use log_depinning (alpha = 1) or sigma_star (alpha < 1)")
    expo = (a - 1.0) / a
    pref = mu * c ** (1.0 / a) / S_alpha(a)
    k = pref * max(0.0, xi - rel.p_max) ** expo
    return DepinningPrediction(k, expo, pref)


def log_depinning(rel: KineticRelation, xi: float) -> float:
    """Leading-order K for a linear (tent-like) maximum: (c*/2) / log(1/(xi - p_max))."""
    mu = _require_quadratic(rel)
    if rel.profile.alpha != 1.0:
        raise ValueError("logarithmic depinning needs a linear maximum")
    d = xi - rel.p_max
    if not d > 0:
        raise ValueError("xi must exceed p_max")
    return mu * 0.5 * rel.profile.c_star / math.log(1.0 / d)


def large_xi_defect(rel: KineticRelation, xi):
    """K(xi) - dR*(xi); tends to zero as |xi| grows."""
    return np.asarray(rel.K(xi)) - rel.potential.dR_star(xi)


def fit_power_law(x, y) -> tuple:
    """Least-squares (slope, prefactor) of log y = log c + slope log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, icpt = np.polyfit(lx, ly, 1)
    return float(slope), float(math.exp(icpt))


def bounds_report(rel: KineticRelation, v_grid, xi_grid, tol: float = 1e-9) -> dict:
    """Check the elementary two-sided bounds on R_eff, R_eff* and K.

    Every margin is (larger side) - (smaller side), so all must be >= -tol.
    """
    pot = rel.potential
    pm, pl = rel.p_max, rel.p_min
    v = np.asarray(v_grid, dtype=float)
    v = v[v >= 0]
    xi = np.asarray(xi_grid, dtype=float)
    xi = xi[xi >= pm]
    margins = {}

    reff = np.asarray(rel.R_eff(v))
    thresh = pot.dR_star(pm - pl)
    b_low = np.where(v <= thresh, pm * v, pl * v + pot.R(v) + pot.R_star(pm - pl))
    margins["R_eff_upper"] = float(np.min(pm * v + pot.R(v) - reff, initial=np.inf))
    margins["R_eff_lower"] = float(np.min(reff - b_low, initial=np.inf))

    rs = np.asarray(rel.R_eff_star(xi))
    margins["R_eff_star_lower"] = float(np.min(rs - pot.R_star(xi - pm), initial=np.inf))
    margins["R_eff_star_upper"] = float(np.min(
        pot.R_star(xi - pl) - pot.R_star(pm - pl) - rs, initial=np.inf))

    k = np.asarray(rel.K(xi))
    margins["K_lower"] = float(np.min(k - pot.dR_star(xi - pm), initial=np.inf))
    margins["K_upper"] = float(np.min(pot.dR_star(xi - pl) - k, initial=np.inf))

    if pot.is_power_law:
        margins["improved_R_eff_star"] = float(np.min(
            np.maximum(0.0, pot.R_star(xi) - pot.R_star(pm)) - rs, initial=np.inf))
        improved = np.where(v <= pot.dR_star(pm), pm * v, pot.R_star(pm) + pot.R(v))
        margins["improved_R_eff"] = float(np.min(reff - improved, initial=np.inf))

    worst = min(margins.values())
    return {"margins": margins, "worst": worst, "ok": worst >= -tol}


def alpha_of_v(rel: KineticRelation, v):
    """alpha(v) = v dR_eff(v) / R_eff(v), with the limit 1 at v = 0."""
    v = np.asarray(v, dtype=float)
    flat = np.atleast_1d(v)
    out = np.ones_like(flat)
    for i, x in enumerate(flat):
        if x != 0:
            r = float(rel.R_eff(x))
            out[i] = x * float(rel.dR_eff(x)) / r if r > 0 else 1.0
    out = out.reshape(v.shape)
    return out if out.ndim else float(out)
