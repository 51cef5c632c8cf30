"""Effective contact potential M(v, xi) of the one-period cell problem.

M(v, xi) is the least value of  int_0^1 R(|v| z') + R*(xi - p(z)) ds  over
paths with z(1) = z(0) + sign(v).  Three independent evaluations exist:

  lagrange-h   one scalar root find for the multiplier h, then M = h - v W(xi, h)
  density-a    convex minimization over the inverse slope a(y) > 0, mean 1
  cell-z       Newton on a discretized path with the winding constraint

The multiplier is handled through g = Gmin - h > 0, where Gmin is the minimum
of G(xi, y) = R*(xi - p(y)), so the singular end of the admissible range sits
at g = 0 and can be resolved in log scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, solveh_banded
from scipy.optimize import brentq, minimize_scalar

from .kinetics import KineticRelation
from .potentials import DissipationPotential
from .profiles import WigglyProfile

__all__ = [
    "ContactEvaluation",
    "WFunction",
    "M_zero",
    "M_partials",
    "M1_expansion",
    "solve_H",
    "M_lagrange",
    "M_density",
    "M_cell_direct",
    "M_weak",
    "expansion_remainder",
    "M_rate_independent",
    "contact_residual",
    "convexity_probe",
    "bipotential_check",
    "meff_comparison",
    "multiplier_surface",
]

_G_FLOOR = 1e-300


@dataclass
class ContactEvaluation:
    v: float
    xi: float
    M: float
    route: str
    h: float | None = None
    residual: float = 0.0
    saturated: bool = False
    iterations: int = 0
    path: np.ndarray | None = field(default=None, repr=False)
    density: tuple | None = field(default=None, repr=False)


def M_zero(pot: DissipationPotential, prof: WigglyProfile, xi):
    """min over pi in [p_min, p_max] of R*(xi - pi)."""
    xi = np.asarray(xi, dtype=float)
    out = pot.R_star(xi - np.clip(xi, prof.p_min, prof.p_max))
    return out if np.ndim(out) else float(out)


@dataclass
class _XiData:
    xi: float
    Gmin: float
    dG: np.ndarray
    G_xi: np.ndarray
    G_xixi: np.ndarray
    w: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class WFunction:
    """W(xi, h) = int psi*(h - G(xi, y)) dy and its partial derivatives."""

    potential: DissipationPotential
    profile: WigglyProfile
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def G_min(self, xi: float) -> float:
        return float(M_zero(self.potential, self.profile, xi))

    def _dG_at(self, xi: float, y=None, rule=None):
        """G - Gmin at the nodes of a rule, or at points y."""
        pot, prof = self.potential, self.profile
        if rule is not None:
            gap, rise, p = rule.gap, rule.rise, rule.p
        else:
            gap, rise, p = prof.gap_from_max(y), prof.rise_from_min(y), prof.p(y)
        gap, rise, p = np.asarray(gap), np.asarray(rise), np.asarray(p)
        if xi >= prof.p_max:
            e = xi - prof.p_max
            return pot.R_star_increment(e, gap), pot.dR_star(e + gap), pot.d2R_star(e + gap)
        if xi <= prof.p_min:
            e = prof.p_min - xi
            return (pot.R_star_increment(e, rise), -np.asarray(pot.dR_star(e + rise)),
                    pot.d2R_star(e + rise))
        eta = xi - p
        return pot.R_star(eta), pot.dR_star(eta), pot.d2R_star(eta)

    def data(self, xi: float) -> _XiData:
        xi = float(xi)
        d = self._cache.get(xi)
        if d is None:
            rule = self.profile.rule(level=xi)
            dG, gx, gxx = self._dG_at(xi, rule=rule)
            d = _XiData(xi, self.G_min(xi), np.asarray(dG, float), np.asarray(gx, float),
                        np.asarray(gxx, float), rule.w, rule.y)
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[xi] = d
        return d

    # derivatives of psi* in terms of s = G - h > 0 -------------------------------
    def _eta(self, s):
        return self.potential.R_star_inverse(s)

    def _dpsi(self, eta):
        with np.errstate(divide="ignore"):
            return 1.0 / self.potential.dR_star(eta)

    def _d2psi(self, eta):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.potential.d2R_star(eta) / self.potential.dR_star(eta) ** 3

    def partials_g(self, xi: float, g: float) -> dict:
        """W and partials at h = Gmin - g."""
        d = self.data(xi)
        s = g + d.dG
        eta = self._eta(s)
        d1 = self._dpsi(eta)
        d2 = self._d2psi(eta)
        w = d.w
        return {
            "h": d.Gmin - g,
            "W": -float(np.dot(w, eta)),
            "W_h": float(np.dot(w, d1)),
            "W_hh": float(np.dot(w, d2)),
            "W_xi": -float(np.dot(w, d1 * d.G_xi)),
            "W_xih": -float(np.dot(w, d2 * d.G_xi)),
            "W_xixi": float(np.dot(w, d2 * d.G_xi ** 2 - d1 * d.G_xixi)),
        }

    def partials(self, xi: float, h: float) -> dict:
        g = self.G_min(xi) - h
        if not g > 0:
            raise ValueError("h must lie below min_y G(xi, y)")
        return self.partials_g(xi, g)

    def W(self, xi: float, h: float) -> float:
        return self.partials(xi, h)["W"]

    def W_h_g(self, xi: float, g: float) -> float:
        d = self.data(xi)
        return float(np.dot(d.w, self._dpsi(self._eta(g + d.dG))))

    def W_hh_g(self, xi: float, g: float) -> float:
        d = self.data(xi)
        return float(np.dot(d.w, self._d2psi(self._eta(g + d.dG))))

    def integral_Psi(self, xi: float, g: float) -> float:
        d = self.data(xi)
        return float(np.dot(d.w, self._eta(g + d.dG)))

    def density(self, v: float, xi: float, g: float, y) -> np.ndarray:
        """Optimal inverse slope a(y) = v psi*'(h - G(xi, y))."""
        dG = np.asarray(self._dG_at(float(xi), y=np.asarray(y, float))[0])
        return abs(v) * self._dpsi(self._eta(g + dG))


def solve_H(wf: WFunction, v: float, xi: float) -> tuple:
    """Return (g, saturated) with h = Gmin - g solving |v| W_h(xi, h) = 1.

    When |v| W_h stays below 1 up to h = Gmin the optimal density carries a
    point mass at the minimizers of G and h saturates at Gmin (g = 0).
    """
    v = abs(float(v))
    if v == 0:
        raise ValueError("solve_H needs v != 0")

    def f(lg):
        return v * wf.W_h_g(xi, math.exp(lg)) - 1.0

    lo = math.log(_G_FLOOR)
    if f(lo) < 0:
        return 0.0, True
    hi = 0.0
    while f(hi) > 0:
        hi += math.log(4.0)
        if hi > 700:
            raise RuntimeError("no root for the multiplier below exp(700)")
    lg = brentq(f, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)
    g = math.exp(lg)
    # Newton polish in g; df/dg = -v W_hh
    for _ in range(3):
        r = v * wf.W_h_g(xi, g) - 1.0
        dd = v * wf.W_hh_g(xi, g)
        if not (dd > 0 and math.isfinite(dd)):
            break
        g_new = g + r / dd
        if not (0 < g_new < 2 * g) or abs(g_new - g) <= 1e-16 * g:
            break
        if abs(v * wf.W_h_g(xi, g_new) - 1.0) < abs(r):
            g = g_new
        else:
            break
    return g, False


def M_lagrange(pot: DissipationPotential, prof: WigglyProfile, v: float, xi: float,
               wf: WFunction | None = None, with_density: bool = False) -> ContactEvaluation:
    v, xi = float(v), float(xi)
    if v == 0:
        return ContactEvaluation(v, xi, float(M_zero(pot, prof, xi)), "zero-velocity")
    wf = wf or WFunction(pot, prof)
    g, sat = solve_H(wf, v, xi)
    Gmin = wf.G_min(xi)
    av = abs(v)
    M = Gmin - g + av * wf.integral_Psi(xi, g)
    res = abs(av * wf.W_h_g(xi, g) - 1.0) if not sat else 0.0
    ev = ContactEvaluation(v, xi, M, "lagrange-h", h=Gmin - g, residual=res, saturated=sat)
    if with_density:
        d = wf.data(xi)
        ev.density = (d.y, wf.density(v, xi, g, d.y))
    return ev


def M_partials(pot: DissipationPotential, prof: WigglyProfile, v: float, xi: float,
               wf: WFunction | None = None) -> tuple:
    """(M, dM/dv, dM/dxi) from the envelope identities at the optimal multiplier.

    dM/dv = sign(v) (-W) and dM/dxi = int a G_xi, where the optimal density a may
    carry a point mass 1 - |v| W_h at the minimizers of G.
    """
    v, xi = float(v), float(xi)
    wf = wf or WFunction(pot, prof)
    if v == 0:
        raise ValueError("M is not differentiable in v at v = 0")
    g, sat = solve_H(wf, v, xi)
    P = wf.partials_g(xi, g)
    av = abs(v)
    M = P["h"] - av * P["W"]
    mass = max(0.0, 1.0 - av * P["W_h"]) if sat else 0.0
    if xi > prof.p_max:
        g_at_min = float(pot.dR_star(xi - prof.p_max))
    elif xi < prof.p_min:
        g_at_min = float(pot.dR_star(xi - prof.p_min))
    else:
        g_at_min = 0.0
    return M, math.copysign(1.0, v) * (-P["W"]), -av * P["W_xi"] + mass * g_at_min


def M1_expansion(pot: DissipationPotential, prof: WigglyProfile, xi: float,
                 wf: WFunction | None = None) -> float:
    """Slope of M(., xi) at v = 0+: int Psi(G(xi, y) - M0(xi)) dy."""
    wf = wf or WFunction(pot, prof)
    d = wf.data(float(xi))
    return float(np.dot(d.w, pot.R_star_inverse(d.dG)))


def expansion_remainder(pot: DissipationPotential, prof: WigglyProfile, v: float, xi: float,
                        wf: WFunction | None = None) -> float:
    """|M(v, xi) - M0(xi) - v M1(xi)| / v without cancellation.

    With g the multiplier gap this equals  int [Psi(t+g) - Psi(t) - g Psi'(t+g)]
    for t = G - M0, since v int Psi'(t+g) = 1.
    """
    wf = wf or WFunction(pot, prof)
    g, sat = solve_H(wf, v, xi)
    d = wf.data(float(xi))
    if sat:
        # point mass at the minimum: M - M0 - v M1 = 0 exactly
        return 0.0
    return abs(float(np.dot(d.w, pot.R_star_inverse_taylor(d.dG, g))))


# density route ---------------------------------------------------------------------
def _cells(prof: WigglyProfile, n: int):
    if prof.is_discrete:
        r = prof.rule()
        return r.y, r.w, r.p
    y = (np.arange(n) + 0.5) / n
    return y, np.full(n, 1.0 / n), np.asarray(prof.p(y))


def _psi_parts(pot: DissipationPotential, a, v):
    rho = a / v
    w = 1.0 / rho
    psi = rho * pot.R(w)
    dpsi = pot.R(w) - w * pot.dR(w)
    d2psi = pot.d2R(w) * w ** 3
    return v * psi, dpsi, d2psi / v


def M_density(pot: DissipationPotential, prof: WigglyProfile, v: float, xi: float,
              n: int = 512, tol: float = 1e-14, maxiter: int = 200) -> ContactEvaluation:
    """Minimize sum_i w_i [v psi(a_i/v) + a_i G_i] subject to sum_i w_i a_i = 1, a > 0.

    A discrete profile is read as the limit of continuous ones, so the path may
    also rest with mass 1 - s at a transit state where G = M0 at no cost in psi.
    Since psi is a perspective, that gives min over s of s T(v/s) + (1 - s) M0.
    """
    v, xi = abs(float(v)), float(xi)
    if v == 0:
        return ContactEvaluation(0.0, xi, float(M_zero(pot, prof, xi)), "zero-velocity")
    ev = _density_cells(pot, prof, v, xi, n, tol, maxiter)
    if not prof.is_discrete:
        return ev
    M0 = float(M_zero(pot, prof, xi))
    if M0 >= float(np.min(pot.R_star(xi - prof.rule().p))):
        return ev

    def total(s):
        return s * _density_cells(pot, prof, v / s, xi, n, tol, maxiter).M + (1 - s) * M0

    res = minimize_scalar(total, bounds=(1e-9, 1.0), method="bounded",
                          options={"xatol": 1e-12})
    s_opt = float(res.x) if res.fun < ev.M else 1.0
    if s_opt < 1.0:
        inner = _density_cells(pot, prof, v / s_opt, xi, n, tol, maxiter)
        return ContactEvaluation(v, xi, float(res.fun), "density-a", residual=inner.residual,
                                 iterations=inner.iterations,
                                 density=(inner.density[0], s_opt * inner.density[1]))
    return ev


def _density_cells(pot, prof, v, xi, n, tol, maxiter) -> ContactEvaluation:
    y, w, p = _cells(prof, n)
    G = np.asarray(pot.R_star(xi - p))
    g0 = G.min()
    dG = G - g0
    a = np.ones_like(w)

    def F(a):
        return float(np.dot(w, _psi_parts(pot, a, v)[0] + a * dG))

    f = F(a)
    it = 0
    res = np.inf
    for it in range(1, maxiter + 1):
        _, d1, d2 = _psi_parts(pot, a, v)
        grad = d1 + dG
        inv = 1.0 / d2
        lam = np.dot(w, grad * inv) / np.dot(w, inv)
        step = (lam - grad) * inv
        decrement = float(np.dot(w, (grad - lam) ** 2 * inv))
        res = math.sqrt(max(decrement, 0.0))
        if decrement <= tol * (1.0 + abs(f)):
            break
        t = 1.0
        neg = step < 0
        if np.any(neg):
            t = min(1.0, 0.99 * float(np.min(-a[neg] / step[neg])))
        slope = float(np.dot(w, grad * step))
        while True:
            a_new = a + t * step
            f_new = F(a_new)
            if f_new <= f + 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        if f_new > f:
            break
        a, f = a_new, f_new
    return ContactEvaluation(v, xi, f + g0, "density-a", residual=res, iterations=it,
                             density=(y, a))


# weak x weak relaxation -----------------------------------------------------------------
def M_weak(pot: DissipationPotential, prof: WigglyProfile, v: float, xi: float,
           n: int = 512, tol: float = 1e-14, maxiter: int = 200) -> ContactEvaluation:
    """min over densities of  sum w v psi(a/v) + R*(xi - sum w p a).

    The wiggle force is averaged along the path before R* is applied, so this
    is the relaxation of M in which the force sees only weak limits.
    """
    v, xi = abs(float(v)), float(xi)
    if v == 0:
        return ContactEvaluation(0.0, xi, float(M_zero(pot, prof, xi)), "weak")
    y, w, p = _cells(prof, n)
    a = np.ones_like(w)

    def F(a):
        return float(np.dot(w, _psi_parts(pot, a, v)[0]) + pot.R_star(xi - np.dot(w, p * a)))

    f = F(a)
    it, res = 0, np.inf
    wp = w * p
    for it in range(1, maxiter + 1):
        _, d1, d2 = _psi_parts(pot, a, v)
        eta = xi - np.dot(wp, a)
        # gradient and Hessian of the objective in the weighted inner product
        grad = d1 - float(pot.dR_star(eta)) * p
        c = float(pot.d2R_star(eta))
        # Hessian (in w-weighted coordinates) is diag(d2) + c p p^T w
        dinv = 1.0 / d2

        def Hinv(r):
            # Sherman-Morrison for diag(d2) + c p (w p)^T
            x = r * dinv
            den = 1.0 + c * np.dot(wp, p * dinv)
            return x - (c * np.dot(wp, x) / den) * p * dinv

        hg = Hinv(grad)
        h1 = Hinv(np.ones_like(a))
        lam = np.dot(w, hg) / np.dot(w, h1)
        step = -(hg - lam * h1)
        dec = -float(np.dot(w, grad * step))
        res = math.sqrt(max(dec, 0.0))
        if dec <= tol * (1.0 + abs(f)):
            break
        t = 1.0
        neg = step < 0
        if np.any(neg):
            t = min(1.0, 0.99 * float(np.min(-a[neg] / step[neg])))
        slope = float(np.dot(w, grad * step))
        while True:
            a_new = a + t * step
            f_new = F(a_new)
            if f_new <= f + 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        if f_new > f:
            break
        a, f = a_new, f_new
    return ContactEvaluation(v, xi, f, "weak", residual=res, iterations=it, density=(y, a))


# path route ----------------------------------------------------------------------------
def M_cell_direct(pot: DissipationPotential, prof: WigglyProfile, v: float, xi: float,
                  n: int = 256, tol: float = 1e-13, maxiter: int = 400) -> ContactEvaluation:
    """Discretized path problem: nodes z_0 = 0 < ... < z_n = 1, midpoint rule in s."""
    v, xi = abs(float(v)), float(xi)
    if prof.is_discrete:
        raise ValueError("the path route needs a profile with derivatives")
    if v == 0:
        return ContactEvaluation(0.0, xi, float(M_zero(pot, prof, xi)), "zero-velocity",
                                 path=np.zeros(n + 1))
    z = np.linspace(0.0, 1.0, n + 1)
    c = v * n

    def parts(z):
        dz = np.diff(z)
        m = 0.5 * (z[:-1] + z[1:])
        eta = xi - np.asarray(prof.p(m))
        f = float(np.sum(pot.R(c * dz) + pot.R_star(eta)) / n)
        return dz, m, eta, f

    dz, m, eta, f = parts(z)
    lam = 1e-8
    it, gnorm = 0, np.inf
    for it in range(1, maxiter + 1):
        r1 = np.asarray(pot.dR(c * dz)) * v          # d/d(dz) of R(c dz)/n
        r2 = np.asarray(pot.d2R(c * dz)) * v * c
        dp = np.asarray(prof.dp(m))
        d2p = np.asarray(prof.d2p(m))
        s1 = -np.asarray(pot.dR_star(eta)) * dp / (2 * n)
        s2 = (np.asarray(pot.d2R_star(eta)) * dp ** 2
              - np.asarray(pot.dR_star(eta)) * d2p) / (4 * n)
        grad = r1[:-1] - r1[1:] + s1[:-1] + s1[1:]
        gnorm = float(np.max(np.abs(grad)))
        if gnorm * n <= tol * (1.0 + abs(f)) * n or gnorm < 1e-15:
            break
        diag = r2[:-1] + r2[1:] + s2[:-1] + s2[1:]
        off = -r2[1:-1] + s2[1:-1]
        accepted = False
        for _ in range(60):
            ab = np.zeros((2, n - 1))
            ab[0, 1:] = off
            ab[1, :] = diag + lam * (1.0 + np.abs(diag))
            try:
                step = -solveh_banded(ab, grad)
            except (LinAlgError, ValueError):
                lam = max(lam * 10.0, 1e-8)
                continue
            zn = z.copy()
            zn[1:-1] += step
            dzn, mn, etan, fn = parts(zn)
            if fn <= f + 1e-4 * float(np.dot(grad, step)):
                z, dz, m, eta, f = zn, dzn, mn, etan, fn
                lam = max(lam / 10.0, 1e-14)
                accepted = True
                break
            lam = max(lam * 10.0, 1e-8)
        if not accepted:
            break
    return ContactEvaluation(v, xi, f, "cell-z", residual=gnorm, iterations=it, path=z)


# limits and checks ---------------------------------------------------------------------
def M_rate_independent(pot: DissipationPotential, prof: WigglyProfile, v: float, xi: float,
                       deltas=(1e-1, 1e-2, 1e-3, 1e-4)) -> dict:
    """Rescaled contact potential M(delta v, xi)/delta along a delta sequence."""
    wf = WFunction(pot, prof)
    vals = [M_lagrange(pot, prof, d * v, xi, wf=wf).M / d for d in deltas]
    M0 = float(M_zero(pot, prof, xi))
    inside = prof.p_min <= xi <= prof.p_max
    if inside:
        limit = abs(v) * M1_expansion(pot, prof, xi, wf=wf)
        errors = [abs(x - limit) for x in vals]
        ok = all(b <= a + 1e-12 for a, b in zip(errors[:-1], errors[1:]))
    else:
        limit = math.inf
        errors = [M0 / d - x for d, x in zip(deltas, vals)]      # must be <= 0
        ok = all(e <= 1e-9 * (1 + abs(x)) for e, x in zip(errors, vals))
    return {"deltas": list(deltas), "values": vals, "limit": limit, "errors": errors,
            "inside": inside, "ok": ok}


def contact_residual(rel: KineticRelation, v: float, xi: float | None = None,
                     wf: WFunction | None = None) -> float:
    """M(v, xi) - v xi with xi = dR_eff(v) unless given."""
    if xi is None:
        xi = float(rel.dR_eff(v))
    M = M_lagrange(rel.potential, rel.profile, v, xi, wf=wf).M
    return M - v * xi


def convexity_probe(fn, direction: str, v_values, xi_values, step: float) -> dict:
    """Midpoint-convexity scan of M along one variable.

    Returns the smallest midpoint defect (f(x-d) + f(x+d))/2 - f(x); a negative
    value means a convexity violation of that size.
    """
    if direction not in ("v", "xi"):
        raise ValueError("direction is 'v' or 'xi'")
    worst = math.inf
    where = None
    for v in v_values:
        for xi in xi_values:
            if direction == "v":
                a, b, c = fn(v - step, xi), fn(v, xi), fn(v + step, xi)
            else:
                a, b, c = fn(v, xi - step), fn(v, xi), fn(v, xi + step)
            d = 0.5 * (a + c) - b
            if d < worst:
                worst, where = d, (v, xi)
    return {"worst": worst, "at": where, "violation": max(0.0, -worst)}


def bipotential_check(pot: DissipationPotential, prof: WigglyProfile, points, tol: float = 1e-5,
                      step: float = 1e-5) -> dict:
    """Evaluate the three conditions xi in d_v M, M = v xi, v in d_xi M at each point.

    At v = 0 the v-subdifferential is the interval [-M1(xi), M1(xi)].  Partial
    derivatives come from central differences with the given step, except within
    4 steps of p_max or p_min, where M bends on scales below any usable step
    (depinning can place the contact point exponentially close to p_max) and
    the envelope identities of M_partials are used instead.
    """
    wf = WFunction(pot, prof)

    def M(v, xi):
        return M_lagrange(pot, prof, v, xi, wf=wf).M

    rows = []
    for v, xi in points:
        v, xi = float(v), float(xi)
        m = M(v, xi)
        scale = 1.0 + abs(v * xi)
        near = min(abs(xi - prof.p_max), abs(xi - prof.p_min)) < 4 * step
        if v != 0 and near:
            _, dv, dxi = M_partials(pot, prof, v, xi, wf=wf)
        else:
            dv = (M(v + step, xi) - M(v - step, xi)) / (2 * step) if v != 0 else math.nan
            dxi = (M(v, xi + step) - M(v, xi - step)) / (2 * step)
        if v == 0:
            m1 = M1_expansion(pot, prof, xi, wf=wf)
            c1 = abs(xi) <= m1 + tol
        else:
            c1 = abs(dv - xi) <= tol * scale
        c2 = abs(m - v * xi) <= tol * scale
        c3 = abs(dxi - v) <= tol * scale
        rows.append({"v": v, "xi": xi, "M": m, "in_dvM": c1, "contact": c2, "in_dxiM": c3,
                     "consistent": c1 == c2 == c3})
    return {"rows": rows, "consistent": all(r["consistent"] for r in rows)}


def meff_comparison(rel: KineticRelation, points, tol: float = 1e-6) -> dict:
    """Tabulate M_eff - M with M_eff = R_eff + R_eff*; never raises on sign."""
    pot, prof = rel.potential, rel.profile
    wf = WFunction(pot, prof)
    rows = []
    for v, xi in points:
        m = M_lagrange(pot, prof, v, xi, wf=wf).M
        meff = float(rel.R_eff(v)) + float(rel.R_eff_star(xi))
        contact = abs(m - v * xi) <= tol * (1 + abs(v * xi))
        rows.append({"v": v, "xi": xi, "M": m, "M_eff": meff, "diff": meff - m,
                     "contact": contact})
    diffs = [r["diff"] for r in rows]
    on_contact = [abs(r["diff"]) for r in rows if r["contact"]]
    return {"rows": rows, "min_diff": min(diffs) if diffs else math.nan,
            "max_contact_diff": max(on_contact) if on_contact else 0.0}


def multiplier_surface(rel: KineticRelation, xi_values, h_values) -> list:
    """Rows (xi, h, V, M, M - xi V, M_eff - M) over a (xi, h) grid, V = 1/W_h."""
    wf = WFunction(rel.potential, rel.profile)
    rows = []
    for xi in xi_values:
        Gmin = wf.G_min(xi)
        for h in h_values:
            if not h < Gmin:
                continue
            P = wf.partials(xi, h)
            V = 1.0 / P["W_h"]
            M = h - V * P["W"]
            meff = float(rel.R_eff(V)) + float(rel.R_eff_star(xi))
            rows.append({"xi": xi, "h": h, "V": V, "M": M, "gap": M - xi * V,
                         "diff": meff - M})
    return rows
