"""Dissipation potentials, their duals, and a few convex-analysis helpers.

Every potential here is even in the velocity, which is all the rest of the
package needs.  Values are computed through the dual R* whenever that is the
cheaper direction, so a potential is described by R*, R*', R*'' and the
inverse Psi of R* on the positive half-line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DualPiece",
    "DissipationPotential",
    "PsiTransform",
    "legendre_transform",
    "convex_envelope",
    "young_fenchel_gap",
    "same_flow_check",
    "concave_window_dual",
]


@dataclass(frozen=True)
class DualPiece:
    """One branch of an even dual potential, valid for |eta| <= upto.

    family "poly2": a + b*x + c*x**2
    family "sqrt":  a - b*sqrt(c - x)
    where x = |eta|.
    """

    family: str
    coeffs: tuple
    upto: float

    def __post_init__(self):
        if self.family not in ("poly2", "sqrt"):
            raise ValueError(f"unknown dual piece family {self.family!r}")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) != 3:
            raise ValueError("a dual piece needs three coefficients")

    def value(self, x):
        a, b, c = self.coeffs
        if self.family == "poly2":
            return a + b * x + c * x * x
        return a - b * np.sqrt(np.maximum(c - x, 0.0))

    def d1(self, x):
        a, b, c = self.coeffs
        if self.family == "poly2":
            return b + 2.0 * c * x
        return 0.5 * b / np.sqrt(c - x)

    def d2(self, x):
        a, b, c = self.coeffs
        if self.family == "poly2":
            return 2.0 * c + 0.0 * x
        return 0.25 * b / (c - x) ** 1.5

    def inverse(self, t):
        # x >= 0 with value(x) = t
        a, b, c = self.coeffs
        if self.family == "poly2":
            if c == 0.0:
                return (t - a) / b
            disc = np.maximum(b * b - 4.0 * c * (a - t), 0.0)
            # stable form of (-b + sqrt(disc)) / (2c)
            return 2.0 * (t - a) / (b + np.sqrt(disc))
        return c - ((a - t) / b) ** 2

    def slope_inverse(self, w):
        # x with d1(x) = w; only called for pieces with non-constant slope
        a, b, c = self.coeffs
        if self.family == "poly2":
            return (w - b) / (2.0 * c)
        return c - (0.5 * b / w) ** 2

    def to_dict(self):
        return {"family": self.family, "coeffs": list(self.coeffs), "upto": self.upto}


def _series_one_minus_power(r, b):
    """1 - (1-r)**b - b*r without cancellation, for r in [0, 1]."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    small = r < 1e-2
    rs = r[small]
    # sum_{k>=2} -binom(b, k) (-r)^k
    term = np.full_like(rs, 1.0)
    acc = np.zeros_like(rs)
    coef = b
    for k in range(2, 40):
        coef = coef * (k - 1 - b) / k
        term = term * rs if k > 2 else rs * rs
        acc += coef * term
    out[small] = acc
    rl = r[~small]
    with np.errstate(divide="ignore"):
        out[~small] = -np.expm1(b * np.log1p(-rl)) - b * rl
    return out


@dataclass(frozen=True)
class DissipationPotential:
    """Convex, even dissipation potential with R(0) = 0.

    kind "power-law":  R(v) = (r/p)|v|^p
    kind "quadratic":  R(v) = (nu/2) v^2  (power law with p = 2, r = nu)
    kind "tabulated-dual": R* given piecewise in |eta|, R derived by conjugacy
    """

    kind: str
    coefficient: float = 1.0
    exponent: float = 2.0
    pieces: tuple = field(default=())

    def __post_init__(self):
        if self.kind in ("power-law", "quadratic"):
            if self.kind == "quadratic" and self.exponent != 2.0:
                raise ValueError("quadratic potentials have exponent 2")
            if not self.coefficient > 0 or not self.exponent > 1:
                raise ValueError("power law needs r > 0 and p > 1")
        elif self.kind == "tabulated-dual":
            self._check_pieces()
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    # constructors -----------------------------------------------------------
    @classmethod
    def power_law(cls, r: float, p: float) -> "DissipationPotential":
        return cls("power-law", float(r), float(p))

    @classmethod
    def quadratic(cls, nu: float = 1.0) -> "DissipationPotential":
        return cls("quadratic", float(nu), 2.0)

    @classmethod
    def from_mobility(cls, mu: float) -> "DissipationPotential":
        """R(v) = v^2/(2 mu), so that R*'(xi) = mu xi."""
        return cls.quadratic(1.0 / mu)

    @classmethod
    def tabulated_dual(cls, pieces, extend: bool = True) -> "DissipationPotential":
        pieces = [p if isinstance(p, DualPiece) else DualPiece(**p) for p in pieces]
        if extend and math.isfinite(pieces[-1].upto):
            pieces.append(_quadratic_continuation(pieces[-1]))
        return cls("tabulated-dual", 1.0, 2.0, tuple(pieces))

    def _check_pieces(self):
        ps = self.pieces
        if not ps:
            raise ValueError("tabulated dual needs at least one piece")
        if math.isfinite(ps[-1].upto):
            raise ValueError("last dual piece must extend to infinity")
        if abs(float(ps[0].value(0.0))) > 1e-12 or abs(float(ps[0].d1(0.0))) > 1e-12:
            raise ValueError("dual potential must satisfy R*(0) = 0 and R*'(0) = 0")
        for left, right in zip(ps[:-1], ps[1:]):
            x = left.upto
            if abs(float(left.value(x) - right.value(x))) > 1e-9 * (1 + abs(float(left.value(x)))):
                raise ValueError(f"dual pieces disagree at |eta| = {x}")
            if float(right.d1(x)) < float(left.d1(x)) - 1e-9:
                raise ValueError(f"dual potential not convex at |eta| = {x}")

    # serialization ------------------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "power-law":
            return {"kind": "power-law", "r": self.coefficient, "p": self.exponent}
        if self.kind == "quadratic":
            return {"kind": "quadratic", "nu": self.coefficient}
        return {"kind": "tabulated-dual", "pieces": [p.to_dict() for p in self.pieces]}

    @classmethod
    def from_dict(cls, d: dict) -> "DissipationPotential":
        kind = d.get("kind")
        if kind == "power-law":
            return cls.power_law(d["r"], d["p"])
        if kind == "quadratic":
            if "mu" in d:
                return cls.from_mobility(d["mu"])
            return cls.quadratic(d.get("nu", 1.0))
        if kind == "tabulated-dual":
            if d.get("preset") == "concave-window":
                return concave_window_dual()
            pieces = [DualPiece(p["family"], tuple(p["coeffs"]), float(p["upto"]))
                      for p in d["pieces"]]
            return cls.tabulated_dual(pieces, extend=d.get("extend", True))
        raise ValueError(f"unknown potential kind {kind!r}")

    # basic data ---------------------------------------------------------------
    @property
    def is_power_law(self) -> bool:
        return self.kind in ("power-law", "quadratic")

    @property
    def p(self) -> float:
        return self.exponent

    @property
    def p_dual(self) -> float:
        return self.exponent / (self.exponent - 1.0)

    @property
    def mu(self) -> float:
        """Dual coefficient: R*(xi) = (mu/p') |xi|^p'."""
        return self.coefficient ** (1.0 / (1.0 - self.exponent))

    def coercivity(self, vmax: float = 50.0) -> tuple:
        """Constants (c1, c2) with c1(|v|^p - 1) <= R(v) <= c2(1 + |v|^p)."""
        if self.is_power_law:
            c = self.coefficient / self.exponent
            return c, c
        v = np.linspace(0.0, vmax, 2001)
        r = self.R(v)
        vp = v ** self.exponent
        big = vp > 2.0
        c1 = float(np.min(r[big] / (vp[big] - 1.0)))
        c2 = float(np.max(r / (1.0 + vp)))
        return c1, c2

    # piecewise machinery ------------------------------------------------------------
    def _piece_index(self, x):
        uppers = np.array([p.upto for p in self.pieces[:-1]])
        return np.searchsorted(uppers, x, side="left")

    def _apply(self, method: str, x):
        x = np.asarray(x, dtype=float)
        idx = self._piece_index(x)
        out = np.zeros_like(x)
        for i, piece in enumerate(self.pieces):
            m = idx == i
            if np.any(m):
                out[m] = getattr(piece, method)(x[m])
        return out

    def _slope_breaks(self):
        return np.array([float(p.d1(p.upto)) for p in self.pieces[:-1]])

    def _argmax_slope(self, w):
        """x >= 0 with R*'(x) = w (smallest such x), for w >= 0."""
        w = np.asarray(w, dtype=float)
        breaks = self._slope_breaks()
        idx = np.searchsorted(breaks, w, side="left")
        out = np.zeros_like(w)
        lows = np.concatenate([[0.0], [p.upto for p in self.pieces[:-1]]])
        for i, piece in enumerate(self.pieces):
            m = idx == i
            if not np.any(m):
                continue
            a, b, c = piece.coeffs
            if piece.family == "poly2" and c == 0.0:
                out[m] = lows[i]
            else:
                out[m] = np.clip(piece.slope_inverse(w[m]), lows[i], piece.upto)
        return out

    # R and derivatives -----------------------------------------------------------
    def R(self, v):
        v = np.asarray(v, dtype=float)
        if self.is_power_law:
            out = self.coefficient / self.exponent * np.abs(v) ** self.exponent
        else:
            w = np.abs(v)
            x = self._argmax_slope(w)
            out = x * w - self._apply("value", x)
        return out if out.ndim else float(out)

    def dR(self, v):
        v = np.asarray(v, dtype=float)
        if self.is_power_law:
            out = self.coefficient * np.sign(v) * np.abs(v) ** (self.exponent - 1.0)
        else:
            out = np.sign(v) * self._argmax_slope(np.abs(v))
        return out if out.ndim else float(out)

    def d2R(self, v):
        v = np.asarray(v, dtype=float)
        if self.is_power_law:
            with np.errstate(divide="ignore"):
                out = self.coefficient * (self.exponent - 1.0) * np.abs(v) ** (self.exponent - 2.0)
        else:
            x = self._argmax_slope(np.abs(v))
            with np.errstate(divide="ignore"):
                out = 1.0 / self._apply("d2", x)
        return out if out.ndim else float(out)

    # R* and derivatives ---------------------------------------------------------
    def R_star(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.is_power_law:
            q = self.p_dual
            out = self.mu / q * np.abs(xi) ** q
        else:
            out = self._apply("value", np.abs(xi))
        return out if out.ndim else float(out)

    def dR_star(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.is_power_law:
            out = self.mu * np.sign(xi) * np.abs(xi) ** (self.p_dual - 1.0)
        else:
            out = np.sign(xi) * self._apply("d1", np.abs(xi))
        return out if out.ndim else float(out)

    def d2R_star(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.is_power_law:
            q = self.p_dual
            with np.errstate(divide="ignore"):
                out = self.mu * (q - 1.0) * np.abs(xi) ** (q - 2.0)
        else:
            out = self._apply("d2", np.abs(xi))
        return out if out.ndim else float(out)

    def R_star_increment(self, base, inc):
        """R*(base + inc) - R*(base) for base, inc >= 0, without cancellation."""
        base = np.asarray(base, dtype=float)
        inc = np.asarray(inc, dtype=float)
        if self.is_power_law:
            q = self.p_dual
            with np.errstate(divide="ignore", invalid="ignore"):
                rel = q * np.log1p(inc / base)
                out = self.mu / q * base ** q * np.expm1(rel)
            out = np.where(base > 0, out, self.mu / q * inc ** q)
        else:
            out = self._apply("value", base + inc) - self._apply("value", base)
        return out if out.ndim else float(out)

    def R_star_subdifferential(self, xi: float) -> tuple:
        """Endpoints of the subdifferential of R* at xi (equal where smooth)."""
        if self.is_power_law:
            d = self.dR_star(xi)
            return d, d
        x = abs(xi)
        s = 1.0 if xi >= 0 else -1.0
        for left, right in zip(self.pieces[:-1], self.pieces[1:]):
            if x == left.upto:
                lo, hi = float(left.d1(x)), float(right.d1(x))
                return (s * lo, s * hi) if s > 0 else (s * hi, s * lo)
        d = self.dR_star(xi)
        return d, d

    def R_star_inverse(self, t):
        """Psi(t): the x >= 0 with R*(x) = t."""
        t = np.asarray(t, dtype=float)
        if self.is_power_law:
            q = self.p_dual
            out = (q * np.maximum(t, 0.0) / self.mu) ** (1.0 / q)
        else:
            vals = np.array([float(p.value(p.upto)) for p in self.pieces[:-1]])
            idx = np.searchsorted(vals, t, side="left")
            out = np.zeros_like(t)
            for i, piece in enumerate(self.pieces):
                m = idx == i
                if np.any(m):
                    out[m] = piece.inverse(t[m])
        return out if out.ndim else float(out)

    def R_star_inverse_taylor(self, t, g):
        """Psi(t+g) - Psi(t) - g Psi'(t+g), computed without cancellation."""
        t = np.asarray(t, dtype=float)
        g = np.broadcast_to(np.asarray(g, dtype=float), t.shape)
        s = t + g
        if self.is_power_law:
            b = 1.0 / self.p_dual
            c = (self.p_dual / self.mu) ** b
            out = np.zeros_like(s)
            pos = s > 0
            r = g[pos] / s[pos]
            out[pos] = c * s[pos] ** b * _series_one_minus_power(r, b)
            return out
        psi_s = self.R_star_inverse(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(s > 0, 1.0 / self.dR_star(psi_s), np.inf)
        out = psi_s - self.R_star_inverse(t) - np.where(g > 0, g * d, 0.0)
        return np.maximum(out, 0.0)

    # psi transform -----------------------------------------------------------------
    def psi(self, rho):
        """psi(rho) = rho R(1/rho) for rho > 0; +inf for rho <= 0."""
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(rho > 0, rho * self.R(1.0 / np.where(rho > 0, rho, 1.0)), np.inf)
        return out if out.ndim else float(out)

    def dpsi(self, rho):
        rho = np.asarray(rho, dtype=float)
        w = 1.0 / rho
        out = self.R(w) - w * self.dR(w)
        return out

    def d2psi(self, rho):
        rho = np.asarray(rho, dtype=float)
        w = 1.0 / rho
        return self.d2R(w) * w ** 3

    def psi_star(self, sigma):
        """Dual of psi on sigma <= 0: psi*(sigma) = -Psi(-sigma); +inf for sigma > 0."""
        sigma = np.asarray(sigma, dtype=float)
        out = np.where(sigma <= 0, -self.R_star_inverse(-np.minimum(sigma, 0.0)), np.inf)
        return out if out.ndim else float(out)

    def dpsi_star(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        x = self.R_star_inverse(-np.minimum(sigma, 0.0))
        with np.errstate(divide="ignore"):
            out = 1.0 / self.dR_star(x)
        out = np.where(sigma <= 0, out, np.inf)
        return out if out.ndim else float(out)

    def d2psi_star(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        x = self.R_star_inverse(-np.minimum(sigma, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.d2R_star(x) / self.dR_star(x) ** 3
        out = np.where(sigma <= 0, out, np.inf)
        return out if out.ndim else float(out)


def _quadratic_continuation(piece: DualPiece) -> DualPiece:
    x0 = piece.upto
    v, s, c = float(piece.value(x0)), float(piece.d1(x0)), float(piece.d2(x0))
    c2 = 0.5 * c
    return DualPiece("poly2", (v - s * x0 + c2 * x0 * x0, s - c * x0, c2), math.inf)


def concave_window_dual() -> DissipationPotential:
    """Even dual with a flat-slope window on |eta| in [1, 3].

    R*(eta) = eta^2 on [0,1], 2|eta| - 1 on [1,3], 21 - 8 sqrt(7 - |eta|) on
    [3,6] and a C^2 quadratic beyond.  Paired with the two-valued profile +-2
    it makes M(v, .) concave near xi = 0.
    """
    return DissipationPotential.tabulated_dual([
        DualPiece("poly2", (0.0, 0.0, 1.0), 1.0),
        DualPiece("poly2", (-1.0, 2.0, 0.0), 3.0),
        DualPiece("sqrt", (21.0, 8.0, 7.0), 6.0),
    ])


@dataclass(frozen=True)
class PsiTransform:
    """The one-sided perspective psi(rho) = |rho| R(1/rho) and its dual."""

    potential: DissipationPotential
    branch: str = "+"

    def __post_init__(self):
        if self.branch not in ("+", "-"):
            raise ValueError("branch is '+' or '-'")

    def _s(self, x):
        return np.asarray(x, dtype=float) * (1.0 if self.branch == "+" else -1.0)

    def psi(self, rho):
        return self.potential.psi(self._s(rho))

    def psi_star(self, sigma):
        if np.any(np.asarray(sigma) > 0):
            raise ValueError("psi* is only finite for sigma <= 0")
        return self.potential.psi_star(sigma)

    def dpsi_star(self, sigma):
        # the minus branch mirrors the slope
        s = 1.0 if self.branch == "+" else -1.0
        return s * self.potential.dpsi_star(sigma)

    def d2psi_star(self, sigma):
        s = 1.0 if self.branch == "+" else -1.0
        return s * self.potential.d2psi_star(sigma)

    def brute_force_psi_star(self, sigma: float, s_grid=None) -> float:
        """sup_{s>0} (sigma s - psi(s)) by direct search, for testing."""
        if s_grid is None:
            s_grid = np.logspace(-8, 8, 400001)
        s = np.asarray(s_grid, dtype=float)
        vals = sigma * s - self.potential.psi(s)
        k = int(np.argmax(vals))
        # refine with a parabola through the neighbours in log-s
        if 0 < k < len(s) - 1:
            from scipy.optimize import minimize_scalar

            res = minimize_scalar(lambda ls: -(sigma * math.exp(ls) - float(self.potential.psi(math.exp(ls)))),
                                  bracket=(math.log(s[k - 1]), math.log(s[k]), math.log(s[k + 1])),
                                  tol=1e-14)
            return max(float(vals[k]), -float(res.fun))
        return float(vals[k])


def convex_envelope(x, fx):
    """Vertices of the lower convex hull of sorted samples (monotone chain)."""
    x = np.asarray(x, dtype=float)
    fx = np.asarray(fx, dtype=float)
    if x.size == 0:
        raise ValueError("empty grid")
    if np.any(np.diff(x) <= 0):
        raise ValueError("grid must be strictly increasing")
    hull = []
    for i in range(x.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (fx[i] - fx[a]) - (fx[b] - fx[a]) * (x[i] - x[a])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    idx = np.array(hull)
    return x[idx], fx[idx]


def legendre_transform(x, fx, xi=None):
    """Discrete convex conjugate f*(xi) = max_i (xi x_i - f_i).

    Without xi the breakpoints of f* (the hull slopes) are returned, on which
    f* is exact; f* is piecewise linear in between.  Returns (xi, f*(xi)).
    """
    hx, hf = convex_envelope(x, fx)
    slopes = np.diff(hf) / np.diff(hx) if hx.size > 1 else np.array([])
    if xi is None:
        xi = slopes if slopes.size else np.array([0.0])
    xi = np.asarray(xi, dtype=float)
    k = np.searchsorted(slopes, xi, side="left")
    return xi, xi * hx[k] - hf[k]


def young_fenchel_gap(pot: DissipationPotential, v, xi):
    """R(v) + R*(xi) - v xi >= 0, zero exactly on the graph of dR."""
    return pot.R(v) + pot.R_star(xi) - np.asarray(v) * np.asarray(xi)


def _flow_structures():
    def r3(q, xi):
        lq = np.log(q)
        fac = np.where(np.abs(q - 1) < 1e-12, 1.0, (q - 1) / np.where(lq == 0, 1.0, lq))
        return fac * xi

    return [
        ("quadratic", lambda q: -(1 - q), lambda q, xi: xi),
        ("quartic-weighted", lambda q: -(1 - q),
         lambda q, xi: (xi + xi ** 3) / (1 + (1 - q) ** 2)),
        ("entropic-quadratic", lambda q: np.log(q), r3),
        ("entropic-cosh", lambda q: np.log(q),
         lambda q, xi: 2.0 * np.sqrt(q) * np.sinh(0.5 * xi)),
    ]


def same_flow_check(q=None) -> dict:
    """Check that four energy/dual pairs all generate dq/dt = 1 - q.

    Each structure is (name, DE, d_xi R*).  The cosh structure uses the
    prefactor 4 sqrt(q) in R*, the value for which its vector field is 1 - q.
    """
    if q is None:
        q = np.linspace(0.0, 3.0, 301)[1:]
    q = np.asarray(q, dtype=float)
    report = {"q": q, "fields": {}, "defects": {}}
    for name, dE, dRs in _flow_structures():
        field_ = dRs(q, -dE(q))
        report["fields"][name] = field_
        report["defects"][name] = float(np.max(np.abs(field_ - (1 - q))))
    report["max_defect"] = max(report["defects"].values())
    return report
