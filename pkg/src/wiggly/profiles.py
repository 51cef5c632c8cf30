"""Periodic mean-zero force profiles and quadrature rules adapted to them.

A profile is the y-derivative of the wiggle part of the energy, so it is
1-periodic with zero mean.  Integrals of the form  int_0^1 f(p(y)) dy  show
up everywhere in the kinetics and contact code, often with integrands that
blow up where p(y) approaches a level (the maximum, or a crossing).  The
rules built here put geometrically graded Gauss panels around such points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

__all__ = ["WigglyProfile", "QuadRule", "two_valued"]

_GL_N = 20
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_N)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W
_LEVELS = 48          # graded panels per focused end, ratio 2
_INNER_POWER = 6      # substitution x = s*tau**6 on the innermost panel


@dataclass(frozen=True)
class QuadRule:
    """Nodes y, weights w and cached profile data p, p_max - p, p - p_min."""

    y: np.ndarray
    w: np.ndarray
    p: np.ndarray
    gap: np.ndarray
    rise: np.ndarray
    exact: bool = False

    def integrate(self, values) -> float:
        return float(np.dot(self.w, values))


def _graded_offsets(length: float, focused: bool):
    """Offsets in [0, length] with weights, graded towards 0 if focused."""
    if not focused:
        edges = np.linspace(0.0, length, 5)
        xs = (edges[:-1, None] + np.diff(edges)[:, None] * _GL_X).ravel()
        ws = (np.diff(edges)[:, None] * _GL_W).ravel()
        return xs, ws
    edges = length * 2.0 ** -np.arange(_LEVELS + 1)[::-1]
    lo, hi = edges[:-1], edges[1:]
    xs = (lo[:, None] + (hi - lo)[:, None] * _GL_X).ravel()
    ws = ((hi - lo)[:, None] * _GL_W).ravel()
    s = edges[0]
    tau = _GL_X
    inner_x = s * tau ** _INNER_POWER
    inner_w = s * _INNER_POWER * tau ** (_INNER_POWER - 1) * _GL_W
    return np.concatenate([inner_x, xs]), np.concatenate([inner_w, ws])


@lru_cache(maxsize=64)
def _segment_template(length: float, left: bool, right: bool):
    half = 0.5 * length
    xl, wl = _graded_offsets(half, left)
    xr, wr = _graded_offsets(half, right)
    return xl, wl, xr, wr


@dataclass(frozen=True)
class WigglyProfile:
    """1-periodic, mean-zero force profile y -> p(y).

    kinds:
      sinusoidal(amplitude)        p = a sin(2 pi y)
      discrete(values, weights)    p takes values[i] on a set of measure weights[i]
      peaked(p_max, alpha)         even about 0, p_max - p ~ c |y|^alpha at the top
      tent(amplitude)              triangle wave, the peaked kind with alpha = 1
      tabulated(samples)           periodic linear interpolation of samples at i/n
    """

    kind: str
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(
            tuple(float(x) for x in v) if isinstance(v, (list, tuple, np.ndarray)) else float(v)
            for v in self.params))
        k = self.kind
        if k == "sinusoidal":
            if not self.params[0] >= 0:
                raise ValueError("amplitude must be nonnegative")
        elif k == "discrete":
            vals, wts = self.params
            if len(vals) != len(wts) or not vals:
                raise ValueError("values and weights must have equal nonzero length")
            if min(wts) <= 0 or abs(sum(wts) - 1.0) > 1e-12:
                raise ValueError("weights must be positive and sum to 1")
            if abs(math.fsum(v * w for v, w in zip(vals, wts))) > 1e-12:
                raise ValueError("discrete profile must have zero mean")
        elif k in ("peaked", "tent"):
            if not self.params[0] >= 0:
                raise ValueError("peak height must be nonnegative")
            if k == "peaked" and not self.params[1] > 0:
                raise ValueError("peak exponent must be positive")
        elif k == "tabulated":
            s = np.asarray(self.params[0])
            if s.size < 3:
                raise ValueError("need at least three samples")
            if abs(s.mean()) > 1e-12 * (1 + np.abs(s).max()):
                # shift to zero mean; the trapezoid mean of a periodic linear
                # interpolant is the sample mean
                object.__setattr__(self, "params", (tuple(float(x) for x in s - s.mean()),))
        else:
            raise ValueError(f"unknown profile kind {k!r}")

    # constructors -------------------------------------------------------------
    @classmethod
    def sinusoidal(cls, amplitude: float) -> "WigglyProfile":
        return cls("sinusoidal", (amplitude,))

    @classmethod
    def discrete(cls, values, weights) -> "WigglyProfile":
        return cls("discrete", (tuple(values), tuple(weights)))

    @classmethod
    def peaked(cls, p_max: float, alpha: float) -> "WigglyProfile":
        return cls("peaked", (p_max, alpha))

    @classmethod
    def tent(cls, amplitude: float) -> "WigglyProfile":
        return cls("tent", (amplitude,))

    @classmethod
    def tabulated(cls, samples) -> "WigglyProfile":
        return cls("tabulated", (tuple(samples),))

    @classmethod
    def zero(cls) -> "WigglyProfile":
        return cls("discrete", ((0.0,), (1.0,)))

    def to_dict(self) -> dict:
        k = self.kind
        if k == "sinusoidal":
            return {"kind": k, "amplitude": self.params[0]}
        if k == "discrete":
            return {"kind": k, "values": list(self.params[0]), "weights": list(self.params[1])}
        if k == "peaked":
            return {"kind": k, "p_max": self.params[0], "alpha": self.params[1]}
        if k == "tent":
            return {"kind": k, "amplitude": self.params[0]}
        return {"kind": k, "samples": list(self.params[0])}

    @classmethod
    def from_dict(cls, d: dict) -> "WigglyProfile":
        k = d.get("kind")
        if k == "sinusoidal":
            return cls.sinusoidal(d["amplitude"])
        if k == "discrete":
            return cls.discrete(d["values"], d["weights"])
        if k == "two-valued":
            return two_valued(d["amplitude"])
        if k == "peaked":
            return cls.peaked(d["p_max"], d["alpha"])
        if k == "tent":
            return cls.tent(d["amplitude"])
        if k == "tabulated":
            return cls.tabulated(d["samples"])
        if k == "zero":
            return cls.zero()
        raise ValueError(f"unknown profile kind {k!r}")

    def scaled(self, factor: float) -> "WigglyProfile":
        k = self.kind
        if k in ("sinusoidal", "tent"):
            return WigglyProfile(k, (self.params[0] * factor,))
        if k == "discrete":
            return WigglyProfile(k, (tuple(v * factor for v in self.params[0]), self.params[1]))
        if k == "peaked":
            return WigglyProfile(k, (self.params[0] * factor, self.params[1]))
        return WigglyProfile(k, (tuple(v * factor for v in self.params[0]),))

    # shape data ------------------------------------------------------------------
    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"

    @property
    def is_zero(self) -> bool:
        return self.p_max == 0.0 and self.p_min == 0.0

    def _peak(self):
        if self.kind == "tent":
            return self.params[0], 1.0
        return self.params

    @property
    def p_max(self) -> float:
        k = self.kind
        if k == "sinusoidal":
            return self.params[0]
        if k == "discrete":
            return max(self.params[0])
        if k in ("peaked", "tent"):
            return self._peak()[0]
        return max(self.params[0])

    @property
    def p_min(self) -> float:
        k = self.kind
        if k == "sinusoidal":
            return -self.params[0]
        if k == "discrete":
            return min(self.params[0])
        if k in ("peaked", "tent"):
            pm, a = self._peak()
            return -pm * a
        return min(self.params[0])

    @property
    def z_star(self) -> float:
        """Location of the maximum."""
        k = self.kind
        if k == "sinusoidal":
            return 0.25
        if k in ("peaked", "tent"):
            return 0.0
        if k == "discrete":
            i = int(np.argmax(self.params[0]))
            return self._cell_edges()[i] + 0.5 * self.params[1][i]
        s = self.params[0]
        return int(np.argmax(s)) / len(s)

    @property
    def z_low(self) -> float:
        k = self.kind
        if k == "sinusoidal":
            return 0.75
        if k in ("peaked", "tent"):
            return 0.5
        if k == "discrete":
            i = int(np.argmin(self.params[0]))
            return self._cell_edges()[i] + 0.5 * self.params[1][i]
        s = self.params[0]
        return int(np.argmin(s)) / len(s)

    @property
    def alpha(self):
        """Exponent of p_max - p(y) ~ c |y - z*|^alpha, or None if undefined."""
        k = self.kind
        if k == "sinusoidal":
            return 2.0 if self.params[0] > 0 else None
        if k in ("peaked", "tent"):
            return self._peak()[1]
        if k == "tabulated":
            return 1.0 if self._tab_slopes_at_max() is not None else None
        return None

    @property
    def c_star(self):
        k = self.kind
        if k == "sinusoidal":
            return 2.0 * math.pi ** 2 * self.params[0] if self.params[0] > 0 else None
        if k in ("peaked", "tent"):
            pm, a = self._peak()
            return pm * (a + 1.0) * 2.0 ** a
        if k == "tabulated":
            sl = self._tab_slopes_at_max()
            if sl is None:
                return None
            # the two one-sided slopes combine harmonically in the log law
            return 2.0 / (1.0 / sl[0] + 1.0 / sl[1])
        return None

    def _tab_slopes_at_max(self):
        s = np.asarray(self.params[0])
        n = s.size
        i = int(np.argmax(s))
        left = (s[i] - s[i - 1]) * n
        right = (s[i] - s[(i + 1) % n]) * n
        if left <= 0 or right <= 0:
            return None
        return left, right

    @property
    def kinks(self) -> tuple:
        """Points in [0, 1) where p is not smooth."""
        k = self.kind
        if k == "sinusoidal":
            return ()
        if k == "discrete":
            return tuple(self._cell_edges()[:-1])
        if k in ("peaked", "tent"):
            return (0.0, 0.5) if self._peak()[1] != 2.0 or k == "tent" else (0.5,)
        n = len(self.params[0])
        return tuple(i / n for i in range(n))

    def _cell_edges(self):
        return np.concatenate([[0.0], np.cumsum(self.params[1])])

    # pointwise evaluation --------------------------------------------------------------
    def _tab(self, y):
        s = np.asarray(self.params[0])
        n = s.size
        t = np.mod(y, 1.0) * n
        i = np.minimum(np.floor(t).astype(int), n - 1)
        f = t - i
        return s[i], s[(i + 1) % n], f, n

    def __call__(self, y):
        return self.p(y)

    def p(self, y):
        y = np.asarray(y, dtype=float)
        k = self.kind
        if k == "sinusoidal":
            out = self.params[0] * np.sin(2.0 * np.pi * y)
        elif k == "discrete":
            edges = self._cell_edges()
            idx = np.clip(np.searchsorted(edges, np.mod(y, 1.0), side="right") - 1, 0,
                          len(self.params[0]) - 1)
            out = np.asarray(self.params[0])[idx]
        elif k in ("peaked", "tent"):
            out = self.p_max - np.asarray(self.gap_from_max(y))
        else:
            a, b, f, _ = self._tab(y)
            out = a + f * (b - a)
        return out if out.ndim else float(out)

    @staticmethod
    def _reduce(r):
        return r - np.round(r)

    def gap_from_max(self, y, offset=0.0):
        """p_max - p(y + offset), computed without cancellation near the maximum.

        Passing a node as anchor y plus a small offset keeps offsets far below
        the spacing of floats near y.
        """
        r = self._reduce(self._reduce(np.asarray(y, dtype=float) - self.z_star) + offset)
        out = self._gap_rel(np.asarray(r, dtype=float))
        return out if out.ndim else float(out)

    def rise_from_min(self, y, offset=0.0):
        """p(y + offset) - p_min, computed without cancellation near the minimum."""
        r = self._reduce(self._reduce(np.asarray(y, dtype=float) - self.z_low) + offset)
        out = self._rise_rel(np.asarray(r, dtype=float))
        return out if out.ndim else float(out)

    def _gap_rel(self, r):
        k = self.kind
        if k == "sinusoidal":
            return 2.0 * self.params[0] * np.sin(np.pi * r) ** 2
        if k in ("peaked", "tent"):
            pm, a = self._peak()
            return pm * (a + 1.0) * (2.0 * np.abs(r)) ** a
        return self.p_max - np.asarray(self.p(self.z_star + r))

    def _rise_rel(self, r):
        k = self.kind
        if k == "sinusoidal":
            return 2.0 * self.params[0] * np.sin(np.pi * r) ** 2
        if k in ("peaked", "tent"):
            pm, a = self._peak()
            # distance to the top is 1/2 - |r|
            with np.errstate(divide="ignore"):
                return -pm * (a + 1.0) * np.expm1(a * np.log1p(-2.0 * np.abs(r)))
        return np.asarray(self.p(self.z_low + r)) - self.p_min

    def dp(self, y):
        y = np.asarray(y, dtype=float)
        k = self.kind
        if k == "sinusoidal":
            out = 2.0 * np.pi * self.params[0] * np.cos(2.0 * np.pi * y)
        elif k == "discrete":
            out = np.zeros_like(y)
        elif k in ("peaked", "tent"):
            pm, a = self._peak()
            r = y - np.round(y)
            d = np.abs(r)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = -np.sign(r) * pm * (a + 1.0) * a * 2.0 ** a * d ** (a - 1.0)
            out = np.where(d > 0, out, 0.0)
        else:
            a, b, f, n = self._tab(y)
            out = (b - a) * n
        return out if out.ndim else float(out)

    def d2p(self, y):
        y = np.asarray(y, dtype=float)
        k = self.kind
        if k == "sinusoidal":
            out = -4.0 * np.pi ** 2 * self.params[0] * np.sin(2.0 * np.pi * y)
        elif k in ("peaked", "tent"):
            pm, a = self._peak()
            d = np.abs(y - np.round(y))
            with np.errstate(divide="ignore", invalid="ignore"):
                out = -pm * (a + 1.0) * a * (a - 1.0) * 2.0 ** a * d ** (a - 2.0)
            out = np.where(d > 0, out, 0.0 if a >= 2 else -np.inf)
        else:
            out = np.zeros_like(y)
        return out if out.ndim else float(out)

    def antiderivative(self, y):
        """k(y) = int_0^y p, which is 1-periodic because p has zero mean."""
        y = np.asarray(y, dtype=float)
        k = self.kind
        n_per = np.floor(y)
        t = y - n_per
        if k == "sinusoidal":
            out = self.params[0] * (1.0 - np.cos(2.0 * np.pi * y)) / (2.0 * np.pi)
        elif k == "discrete":
            edges = self._cell_edges()
            vals = np.asarray(self.params[0])
            cum = np.concatenate([[0.0], np.cumsum(vals * np.asarray(self.params[1]))])
            idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(vals) - 1)
            out = cum[idx] + vals[idx] * (t - edges[idx])
        elif k in ("peaked", "tent"):
            pm, a = self._peak()
            amp = pm * (a + 1.0) / 2.0

            def half(x):
                return (amp * x - 2.0 * amp * 2.0 ** a * x ** (a + 1.0) / (a + 1.0)
                        - amp * (a - 1.0) / (a + 1.0) * x)

            out = np.where(t <= 0.5, half(np.minimum(t, 0.5)), -half(np.minimum(1.0 - t, 0.5)))
        else:
            s = np.asarray(self.params[0])
            n = s.size
            cell = (s + np.roll(s, -1)) / (2.0 * n)
            cum = np.concatenate([[0.0], np.cumsum(cell)])
            a, b, f, _ = self._tab(t)
            i = np.minimum(np.floor(t * n).astype(int), n - 1)
            out = cum[i] + (a * f + 0.5 * (b - a) * f * f) / n
        return out if out.ndim else float(out)

    # level sets -----------------------------------------------------------------
    def level_crossings(self, level: float) -> list:
        """Points in [0, 1) where p crosses the value `level` (p_min < level < p_max)."""
        if self.is_discrete:
            return []
        base = np.linspace(0.0, 1.0, 4097)
        extra = np.array([self.z_star, self.z_low] + list(self.kinks))
        grid = np.unique(np.concatenate([base, extra % 1.0, [1.0]]))
        vals = self.p(grid) - level
        out = []
        for i in range(grid.size - 1):
            a, b = vals[i], vals[i + 1]
            if a == 0.0:
                out.append(float(grid[i]))
            elif a * b < 0:
                out.append(float(brentq(lambda y: float(self.p(y)) - level,
                                        grid[i], grid[i + 1], xtol=1e-16, rtol=1e-15)))
        return sorted(set(x % 1.0 for x in out))

    # quadrature --------------------------------------------------------------------
    def rule(self, level=None) -> QuadRule:
        """Quadrature rule on [0, 1) adapted to integrands singular where p = level.

        level None: plain rule with breaks at kinks and extrema.
        level >= p_max: graded towards the maximizer.
        level <= p_min: graded towards the minimizer.
        otherwise graded towards the crossings (and the extrema when close).
        """
        if self.is_discrete:
            return self._discrete_rule()
        foci = []
        if level is not None:
            pm, pl = self.p_max, self.p_min
            span = max(pm - pl, 1e-300)
            if level >= pm:
                foci = [self.z_star]
            elif level <= pl:
                foci = [self.z_low]
            else:
                foci = list(self.level_crossings(level))
                if pm - level < 1e-3 * span:
                    foci.append(self.z_star)
                if level - pl < 1e-3 * span:
                    foci.append(self.z_low)
        return self._rule_cached(tuple(sorted(round(f % 1.0, 17) for f in foci)))

    @lru_cache(maxsize=256)
    def _rule_cached(self, foci: tuple) -> QuadRule:
        breaks = {0.0, self.z_star % 1.0, self.z_low % 1.0}
        breaks.update(k % 1.0 for k in self.kinks)
        breaks.update(foci)
        b = np.array(sorted(breaks) + [1.0])
        fset = set(foci)
        if self.kind in ("peaked", "tent"):
            # fractional powers of the distance sit at the kinks
            fset.update(k % 1.0 for k in self.kinks)
        if 0.0 in fset:
            fset.add(1.0)
        anchors, offs, ws = [], [], []
        for lo, hi in zip(b[:-1], b[1:]):
            if hi - lo <= 0:
                continue
            # offsets are measured from the nearer end so small ones stay exact
            xl, wl, xr, wr = _segment_template(float(hi - lo), lo in fset, hi in fset)
            anchors += [np.full_like(xl, lo), np.full_like(xr, hi)]
            offs += [xl, -xr]
            ws += [wl, wr]
        anchor = np.concatenate(anchors)
        off = np.concatenate(offs)
        y = anchor + off
        return QuadRule(y, np.concatenate(ws), np.asarray(self.p(y)),
                        np.asarray(self.gap_from_max(anchor, off)),
                        np.asarray(self.rise_from_min(anchor, off)))

    @lru_cache(maxsize=1)
    def _discrete_rule(self) -> QuadRule:
        vals = np.asarray(self.params[0])
        w = np.asarray(self.params[1])
        edges = self._cell_edges()
        y = edges[:-1] + 0.5 * w
        return QuadRule(y, w, vals, self.p_max - vals, vals - self.p_min, exact=True)

    def mean(self) -> float:
        return self.rule().integrate(self.rule().p)


def two_valued(amplitude: float) -> WigglyProfile:
    """Profile of the wiggle a|y| (periodized): values +a and -a, each on half the period."""
    return WigglyProfile.discrete([amplitude, -amplitude], [0.5, 0.5])
