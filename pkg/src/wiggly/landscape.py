"""Wiggly energy landscapes E(t, u) = Phi(u) - l(t) u + eps kappa(u, u/eps)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .profiles import WigglyProfile

__all__ = ["EnergyLandscape", "PiecewiseLinearLoad"]


@dataclass(frozen=True)
class PiecewiseLinearLoad:
    """Load l(t) interpolating (times, values); constant outside the table."""

    times: tuple
    values: tuple

    def __post_init__(self):
        t = tuple(float(x) for x in self.times)
        v = tuple(float(x) for x in self.values)
        if len(t) != len(v) or not t:
            raise ValueError("load table needs matching, nonempty times and values")
        if any(b <= a for a, b in zip(t[:-1], t[1:])):
            raise ValueError("load times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, value: float) -> "PiecewiseLinearLoad":
        return cls((0.0,), (value,))

    @classmethod
    def ramp(cls, slope: float, t_end: float, start: float = 0.0) -> "PiecewiseLinearLoad":
        return cls((0.0, t_end), (start, start + slope * t_end))

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    def rate(self, t):
        """Right derivative of the load."""
        t = np.asarray(t, dtype=float)
        if len(self.times) == 1:
            return np.zeros_like(t) if t.ndim else 0.0
        slopes = np.diff(self.values) / np.diff(self.times)
        i = np.searchsorted(self.times, t, side="right") - 1
        inside = (i >= 0) & (i < len(slopes))
        out = np.where(inside, slopes[np.clip(i, 0, len(slopes) - 1)], 0.0)
        return out if out.ndim else float(out)

    @property
    def breakpoints(self) -> tuple:
        return self.times

    def to_dict(self) -> dict:
        return {"times": list(self.times), "values": list(self.values)}


@dataclass(frozen=True)
class EnergyLandscape:
    """Phi is a polynomial (coefficients in increasing degree); the wiggle is
    kappa(u, y) = amplitude(u) * k(y) with k the antiderivative of the profile
    and amplitude(u) another polynomial (default 1)."""

    phi: tuple
    load: PiecewiseLinearLoad
    profile: WigglyProfile
    eps: float
    amplitude: tuple = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(float(c) for c in self.phi))
        object.__setattr__(self, "amplitude", tuple(float(c) for c in self.amplitude))
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    def with_eps(self, eps: float) -> "EnergyLandscape":
        return EnergyLandscape(self.phi, self.load, self.profile, eps, self.amplitude)

    @property
    def wiggle_is_uniform(self) -> bool:
        return all(c == 0.0 for c in self.amplitude[1:])

    def _poly(self, coeffs, u, deriv=0):
        c = np.polynomial.polynomial.polyder(coeffs, deriv) if deriv else np.asarray(coeffs)
        if len(c) == 0:
            return 0.0 * np.asarray(u)
        return np.polynomial.polynomial.polyval(u, c)

    def Phi(self, u):
        return self._poly(self.phi, u)

    def dPhi(self, u):
        return self._poly(self.phi, u, 1)

    def amp(self, u):
        return self._poly(self.amplitude, u)

    def kappa(self, u, y):
        return self.amp(u) * self.profile.antiderivative(y)

    def d_u_kappa(self, u, y):
        return self._poly(self.amplitude, u, 1) * self.profile.antiderivative(y)

    def d_y_kappa(self, u, y):
        return self.amp(u) * self.profile.p(y)

    def profile_at(self, u: float) -> WigglyProfile:
        return self.profile.scaled(float(self.amp(u)))

    def E0(self, t, u):
        return self.Phi(u) - self.load(t) * u

    def E(self, t, u):
        return self.E0(t, u) + self.eps * self.kappa(u, u / self.eps)

    def wiggle_force(self, u):
        """Omega_eps(u) = d_y kappa(u, u/eps)."""
        return self.d_y_kappa(u, u / self.eps)

    def force(self, t, u):
        """-D_u E_eps(t, u)."""
        y = u / self.eps
        return (-self.dPhi(u) + self.load(t) - self.eps * self.d_u_kappa(u, y)
                - self.d_y_kappa(u, y))

    def force0(self, t, u):
        """-D_u E_0(t, u)."""
        return -self.dPhi(u) + self.load(t)

    def dtE(self, t, u):
        return -self.load.rate(t) * u

    def to_dict(self) -> dict:
        return {"phi": list(self.phi), "load": self.load.to_dict(),
                "eps": self.eps, "amplitude": list(self.amplitude)}
