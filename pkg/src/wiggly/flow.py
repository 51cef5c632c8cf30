"""Gradient flows on wiggly and effective landscapes with dissipation bookkeeping.

Both flows are integrated with an embedded Dormand-Prince 5(4) pair on an
augmented state (u, int R(u'), int R*(force), int dE/dt), so the energy
dissipation balance can be checked to the accuracy of the integrator rather
than to that of an after-the-fact quadrature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .kinetics import KineticRelation
from .landscape import EnergyLandscape
from .potentials import DissipationPotential

__all__ = [
    "FlowControls",
    "FlowError",
    "Trajectory",
    "rhs_wiggly",
    "integrate_wiggly",
    "integrate_effective",
    "dissipation_functionals",
    "J_functional",
]

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array(_A[6] + [0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


class FlowError(RuntimeError):
    """Integration could not proceed; the message names the time and state."""


@dataclass(frozen=True)
class FlowControls:
    rtol: float = 1e-10
    atol: float = 1e-12
    steps_per_period: float = 20.0
    dt_max: float = 0.05
    dt_min: float = 1e-14
    max_steps: int = 2_000_000

    def scaled(self, factor: float) -> "FlowControls":
        return FlowControls(self.rtol * factor, self.atol * factor, self.steps_per_period,
                            self.dt_max, self.dt_min, self.max_steps)

    def to_dict(self) -> dict:
        return {"rtol": self.rtol, "atol": self.atol, "steps_per_period": self.steps_per_period,
                "dt_max": self.dt_max, "dt_min": self.dt_min, "max_steps": self.max_steps}


@dataclass
class Trajectory:
    t: np.ndarray
    u: np.ndarray
    udot: np.ndarray
    E: np.ndarray
    D_prim_cum: np.ndarray
    D_dual_cum: np.ndarray
    work_cum: np.ndarray
    label: str = ""
    eps: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def D_cum(self) -> np.ndarray:
        return self.D_prim_cum + self.D_dual_cum

    @property
    def T(self) -> float:
        return float(self.t[-1])

    def edb_residual(self) -> float:
        """E(T) + D - E(0) - int dE/dt."""
        return float(self.E[-1] + self.D_cum[-1] - self.E[0] - self.work_cum[-1])

    def edb_relative(self) -> float:
        return abs(self.edb_residual()) / (1.0 + abs(float(self.E[0])))

    def at(self, tq) -> np.ndarray:
        """Cubic Hermite interpolation of u from the node values and rates."""
        tq = np.asarray(tq, dtype=float)
        t = self.t
        i = np.clip(np.searchsorted(t, tq, side="right") - 1, 0, len(t) - 2)
        h = t[i + 1] - t[i]
        s = (tq - t[i]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s ** 2 * (3 - 2 * s)
        h11 = s ** 2 * (s - 1)
        return (h00 * self.u[i] + h10 * h * self.udot[i] + h01 * self.u[i + 1]
                + h11 * h * self.udot[i + 1])

    def columns(self) -> dict:
        return {"t": self.t, "u": self.u, "udot": self.udot, "E": self.E, "D_cum": self.D_cum,
                "D_prim_cum": self.D_prim_cum, "D_dual_cum": self.D_dual_cum}

    def to_csv(self, path) -> None:
        cols = self.columns()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(cols))
            for row in zip(*cols.values()):
                w.writerow([repr(float(x)) for x in row])


def rhs_wiggly(land: EnergyLandscape, pot: DissipationPotential, t, u):
    """Velocity u' = dR*(-D_u E_eps(t, u))."""
    return pot.dR_star(land.force(t, u))


def _dp45(aug_full, t0: float, t1: float, y0: np.ndarray, cap, controls: FlowControls,
          nodes: list):
    """Integrate aug on [t0, t1]; append (t, y, f) at accepted steps to nodes."""
    tm = 0.5 * (t0 + t1)

    def aug(t, y):
        # the load rate is piecewise constant; read it inside the current segment
        return aug_full(t, y, tm)

    t, y = t0, y0.copy()
    k1 = aug(t, y)
    dt = min(cap(y, k1), controls.dt_max, t1 - t0, 1e-3 * max(t1 - t0, 1e-3))
    steps = 0
    while t < t1:
        if steps > controls.max_steps:
            raise FlowError(f"step budget exhausted at t={t:.6g}, u={y[0]:.6g}")
        dt = min(dt, t1 - t, cap(y, k1), controls.dt_max)
        if dt < controls.dt_min:
            raise FlowError(f"step size underflow at t={t:.6g}, u={y[0]:.6g}")
        ks = [k1]
        for i in range(1, 7):
            yi = y + dt * sum(a * k for a, k in zip(_A[i], ks))
            ks.append(aug(t + _C[i] * dt, yi))
        y5 = y + dt * sum(b * k for b, k in zip(_B5, ks))
        err = dt * sum((b5 - b4) * k for b5, b4, k in zip(_B5, _B4, ks))
        scale = controls.atol + controls.rtol * np.maximum(np.abs(y), np.abs(y5))
        en = float(np.sqrt(np.mean((err / scale) ** 2)))
        steps += 1
        if en <= 1.0 or dt <= controls.dt_min * 1.0001:
            t = t1 if t1 - (t + dt) <= 1e-15 * max(1.0, abs(t1)) else t + dt
            y = y5
            k1 = ks[6]
            nodes.append((t, y.copy(), k1.copy()))
            fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
        else:
            fac = max(0.2, 0.9 * en ** -0.25)
        dt *= fac
    return y


def _run(aug, energy, u0: float, T: float, breaks, cap, controls: FlowControls):
    cuts = sorted({0.0, T} | {b for b in breaks if 0.0 < b < T})
    y = np.array([u0, 0.0, 0.0, 0.0])
    k = aug(0.0, y, 0.5 * cuts[1])
    nodes = [(0.0, y.copy(), k)]
    for a, b in zip(cuts[:-1], cuts[1:]):
        y = _dp45(aug, a, b, y, cap, controls, nodes)
    t = np.array([n[0] for n in nodes])
    Y = np.array([n[1] for n in nodes])
    F = np.array([n[2] for n in nodes])
    # drop duplicated segment endpoints, keep the last rate (right limit)
    keep = np.append(np.diff(t) > 0, True)
    t, Y, F = t[keep], Y[keep], F[keep]
    E = np.array([energy(ti, ui) for ti, ui in zip(t, Y[:, 0])])
    return t, Y, F, E


def integrate_wiggly(land: EnergyLandscape, pot: DissipationPotential, u0: float, T: float,
                     controls: FlowControls | None = None) -> Trajectory:
    """Solve dR(u') = -D_u E_eps(t, u), u(0) = u0, on [0, T]."""
    controls = controls or FlowControls()
    if land.profile.is_discrete and not land.profile.is_zero:
        raise ValueError("a discrete profile gives a discontinuous wiggle force; "
                         "use a continuous profile for the eps-flow")
    eps = land.eps

    def aug(t, y, tm):
        u = y[0]
        f = float(land.force(t, u))
        v = float(pot.dR_star(f))
        return np.array([v, float(pot.R(v)), float(pot.R_star(f)), float(land.dtE(tm, u))])

    def cap(y, k):
        return eps / (controls.steps_per_period * (abs(k[0]) + eps))

    t, Y, F, E = _run(aug, lambda t, u: float(land.E(t, u)), u0, T, land.load.breakpoints,
                      cap, controls)
    return Trajectory(t, Y[:, 0], F[:, 0], E, Y[:, 1], Y[:, 2], Y[:, 3], label="wiggly",
                      eps=eps, meta={"controls": controls.to_dict()})


def integrate_effective(rel: KineticRelation, land: EnergyLandscape, u0: float, T: float,
                        controls: FlowControls | None = None) -> Trajectory:
    """Solve u' = K(-D_u E_0(t, u)) with K = dR_eff* the effective kinetic relation.

    The primal rate R_eff(u') is evaluated through Fenchel equality as
    f K(f) - R_eff*(f), which is exact on the graph of dR_eff.
    """
    controls = controls or FlowControls()
    if not land.wiggle_is_uniform:
        raise ValueError("the effective flow needs a wiggle amplitude independent of u")

    def aug(t, y, tm):
        u = y[0]
        f = float(land.force0(t, u))
        v = float(rel.K(f))
        rs = float(rel.R_eff_star(f))
        return np.array([v, f * v - rs, rs, float(land.dtE(tm, u))])

    def cap(y, k):
        return math.inf

    t, Y, F, E = _run(aug, lambda t, u: float(land.E0(t, u)), u0, T, land.load.breakpoints,
                      cap, controls)
    return Trajectory(t, Y[:, 0], F[:, 0], E, Y[:, 1], Y[:, 2], Y[:, 3], label="effective",
                      meta={"controls": controls.to_dict()})


def dissipation_functionals(traj: Trajectory) -> tuple:
    """(D, D_prim, D_dual) over the whole trajectory."""
    return float(traj.D_cum[-1]), float(traj.D_prim_cum[-1]), float(traj.D_dual_cum[-1])


def J_functional(t, u, udot, pot: DissipationPotential, land: EnergyLandscape, xi) -> float:
    """int R(u') + R*(xi(t) - Omega_eps(u)) dt by the trapezoid rule on the samples.

    xi is a callable of t or a constant.
    """
    t = np.asarray(t, dtype=float)
    xs = np.asarray(xi(t) if callable(xi) else np.full_like(t, float(xi)), dtype=float)
    vals = np.asarray(pot.R(np.asarray(udot))) + np.asarray(
        pot.R_star(xs - np.asarray(land.wiggle_force(np.asarray(u)))))
    return float(np.trapezoid(vals, t) if hasattr(np, "trapezoid") else np.trapz(vals, t))
