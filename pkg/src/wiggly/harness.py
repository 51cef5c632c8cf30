"""Epsilon sweeps comparing wiggly flows with the effective flow, and
recovery sequences for the parametrized dissipation functional."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .contact import M_lagrange, WFunction, solve_H
from .flow import FlowControls, Trajectory, integrate_effective, integrate_wiggly
from .kinetics import KineticRelation, fit_power_law
from .landscape import EnergyLandscape, PiecewiseLinearLoad
from .potentials import DissipationPotential
from .profiles import WigglyProfile

__all__ = [
    "DEFAULT_EPS",
    "SweepSetup",
    "SweepReport",
    "RecoveryPath",
    "eps_sweep",
    "build_recovery_sequence",
    "lazy_path",
    "gamma_gap",
    "primal_dual_split",
    "effective_dissipation_two_ways",
]

DEFAULT_EPS = (0.2, 0.1, 0.05, 0.025, 0.0125)


@dataclass(frozen=True)
class SweepSetup:
    potential: DissipationPotential
    profile: WigglyProfile
    phi: tuple = (0.0,)
    load: PiecewiseLinearLoad = field(default_factory=lambda: PiecewiseLinearLoad.ramp(2.0, 1.0))
    u0: float = 0.0
    T: float = 1.0
    controls: FlowControls = field(default_factory=FlowControls)
    amplitude: tuple = (1.0,)

    def landscape(self, eps: float) -> EnergyLandscape:
        return EnergyLandscape(self.phi, self.load, self.profile, eps, self.amplitude)


@dataclass
class SweepReport:
    eps: list
    sup_error: list
    energy_error: list
    initial_energy_gap: list
    D_eps: list
    D_gap: list
    D_prim: list
    D_dual: list
    edb_relative: list
    steps: list
    D0: float
    D0_prim: float
    D0_dual: float
    D0_edb_relative: float
    D0_two_way_gap: float
    rates: dict
    flags: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)

    def to_csv(self, path) -> None:
        cols = ["eps", "sup_error", "energy_error", "initial_energy_gap", "D_eps", "D_gap",
                "D_prim", "D_dual", "edb_relative", "steps"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for row in zip(*(getattr(self, c) for c in cols)):
                w.writerow([repr(x) for x in row])


def _strictly_decreasing(xs) -> bool:
    return all(b < a for a, b in zip(xs[:-1], xs[1:]))


def _wiggly_run(args):
    setup, eps = args
    return integrate_wiggly(setup.landscape(eps), setup.potential, setup.u0, setup.T,
                            setup.controls)


def effective_dissipation_two_ways(rel: KineticRelation, land: EnergyLandscape,
                                   traj0: Trajectory) -> dict:
    """int M(u', force) dt and int R_eff(u') + R_eff*(force) dt on the same nodes."""
    pot, prof = rel.potential, rel.profile
    wf = WFunction(pot, prof)
    forces = np.asarray(land.force0(traj0.t, traj0.u), dtype=float)
    m = np.array([M_lagrange(pot, prof, v, f, wf=wf).M for v, f in zip(traj0.udot, forces)])
    meff = np.array([float(rel.R_eff(v)) + float(rel.R_eff_star(f))
                     for v, f in zip(traj0.udot, forces)])
    via_M = float(np.trapezoid(m, traj0.t))
    via_eff = float(np.trapezoid(meff, traj0.t))
    return {"via_M": via_M, "via_R_eff": via_eff, "pointwise_max": float(np.max(np.abs(m - meff))),
            "gap": abs(via_M - via_eff)}


def eps_sweep(setup: SweepSetup, eps_list=DEFAULT_EPS, jobs: int = 1,
              grid_points: int = 4001) -> SweepReport:
    eps_list = [float(e) for e in eps_list]
    if not _strictly_decreasing(eps_list):
        raise ValueError("the eps list must be strictly decreasing")
    rel = KineticRelation(setup.potential, setup.profile)
    land0 = setup.landscape(eps_list[0])
    traj0 = integrate_effective(rel, land0, setup.u0, setup.T, setup.controls)
    args = [(setup, e) for e in eps_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            trajs = list(ex.map(_wiggly_run, args))
    else:
        trajs = [_wiggly_run(a) for a in args]

    D0 = float(traj0.D_cum[-1])
    sup, energy, init, D, gap, Dp, Dd, edb, steps = ([] for _ in range(9))
    for eps, tr in zip(eps_list, trajs):
        land = setup.landscape(eps)
        tg = np.union1d(np.union1d(tr.t, traj0.t), np.linspace(0.0, setup.T, grid_points))
        ue, u0 = tr.at(tg), traj0.at(tg)
        sup.append(float(np.max(np.abs(ue - u0))))
        energy.append(float(np.max(np.abs(land.E(tg, ue) - land.E0(tg, u0)))))
        init.append(float(abs(land.E(0.0, setup.u0) - land.E0(0.0, setup.u0))))
        D.append(float(tr.D_cum[-1]))
        gap.append(abs(D[-1] - D0))
        Dp.append(float(tr.D_prim_cum[-1]))
        Dd.append(float(tr.D_dual_cum[-1]))
        edb.append(tr.edb_relative())
        steps.append(len(tr.t) - 1)

    two = effective_dissipation_two_ways(rel, land0, traj0)
    rates = {}
    for name, ys in (("sup_error", sup), ("D_gap", gap), ("energy_error", energy)):
        ok = [(e, y) for e, y in zip(eps_list, ys) if y > 0]
        rates[name] = fit_power_law(*map(np.array, zip(*ok)))[0] if len(ok) >= 2 else math.nan
    tail = sup[-3:]
    flags = {
        "finite": bool(np.all(np.isfinite(sup + gap + energy))),
        "sup_tail_strictly_decreasing": _strictly_decreasing(tail),
        "sup_tail_nonincreasing": all(b <= a for a, b in zip(tail[:-1], tail[1:])),
        "D_gap_decreasing": _strictly_decreasing(gap),
    }
    return SweepReport(eps_list, sup, energy, init, D, gap, Dp, Dd, edb, steps, D0,
                       float(traj0.D_prim_cum[-1]), float(traj0.D_dual_cum[-1]),
                       traj0.edb_relative(), two["gap"], rates, flags)


# recovery sequences -----------------------------------------------------------------------
@dataclass
class RecoveryPath:
    t: np.ndarray
    u: np.ndarray
    udot: np.ndarray
    uhat: np.ndarray
    windings: list
    eps: float

    @property
    def sup_distance(self) -> float:
        return float(np.max(np.abs(self.u - self.uhat)))


class _CellShape:
    """Quasi-periodic cumulative A of the optimal inverse slope: A(y + 1) = A(y) + 1."""

    def __init__(self, pot, prof, V, Xi, n=8192):
        wf = WFunction(pot, prof)
        g, sat = solve_H(wf, V, Xi)
        if sat:
            raise ValueError("the optimal cell path has a sticking point mass; "
                             "no continuous shape function")
        self.y = np.linspace(0.0, 1.0, n + 1)
        a = wf.density(V, Xi, g, self.y)
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (a[1:] + a[:-1]) * np.diff(self.y))))
        self.a = a / cum[-1]
        self.A = cum / cum[-1]

    def cum(self, y):
        k = np.floor(y)
        return k + np.interp(y - k, self.y, self.A)

    def inv(self, s):
        k = np.floor(s)
        return k + np.interp(s - k, self.A, self.y)

    def density(self, y):
        return np.interp(y - np.floor(y), self.y, self.a)


def _pieces(times, values):
    times = [float(x) for x in times]
    values = [float(x) for x in values]
    if len(times) != len(values) or len(times) < 2:
        raise ValueError("a piecewise-affine path needs matching breakpoints and values")
    out = []
    for (a, b), (ua, ub) in zip(zip(times[:-1], times[1:]), zip(values[:-1], values[1:])):
        if not b > a:
            raise ValueError("breakpoints must increase")
        V = (ub - ua) / (b - a)
        out.append((a, b, ua, V))
    return out


def _xi_list(Xi, m):
    if np.ndim(Xi) == 0:
        return [float(Xi)] * m
    Xi = [float(x) for x in Xi]
    if len(Xi) != m:
        raise ValueError("one force value per affine piece")
    return Xi


def build_recovery_sequence(times, values, Xi, eps: float, pot: DissipationPotential,
                            land: EnergyLandscape, nodes_per_winding: int = 128) -> RecoveryPath:
    """Oscillating path built from optimal cell shapes on blocks of length ~ eps^(1/2).

    On each block [tau, tau + L] the path makes N = floor(|V| L / eps) full
    windings of the optimal cell path, started at the phase u_hat(tau)/eps, and
    follows the affine path on the short remainder, so it agrees with u_hat at
    every block end.
    """
    if not land.wiggle_is_uniform:
        raise ValueError("recovery shapes need a wiggle amplitude independent of u")
    prof = land.profile_at(0.0)
    pcs = _pieces(times, values)
    Xis = _xi_list(Xi, len(pcs))
    T_all, U_all, R_all, H_all = [], [], [], []
    windings = []
    for (a, b, ua, V), Xi_j in zip(pcs, Xis):
        if V == 0:
            raise ValueError(f"zero slope on the piece [{a}, {b}]")
        shape = _CellShape(pot, prof, V, Xi_j)
        sig = math.copysign(1.0, V)
        n = max(1, int(math.floor((b - a) / math.sqrt(eps))))
        L = (b - a) / n
        for k in range(n):
            tau = a + k * L
            end = b if k == n - 1 else a + (k + 1) * L
            U = ua + V * (tau - a)
            N = int(math.floor(abs(V) * L / eps))
            windings.append(N)
            x = tau + N * eps / abs(V)
            if N > 0:
                phase = U / eps
                A0 = float(shape.cum(phase))
                # uniform in time over whole windings: the integrand of J is
                # periodic there, so the trapezoid rule converges spectrally
                s = np.linspace(0.0, N, N * nodes_per_winding + 1)
                t = tau + eps * s / abs(V)
                t[-1] = min(x, end)
                y = shape.inv(A0 + sig * s)
                u = eps * y
                u[0], u[-1] = U, U + sig * N * eps
                udot = V / shape.density(y)
                T_all.append(t)
                U_all.append(u)
                R_all.append(udot)
                H_all.append(ua + V * (t - a))
            if x < end - 1e-15:
                te = np.linspace(x, end, max(2, int(math.ceil((end - x) * abs(V) / eps
                                                                  * nodes_per_winding)) + 1))
                T_all.append(te)
                U_all.append(ua + V * (te - a))
                R_all.append(np.full_like(te, V))
                H_all.append(ua + V * (te - a))
    return RecoveryPath(np.concatenate(T_all), np.concatenate(U_all), np.concatenate(R_all),
                        np.concatenate(H_all), windings, eps)


def lazy_path(times, values, eps: float, nodes_per_period: int = 64):
    """Samples (t, u, u') of the affine path itself, resolving the wiggle period."""
    T_all, U_all, R_all = [], [], []
    for a, b, ua, V in _pieces(times, values):
        n = max(2, int(math.ceil((b - a) * max(abs(V), 1e-12) / eps * nodes_per_period)) + 1)
        t = np.linspace(a, b, n)
        T_all.append(t)
        U_all.append(ua + V * (t - a))
        R_all.append(np.full_like(t, V))
    return np.concatenate(T_all), np.concatenate(U_all), np.concatenate(R_all)


def _J_piecewise(t, u, udot, pot, land, xi_of_t):
    """Trapezoid J on samples that may repeat a time at block joints."""
    vals = np.asarray(pot.R(udot)) + np.asarray(pot.R_star(xi_of_t(t) - land.wiggle_force(u)))
    dt = np.diff(t)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * dt))


def gamma_gap(times, values, Xi, eps_list, pot: DissipationPotential,
              land: EnergyLandscape) -> dict:
    """J_eps on recovery sequences and on the lazy path, against J_0 = int M(u', Xi)."""
    pcs = _pieces(times, values)
    Xis = _xi_list(Xi, len(pcs))
    prof = land.profile_at(0.0)
    J0 = sum((b - a) * M_lagrange(pot, prof, V, x).M for (a, b, _, V), x in zip(pcs, Xis))
    edges = np.array([p[1] for p in pcs[:-1]])

    def xi_of_t(t):
        return np.asarray(Xis)[np.searchsorted(edges, t, side="right")]

    rows = []
    for eps in eps_list:
        le = land.with_eps(eps)
        rp = build_recovery_sequence(times, values, Xi, eps, pot, le)
        Jr = _J_piecewise(rp.t, rp.u, rp.udot, pot, le, xi_of_t)
        tl, ul, rl = lazy_path(times, values, eps)
        Jl = _J_piecewise(tl, ul, rl, pot, le, xi_of_t)
        rows.append({"eps": eps, "J_recovery": Jr, "J_lazy": Jl, "J0": J0,
                     "recovery_gap": Jr - J0, "lazy_gap": Jl - J0,
                     "sup_distance": rp.sup_distance, "bound": 2 * math.sqrt(eps),
                     "windings": rp.windings})
    gaps = [abs(r["recovery_gap"]) for r in rows]
    ok = [(r["eps"], g) for r, g in zip(rows, gaps) if g > 0]
    rate = fit_power_law(*map(np.array, zip(*ok)))[0] if len(ok) >= 2 else math.nan
    return {"J0": J0, "rows": rows, "gap_decreasing": _strictly_decreasing(gaps),
            "gap_rate": rate}


def primal_dual_split(report: SweepReport, rel: KineticRelation | None = None,
                      traj0: Trajectory | None = None) -> dict:
    """Primal and dual parts of the dissipation per eps and in the effective limit.

    The effective primal part int R_eff(u0') exceeds half of D0 whenever the
    effective trajectory moves, because R_eff is less than 2-homogeneous.
    """
    rows = []
    for e, D, p, d in zip(report.eps, report.D_eps, report.D_prim, report.D_dual):
        rows.append({"eps": e, "D": D, "D_prim": p, "D_dual": d,
                     "split_defect": abs(p - d) / D if D > 0 else 0.0})
    out = {"rows": rows, "D0": report.D0, "D0_prim": report.D0_prim, "D0_dual": report.D0_dual,
           "primal_excess": report.D0_prim - 0.5 * report.D0}
    if traj0 is not None and rel is not None:
        moving = np.abs(traj0.udot) > 0
        out["moving_fraction"] = float(np.mean(moving))
    return out
