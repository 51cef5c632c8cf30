"""Kinetic relation just above the depinning force for profiles with different
maxima: smooth (quadratic top), sharper power-law tops, and a linear (tent) top."""

import numpy as np

from wiggly.kinetics import (KineticRelation, depinning_expansion, fit_power_law,
                             log_depinning)
from wiggly.potentials import DissipationPotential
from wiggly.profiles import WigglyProfile

if __name__ == "__main__":
    pot = DissipationPotential.quadratic()
    d = np.logspace(-6, -3, 13)
    print(f"{'profile':>14s} {'alpha':>6s} {'fit slope':>10s} {'predicted':>10s} "
          f"{'fit pref':>9s} {'predicted':>10s}")
    for prof in (WigglyProfile.sinusoidal(1.0), WigglyProfile.peaked(1.0, 1.5),
                 WigglyProfile.peaked(1.0, 3.0)):
        rel = KineticRelation(pot, prof)
        slope, pref = fit_power_law(d, rel.K(prof.p_max + d))
        pred = depinning_expansion(rel, prof.p_max + d[0])
        print(f"{prof.kind:>14s} {prof.alpha:6.2f} {slope:10.4f} {pred.exponent:10.4f} "
              f"{pref:9.4f} {pred.prefactor:10.4f}")
    rel = KineticRelation(pot, WigglyProfile.tent(1.0))
    print("\ntent top: K(p_max + d) against (c*/2)/log(1/d)")
    for x in (1e-4, 1e-8, 1e-12):
        print(f"  d = {x:.0e}: K = {float(rel.K(1 + x)):.6f}, "
              f"leading order = {log_depinning(rel, 1 + x):.6f}")
