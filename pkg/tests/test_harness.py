import math

import numpy as np
import pytest

from wiggly.harness import (SweepSetup, build_recovery_sequence, eps_sweep, gamma_gap,
                            lazy_path, primal_dual_split)
from wiggly.landscape import EnergyLandscape, PiecewiseLinearLoad
from wiggly.potentials import DissipationPotential

PIECES = ([0.0, 1.2, 2.4], [0.0, 1.2, 0.0])


@pytest.fixture(scope="module")
def sweep(quad, sine):
    return eps_sweep(SweepSetup(quad, sine))


@pytest.fixture(scope="module")
def land(sine):
    return EnergyLandscape((0.0,), PiecewiseLinearLoad.constant(0.0), sine, 0.1)


def test_sweep_converges(sweep):
    assert sweep.flags["finite"]
    assert sweep.flags["sup_tail_strictly_decreasing"]
    assert sweep.sup_error[-1] <= 0.05
    assert sweep.flags["D_gap_decreasing"]
    assert 0.5 < sweep.rates["sup_error"] < 1.5


def test_sweep_edb_and_split(sweep):
    assert max(sweep.edb_relative) < 1e-6
    assert sweep.D0_edb_relative < 1e-8
    assert sweep.D0_two_way_gap < 1e-8
    split = primal_dual_split(sweep)
    assert all(r["split_defect"] <= 1e-8 for r in split["rows"])
    assert split["primal_excess"] > 0


def test_sweep_outputs(sweep, tmp_path):
    sweep.to_json(tmp_path / "s.json")
    sweep.to_csv(tmp_path / "s.csv")
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0].startswith("eps,sup_error") and len(rows) == 6


def test_sweep_rejects_unsorted_eps(quad, sine):
    with pytest.raises(ValueError):
        eps_sweep(SweepSetup(quad, sine), [0.1, 0.2])


def test_parallel_sweep_matches_serial(quad, sine, sweep):
    par = eps_sweep(SweepSetup(quad, sine), [0.2, 0.1], jobs=2)
    assert par.sup_error == pytest.approx(sweep.sup_error[:2], rel=1e-12)


def test_recovery_stays_close(quad, land):
    for eps in (0.1, 0.025):
        rp = build_recovery_sequence(*PIECES, 0.0, eps, quad, land.with_eps(eps))
        assert rp.sup_distance <= 2 * math.sqrt(eps)
        assert rp.sup_distance <= eps + 1e-12
        assert np.all(np.diff(rp.t) >= 0)


def test_recovery_hits_block_ends(quad, land):
    rp = build_recovery_sequence(*PIECES, 0.0, 0.05, quad, land.with_eps(0.05))
    for tt, uu in ((0.0, 0.0), (1.2, 1.2), (2.4, 0.0)):
        i = np.flatnonzero(np.isclose(rp.t, tt))
        assert np.allclose(rp.u[i], uu, atol=1e-12)


def test_recovery_beats_lazy_path(quad, land):
    res = gamma_gap(*PIECES, 0.0, [0.1, 0.05, 0.025], quad, land)
    assert res["gap_decreasing"]
    for r in res["rows"]:
        assert abs(r["recovery_gap"]) < r["lazy_gap"]


def test_lazy_path_is_affine():
    t, u, r = lazy_path(*PIECES, 0.1)
    assert np.allclose(u, np.where(t <= 1.2, t, 2.4 - t))


def test_zero_slope_rejected(quad, land):
    with pytest.raises(ValueError):
        build_recovery_sequence([0, 1], [1, 1], 0.0, 0.1, quad, land)


def test_saturated_shape_rejected(quad, land):
    # a very slow piece under a large force sticks at the minimum of G
    with pytest.raises(ValueError):
        build_recovery_sequence([0, 1], [0, 1e-4], 3.0, 0.1, quad, land)
