import math

import numpy as np
import pytest

from rightinverse.fluctuation import (BrownianLadder, InsufficientData, TwoSidedExpLadder,
                                      closed_form_ladder, closed_form_ladder_pair,
                                      estimate_ladder_char, extract_ladder,
                                      extract_sup_excursions)
from rightinverse.levy_model import (CompoundPoisson, ExponentialNegative, LevyModel,
                                     TwoSidedExponential, laplace_root)
from rightinverse.path_sim import SimConfig, simulate_path
from rightinverse.resolvent import NoClosedForm

JD = LevyModel.from_drift(0.0, 1.0, CompoundPoisson(1.0, TwoSidedExponential(0.5, 2.0, 2.0)))


def test_brownian_ladder_exponent():
    # standard BM: k(alpha, beta) = beta + sqrt(2 alpha)
    c = closed_form_ladder(LevyModel.brownian())
    assert c.kappa == 0.0
    assert c.exponent(2.0, 0.5) == pytest.approx(2.5, abs=1e-8)
    # drift -1: kappa = 2
    assert closed_form_ladder(LevyModel.brownian(-1.0)).kappa == pytest.approx(2.0)


def test_brownian_zero_tail():
    c = BrownianLadder(0.0, 1.0)
    # Lambda((t, inf), {0}) = 2 / sqrt(2 pi t)
    for t in (0.1, 1.0, 4.0):
        assert c.zero_tail(t) == pytest.approx(2 / math.sqrt(2 * math.pi * t), rel=1e-6)


def test_spectrally_negative_ladder():
    m = LevyModel.from_drift(2.0, 0.0, CompoundPoisson(1.0, ExponentialNegative(1.0)))
    c = closed_form_ladder(m)
    assert c.exponent(1.0, 0.3) == pytest.approx(0.3 + laplace_root(m, 1.0), abs=1e-10)
    assert c.positive_mass() == 0


def test_two_sided_exponential_ladder_consistency():
    c = TwoSidedExpLadder(JD)
    for a in (0.5, 1.0, 2.0):
        for b in (0.0, 1.0):
            assert c.exponent(a, b) == pytest.approx(c.k(a, b), abs=1e-8)
    assert c.kappa == pytest.approx(0.0, abs=1e-12)
    assert c.positive_mass() == pytest.approx(c.mass)
    assert c.nu_tail(0.0) == pytest.approx(c.mass)
    # tail is decreasing
    tails = [c.nu_tail(t) for t in (0.01, 0.1, 1.0, 10.0)]
    assert all(a > b for a, b in zip(tails, tails[1:]))


def test_ladder_pair_factorises():
    k, kh = closed_form_ladder_pair(LevyModel.brownian(0.5))
    # k(q,0) k^(q,0) = q / sigma2-normalisation 2 for variance 1
    assert k(1.0, 0.0) * kh(1.0, 0.0) == pytest.approx(2.0)


def test_no_closed_form_for_experimental():
    from rightinverse.levy_model import Atoms
    m = LevyModel.from_drift(1.0, 0.0, CompoundPoisson(1.0, Atoms((0.5, -1.0), (0.5, 0.5))))
    with pytest.raises(NoClosedForm):
        closed_form_ladder(m)


def _ladders(model, n, seed=0, horizon=20.0):
    cfg = SimConfig(1e-3, horizon, seed=seed, bridge_correction=True)
    return [extract_ladder(simulate_path(model, cfg.with_stream(i)), model) for i in range(n)]


def test_extract_ladder_invariants():
    lads = _ladders(JD, 20)
    for lad in lads:
        assert np.all(lad.dtau >= 0) and np.all(lad.dH >= 0)
        assert np.all(np.diff(lad.x) >= 0)
        assert lad.local_time <= lad.sup + 1e-12
        assert lad.sup == pytest.approx(lad.local_time + lad.dH.sum(), abs=1e-9)
        for e in extract_sup_excursions(simulate_path(JD, SimConfig(1e-3, 1.0)), lad)[:1]:
            assert e.duration > 0


def test_empirical_ladder_matches_closed_form():
    lads = _ladders(JD, 300, seed=5)
    emp = estimate_ladder_char(lads, min_jumps=100)
    c = TwoSidedExpLadder(JD)
    assert emp.positive_mass() == pytest.approx(c.mass, rel=0.1)
    assert emp.exponent(1.0, 1.0) == pytest.approx(c.exponent(1.0, 1.0), rel=0.05)


def test_empirical_ladder_needs_data():
    with pytest.raises(InsufficientData):
        estimate_ladder_char(_ladders(JD, 2, horizon=1.0))


def test_killed_ladder_rate():
    lads = _ladders(LevyModel.brownian(-1.0), 400, seed=3, horizon=15.0)
    emp = estimate_ladder_char(lads, min_jumps=100)
    assert emp.kappa == pytest.approx(2.0, rel=0.15)


def test_ladder_time_atom_is_binned():
    bv = LevyModel.from_drift(1.0, 0.0, CompoundPoisson(2.0, TwoSidedExponential(0.5, 2.0, 2.0)))
    lads = _ladders(bv, 50, horizon=20.0)
    emp = estimate_ladder_char(lads, bounded_variation=True, min_jumps=20)
    rows = emp.bins([0.0, 1.0, np.inf], [0.0, np.inf])
    atom = sum(r["mass"] for r in rows if r["s_hi"] == 0.0)
    assert atom > 0
    pos = sum(r["mass"] for r in rows if r["y_hi"] > 0)
    assert pos == pytest.approx(emp.positive_mass(), rel=1e-12)
