import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rightinverse.levy_model import (CompoundPoisson, ExponentialNegative, LevyModel,
                                     TwoSidedExponential)
from rightinverse.path_sim import (ConfigError, SimConfig, first_hitting, first_passage,
                                   polyline_value, running_supremum, simulate_path,
                                   write_path_csv)

JD = LevyModel.from_drift(0.0, 1.0, CompoundPoisson(1.0, TwoSidedExponential(0.5, 2.0, 2.0)))
SN = LevyModel.from_drift(2.0, 0.0, CompoundPoisson(1.0, ExponentialNegative(1.0)))


@pytest.mark.parametrize("kw", [dict(dt=0.0, horizon=1.0), dict(dt=1e-3, horizon=-1.0),
                                dict(dt=2.0, horizon=1.0), dict(dt=1e-3, horizon=1.0, seed=-1),
                                dict(dt=1e-3, horizon=1.0, stream_id=-2)])
def test_config_rejects(kw):
    with pytest.raises(ConfigError):
        SimConfig(**kw)


@pytest.mark.parametrize("bridge", [False, True])
def test_lazy_simulation_is_a_prefix(bridge):
    cfg = SimConfig(1e-3, 20.0, seed=7, stream_id=3, bridge_correction=bridge)
    full = simulate_path(JD, cfg)
    part = simulate_path(JD, cfg, until=lambda p: p.end_time > 3.0)
    m = part.n
    assert m < full.n
    np.testing.assert_array_equal(part.T, full.T[:m])
    np.testing.assert_array_equal(part.VR, full.VR[:m])


def test_streams_differ_and_repeat():
    cfg = SimConfig(1e-3, 2.0, seed=1)
    a = simulate_path(JD, cfg)
    b = simulate_path(JD, cfg)
    c = simulate_path(JD, cfg.with_stream(1))
    np.testing.assert_array_equal(a.VR, b.VR)
    assert not np.array_equal(a.VR[: min(a.n, c.n)], c.VR[: min(a.n, c.n)])


def test_pure_drift_path_is_exact():
    p = simulate_path(LevyModel.pure_drift(2.0), SimConfig(0.01, 1.0))
    np.testing.assert_allclose(p.values, 2.0 * p.times, atol=1e-12)
    assert first_hitting(p, 1.0).time == pytest.approx(0.5, abs=1e-12)


def test_jumps_at_exact_times_and_grid_kept():
    p = simulate_path(JD, SimConfig(1e-2, 50.0, seed=2))
    assert p.complete
    assert len(p.jumps) > 10
    np.testing.assert_allclose(p.times, np.arange(p.times.size) * 1e-2, atol=1e-9)
    assert np.all(np.diff(p.T) >= 0)


def test_spectrally_negative_passage_has_no_overshoot():
    for s in range(20):
        p = simulate_path(SN, SimConfig(1e-3, 10.0, seed=s))
        r = first_passage(p, 1.0)
        if r.reached:
            assert r.overshoot == 0.0


def test_hitting_ignores_jumps_over_level():
    # a path that jumps over the level never hits it by continuous motion
    from rightinverse.path_sim import SamplePath
    T = np.array([0.0, 1.0, 1.0, 2.0])
    VR = np.array([0.0, 0.5, 2.0, 3.0])
    VL = np.array([0.0, 0.5, 0.5, 3.0])
    p = SamplePath(T, VR, VL, 1.0, 2.0, 0.0)
    assert not first_hitting(p, 1.0).reached
    r = first_passage(p, 1.0)
    assert r.time == 1.0 and r.overshoot == pytest.approx(1.0)
    assert r.pre_passage_sup_gap == pytest.approx(0.5)
    assert polyline_value(p, 0.5) == pytest.approx(0.25)


@given(st.integers(0, 2 ** 32), st.booleans())
def test_running_supremum_dominates(seed, bridge):
    p = simulate_path(JD, SimConfig(1e-2, 2.0, seed=seed, bridge_correction=bridge))
    s = running_supremum(p)
    assert np.all(np.diff(s) >= 0)
    assert np.all(s >= p.values - 1e-15)


def test_write_path_csv(tmp_path):
    p = simulate_path(JD, SimConfig(1e-2, 3.0, seed=4))
    main, side = write_path_csv(p, tmp_path / "path.csv")
    rows = main.read_text().splitlines()
    assert rows[0] == "t,x" and len(rows) == p.times.size + 1
    assert side.read_text().splitlines()[0] == "t_jump,size"
    assert len(side.read_text().splitlines()) == len(p.jumps) + 1


def test_bridge_crossing_frequency():
    # P(sup_{t<=1} W_t >= 1) = 2 (1 - Phi(1)) = 0.3173
    cfg = SimConfig(0.05, 1.0, seed=11, bridge_correction=True)
    bm = LevyModel.brownian()
    hits = [first_hitting(simulate_path(bm, cfg.with_stream(i)), 1.0).reached for i in range(4000)]
    assert abs(np.mean(hits) - 0.3173) < 4 * math.sqrt(0.3173 * 0.6827 / 4000)
