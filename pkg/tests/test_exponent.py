import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rightinverse.exponent import (CheckReport, ExcursionRates, PreconditionError, SubordinatorChar,
                                   K_characteristics, analytic_rho, escape_probability,
                                   hitting_weight, jumpstart_rate_check, relative_deviation,
                                   return_times, sigpos_check, sigpos_scaling_check,
                                   theorem1_concat_check)
from rightinverse.fluctuation import closed_form_ladder
from rightinverse.levy_model import (Atoms, CompoundPoisson, ExponentialNegative, LevyModel,
                                     TwoSidedExponential, closed_form_rho)

JD = LevyModel.from_drift(0.0, 1.0, CompoundPoisson(1.0, TwoSidedExponential(0.5, 2.0, 2.0)))
SN = LevyModel.from_drift(2.0, 0.0, CompoundPoisson(1.0, ExponentialNegative(1.0)))
BV = LevyModel.from_drift(1.0, 0.0, CompoundPoisson(4.0, Atoms((0.25, -0.75), (0.5, 0.5))))


def test_report_pass_rules():
    assert CheckReport("a", [1.0], [1.0], 0.01, 0.05).passed
    assert not CheckReport("a", [1.0], [1.0], 0.06, 0.05).passed
    assert CheckReport("a", [], [], 0.5, 0.01, kind="pvalue").passed
    assert not CheckReport("a", [], [], 0.001, 0.01, kind="pvalue").passed
    assert not CheckReport("a", [], [], math.nan, 0.05).passed
    with pytest.raises(ValueError):
        CheckReport("a", [], [], 0.0, 0.05, kind="other")


def test_report_json():
    rep = CheckReport("a", [1 + 2j], [0.5, math.inf], 0.0, 0.1, seed=3, n_samples=7)
    doc = json.loads(json.dumps(rep.to_json()))
    assert doc["lhs"] == [[1.0, 2.0]] and doc["rhs"] == [0.5, None]
    assert doc["pass"] is True and doc["seed"] == 3 and doc["n_samples"] == 7
    assert set(doc) >= {"name", "lhs", "rhs", "statistic", "tolerance", "pass", "seed",
                        "n_samples"}
    assert rep.line().startswith("PASS a:")


def test_relative_deviation():
    assert relative_deviation([1.1, 2.0], [1.0, 2.0]) == pytest.approx(0.1)
    assert relative_deviation([1e-3], [0.0]) == pytest.approx(1e-3)


@pytest.mark.parametrize("model", [LevyModel.brownian(), LevyModel.brownian(-1.0),
                                   LevyModel.brownian(0.5, 2.0), LevyModel.pure_drift(2.0), SN],
                         ids=["bm", "bm-down", "bm-up", "drift", "sn"])
@pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
def test_analytic_rho_matches_closed_forms(model, q):
    char = closed_form_ladder(model)
    assert analytic_rho(model, char, q) == pytest.approx(closed_form_rho(model, q), rel=1e-6)


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
def test_numerical_weight_matches_partial_fractions(q):
    char = closed_form_ladder(JD)
    a = analytic_rho(JD, char, q)
    b = analytic_rho(JD, char, q, closed_form_weight=True)
    assert a == pytest.approx(b, rel=1e-8)


def test_hitting_weight_shape():
    w = hitting_weight(JD, 1.0, 20.0)
    ys = np.linspace(0.0, 20.0, 50)
    vals = w(ys)
    assert vals[0] == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.diff(vals) <= 1e-9) and np.all(vals > 0)


@given(st.sampled_from([0.25, 0.5, 1.0, 2.0, 4.0]), st.sampled_from([0.25, 0.5, 1.0, 2.0, 4.0]))
def test_rho_is_a_bernstein_function(q1, q2):
    char = closed_form_ladder(JD)
    r1 = analytic_rho(JD, char, q1, closed_form_weight=True)
    r2 = analytic_rho(JD, char, q2, closed_form_weight=True)
    assert (r1 - r2) * (q1 - q2) >= -1e-12
    if q1 < q2:
        # concave with rho(0) = 0: rho(q)/q is nonincreasing
        assert r2 / q2 <= r1 / q1 + 1e-12


def test_escape_probability():
    y = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(escape_probability(LevyModel.brownian(1.0), y), -np.expm1(-2 * y))
    np.testing.assert_array_equal(escape_probability(LevyModel.brownian(), y), 0.0)
    np.testing.assert_array_equal(escape_probability(JD, y), 0.0)


@pytest.mark.parametrize("model, kappa", [(LevyModel.brownian(), 0.0),
                                          (LevyModel.brownian(-1.0), 2.0),
                                          (LevyModel.brownian(1.0), 0.0)])
def test_killing_of_K(model, kappa):
    char = closed_form_ladder(model)
    kc = K_characteristics(model, char, n_mc=0)
    assert kc.kappa_K == pytest.approx(kappa, abs=1e-9)
    assert kc.eta_K == pytest.approx(char.eta)


def test_subordinator_char_rejects_negative():
    with pytest.raises(ValueError):
        SubordinatorChar(-1.0, 0.0)


def test_return_times_are_reproducible():
    a = return_times(JD, [0.5, 1.0], 1e-3, 5.0, seed=1)
    b = return_times(JD, [0.5, 1.0], 1e-3, 5.0, seed=1)
    np.testing.assert_array_equal(a, b)
    t, vals = return_times(JD, [0.5], 1e-3, 5.0, seed=1, offsets=[0.0, 1e9])
    assert vals[0, 0] == pytest.approx(0.5) and np.isnan(vals[0, 1])


def test_jumpstart_prediction():
    rep = jumpstart_rate_check(BV, 200, 100.0)
    assert rep.rhs[0] == pytest.approx(2.0) and rep.passed
    with pytest.raises(PreconditionError):
        jumpstart_rate_check(JD, 1, 1.0)


def _rates(s2, n, seed):
    g = np.random.default_rng(seed)
    d = g.exponential(1.0, n)
    return ExcursionRates(s2, d, -d, n / 2.0 * s2 / 2.0, g.exponential(1.0, n), -d, n / 2.0, 0.1)


def test_sigpos_checks():
    low, high = _rates(1.0, 4000, 0), _rates(4.0, 4000, 1)
    assert sigpos_scaling_check(low, high).passed
    with pytest.raises(PreconditionError):
        sigpos_check(BV, low, cap=5.0)
    reps = sigpos_check(JD, low, cap=5.0)
    assert [r.name for r in reps] == ["sigpos-duration-shape", "sigpos-depth-shape"]


def test_theorem1_check_is_empty_without_upward_jumps():
    reps = theorem1_concat_check(SN, [], [], [], 1.0, closed_form_ladder(SN), [0, 1], [0, 1],
                                 1e-3, 1.0, seed=0)
    assert all(r.passed for r in reps)
