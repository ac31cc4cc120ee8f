import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rightinverse.levy_model import (Atoms, CompoundPoisson, LevyModel, TwoSidedExponential)
from rightinverse.resolvent import (NoClosedForm, QuadratureError, hitting_probability,
                                    hitting_transform, resolvent_density,
                                    resolvent_density_closed_form, resolvent_grid, resolvent_limits,
                                    two_sided_exp_roots, wiener_hopf_residual)

JD = LevyModel.from_drift(0.0, 1.0, CompoundPoisson(1.0, TwoSidedExponential(0.5, 2.0, 2.0)))
KOU_BV = LevyModel.from_drift(1.0, 0.0, CompoundPoisson(1.0, TwoSidedExponential(0.3, 3.0, 1.5)))


def bm_density(mu, s2, q, x):
    r = math.sqrt(mu * mu + 2 * s2 * q)
    return math.exp((mu * x - abs(x) * r) / s2) / r


@pytest.mark.parametrize("mu,s2", [(0.0, 1.0), (0.7, 2.0), (-1.0, 0.5)])
def test_brownian_resolvent_closed_form(mu, s2):
    m = LevyModel.brownian(mu, s2)
    for x in (-2.0, -0.3, 0.0, 0.4, 3.0):
        assert resolvent_density(m, 1.3, x) == pytest.approx(bm_density(mu, s2, 1.3, x), abs=1e-12)


@pytest.mark.parametrize("model,tol", [(JD, 1e-8), (KOU_BV, 1e-6)])
def test_two_sided_exponential_partial_fractions(model, tol):
    xs = np.concatenate([np.linspace(-3, 3, 13), [-1e-5, -1e-3, 1e-3, 1e-5]])
    num = resolvent_density(model, 1.0, xs)
    ref = [resolvent_density_closed_form(model, 1.0, float(x)) for x in xs]
    np.testing.assert_allclose(num, ref, atol=10 * tol)


def test_total_mass_is_one_over_q():
    g = resolvent_grid(JD, 2.0, np.linspace(-15, 15, 3001))
    assert g.total_mass() == pytest.approx(0.5, rel=1e-4)


def test_hitting_transform_brownian():
    # E e^{-q T_{-y}} = e^{-y sqrt(2q)} for standard BM
    for y in (0.1, 0.5, 2.0):
        assert hitting_transform(LevyModel.brownian(), 1.0, -y) == pytest.approx(
            math.exp(-y * math.sqrt(2)), abs=1e-9)


def test_hitting_probability():
    assert hitting_probability(LevyModel.brownian(), -3.0) == 1.0
    # BM with drift 1 reaches -y with probability e^{-2y}
    assert hitting_probability(LevyModel.brownian(1.0), -0.5) == pytest.approx(math.exp(-1), abs=2e-3)


def test_quadrature_preconditions():
    with pytest.raises(ValueError):
        resolvent_density(JD, 0.0, 1.0)
    with pytest.raises(QuadratureError):
        resolvent_density(LevyModel.from_drift(0.0, 0.0, CompoundPoisson(1.0, Atoms((1.0,), (1.0,)))), 1.0, 0.0)


def test_roots_split_by_sign():
    pos, neg = two_sided_exp_roots(JD, 1.0)
    assert len(pos) == 2 and len(neg) == 2
    assert np.all(pos > 0) and np.all(neg < 0)
    for r in np.concatenate([pos, neg]):
        assert np.real(JD.laplace_exponent(r)) == pytest.approx(1.0, abs=1e-9)


@given(st.sampled_from([0.5, 1.0, 2.0]), st.sampled_from([0.0, 1.0, 2.0, 5.0]),
       st.floats(-2.0, 2.0))
def test_wiener_hopf_brownian(q, lam, mu):
    assert wiener_hopf_residual(LevyModel.brownian(mu, 1.0), q, lam) < 1e-10


def test_wiener_hopf_jump_diffusion():
    for lam in (0.5, 1.0, 3.0):
        assert wiener_hopf_residual(JD, 1.0, lam) < 1e-10


def test_wiener_hopf_without_closed_form():
    m = LevyModel.from_drift(1.0, 0.0, CompoundPoisson(1.0, Atoms((0.5, -1.0), (0.5, 0.5))))
    with pytest.raises(NoClosedForm):
        wiener_hopf_residual(m, 1.0, 1.0)


def test_one_sided_limits_at_zero():
    lo, hi = resolvent_limits(JD, 1.0)
    assert lo == pytest.approx(hi)
    assert lo == pytest.approx(resolvent_density(JD, 1.0, -1e-5), rel=1e-4)
    assert hi == pytest.approx(resolvent_density(JD, 1.0, 1e-5), rel=1e-4)


def test_bounded_variation_density_jumps_by_one_over_drift():
    bv = LevyModel.from_drift(2.0, 0.0, CompoundPoisson(1.0, TwoSidedExponential(0.5, 2.0, 2.0)))
    lo, hi = resolvent_limits(bv, 1.0, tol=1e-5)
    assert hi - lo == pytest.approx(0.5, abs=1e-9)
    assert lo < hi
