import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rightinverse.levy_model import (Atoms, CompoundPoisson, Existence, ExponentialNegative,
                                     LevyModel, ModelSpecError, NotBoundedVariation,
                                     RootFindFailure, TwoSidedExponential, bv_drift,
                                     char_exponent, closed_form_rho, existence_check,
                                     laplace_root, model_from_spec)


def sn_model():
    return LevyModel.from_drift(2.0, 0.0, CompoundPoisson(1.0, ExponentialNegative(1.0)))


def jd_model(b=0.0, s2=1.0):
    return LevyModel.from_drift(b, s2, CompoundPoisson(1.0, TwoSidedExponential(0.5, 2.0, 2.0)))


def test_brownian_exponent():
    m = LevyModel.brownian(0.5, 2.0)
    assert char_exponent(m, 1.5) == pytest.approx(-1j * 0.5 * 1.5 + 0.5 * 2.0 * 1.5 ** 2)


def test_exponent_at_zero_is_exactly_zero():
    for m in (LevyModel.brownian(), sn_model(), jd_model(), LevyModel.pure_drift(3.0)):
        assert char_exponent(m, 0.0) == 0


def test_compound_poisson_matches_direct_sum():
    # psi = -i b lam + rate (1 - phi(lam)) for bounded variation with path drift b
    law = Atoms((0.5, -1.5), (0.5, 0.5))
    m = LevyModel.from_drift(1.0, 0.0, CompoundPoisson(2.0, law))
    lam = 0.7
    phi = 0.5 * np.exp(1j * lam * 0.5) + 0.5 * np.exp(-1j * lam * 1.5)
    assert char_exponent(m, lam) == pytest.approx(-1j * lam + 2.0 * (1 - phi), abs=1e-14)


@given(st.floats(-50, 50), st.floats(0.0, 4.0), st.floats(-3, 3))
def test_exponent_real_part_nonnegative_and_hermitian(lam, s2, b):
    m = jd_model(b, s2)
    p = char_exponent(m, lam)
    assert p.real >= -1e-12
    assert char_exponent(m, -lam) == pytest.approx(np.conj(p), abs=1e-9)


def test_closed_form_rho_brownian():
    for q in (0.5, 1.0, 2.0):
        assert closed_form_rho(LevyModel.brownian(), q) == pytest.approx(math.sqrt(2 * q))
    # drift -1: sqrt(1 + 2q) + 1
    assert closed_form_rho(LevyModel.brownian(-1.0), 1.0) == pytest.approx(math.sqrt(3) + 1)


def test_closed_form_rho_pure_drift():
    assert closed_form_rho(LevyModel.pure_drift(2.0), 3.0) == 1.5


def test_closed_form_rho_spectrally_negative_oracle():
    # 2 theta - theta/(1+theta) = 1 reduces to 2 theta^2 = 1
    assert closed_form_rho(sn_model(), 1.0) == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_closed_form_rho_none_with_positive_jumps():
    assert closed_form_rho(jd_model(), 1.0) is None


def test_laplace_root_at_zero():
    assert laplace_root(LevyModel.brownian(1.0), 0.0) == 0.0
    # BM with drift -1 and variance 1: theta^2/2 - theta = 0 gives theta = 2
    assert laplace_root(LevyModel.brownian(-1.0), 0.0) == pytest.approx(2.0)
    with pytest.raises(RootFindFailure):
        laplace_root(jd_model(), 1.0)


def test_path_drift_and_bv():
    law = Atoms((0.5, -1.5), (0.5, 0.5))
    m = LevyModel.from_drift(1.0, 0.0, CompoundPoisson(2.0, law))
    assert m.path_drift == pytest.approx(1.0)
    assert bv_drift(m) == pytest.approx(1.0)
    assert m.mean == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(NotBoundedVariation):
        bv_drift(LevyModel.brownian())


def test_existence_catalog():
    assert existence_check(LevyModel.brownian()) is Existence.EXISTS
    assert existence_check(LevyModel.brownian(1.0)) is Existence.EXISTS
    assert existence_check(LevyModel.brownian(-1.0)) is Existence.PARTIAL_ONLY
    assert existence_check(LevyModel.pure_drift(-1.0)) is Existence.NOT_EXISTS
    assert existence_check(jd_model(1.0)) is Existence.PARTIAL_ONLY


def test_model_from_spec_round_trip():
    m = model_from_spec({"family": "jump_diffusion", "b": 0.5, "sigma2": 2.0})
    assert m.sigma2 == 2.0 and m.path_drift == pytest.approx(0.5)
    m = model_from_spec({"family": "bv_atoms", "b": 1.0, "rate": 2.0, "sizes": [0.5, -1.5],
                         "probs": [0.5, 0.5]})
    assert m.is_bounded_variation and m.jump_rate == 2.0


@pytest.mark.parametrize("spec", [{}, {"family": "nope"}, {"family": "bv_atoms"},
                                  {"family": "brownian", "sigma2": -1.0}, []])
def test_model_from_spec_rejects(spec):
    with pytest.raises(ModelSpecError):
        model_from_spec(spec)
