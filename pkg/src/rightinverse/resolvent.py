"""Resolvent densities, hitting transforms and the Wiener-Hopf residual.

The q-resolvent density is the Fourier inverse of ``1 / (q + psi)``.  A
reference exponent with the same drift and Gaussian part and a killing rate
``q + (jump rate)`` has a closed-form inverse; what is left,

    1/(q + psi) - 1/(q' - i b lam + sigma2 lam^2 / 2)  =  rate * phi * g * g0,

decays like ``lam^-4`` (Gaussian part) or ``lam^-2`` (bounded variation), and
is inverted numerically with scipy's Fourier-integral routine.  In the
bounded-variation case the remainder is continuous at 0, so the right limit
``u^q(0+)`` is the reference's right limit plus the remainder at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate

from .levy_model import CompoundPoisson, LevyModel, TwoSidedExponential

__all__ = [
    "QuadratureError",
    "NoClosedForm",
    "ResolventGrid",
    "resolvent_density",
    "resolvent_grid",
    "resolvent_limits",
    "hitting_transform",
    "hitting_probability",
    "resolvent_density_closed_form",
    "two_sided_exp_roots",
    "wiener_hopf_residual",
]

TOL_GAUSSIAN = 1e-8
TOL_BV = 1e-6
# below this |x| the remainder is integrated without Fourier weights
SMALL_X = 0.5


class QuadratureError(ArithmeticError):
    """The Fourier integral cannot be evaluated to the requested tolerance."""


class NoClosedForm(LookupError):
    """No closed-form ladder exponents are known for the model."""


def _default_tol(model: LevyModel) -> float:
    return TOL_GAUSSIAN if model.sigma2 > 0 else TOL_BV


def _check(model: LevyModel, q: float):
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    if model.experimental:
        raise QuadratureError("no tail control for 1/(q+psi) in the experimental family")
    if model.sigma2 == 0 and model.path_drift == 0:
        raise QuadratureError("1/(q+psi) is not integrable without drift or Gaussian part")


def _reference_density(b: float, s2: float, qr: float, x: float) -> float:
    """Resolvent density of ``b t + sqrt(s2) W`` killed at rate ``qr``; right limit at 0."""
    if s2 > 0:
        r = math.sqrt(b * b + 2.0 * s2 * qr)
        return math.exp((x * b - abs(x) * r) / s2) / r
    if b > 0:
        return math.exp(-qr * x / b) / b if x >= 0 else 0.0
    return math.exp(-qr * x / b) / -b if x < 0 else 0.0


@dataclass(frozen=True)
class _Parts:
    q: float
    qr: float
    b: float
    s2: float
    rate: float


def _parts(model: LevyModel, q: float) -> _Parts:
    rate = model.jump_rate
    return _Parts(q, q + rate, model.path_drift, model.sigma2, rate)


def _remainder_integrand(model: LevyModel, p: _Parts):
    def D(lam):
        lam = np.asarray(lam, dtype=float)
        g = 1.0 / (p.q + model.psi(lam))
        g0 = 1.0 / (p.qr - 1j * p.b * lam + 0.5 * p.s2 * lam ** 2)
        return g - g0
    return D


def _remainder(model: LevyModel, p: _Parts, x: float, tol: float) -> float:
    if p.rate == 0:
        return 0.0
    D = _remainder_integrand(model, p)
    limit = 400
    with np.errstate(all="ignore"):
        if x == 0.0:
            val, err = integrate.quad(lambda l: D(l).real, 0.0, np.inf, epsabs=tol,
                                      epsrel=0.0, limit=limit)
        elif abs(x) < SMALL_X:
            # Fourier weights lose accuracy at low frequency; the remainder
            # decays fast enough for a plain integral (the error check below
            # catches jump laws where it does not)
            val, err = integrate.quad(lambda l: (D(l) * np.exp(-1j * l * x)).real, 0.0, np.inf,
                                      epsabs=tol, epsrel=0.0, limit=limit)
        else:
            w = abs(x)
            c, ec = integrate.quad(lambda l: D(l).real, 0.0, np.inf, weight="cos", wvar=w,
                                   epsabs=tol, limlst=200, limit=limit)
            s, es = integrate.quad(lambda l: D(l).imag, 0.0, np.inf, weight="sin", wvar=w,
                                   epsabs=tol, limlst=200, limit=limit)
            val = c + math.copysign(1.0, x) * s
            err = ec + es
    if not math.isfinite(val) or err > 100 * tol:
        raise QuadratureError(f"quadrature error {err:.2e} above tolerance {tol:.1e}")
    return val / math.pi


def resolvent_density(model: LevyModel, q: float, x, tol: float | None = None):
    """``u^q(x)``, the density of ``int_0^inf e^{-qt} P(X_t in dx) dt``.

    At ``x = 0`` the right limit ``u^q(0+)`` is returned, which matters for
    bounded-variation models where the density jumps at 0.
    """
    _check(model, q)
    tol = _default_tol(model) if tol is None else tol
    p = _parts(model, q)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array([_reference_density(p.b, p.s2, p.qr, float(xi)) +
                    _remainder(model, p, float(xi), tol) for xi in xs])
    return float(out[0]) if np.ndim(x) == 0 else out


@lru_cache(maxsize=256)
def _u0_plus(model: LevyModel, q: float, tol: float) -> float:
    return resolvent_density(model, q, 0.0, tol)


def resolvent_limits(model: LevyModel, q: float, tol: float | None = None) -> tuple[float, float]:
    """``(u^q(0-), u^q(0+))``.

    The remainder after subtracting the reference density is continuous, so
    the two limits differ only through the reference part: they agree with a
    Gaussian part and ``u^q(0-) < u^q(0+)`` for bounded variation with
    positive drift.  ``hitting_transform`` uses the right limit.
    """
    _check(model, q)
    tol = _default_tol(model) if tol is None else tol
    p = _parts(model, q)
    rem = _remainder(model, p, 0.0, tol)
    right = _reference_density(p.b, p.s2, p.qr, 0.0)
    if p.s2 > 0:
        left = right
    else:
        left = 0.0 if p.b > 0 else 1.0 / -p.b
    return left + rem, right + rem


def hitting_transform(model: LevyModel, q: float, x, tol: float | None = None):
    """``E(e^{-q T_{x}}; T_{x} < inf) = u^q(x) / u^q(0+)`` for the hitting time of ``x``."""
    tol = _default_tol(model) if tol is None else tol
    u0 = _u0_plus(model, float(q), tol)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.array([1.0 if xi == 0 else resolvent_density(model, q, xi, tol) / u0 for xi in xs])
    vals = np.clip(vals, 0.0, 1.0)
    return float(vals[0]) if np.ndim(x) == 0 else vals


def hitting_probability(model: LevyModel, x: float, q_small: float = 1e-4) -> float:
    """``P(T_{x} < inf)``, the ``q -> 0`` limit of :func:`hitting_transform`.

    Recurrent models hit every point (when points are hit at all); otherwise the
    limit is obtained by linear extrapolation from two small values of q.
    """
    if x == 0:
        return 1.0
    if model.is_recurrent and (model.sigma2 > 0 or model.path_drift != 0):
        return 1.0
    h1 = hitting_transform(model, q_small, x)
    h2 = hitting_transform(model, 2 * q_small, x)
    return float(min(1.0, max(0.0, 2 * h1 - h2)))


@dataclass
class ResolventGrid:
    q: float
    x: np.ndarray
    u_values: np.ndarray
    u0_plus: float
    tol: float
    method: str = "fourier-reference-subtraction"
    meta: dict = field(default_factory=dict)

    def total_mass(self) -> float:
        """Trapezoidal mass over the grid (approximately ``1/q`` on a wide grid)."""
        return float(np.trapezoid(self.u_values, self.x))

    def rows(self):
        return [{"x": float(a), "u": float(b)} for a, b in zip(self.x, self.u_values)]


def resolvent_grid(model: LevyModel, q: float, x: Sequence[float],
                   tol: float | None = None) -> ResolventGrid:
    tol = _default_tol(model) if tol is None else tol
    xs = np.asarray(x, dtype=float)
    u = resolvent_density(model, q, xs, tol)
    return ResolventGrid(q=q, x=xs, u_values=np.atleast_1d(u), u0_plus=_u0_plus(model, float(q), tol),
                         tol=tol, meta={"model": model.describe()})


# ---------------------------------------------------------------------------
# closed forms used as oracles
# ---------------------------------------------------------------------------


def _two_sided_law(model: LevyModel) -> TwoSidedExponential:
    if isinstance(model.jumps, CompoundPoisson) and isinstance(model.jumps.law, TwoSidedExponential):
        return model.jumps.law
    raise NoClosedForm(f"{model.describe()} has no two-sided exponential jumps")


def _two_sided_poly(model: LevyModel, alpha):
    """Coefficients (highest first) of ``(alpha - psi_L(theta)) (e1 - theta)(e2 + theta)``."""
    law = _two_sided_law(model)
    lam = model.jump_rate
    p, e1, e2 = law.p_up, law.rate_up, law.rate_down
    b, s2 = model.path_drift, model.sigma2
    # alpha + lam - b th - s2 th^2 / 2
    A = np.poly1d([-0.5 * s2, -b, alpha + lam])
    P = A * np.poly1d([-1.0, e1]) * np.poly1d([1.0, e2])
    P = P - np.poly1d([lam * p * e1]) * np.poly1d([1.0, e2])
    P = P - np.poly1d([lam * (1 - p) * e2]) * np.poly1d([-1.0, e1])
    c = P.coeffs
    # drop vanishing leading coefficients (sigma2 = 0)
    while abs(c[0]) == 0 and len(c) > 1:
        c = c[1:]
    return c


def two_sided_exp_roots(model: LevyModel, alpha):
    """Roots of ``psi_L(theta) = alpha`` for two-sided exponential jumps.

    Returns ``(positive, negative)`` root arrays sorted by real part.  For real
    ``alpha > 0`` all roots are real; at ``alpha = 0`` the root at 0 is put on
    the side towards which the process cannot drift.
    """
    c = _two_sided_poly(model, alpha)
    r = np.roots(c.astype(complex))
    if np.isreal(alpha) and np.all(np.abs(r.imag) < 1e-9 * (1 + np.abs(r.real))):
        r = r.real
    scale = 1e-9 * max(1.0, float(np.max(np.abs(r))))
    zero = np.abs(r) < scale
    pos = r[(np.real(r) > 0) & ~zero]
    neg = r[(np.real(r) < 0) & ~zero]
    if np.any(zero):
        if model.mean < 0:
            neg = np.append(neg, 0.0)
        elif model.mean > 0:
            pos = np.append(pos, 0.0)
        else:
            pos = np.append(pos, 0.0)
            neg = np.append(neg, 0.0)
    return np.sort_complex(pos) if np.iscomplexobj(pos) else np.sort(pos), \
        np.sort_complex(neg) if np.iscomplexobj(neg) else np.sort(neg)


def _laplace_exponent_derivative(model: LevyModel, theta: float) -> float:
    law = _two_sided_law(model)
    lam = model.jump_rate
    p, e1, e2 = law.p_up, law.rate_up, law.rate_down
    return (model.path_drift + model.sigma2 * theta
            + lam * (p * e1 / (e1 - theta) ** 2 - (1 - p) * e2 / (e2 + theta) ** 2))


def resolvent_density_closed_form(model: LevyModel, q: float, x: float) -> float:
    """Partial-fraction resolvent for Brownian motion with drift or two-sided exponential jumps."""
    if model.jumps is None and model.sigma2 > 0:
        return _reference_density(model.path_drift, model.sigma2, q, x)
    pos, neg = two_sided_exp_roots(model, q)
    if x >= 0:
        return float(sum(math.exp(-r * x) / _laplace_exponent_derivative(model, r) for r in pos))
    return float(sum(-math.exp(-r * x) / _laplace_exponent_derivative(model, r) for r in neg))


def wiener_hopf_residual(model: LevyModel, q: float, lam: float) -> float:
    """``|k(q,0) k^(q,0) / (k(q,-i lam) k^(q,i lam)) - q/(q + psi(lam))|``.

    Uses the closed-form ascending and descending ladder exponents; raises
    :class:`NoClosedForm` for models without them.
    """
    from .fluctuation import closed_form_ladder_pair

    k, khat = closed_form_ladder_pair(model)
    if lam == 0:
        return 0.0
    lhs = k(q, 0.0) * khat(q, 0.0) / (k(q, -1j * lam) * khat(q, 1j * lam))
    rhs = q / (q + model.psi(lam))
    return float(abs(lhs - rhs))
