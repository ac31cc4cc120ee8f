"""Exponent of the right inverse and the checks that tie simulation to it.

``rho(q) = -log E(e^{-q K_1}; K_1 < inf)`` is assembled from the ladder
characteristics ``(kappa, eta, Lambda)`` and the hitting transforms of the
levels below zero:

    rho(q) = kappa + eta q + int (1 - e^{-q s} h_q(y)) Lambda(ds, dy),
    h_q(y) = u^q(-y) / u^q(0+).

The check functions turn simulated excursions into :class:`CheckReport`
records with a declared statistic and tolerance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import interpolate, stats

from .fluctuation import (EmpiricalLadderChar, InsufficientData, LadderChar,
                          TwoSidedExpLadder)
from .levy_model import LevyModel
from .path_sim import SimConfig, first_hitting, make_generator, polyline_value, simulate_path
from .resolvent import (NoClosedForm, hitting_probability, hitting_transform,
                        resolvent_density_closed_form)

__all__ = [
    "CheckReport",
    "SubordinatorChar",
    "PreconditionError",
    "hitting_weight",
    "analytic_rho",
    "escape_probability",
    "K_characteristics",
    "return_times",
    "entrance_law_check",
    "entrance_law_decomposition",
    "theorem1_concat_check",
    "sigpos_check",
    "sigpos_scaling_check",
    "jumpstart_rate_check",
    "excursion_values",
    "ExcursionRates",
    "relative_deviation",
    "ALPHA",
]

log = logging.getLogger(__name__)

ALPHA = 0.01
FRESH_STREAM_BASE = 1 << 40


class PreconditionError(ValueError):
    """The model does not satisfy the assumptions of a check."""


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _flat(values) -> list:
    out = []
    for v in np.atleast_1d(np.asarray(values)).ravel():
        if np.iscomplexobj(v):
            out.append([_num(v.real), _num(v.imag)])
        else:
            out.append(_num(v))
    return out


@dataclass
class CheckReport:
    """Outcome of one comparison.

    ``kind`` fixes how the statistic is read: ``"deviation"`` passes when
    ``statistic <= tolerance``; ``"pvalue"`` passes when
    ``statistic > tolerance``.  The pass flag is derived, never set by hand.
    """

    name: str
    lhs: Sequence
    rhs: Sequence
    statistic: float
    tolerance: float
    kind: str = "deviation"
    seed: Optional[int] = None
    n_samples: int = 0
    detail: dict = field(default_factory=dict)
    passed: bool = field(init=False)

    def __post_init__(self):
        if self.kind not in ("deviation", "pvalue"):
            raise ValueError(f"unknown statistic kind {self.kind!r}")
        s = float(self.statistic)
        if not math.isfinite(s):
            self.passed = False
        elif self.kind == "deviation":
            self.passed = s <= self.tolerance
        else:
            self.passed = s > self.tolerance

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lhs": _flat(self.lhs),
            "rhs": _flat(self.rhs),
            "statistic": _num(self.statistic),
            "tolerance": float(self.tolerance),
            "kind": self.kind,
            "pass": bool(self.passed),
            "seed": self.seed,
            "n_samples": int(self.n_samples),
            "detail": self.detail,
        }

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        op = "<=" if self.kind == "deviation" else ">"
        return f"{flag} {self.name}: statistic={self.statistic:.4g} ({op} {self.tolerance:g})"


def relative_deviation(lhs, rhs, floor: float = 1e-12) -> float:
    """``max |lhs - rhs| / |rhs|``; absolute where ``|rhs|`` is below ``floor``."""
    lhs = np.atleast_1d(np.asarray(lhs))
    rhs = np.atleast_1d(np.asarray(rhs))
    den = np.where(np.abs(rhs) < floor, 1.0, np.abs(rhs))
    return float(np.max(np.abs(lhs - rhs) / den))


# ---------------------------------------------------------------------------
# rho(q)
# ---------------------------------------------------------------------------


def hitting_weight(model: LevyModel, q: float, y_max: float, tol: float = 1e-6,
                   closed_form: bool = False) -> Callable[[np.ndarray], np.ndarray]:
    """Interpolant of ``y -> h_q(y) = E(e^{-q T_{-y}}; T_{-y} < inf)`` on ``[0, y_max]``.

    The grid (quadratic spacing, dense near 0) is doubled until the
    interpolation error at the new midpoints is below ``tol``.  Beyond
    ``y_max`` the last value is held.
    """
    ys, hs, err = _weight_grid(model, float(q), float(y_max), float(tol), bool(closed_form))
    spline = interpolate.PchipInterpolator(ys, hs, extrapolate=False)
    last = float(hs[-1])

    def w(y):
        y = np.asarray(y, dtype=float)
        out = spline(np.clip(y, 0.0, y_max))
        return np.where(y > y_max, last, out)

    w.refinement_error = err
    return w


@lru_cache(maxsize=64)
def _weight_grid(model: LevyModel, q: float, y_max: float, tol: float, closed_form: bool,
                 max_points: int = 1025):
    if closed_form:
        u0 = resolvent_density_closed_form(model, q, 0.0)
        f = lambda ys: np.array([resolvent_density_closed_form(model, q, -y) / u0 for y in ys])
    else:
        f = lambda ys: np.atleast_1d(hitting_transform(model, q, -np.asarray(ys)))
    u = np.linspace(0.0, 1.0, 17)
    hs = f(y_max * u ** 2)
    err = math.inf
    while u.size < max_points:
        um = 0.5 * (u[:-1] + u[1:])
        hm = f(y_max * um ** 2)
        est = interpolate.PchipInterpolator(y_max * u ** 2, hs)(y_max * um ** 2)
        err = float(np.max(np.abs(est - hm)))
        uu = np.empty(u.size + um.size)
        hh = np.empty_like(uu)
        uu[0::2], uu[1::2] = u, um
        hh[0::2], hh[1::2] = hs, hm
        u, hs = uu, hh
        if err < tol:
            break
    if err >= tol:
        log.warning("hitting weight grid not converged: %.2e", err)
    return y_max * u ** 2, hs, err


def _y_max(char: LadderChar) -> float:
    if isinstance(char, EmpiricalLadderChar):
        pos = char.dH[char.dH > 0]
        return float(pos.max()) if pos.size else 1.0
    if isinstance(char, TwoSidedExpLadder):
        return 40.0 / char.e1
    return 50.0


def analytic_rho(model: LevyModel, char: LadderChar, q: float, tol: float = 1e-6,
                 closed_form_weight: bool = False) -> float:
    """``rho(q)`` from ladder characteristics and hitting transforms.

    ``closed_form_weight`` swaps the numerical resolvent for the partial
    fraction formula (two-sided exponential jumps only).
    """
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    base = char.kappa + char.zero_part(q)
    if char.positive_mass() == 0:
        return float(base)
    w = hitting_weight(model, q, _y_max(char), tol, closed_form_weight)
    return float(base + char.positive_part(q, w))


def escape_probability(model: LevyModel, y) -> np.ndarray:
    """``P(T_{-y} = inf)``, the chance that the level ``-y`` is never hit."""
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    if model.jumps is None and model.sigma2 > 0:
        mu = model.path_drift
        out = -np.expm1(-2.0 * max(mu, 0.0) * ys / model.sigma2)
    elif model.is_recurrent or model.drifts_down:
        if model.sigma2 == 0 and model.path_drift == 0:
            raise NoClosedForm("points are not hit without drift or Gaussian part")
        out = np.zeros_like(ys)
    else:
        out = np.array([1.0 - hitting_probability(model, -float(v)) for v in ys])
    return out if np.ndim(y) else float(out[0])


@dataclass
class SubordinatorChar:
    """Characteristics of ``K``: killing, drift and a binned Lévy measure.

    ``bins`` holds rows ``(t_lo, t_hi, mass)``; rows from the ``y = 0`` part
    of ``Lambda`` are exact, the rest come from Monte Carlo hitting times.
    """

    kappa_K: float
    eta_K: float
    bins: list = field(default_factory=list)
    n_mc: int = 0

    def __post_init__(self):
        if self.kappa_K < 0 or self.eta_K < 0:
            raise ValueError("killing rate and drift must be nonnegative")

    def small_jump_moment(self) -> float:
        """``int (1 ^ t) Lambda_K(dt)`` over the bins (midpoints, right edge for the tail)."""
        tot = 0.0
        for b in self.bins:
            hi = b["t_hi"] if math.isfinite(b["t_hi"]) else b["t_lo"]
            tot += min(1.0, 0.5 * (b["t_lo"] + hi)) * b["mass"]
        return tot

    def rows(self) -> list[dict]:
        return [dict(b) for b in self.bins]


def _sample_positive_part(char: LadderChar, n: int, g: np.random.Generator):
    if isinstance(char, EmpiricalLadderChar):
        keep = char.dH > 0
        idx = g.integers(0, int(np.count_nonzero(keep)), n)
        return char.dtau[keep][idx], char.dH[keep][idx]
    if isinstance(char, TwoSidedExpLadder):
        grid = np.concatenate([[0.0], np.logspace(-5, 2, 57)])
        tail = np.array([char.nu_tail(t) for t in grid])
        cdf = 1.0 - np.clip(tail / char.mass, 0.0, 1.0)
        cdf = np.maximum.accumulate(cdf)
        s = np.interp(g.random(n) * cdf[-1], cdf, grid)
        return s, g.exponential(1.0 / char.e1, n)
    raise NoClosedForm(f"no sampler for the positive part of {type(char).__name__}")


def return_times(model: LevyModel, heights, dt: float, cap: float, seed: int,
                 stream_base: int = FRESH_STREAM_BASE, bridge: bool = True,
                 offsets=None):
    """Fresh copies of ``X`` started at each height and frozen at zero.

    Returns hitting times of zero (``inf`` when not reached by ``cap``) and,
    if ``offsets`` is given (one row per height, or one row for all), the
    values at those times (NaN once frozen or negative offset).
    """
    heights = np.asarray(heights, dtype=float)
    times = np.full(heights.size, np.inf)
    vals = None
    cfg = SimConfig(dt=dt, horizon=cap, seed=seed, bridge_correction=bridge)
    if offsets is not None:
        offsets = np.asarray(offsets, dtype=float)
        if offsets.ndim == 1:
            offsets = np.broadcast_to(offsets, (heights.size, offsets.size))
        vals = np.full(offsets.shape, np.nan)
    for i, y in enumerate(heights):
        c = cfg.with_stream(stream_base + i)
        level = -float(y)
        path = simulate_path(model, c, until=lambda p: math.isfinite(first_hitting(p, level).time))
        t = first_hitting(path, level).time
        times[i] = t
        if vals is not None:
            r = offsets[i]
            alive = (r >= 0) & (r < t) & (r <= path.end_time)
            vals[i, alive] = y + np.asarray(polyline_value(path, r[alive]))
    return times if vals is None else (times, vals)


def K_characteristics(model: LevyModel, char: LadderChar, n_mc: int = 2000, seed: int = 0,
                      t_edges=None, dt: float = 1e-3, cap: float = 50.0) -> SubordinatorChar:
    """``(kappa_K, eta_K, Lambda_K)`` from the ladder characteristics.

    ``kappa_K = kappa + int P(T_{-y} = inf) Lambda(ds, dy)`` and
    ``eta_K = eta``.  ``Lambda_K`` is the image of ``Lambda`` under
    ``(s, y) -> s + T_{-y}`` restricted to finite values; its positive-height
    part is sampled with ``n_mc`` fresh hitting times (0 skips it).
    """
    mass = char.positive_mass()
    if mass > 0:
        esc = lambda y: escape_probability(model, y)
        kappa_K = char.kappa + char.positive_part(0.0, lambda y: 1.0 - esc(y))
    else:
        kappa_K = char.kappa
    if t_edges is None:
        t_edges = np.concatenate([[0.0], np.logspace(-4, 2, 25), [np.inf]])
    t_edges = [float(t) for t in t_edges]
    masses = np.zeros(len(t_edges) - 1)
    try:
        tails = np.array([char.zero_tail(t) if t > 0 else math.inf for t in t_edges])
        with np.errstate(invalid="ignore"):
            masses += np.nan_to_num(tails[:-1] - tails[1:], nan=0.0, posinf=0.0)
    except (NoClosedForm, NotImplementedError):
        log.info("no zero-height tail for %s", type(char).__name__)
    n_used = 0
    if mass > 0 and n_mc > 0:
        g = make_generator(seed, FRESH_STREAM_BASE - 1)
        s, y = _sample_positive_part(char, n_mc, g)
        T = return_times(model, y, dt, cap, seed, stream_base=FRESH_STREAM_BASE + (1 << 30))
        ok = np.isfinite(T)
        h, _ = np.histogram(s[ok] + T[ok], bins=t_edges)
        masses += h * (mass / n_mc)
        n_used = n_mc
    bins = [dict(t_lo=t_edges[i], t_hi=t_edges[i + 1], mass=float(masses[i]))
            for i in range(len(t_edges) - 1)]
    return SubordinatorChar(kappa_K=float(max(kappa_K, 0.0)), eta_K=float(char.eta), bins=bins,
                            n_mc=n_used)


# ---------------------------------------------------------------------------
# checks against simulated excursions
# ---------------------------------------------------------------------------


def _ks(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        return math.nan
    return float(stats.ks_2samp(a, b).pvalue)


def entrance_law_check(model: LevyModel, tables, step: float, q: float, lam: float,
                       rho: float, eta_K: float, tol: float = 0.05, margin: Optional[float] = None,
                       seed: Optional[int] = None, min_steps: int = 100,
                       name: str = "entrance-law-transform") -> CheckReport:
    """Occupation transform of ``n^Z`` against ``(rho - i lam)/(q + psi(lam)) - eta_K``.

    ``tables`` are :class:`~rightinverse.right_inverse.ZTable` objects built
    with the same ``q`` and ``lam``.  Steps starting later than ``margin``
    (default ``12/q``) before the end of the data are dropped, which bounds
    the truncation of the still-running step by ``e^{-q margin}``.
    """
    margin = 12.0 / q if margin is None else margin
    occ = []
    for tab in tables:
        sel = tab.start_time <= tab.end_time - margin
        occ.append(tab.occupation[sel])
    occ = np.concatenate(occ) if occ else np.empty(0, dtype=complex)
    if occ.size < min_steps:
        raise InsufficientData(f"{occ.size} local-time steps, need {min_steps}")
    exposure = occ.size * step
    lhs = complex(occ.sum() / exposure)
    se = float(np.std(np.abs(occ - occ.mean())) * math.sqrt(occ.size) / exposure)
    rhs = complex((rho - 1j * lam) / (q + complex(model.psi(lam))) - eta_K)
    stat = abs(lhs - rhs) / abs(rhs) if abs(rhs) > 1e-12 else abs(lhs - rhs)
    return CheckReport(name, [lhs], [rhs], stat, tol, seed=seed, n_samples=int(occ.size),
                       detail={"q": q, "lam": lam, "se": se, "exposure": exposure})


def excursion_values(path, starts, durations, levels, t_grid) -> np.ndarray:
    """Values ``X(start + t) - level`` of excursions at times ``t``; NaN once ended."""
    starts = np.asarray(starts, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    times = starts[:, None] + t_grid[None, :]
    vals = np.asarray(polyline_value(path, times)) - np.asarray(levels, dtype=float)[:, None]
    dead = (t_grid[None, :] >= np.asarray(durations, dtype=float)[:, None]) | (times > path.end_time)
    return np.where(dead, np.nan, vals)


def _hist_rows(values, z_edges) -> np.ndarray:
    return np.array([np.histogram(col[np.isfinite(col)], bins=z_edges)[0] for col in values.T],
                    dtype=float)


def entrance_law_decomposition(model: LevyModel, z_values, z_exposure: float, r_values,
                               r_exposure: float, passage_s, passage_y, t_grid, z_edges,
                               dt: float, seed: int, tol: float = 0.10,
                               name: str = "entrance-law-decomposition") -> CheckReport:
    """Binned ``n^Z_t`` against ``n~^R_t + int P^dagger_{t-s}(y, .) Lambda(ds, dy)``.

    ``z_values`` and ``r_values`` hold excursion values at ``t_grid`` (NaN
    when ended; sup-excursions are ended at their first passage).  The
    second term continues every passage ``(s, y)`` with a fresh copy of ``X``
    started at ``y`` and frozen at zero.  The statistic is the binned total
    variation distance relative to the right-hand mass.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    z_edges = np.asarray(z_edges, dtype=float)
    lhs = _hist_rows(np.asarray(z_values, dtype=float).reshape(-1, t_grid.size), z_edges) / z_exposure
    rhs = _hist_rows(np.asarray(r_values, dtype=float).reshape(-1, t_grid.size), z_edges)
    passage_s = np.asarray(passage_s, dtype=float)
    passage_y = np.asarray(passage_y, dtype=float)
    n_fresh = 0
    if passage_y.size:
        offsets = t_grid[None, :] - passage_s[:, None]
        need = np.any(offsets >= 0, axis=1)
        if np.any(need):
            _, vals = return_times(model, passage_y[need], dt, float(t_grid.max()) + dt, seed,
                                   stream_base=FRESH_STREAM_BASE + (2 << 30),
                                   offsets=offsets[need])
            rhs = rhs + _hist_rows(vals, z_edges)
            n_fresh = int(np.count_nonzero(need))
    rhs = rhs / r_exposure
    total = float(rhs.sum())
    if total <= 0 and float(lhs.sum()) <= 0:
        stat = 0.0
    else:
        stat = float(np.abs(lhs - rhs).sum() / max(total, 1e-300))
    return CheckReport(name, lhs.ravel(), rhs.ravel(), stat, tol, seed=seed,
                       n_samples=int(np.asarray(z_values).shape[0]),
                       detail={"t_grid": t_grid.tolist(), "z_edges": _flat(z_edges),
                               "fresh_paths": n_fresh})


def theorem1_concat_check(model: LevyModel, zeta_plus, heights, post_durations,
                          exposure: float, char: LadderChar, s_edges, y_edges, dt: float,
                          cap: float, seed: int, tol: float = 0.10, bridge: bool = True,
                          min_samples: int = 100) -> list[CheckReport]:
    """Concatenation law of excursions that pass above their starting level.

    Two reports: a two-sample KS test of the time from first passage to the
    end of the excursion (capped at ``cap``) against fresh copies of ``X``
    started at the same heights and frozen at zero; and the largest
    relative deviation between the per-local-time counts of
    ``(zeta_plus, height)`` and the masses of ``Lambda`` on a grid of bins.
    """
    zeta_plus = np.asarray(zeta_plus, dtype=float)
    heights = np.asarray(heights, dtype=float)
    post = np.asarray(post_durations, dtype=float)
    if zeta_plus.size == 0 and char.positive_mass() == 0:
        # no upward jumps: nothing passes, the statement is empty
        return [CheckReport("theorem1-post-passage-ks", [], [], 1.0, ALPHA, kind="pvalue", seed=seed),
                CheckReport("theorem1-passage-marginal", [], [], 0.0, tol, seed=seed)]
    if zeta_plus.size < min_samples:
        raise InsufficientData(f"{zeta_plus.size} passing excursions, need {min_samples}")
    fresh = return_times(model, heights, dt, cap, seed, bridge=bridge)
    a = np.minimum(post, cap)
    b = np.minimum(fresh, cap)
    p = _ks(a, b)
    ks = CheckReport("theorem1-post-passage-ks", [float(np.mean(a))], [float(np.mean(b))], p, ALPHA,
                     kind="pvalue", seed=seed, n_samples=int(a.size),
                     detail={"cap": cap, "censored_lhs": int(np.count_nonzero(post >= cap)),
                             "censored_rhs": int(np.count_nonzero(fresh >= cap))})
    h, _, _ = np.histogram2d(zeta_plus, heights, bins=[s_edges, y_edges])
    lhs = h.ravel() / exposure
    rhs = np.array([char.positive_bin(s_edges[i], s_edges[i + 1], y_edges[j], y_edges[j + 1])
                    for i in range(len(s_edges) - 1) for j in range(len(y_edges) - 1)])
    se = np.sqrt(h.ravel()) / exposure
    marg = CheckReport("theorem1-passage-marginal", lhs, rhs, relative_deviation(lhs, rhs), tol,
                       seed=seed, n_samples=int(zeta_plus.size),
                       detail={"s_edges": _flat(s_edges), "y_edges": _flat(y_edges),
                               "se": _flat(se), "exposure": exposure})
    return [ks, marg]


@dataclass
class ExcursionRates:
    """Excursions longer than ``t0`` from one run, for the Gaussian-part scaling check."""

    sigma2: float
    z_durations: np.ndarray
    z_depths: np.ndarray
    z_exposure: float
    x_durations: np.ndarray
    x_depths: np.ndarray
    x_local_time: float
    t0: float

    @property
    def z_rate(self) -> float:
        return float(np.count_nonzero(self.z_durations > self.t0)) / self.z_exposure

    @property
    def x_rate(self) -> float:
        return float(np.count_nonzero(self.x_durations > self.t0)) / self.x_local_time

    @property
    def ratio(self) -> float:
        """Rate of long ``Z`` excursions over rate of long negative ``X`` excursions."""
        return self.z_rate / self.x_rate


def sigpos_check(model: LevyModel, rates: ExcursionRates, cap: float, seed: Optional[int] = None
                 ) -> list[CheckReport]:
    """Shape of ``Z`` excursions against excursions of ``X`` from 0 that start negative.

    Both samples are conditioned on a duration above ``rates.t0``; durations
    (capped) and depths are compared by two-sample KS tests.  The observed
    rate ratio and its ``2/sigma2`` prediction are reported in the details;
    they depend on the local-time normalisation at zero, so only the
    cross-run scaling (:func:`sigpos_scaling_check`) is tested.
    """
    if not model.sigma2 > 0:
        raise PreconditionError("the comparison needs a Gaussian part (sigma2 > 0)")
    zl = rates.z_durations > rates.t0
    xl = rates.x_durations > rates.t0
    if np.count_nonzero(zl) < 20 or np.count_nonzero(xl) < 20:
        raise InsufficientData("too few long excursions")
    detail = {"t0": rates.t0, "z_rate": rates.z_rate, "x_rate": rates.x_rate,
              "ratio": rates.ratio, "predicted_ratio": 2.0 / model.sigma2,
              "n_z": int(np.count_nonzero(zl)), "n_x": int(np.count_nonzero(xl))}
    a = np.minimum(rates.z_durations[zl], cap)
    b = np.minimum(rates.x_durations[xl], cap)
    dur = CheckReport("sigpos-duration-shape", [float(a.mean())], [float(b.mean())], _ks(a, b),
                      ALPHA, kind="pvalue", seed=seed, n_samples=int(a.size + b.size), detail=detail)
    c = rates.z_depths[zl]
    d = rates.x_depths[xl]
    dep = CheckReport("sigpos-depth-shape", [float(c.mean())], [float(d.mean())], _ks(c, d),
                      ALPHA, kind="pvalue", seed=seed, n_samples=int(c.size + d.size), detail=detail)
    return [dur, dep]


def sigpos_scaling_check(low: ExcursionRates, high: ExcursionRates, tol: float = 0.15,
                         seed: Optional[int] = None) -> CheckReport:
    """Paired runs with Gaussian parts ``s1 < s2``: ``ratio(s1)/ratio(s2)`` against ``s2/s1``."""
    observed = low.ratio / high.ratio
    predicted = high.sigma2 / low.sigma2
    return CheckReport("sigpos-scaling", [observed], [predicted], abs(observed / predicted - 1.0), tol,
                       seed=seed, n_samples=int(low.z_durations.size + high.z_durations.size),
                       detail={"ratio_low": low.ratio, "ratio_high": high.ratio,
                               "predicted_low": 2.0 / low.sigma2, "predicted_high": 2.0 / high.sigma2})


def jumpstart_rate_check(model: LevyModel, n_jump_starts: int, exposure: float, tol: float = 0.10,
                         seed: Optional[int] = None) -> CheckReport:
    """Rate of excursions that start with an upward jump, per unit local time.

    Without a Gaussian part and with drift ``b > 0`` the prediction is
    ``Pi(0, inf) / b``.
    """
    if model.sigma2 > 0 or not model.path_drift > 0:
        raise PreconditionError("needs bounded variation and positive drift")
    if model.jumps is None:
        up = 0.0
    else:
        law = model.jumps.law if hasattr(model.jumps, "law") else None
        if law is None:
            raise PreconditionError("needs compound Poisson jumps")
        up = model.jump_rate * law.prob_positive()
    predicted = up / model.path_drift
    observed = n_jump_starts / exposure
    stat = abs(observed / predicted - 1.0) if predicted > 0 else abs(observed)
    return CheckReport("bv-jumpstart-rate", [observed], [predicted], stat, tol, seed=seed,
                       n_samples=int(n_jump_starts),
                       detail={"exposure": exposure,
                               "se": math.sqrt(max(n_jump_starts, 1)) / exposure})
