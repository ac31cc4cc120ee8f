"""Ascending ladder processes and their characteristics.

The ladder local time is the continuous part of the running supremum, so the
ladder height has unit drift by construction.  The ladder exponent is

    k(alpha, beta) = kappa + eta alpha + beta + int (1 - e^{-alpha s - beta y}) Lambda(ds, dy).

Characteristics are available in closed form for Brownian motion with drift,
for spectrally negative models and for two-sided exponential jumps, and can
be estimated from simulated paths.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np
from scipy import integrate, special

from . import _kernels as K
from .levy_model import (CompoundPoisson, LevyModel, TwoSidedExponential,
                         laplace_root)
from .path_sim import SamplePath
from .resolvent import NoClosedForm, two_sided_exp_roots

__all__ = [
    "InsufficientData",
    "LadderChar",
    "BrownianLadder",
    "SpectrallyNegativeLadder",
    "TwoSidedExpLadder",
    "EmpiricalLadderChar",
    "closed_form_ladder",
    "closed_form_ladder_pair",
    "LadderData",
    "SupExcursion",
    "extract_ladder",
    "estimate_ladder_char",
    "extract_sup_excursions",
    "PotentialMeasure",
    "potential_measure",
    "QuintupleSample",
    "quintuple_marginal",
    "quintuple_transform_rhs",
    "write_bins_csv",
]

log = logging.getLogger(__name__)

MIN_LADDER_JUMPS = 1000

Weight = Callable[[np.ndarray], np.ndarray]


class InsufficientData(RuntimeError):
    """Too few samples for the requested estimate."""


def _invert_tail(transform: Callable[[complex], complex], t: float) -> float:
    """Numerical Laplace inversion (de Hoog) of a tail transform at ``t > 0``."""
    f = lambda p: mpmath.mpc(transform(complex(p)))
    try:
        return float(mpmath.re(mpmath.invertlaplace(f, t, method="dehoog")))
    except ZeroDivisionError:
        # the transform vanishes to working precision: the tail is negligible
        return 0.0


class LadderChar:
    """Characteristics ``(kappa, eta, Lambda)`` of the ascending ladder process."""

    provenance = "closed_form"
    kappa: float = 0.0
    eta: float = 0.0

    def zero_part(self, alpha):
        """``eta alpha + int (1 - e^{-alpha s}) Lambda(ds, {0})``."""
        raise NotImplementedError

    def positive_part(self, alpha, w: Weight):
        """``int_{y>0} (1 - e^{-alpha s} w(y)) Lambda(ds, dy)`` for a weight with ``w <= 1``."""
        raise NotImplementedError

    def positive_mass(self) -> float:
        return self.positive_part(0.0, lambda y: np.zeros_like(y))

    def exponent(self, alpha, beta):
        return self.kappa + self.zero_part(alpha) + beta + \
            self.positive_part(alpha, lambda y: np.exp(-beta * y))

    # binned representation -------------------------------------------------
    def zero_tail(self, t: float) -> float:
        """``Lambda((t, inf), {0})``."""
        raise NotImplementedError

    def positive_bin(self, s_lo, s_hi, y_lo, y_hi) -> float:
        """Mass of ``(s_lo, s_hi] x (y_lo, y_hi]``; ``s_lo == s_hi`` means the atom ``{s_lo}``."""
        raise NotImplementedError

    def bins(self, s_edges: Sequence[float], y_edges: Sequence[float]) -> list[dict]:
        """Masses on a grid of bins.

        The ``y = 0`` column has ``y_lo = y_hi = 0``.  Ladder jumps at ladder
        time 0 (possible only when the ladder time has a drift) get rows with
        ``s_lo = s_hi = 0``.
        """
        rows = []
        s_edges = list(s_edges)
        tails = [self.zero_tail(s) for s in s_edges]
        for i in range(len(s_edges) - 1):
            rows.append(dict(s_lo=s_edges[i], s_hi=s_edges[i + 1], y_lo=0.0, y_hi=0.0,
                             mass=tails[i] - tails[i + 1]))
        if s_edges and s_edges[0] == 0.0:
            for j in range(len(y_edges) - 1):
                m = self.positive_bin(0.0, 0.0, y_edges[j], y_edges[j + 1])
                if m > 0:
                    rows.append(dict(s_lo=0.0, s_hi=0.0, y_lo=y_edges[j], y_hi=y_edges[j + 1],
                                     mass=m))
        for i in range(len(s_edges) - 1):
            for j in range(len(y_edges) - 1):
                rows.append(dict(s_lo=s_edges[i], s_hi=s_edges[i + 1], y_lo=y_edges[j],
                                 y_hi=y_edges[j + 1],
                                 mass=self.positive_bin(s_edges[i], s_edges[i + 1],
                                                        y_edges[j], y_edges[j + 1])))
        return rows


@dataclass
class BrownianLadder(LadderChar):
    """Brownian motion ``mu t + sqrt(sigma2) W``.

    The ladder height is pure drift; the ladder time has Lévy density
    ``s^{-3/2} e^{-mu^2 s / (2 sigma2)} / (sigma sqrt(2 pi))`` and is killed at
    rate ``(|mu| - mu) / sigma2``.
    """

    mu: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self):
        self.kappa = (abs(self.mu) - self.mu) / self.sigma2
        self.eta = 0.0
        self._c = 1.0 / math.sqrt(2 * math.pi * self.sigma2)
        self._g = self.mu ** 2 / (2 * self.sigma2)

    def density(self, s):
        s = np.asarray(s, dtype=float)
        return self._c * s ** -1.5 * np.exp(-self._g * s)

    def zero_part(self, alpha):
        if np.iscomplexobj(alpha) or isinstance(alpha, complex):
            # analytic continuation of the integral below
            r = np.sqrt(self.mu ** 2 + 2 * self.sigma2 * alpha)
            return (r - abs(self.mu)) / self.sigma2
        if alpha == 0:
            return 0.0
        f = lambda s: -math.expm1(-alpha * s) * self._c * s ** -1.5 * math.exp(-self._g * s)
        a, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
        b, _ = integrate.quad(f, 1.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
        return a + b

    def positive_part(self, alpha, w):
        return 0.0

    def zero_tail(self, t):
        if t <= 0:
            return math.inf
        g = self._g
        val = 2 * math.exp(-g * t) / math.sqrt(t)
        if g > 0:
            val -= 2 * math.sqrt(math.pi * g) * special.erfc(math.sqrt(g * t))
        return self._c * val

    def positive_bin(self, s_lo, s_hi, y_lo, y_hi):
        return 0.0


class SpectrallyNegativeLadder(LadderChar):
    """No positive jumps: ``k(alpha, beta) = beta + Phi(alpha)``."""

    def __init__(self, model: LevyModel):
        if model.has_positive_jumps:
            raise NoClosedForm("model has positive jumps")
        self.model = model
        self.kappa = laplace_root(model, 0.0)
        self.eta = 1.0 / model.path_drift if model.is_bounded_variation else 0.0

    def phi(self, alpha: float) -> float:
        return laplace_root(self.model, float(alpha))

    def zero_part(self, alpha):
        return self.phi(alpha) - self.kappa

    def positive_part(self, alpha, w):
        return 0.0

    def positive_bin(self, s_lo, s_hi, y_lo, y_hi):
        return 0.0

    def zero_tail(self, t):
        raise NoClosedForm("ladder-time tail needs the complex one-sided exponent")


class TwoSidedExpLadder(LadderChar):
    """Two-sided exponential jumps (with or without a Gaussian part).

    With ``0 < beta_1 < e_1 < beta_2`` the positive roots of ``psi_L = alpha``,
    ``k(alpha, beta) = (beta + beta_1)(beta + beta_2) / (beta + e_1)``.  The
    positive-height part of Lambda is ``nu(ds) e_1 e^{-e_1 y} dy`` with
    ``int e^{-alpha s} nu(ds) = (e_1 - beta_1)(beta_2 - e_1) / e_1``.
    """

    def __init__(self, model: LevyModel):
        if not (isinstance(model.jumps, CompoundPoisson)
                and isinstance(model.jumps.law, TwoSidedExponential)):
            raise NoClosedForm("model does not have two-sided exponential jumps")
        if model.sigma2 == 0 and model.path_drift <= 0:
            raise NoClosedForm("bounded-variation model needs positive drift")
        self.model = model
        law = model.jumps.law
        self.e1 = law.rate_up
        self.e2 = law.rate_down
        b1, b2 = self._roots(0.0)
        self.kappa = float(np.real(b1 * b2 / self.e1))
        self.mass = float(np.real(self.B(0.0)))
        self.eta = 1.0 / model.path_drift if model.is_bounded_variation else 0.0

    @lru_cache(maxsize=4096)
    def _roots(self, alpha):
        pos, _ = two_sided_exp_roots(self.model, alpha)
        if len(pos) != 2:
            raise NoClosedForm(f"expected two roots with positive real part, got {pos}")
        return pos[0], pos[1]

    def B(self, alpha):
        b1, b2 = self._roots(alpha)
        return (self.e1 - b1) * (b2 - self.e1) / self.e1

    def k(self, alpha, beta):
        b1, b2 = self._roots(alpha)
        return (beta + b1) * (beta + b2) / (beta + self.e1)

    def k_hat(self, alpha, beta):
        _, neg = two_sided_exp_roots(self.model, alpha)
        g1, g2 = -neg[-1], -neg[0]
        return (beta + g1) * (beta + g2) / (beta + self.e2)

    def zero_part(self, alpha):
        b1, b2 = self._roots(alpha)
        return b1 + b2 - self.e1 - self.mass - self.kappa

    def _y_integral(self, w):
        e1 = self.e1
        with warnings.catch_warnings():
            # roundoff warnings near the requested accuracy are expected here
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(lambda y: float(w(np.array([y]))[0]) * e1 * math.exp(-e1 * y),
                                    0.0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
        return val

    def positive_part(self, alpha, w):
        return self.mass - self.B(alpha) * self._y_integral(w)

    def nu_tail(self, t):
        if t <= 0:
            return self.mass
        return _invert_tail(lambda a: (self.mass - self.B(a)) / a, t)

    def zero_tail(self, t):
        if t <= 0:
            return math.inf
        return _invert_tail(lambda a: (self.zero_part(a) - self.eta * a) / a, t)

    def positive_bin(self, s_lo, s_hi, y_lo, y_hi):
        ny = math.exp(-self.e1 * y_lo) - (math.exp(-self.e1 * y_hi) if math.isfinite(y_hi) else 0.0)
        hi = self.nu_tail(s_hi) if math.isfinite(s_hi) else 0.0
        return (self.nu_tail(s_lo) - hi) * ny


def closed_form_ladder(model: LevyModel) -> LadderChar:
    """Closed-form ladder characteristics; raises :class:`NoClosedForm` otherwise."""
    if model.experimental:
        raise NoClosedForm("no closed form for the experimental family")
    if model.jumps is None and model.sigma2 > 0:
        return BrownianLadder(mu=model.path_drift, sigma2=model.sigma2)
    if not model.has_positive_jumps:
        if model.sigma2 == 0 and model.path_drift <= 0:
            raise NoClosedForm("ladder process is degenerate without positive drift")
        return SpectrallyNegativeLadder(model)
    return TwoSidedExpLadder(model)


def closed_form_ladder_pair(model: LevyModel):
    """``(k, k_hat)`` ascending/descending ladder exponents as functions of ``(alpha, beta)``."""
    if model.experimental:
        raise NoClosedForm("no closed form for the experimental family")
    if model.jumps is None and model.sigma2 > 0:
        mu, s2 = model.path_drift, model.sigma2
        r = lambda a: np.sqrt(mu * mu + 2 * s2 * a + 0j)
        return (lambda a, b: b + (r(a) - mu) / s2,
                lambda a, b: b + (r(a) + mu) / s2)
    if isinstance(model.jumps, CompoundPoisson) and isinstance(model.jumps.law, TwoSidedExponential):
        lad = TwoSidedExpLadder(model)
        return lad.k, lad.k_hat
    if not model.has_positive_jumps and model.has_negative_jumps:
        phi = lambda a: laplace_root(model, float(np.real(a)))
        return (lambda a, b: b + phi(a),
                lambda a, b: (a - model.laplace_exponent(b)) / (phi(a) - b))
    if not model.has_negative_jumps and model.has_positive_jumps:
        mirror = LevyModel(a=-model.a, sigma2=model.sigma2, jumps=_mirror_jumps(model.jumps))
        phi = lambda a: laplace_root(mirror, float(np.real(a)))
        return (lambda a, b: (a - model.laplace_exponent(-b)) / (phi(a) - b),
                lambda a, b: b + phi(a))
    raise NoClosedForm(f"no closed-form ladder exponents for {model.describe()}")


def _mirror_jumps(jumps):
    from .levy_model import Atoms
    law = jumps.law
    if isinstance(law, Atoms):
        return CompoundPoisson(jumps.rate, Atoms(tuple(-s for s in law.sizes), law.probs))
    raise NoClosedForm("mirror image not in the catalog")


# ---------------------------------------------------------------------------
# empirical characteristics
# ---------------------------------------------------------------------------


class EmpiricalLadderChar(LadderChar):
    """Characteristics estimated from ladder jumps observed on simulated paths.

    ``dtau`` and ``dH`` are the observed ladder jumps and ``exposure`` the total
    local time observed, so each jump carries mass ``1 / exposure``.
    ``time_drift`` is the creeping time per unit local time; it is the ladder
    time drift for bounded-variation paths and a discretisation remainder of
    small excursions otherwise (then ``eta`` is reported as 0 but the
    remainder still enters the exponent).
    """

    provenance = "empirical"

    def __init__(self, dtau, dH, exposure: float, kappa: float, time_drift: float,
                 bounded_variation: bool, n_paths: int = 0):
        self.dtau = np.asarray(dtau, dtype=float)
        self.dH = np.asarray(dH, dtype=float)
        self.exposure = float(exposure)
        self.kappa = float(kappa)
        self.time_drift = float(time_drift)
        self.eta = self.time_drift if bounded_variation else 0.0
        self.n_paths = n_paths
        self._zero = self.dH == 0
        self.n_jumps = int(self.dtau.size)

    def zero_part(self, alpha):
        s = self.dtau[self._zero]
        return self.time_drift * alpha + float(np.sum(-np.expm1(-alpha * s))) / self.exposure

    def positive_part(self, alpha, w):
        s = self.dtau[~self._zero]
        y = self.dH[~self._zero]
        if s.size == 0:
            return 0.0
        return float(np.sum(1.0 - np.exp(-alpha * s) * w(y))) / self.exposure

    def zero_tail(self, t):
        return float(np.count_nonzero(self.dtau[self._zero] > t)) / self.exposure

    def positive_bin(self, s_lo, s_hi, y_lo, y_hi):
        s = self.dtau[~self._zero]
        y = self.dH[~self._zero]
        in_s = (s == s_lo) if s_lo == s_hi else (s > s_lo) & (s <= s_hi)
        m = in_s & (y > y_lo) & (y <= y_hi)
        return float(np.count_nonzero(m)) / self.exposure

    def bins(self, s_edges=None, y_edges=None):
        if s_edges is None:
            s_edges = np.concatenate([[0.0], np.logspace(-6, 2, 33)])
        if y_edges is None:
            y_edges = np.concatenate([[0.0], np.logspace(-4, 1, 21), [np.inf]])
        return super().bins(s_edges, y_edges)


@dataclass
class LadderData:
    """Ladder process of one path.

    Jump marks are indexed by the local time ``x`` at which they occur, with
    the excursion start ``t0``, the ladder time jump ``dtau`` and ladder height
    jump ``dH``.  ``level`` is the supremum just before the jump.
    """

    x: np.ndarray
    t0: np.ndarray
    dtau: np.ndarray
    dH: np.ndarray
    local_time: float
    sup: float
    creep_time: float
    last_sup_time: float
    end_time: float
    end_value: float
    killed: bool = False
    kill_local_time: Optional[float] = None
    open_last: bool = False

    @property
    def n_jumps(self) -> int:
        return int(self.x.size)

    @property
    def level(self) -> np.ndarray:
        return self.x + np.cumsum(self.dH) - self.dH

    def records(self) -> list[tuple[float, float, float]]:
        """``(x, tau_x, H_x)`` right after every jump mark."""
        H = self.x + np.cumsum(self.dH)
        return list(zip(self.x.tolist(), (self.t0 + self.dtau).tolist(), H.tolist()))


def extract_ladder(path: SamplePath, model: Optional[LevyModel] = None) -> LadderData:
    """Ladder process of a path.

    A ladder process is marked as killed when the model drifts to minus
    infinity: the supremum observed by the horizon is then taken as the
    overall supremum, and its local time as the killing time.  Otherwise the
    excursion still running at the end of the data is kept as a last record
    (``open_last``) with its observed duration: dropping it would bias the
    long-excursion part of ``Lambda`` because the end of the data falls
    inside a length-biased excursion.
    """
    n = path.n
    rx = np.empty(n)
    rt = np.empty(n)
    rd = np.empty(n)
    rh = np.empty(n)
    nr, lt, M, creep, G = K.ladder_scan(path.T, path.VR, path.VL, n, rx, rt, rd, rh)
    killed = bool(model is not None and model.drifts_down)
    open_last = (not killed) and path.end_time > G
    if open_last:
        # the excursion running at the end starts at local time lt like every
        # other one; it enters censored at its observed length and height 0
        rx[nr], rt[nr], rd[nr], rh[nr] = lt, G, path.end_time - G, 0.0
        nr += 1
    return LadderData(x=rx[:nr].copy(), t0=rt[:nr].copy(), dtau=rd[:nr].copy(), dH=rh[:nr].copy(),
                      local_time=float(lt), sup=float(M), creep_time=float(creep),
                      last_sup_time=float(G), end_time=path.end_time, end_value=float(path.VR[-1]),
                      killed=killed, kill_local_time=float(lt) if killed else None,
                      open_last=open_last)


def estimate_ladder_char(ladders: Sequence[LadderData], bounded_variation: bool = False,
                         min_jumps: int = MIN_LADDER_JUMPS) -> EmpiricalLadderChar:
    """Pool ladder jumps from many paths into empirical characteristics."""
    total = sum(l.n_jumps for l in ladders)
    if total < min_jumps:
        raise InsufficientData(f"{total} ladder jumps observed, need {min_jumps}")
    exposure = sum(l.local_time for l in ladders)
    if exposure <= 0:
        raise InsufficientData("no local time observed")
    kills = sum(1 for l in ladders if l.killed)
    creep = sum(l.creep_time for l in ladders)
    dtau = np.concatenate([l.dtau for l in ladders])
    dH = np.concatenate([l.dH for l in ladders])
    return EmpiricalLadderChar(dtau, dH, exposure, kills / exposure, creep / exposure,
                               bounded_variation, n_paths=len(ladders))


@dataclass
class SupExcursion:
    """Excursion below the running supremum, frozen when it ends.

    ``terminal_height`` is the ladder height jump at the end; when it is
    positive the excursion passes above its starting level at
    ``zeta_plus = duration`` with first positive height ``terminal_height``.
    """

    start_local_time: float
    start_time: float
    level: float
    duration: float
    terminal_height: float

    @property
    def passes_positive(self) -> bool:
        return self.terminal_height > 0

    @property
    def zeta_plus(self) -> float:
        return self.duration if self.passes_positive else math.inf

    def samples(self, path: SamplePath, r) -> np.ndarray:
        """``R = X - sup`` at times ``r`` after the start (before the terminal jump)."""
        r = np.clip(np.asarray(r, dtype=float), 0.0, self.duration)
        vals = np.asarray(path.value_at(self.start_time + r)) - self.level
        at_end = r >= self.duration
        if self.passes_positive:
            vals = np.where(at_end, self.terminal_height, np.minimum(vals, 0.0))
        return vals


def extract_sup_excursions(path: SamplePath, ladder: LadderData) -> list[SupExcursion]:
    """One excursion per positive ladder time jump."""
    lev = ladder.level
    return [SupExcursion(float(x), float(t0), float(m), float(d), float(h))
            for x, t0, m, d, h in zip(ladder.x, ladder.t0, lev, ladder.dtau, ladder.dH)
            if d > 0]


def write_bins_csv(rows: Sequence[dict], out) -> None:
    import csv
    from pathlib import Path
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["s_lo", "s_hi", "y_lo", "y_hi", "mass"])
        w.writeheader()
        for r in rows:
            w.writerow({k: r[k] for k in w.fieldnames})


# ---------------------------------------------------------------------------
# potential measure and the first-passage quintuple
# ---------------------------------------------------------------------------


@dataclass
class PotentialMeasure:
    """Empirical ``U(ds, dy) = int P(tau_x in ds, H_x in dy; x < xi) dx``.

    Stored as weighted atoms ``(tau, H)`` from a local-time grid of step ``dx``
    on each path; each atom weighs ``dx / n_paths``.
    """

    tau: np.ndarray
    H: np.ndarray
    weight: float
    dx: float
    n_paths: int

    def mass(self, s_max: float = math.inf, y_max: float = math.inf) -> float:
        m = (self.tau <= s_max) & (self.H <= y_max)
        return float(np.count_nonzero(m)) * self.weight

    def bins(self, s_edges, y_edges) -> list[dict]:
        h, _, _ = np.histogram2d(self.tau, self.H, bins=[s_edges, y_edges])
        rows = []
        for i in range(len(s_edges) - 1):
            for j in range(len(y_edges) - 1):
                rows.append(dict(s_lo=float(s_edges[i]), s_hi=float(s_edges[i + 1]),
                                 y_lo=float(y_edges[j]), y_hi=float(y_edges[j + 1]),
                                 mass=float(h[i, j]) * self.weight))
        return rows


def _ladder_clock(path: SamplePath, lt_q: np.ndarray):
    """Ladder time and height at local times ``lt_q`` (inf where not reached)."""
    lev = np.empty(0)
    K_lev = np.empty(0)
    K_lt = np.full(lt_q.size, np.inf)
    H_lt = np.full(lt_q.size, np.inf)
    marks = np.empty(1)
    K.thinned_scan(path.T, path.VR, path.VL, path.n, np.inf, lev, lt_q, K_lev, K_lt, H_lt,
                   marks, marks.copy(), marks.copy(), marks.copy())
    return K_lt, H_lt


def potential_measure(paths: Sequence[SamplePath], dx: float = 1.0 / 256,
                      x_max: float = 4.0) -> PotentialMeasure:
    """Occupation of the ladder process ``(tau_x, H_x)`` over local time ``x < x_max``."""
    if not paths:
        raise InsufficientData("no paths")
    lt_q = (np.arange(int(round(x_max / dx))) + 0.5) * dx
    taus, hs = [], []
    for p in paths:
        t, h = _ladder_clock(p, lt_q)
        ok = np.isfinite(t)
        taus.append(t[ok])
        hs.append(h[ok])
    tau = np.concatenate(taus)
    H = np.concatenate(hs)
    if tau.size == 0:
        raise InsufficientData("ladder process never observed")
    return PotentialMeasure(tau, H, dx / len(paths), dx, len(paths))


@dataclass
class QuintupleSample:
    """First passage above ``level`` on many paths.

    Arrays hold, per path, ``T - G`` (time since the last supremum), ``G``,
    the overshoot ``O`` and the undershoot of the supremum ``level - sup``;
    entries are NaN where there was no passage within the horizon.
    """

    level: float
    since_sup: np.ndarray
    last_sup: np.ndarray
    overshoot: np.ndarray
    sup_gap: np.ndarray

    @property
    def n_paths(self) -> int:
        return int(self.since_sup.size)

    @property
    def passed(self) -> np.ndarray:
        return np.isfinite(self.since_sup)

    @property
    def by_jump(self) -> np.ndarray:
        return self.passed & (np.nan_to_num(self.overshoot) > 0)

    def transform(self, a: float, b: float, c: float, d: float) -> tuple[float, float]:
        """MC mean and s.e. of ``E[e^{-a(T-G) - bG - cO - d(level - sup)}; O > 0]``."""
        m = self.by_jump
        v = np.zeros(self.n_paths)
        v[m] = np.exp(-a * self.since_sup[m] - b * self.last_sup[m] - c * self.overshoot[m]
                      - d * self.sup_gap[m])
        return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))

    def histogram(self, field_name: str, edges) -> np.ndarray:
        vals = getattr(self, field_name)[self.by_jump]
        return np.histogram(vals, bins=edges)[0] / self.n_paths


def quintuple_marginal(paths: Sequence[SamplePath], level: float) -> QuintupleSample:
    out = np.full((4, len(paths)), np.nan)
    for i, p in enumerate(paths):
        t, o, gap, g = K.passage_scan(p.T, p.VR, p.VL, p.n, float(level))
        if math.isfinite(t):
            out[:, i] = (t - g, g, o, gap)
    return QuintupleSample(float(level), *out)


def quintuple_transform_rhs(char: LadderChar, potential: PotentialMeasure, level: float,
                            a: float, b: float, c: float, d: float, n_grid: int = 65) -> float:
    """Prediction for :meth:`QuintupleSample.transform` from ``Lambda`` and ``U``.

    ``int U(ds, dh) 1{h <= x} e^{-bs - d(x-h)} int Lambda(dt, dz) 1{z > x-h} e^{-at - c(z-x+h)}``.
    """
    keep = potential.H <= level
    s = potential.tau[keep]
    gap = level - potential.H[keep]
    mass = char.positive_mass()
    grid = np.linspace(0.0, level, n_grid)

    def inner(g):
        w = lambda z: np.where(z > g, np.exp(-c * (z - g)), 0.0)
        return mass - char.positive_part(a, w)

    vals = np.array([inner(g) for g in grid])
    lam = np.interp(gap, grid, vals)
    return float(np.sum(np.exp(-b * s - d * gap) * lam) * potential.weight)
