"""Minimal right inverse on simulated paths.

Two constructions are provided.  ``evans_construct`` iterates hitting times
of the dyadic levels ``k 2^-n``; ``thinned_ladder_construct`` follows the
ascending ladder process, keeps ladder jumps of height at most ``2^-n`` and
replaces larger ones by the excursion plus the return time to the pre-jump
supremum.

On the dyadic grid the local time during Evans step ``k`` (from ``K`` at
level ``k 2^-n`` to the hitting of ``(k+1) 2^-n``) is ``(k+1) 2^-n``, so the
reflected process ``Z = X - L`` equals ``-2^-n`` at the step boundaries and
tends to 0 there as the depth grows.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .fluctuation import InsufficientData
from .levy_model import LevyModel
from .path_sim import SamplePath, SimConfig, make_generator

__all__ = [
    "DepthTooFine",
    "RightInverseResult",
    "ThinnedResult",
    "ZExcursion",
    "ZTable",
    "dyadic_levels",
    "evans_construct",
    "evans_progress",
    "evans_nesting_ok",
    "thinned_ladder_construct",
    "reflect",
    "z_table",
    "extract_Z_excursions",
    "empirical_rho",
    "z_split",
    "evans_batch",
    "EvansBatch",
]

log = logging.getLogger(__name__)

MIN_RHO_SAMPLES = 1000
MAX_DEPTH = 40


class DepthTooFine(ValueError):
    """Dyadic step below the numerical resolution of path values."""


def dyadic_levels(n: int, x_max: float = 1.0) -> np.ndarray:
    """Levels ``k 2^-n`` for ``k = 1 .. x_max 2^n``."""
    if not 0 <= n <= MAX_DEPTH:
        raise DepthTooFine(f"depth {n} outside [0, {MAX_DEPTH}]")
    m = int(round(x_max * 2 ** n))
    if 2.0 ** -n < 64 * np.finfo(float).eps * max(1.0, x_max):
        raise DepthTooFine(f"step 2^-{n} below float resolution at level {x_max}")
    return np.arange(1, m + 1, dtype=float) * 2.0 ** -n


@dataclass
class RightInverseResult:
    """``K`` on the grid ``x_j = j 2^-n`` (``K[0] = 0``).

    ``K[j] = inf`` for grid points at or beyond ``xi_K``, the first level not
    reached within the simulated time; ``censored`` tells whether that
    happened because the path ended (rather than because it was complete).
    """

    x: np.ndarray
    K: np.ndarray
    depth: int
    method: str
    xi_K: float
    censored: bool

    @property
    def step(self) -> float:
        return 2.0 ** -self.depth

    @property
    def completed(self) -> int:
        """Number of levels reached (excluding level 0)."""
        return int(np.count_nonzero(np.isfinite(self.K))) - 1

    def K_at(self, x):
        """Step function ``K_x = K[floor(x 2^n)]``."""
        j = np.floor(np.asarray(x, dtype=float) / self.step + 1e-9).astype(int)
        j = np.clip(j, 0, self.K.size - 1)
        return self.K[j]

    def L_at(self, t):
        """``L_t = inf{x : K_x > t}`` on the grid."""
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.K, t, side="right")
        return np.minimum(k * self.step, self.xi_K)

    def rows(self):
        return [{"x": float(a), "K_x": float(b)} for a, b in zip(self.x, self.K)]


@dataclass
class ThinnedResult(RightInverseResult):
    """Thinned-ladder clock with its local-time parametrisation.

    ``K`` holds the clock at the first time the thinned height reaches each
    grid level; ``K_local`` and ``H_local`` hold clock and height at local
    times ``x``.  Marks ``(S, t0, dK, dH)`` record the replaced ladder jumps.
    """

    K_local: np.ndarray = field(default_factory=lambda: np.empty(0))
    H_local: np.ndarray = field(default_factory=lambda: np.empty(0))
    mark_S: np.ndarray = field(default_factory=lambda: np.empty(0))
    mark_t0: np.ndarray = field(default_factory=lambda: np.empty(0))
    mark_dK: np.ndarray = field(default_factory=lambda: np.empty(0))
    mark_dH: np.ndarray = field(default_factory=lambda: np.empty(0))
    status: int = 0


def evans_progress(n: int, x_max: float = 1.0):
    """Resumable Evans scan, usable as the ``until`` argument of ``simulate_path``."""
    levels = dyadic_levels(n, x_max)
    hits = np.full(levels.size, np.inf)
    state = [0, 0, 0.0, 0.0]

    def until(path: SamplePath) -> bool:
        k, i, t, v = K.evans_scan(path.T, path.VR, path.VL, path.n, levels, hits, *state)
        state[:] = [k, i, t, v]
        return k == levels.size

    until.hits = hits
    return until


def evans_construct(path: SamplePath, n: int, x_max: float = 1.0) -> RightInverseResult:
    """Iterated hitting times of the dyadic levels up to ``x_max``."""
    levels = dyadic_levels(n, x_max)
    hits = np.full(levels.size, np.inf)
    k, _, _, _ = K.evans_scan(path.T, path.VR, path.VL, path.n, levels, hits, 0, 0, 0.0, 0.0)
    Kx = np.concatenate([[0.0], hits])
    x = np.concatenate([[0.0], levels])
    xi = math.inf if k == levels.size else float(levels[k])
    return RightInverseResult(x, Kx, n, f"evans(n={n})", xi, censored=k < levels.size)


def evans_nesting_ok(path: SamplePath, n: int, x_max: float = 1.0) -> bool:
    """``K^(n) >= K^(n-1)`` on the coarser grid (refinement only adds constraints)."""
    fine = evans_construct(path, n, x_max)
    coarse = evans_construct(path, n - 1, x_max)
    return bool(np.all(fine.K[::2] >= coarse.K))


def thinned_ladder_construct(path: SamplePath, n: int, x_max: float = 1.0,
                             eps: Optional[float] = None) -> ThinnedResult:
    """Thinned-ladder clock with threshold ``eps = 2^-n`` on the grid of step ``2^-n``."""
    levels = dyadic_levels(n, x_max)
    eps = 2.0 ** -n if eps is None else eps
    K_lev = np.full(levels.size, np.inf)
    K_lt = np.full(levels.size, np.inf)
    H_lt = np.full(levels.size, np.inf)
    cap = max(16, path.n // 4)
    mS, mt, mK, mH = (np.empty(cap) for _ in range(4))
    nm, status, _, _, _ = K.thinned_scan(path.T, path.VR, path.VL, path.n, eps, levels, levels,
                                         K_lev, K_lt, H_lt, mS, mt, mK, mH)
    x = np.concatenate([[0.0], levels])
    reached = np.isfinite(K_lev)
    xi = math.inf if reached.all() else float(levels[np.argmin(reached)])
    return ThinnedResult(x, np.concatenate([[0.0], K_lev]), n, f"thinned(n={n})", xi,
                         censored=status != 0,
                         K_local=np.concatenate([[0.0], K_lt]),
                         H_local=np.concatenate([[0.0], H_lt]),
                         mark_S=mS[:nm].copy(), mark_t0=mt[:nm].copy(), mark_dK=mK[:nm].copy(),
                         mark_dH=mH[:nm].copy(), status=int(status))


def reflect(path: SamplePath, result: RightInverseResult):
    """Local time ``L`` and ``Z = X - L`` at the path vertices.

    Beyond the last grid level ``L`` is undefined (NaN) unless ``K`` was
    killed or censored, in which case ``L = xi_K`` afterwards.
    """
    L = result.L_at(path.T)
    if not math.isfinite(result.xi_K):
        L = np.where(path.T >= result.K[-1], np.nan, L)
    return L, path.VR - L


@dataclass
class ZTable:
    """Per-step summaries of excursions away from the right inverse (Evans grid).

    Step ``k`` starts at ``K[k]`` with local time ``x[k+1]``.  ``open`` marks
    the final step that was still running when the path ended; its duration
    and post-passage duration are ``inf``.  ``excursion_start`` differs from
    ``start_time`` only without a Gaussian part, where the excursion begins
    at the first jump of the step.
    """

    start_local_time: np.ndarray
    start_time: np.ndarray
    excursion_start: np.ndarray
    duration: np.ndarray
    is_excursion: np.ndarray
    start_value: np.ndarray
    zeta_plus: np.ndarray
    height: np.ndarray
    post_duration: np.ndarray
    depth: np.ndarray
    occupation: np.ndarray
    open: np.ndarray
    end_time: float

    @property
    def passes_positive(self) -> np.ndarray:
        return np.isfinite(self.zeta_plus)

    def __len__(self):
        return int(self.duration.size)


def z_table(path: SamplePath, result: RightInverseResult, q: float = 1.0, lam: float = 0.0,
            include_open: bool = True) -> ZTable:
    """Summaries of every Evans step, including ``int_0^zeta e^{-qr} e^{i lam Z_r} dr``."""
    step = result.step
    levels = result.x[1:]
    hits = result.K[1:].copy()
    kdone = result.completed
    nsteps = kdone
    if include_open and kdone < levels.size:
        hits[kdone] = path.end_time
        nsteps = kdone + 1
    dur, sv, zp, ht, post, dep, ore, oim = (np.empty(nsteps) for _ in range(8))
    is_exc = np.empty(nsteps, dtype=np.bool_)
    K.z_table(path.T, path.VR, path.VL, path.n, hits, levels, nsteps, step,
              path.sigma2 > 0, float(q), float(lam), dur, is_exc, sv, zp, ht, post, dep, ore, oim)
    opened = np.zeros(nsteps, dtype=bool)
    starts = result.K[:nsteps].copy()
    exc_start = np.where(is_exc, hits[:nsteps] - dur, starts)
    if nsteps > kdone:
        opened[-1] = True
        dur[-1] = np.inf
        if np.isfinite(zp[-1]):
            post[-1] = np.inf
    return ZTable(start_local_time=levels[:nsteps].copy(), start_time=starts,
                  excursion_start=exc_start, duration=dur,
                  is_excursion=is_exc, start_value=sv, zeta_plus=zp, height=ht,
                  post_duration=post, depth=dep, occupation=ore + 1j * oim, open=opened,
                  end_time=path.end_time)


@dataclass
class ZExcursion:
    """One excursion of ``Z`` away from zero, read off an Evans step."""

    start_local_time: float
    start_time: float
    duration: float
    level: float
    start_value: float
    zeta_plus: float
    first_height: float
    post_passage_duration: float

    @property
    def passes_positive(self) -> bool:
        return math.isfinite(self.zeta_plus)

    def samples(self, path: SamplePath, r) -> np.ndarray:
        """``e^Z(r) = Z_{start + r}``; zero beyond the duration."""
        r = np.asarray(r, dtype=float)
        vals = np.asarray(path.value_at(self.start_time + np.minimum(r, self.duration))) - self.level
        return np.where(r >= self.duration, 0.0, vals)

    def row(self) -> dict:
        return {"x": self.start_local_time, "duration": self.duration,
                "start_value": self.start_value, "passes_positive": int(self.passes_positive),
                "post_passage_duration": self.post_passage_duration}


def extract_Z_excursions(path: SamplePath, result: RightInverseResult) -> list[ZExcursion]:
    """Excursions of ``Z`` on completed Evans steps."""
    tab = z_table(path, result, include_open=False)
    out = []
    for k in np.flatnonzero(tab.is_excursion):
        out.append(ZExcursion(float(tab.start_local_time[k]) - result.step, float(tab.excursion_start[k]),
                              float(tab.duration[k]), float(tab.start_local_time[k]),
                              float(tab.start_value[k]), float(tab.zeta_plus[k]),
                              float(tab.height[k]), float(tab.post_duration[k])))
    return out


def empirical_rho(K1, q: float, min_samples: int = MIN_RHO_SAMPLES) -> tuple[float, float]:
    """``-log E(e^{-q K_1}; K_1 < inf)`` with a delta-method standard error."""
    K1 = np.asarray(K1, dtype=float)
    if K1.size < min_samples:
        raise InsufficientData(f"{K1.size} samples of K_1, need {min_samples}")
    v = np.where(np.isfinite(K1), np.exp(-q * np.where(np.isfinite(K1), K1, 0.0)), 0.0)
    m = float(v.mean())
    if m <= 0:
        raise InsufficientData("every sample killed before local time 1")
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return -math.log(m), se / m


def z_split(hit, passage, q: float, n: int) -> tuple[float, float, float]:
    """``(z_n, zhat_n, ztilde_n)`` with ``z_n = zhat_n + ztilde_n`` termwise.

    ``z_n = 2^n E(1 - e^{-q T})`` for the hitting time ``T`` of ``2^-n``;
    ``zhat_n`` uses the first passage time ``T+`` and ``ztilde_n`` the
    remaining factor ``e^{-q T+} (1 - e^{-q (T - T+)})``.
    """
    hit = np.asarray(hit, dtype=float)
    passage = np.asarray(passage, dtype=float)
    e_hit = np.where(np.isfinite(hit), np.exp(-q * np.nan_to_num(hit, posinf=0.0)), 0.0)
    e_pass = np.where(np.isfinite(passage), np.exp(-q * np.nan_to_num(passage, posinf=0.0)), 0.0)
    zhat_terms = 1.0 - e_pass
    ztil_terms = e_pass - e_hit
    scale = 2.0 ** n
    zhat = scale * float(zhat_terms.mean())
    ztil = scale * float(ztil_terms.mean())
    return scale * float((zhat_terms + ztil_terms).mean()), zhat, ztil


# ---------------------------------------------------------------------------
# batch driver
# ---------------------------------------------------------------------------


@dataclass
class EvansBatch:
    """Selected Evans hitting times for many paths (rows ordered by stream id)."""

    levels: np.ndarray
    K: np.ndarray
    reached: np.ndarray
    n_paths: int


def _evans_chunk(model: LevyModel, cfg: SimConfig, depth: int, x_max: float,
                 keep: np.ndarray, start: int, stop: int):
    levels = dyadic_levels(depth, x_max)
    kind, params = model.encode_jumps()
    rate = model.jump_rate
    sig = math.sqrt(model.sim_sigma2)
    bridge = cfg.bridge_correction and sig > 0
    fn = K.evans_stream_bridge if bridge else K.evans_stream_plain
    out = np.full((stop - start, keep.size), np.inf)
    reached = np.zeros(stop - start, dtype=np.int64)
    hits = np.empty(levels.size)
    for r, sid in enumerate(range(start, stop)):
        g = make_generator(cfg.seed, cfg.stream_id + sid)
        nj = g.exponential(1.0 / rate) if rate > 0 else math.inf
        hits.fill(np.inf)
        k, _ = fn(g, levels, hits, cfg.dt, cfg.n_cells, nj, model.path_drift, sig, rate,
                  kind, params, 4096)
        out[r] = hits[keep]
        reached[r] = k
    return out, reached


def evans_batch(model: LevyModel, cfg: SimConfig, n_paths: int, depth: int,
                x_max: float = 1.0, keep: Optional[Sequence[int]] = None,
                workers: int = 1) -> EvansBatch:
    """Evans hitting times on ``n_paths`` streamed paths.

    Path ``i`` uses substream ``cfg.stream_id + i``.  Only the level indices in
    ``keep`` (default: first and last level) are stored.  The output does not
    depend on ``workers``.
    """
    levels = dyadic_levels(depth, x_max)
    keep = np.array([0, levels.size - 1] if keep is None else keep, dtype=np.int64)
    bounds = np.linspace(0, n_paths, max(1, workers) * 4 + 1).astype(int)
    jobs = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_evans_chunk, *zip(*[(model, cfg, depth, x_max, keep, a, b)
                                                      for a, b in jobs])))
    else:
        parts = [_evans_chunk(model, cfg, depth, x_max, keep, a, b) for a, b in jobs]
    Kk = np.concatenate([p[0] for p in parts])
    reached = np.concatenate([p[1] for p in parts])
    return EvansBatch(levels[keep], Kk, reached, n_paths)
