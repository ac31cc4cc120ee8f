"""Path simulation for catalog Lévy models.

Paths are kept as polylines with jumps.  Vertices are the grid points
``k * dt``, the exact (off-grid) jump times and, when the Brownian-bridge
correction is on, one sampled bridge maximum and one bridge minimum per
sub-interval.  The bridge vertices make the polyline attain the same extremes
as the diffusion between knots, so level crossings that happen inside a cell
are not missed.

Randomness comes from a counter-based Philox stream keyed by
``(seed, stream_id)``.  Draws are consumed cell by cell, so a path extended
lazily in several chunks is identical to the same path drawn in one go.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .levy_model import LevyModel

__all__ = [
    "ConfigError",
    "SimConfig",
    "SamplePath",
    "HittingResult",
    "make_generator",
    "simulate_path",
    "first_hitting",
    "first_passage",
    "running_supremum",
    "polyline_value",
    "write_path_csv",
]

log = logging.getLogger(__name__)

_MIN_CHUNK = 2048


class ConfigError(ValueError):
    """Invalid simulation or experiment configuration."""


@dataclass(frozen=True)
class SimConfig:
    dt: float
    horizon: float
    seed: int = 0
    stream_id: int = 0
    bridge_correction: bool = False

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if self.dt >= self.horizon:
            raise ConfigError("dt must be smaller than the horizon")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if int(self.stream_id) < 0:
            raise ConfigError("stream_id must be >= 0")

    @property
    def n_cells(self) -> int:
        return int(math.ceil(self.horizon / self.dt - 1e-9))

    def with_stream(self, stream_id: int) -> "SimConfig":
        return SimConfig(self.dt, self.horizon, self.seed, stream_id, self.bridge_correction)


def make_generator(seed: int, stream_id: int) -> np.random.Generator:
    """Independent generator for one ``(seed, stream_id)`` pair."""
    key = int(seed) + (int(stream_id) << 64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class SamplePath:
    """A simulated path stored as a polyline with jumps.

    ``T``, ``VR`` and ``VL`` hold vertex times, values and left limits.
    ``end_time`` is the last simulated time; ``complete`` tells whether the
    full horizon was simulated (lazy simulation may stop earlier).
    """

    T: np.ndarray
    VR: np.ndarray
    VL: np.ndarray
    dt: float
    horizon: float
    sigma2: float
    seed: int = 0
    stream_id: int = 0
    bridge: bool = False
    model_name: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @property
    def end_time(self) -> float:
        return float(self.T[-1])

    @property
    def complete(self) -> bool:
        return self.end_time >= self.horizon - 0.5 * self.dt

    @property
    def arrays(self):
        return self.T, self.VR, self.VL, self.n

    @property
    def is_jump(self) -> np.ndarray:
        return self.VR != self.VL

    @property
    def jumps(self) -> list[tuple[float, float]]:
        idx = np.flatnonzero(self.is_jump)
        return [(float(self.T[i]), float(self.VR[i] - self.VL[i])) for i in idx]

    @property
    def grid_index(self) -> np.ndarray:
        """Vertex indices of the grid points ``k * dt``."""
        k = np.rint(self.T / self.dt)
        on_grid = np.abs(self.T - k * self.dt) <= 1e-9 * self.dt
        on_grid &= ~self.is_jump
        return np.flatnonzero(on_grid)

    @property
    def times(self) -> np.ndarray:
        return self.T[self.grid_index]

    @property
    def values(self) -> np.ndarray:
        return self.VR[self.grid_index]

    def value_at(self, t):
        return polyline_value(self, t)


class _Buffer:
    def __init__(self, cap: int):
        self.T = np.empty(cap)
        self.VR = np.empty(cap)
        self.VL = np.empty(cap)
        self.T[0] = 0.0
        self.VR[0] = 0.0
        self.VL[0] = 0.0
        self.pos = 0

    def ensure(self, extra: int):
        need = self.pos + 1 + extra
        cap = self.T.shape[0]
        if need <= cap:
            return
        new = max(need, 2 * cap)
        for name in ("T", "VR", "VL"):
            old = getattr(self, name)
            arr = np.empty(new)
            arr[: self.pos + 1] = old[: self.pos + 1]
            setattr(self, name, arr)


def _vertices_per_cell(model: LevyModel, cfg: SimConfig) -> int:
    return 3 if (cfg.bridge_correction and model.sim_sigma2 > 0) else 1


def simulate_path(model: LevyModel, cfg: SimConfig,
                  until: Optional[Callable[[SamplePath], bool]] = None) -> SamplePath:
    """Simulate ``model`` on ``[0, cfg.horizon]``.

    If ``until`` is given, simulation proceeds in chunks and stops as soon as
    ``until(partial_path)`` is true; the returned path is then a prefix of the
    full-horizon path with the same seed.
    """
    if not isinstance(cfg, SimConfig):
        raise ConfigError("cfg must be a SimConfig")
    g = make_generator(cfg.seed, cfg.stream_id)
    kind, params = model.encode_jumps()
    rate = model.jump_rate
    sig = math.sqrt(model.sim_sigma2)
    b = model.path_drift
    bridge = bool(cfg.bridge_correction) and sig > 0
    gen = K.gen_cells_bridge if bridge else K.gen_cells_plain
    per = _vertices_per_cell(model, cfg)
    total = cfg.n_cells
    next_jump = g.exponential(1.0 / rate) if rate > 0 else math.inf

    first = total if until is None else min(total, _MIN_CHUNK)
    exp_jumps = rate * first * cfg.dt
    buf = _Buffer(int(per * first + 3 * (exp_jumps + 6 * math.sqrt(exp_jumps) + 10)) + K.CELL_RESERVE)
    cell = 0
    path = None
    while cell < total:
        chunk = total - cell if until is None else min(total - cell, max(_MIN_CHUNK, cell // 4))
        exp_jumps = rate * chunk * cfg.dt
        buf.ensure(int(per * chunk + 3 * (exp_jumps + 6 * math.sqrt(exp_jumps) + 10)) + K.CELL_RESERVE)
        target = cell + chunk
        while cell < target:
            pos, done, next_jump = gen(
                g, buf.T, buf.VR, buf.VL, buf.pos, cell, target - cell, cfg.dt, next_jump,
                b, sig, rate, kind, params)
            buf.pos = pos
            cell += done
            if cell < target:
                buf.ensure(buf.T.shape[0])
        path = _wrap(buf, model, cfg)
        if until is not None and until(path):
            break
    if path is None:
        path = _wrap(buf, model, cfg)
    return path


def _wrap(buf: _Buffer, model: LevyModel, cfg: SimConfig) -> SamplePath:
    m = buf.pos + 1
    return SamplePath(buf.T[:m], buf.VR[:m], buf.VL[:m], cfg.dt, cfg.horizon,
                      model.sim_sigma2, cfg.seed, cfg.stream_id, cfg.bridge_correction,
                      model.describe())


@dataclass(frozen=True)
class HittingResult:
    """Entry time of a level; ``time = inf`` means not reached by ``horizon``."""

    time: float
    overshoot: float = 0.0
    pre_passage_sup_gap: float = 0.0
    last_sup_time: float = 0.0
    horizon: float = math.inf

    @property
    def reached(self) -> bool:
        return math.isfinite(self.time)


def first_hitting(path: SamplePath, level: float) -> HittingResult:
    """First time the path equals ``level`` (jumps across the level do not count)."""
    t = float(K.first_hit(path.T, path.VR, path.VL, path.n, float(level)))
    return HittingResult(time=t, horizon=path.end_time)


def first_passage(path: SamplePath, level: float) -> HittingResult:
    """First passage strictly above ``level`` with overshoot and supremum data."""
    t, over, gap, g = K.passage_scan(path.T, path.VR, path.VL, path.n, float(level))
    return HittingResult(time=float(t), overshoot=float(over),
                         pre_passage_sup_gap=float(gap), last_sup_time=float(g),
                         horizon=path.end_time)


def running_supremum(path: SamplePath, grid: bool = True) -> np.ndarray:
    """Running supremum at the grid points (or at every vertex with ``grid=False``).

    The supremum includes the left limits and values at jump times and the
    bridge extremes inside cells.
    """
    m = K.running_max(path.VR, path.VL, path.n)
    return m[path.grid_index] if grid else m


def polyline_value(path: SamplePath, t):
    """Right-continuous path value at time(s) ``t``."""
    t = np.asarray(t, dtype=float)
    idx = np.searchsorted(path.T, t, side="right") - 1
    idx = np.clip(idx, 0, path.n - 1)
    nxt = np.minimum(idx + 1, path.n - 1)
    t0 = path.T[idx]
    t1 = path.T[nxt]
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(t1 > t0, (t - t0) / (t1 - t0), 0.0)
    out = path.VR[idx] + w * (path.VL[nxt] - path.VR[idx])
    return float(out) if out.ndim == 0 else out


def write_path_csv(path: SamplePath, out: Path) -> tuple[Path, Path]:
    """Dump ``(t, x)`` at the grid and a sidecar ``(t_jump, size)`` jump list."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    side = out.with_name(out.stem + "_jumps.csv")
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x"])
        for t, x in zip(path.times, path.values):
            w.writerow([repr(float(t)), repr(float(x))])
    with side.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_jump", "size"])
        for t, y in path.jumps:
            w.writerow([repr(t), repr(y)])
    return out, side
