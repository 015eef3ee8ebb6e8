"""Monte Carlo paths of the mixed stable subordinator, its inverse, the MFPP,
the MFPN and the non-homogeneous variant.

Every replicate ``i`` owns three Philox substreams, keyed by
``(seed, label)`` with the replicate index in the counter: one per stable
component and one for the Poisson layer. Ensembles are therefore identical
whatever the number of workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatch, InvalidParams, NonMonotoneLambda, SCapExceeded
from .params import MfppConfig, MixedStableParams

KINDS = ("inverse_subordinator", "mfpp", "mfpn")
_LABELS = {"alpha1": 0, "alpha2": 1, "poisson": 2}
_HALF_ULP = 0.5 * 2.0**-53


# ------------------------------------------------------------------ RNG streams

def _stream_keys(seed: int) -> np.ndarray:
    ss = np.random.SeedSequence(int(seed))
    return ss.generate_state(2 * len(_LABELS), dtype=np.uint64).reshape(len(_LABELS), 2)


def substream(seed: int, replicate: int, label: str, keys: np.ndarray | None = None) -> np.random.Generator:
    """Generator for ``(seed, replicate, label)``.

    The label selects the Philox key, the replicate index occupies the third
    counter word, so substreams never overlap for fewer than 2^128 draws.
    """
    if keys is None:
        keys = _stream_keys(seed)
    counter = np.array([0, 0, replicate, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=keys[_LABELS[label]], counter=counter))


# ------------------------------------------------------------------ stable samplers

def sample_stable_increment(alpha: float, ds: float, rng: np.random.Generator, size=None):
    """One-sided alpha-stable draw with ``E exp(-u X) = exp(-ds u^alpha)``.

    Kanter's representation from one uniform angle and one exponential.
    """
    if not (0.0 < alpha < 1.0):
        raise InvalidParams(f"alpha must lie in (0, 1), got {alpha!r}")
    if not ds > 0.0:
        raise InvalidParams(f"ds must be positive, got {ds!r}")
    u = math.pi * (rng.random(size) + _HALF_ULP)
    e = rng.standard_exponential(size)
    log_a = (
        (np.log(np.sin(alpha * u)) - np.log(np.sin(u))) / (1.0 - alpha)
        + np.log(np.sin((1.0 - alpha) * u))
        - np.log(np.sin(alpha * u))
    )
    x = np.exp((1.0 - alpha) / alpha * (log_a - np.log(e)))
    return ds ** (1.0 / alpha) * x


def sample_mixed_increment(params: MixedStableParams, ds: float, rng: np.random.Generator,
                           size=None, rng2: np.random.Generator | None = None):
    """Increment of the mixed subordinator over an operational step ``ds``.

    ``c1^(1/a1) S1 + c2^(1/a2) S2`` with independent stable parts; ``rng2``
    supplies the second component (defaults to continuing ``rng``).
    """
    if rng2 is None:
        rng2 = rng
    out = np.zeros(size) if size is not None else 0.0
    if params.c1 > 0.0:
        out = out + sample_stable_increment(params.alpha1, params.c1 * ds, rng, size)
    if params.c2 > 0.0:
        out = out + sample_stable_increment(params.alpha2, params.c2 * ds, rng2, size)
    return out


# ------------------------------------------------------------------ grids

@dataclass(frozen=True)
class SimGrid:
    t_grid: np.ndarray
    ds: float
    s_cap: float

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise InvalidParams("t_grid must be a non-empty 1-d array")
        if np.any(t < 0) or np.any(np.diff(t) <= 0):
            raise InvalidParams("t_grid must be strictly increasing and non-negative")
        if not (self.ds > 0 and math.isfinite(self.ds)):
            raise InvalidParams(f"ds must be positive, got {self.ds!r}")
        if not (self.s_cap > 0 and self.s_cap / self.ds < 2**63):
            raise InvalidParams("s_cap must be positive with s_cap/ds below 2**63")
        object.__setattr__(self, "t_grid", t)

    @classmethod
    def build(cls, params: MixedStableParams, t_grid, ds: float | None = None, s_cap: float | None = None):
        """Grid with the default step ``1e-3 x`` smallest spacing and default ``s_cap``."""
        t = np.asarray(t_grid, dtype=float)
        if ds is None:
            spacing = np.diff(t) if t.size > 1 else t[t > 0]
            ds = 1e-3 * float(spacing.min()) if spacing.size else 1e-3
        if s_cap is None:
            s_cap = default_s_cap(params, float(t.max()))
        return cls(t, float(ds), float(s_cap))

    def to_dict(self):
        return {"t_grid": self.t_grid.tolist(), "ds": self.ds, "s_cap": self.s_cap}


def renewal_scale(params: MixedStableParams, t_max: float) -> float:
    """Upper bound on ``U(t_max)``: the smaller of the two pure-stable laws.

    ``L`` dominates each of its scaled components, so ``Y`` is dominated by
    the inverse of either one.
    """
    laws = []
    if params.c2 > 0:
        laws.append(t_max**params.alpha2 / (params.c2 * math.gamma(1 + params.alpha2)))
    if params.c1 > 0:
        laws.append(t_max**params.alpha1 / (params.c1 * math.gamma(1 + params.alpha1)))
    return min(laws)


def default_s_cap(params: MixedStableParams, t_max: float) -> float:
    return 10.0 * max(renewal_scale(params, t_max), 1e-12)


def with_lag(t_points, delta: float) -> np.ndarray:
    """Union grid holding every ``t`` and ``t + delta``."""
    t = np.asarray(t_points, dtype=float)
    return np.unique(np.concatenate((t, t + delta)))


# ------------------------------------------------------------------ single paths

def _block_size(params: MixedStableParams, grid: SimGrid) -> int:
    t_max = float(grid.t_grid[-1])
    scale = renewal_scale(params, t_max)
    return int(min(max(64, math.ceil(1.25 * scale / grid.ds)), 1 << 20))


def simulate_inverse_path(params: MixedStableParams, grid: SimGrid, rng, rng2=None, block: int | None = None):
    """Inverse subordinator ``Y`` on ``grid.t_grid`` from one subordinator walk.

    ``Y(t)`` is reported as ``s_(k-1)`` where ``k`` is the first step with
    ``L(s_k) > t``; the discretisation bias lies in ``[-ds, 0]``.
    """
    if rng2 is None:
        rng2 = rng
    t = grid.t_grid
    t_max = float(t[-1])
    if block is None:
        block = _block_size(params, grid)
    max_steps = int(grid.s_cap / grid.ds)
    walk = [np.zeros(1)]
    level = 0.0
    steps = 0
    while level <= t_max:
        if steps >= max_steps:
            raise SCapExceeded(
                f"subordinator stayed below t={t_max} up to s_cap={grid.s_cap} (ds={grid.ds})"
            )
        inc = sample_mixed_increment(params, grid.ds, rng, min(block, max_steps - steps), rng2)
        chunk = level + np.cumsum(inc)
        walk.append(chunk)
        level = float(chunk[-1])
        steps += inc.size
    path = np.concatenate(walk)
    k = np.searchsorted(path, t, side="right")
    return (k - 1) * grid.ds


def simulate_mfpp_path(config: MfppConfig, grid: SimGrid, rng, rng2=None, rng_poisson=None, y_row=None):
    """Counts ``N(Y(t))`` with conditionally independent Poisson increments."""
    if y_row is None:
        y_row = simulate_inverse_path(config.params, grid, rng, rng2)
    if rng_poisson is None:
        rng_poisson = rng
    dy = np.diff(y_row, prepend=0.0)
    return np.cumsum(rng_poisson.poisson(config.lam * dy))


def simulate_mfnpp_path(params: MixedStableParams, Lambda: Callable, grid: SimGrid, rng,
                        rng2=None, rng_poisson=None, y_row=None):
    """Counts ``N(Lambda(Y(t)), 1)`` for a deterministic non-decreasing ``Lambda``."""
    if y_row is None:
        y_row = simulate_inverse_path(params, grid, rng, rng2)
    if rng_poisson is None:
        rng_poisson = rng
    lam_vals = np.asarray(Lambda(y_row), dtype=float)
    lam0 = float(np.asarray(Lambda(np.zeros(1)), dtype=float)[0])
    if lam0 != 0.0:
        raise NonMonotoneLambda(f"Lambda(0) must be 0, got {lam0}")
    diffs = np.diff(lam_vals, prepend=0.0)
    if np.any(diffs < 0):
        raise NonMonotoneLambda("Lambda decreased along the sampled time change")
    return np.cumsum(rng_poisson.poisson(diffs))


def mfpn_from_mfpp(row, t_grid, delta: float, t_points=None):
    """Increments ``Z(t) = N(t + delta) - N(t)`` read off an MFPP row.

    ``t_points`` defaults to every grid time whose lagged partner is on the grid.
    """
    row = np.asarray(row)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_points is None:
        t_points = lagged_points(t_grid, delta)
    t_points = np.asarray(t_points, dtype=float)
    i0 = _grid_index(t_grid, t_points)
    i1 = _grid_index(t_grid, t_points + delta)
    return row[..., i1] - row[..., i0]


def lagged_points(t_grid, delta: float) -> np.ndarray:
    """Grid times ``t`` whose partner ``t + delta`` is also on the grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    ok = np.isclose(t_grid[:, None], t_grid[None, :] + delta, rtol=0, atol=1e-9 * max(1.0, delta)).any(axis=0)
    return t_grid[ok]


def _grid_index(t_grid, points):
    idx = np.searchsorted(t_grid, points)
    idx = np.clip(idx, 0, t_grid.size - 1)
    lo = np.clip(idx - 1, 0, t_grid.size - 1)
    pick = np.where(np.abs(t_grid[lo] - points) < np.abs(t_grid[idx] - points), lo, idx)
    tol = 1e-9 * np.maximum(1.0, np.abs(points))
    if np.any(np.abs(t_grid[pick] - points) > tol):
        missing = points[np.abs(t_grid[pick] - points) > tol]
        raise GridMismatch(f"times {missing.tolist()} are not on the grid")
    return pick


# ------------------------------------------------------------------ ensembles

@dataclass
class PathEnsemble:
    grid: SimGrid
    values: np.ndarray
    kind: str
    seed: int
    params: dict = field(default_factory=dict)
    t_points: np.ndarray | None = None

    @property
    def times(self) -> np.ndarray:
        """Observation times of the value columns."""
        return self.grid.t_grid if self.t_points is None else self.t_points

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def column(self, t: float) -> np.ndarray:
        return self.values[:, int(_grid_index(self.times, np.atleast_1d(float(t)))[0])]


def _simulate_block(config: MfppConfig, grid: SimGrid, seed: int, kind: str, start: int, stop: int):
    keys = _stream_keys(seed)
    params = config.params
    block = _block_size(params, grid)
    dtype = float if kind == "inverse_subordinator" else np.int64
    out = np.empty((stop - start, grid.t_grid.size), dtype=dtype)
    for r, i in enumerate(range(start, stop)):
        y = simulate_inverse_path(params, grid, substream(seed, i, "alpha1", keys),
                                  substream(seed, i, "alpha2", keys), block=block)
        if kind == "inverse_subordinator":
            out[r] = y
        else:
            out[r] = simulate_mfpp_path(config, grid, None, rng_poisson=substream(seed, i, "poisson", keys), y_row=y)
    return out


def _chunks(n_paths, n_workers):
    size = max(1, min(4096, math.ceil(n_paths / (4 * n_workers))))
    return [(a, min(a + size, n_paths)) for a in range(0, n_paths, size)]


def simulate_ensemble(config: MfppConfig, grid: SimGrid, n_paths: int, seed: int,
                      kind: str = "mfpp", threads: int = 1, t_points=None) -> PathEnsemble:
    """``n_paths`` replicates of ``kind`` on ``grid``.

    For ``kind="mfpn"`` the grid must hold every ``t`` and ``t + delta`` of
    ``t_points``; the values are the increments at ``t_points``.
    ``threads=0`` uses every available CPU. Results do not depend on it.
    """
    if kind not in KINDS:
        raise InvalidParams(f"kind must be one of {KINDS}, got {kind!r}")
    if n_paths < 1:
        raise InvalidParams("n_paths must be at least 1")
    if threads < 0:
        raise InvalidParams("threads must be >= 0")
    workers = threads or os.cpu_count() or 1
    sim_kind = "mfpp" if kind == "mfpn" else kind
    chunks = _chunks(n_paths, workers)
    if workers == 1 or len(chunks) == 1:
        parts = [_simulate_block(config, grid, seed, sim_kind, a, b) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_block, config, grid, seed, sim_kind, a, b) for a, b in chunks]
            parts = [f.result() for f in futures]
    values = np.concatenate(parts, axis=0)
    points = None
    if kind == "mfpn":
        points = lagged_points(grid.t_grid, config.delta) if t_points is None else np.asarray(t_points, dtype=float)
        values = mfpn_from_mfpp(values, grid.t_grid, config.delta, points)
    return PathEnsemble(grid, values, kind, int(seed), config.to_dict(), points)
