"""Empirical moments, correlation curves and log-log decay fits.

:class:`PowerLawDecay` is a scikit-learn style regressor for
``corr(t) ~ c t^(-h)``; :func:`lrd_report` and :func:`srd_report` run the
whole simulate -> correlate -> fit pipeline.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, column_or_1d

from .errors import InsufficientData, InvalidParams
from .moments import theoretical_exponents
from .params import MfppConfig
from .simulation import PathEnsemble, SimGrid, _grid_index, simulate_ensemble, with_lag

LRD_TOLERANCE = 0.1
SRD_TOLERANCE = 0.15


# ------------------------------------------------------------------ moments

def _columns(ensemble, i, j):
    values = ensemble.values if isinstance(ensemble, PathEnsemble) else np.asarray(ensemble)
    if values.ndim != 2 or values.shape[0] < 2:
        raise InsufficientData("need at least two replicates")
    ncol = values.shape[1]
    if not (0 <= i < ncol and 0 <= j < ncol):
        raise InvalidParams(f"column index out of range for {ncol} columns")
    return values[:, i].astype(float), values[:, j].astype(float)


def empirical_cov(ensemble, s_index: int, t_index: int) -> tuple[float, float]:
    """Unbiased sample covariance of two columns and its standard error.

    The standard error comes from the fourth-moment (delta method) estimate
    ``sqrt((m22 - m11^2) / R)``.
    """
    x, y = _columns(ensemble, s_index, t_index)
    r = x.size
    dx = x - x.mean()
    dy = y - y.mean()
    prod = dx * dy
    cov = math.fsum(prod) / (r - 1)
    m11 = prod.mean()
    m22 = (prod * prod).mean()
    stderr = math.sqrt(max(m22 - m11 * m11, 0.0) / r)
    return cov, stderr


def _corr_with_stderr(x, y):
    r = x.size
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx) / r)
    sy = math.sqrt(float(dy @ dy) / r)
    if sx == 0.0 or sy == 0.0:
        return math.nan, math.nan
    zx, zy = dx / sx, dy / sy
    rho = float(zx @ zy) / r
    # influence function of Pearson's r
    psi = zx * zy - 0.5 * rho * (zx * zx + zy * zy)
    stderr = float(psi.std()) / math.sqrt(r)
    return min(1.0, max(-1.0, rho)), stderr


@dataclass
class CorrCurve:
    s: float
    t_points: np.ndarray
    corr: np.ndarray
    stderr: np.ndarray
    n_paths: int
    valid: np.ndarray = None

    def __post_init__(self):
        self.t_points = np.asarray(self.t_points, dtype=float)
        self.corr = np.asarray(self.corr, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if self.valid is None:
            self.valid = np.isfinite(self.corr)
        if np.any(np.diff(self.t_points) <= 0):
            raise InvalidParams("t_points must be strictly increasing")

    def to_dict(self):
        return {
            "s": self.s,
            "t_points": self.t_points.tolist(),
            "corr": [None if not math.isfinite(c) else c for c in self.corr.tolist()],
            "stderr": [None if not math.isfinite(c) else c for c in self.stderr.tolist()],
            "n_paths": self.n_paths,
        }


def corr_curve(ensemble: PathEnsemble, s: float, t_points) -> CorrCurve:
    """``Corr(X(s), X(t))`` for each ``t`` with delta-method standard errors.

    Points where either variance vanishes are flagged invalid (``nan``).
    """
    if ensemble.n_paths < 2:
        raise InsufficientData("need at least two replicates")
    times = ensemble.times
    t_points = np.asarray(t_points, dtype=float)
    i_s = int(_grid_index(times, np.atleast_1d(float(s)))[0])
    idx = _grid_index(times, t_points)
    x = ensemble.values[:, i_s].astype(float)
    corr, err = [], []
    for j in idx:
        c, e = _corr_with_stderr(x, ensemble.values[:, j].astype(float))
        corr.append(c)
        err.append(e)
    return CorrCurve(float(s), t_points, np.array(corr), np.array(err), ensemble.n_paths)


# ------------------------------------------------------------------ fitting

class PowerLawDecay(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``log corr = intercept + slope * log t``.

    Non-positive (or non-finite) responses are dropped before the log
    transform and counted in ``dropped_``.

    Parameters
    ----------
    min_points : int
        Minimum number of usable points.

    Attributes
    ----------
    slope_, intercept_, slope_stderr_ : float
    exponent_ : float
        ``-slope_``, the decay exponent ``h``.
    n_used_, dropped_ : int
    """

    def __init__(self, min_points=3):
        self.min_points = min_points

    def fit(self, X, y):
        X, y = check_X_y(np.asarray(X, dtype=float).reshape(-1, 1), y,
                         ensure_all_finite="allow-nan", y_numeric=True)
        t = X[:, 0]
        keep = np.isfinite(y) & (y > 0) & (t > 0)
        self.n_used_ = int(keep.sum())
        self.dropped_ = int(y.size - self.n_used_)
        if self.n_used_ < self.min_points:
            raise InsufficientData(
                f"{self.n_used_} positive points remain, need {self.min_points}"
            )
        lx = np.log(t[keep])
        ly = np.log(y[keep])
        xm = lx.mean()
        sxx = float(((lx - xm) ** 2).sum())
        slope = float(((lx - xm) * (ly - ly.mean())).sum()) / sxx
        intercept = float(ly.mean() - slope * xm)
        resid = ly - (intercept + slope * lx)
        dof = self.n_used_ - 2
        s2 = float(resid @ resid) / dof if dof > 0 else 0.0
        self.slope_ = slope
        self.intercept_ = intercept
        self.slope_stderr_ = math.sqrt(s2 / sxx)
        self.exponent_ = -slope
        return self

    def predict(self, X):
        check_is_fitted(self, "slope_")
        t = column_or_1d(np.asarray(X, dtype=float).reshape(-1))
        return np.exp(self.intercept_) * t**self.slope_


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    slope_stderr: float
    n_used: int
    dropped: int
    target: float
    tolerance: float
    verdict: str

    @property
    def exponent(self) -> float:
        return -self.slope

    def to_dict(self):
        out = asdict(self)
        out["exponent"] = self.exponent
        return out


def fit_decay_exponent(curve: CorrCurve, target: float, tolerance: float) -> SlopeFit:
    """Fit ``corr ~ c t^(-h)`` and compare ``h`` with ``target``.

    Verdict is ``"consistent"`` iff ``|h - target| <= max(3 stderr, tolerance)``.
    """
    corr = np.where(curve.valid, curve.corr, np.nan)
    model = PowerLawDecay().fit(curve.t_points, corr)
    band = max(3.0 * model.slope_stderr_, tolerance)
    verdict = "consistent" if abs(model.exponent_ - target) <= band else "inconsistent"
    return SlopeFit(model.slope_, model.intercept_, model.slope_stderr_, model.n_used_,
                    model.dropped_, float(target), float(tolerance), verdict)


# ------------------------------------------------------------------ pipelines

@dataclass
class SimOptions:
    n_paths: int = 200_000
    seed: int = 0
    s: float = 1.0
    window: tuple[float, float] = (50.0, 500.0)
    n_points: int = 8
    ds: float | None = None
    threads: int = 1
    tolerance: float | None = None


@dataclass
class DependenceReport:
    kind: str
    fit: SlopeFit
    curve: CorrCurve
    grid: SimGrid
    window: tuple[float, float]
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kind": self.kind,
            **self.fit.to_dict(),
            "window": list(self.window),
            "ds": self.grid.ds,
            "curve": self.curve.to_dict(),
        }


def _fit_window(opts: SimOptions, s_bar: float):
    lo, hi = opts.window
    return np.geomspace(lo * s_bar, hi * s_bar, opts.n_points)


def lrd_report(config: MfppConfig, opts: SimOptions) -> DependenceReport:
    """Decay exponent of ``Corr(N(s), N(t))`` against ``alpha2`` (``alpha1`` when ``c2 = 0``)."""
    p = config.params
    target = p.alpha1 if p.c2 == 0.0 else theoretical_exponents(p)[0]
    t_points = _fit_window(opts, max(opts.s, 1.0) if opts.s > 0 else 1.0)
    grid = SimGrid.build(p, np.concatenate(([opts.s], t_points)), ds=opts.ds)
    ens = simulate_ensemble(config, grid, opts.n_paths, opts.seed, "mfpp", opts.threads)
    curve = corr_curve(ens, opts.s, t_points)
    tol = LRD_TOLERANCE if opts.tolerance is None else opts.tolerance
    fit = fit_decay_exponent(curve, target, tol)
    return DependenceReport("lrd", fit, curve, grid, (float(t_points[0]), float(t_points[-1])))


def srd_report(config: MfppConfig, opts: SimOptions) -> DependenceReport:
    """Decay exponent of ``Corr(Z(s), Z(t))`` against ``(3 - alpha2)/2``."""
    p = config.params
    target = theoretical_exponents(p)[1]
    s_bar = max(opts.s + config.delta, opts.s, 1.0)
    t_points = _fit_window(opts, s_bar)
    base = np.concatenate(([opts.s], t_points))
    grid = SimGrid.build(p, with_lag(base, config.delta), ds=opts.ds)
    ens = simulate_ensemble(config, grid, opts.n_paths, opts.seed, "mfpn", opts.threads, t_points=base)
    curve = corr_curve(ens, opts.s, t_points)
    tol = SRD_TOLERANCE if opts.tolerance is None else opts.tolerance
    fit = fit_decay_exponent(curve, target, tol)
    return DependenceReport("srd", fit, curve, grid, (float(t_points[0]), float(t_points[-1])))
