"""Closed-form moments of the inverse mixed stable subordinator Y, the mixed
fractional Poisson process N and its fixed-lag increments Z (the noise).

Notation: ``d = alpha1 - alpha2`` and ``x(t) = -c2 t^d / c1``.

* renewal function ``U(t) = t^alpha1 / c1 E_{d, alpha1+1}(x(t))``
* ``J(s) = s^(2 alpha1) / c1^2 E^2_{d, 2 alpha1+1}(x(s))``, the large-t limit of
  ``Cov(Y(s), Y(t))`` and half the second moment ``E[Y(s)^2]``
* ``Cov(Y(s), Y(t)) = I(s, t) + J(s) - U(s) U(t)`` with
  ``I(s, t) = int_0^s U(t - tau) dU(tau)``

The pure-stable cases ``c1 = 0`` and ``c2 = 0`` have dedicated code paths.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DegenerateRegime, InvalidParams, NoConvergence, NumericalError
from .params import MfppConfig, MixedStableParams
from .special import EPS, incomplete_beta, log_incomplete_beta, ml2, ml3

__all__ = [
    "ClampedVarianceWarning",
    "MomentReport",
    "renewal_U",
    "renewal_density",
    "renewal_U_asymptotic",
    "var_Y",
    "var_Y_asymptotic",
    "cov_Y_series",
    "cov_Y_asymptotic",
    "cov_Y_corrected",
    "k0_const",
    "k_const",
    "l_const",
    "mfpp_mean",
    "mfpp_var",
    "mfpp_cov",
    "mfpp_corr",
    "mfpp_cov_asymptotic",
    "mfpn_var",
    "mfpn_cov",
    "mfpn_corr",
    "mfpn_var_asymptotic",
    "mfpn_cov_asymptotic",
    "theoretical_exponents",
    "moment_report",
]

SHELL_CAP = 500
_SHELL_RTOL = 1e-14
_NEG_VAR_TOL = 1e-9
_QUAD_RTOL = 1e-12


class ClampedVarianceWarning(RuntimeWarning):
    """A variance slightly below zero from roundoff was reported as zero."""


def _clamp_variance(value, scale, what):
    if value >= 0.0:
        return value
    tol = max(_NEG_VAR_TOL, 64 * EPS * abs(scale))
    if value > -tol:
        warnings.warn(f"{what} = {value:.3e} clamped to 0", ClampedVarianceWarning, stacklevel=3)
        return 0.0
    raise NumericalError(f"{what} = {value!r} is negative beyond roundoff")


def _check_time(t, name="t"):
    if not (math.isfinite(t) and t >= 0.0):
        raise InvalidParams(f"{name} must be a finite non-negative number, got {t!r}")


def _pure_alpha(params: MixedStableParams):
    if params.pure_alpha1:
        return params.alpha1
    if params.pure_alpha2:
        return params.alpha2
    return None


# ------------------------------------------------------------------ renewal function

def renewal_U(params: MixedStableParams, t: float) -> float:
    """Renewal function ``U(t) = E[Y(t)]``."""
    _check_time(t)
    if t == 0.0:
        return 0.0
    a = _pure_alpha(params)
    if a is not None:
        return t**a / math.gamma(1.0 + a)
    return t**params.alpha1 / params.c1 * ml2(params.d, params.alpha1 + 1.0, params.ml_argument(t)).value


def renewal_density(params: MixedStableParams, t: float) -> float:
    """``dU/dt = t^(alpha1-1) / c1 E_{d, alpha1}(x(t))``."""
    if not (math.isfinite(t) and t > 0.0):
        raise InvalidParams(f"t must be positive, got {t!r}")
    a = _pure_alpha(params)
    if a is not None:
        return t ** (a - 1.0) / math.gamma(a)
    return t ** (params.alpha1 - 1.0) / params.c1 * ml2(params.d, params.alpha1, params.ml_argument(t)).value


def renewal_U_asymptotic(params: MixedStableParams, t: float, regime: str) -> float:
    """Small-t (alpha1-stable) or large-t (alpha2-stable) power law for ``U``."""
    _check_time(t)
    if regime == "small_t":
        if params.c1 == 0.0:
            raise DegenerateRegime("small-t law needs c1 > 0")
        return t**params.alpha1 / (params.c1 * math.gamma(1.0 + params.alpha1))
    if regime == "large_t":
        if params.c2 == 0.0:
            raise DegenerateRegime("large-t law needs c2 > 0")
        return t**params.alpha2 / (params.c2 * math.gamma(1.0 + params.alpha2))
    raise InvalidParams(f"regime must be 'small_t' or 'large_t', got {regime!r}")


# ------------------------------------------------------------------ variance

def _j(params: MixedStableParams, s: float) -> float:
    """``s^(2 alpha1)/c1^2 E^2_{d, 2 alpha1 + 1}(x(s))`` (pure cases: ``s^(2a)/Gamma(2a+1)``)."""
    if s == 0.0:
        return 0.0
    a = _pure_alpha(params)
    if a is not None:
        return s ** (2.0 * a) / math.gamma(2.0 * a + 1.0)
    c1 = params.c1
    return s ** (2.0 * params.alpha1) / (c1 * c1) * ml3(params.d, 2.0 * params.alpha1 + 1.0, 2.0, params.ml_argument(s)).value


def var_Y(params: MixedStableParams, t: float) -> float:
    """``Var Y(t) = 2 J(t) - U(t)^2``."""
    _check_time(t)
    if t == 0.0:
        return 0.0
    two_j = 2.0 * _j(params, t)
    u = renewal_U(params, t)
    return _clamp_variance(two_j - u * u, two_j, "Var Y")


def var_Y_asymptotic(params: MixedStableParams, t: float) -> float:
    if params.c2 == 0.0:
        raise DegenerateRegime("large-t variance law needs c2 > 0")
    _check_time(t)
    a2 = params.alpha2
    return t ** (2.0 * a2) / params.c2**2 * (2.0 / math.gamma(2.0 * a2 + 1.0) - 1.0 / math.gamma(a2 + 1.0) ** 2)


# ------------------------------------------------------------------ covariance

def _pure_i_minus_uu(a, s, t):
    """``I(s,t) - U(s)U(t)`` for the inverse a-stable subordinator (c = 1)."""
    ga = math.gamma(a)
    ga1 = a * ga
    i_st = t ** (2.0 * a) * incomplete_beta(a, a + 1.0, s / t) / (ga * ga1)
    return i_st - (s * t) ** a / (ga1 * ga1)


def _i_series(params: MixedStableParams, s, t):
    """``I(s, t)`` by the double series in ``(m, k)``, summed in shells of
    constant ``n = m + k``.

    Returns ``(value, rounding_estimate)``.
    """
    a1, d, c1, c2 = params.alpha1, params.d, params.c1, params.c2
    z = s / t
    log_ratio = math.log(c2 / c1)
    log_t = math.log(t)
    lg_m = [math.lgamma(m * d + a1 + 1.0) for m in range(SHELL_CAP + 1)]
    lg_k = [math.lgamma(k * d + a1) for k in range(SHELL_CAP + 1)]
    terms = []
    rounding = 0.0
    partial = 0.0
    small_run = 0
    for n in range(SHELL_CAP + 1):
        log_common = n * log_ratio + (n * d + 2.0 * a1) * log_t - 2.0 * math.log(c1)
        shell = []
        for m in range(n + 1):
            k = n - m
            lb = log_incomplete_beta(k * d + a1, m * d + a1 + 1.0, z)
            lt = log_common - lg_m[m] - lg_k[k] + lb
            if lt > 709.0:
                raise NumericalError("double-series term overflows; use the quadrature route")
            v = math.exp(lt)
            shell.append(v)
            rounding += v * EPS * (abs(log_common) + abs(lg_m[m]) + abs(lg_k[k]) + abs(lb) + 4.0)
        shell_sum = math.fsum(shell)
        if n % 2:
            shell_sum = -shell_sum
        terms.append(shell_sum)
        partial += shell_sum
        if abs(shell_sum) < _SHELL_RTOL * abs(partial):
            small_run += 1
            if small_run == 3:
                return math.fsum(terms), rounding
        else:
            small_run = 0
        if n == 0 and c2 == 0.0:
            return partial, rounding
    raise NoConvergence(f"covariance double series did not settle within {SHELL_CAP} shells")


def _i_minus_uu_quad(params: MixedStableParams, s, t):
    """``I(s,t) - U(s)U(t) = int_0^s (U(t - tau) - U(t)) dU(tau)``.

    Integrating the difference keeps the O(t^(alpha2 - 1)) correction
    accurate at large ``t``.
    """
    a1, d, c1 = params.alpha1, params.d, params.c1
    u_t = renewal_U(params, t)

    def f(tau):
        # dU(tau) = tau^(a1 - 1) E_{d,a1}(x(tau)) / c1; the power goes in the weight
        e = ml2(d, a1, params.ml_argument(tau)).value if tau > 0.0 else 1.0 / math.gamma(a1)
        return (renewal_U(params, t - tau) - u_t) * e / c1

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, 0.0, s, weight="alg", wvar=(a1 - 1.0, 0.0),
                                  epsabs=0.0, epsrel=_QUAD_RTOL, limit=200)
    return val, err


def _series_is_safe(params: MixedStableParams, t):
    # the m-direction behaves like the Mittag-Leffler series at x(t)
    return math.log(abs(params.ml_argument(t))) / params.d <= math.log(4.0)


def cov_Y_series(params: MixedStableParams, s: float, t: float, method: str = "auto") -> float:
    """Exact ``Cov(Y(s), Y(t))``.

    ``method`` selects how ``I(s, t)`` is obtained: ``"series"`` sums the
    incomplete-Beta double series (accurate only while the alternating terms
    stay moderate, i.e. for modest ``t``), ``"quadrature"`` integrates
    ``int_0^s (U(t - tau) - U(t)) dU(tau)`` directly, ``"auto"`` uses the
    series where it is safe and checks its rounding estimate.
    """
    _check_time(s, "s")
    _check_time(t)
    if method not in ("auto", "series", "quadrature"):
        raise InvalidParams(f"unknown method {method!r}")
    if s > t:
        s, t = t, s
    if s == 0.0:
        return 0.0
    a = _pure_alpha(params)
    j = _j(params, s)
    if a is not None and method != "series":
        return j + _pure_i_minus_uu(a, s, t)
    if method == "quadrature":
        return j + _i_minus_uu_quad(params, s, t)[0]
    if method == "series" or _series_is_safe(params, t):
        try:
            i_st, rounding = _i_series(params, s, t)
        except NumericalError:
            if method == "series":
                raise
        else:
            uu = renewal_U(params, s) * renewal_U(params, t)
            cov = i_st + j - uu
            if method == "series" or rounding <= 1e-11 * max(abs(cov), EPS * abs(uu)):
                return cov
    return j + _i_minus_uu_quad(params, s, t)[0]


def cov_Y_asymptotic(params: MixedStableParams, s: float) -> float:
    """Limit of ``Cov(Y(s), Y(t))`` as ``t -> inf``; equals ``J(s)``."""
    _check_time(s, "s")
    return _j(params, s)


def k0_const(params: MixedStableParams, s: float) -> float:
    """``s^(alpha1+1)/c1^2 sum_k (k d + alpha1) x(s)^k / Gamma(k d + alpha1 + 2)``.

    Summed in closed form: ``(k d + a1)/Gamma(k d + a1 + 2)`` splits into
    ``1/Gamma(k d + a1 + 1) - 1/Gamma(k d + a1 + 2)``, giving
    ``E_{d, a1+1}(x) - E_{d, a1+2}(x)``.
    """
    _check_time(s, "s")
    if s == 0.0:
        return 0.0
    a1 = params.alpha1
    if params.c1 == 0.0:
        raise DegenerateRegime("K0 divides by c1")
    x = params.ml_argument(s)
    diff = ml2(params.d, a1 + 1.0, x).value - ml2(params.d, a1 + 2.0, x).value
    return s ** (a1 + 1.0) / params.c1**2 * diff


def _k_pure(a, s):
    return s ** (a + 1.0) * a / (math.gamma(a + 2.0) * math.gamma(a))


def k_const(params: MixedStableParams, s: float) -> float:
    """Coefficient ``K(s)`` of the ``t^(alpha2-1)`` correction to ``Cov(Y(s), Y(t))``."""
    if params.c2 == 0.0:
        raise DegenerateRegime("K(s) divides by c2")
    _check_time(s, "s")
    if params.c1 == 0.0:
        return _k_pure(params.alpha2, s)
    return params.c1 * k0_const(params, s) / (params.c2 * math.gamma(params.alpha2))


def cov_Y_corrected(params: MixedStableParams, s: float, t: float) -> float:
    """Two-term large-t approximation ``J(s) - t^(alpha2-1) K(s)``."""
    _check_time(s, "s")
    _check_time(t)
    if s > t:
        s, t = t, s
    if s == 0.0:
        return 0.0
    if params.c2 == 0.0:
        a = params.alpha1
        return _j(params, s) - t ** (a - 1.0) * _k_pure(a, s)
    return _j(params, s) - t ** (params.alpha2 - 1.0) * k_const(params, s)


def l_const(config: MfppConfig, s: float) -> float:
    """``L(s) = U(s) + lambda J(s)``, the limit of ``Cov(N(s), N(t)) / lambda``."""
    return renewal_U(config.params, s) + config.lam * _j(config.params, s)


# ------------------------------------------------------------------ MFPP / MFPN

def mfpp_mean(config: MfppConfig, t: float) -> float:
    return config.lam * renewal_U(config.params, t)


def mfpp_var(config: MfppConfig, t: float) -> float:
    lam = config.lam
    return lam * renewal_U(config.params, t) + lam * lam * var_Y(config.params, t)


def mfpp_cov(config: MfppConfig, s: float, t: float, method: str = "auto") -> float:
    lam = config.lam
    return lam * renewal_U(config.params, min(s, t)) + lam * lam * cov_Y_series(config.params, s, t, method)


def mfpp_corr(config: MfppConfig, s: float, t: float) -> float:
    return mfpp_cov(config, s, t) / math.sqrt(mfpp_var(config, s) * mfpp_var(config, t))


def mfpp_cov_asymptotic(config: MfppConfig, s: float, t: float) -> float:
    """``lambda L(s) - lambda^2 t^(alpha2-1) K(s)``."""
    if config.params.c2 == 0.0:
        raise DegenerateRegime("needs c2 > 0")
    lam = config.lam
    return lam * l_const(config, s) - lam * lam * t ** (config.params.alpha2 - 1.0) * k_const(config.params, s)


def _cov_y_offset(params, s, t):
    """``Cov(Y(s), Y(t)) - J(min(s, t))``, which is what survives a second difference."""
    if s > t:
        s, t = t, s
    if s == 0.0:
        return 0.0
    if s == t:
        return var_Y(params, s) - _j(params, s)
    a = _pure_alpha(params)
    if a is not None:
        return _pure_i_minus_uu(a, s, t)
    if _series_is_safe(params, t):
        try:
            i_st, rounding = _i_series(params, s, t)
        except NumericalError:
            pass
        else:
            val = i_st - renewal_U(params, s) * renewal_U(params, t)
            if rounding <= 1e-12 * abs(val):
                return val
    return _i_minus_uu_quad(params, s, t)[0]


def mfpn_cov(config: MfppConfig, s: float, t: float) -> float:
    """Exact ``Cov(Z(s), Z(t))`` for the noise ``Z(t) = N(t + delta) - N(t)``."""
    p, lam, dl = config.params, config.lam, config.delta
    if s > t:
        s, t = t, s
    u = lambda v: renewal_U(p, v)  # noqa: E731
    poisson = lam * (u(min(s + dl, t + dl)) + u(min(s, t)) - u(min(s + dl, t)) - u(min(s, t + dl)))
    # J terms of the four covariances cancel whenever t >= s + delta
    if t >= s + dl:
        y = (_cov_y_offset(p, s + dl, t + dl) + _cov_y_offset(p, s, t)
             - _cov_y_offset(p, s + dl, t) - _cov_y_offset(p, s, t + dl))
    else:
        y = (cov_Y_series(p, s + dl, t + dl) + cov_Y_series(p, s, t)
             - cov_Y_series(p, s + dl, t) - cov_Y_series(p, s, t + dl))
    return poisson + lam * lam * y


def mfpn_var(config: MfppConfig, t: float) -> float:
    return mfpn_cov(config, t, t)


def mfpn_corr(config: MfppConfig, s: float, t: float) -> float:
    return mfpn_cov(config, s, t) / math.sqrt(mfpn_var(config, s) * mfpn_var(config, t))


def mfpn_var_asymptotic(config: MfppConfig, t: float) -> float:
    """``lambda alpha2 delta t^(alpha2-1) / (c2 Gamma(1+alpha2))``."""
    p = config.params
    if p.c2 == 0.0:
        raise DegenerateRegime("needs c2 > 0")
    return config.lam * p.alpha2 * config.delta * t ** (p.alpha2 - 1.0) / (p.c2 * math.gamma(1.0 + p.alpha2))


def mfpn_cov_asymptotic(config: MfppConfig, s: float, t: float) -> float:
    """``(1 - alpha2) delta lambda^2 (K(s + delta) - K(s)) t^(alpha2-2)``."""
    p, dl, lam = config.params, config.delta, config.lam
    if p.c2 == 0.0:
        raise DegenerateRegime("needs c2 > 0")
    if not (0.0 <= s and s + dl <= t):
        raise InvalidParams("need 0 <= s and s + delta <= t")
    dk = k_const(p, s + dl) - k_const(p, s)
    return (1.0 - p.alpha2) * dl * lam * lam * dk * t ** (p.alpha2 - 2.0)


def theoretical_exponents(params: MixedStableParams) -> tuple[float, float]:
    """Correlation decay exponents ``(alpha2, (3 - alpha2)/2)`` of N and Z."""
    return params.alpha2, (3.0 - params.alpha2) / 2.0


# ------------------------------------------------------------------ report

@dataclass
class MomentReport:
    t_grid: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def to_rows(self):
        names = ["t", *self.columns]
        rows = [dict(zip(names, vals)) for vals in zip(self.t_grid, *self.columns.values())]
        return names, rows


def moment_report(config: MfppConfig, t_grid, s: float | None = None) -> MomentReport:
    """Tabulate U, Var Y, their asymptotes and the MFPP mean/variance on a grid.

    With ``s`` given, covariance columns ``covY`` and ``covY_asym`` are added.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(t_grid <= 0) or np.any(np.diff(t_grid) <= 0):
        raise InvalidParams("t grid must be strictly increasing positive values")
    p = config.params
    cols: dict[str, list] = {k: [] for k in ("U", "varY", "U_asym", "varY_asym", "mfpp_mean", "mfpp_var")}
    if s is not None:
        cols["covY"] = []
        cols["covY_asym"] = []
    for t in t_grid:
        t = float(t)
        u = renewal_U(p, t)
        v = var_Y(p, t)
        cols["U"].append(u)
        cols["varY"].append(v)
        cols["U_asym"].append(renewal_U_asymptotic(p, t, "large_t") if p.c2 > 0 else math.nan)
        cols["varY_asym"].append(var_Y_asymptotic(p, t) if p.c2 > 0 else math.nan)
        cols["mfpp_mean"].append(config.lam * u)
        cols["mfpp_var"].append(config.lam * u + config.lam**2 * v)
        if s is not None:
            cols["covY"].append(cov_Y_series(p, s, t))
            cols["covY_asym"].append(cov_Y_asymptotic(p, s))
    return MomentReport(t_grid, {k: np.asarray(v) for k, v in cols.items()})
