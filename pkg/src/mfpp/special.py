"""Mittag-Leffler functions and the incomplete Beta function.

Real arguments only. Three evaluation routes are used for the
(Prabhakar) Mittag-Leffler function ``E^gamma_{alpha,beta}(x)``:

* the power series, for ``x >= 0`` and for negative ``x`` small enough that
  the alternating terms do not cancel catastrophically;
* the large-argument expansion in powers of ``1/x`` (``0 < alpha < 1``,
  ``x < 0``), used whenever its smallest term is below double precision;
* a Hankel-contour integral of the Laplace transform
  ``s^(alpha*gamma - beta) / (s^alpha - x)^gamma`` for everything in between.

``est_abs_error`` is an estimate, never a bound.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass

from scipy import integrate
from scipy import special as sps

from .errors import DegenerateRegime, DomainError, InvalidParams, NoConvergence

EPS = 2.220446049250313e-16
SERIES_TERM_CAP = 20_000
_TERM_RTOL = 1e-16
_SERIES_MAX_REL_ROUNDING = 1e-13
# series is tried first for x < 0 only while |x|**(1/alpha) stays below this
_SERIES_SAFE_SCALE = 2.0
_ASYMPTOTIC_TERM_CAP = 400
_QUAD_RTOL = 1e-13
_LOG_DBL_MAX = math.log(1.7976931348623157e308)


class Regime(str, enum.Enum):
    SERIES = "series"
    ASYMPTOTIC = "asymptotic"
    INTEGRAL = "integral"


@dataclass(frozen=True)
class EvalResult:
    value: float
    est_abs_error: float
    regime: Regime

    def __float__(self) -> float:
        return self.value


def _check_ml_args(alpha, beta, gamma, x):
    for name, v in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if not (math.isfinite(v) and v > 0):
            raise InvalidParams(f"{name} must be a positive finite number, got {v!r}")
    if not math.isfinite(x):
        raise InvalidParams(f"argument must be finite, got {x!r}")


def _log_rgamma(z):
    """log|1/Gamma(z)| and its sign; (-inf, 0) at the poles."""
    if z > 0:
        return -math.lgamma(z), 1.0
    sign = float(sps.gammasgn(z))
    if sign == 0.0 or (z == math.floor(z)):
        return -math.inf, 0.0
    return -float(sps.gammaln(z)), sign


def _series(alpha, beta, gamma, x):
    if x == 0.0:
        return EvalResult(float(sps.rgamma(beta)), 0.0, Regime.SERIES)
    logx = math.log(abs(x))
    lg_gamma = math.lgamma(gamma)
    terms = []
    rounding = 0.0
    small_run = 0
    partial = 0.0
    for k in range(SERIES_TERM_CAP):
        a = k * alpha + beta
        lt = k * logx + math.lgamma(k + gamma) - lg_gamma - math.lgamma(k + 1) - math.lgamma(a)
        if lt > _LOG_DBL_MAX:
            raise OverflowError(
                f"E^{gamma}_{alpha},{beta}({x}) exceeds the double range"
            )
        t = math.exp(lt)
        if x < 0 and k % 2:
            t = -t
        terms.append(t)
        # log-space terms inherit an absolute log error of eps * |components|
        scale = abs(k * logx) + abs(math.lgamma(k + gamma)) + abs(lg_gamma) + abs(math.lgamma(a)) + 1.0
        rounding += abs(t) * EPS * scale
        partial += t
        if abs(t) < _TERM_RTOL * abs(partial):
            small_run += 1
            if small_run == 3:
                value = math.fsum(terms)
                if math.isinf(value):
                    raise OverflowError(
                        f"E^{gamma}_{alpha},{beta}({x}) exceeds the double range"
                    )
                err = abs(t) + rounding
                return EvalResult(value, err, Regime.SERIES)
        else:
            small_run = 0
    raise NoConvergence(
        f"Mittag-Leffler series for alpha={alpha}, beta={beta}, gamma={gamma}, "
        f"x={x} did not converge within {SERIES_TERM_CAP} terms"
    )


def _asymptotic_series(alpha, beta, gamma, y):
    """Expansion of E^gamma_{alpha,beta}(-y) for y -> +inf, 0 < alpha < 1.

    Returns None when the smallest term is not below double precision.
    """
    logy = math.log(y)
    lg_gamma = math.lgamma(gamma)
    terms = []
    total = 0.0
    small_run = 0
    min_mag = math.inf
    for k in range(_ASYMPTOTIC_TERM_CAP):
        lr, sgn = _log_rgamma(beta - alpha * (gamma + k))
        if sgn == 0.0:
            continue
        lt = math.lgamma(gamma + k) - lg_gamma - math.lgamma(k + 1) - (gamma + k) * logy + lr
        mag = math.exp(lt)
        if mag > 2.0 * min_mag:
            return None
        min_mag = min(min_mag, mag)
        t = mag * sgn * (-1.0 if k % 2 else 1.0)
        terms.append(t)
        total += t
        if mag < _TERM_RTOL * abs(total):
            small_run += 1
            if small_run == 3:
                return EvalResult(math.fsum(terms), mag + EPS * abs(total), Regime.ASYMPTOTIC)
        else:
            small_run = 0
    return None


def _hankel(alpha, beta, gamma, y):
    """E^gamma_{alpha,beta}(-y), y > 0, 0 < alpha < 1, by contour integration.

    The Bromwich contour is folded onto a circle of radius ``rho`` plus the
    two banks of the negative real axis; for 0 < alpha < 1 and a negative
    argument the transform has no poles off the branch cut.
    """
    p = alpha * gamma - beta
    # s^alpha = -y has no solution, but |s^alpha + y| gets small near
    # r = y**(1/alpha) when alpha -> 1; keep the circle away from it
    rho = 1.0
    if alpha > 0.8 and 0.5 <= y <= 2.0:
        rho = (y / 3.0) ** (1.0 / alpha)
    r_peak = y ** (1.0 / alpha) if math.log(y) / alpha < 700 else math.inf

    def circle(theta):
        s = cmath.rect(rho, theta)
        s_p = cmath.rect(rho**p, p * theta)
        w = cmath.rect(rho**alpha, alpha * theta) + y
        return (cmath.exp(s) * s * s_p * w ** (-gamma)).real

    e_p = cmath.exp(1j * math.pi * p)
    e_a = cmath.exp(1j * math.pi * alpha)

    def ray(r):
        w = r**alpha * e_a + y
        return math.exp(-r) * (r**p * e_p * w ** (-gamma)).imag

    upper = rho + 60.0
    points = [r_peak] if rho < r_peak < upper else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        c_val, c_err = integrate.quad(circle, 0.0, math.pi, epsabs=0.0, epsrel=_QUAD_RTOL, limit=400)
        r_val, r_err = integrate.quad(ray, rho, upper, epsabs=0.0, epsrel=_QUAD_RTOL, limit=400, points=points)
    value = (c_val - r_val) / math.pi
    err = (c_err + r_err) / math.pi + EPS * (abs(c_val) + abs(r_val))
    return EvalResult(value, err, Regime.INTEGRAL)


def ml3(alpha: float, beta: float, gamma: float, x: float) -> EvalResult:
    """Three-parameter (Prabhakar) Mittag-Leffler function.

    ``E^gamma_{alpha,beta}(x) = sum_k Gamma(k+gamma) x^k / (Gamma(gamma) k! Gamma(k alpha + beta))``

    Raises ``OverflowError`` when the value lies beyond the double range
    (large positive ``x`` with small ``alpha``).
    """
    alpha, beta, gamma, x = float(alpha), float(beta), float(gamma), float(x)
    _check_ml_args(alpha, beta, gamma, x)
    if x >= 0.0:
        return _series(alpha, beta, gamma, x)
    y = -x
    series_ok = math.log(y) / alpha <= math.log(_SERIES_SAFE_SCALE)
    if series_ok or alpha >= 1.0:
        res = _series(alpha, beta, gamma, x)
        if alpha >= 1.0 or res.est_abs_error <= _SERIES_MAX_REL_ROUNDING * abs(res.value):
            return res
    res = _asymptotic_series(alpha, beta, gamma, y)
    if res is not None:
        return res
    return _hankel(alpha, beta, gamma, y)


def ml2(alpha: float, beta: float, x: float) -> EvalResult:
    """Two-parameter Mittag-Leffler function ``sum_k x^k / Gamma(k alpha + beta)``."""
    return ml3(alpha, beta, 1.0, x)


def ml3_asymptotic(alpha, beta, gamma, lam, t):
    """Leading large-``t`` term of ``E^gamma_{alpha,beta}(-lam t^alpha)``."""
    if lam <= 0 or t <= 0:
        raise InvalidParams("lam and t must be positive")
    if math.isclose(beta, alpha * gamma, rel_tol=1e-12, abs_tol=1e-15):
        raise DegenerateRegime("leading term undefined for beta == alpha*gamma")
    return lam ** (-gamma) * t ** (-alpha * gamma) * float(sps.rgamma(beta - alpha * gamma))


def ml2_derivative(n: int, alpha: float, beta: float, x: float) -> float:
    """n-th derivative of E_{alpha,beta} at x, as n! E^{n+1}_{alpha, n alpha + beta}(x)."""
    if n < 0 or int(n) != n:
        raise InvalidParams(f"derivative order must be a non-negative integer, got {n!r}")
    n = int(n)
    return math.factorial(n) * ml3(alpha, n * alpha + beta, n + 1, x).value


# ---------------------------------------------------------------- incomplete Beta

_CF_CAP = 10_000
_CF_TINY = 1e-300


def _beta_cf(a, b, x):
    """Modified Lentz evaluation of the incomplete Beta continued fraction."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_CAP):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise NoConvergence(f"incomplete Beta continued fraction failed for a={a}, b={b}, x={x}")


def beta_fn(a: float, b: float) -> float:
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def _check_beta_args(a, b, x):
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"incomplete Beta needs a, b > 0, got a={a!r}, b={b!r}")
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"incomplete Beta needs 0 <= x <= 1, got x={x!r}")


def log_incomplete_beta(a: float, b: float, x: float) -> float:
    """``log B(a, b; x)``; stays finite where ``x^a`` underflows."""
    a, b, x = float(a), float(b), float(x)
    _check_beta_args(a, b, x)
    if x == 0.0:
        return -math.inf
    log_full = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    if x == 1.0:
        return log_full
    if x > (a + 1.0) / (a + b + 2.0):
        log_front = b * math.log1p(-x) + a * math.log(x) - math.log(b)
        rest = math.exp(log_front - log_full) * _beta_cf(b, a, 1.0 - x)
        return log_full + math.log1p(-rest)
    log_front = a * math.log(x) + b * math.log1p(-x) - math.log(a)
    return log_front + math.log(_beta_cf(a, b, x))


def incomplete_beta(a: float, b: float, x: float) -> float:
    """Non-regularised incomplete Beta ``B(a, b; x) = int_0^x y^(a-1) (1-y)^(b-1) dy``.

    Continued fraction, with the ``x -> 1 - x`` reflection above
    ``(a + 1) / (a + b + 2)``.
    """
    a, b, x = float(a), float(b), float(x)
    _check_beta_args(a, b, x)
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return beta_fn(a, b)
    if x > (a + 1.0) / (a + b + 2.0):
        front = math.exp(b * math.log1p(-x) + a * math.log(x)) / b
        return beta_fn(a, b) - front * _beta_cf(b, a, 1.0 - x)
    front = math.exp(a * math.log(x) + b * math.log1p(-x)) / a
    return front * _beta_cf(a, b, x)


def incomplete_beta_small_x(a: float, b: float, x: float) -> float:
    """Two-term small-``x`` expansion ``x^a/a + (1-b) x^(a+1)/(a+1)``."""
    _check_beta_args(a, b, x)
    return x**a / a + (1.0 - b) * x ** (a + 1.0) / (a + 1.0)
