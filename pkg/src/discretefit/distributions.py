"""Scalar probability kernels for the probit and logit links.

Provides the standard-normal and logistic cdf/pdf/quantile plus unit-variance
truncated-normal sampling. Everything else in the package is built on these.

The normal kernels delegate to scipy.special (ndtr/ndtri/log_ndtr), which are
accurate to well below 1e-14 absolute error. The logistic kernels use the
sign-split form so they never overflow for |w| up to ~745. Truncated-normal
draws use inverse-cdf sampling, switching to a log-domain formulation once
the truncation interval sits beyond |6| standard deviations, where the naive
inverse cdf loses all precision.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy import special

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Standardized bound beyond which inverse-cdf sampling moves to the log domain.
_TAIL_SPLIT = 6.0
_LARGEST_P_BELOW_1 = np.nextafter(1.0, 0.0)
_LOG_FLOOR = -745.0


def _as_validated_array(w, name: str = "w") -> np.ndarray:
    arr = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {w!r}")
    return arr


def _scalar_like(value: np.ndarray, reference) -> float | np.ndarray:
    if np.isscalar(reference) or np.ndim(reference) == 0:
        return float(value)
    return value


class Link(str, enum.Enum):
    """Error-distribution link: standard normal (probit) or logistic (logit).

    The methods tolerate +/-inf arguments (cdf saturates at 0/1, pdf at 0),
    which the likelihood code relies on for the open-ended outer cut-points.
    """

    PROBIT = "probit"
    LOGIT = "logit"

    def cdf(self, w):
        w = np.asarray(w, dtype=float)
        if self is Link.PROBIT:
            return special.ndtr(w)
        return _logistic_cdf_raw(w)

    def pdf(self, w):
        w = np.asarray(w, dtype=float)
        if self is Link.PROBIT:
            with np.errstate(over="ignore"):
                return _INV_SQRT_2PI * np.exp(-0.5 * w * w)
        return _logistic_cdf_raw(w) * _logistic_cdf_raw(-w)

    def log_cdf(self, w):
        w = np.asarray(w, dtype=float)
        if self is Link.PROBIT:
            return special.log_ndtr(w)
        # log L(w) = -log(1 + exp(-w))
        return -np.logaddexp(0.0, -w)

    def log_pdf(self, w):
        w = np.asarray(w, dtype=float)
        if self is Link.PROBIT:
            with np.errstate(invalid="ignore"):
                out = -0.5 * w * w - 0.5 * math.log(2.0 * math.pi)
            return np.where(np.isinf(w), -np.inf, out)
        return -np.logaddexp(0.0, -w) - np.logaddexp(0.0, w)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if self is Link.PROBIT:
            return special.ndtri(p)
        return np.log(p) - np.log1p(-p)


def _logistic_cdf_raw(w: np.ndarray) -> np.ndarray:
    """Sign-split logistic cdf, safe for the whole double range."""
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    pos = w >= 0
    with np.errstate(over="ignore"):
        out[pos] = 1.0 / (1.0 + np.exp(-w[pos]))
        ew = np.exp(w[~pos])
    out[~pos] = ew / (1.0 + ew)
    return out


def norm_cdf(w):
    """Standard normal cdf Phi(w). Input must be finite."""
    arr = _as_validated_array(w)
    return _scalar_like(special.ndtr(arr), w)


def norm_pdf(w):
    """Standard normal density phi(w). Input must be finite."""
    arr = _as_validated_array(w)
    return _scalar_like(_INV_SQRT_2PI * np.exp(-0.5 * arr * arr), w)


def logistic_cdf(w):
    """Logistic cdf exp(w)/(1+exp(w)), computed without overflow."""
    arr = _as_validated_array(w)
    return _scalar_like(_logistic_cdf_raw(arr), w)


def logistic_pdf(w):
    """Logistic density, evaluated as cdf(w)*cdf(-w) to avoid cancellation."""
    arr = _as_validated_array(w)
    return _scalar_like(_logistic_cdf_raw(arr) * _logistic_cdf_raw(-arr), w)


def norm_inv_cdf(p):
    """Standard normal quantile. Requires 0 < p < 1."""
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError(f"p must lie strictly in (0, 1), got {p!r}")
    return _scalar_like(special.ndtri(arr), p)


def _upper_tail_draw(a: np.ndarray, b: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-cdf draw on (a, b] with a >= _TAIL_SPLIT, done in log space."""
    log_sa = special.log_ndtr(-a)
    log_sb = special.log_ndtr(-b)  # -inf when b = +inf
    with np.errstate(invalid="ignore"):
        ratio = np.exp(log_sb - log_sa)
    ratio = np.where(np.isneginf(log_sb), 0.0, ratio)
    log_tail = log_sa + np.log1p(-(1.0 - u) * (1.0 - ratio))
    log_tail = np.maximum(log_tail, _LOG_FLOOR)
    return -special.ndtri_exp(log_tail)


def trunc_norm_draws(mean, lower, upper, rng: np.random.Generator, size=None):
    """Vectorized unit-variance truncated-normal draws on (lower, upper].

    ``mean``, ``lower`` and ``upper`` broadcast against each other; each draw
    consumes exactly one uniform from ``rng`` so streams stay aligned no
    matter which branch an element takes.
    """
    mean = np.asarray(mean, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if not np.all(np.isfinite(mean)):
        raise ValueError("mean must be finite")
    if not np.all(lower < upper):
        raise ValueError("require lower < upper for every element")
    shape = np.broadcast_shapes(mean.shape, lower.shape, upper.shape)
    if size is not None:
        shape = np.broadcast_shapes(shape, tuple(np.atleast_1d(size)) if not isinstance(size, tuple) else size)

    a = np.broadcast_to(lower - mean, shape).copy()
    b = np.broadcast_to(upper - mean, shape).copy()
    u = rng.uniform(size=shape)

    out = np.empty(shape)
    right = a >= _TAIL_SPLIT
    left = b <= -_TAIL_SPLIT
    mid = ~(right | left)

    if np.any(mid):
        fa = special.ndtr(a[mid])
        fb = special.ndtr(b[mid])
        p = fa + (1.0 - u[mid]) * (fb - fa)
        p = np.minimum(p, _LARGEST_P_BELOW_1)
        out[mid] = special.ndtri(p)
    if np.any(right):
        out[right] = _upper_tail_draw(a[right], b[right], u[right])
    if np.any(left):
        out[left] = -_upper_tail_draw(-b[left], -a[left], u[left])

    return out + np.broadcast_to(mean, shape)


def trunc_norm_sample(mean: float, lower: float, upper: float, rng: np.random.Generator) -> float:
    """One draw from a unit-variance normal at ``mean`` truncated to (lower, upper].

    ``lower``/``upper`` may be -inf/+inf. Raises ValueError when the interval
    is empty or the mean is not finite.
    """
    if not math.isfinite(mean):
        raise ValueError(f"mean must be finite, got {mean!r}")
    if not lower < upper:
        raise ValueError(f"require lower < upper, got ({lower!r}, {upper!r})")
    return float(trunc_norm_draws(mean, lower, upper, rng, size=()))
