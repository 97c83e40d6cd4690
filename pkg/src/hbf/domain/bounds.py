"""
Closed-form error bounds and threshold formulas for the index.

Scores here follow the unit-variance-per-sqrt(d) convention: a non-member
score is sub-Gaussian with variance proxy d, a clean match scores about d.
Every function returning a probability clamps it to [0, 1].

"""

import math
from dataclasses import dataclass
from typing import Optional

from src.hbf.domain.exceptions import InvalidArgument

# rational approximation of the normal quantile, split at P_LOW / 1 - P_LOW
_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
P_LOW = 0.02425

EVT_FIRST = "first"
EVT_GUMBEL = "gumbel"


@dataclass(frozen=True)
class MarginSettings:
    """Failure bound of the margin decoder and the thresholds it implies."""

    failure_bound: float
    tau: float
    delta: float


@dataclass(frozen=True)
class NoiseTolerance:
    signal: float
    noise_scale: float
    tolerant: bool


# ----------
# VALIDATION
# ----------
def _clamp(p: float) -> float:
    return min(1.0, max(0.0, p))


def _check_dim(d: int):
    if d < 2:
        raise InvalidArgument(f"dimension must be >= 2, got {d}")


def _check_eps(eps: float):
    if not 0 < eps < 1:
        raise InvalidArgument(f"eps must lie in (0, 1), got {eps}")


def _check_noise(d: int, hamming: float, p_e: float):
    _check_dim(d)
    if not 0 <= hamming <= d:
        raise InvalidArgument(f"Hamming distance must lie in [0, {d}], got {hamming}")
    if not 0 <= p_e < 0.5:
        raise InvalidArgument(f"flip probability must lie in [0, 0.5), got {p_e}")


# ----------------
# NORMAL QUANTILES
# ----------------
def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _poly(coeffs, x: float) -> float:
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def inv_norm_cdf(p: float) -> float:
    """
    Standard normal quantile: rational approximation followed by one
    Halley step against the erfc-based CDF. Accurate to about 1e-15.

    """
    if not 0 < p < 1:
        raise InvalidArgument(f"quantile level must lie in (0, 1), got {p}")
    if p > 0.5:
        # refine in the lower tail, where the CDF keeps its relative precision
        return -_lower_quantile(1.0 - p)
    return _lower_quantile(p)


def _lower_quantile(p: float) -> float:
    if p < P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = _poly(_C, q) / (_poly(_D, q) * q + 1.0)
    else:
        q = p - 0.5
        r = q * q
        x = _poly(_A, r) * q / (_poly(_B, r) * r + 1.0)

    err = norm_cdf(x) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


# --------------------
# FALSE POSITIVE BOUND
# --------------------
def fp_bound(n: int, d: int, tau: float) -> float:
    """min(1, n exp(-tau^2 / 2d)): chance that some impostor clears tau."""
    _check_dim(d)
    if tau < 0:
        raise InvalidArgument(f"tau must be >= 0, got {tau}")
    if n <= 0 or math.isinf(tau):
        return 0.0
    return _clamp(n * math.exp(-(tau * tau) / (2.0 * d)))


def fp_threshold(n: int, d: int, eps: float) -> float:
    """The tau at which fp_bound(n, d, tau) == eps."""
    _check_dim(d)
    _check_eps(eps)
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    return math.sqrt(2.0 * d * math.log(n / eps))


# --------------------
# FALSE NEGATIVE BOUND
# --------------------
def signal_mean(d: int, hamming: float, p_e: float) -> float:
    """Expected match score (d - 2H)(1 - 2 p_e) under key and memory noise."""
    _check_noise(d, hamming, p_e)
    return (d - 2 * hamming) * (1 - 2 * p_e)


def fn_bound(
    d: int, hamming: float, p_e: float, n: int, t: Optional[float] = None
) -> float:
    """
    exp(-(mu - t)^2 / 2d) + n exp(-t^2 / 2d): either the match score falls
    below t or some impostor climbs above it. Defaults to the split t = mu/2.

    """
    mu = signal_mean(d, hamming, p_e)
    if t is None:
        if mu <= 0:
            return 1.0
        t = mu / 2
    if not 0 < t < mu:
        raise InvalidArgument(f"split t must lie in (0, {mu}), got {t}")
    miss = math.exp(-((mu - t) ** 2) / (2.0 * d))
    impostor = max(n, 0) * math.exp(-(t * t) / (2.0 * d))
    return _clamp(miss + impostor)


def margin_failure_bound(rho: float, d: int, c: float, m: int) -> MarginSettings:
    """
    Failure bound of the margin decoder run with tau = rho d / 2 and
    delta = rho d / 4, where impostor scores have variance proxy c d.

    """
    _check_dim(d)
    if not (rho > 0 and c > 0):
        raise InvalidArgument("rho and c must be > 0")
    if m < 0:
        raise InvalidArgument(f"candidate count must be >= 0, got {m}")
    snr = rho * rho * d / c
    bound = 2.0 * math.exp(-snr / 8.0)
    if m:
        bound += 2.0 * m * math.exp(-snr / 32.0)
    return MarginSettings(_clamp(bound), tau=rho * d / 2.0, delta=rho * d / 4.0)


def noise_tolerance_region(d: int, n: int, hamming: float, p_e: float) -> NoiseTolerance:
    """Does the noisy signal clear sqrt(2 d ln n), the typical largest impostor?"""
    signal = signal_mean(d, hamming, p_e)
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    noise_scale = math.sqrt(2.0 * d * math.log(n))
    return NoiseTolerance(signal, noise_scale, signal > noise_scale)


# --------------------------
# EXTREME-VALUE THRESHOLDS
# --------------------------
def evt_threshold_exact(sigma: float, m: int, eps: float) -> float:
    """
    The t with P{max of m iid N(0, sigma^2) > t} = eps, i.e.
    sigma * quantile((1 - eps)^(1/m)).

    """
    if not sigma > 0:
        raise InvalidArgument(f"sigma must be > 0, got {sigma}")
    if m < 1:
        raise InvalidArgument(f"m must be >= 1, got {m}")
    _check_eps(eps)
    # work with the upper tail 1 - (1 - eps)^(1/m), which stays accurate
    # when the level itself rounds to 1.0
    tail = -math.expm1(math.log1p(-eps) / m)
    return -sigma * inv_norm_cdf(tail)


def evt_threshold_approx(sigma: float, m: int, order: str = EVT_FIRST) -> float:
    if not sigma > 0:
        raise InvalidArgument(f"sigma must be > 0, got {sigma}")
    if order == EVT_FIRST:
        if m < 1:
            raise InvalidArgument(f"m must be >= 1, got {m}")
        return sigma * math.sqrt(2.0 * math.log(m))
    if order == EVT_GUMBEL:
        if m < 3:
            raise InvalidArgument(f"Gumbel expansion needs m >= 3, got {m}")
        root = math.sqrt(2.0 * math.log(m))
        correction = (math.log(math.log(m)) + math.log(4.0 * math.pi)) / (2.0 * root)
        return sigma * (root - correction)
    raise InvalidArgument(f"unknown expansion order {order!r}")
