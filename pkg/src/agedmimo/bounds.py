"""Pessimistic lower bounds on the beamforming gain.

Three bounds on the outage quantile P(beta < b) <= p_out are provided:
the Chernoff bound (bisection on the closed-form tilted objective, valid
because min_t f(t, b) is monotone increasing in b on (0, mean)), the
Chebyshev bound mean - std/sqrt(p_out), and a small-tail polynomial
expansion bound.  The asymptotic hardening limits of the per-(M*N)
normalized bound are exposed for large-array shortcuts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .beamforming import BeamformerKind
from .channel import AgingParams
from .gainstats import GainDistribution, chernoff_log_objective, optimal_t


class BoundKind(Enum):
    CHERNOFF = "chernoff"
    CHEBYSHEV = "chebyshev"
    POLYNOMIAL = "polynomial"
    HARDENED_LIMIT = "hardened_limit"


@dataclass(frozen=True)
class BoundResult:
    """A candidate lower bound: ``valid`` marks it usable for power adaptation
    (positive, and for tail bounds not above the mean)."""

    kind: BoundKind
    value: float
    p_out: float
    valid: bool
    iterations: int = 0


def _check_p_out(p_out: float) -> None:
    if not 0.0 < p_out < 1.0:
        raise ValueError(f"p_out must be in (0, 1), got {p_out!r}")


def _deterministic_result(kind: BoundKind, dist: GainDistribution, p_out: float) -> BoundResult:
    # sigma_omega_sq = 0: the gain equals its mean with certainty.
    return BoundResult(kind=kind, value=dist.mean, p_out=p_out, valid=True, iterations=0)


def min_log_objective(beta: float, dist: GainDistribution) -> float:
    """log min_t f(t, beta) at the closed-form optimal t."""
    return chernoff_log_objective(optimal_t(beta, dist), beta, dist)


def chernoff_lower_bound(dist: GainDistribution, p_out: float,
                         tol: float = 1e-4, max_iter: int = 200) -> BoundResult:
    """Invert min_t f(t, b) = p_out by bisection on b in (0, mean).

    Terminates when |f(t*(b), b) - p_out| <= tol * p_out.  Deterministic
    for fixed inputs.
    """
    _check_p_out(p_out)
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol!r}")
    if dist.deterministic:
        return _deterministic_result(BoundKind.CHERNOFF, dist, p_out)
    log_p = math.log(p_out)
    eps = 1e-12 * dist.mean
    lo, hi = eps, dist.mean - eps
    iterations = 0
    value = 0.5 * (lo + hi)
    for _ in range(max_iter):
        iterations += 1
        value = 0.5 * (lo + hi)
        diff = min_log_objective(value, dist) - log_p
        if abs(math.expm1(diff)) <= tol:
            break
        if diff < 0.0:
            lo = value
        else:
            hi = value
    return BoundResult(
        kind=BoundKind.CHERNOFF, value=value, p_out=p_out,
        valid=0.0 < value < dist.mean, iterations=iterations,
    )


def chernoff_lower_bound_array(means: np.ndarray, degrees: int, sigma_omega_sq: float,
                               p_out: float, iters: int = 96) -> np.ndarray:
    """Vectorized Chernoff bound over an array of distribution means.

    Fixed iteration count keeps the result a pure function of the inputs
    (bit-identical regardless of batching or worker count).
    """
    _check_p_out(p_out)
    means = np.asarray(means, dtype=float)
    s2 = sigma_omega_sq
    if s2 == 0.0:
        return means.copy()
    d = float(degrees)
    nc = means - d * s2
    log_p = math.log(p_out)
    lo = means * 1e-12
    hi = means * (1.0 - 1e-12)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        t = (d * s2 + np.sqrt(s2 * s2 * d * d + 4.0 * mid * nc)) / (2.0 * s2 * mid) - 1.0 / s2
        u = 1.0 + s2 * t
        val = t * mid - nc * t / u - d * np.log(u)
        below = val < log_p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def chebyshev_lower_bound(dist: GainDistribution, p_out: float) -> BoundResult:
    """Lower branch of |b - mean| = std/sqrt(p_out); may be negative at small
    p_out, in which case it is flagged unusable rather than raising."""
    _check_p_out(p_out)
    if dist.deterministic:
        return _deterministic_result(BoundKind.CHEBYSHEV, dist, p_out)
    value = dist.mean - math.sqrt(dist.variance / p_out)
    return BoundResult(kind=BoundKind.CHEBYSHEV, value=value, p_out=p_out,
                       valid=value > 0.0)


def polynomial_lower_bound(dist: GainDistribution, p_out: float) -> BoundResult:
    """Small-tail expansion bound (p_out * D!)^(1/D) * s2 * exp(mean/(D*s2) - 1).

    Grows exponentially with mean/(D*s2), so for concentrated gains it lands
    far above the distribution and is flagged unusable.
    """
    _check_p_out(p_out)
    if dist.deterministic:
        return _deterministic_result(BoundKind.POLYNOMIAL, dist, p_out)
    d = float(dist.degrees)
    s2 = dist.sigma_omega_sq
    log_value = ((math.log(p_out) + math.lgamma(d + 1.0)) / d
                 + math.log(s2) + dist.mean / (d * s2) - 1.0)
    value = math.exp(log_value) if log_value < 700 else math.inf
    return BoundResult(kind=BoundKind.POLYNOMIAL, value=value, p_out=p_out,
                       valid=0.0 < value < dist.mean)


def hardened_limit(scheme: BeamformerKind, n_rx: int, params: AgingParams) -> float:
    """Large-M limit of the per-(M*N) normalized gain mean (and bound):
    j0^2 for time-orthogonal, j0^2/N for superimposed."""
    j0_sq = params.j0 ** 2
    if scheme is BeamformerKind.TIME_ORTHOGONAL_MF:
        return j0_sq
    if scheme is BeamformerKind.SUPERIMPOSED_MF:
        return j0_sq / n_rx
    raise ValueError(f"no hardened limit for scheme {scheme}")
