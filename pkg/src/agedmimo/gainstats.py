"""Closed-form statistics of the beamforming gain under aged CSIT.

Conditioned on the aged snapshot, every scheme's gain is a sum of D
independent squared complex Gaussians,

    beta = sum_{i<D} |j0 * a_i + omega_i|^2,   omega_i ~ CN(0, s2),

a non-central chi-square with noncentrality nu = j0^2 * beta_0 (the part
known from CSIT) and mean nu + D*s2.  Its Laplace transform gives the
tilted objective used by the Chernoff bound,

    f(t, b) = exp(t*b - nu*t / (1 + s2*t)) / (1 + s2*t)^D,

whose minimizer over t > 0 is available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamforming import BeamformerKind, GroupingPlan, TxWeights, realized_gain
from .channel import AgingParams


class DeterministicGainError(ValueError):
    """Raised where a spread parameter is required but sigma_omega_sq = 0."""


@dataclass(frozen=True)
class GainDistribution:
    """Parameters (mean, degrees, sigma_omega_sq) of the conditional gain law.

    ``variance`` is the exact second central moment,
    2*s2*nu + D*s2^2; ``variance_unscaled`` keeps the classical
    unit-variance-component expression 4*nu + 2*D*s2, which some quoted
    tail-bound forms use without the per-component scale.  Only the
    Chebyshev bound consumes a variance, and it uses ``variance``.
    """

    mean: float
    variance: float
    variance_unscaled: float
    degrees: int
    sigma_omega_sq: float
    noncentrality: float

    def __post_init__(self):
        if self.degrees < 1:
            raise ValueError("degrees must be a positive integer")
        if not 0.0 <= self.sigma_omega_sq <= 1.0:
            raise ValueError("sigma_omega_sq must be in [0, 1]")
        if self.noncentrality < 0 or self.mean <= 0:
            raise ValueError("noncentrality must be >= 0 and mean > 0")
        expected = self.noncentrality + self.degrees * self.sigma_omega_sq
        if abs(self.mean - expected) > 1e-9 * max(1.0, self.mean):
            raise ValueError("mean must equal noncentrality + degrees * sigma_omega_sq")

    @property
    def deterministic(self) -> bool:
        return self.sigma_omega_sq == 0.0


def _distribution(csit_gain: float, degrees: int, params: AgingParams) -> GainDistribution:
    s2 = params.sigma_omega_sq
    nu = params.j0 ** 2 * csit_gain
    return GainDistribution(
        mean=nu + degrees * s2,
        variance=2.0 * s2 * nu + degrees * s2 * s2,
        variance_unscaled=4.0 * nu + 2.0 * degrees * s2,
        degrees=degrees,
        sigma_omega_sq=s2,
        noncentrality=nu,
    )


def _degrees_for(weights: TxWeights, n_rx: int) -> int:
    kind = weights.kind
    if kind in (BeamformerKind.SUPERIMPOSED_MF, BeamformerKind.TIME_ORTHOGONAL_MF):
        return n_rx
    if kind is BeamformerKind.TIME_ORTHOGONAL_MF_RECYCLING:
        return n_rx * n_rx
    if kind in (BeamformerKind.GSTBC_SUPERIMPOSED, BeamformerKind.GSTBC_TIME_ORTHOGONAL):
        return n_rx * weights.grouping.k_groups
    raise ValueError(f"no gain distribution for kind {kind}")


def gain_distribution(h0: np.ndarray, weights: TxWeights, params: AgingParams) -> GainDistribution:
    """Conditional gain law of any scheme: noncentrality is j0^2 times the
    perfect-CSIT gain of the same weights, degrees is the number of complex
    terms (N, N^2 with recycling, N*K grouped)."""
    return _distribution(realized_gain(h0, weights), _degrees_for(weights, h0.shape[0]), params)


def superimposed_moments(h0: np.ndarray, w: np.ndarray, params: AgingParams) -> GainDistribution:
    """Gain law for a single unit-norm vector: mean j0^2 ||H0 w||^2 + N s2."""
    proj = h0 @ w
    csit = float((proj.real ** 2 + proj.imag ** 2).sum())
    return _distribution(csit, h0.shape[0], params)


def time_orthogonal_moments(h0: np.ndarray, weights: TxWeights, params: AgingParams) -> GainDistribution:
    """Gain law of time-orthogonal beamforming, with or without recycling.

    Without recycling the mean is j0^2 ||H0||^2 + N s2 with N degrees; the
    full-combine variant uses ||H0 W||^2 and N^2 degrees.
    """
    if weights.kind not in (BeamformerKind.TIME_ORTHOGONAL_MF,
                            BeamformerKind.TIME_ORTHOGONAL_MF_RECYCLING):
        raise ValueError(f"expected time-orthogonal weights, got {weights.kind}")
    return gain_distribution(h0, weights, params)


def gstbc_moments(h0: np.ndarray, weights: TxWeights, plan: GroupingPlan,
                  params: AgingParams) -> GainDistribution:
    """Gain law of a grouped scheme: N*K degrees; the time-orthogonal variant's
    mean reduces to j0^2 ||H0||^2 + N*K*s2 and is grouping-independent."""
    if weights.grouping is not plan and weights.grouping != plan:
        raise ValueError("weights were built against a different grouping plan")
    return gain_distribution(h0, weights, params)


def mrc_distribution(n_rx: int) -> GainDistribution:
    """Gain law of the single-tx-antenna MRC baseline: central chi-square with
    N unit-variance complex terms (no CSIT part regardless of lag)."""
    return GainDistribution(
        mean=float(n_rx), variance=float(n_rx), variance_unscaled=2.0 * n_rx,
        degrees=n_rx, sigma_omega_sq=1.0, noncentrality=0.0,
    )


def chernoff_log_objective(t, beta_lb, dist: GainDistribution):
    """log f(t, beta_lb); accepts scalar or array t (log-domain avoids the
    underflow of f itself at realistic optima)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be > 0")
    if dist.deterministic:
        raise DeterministicGainError("gain is deterministic; objective undefined")
    s2 = dist.sigma_omega_sq
    u = 1.0 + s2 * t
    out = t * beta_lb - dist.noncentrality * t / u - dist.degrees * np.log(u)
    return out if out.ndim else float(out)


def chernoff_objective(t: float, beta_lb: float, dist: GainDistribution) -> float:
    """Tilted tail objective f(t, beta_lb) = exp(t*beta_lb) E[exp(-t*beta)]."""
    return math.exp(chernoff_log_objective(t, beta_lb, dist))


def optimal_t(beta_lb: float, dist: GainDistribution) -> float:
    """Closed-form minimizer of f(t, beta_lb) over t > 0 for beta_lb < mean:

        t* = [D s2 + sqrt(s2^2 D^2 + 4 beta_lb nu)] / (2 s2 beta_lb) - 1/s2.
    """
    if dist.deterministic:
        raise DeterministicGainError("gain is deterministic; the bound is exact")
    if beta_lb <= 0:
        raise ValueError(f"beta_lb must be > 0, got {beta_lb!r}")
    if beta_lb >= dist.mean:
        raise ValueError("beta_lb must lie below the mean; no interior minimizer exists")
    s2 = dist.sigma_omega_sq
    d = float(dist.degrees)
    disc = math.sqrt(s2 * s2 * d * d + 4.0 * beta_lb * dist.noncentrality)
    return (d * s2 + disc) / (2.0 * s2 * beta_lb) - 1.0 / s2
