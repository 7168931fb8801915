"""Rayleigh fading channel with first-order Markov time evolution.

The channel at lag ``tau`` is modelled as

    H_tau = J0(2*pi*f_d*tau) * H_0 + Omega,

where ``f_d`` is the maximum Doppler shift, ``J0`` the zero-order Bessel
function of the first kind, and ``Omega`` has i.i.d. CN(0, sigma_omega^2)
entries with ``sigma_omega^2 = 1 - J0^2``.  Per-entry power stays 1 for
any lag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s

#: First positive zero of J0; end of the first monotone branch.
BESSEL_J0_FIRST_ZERO = 2.404825557695773


class DegenerateChannelError(ValueError):
    """Channel realization outside an operation's domain (zero row, rank loss)."""


def _j0_series(x: float) -> float:
    # Alternating series sum_k (-x^2/4)^k / (k!)^2; full float64 accuracy
    # for |x| <= 8 (largest term ~1e2 there, so rounding stays ~1e-14).
    z = -0.25 * x * x
    term = 1.0
    total = 1.0
    for k in range(1, 40):
        term *= z / (k * k)
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
    return total

# Hankel asymptotic expansion in rational form for the large-argument tail,
# coefficients from Cephes (Moshier).  Valid for x > 5; used here for x > 8.
_PP = (7.96936729297347051624e-4, 8.28352392107440799803e-2,
       1.23953371646414299388e0, 5.44725003058768775090e0,
       8.74716500199817011941e0, 5.30324038235394892183e0,
       9.99999999999999997821e-1)
_PQ = (9.24408810558863637013e-4, 8.56288474354474431428e-2,
       1.25352743901058953537e0, 5.47097740330417105182e0,
       8.76190883237069594232e0, 5.30605288235394617618e0,
       1.00000000000000000218e0)
_QP = (-1.13663838898469149931e-2, -1.28252718670509318512e0,
       -1.95539544257735972385e1, -9.32060152123768231369e1,
       -1.77681167980488050595e2, -1.47077505154951170175e2,
       -5.14105326766599330220e1, -6.05014350600728481186e0)
_QQ = (6.43178256118178023184e1, 8.56430025976980587198e2,
       3.88240183605401609683e3, 7.24046774195652478189e3,
       5.93072701187316984827e3, 2.06209331660327847417e3,
       2.42005740240291393179e2)
_SQ2OPI = 7.9788456080286535587989e-1  # sqrt(2/pi)
_PIO4 = 0.7853981633974483


def _polevl(x: float, coef) -> float:
    ans = coef[0]
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def _p1evl(x: float, coef) -> float:
    ans = x + coef[0]
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def bessel_j0(x: float) -> float:
    """Zero-order Bessel function of the first kind.

    Power series for |x| <= 8, Hankel asymptotic expansion beyond.
    Absolute error <= 1e-10 on |x| <= 50.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"bessel_j0 requires finite input, got {x!r}")
    x = abs(x)
    if x <= 8.0:
        return _j0_series(x)
    w = 5.0 / x
    q = 25.0 / (x * x)
    p = _polevl(q, _PP) / _polevl(q, _PQ)
    qq = _polevl(q, _QP) / _p1evl(q, _QQ)
    xn = x - _PIO4
    return _SQ2OPI * (p * math.cos(xn) - w * qq * math.sin(xn)) / math.sqrt(x)


def invert_bessel_j0(y: float, tol: float = 1e-14) -> float:
    """Inverse of J0 restricted to the first monotone branch [0, 2.404826].

    Returns x with J0(x) = y for y in (0, 1]; the branch restriction makes
    the inverse single-valued.
    """
    if not (0.0 < y <= 1.0):
        raise ValueError(f"invert_bessel_j0 requires y in (0, 1], got {y!r}")
    if y == 1.0:
        return 0.0
    lo, hi = 0.0, BESSEL_J0_FIRST_ZERO
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bessel_j0(mid) > y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AgingParams:
    """CSIT aging model: Doppler, lag, correlation J0(2*pi*f_d*tau), and
    innovation variance sigma_omega^2 = 1 - J0^2."""

    doppler_hz: float
    lag_s: float
    j0: float
    sigma_omega_sq: float

    def __post_init__(self):
        if self.doppler_hz < 0 or self.lag_s < 0:
            raise ValueError("doppler_hz and lag_s must be non-negative")
        if not -1.0 <= self.j0 <= 1.0:
            raise ValueError(f"j0 must be in [-1, 1], got {self.j0!r}")
        if not 0.0 <= self.sigma_omega_sq <= 1.0:
            raise ValueError("sigma_omega_sq must be in [0, 1]")
        if abs(self.sigma_omega_sq - (1.0 - self.j0 ** 2)) > 1e-12:
            raise ValueError("sigma_omega_sq must equal 1 - j0^2")


def aging_params(velocity_mps: float, carrier_hz: float, lag_s: float) -> AgingParams:
    """Build AgingParams from kinematics: f_d = v * f_c / c."""
    if not all(math.isfinite(v) for v in (velocity_mps, carrier_hz, lag_s)):
        raise ValueError("aging_params requires finite arguments")
    if velocity_mps < 0:
        raise ValueError(f"velocity_mps must be >= 0, got {velocity_mps!r}")
    if carrier_hz <= 0:
        raise ValueError(f"carrier_hz must be > 0, got {carrier_hz!r}")
    if lag_s < 0:
        raise ValueError(f"lag_s must be >= 0, got {lag_s!r}")
    doppler = velocity_mps * carrier_hz / SPEED_OF_LIGHT
    j0 = bessel_j0(2.0 * math.pi * doppler * lag_s)
    return AgingParams(
        doppler_hz=doppler,
        lag_s=lag_s,
        j0=j0,
        sigma_omega_sq=1.0 - j0 * j0,
    )


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Deterministic PCG64 generator keyed by (seed, *stream).

    Parallel workers derive disjoint substreams from (master seed, chunk
    index); identical keys yield bit-identical draw sequences.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, stream)]))


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussians, total variance per entry."""
    z = rng.standard_normal((2, *np.atleast_1d(shape)))
    return math.sqrt(variance / 2.0) * (z[0] + 1j * z[1])


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def sample_initial_channel(m_tx: int, n_rx: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an (n_rx, m_tx) i.i.d. CN(0, 1) channel snapshot (read-only array)."""
    if m_tx < 1 or n_rx < 1:
        raise ValueError(f"channel dimensions must be >= 1, got ({n_rx}, {m_tx})")
    return _freeze(complex_normal(rng, (n_rx, m_tx)))


def evolve(h0: np.ndarray, params: AgingParams, rng: np.random.Generator) -> np.ndarray:
    """Advance a snapshot by one lag: j0 * h0 + CN(0, sigma_omega^2) innovation.

    h0 is not modified.  The degenerate sigma_omega^2 = 0 case is an exact
    pass-through and consumes no randomness.
    """
    if params.sigma_omega_sq == 0.0:
        return h0 if not h0.flags.writeable else _freeze(h0.copy())
    omega = complex_normal(rng, h0.shape, params.sigma_omega_sq)
    return _freeze(params.j0 * h0 + omega)
