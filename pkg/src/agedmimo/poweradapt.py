"""Outage-guaranteeing transmit-power adaptation.

Pipeline: split the packet-error budget into decoding and outage shares,
map the decoding share to an iSNR threshold, lower-bound the beamforming
gain pessimistically, and set gamma = isnr_0 / beta_lb so that
gamma * beta >= gamma * beta_lb >= isnr_0 holds on all but a p_out
fraction of realizations.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .beamforming import (BeamformerKind, GroupingPlan, gstbc_weights, superimposed_mf,
                          time_orthogonal_mf, time_orthogonal_mf_recycling)
from .bounds import chernoff_lower_bound, hardened_limit
from .channel import AgingParams, invert_bessel_j0
from .gainstats import gain_distribution


class InfeasibleError(RuntimeError):
    """No parameter choice can satisfy the requested constraint."""


class BudgetMode(Enum):
    #: p_out = p_dec = p_per / 2 (covers the target whenever both shares hold)
    PESSIMISTIC_HALF = "pessimistic_half"
    #: p_out + p_dec = p_per
    ADDITIVE_SPLIT = "additive_split"


@dataclass(frozen=True)
class ReliabilityBudget:
    p_per: float
    p_dec: float
    p_out: float
    mode: BudgetMode

    def __post_init__(self):
        for name in ("p_per", "p_dec", "p_out"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {v!r}")


def split_budget(p_per: float, p_dec: float | None = None,
                 mode: BudgetMode = BudgetMode.ADDITIVE_SPLIT) -> ReliabilityBudget:
    """Allocate the packet-error target between outage and decoding errors."""
    if not 0.0 < p_per < 1.0:
        raise ValueError(f"p_per must be in (0, 1), got {p_per!r}")
    if mode is BudgetMode.PESSIMISTIC_HALF:
        half = p_per / 2.0
        return ReliabilityBudget(p_per=p_per, p_dec=half, p_out=half, mode=mode)
    if p_dec is None:
        raise ValueError("additive split requires p_dec")
    if not 0.0 < p_dec < p_per:
        raise ValueError(f"p_dec must be in (0, p_per), got {p_dec!r}")
    return ReliabilityBudget(p_per=p_per, p_dec=p_dec, p_out=p_per - p_dec, mode=mode)


LOG2_E = math.log2(math.e)


def _q_function(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


@dataclass(frozen=True)
class NormalApproxThreshold:
    """Finite-blocklength normal-approximation decoder model.

    Block error probability at blocklength n and rate R (information bits
    per channel use):

        Q((C(s) - R + log2(n)/(2n)) * sqrt(n / V(s))),
        C(s) = log2(1 + s),  V(s) = s(s+2)/(s+1)^2 * log2(e)^2.
    """

    blocklength_bits: int = 128
    rate: float = 0.5

    def block_error(self, isnr: float) -> float:
        n = self.blocklength_bits
        if isnr <= 0.0:
            return 1.0
        cap = math.log2(1.0 + isnr)
        disp = (isnr * (isnr + 2.0) / (isnr + 1.0) ** 2) * LOG2_E ** 2
        return _q_function((cap - self.rate + math.log2(n) / (2.0 * n)) * math.sqrt(n / disp))

    def isnr_for(self, p_dec: float) -> float:
        """Smallest iSNR meeting the decoding target, by bisection (geometric)."""
        if not 0.0 < p_dec < 1.0:
            raise ValueError(f"p_dec must be in (0, 1), got {p_dec!r}")
        lo, hi = 1e-9, 1e9
        if self.block_error(hi) > p_dec:
            raise InfeasibleError("decoding target unreachable at any iSNR")
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if self.block_error(mid) <= p_dec:
                hi = mid
            else:
                lo = mid
        return hi


@dataclass(frozen=True)
class TableThreshold:
    """Measured decoder curve: (p_dec, isnr0_db) points, interpolated
    log-linearly in p_dec.  No extrapolation outside the table range."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.points) < 1:
            raise ValueError("threshold table must have at least one point")
        ps = [p for p, _ in self.points]
        dbs = [d for _, d in self.points]
        if any(not 0.0 < p < 1.0 for p in ps):
            raise ValueError("table p_dec values must be in (0, 1)")
        if sorted(ps) != ps or len(set(ps)) != len(ps):
            raise ValueError("table must be sorted by strictly increasing p_dec")
        if any(dbs[i + 1] >= dbs[i] for i in range(len(dbs) - 1)):
            raise ValueError("isnr0_db must be strictly decreasing in p_dec")

    def isnr_for(self, p_dec: float) -> float:
        ps = [p for p, _ in self.points]
        dbs = [d for _, d in self.points]
        if not ps[0] <= p_dec <= ps[-1]:
            raise ValueError(f"p_dec {p_dec!r} outside table range [{ps[0]}, {ps[-1]}]")
        db = float(np.interp(math.log(p_dec), np.log(ps), dbs))
        return 10.0 ** (db / 10.0)


def load_threshold_table(path) -> TableThreshold:
    """Read a decoder curve from CSV with the exact header 'p_dec,isnr0_db'."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["p_dec", "isnr0_db"]:
            raise ValueError(f"expected header 'p_dec,isnr0_db', got {header!r}")
        points = tuple((float(row[0]), float(row[1])) for row in reader if row)
    return TableThreshold(points=points)


def isnr_threshold(model, p_dec: float) -> float:
    """iSNR threshold (linear) meeting the decoding-error share."""
    return model.isnr_for(p_dec)


@dataclass(frozen=True)
class PowerDecision:
    gamma: float
    gamma_db: float
    isnr_0: float
    beta_lb: float
    feasible: bool
    lag_cap_s: float = math.nan


def transmit_power(isnr_0: float, beta_lb: float, cap: float) -> PowerDecision:
    """gamma = isnr_0 / beta_lb; a non-positive bound yields an infeasible
    decision (gamma = inf) rather than an error."""
    if isnr_0 <= 0:
        raise ValueError(f"isnr_0 must be > 0, got {isnr_0!r}")
    if beta_lb <= 0 or not math.isfinite(beta_lb):
        return PowerDecision(gamma=math.inf, gamma_db=math.inf, isnr_0=isnr_0,
                             beta_lb=beta_lb, feasible=False)
    gamma = isnr_0 / beta_lb
    return PowerDecision(gamma=gamma, gamma_db=10.0 * math.log10(gamma),
                         isnr_0=isnr_0, beta_lb=beta_lb, feasible=gamma <= cap)


def max_lag(scheme: BeamformerKind, isnr_0: float, cap: float, n_rx: int) -> float:
    """Largest tolerable normalized CSIT age tau * f_d under a power cap:

        time-orthogonal: (1/2pi) J0^{-1}(sqrt(isnr_0 / cap))
        superimposed:    (1/2pi) J0^{-1}(sqrt(N * isnr_0 / cap))

    Inversion is restricted to the first monotone branch of J0; ratios
    above 1 are infeasible at any lag.
    """
    if isnr_0 <= 0 or cap <= 0:
        raise ValueError("isnr_0 and cap must be > 0")
    if scheme is BeamformerKind.TIME_ORTHOGONAL_MF:
        ratio = isnr_0 / cap
    elif scheme is BeamformerKind.SUPERIMPOSED_MF:
        ratio = n_rx * isnr_0 / cap
    else:
        raise ValueError(f"no lag cap for scheme {scheme}")
    if ratio > 1.0:
        raise InfeasibleError(
            f"required gain ratio {ratio:.4g} exceeds 1; infeasible at any lag")
    return invert_bessel_j0(math.sqrt(ratio)) / (2.0 * math.pi)


def build_weights(h0: np.ndarray, scheme: BeamformerKind, plan: GroupingPlan | None = None):
    """Scheme-dispatching weight construction from aged CSIT."""
    if scheme is BeamformerKind.SUPERIMPOSED_MF:
        return superimposed_mf(h0)
    if scheme is BeamformerKind.TIME_ORTHOGONAL_MF:
        return time_orthogonal_mf(h0)
    if scheme is BeamformerKind.TIME_ORTHOGONAL_MF_RECYCLING:
        return time_orthogonal_mf_recycling(h0)
    if scheme in (BeamformerKind.GSTBC_SUPERIMPOSED, BeamformerKind.GSTBC_TIME_ORTHOGONAL):
        if plan is None:
            raise ValueError("grouped schemes require a GroupingPlan")
        return gstbc_weights(h0, plan, scheme)
    raise ValueError(f"cannot build weights for scheme {scheme}")


def run_power_adaptation(h0: np.ndarray, scheme: BeamformerKind, params: AgingParams,
                         budget: ReliabilityBudget, model, cap: float,
                         plan: GroupingPlan | None = None,
                         bound_tol: float = 1e-6,
                         hardened_min_m: int | None = None) -> PowerDecision:
    """Threshold -> weights -> Chernoff bound -> power, in one call.

    With ``hardened_min_m`` set and M at or above it, the large-array limit
    replaces the per-snapshot bound (valid for superimposed and plain
    time-orthogonal schemes).
    """
    n_rx, m_tx = h0.shape
    isnr_0 = isnr_threshold(model, budget.p_dec)
    weights = build_weights(h0, scheme, plan)
    if (hardened_min_m is not None and m_tx >= hardened_min_m
            and scheme in (BeamformerKind.SUPERIMPOSED_MF, BeamformerKind.TIME_ORTHOGONAL_MF)):
        beta_lb = hardened_limit(scheme, n_rx, params) * m_tx * n_rx
    else:
        beta_lb = chernoff_lower_bound(gain_distribution(h0, weights, params),
                                       budget.p_out, tol=bound_tol).value
    decision = transmit_power(isnr_0, beta_lb, cap)
    if scheme in (BeamformerKind.SUPERIMPOSED_MF, BeamformerKind.TIME_ORTHOGONAL_MF):
        try:
            lag_norm = max_lag(scheme, isnr_0, cap, n_rx)
            lag_cap_s = lag_norm / params.doppler_hz if params.doppler_hz > 0 else math.inf
        except InfeasibleError:
            lag_cap_s = 0.0
        return PowerDecision(gamma=decision.gamma, gamma_db=decision.gamma_db,
                             isnr_0=isnr_0, beta_lb=beta_lb,
                             feasible=decision.feasible, lag_cap_s=lag_cap_s)
    return decision
