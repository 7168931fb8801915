"""Seeded Monte Carlo experiments with machine-readable CSV output.

Every experiment is a pure function of (config, seed): work is split into
fixed-size chunks, chunk i draws from the substream keyed by
(seed, stage, i), and aggregation is chunk-ordered, so results are
byte-identical for any worker count.

CSV schemas (one header row; floats in round-trip repr):

  outage        scheme,bound,target_p_out,trials,failures,p_hat,ci99_upper
  pdf           scheme,bound,velocity_mps,bin_left,bin_right,count,density
  hardening     m_tx,scheme,draws,mean_bound_per_mn,std_bound_per_mn,
                mean_bound_per_m,hardened_limit_per_mn,rel_gap_per_mn
  power-pdec    p_dec,p_out,isnr0_db,power_db_<scheme>...,
                power_db_logavg_<scheme>...,draws
  power-m       m_tx,power_db_<scheme>...[,power_db_gstbc_*_k<K>...],
                limit_db_superimposed_mf,limit_db_time_orthogonal_mf,draws
  recycling     m_tx,velocity_mps,rho_closed_form,asnr_ratio_mc,
                bound_mean_ratio,trials,draws
  bounds-compare scheme,bound,p_out,value,valid,iterations,mean,variance,
                variance_unscaled

A JSON manifest (config echo, seed, git hash, wall time) is written next
to each CSV.
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from scipy.stats import beta as beta_dist

from .beamforming import BeamformerKind, adjacent_grouping, gstbc_weights
from .bounds import (chebyshev_lower_bound, chernoff_lower_bound,
                     chernoff_lower_bound_array, hardened_limit, polynomial_lower_bound)
from .channel import AgingParams, aging_params, make_rng
from .gainstats import gain_distribution, mrc_distribution
from .poweradapt import (NormalApproxThreshold, TableThreshold, build_weights,
                         load_threshold_table)

CHUNK_TRIALS = 50_000
CHUNK_DRAWS = 1_000

# Substream stage tags; chunk rng = make_rng(seed, stage, chunk_index).
STAGE_OUTAGE = 0
STAGE_PDF = 1
STAGE_HARDENING = 2
STAGE_POWER = 3
STAGE_RECYCLING_ASNR = 4
STAGE_RECYCLING_BOUND = 5
STAGE_GROUPING = 6
STAGE_SINGLE_H0 = 7


class ConfigError(ValueError):
    """Malformed or incomplete experiment configuration."""


@dataclass
class ExperimentConfig:
    """Union of the per-experiment knobs: each subcommand validates the
    subset it needs (field names carry units)."""

    n_rx: int = 4
    carrier_hz: float = 3.5e9
    lag_s: float = 5e-4
    seed: int = 0
    schemes: list[str] = field(default_factory=list)
    bounds: list[str] = field(default_factory=lambda: ["chernoff"])
    m_tx: int | None = None
    m_tx_grid: list[int] | None = None
    velocity_mps: float | None = None
    velocity_grid: list[float] | None = None
    p_per: float | None = None
    p_dec: float | None = None
    p_dec_grid: list[float] | None = None
    p_out: float | None = None
    p_out_grid: list[float] | None = None
    trials: int = 100_000
    channel_draws: int = 1_000
    bins: int = 50
    k_groups: list = field(default_factory=list)
    threshold: dict = field(default_factory=dict)
    redraw_h0: bool = True
    workers: int = 1

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**raw)

    def require(self, *names: str) -> None:
        missing = [n for n in names
                   if getattr(self, n) in (None, []) ]
        if missing:
            raise ConfigError(f"missing config field: {', '.join(missing)}")

    def aging(self, velocity_mps: float | None = None) -> AgingParams:
        v = self.velocity_mps if velocity_mps is None else velocity_mps
        return aging_params(v, self.carrier_hz, self.lag_s)

    def threshold_model(self):
        kind = self.threshold.get("kind", "normal_approximation")
        if kind == "normal_approximation":
            return NormalApproxThreshold(
                blocklength_bits=int(self.threshold.get("blocklength_bits", 128)),
                rate=float(self.threshold.get("rate", 0.5)))
        if kind == "table":
            if "path" in self.threshold:
                return load_threshold_table(self.threshold["path"])
            if "points" in self.threshold:
                return TableThreshold(points=tuple(map(tuple, self.threshold["points"])))
            raise ConfigError("missing config field: threshold.path")
        raise ConfigError(f"unknown threshold kind {kind!r}")


def _scheme(name: str) -> BeamformerKind:
    try:
        return BeamformerKind(name)
    except ValueError:
        raise ConfigError(f"unknown scheme {name!r}") from None


# ---------------------------------------------------------------------------
# batched channel/CSIT helpers (shapes: H (draws, N, M))
# ---------------------------------------------------------------------------

def _draw_h0(rng: np.random.Generator, n: int, n_rx: int, m_tx: int) -> np.ndarray:
    z = rng.standard_normal((2, n, n_rx, m_tx))
    return (z[0] + 1j * z[1]) / math.sqrt(2.0)


def _abs2(x: np.ndarray) -> np.ndarray:
    return x.real ** 2 + x.imag ** 2


def _csit_superimposed(h: np.ndarray) -> np.ndarray:
    g = h.sum(axis=1).conj()
    w = g / np.linalg.norm(g, axis=1, keepdims=True)
    return _abs2(np.einsum("tnm,tm->tn", h, w)).sum(axis=1)


def _csit_time_orthogonal(h: np.ndarray) -> np.ndarray:
    return _abs2(h).sum(axis=(1, 2))


def _csit_recycling(h: np.ndarray) -> np.ndarray:
    # ||H W||^2 with W columns conj(h_n)/||h_n||: Gram-based, O(N^2 M).
    gram = np.einsum("tnm,tkm->tnk", h, h.conj())
    row_pow = _abs2(h).sum(axis=2)
    return (_abs2(gram) / row_pow[:, None, :]).sum(axis=(1, 2))


def _csit_gstbc_superimposed(h: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    out = np.zeros(h.shape[0])
    start = 0
    for sz in sizes:
        sub = h[:, :, start:start + sz]
        start += sz
        g = sub.sum(axis=1).conj()
        w = g / np.linalg.norm(g, axis=1, keepdims=True)
        out += _abs2(np.einsum("tnm,tm->tn", sub, w)).sum(axis=1)
    return out


def _csit_for(h: np.ndarray, scheme: BeamformerKind, sizes: np.ndarray | None) -> np.ndarray:
    if scheme is BeamformerKind.SUPERIMPOSED_MF:
        return _csit_superimposed(h)
    if scheme in (BeamformerKind.TIME_ORTHOGONAL_MF, BeamformerKind.GSTBC_TIME_ORTHOGONAL):
        return _csit_time_orthogonal(h)
    if scheme is BeamformerKind.TIME_ORTHOGONAL_MF_RECYCLING:
        return _csit_recycling(h)
    if scheme is BeamformerKind.GSTBC_SUPERIMPOSED:
        return _csit_gstbc_superimposed(h, sizes)
    raise ConfigError(f"no batched CSIT gain for scheme {scheme}")


def _degrees(scheme: BeamformerKind, n_rx: int, k: int | None) -> int:
    if scheme in (BeamformerKind.SUPERIMPOSED_MF, BeamformerKind.TIME_ORTHOGONAL_MF):
        return n_rx
    if scheme is BeamformerKind.TIME_ORTHOGONAL_MF_RECYCLING:
        return n_rx * n_rx
    if scheme in (BeamformerKind.GSTBC_SUPERIMPOSED, BeamformerKind.GSTBC_TIME_ORTHOGONAL):
        return n_rx * k
    raise ConfigError(f"no degree count for scheme {scheme}")


def _bound_array(kind: str, means: np.ndarray, degrees: int, params: AgingParams,
                 p_out: float) -> np.ndarray:
    """Per-draw bound values for an array of distribution means."""
    s2 = params.sigma_omega_sq
    if kind == "chernoff":
        return chernoff_lower_bound_array(means, degrees, s2, p_out)
    if kind == "chebyshev":
        nc = means - degrees * s2
        variance = 2.0 * s2 * nc + degrees * s2 * s2
        return means - np.sqrt(variance / p_out)
    if kind == "polynomial":
        d = float(degrees)
        log_v = ((math.log(p_out) + math.lgamma(d + 1.0)) / d
                 + math.log(s2) + means / (d * s2) - 1.0)
        return np.exp(np.minimum(log_v, 700.0))
    raise ConfigError(f"unknown bound {kind!r}")


def _mrc_bound(kind: str, n_rx: int, p_out: float) -> float:
    dist = mrc_distribution(n_rx)
    fn = {"chernoff": chernoff_lower_bound, "chebyshev": chebyshev_lower_bound,
          "polynomial": polynomial_lower_bound}.get(kind)
    if fn is None:
        raise ConfigError(f"unknown bound {kind!r}")
    return fn(dist, p_out).value


def _map_chunks(fn, payload: tuple, chunks: list[tuple[int, int]], workers: int) -> list:
    """Run fn(payload, chunk_index, chunk_n) over chunks, ordered by index."""
    if workers <= 1:
        return [fn(payload, idx, n) for idx, n in chunks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, payload, idx, n) for idx, n in chunks]
        return [f.result() for f in futures]


def _chunks(total: int, size: int) -> list[tuple[int, int]]:
    return [(i, min(size, total - start))
            for i, start in enumerate(range(0, total, size))]


# ---------------------------------------------------------------------------
# outage
# ---------------------------------------------------------------------------

def _outage_chunk(payload, chunk_index, n):
    (seed, n_rx, m_tx, params, scheme_name, bound_kind, p_out, redraw) = payload
    scheme = BeamformerKind(scheme_name)
    rng = make_rng(seed, STAGE_OUTAGE, chunk_index)
    j0 = params.j0
    sw = math.sqrt(params.sigma_omega_sq)
    if scheme is BeamformerKind.MRC_BASELINE:
        bound = _mrc_bound(bound_kind, n_rx, p_out)
        h_tau = j0 * _draw_h0(rng, n, n_rx, m_tx) + sw * _draw_h0(rng, n, n_rx, m_tx)
        gains = _abs2(h_tau[:, :, 0]).sum(axis=1)
        return int((gains < bound).sum())
    if not redraw:
        h0_rng = make_rng(seed, STAGE_SINGLE_H0)
        h0 = np.broadcast_to(_draw_h0(h0_rng, 1, n_rx, m_tx), (n, n_rx, m_tx))
    else:
        h0 = _draw_h0(rng, n, n_rx, m_tx)
    csit = _csit_for(h0, scheme, None)
    means = params.j0 ** 2 * csit + n_rx * params.sigma_omega_sq
    bounds = _bound_array(bound_kind, means, n_rx, params, p_out)
    h_tau = j0 * h0 + sw * _draw_h0(rng, n, n_rx, m_tx)
    if scheme is BeamformerKind.SUPERIMPOSED_MF:
        g = h0.sum(axis=1).conj()
        w = g / np.linalg.norm(g, axis=1, keepdims=True)
        gains = _abs2(np.einsum("tnm,tm->tn", h_tau, w)).sum(axis=1)
    elif scheme is BeamformerKind.TIME_ORTHOGONAL_MF:
        norms = np.sqrt(_abs2(h0).sum(axis=2))
        gains = _abs2(np.einsum("tnm,tnm->tn", h_tau, h0.conj() / norms[:, :, None])).sum(axis=1)
    else:
        raise ConfigError(f"outage experiment does not support scheme {scheme}")
    return int((gains < bounds).sum())


@dataclass(frozen=True)
class OutageEstimate:
    trials: int
    failures: int
    p_hat: float
    ci99_upper: float
    target: float


def _clopper_pearson_upper(failures: int, trials: int, level: float = 0.99) -> float:
    if failures >= trials:
        return 1.0
    return float(beta_dist.ppf(level, failures + 1, trials - failures))


def estimate_outage(cfg: ExperimentConfig, scheme: str, bound: str, p_out: float,
                    workers: int = 1) -> OutageEstimate:
    """Empirical P(beta_tau < bound) with a fresh snapshot, bound and
    evolution per trial (or a single snapshot with redraw_h0 false)."""
    cfg.require("m_tx", "velocity_mps")
    if p_out * cfg.trials < 10:
        print(f"warning: only {p_out * cfg.trials:.1f} expected failures at "
              f"target {p_out:g}; increase trials", flush=True)
    params = cfg.aging()
    payload = (cfg.seed, cfg.n_rx, cfg.m_tx, params, scheme, bound, p_out, cfg.redraw_h0)
    counts = _map_chunks(_outage_chunk, payload, _chunks(cfg.trials, CHUNK_TRIALS), workers)
    failures = int(sum(counts))
    return OutageEstimate(trials=cfg.trials, failures=failures,
                          p_hat=failures / cfg.trials,
                          ci99_upper=_clopper_pearson_upper(failures, cfg.trials),
                          target=p_out)


def run_outage(cfg: ExperimentConfig, workers: int = 1):
    cfg.require("schemes", "bounds", "p_out_grid", "m_tx", "velocity_mps")
    header = ["scheme", "bound", "target_p_out", "trials", "failures", "p_hat", "ci99_upper"]
    rows = []
    for scheme in cfg.schemes:
        _scheme(scheme)
        for bound in cfg.bounds:
            for p_out in cfg.p_out_grid:
                est = estimate_outage(cfg, scheme, bound, p_out, workers)
                rows.append([scheme, bound, p_out, est.trials, est.failures,
                             est.p_hat, est.ci99_upper])
    return header, rows


# ---------------------------------------------------------------------------
# bound PDFs
# ---------------------------------------------------------------------------

def _means_chunk(payload, chunk_index, n):
    """Distribution means over a fresh snapshot batch (stage-tagged stream)."""
    (seed, stage, n_rx, m_tx, params, scheme_name) = payload
    scheme = BeamformerKind(scheme_name)
    rng = make_rng(seed, stage, chunk_index)
    h0 = _draw_h0(rng, n, n_rx, m_tx)
    csit = _csit_for(h0, scheme, None)
    return params.j0 ** 2 * csit + _degrees(scheme, n_rx, None) * params.sigma_omega_sq


def run_gain_pdf(cfg: ExperimentConfig, workers: int = 1):
    """Histograms of per-snapshot bound values across schemes/velocities."""
    cfg.require("schemes", "bounds", "m_tx", "p_out")
    velocities = cfg.velocity_grid or [cfg.velocity_mps]
    if velocities == [None]:
        raise ConfigError("missing config field: velocity_mps or velocity_grid")
    header = ["scheme", "bound", "velocity_mps", "bin_left", "bin_right", "count", "density"]
    rows = []
    chunks = _chunks(cfg.channel_draws, CHUNK_DRAWS)
    for velocity in velocities:
        params = cfg.aging(velocity)
        for scheme in cfg.schemes:
            kind = _scheme(scheme)
            for bound in cfg.bounds:
                if kind is BeamformerKind.MRC_BASELINE:
                    values = np.full(cfg.channel_draws, _mrc_bound(bound, cfg.n_rx, cfg.p_out))
                else:
                    payload = (cfg.seed, STAGE_PDF, cfg.n_rx, cfg.m_tx, params, scheme)
                    means = np.concatenate(_map_chunks(_means_chunk, payload, chunks, workers))
                    values = _bound_array(bound, means, _degrees(kind, cfg.n_rx, None),
                                          params, cfg.p_out)
                lo, hi = float(values.min()), float(values.max())
                if lo == hi:
                    lo, hi = lo - 0.5, hi + 0.5
                counts, edges = np.histogram(values, bins=cfg.bins, range=(lo, hi))
                width = edges[1] - edges[0]
                for i, c in enumerate(counts):
                    rows.append([scheme, bound, velocity, edges[i], edges[i + 1],
                                 int(c), c / (values.size * width)])
    return header, rows


# ---------------------------------------------------------------------------
# hardening sweep
# ---------------------------------------------------------------------------

def run_hardening(cfg: ExperimentConfig, workers: int = 1):
    cfg.require("schemes", "m_tx_grid", "velocity_mps", "p_out")
    params = cfg.aging()
    header = ["m_tx", "scheme", "draws", "mean_bound_per_mn", "std_bound_per_mn",
              "mean_bound_per_m", "hardened_limit_per_mn", "rel_gap_per_mn"]
    rows = []
    chunks = _chunks(cfg.channel_draws, CHUNK_DRAWS)
    for m_tx in cfg.m_tx_grid:
        for scheme in cfg.schemes:
            kind = _scheme(scheme)
            payload = (cfg.seed, STAGE_HARDENING, cfg.n_rx, m_tx, params, scheme)
            means = np.concatenate(_map_chunks(_means_chunk, payload, chunks, workers))
            values = chernoff_lower_bound_array(means, _degrees(kind, cfg.n_rx, None),
                                                params.sigma_omega_sq, cfg.p_out)
            per_mn = values / (m_tx * cfg.n_rx)
            limit = hardened_limit(kind, cfg.n_rx, params)
            mean_per_mn = float(per_mn.mean())
            rows.append([m_tx, scheme, values.size, mean_per_mn, float(per_mn.std()),
                         float(values.mean() / m_tx), limit,
                         abs(mean_per_mn - limit) / limit])
    return header, rows


# ---------------------------------------------------------------------------
# power sweeps
# ---------------------------------------------------------------------------

def _power_csit_chunk(payload, chunk_index, n):
    (seed, n_rx, m_tx, scheme_name, sizes) = payload
    rng = make_rng(seed, STAGE_POWER, chunk_index)
    h0 = _draw_h0(rng, n, n_rx, m_tx)
    return _csit_for(h0, BeamformerKind(scheme_name), sizes)


def _avg_power_db(isnr0: float, bounds: np.ndarray, normalizer: float) -> tuple[float, float]:
    """(dB of mean linear power, mean of per-draw dB); bound normalized by
    the total antenna product so power stays comparable across M."""
    gamma = isnr0 * normalizer / bounds
    return 10.0 * math.log10(float(gamma.mean())), float(10.0 * np.log10(gamma).mean())


def run_power_vs_pdec(cfg: ExperimentConfig, workers: int = 1):
    cfg.require("schemes", "m_tx", "velocity_mps", "p_per", "p_dec_grid")
    params = cfg.aging()
    model = cfg.threshold_model()
    chunks = _chunks(cfg.channel_draws, CHUNK_DRAWS)
    csit = {}
    for scheme in cfg.schemes:
        _scheme(scheme)
        payload = (cfg.seed, cfg.n_rx, cfg.m_tx, scheme, None)
        csit[scheme] = np.concatenate(_map_chunks(_power_csit_chunk, payload, chunks, workers))
    header = (["p_dec", "p_out", "isnr0_db"]
              + [f"power_db_{s}" for s in cfg.schemes]
              + [f"power_db_logavg_{s}" for s in cfg.schemes]
              + ["draws"])
    rows = []
    normalizer = cfg.m_tx * cfg.n_rx
    for p_dec in cfg.p_dec_grid:
        p_out = cfg.p_per - p_dec
        if p_out <= 0:
            raise ConfigError(f"p_dec {p_dec!r} leaves no outage budget under p_per {cfg.p_per!r}")
        isnr0 = model.isnr_for(p_dec)
        lin, logavg = {}, {}
        for scheme in cfg.schemes:
            kind = _scheme(scheme)
            means = params.j0 ** 2 * csit[scheme] + _degrees(kind, cfg.n_rx, None) * params.sigma_omega_sq
            values = chernoff_lower_bound_array(means, _degrees(kind, cfg.n_rx, None),
                                                params.sigma_omega_sq, p_out)
            lin[scheme], logavg[scheme] = _avg_power_db(isnr0, values, normalizer)
        rows.append([p_dec, p_out, 10.0 * math.log10(isnr0)]
                    + [lin[s] for s in cfg.schemes]
                    + [logavg[s] for s in cfg.schemes]
                    + [cfg.channel_draws])
    return header, rows


def _power_series_names(cfg: ExperimentConfig) -> list[str]:
    names = []
    for scheme in cfg.schemes:
        kind = _scheme(scheme)
        if kind in (BeamformerKind.GSTBC_SUPERIMPOSED, BeamformerKind.GSTBC_TIME_ORTHOGONAL):
            for k in cfg.k_groups:
                names.append(f"{scheme}_k{k}")
        elif kind is BeamformerKind.MRC_BASELINE:
            for bound in cfg.bounds:
                names.append(f"{scheme}_{bound}")
        else:
            names.append(scheme)
    return names


def run_power_vs_m(cfg: ExperimentConfig, workers: int = 1):
    cfg.require("schemes", "m_tx_grid", "velocity_mps", "p_per", "p_dec")
    params = cfg.aging()
    model = cfg.threshold_model()
    isnr0 = model.isnr_for(cfg.p_dec)
    p_out = cfg.p_per - cfg.p_dec
    if p_out <= 0:
        raise ConfigError("p_dec leaves no outage budget under p_per")
    series = _power_series_names(cfg)
    header = (["m_tx"] + [f"power_db_{name}" for name in series]
              + ["limit_db_superimposed_mf", "limit_db_time_orthogonal_mf", "draws"])
    chunks = _chunks(cfg.channel_draws, CHUNK_DRAWS)
    rows = []
    for m_tx in cfg.m_tx_grid:
        values_by_name = {}
        for scheme in cfg.schemes:
            kind = _scheme(scheme)
            if kind is BeamformerKind.MRC_BASELINE:
                for bound in cfg.bounds:
                    b = _mrc_bound(bound, cfg.n_rx, p_out)
                    gamma = isnr0 * cfg.n_rx / b if b > 0 else math.inf
                    values_by_name[f"{scheme}_{bound}"] = 10.0 * math.log10(gamma)
                continue
            if kind in (BeamformerKind.GSTBC_SUPERIMPOSED, BeamformerKind.GSTBC_TIME_ORTHOGONAL):
                for k_spec in cfg.k_groups:
                    k = m_tx if k_spec == "M" else int(k_spec)
                    plan_rng = make_rng(cfg.seed, STAGE_GROUPING, m_tx, k)
                    sizes = np.asarray(adjacent_grouping(m_tx, k, plan_rng).sizes)
                    payload = (cfg.seed, cfg.n_rx, m_tx, scheme, sizes)
                    csit = np.concatenate(_map_chunks(_power_csit_chunk, payload, chunks, workers))
                    d = _degrees(kind, cfg.n_rx, k)
                    means = params.j0 ** 2 * csit + d * params.sigma_omega_sq
                    bounds = chernoff_lower_bound_array(means, d, params.sigma_omega_sq, p_out)
                    db, _ = _avg_power_db(isnr0, bounds, m_tx * cfg.n_rx)
                    values_by_name[f"{scheme}_k{k_spec}"] = db
                continue
            payload = (cfg.seed, cfg.n_rx, m_tx, scheme, None)
            csit = np.concatenate(_map_chunks(_power_csit_chunk, payload, chunks, workers))
            d = _degrees(kind, cfg.n_rx, None)
            means = params.j0 ** 2 * csit + d * params.sigma_omega_sq
            bounds = chernoff_lower_bound_array(means, d, params.sigma_omega_sq, p_out)
            db, _ = _avg_power_db(isnr0, bounds, m_tx * cfg.n_rx)
            values_by_name[scheme] = db
        limits = [10.0 * math.log10(isnr0 / hardened_limit(BeamformerKind.SUPERIMPOSED_MF,
                                                           cfg.n_rx, params)),
                  10.0 * math.log10(isnr0 / hardened_limit(BeamformerKind.TIME_ORTHOGONAL_MF,
                                                           cfg.n_rx, params))]
        rows.append([m_tx] + [values_by_name[name] for name in series]
                    + limits + [cfg.channel_draws])
    return header, rows


# ---------------------------------------------------------------------------
# energy recycling
# ---------------------------------------------------------------------------

def _recycling_asnr_chunk(payload, chunk_index, n):
    (seed, n_rx, m_tx, params) = payload
    rng = make_rng(seed, STAGE_RECYCLING_ASNR, chunk_index)
    h0 = _draw_h0(rng, n, n_rx, m_tx)
    norms = np.sqrt(_abs2(h0).sum(axis=2))
    w_rows = h0.conj() / norms[:, :, None]
    omega = math.sqrt(params.sigma_omega_sq) * _draw_h0(rng, n, n_rx, m_tx)
    h_tau = params.j0 * h0 + omega
    proj = np.einsum("tnm,tkm->tnk", h_tau, w_rows)
    full = _abs2(proj).sum(axis=(1, 2))
    diag = _abs2(np.einsum("tnm,tnm->tn", h_tau, w_rows)).sum(axis=1)
    return float(full.sum()), float(diag.sum())


def _recycling_bound_chunk(payload, chunk_index, n):
    (seed, n_rx, m_tx, params, p_out) = payload
    rng = make_rng(seed, STAGE_RECYCLING_BOUND, chunk_index)
    h0 = _draw_h0(rng, n, n_rx, m_tx)
    csit_plain = _csit_time_orthogonal(h0)
    csit_rec = _csit_recycling(h0)
    s2 = params.sigma_omega_sq
    b_plain = chernoff_lower_bound_array(params.j0 ** 2 * csit_plain + n_rx * s2,
                                         n_rx, s2, p_out)
    b_rec = chernoff_lower_bound_array(params.j0 ** 2 * csit_rec + n_rx * n_rx * s2,
                                       n_rx * n_rx, s2, p_out)
    return float(b_rec.sum()), float(b_plain.sum())


def run_recycling(cfg: ExperimentConfig, workers: int = 1):
    """Energy-recycling gain ratios: closed form
    rho = 1 + (N-1)/(M j0^2 + s2), Monte Carlo aSNR ratio, and the ratio of
    mean Chernoff bounds with/without recycling."""
    cfg.require("m_tx_grid", "p_out")
    velocities = cfg.velocity_grid or [cfg.velocity_mps]
    if velocities == [None]:
        raise ConfigError("missing config field: velocity_mps or velocity_grid")
    header = ["m_tx", "velocity_mps", "rho_closed_form", "asnr_ratio_mc",
              "bound_mean_ratio", "trials", "draws"]
    rows = []
    for velocity in velocities:
        params = cfg.aging(velocity)
        for m_tx in cfg.m_tx_grid:
            rho = 1.0 + (cfg.n_rx - 1) / (m_tx * params.j0 ** 2 + params.sigma_omega_sq)
            payload = (cfg.seed, cfg.n_rx, m_tx, params)
            parts = _map_chunks(_recycling_asnr_chunk, payload,
                                _chunks(cfg.trials, CHUNK_TRIALS // 5), workers)
            full = sum(p[0] for p in parts)
            diag = sum(p[1] for p in parts)
            payload_b = (cfg.seed, cfg.n_rx, m_tx, params, cfg.p_out)
            parts_b = _map_chunks(_recycling_bound_chunk, payload_b,
                                  _chunks(cfg.channel_draws, CHUNK_DRAWS), workers)
            rec = sum(p[0] for p in parts_b)
            plain = sum(p[1] for p in parts_b)
            rows.append([m_tx, velocity, rho, full / diag, rec / plain,
                         cfg.trials, cfg.channel_draws])
    return header, rows


# ---------------------------------------------------------------------------
# bound comparison table
# ---------------------------------------------------------------------------

def run_bounds_compare(cfg: ExperimentConfig, workers: int = 1):
    """One snapshot per config seed; every (scheme, bound) pair on one row."""
    cfg.require("schemes", "bounds", "m_tx", "velocity_mps", "p_out")
    params = cfg.aging()
    rng = make_rng(cfg.seed, STAGE_SINGLE_H0)
    h0 = _draw_h0(rng, 1, cfg.n_rx, cfg.m_tx)[0]
    header = ["scheme", "bound", "p_out", "value", "valid", "iterations",
              "mean", "variance", "variance_unscaled"]
    fns = {"chernoff": chernoff_lower_bound, "chebyshev": chebyshev_lower_bound,
           "polynomial": polynomial_lower_bound}
    rows = []
    for scheme in cfg.schemes:
        kind = _scheme(scheme)
        if kind is BeamformerKind.MRC_BASELINE:
            dist = mrc_distribution(cfg.n_rx)
        else:
            plan = None
            if kind in (BeamformerKind.GSTBC_SUPERIMPOSED, BeamformerKind.GSTBC_TIME_ORTHOGONAL):
                k = int(cfg.k_groups[0]) if cfg.k_groups else 1
                plan = adjacent_grouping(cfg.m_tx, k, make_rng(cfg.seed, STAGE_GROUPING, cfg.m_tx, k))
                weights = gstbc_weights(h0, plan, kind)
            else:
                weights = build_weights(h0, kind)
            dist = gain_distribution(h0, weights, params)
        for bound in cfg.bounds:
            fn = fns.get(bound)
            if fn is None:
                raise ConfigError(f"unknown bound {bound!r}")
            res = fn(dist, cfg.p_out)
            rows.append([scheme, bound, cfg.p_out, res.value, res.valid, res.iterations,
                         dist.mean, dist.variance, dist.variance_unscaled])
    return header, rows


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _git_hash() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"],
                             stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
                             check=False, text=True).stdout.strip()
        return out or "nogit"
    except OSError:
        return "nogit"


def write_manifest(path, subcommand: str, cfg: ExperimentConfig, wall_time_s: float,
                   n_rows: int) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": asdict(cfg),
        "seed": cfg.seed,
        "git_hash": _git_hash(),
        "wall_time_s": wall_time_s,
        "rows": n_rows,
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


RUNNERS = {
    "outage": run_outage,
    "pdf": run_gain_pdf,
    "hardening": run_hardening,
    "power-pdec": run_power_vs_pdec,
    "power-m": run_power_vs_m,
    "recycling": run_recycling,
    "bounds-compare": run_bounds_compare,
}


def run_experiment(subcommand: str, cfg: ExperimentConfig, out_csv, workers: int = 1) -> int:
    """Run one experiment and write CSV + manifest; returns the row count."""
    runner = RUNNERS[subcommand]
    start = time.monotonic()
    header, rows = runner(cfg, workers=workers)
    write_csv(out_csv, header, rows)
    write_manifest(Path(out_csv).with_suffix(".manifest.json"), subcommand, cfg,
                   time.monotonic() - start, len(rows))
    return len(rows)
