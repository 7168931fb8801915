"""Transmit beamforming schemes and realized gain evaluation.

All schemes build weights from the aged snapshot ``h0`` and are later
scored against the true evolved channel ``h_tau``; the gain is the channel
power seen by the receive combiner, ``beta = gain(h_tau, weights)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import DegenerateChannelError


class BeamformerKind(Enum):
    SVD_SINGLE_STREAM = "svd_single_stream"
    SUPERIMPOSED_MF = "superimposed_mf"
    TIME_ORTHOGONAL_MF = "time_orthogonal_mf"
    TIME_ORTHOGONAL_MF_RECYCLING = "time_orthogonal_mf_recycling"
    MRC_BASELINE = "mrc_baseline"
    GSTBC_SUPERIMPOSED = "gstbc_superimposed"
    GSTBC_TIME_ORTHOGONAL = "gstbc_time_orthogonal"


#: Kinds built by per-group matched filtering over a GroupingPlan.
GSTBC_KINDS = (BeamformerKind.GSTBC_SUPERIMPOSED, BeamformerKind.GSTBC_TIME_ORTHOGONAL)


@dataclass(frozen=True)
class GroupingPlan:
    """Partition of the transmit antennas {0..M-1} into K groups.

    Group sizes differ by at most one (floor(M/K) or ceil(M/K)).
    """

    k_groups: int
    assignment: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.k_groups < 1 or len(self.assignment) != self.k_groups:
            raise ValueError("assignment must have exactly k_groups groups")
        flat = [i for grp in self.assignment for i in grp]
        m = len(flat)
        if sorted(flat) != list(range(m)):
            raise ValueError("groups must partition the antenna index set")
        sizes = self.sizes
        if max(sizes) - min(sizes) > 1:
            raise ValueError("group sizes may differ by at most one")

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(grp) for grp in self.assignment)

    @property
    def m_tx(self) -> int:
        return sum(self.sizes)


@dataclass(frozen=True)
class TxWeights:
    """Beamforming weight vectors for one scheme.

    ``vectors`` has shape (L, M) with every row unit-norm:
      superimposed          L = 1
      time-orthogonal (+/- recycling)  L = N, row n beams at rx antenna n
      G-STBC superimposed   L = K, row k zero outside group k
      G-STBC time-orthogonal L = N*K, row n*K + k for (rx n, group k)
    """

    kind: BeamformerKind
    vectors: np.ndarray
    grouping: GroupingPlan | None = None

    def __post_init__(self):
        v = self.vectors
        if v.ndim != 2:
            raise ValueError("vectors must be a 2-D (L, M) array")
        norms = np.linalg.norm(v, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("every weight vector must be unit-norm")
        if v.flags.writeable:
            v.flags.writeable = False

    @property
    def m_tx(self) -> int:
        return self.vectors.shape[1]


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0 or not np.isfinite(n):
        raise DegenerateChannelError("cannot normalize a zero weight vector")
    return v / n


def svd_single_stream(h0: np.ndarray) -> tuple[np.ndarray, float]:
    """Single-stream SVD beamformer.

    Returns the transmit vector (sum of the N right singular vectors,
    divided by N) and the predicted iSNR coefficient (sum of singular
    values)^2 / N at unit transmit power.
    """
    n_rx = h0.shape[0]
    _, s, vh = np.linalg.svd(h0, full_matrices=False)
    if s[-1] <= 1e-10 * s[0]:
        raise DegenerateChannelError("rank-deficient channel for SVD beamforming")
    w = vh.conj().T.sum(axis=1) / n_rx
    coeff = float(s.sum()) ** 2 / n_rx
    return w, coeff


def superimposed_mf(h0: np.ndarray) -> TxWeights:
    """Single matched-filter vector from the conjugated row sum of h0."""
    g = h0.sum(axis=0).conj()
    return TxWeights(BeamformerKind.SUPERIMPOSED_MF, _unit(g)[None, :])


def _per_row_mf(h0: np.ndarray) -> np.ndarray:
    rows = np.empty_like(h0)
    for n in range(h0.shape[0]):
        rows[n] = _unit(h0[n].conj())
    return rows


def time_orthogonal_mf(h0: np.ndarray) -> TxWeights:
    """One matched-filter vector per rx antenna, sent in N orthogonal slots."""
    return TxWeights(BeamformerKind.TIME_ORTHOGONAL_MF, _per_row_mf(h0))


def time_orthogonal_mf_recycling(h0: np.ndarray) -> TxWeights:
    """Time-orthogonal weights with full rx combining of the leaked energy.

    Same vectors as `time_orthogonal_mf`; the kind switches the gain to the
    full N x N combine ||H_tau W||^2.
    """
    return TxWeights(BeamformerKind.TIME_ORTHOGONAL_MF_RECYCLING, _per_row_mf(h0))


def adjacent_grouping(m_tx: int, k_groups: int, rng: np.random.Generator) -> GroupingPlan:
    """Contiguous antenna blocks of size floor(M/K); when K does not divide M,
    the M - K*floor(M/K) groups receiving one extra antenna are picked at
    random."""
    if not 1 <= k_groups <= m_tx:
        raise ValueError(f"k_groups must be in [1, {m_tx}], got {k_groups}")
    base, extra = divmod(m_tx, k_groups)
    sizes = np.full(k_groups, base, dtype=int)
    if extra:
        sizes[rng.permutation(k_groups)[:extra]] += 1
    bounds = np.concatenate(([0], np.cumsum(sizes)))
    assignment = tuple(
        tuple(range(bounds[k], bounds[k + 1])) for k in range(k_groups)
    )
    return GroupingPlan(k_groups=k_groups, assignment=assignment)


def gstbc_weights(h0: np.ndarray, plan: GroupingPlan, kind: BeamformerKind) -> TxWeights:
    """Per-group matched-filter vectors, zero-padded outside each group.

    Superimposed: one vector per group from the group's conjugated row sum.
    Time-orthogonal: one vector per (rx antenna, group) pair.
    """
    if kind not in GSTBC_KINDS:
        raise ValueError(f"kind must be a G-STBC kind, got {kind}")
    n_rx, m_tx = h0.shape
    if plan.m_tx != m_tx:
        raise ValueError("grouping plan does not match the channel width")
    k = plan.k_groups
    if kind is BeamformerKind.GSTBC_SUPERIMPOSED:
        vectors = np.zeros((k, m_tx), dtype=h0.dtype)
        for gi, idx in enumerate(plan.assignment):
            cols = np.asarray(idx)
            # C-contiguous copy keeps the row-sum reduction order identical to
            # the ungrouped path, so K=1 reproduces it bit-for-bit
            sub = np.ascontiguousarray(h0[:, cols])
            vectors[gi, cols] = _unit(sub.sum(axis=0).conj())
    else:
        vectors = np.zeros((n_rx * k, m_tx), dtype=h0.dtype)
        for n in range(n_rx):
            for gi, idx in enumerate(plan.assignment):
                cols = np.asarray(idx)
                vectors[n * k + gi, cols] = _unit(h0[n, cols].conj())
    return TxWeights(kind, vectors, grouping=plan)


def _columnwise_projection(h: np.ndarray, weights: TxWeights) -> np.ndarray:
    # (N, L) matrix of h_n^T w_l; zero padding confines each column to its group.
    return h @ weights.vectors.T


def _per_row_projection(h: np.ndarray, weights: TxWeights, k: int) -> np.ndarray:
    # (N, K) matrix of h_n^T w_{n,k} for row-indexed weight banks.
    n_rx = h.shape[0]
    vecs = weights.vectors.reshape(n_rx, k, -1)
    return np.einsum("nm,nkm->nk", h, vecs)


def equivalent_channel(h: np.ndarray, weights: TxWeights) -> np.ndarray:
    """(N, K) equivalent channel of a grouped scheme: entry (n, k) is the inner
    product of rx row n (restricted to group k by the zero padding) with that
    group's weight vector."""
    if weights.kind not in GSTBC_KINDS:
        raise ValueError(f"equivalent_channel requires a G-STBC kind, got {weights.kind}")
    if h.shape[1] != weights.m_tx:
        raise ValueError("channel and weights have mismatched antenna counts")
    if weights.kind is BeamformerKind.GSTBC_SUPERIMPOSED:
        return _columnwise_projection(h, weights)
    return _per_row_projection(h, weights, weights.grouping.k_groups)


def realized_gain(h_tau: np.ndarray, weights: TxWeights) -> float:
    """Beamforming gain beta of a scheme against the (possibly evolved) channel.

    superimposed                ||H w||^2
    time-orthogonal             sum_n |h_n^T w_n|^2
    time-orthogonal + recycling ||H W||^2 (Frobenius, W = [w_0 .. w_{N-1}])
    G-STBC                      ||equivalent channel||^2
    """
    if h_tau.shape[1] != weights.m_tx:
        raise ValueError("channel and weights have mismatched antenna counts")
    kind = weights.kind
    if kind in (BeamformerKind.SUPERIMPOSED_MF, BeamformerKind.GSTBC_SUPERIMPOSED,
                BeamformerKind.TIME_ORTHOGONAL_MF_RECYCLING):
        proj = _columnwise_projection(h_tau, weights)
    elif kind is BeamformerKind.TIME_ORTHOGONAL_MF:
        proj = _per_row_projection(h_tau, weights, 1)
    elif kind is BeamformerKind.GSTBC_TIME_ORTHOGONAL:
        proj = _per_row_projection(h_tau, weights, weights.grouping.k_groups)
    else:
        raise ValueError(f"realized_gain does not support kind {kind}")
    return float((proj.real ** 2 + proj.imag ** 2).sum())


def mrc_baseline_gain(h_tau: np.ndarray, tx_antenna: int) -> float:
    """Single-tx-antenna baseline with rx maximum-ratio combining:
    gain = ||column tx_antenna of H_tau||^2."""
    if not 0 <= tx_antenna < h_tau.shape[1]:
        raise ValueError(f"tx_antenna {tx_antenna} out of range for M={h_tau.shape[1]}")
    col = h_tau[:, tx_antenna]
    return float((col.real ** 2 + col.imag ** 2).sum())
