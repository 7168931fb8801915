import math

import numpy as np
import pytest

from agedmimo import (AgingParams, BeamformerKind, BoundKind, GainDistribution,
                      adjacent_grouping, aging_params, chebyshev_lower_bound,
                      chernoff_lower_bound, chernoff_lower_bound_array,
                      gain_distribution, gstbc_weights, hardened_limit, make_rng,
                      mrc_distribution, polynomial_lower_bound, sample_initial_channel,
                      superimposed_mf, time_orthogonal_mf)
from helpers import V15_J0, draw_snapshots

V15 = aging_params(15.0, 3.5e9, 5e-4)

ANCHOR = GainDistribution(mean=2.0, variance=1.75, variance_unscaled=7.0,
                          degrees=1, sigma_omega_sq=0.5, noncentrality=1.5)


def rand_h(seed, n_rx, m_tx):
    return sample_initial_channel(m_tx, n_rx, make_rng(seed))


def dist_for(seed, n_rx, m_tx, scheme=superimposed_mf, params=V15):
    h = rand_h(seed, n_rx, m_tx)
    return gain_distribution(h, scheme(h), params)


class TestChernoff:
    def test_inverts_worked_mgf_example(self):
        res = chernoff_lower_bound(ANCHOR, 2.0 / 3.0, tol=1e-8)
        assert res.value == pytest.approx(1.0, rel=1e-6)
        assert res.valid and res.kind is BoundKind.CHERNOFF

    def test_upper_edge(self):
        res = chernoff_lower_bound(ANCHOR, 1.0 - 1e-9, tol=1e-12)
        assert res.value > 0.9999 * ANCHOR.mean
        assert res.value < ANCHOR.mean

    def test_monotone_in_p_out(self):
        d = dist_for(0, 4, 50)
        values = [chernoff_lower_bound(d, p).value for p in (1e-6, 1e-4, 1e-2, 0.3)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_deterministic_gain_shortcut(self):
        d = dist_for(1, 4, 30, params=aging_params(0.0, 3.5e9, 5e-4))
        res = chernoff_lower_bound(d, 1e-6)
        assert res.value == d.mean and res.valid and res.iterations == 0

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            chernoff_lower_bound(ANCHOR, 0.0)
        with pytest.raises(ValueError):
            chernoff_lower_bound(ANCHOR, 1e-3, tol=0.0)

    def test_bit_identical_reruns(self):
        d = dist_for(2, 4, 100)
        a = chernoff_lower_bound(d, 2e-6)
        b = chernoff_lower_bound(d, 2e-6)
        assert a == b

    def test_array_version_agrees_with_scalar(self):
        dists = [dist_for(10 + i, 4, 64) for i in range(20)]
        means = np.array([d.mean for d in dists])
        arr = chernoff_lower_bound_array(means, 4, V15.sigma_omega_sq, 2e-6)
        for d, v in zip(dists, arr):
            assert v == pytest.approx(chernoff_lower_bound(d, 2e-6, tol=1e-10).value,
                                      rel=1e-8)

    def test_outage_validity_at_relaxed_target(self):
        # empirical quantile check at desk-scale p_out
        h = rand_h(3, 4, 10)
        w = superimposed_mf(h)
        d = gain_distribution(h, w, V15)
        p_out = 1e-2
        bound = chernoff_lower_bound(d, p_out).value
        rng = np.random.default_rng(42)
        wv = w.vectors[0]
        h_tau = (V15.j0 * np.asarray(h)[None]
                 + math.sqrt(V15.sigma_omega_sq) * draw_snapshots(rng, 200_000, 4, 10))
        gains = (np.abs(np.einsum("tnm,m->tn", h_tau, wv)) ** 2).sum(axis=1)
        p_hat = float((gains < bound).mean())
        assert p_hat <= p_out + 3 * math.sqrt(p_out / gains.size)

    def test_mrc_distribution_supported(self):
        res = chernoff_lower_bound(mrc_distribution(4), 2e-6)
        assert 0 < res.value < 4.0 and res.valid


class TestOrderings:
    def test_time_orthogonal_dominates_superimposed(self):
        for seed in range(100):
            h = rand_h(100 + seed, 4, 32)
            b_s = chernoff_lower_bound(gain_distribution(h, superimposed_mf(h), V15), 2e-6)
            b_to = chernoff_lower_bound(gain_distribution(h, time_orthogonal_mf(h), V15), 2e-6)
            assert b_to.value >= b_s.value

    def test_grouped_bound_grows_with_group_count(self):
        for seed in range(20):
            h = rand_h(200 + seed, 4, 32)
            prev = -math.inf
            for k in (1, 2, 4, 8):
                plan = adjacent_grouping(32, k, make_rng(seed, k))
                w = gstbc_weights(h, plan, BeamformerKind.GSTBC_TIME_ORTHOGONAL)
                val = chernoff_lower_bound(gain_distribution(h, w, V15), 2e-6).value
                assert val > prev
                prev = val


class TestChebyshev:
    def test_zero_value_flagged_invalid(self):
        s2 = 10.0 - math.sqrt(99.0)
        d = GainDistribution(mean=10.0, variance=1.0,
                             variance_unscaled=4 * math.sqrt(99.0) + 2 * s2,
                             degrees=1, sigma_omega_sq=s2,
                             noncentrality=math.sqrt(99.0))
        res = chebyshev_lower_bound(d, 0.01)
        assert res.value == pytest.approx(0.0, abs=1e-9)
        assert not res.valid

    def test_arithmetic(self):
        s2 = 10.0 - math.sqrt(99.0)
        d = GainDistribution(mean=10.0, variance=1.0,
                             variance_unscaled=4 * math.sqrt(99.0) + 2 * s2,
                             degrees=1, sigma_omega_sq=s2,
                             noncentrality=math.sqrt(99.0))
        res = chebyshev_lower_bound(d, 0.25)
        assert res.value == pytest.approx(8.0, rel=1e-12)
        assert res.valid

    def test_negative_in_low_outage_regime(self):
        d = dist_for(4, 4, 100)
        res = chebyshev_lower_bound(d, 2e-6)
        assert res.value < 0.0 and not res.valid


class TestPolynomial:
    def test_unit_scale_anchor(self):
        res = polynomial_lower_bound(mrc_distribution(1), 0.01)
        assert res.value == pytest.approx(0.01, rel=1e-12)

    def test_blows_up_in_concentrated_regime(self):
        d = dist_for(5, 4, 10, scheme=time_orthogonal_mf)
        res = polynomial_lower_bound(d, 5e-6)
        assert res.value >= 1e10
        assert not res.valid

    def test_monotone_in_p_out(self):
        d = dist_for(6, 4, 10)
        vals = [polynomial_lower_bound(d, p).value for p in (1e-6, 1e-4, 1e-2)]
        assert vals[0] < vals[1] < vals[2]


class TestHardenedLimit:
    def test_static_user(self):
        frozen = aging_params(0.0, 3.5e9, 5e-4)
        assert hardened_limit(BeamformerKind.TIME_ORTHOGONAL_MF, 4, frozen) == 1.0
        assert hardened_limit(BeamformerKind.SUPERIMPOSED_MF, 4, frozen) == 0.25

    def test_vehicular_values(self):
        assert hardened_limit(BeamformerKind.TIME_ORTHOGONAL_MF, 4, V15) == pytest.approx(
            V15_J0 ** 2, rel=1e-12)
        assert hardened_limit(BeamformerKind.SUPERIMPOSED_MF, 4, V15) == pytest.approx(
            V15_J0 ** 2 / 4, rel=1e-12)

    def test_unsupported_scheme(self):
        with pytest.raises(ValueError):
            hardened_limit(BeamformerKind.MRC_BASELINE, 4, V15)

    def test_normalized_bound_approaches_limit_monotonically(self):
        rng = np.random.default_rng(7)
        limit = hardened_limit(BeamformerKind.TIME_ORTHOGONAL_MF, 4, V15)
        gaps = []
        for m in (20, 50, 100, 200, 500):
            h = draw_snapshots(rng, 100, 4, m)
            csit = (np.abs(h) ** 2).sum(axis=(1, 2))
            means = V15.j0 ** 2 * csit + 4 * V15.sigma_omega_sq
            vals = chernoff_lower_bound_array(means, 4, V15.sigma_omega_sq, 2e-6)
            gaps.append(abs(float(vals.mean()) / (m * 4) - limit))
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
