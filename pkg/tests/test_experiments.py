import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.special import gammainc

from agedmimo.channel import SPEED_OF_LIGHT
from agedmimo.experiments import (ConfigError, ExperimentConfig, RUNNERS,
                                  estimate_outage, run_experiment)
from helpers import J0_FIRST_ROOT

BASE = dict(n_rx=4, carrier_hz=3.5e9, lag_s=5e-4, seed=11)


def small_outage_cfg(**kw):
    d = dict(BASE, m_tx=10, velocity_mps=15.0, schemes=["superimposed_mf"],
             bounds=["chernoff"], p_out_grid=[1e-2], trials=30_000)
    d.update(kw)
    return ExperimentConfig(**d)


class TestEstimators:
    def test_outage_conservative(self):
        est = estimate_outage(small_outage_cfg(trials=100_000), "superimposed_mf",
                              "chernoff", 1e-2)
        assert est.p_hat <= 1e-2 + 3 * math.sqrt(1e-2 / est.trials)
        assert est.ci99_upper >= est.p_hat

    def test_polynomial_bound_always_fails(self):
        est = estimate_outage(small_outage_cfg(schemes=["time_orthogonal_mf"]),
                              "time_orthogonal_mf", "polynomial", 1e-2)
        assert est.p_hat == 1.0

    def test_sanity_against_analytic_central_tail(self):
        # velocity at the first correlation zero: gain is (almost exactly) a
        # central complex chi-square, whose CDF is the regularized gamma
        velocity = J0_FIRST_ROOT * SPEED_OF_LIGHT / (2 * math.pi * 3.5e9 * 5e-4)
        cfg = small_outage_cfg(velocity_mps=velocity, trials=400_000)
        p_out = 5e-3
        est = estimate_outage(cfg, "superimposed_mf", "chernoff", p_out)
        from agedmimo import chernoff_lower_bound, mrc_distribution
        bound = chernoff_lower_bound(mrc_distribution(4), p_out).value
        analytic = float(gammainc(4, bound))
        se = math.sqrt(analytic * (1 - analytic) / est.trials)
        assert est.p_hat == pytest.approx(analytic, abs=4 * se)

    def test_low_count_warning(self, capsys):
        estimate_outage(small_outage_cfg(trials=100), "superimposed_mf", "chernoff", 1e-2)
        assert "increase trials" in capsys.readouterr().out

    def test_zero_failures_for_static_user(self):
        est = estimate_outage(small_outage_cfg(velocity_mps=0.0, trials=20_000),
                              "superimposed_mf", "chernoff", 1e-2)
        assert est.failures == 0

    def test_pdf_bound_orderings(self):
        cfg = ExperimentConfig(**dict(
            BASE, m_tx=100, velocity_grid=[5.0, 15.0], p_out=5e-6, channel_draws=800,
            bins=40, schemes=["superimposed_mf", "time_orthogonal_mf"],
            bounds=["chernoff", "chebyshev"]))
        header, rows = RUNNERS["pdf"](cfg, workers=1)
        idx = {name: header.index(name) for name in header}

        def series_mean(scheme, bound, velocity):
            mids, weights = [], []
            for r in rows:
                if (r[idx["scheme"]], r[idx["bound"]], r[idx["velocity_mps"]]) == \
                        (scheme, bound, velocity):
                    mids.append(0.5 * (r[idx["bin_left"]] + r[idx["bin_right"]]))
                    weights.append(r[idx["count"]])
            return float(np.average(mids, weights=weights))

        # faster aging pushes the bound left; per-antenna beams beat the shared one
        assert series_mean("superimposed_mf", "chernoff", 15.0) < \
            series_mean("superimposed_mf", "chernoff", 5.0)
        assert series_mean("time_orthogonal_mf", "chernoff", 15.0) > \
            series_mean("superimposed_mf", "chernoff", 15.0)
        cheb_right_edges = [r[idx["bin_right"]] for r in rows
                            if r[idx["bound"]] == "chebyshev"]
        assert max(cheb_right_edges) < 0.0

    def test_hardening_spread_shrinks_with_m(self):
        cfg = ExperimentConfig(**dict(
            BASE, m_tx_grid=[20, 80, 320], velocity_mps=15.0, p_out=5e-6,
            channel_draws=400, schemes=["time_orthogonal_mf"]))
        header, rows = RUNNERS["hardening"](cfg, workers=1)
        mean_i = header.index("mean_bound_per_mn")
        std_i = header.index("std_bound_per_mn")
        rel_spread = [r[std_i] / r[mean_i] for r in rows]
        assert rel_spread[0] > rel_spread[1] > rel_spread[2]


class TestDeterminism:
    def test_rerun_byte_identical(self, tmp_path):
        cfg = small_outage_cfg(p_out_grid=[1e-2], trials=20_000)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_experiment("outage", cfg, a, workers=1)
        run_experiment("outage", cfg, b, workers=1)
        assert a.read_bytes() == b.read_bytes()

    def test_worker_count_invariance(self, tmp_path):
        cfg = ExperimentConfig(**dict(
            BASE, m_tx=24, velocity_mps=15.0, p_out=5e-6, channel_draws=2500,
            m_tx_grid=[16, 24], schemes=["superimposed_mf", "time_orthogonal_mf"]))
        a, b = tmp_path / "w1.csv", tmp_path / "w2.csv"
        run_experiment("hardening", cfg, a, workers=1)
        run_experiment("hardening", cfg, b, workers=3)
        assert a.read_bytes() == b.read_bytes()

    def test_outage_worker_invariance(self, tmp_path):
        cfg = small_outage_cfg(trials=120_000)
        a, b = tmp_path / "w1.csv", tmp_path / "w2.csv"
        run_experiment("outage", cfg, a, workers=1)
        run_experiment("outage", cfg, b, workers=2)
        assert a.read_bytes() == b.read_bytes()

    def test_seed_changes_output(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        base = dict(BASE, m_tx=16, velocity_mps=15.0, p_out=5e-6, channel_draws=400,
                    m_tx_grid=[16], schemes=["superimposed_mf"])
        run_experiment("hardening", ExperimentConfig(**dict(base, seed=1)), a)
        run_experiment("hardening", ExperimentConfig(**dict(base, seed=2)), b)
        assert a.read_bytes() != b.read_bytes()


class TestSchemas:
    def test_manifest_written(self, tmp_path):
        out = tmp_path / "run.csv"
        run_experiment("outage", small_outage_cfg(trials=5_000, p_out_grid=[0.05]), out)
        manifest = json.loads((tmp_path / "run.manifest.json").read_text())
        assert manifest["subcommand"] == "outage"
        assert manifest["seed"] == 11
        assert manifest["config"]["m_tx"] == 10
        assert manifest["rows"] == 1
        assert "wall_time_s" in manifest and "git_hash" in manifest

    def test_headers(self, tmp_path):
        cfg = ExperimentConfig(**dict(
            BASE, m_tx=16, velocity_mps=15.0, schemes=["superimposed_mf", "mrc_baseline"],
            bounds=["chernoff", "chebyshev"], p_out=5e-6, channel_draws=300, bins=8))
        out = tmp_path / "pdf.csv"
        run_experiment("pdf", cfg, out)
        header = out.read_text().splitlines()[0]
        assert header == "scheme,bound,velocity_mps,bin_left,bin_right,count,density"

    def test_bounds_compare_rows(self, tmp_path):
        cfg = ExperimentConfig(**dict(
            BASE, m_tx=10, velocity_mps=15.0, p_out=5e-6,
            schemes=["superimposed_mf", "time_orthogonal_mf", "mrc_baseline"],
            bounds=["chernoff", "chebyshev", "polynomial"]))
        header, rows = RUNNERS["bounds-compare"](cfg, workers=1)
        assert len(rows) == 9
        assert header[0] == "scheme" and "valid" in header

    def test_missing_field_named(self):
        cfg = ExperimentConfig(**dict(BASE, velocity_mps=15.0))
        with pytest.raises(ConfigError, match="m_tx"):
            RUNNERS["outage"](cfg, workers=1)

    def test_unknown_config_key_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(dict(BASE, m_txx=10)))
        with pytest.raises(ConfigError, match="m_txx"):
            ExperimentConfig.from_json(path)


class TestCli:
    def run_cli(self, *args):
        return subprocess.run([sys.executable, "-m", "agedmimo.cli", *args],
                              capture_output=True, text=True)

    def test_round_trip(self, tmp_path):
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(dict(
            BASE, m_tx=10, velocity_mps=15.0, schemes=["superimposed_mf"],
            bounds=["chernoff"], p_out_grid=[0.02], trials=5_000)))
        res = self.run_cli("outage", "--config", str(cfg_path),
                           "--out-dir", str(tmp_path))
        assert res.returncode == 0, res.stderr
        assert (tmp_path / "exp.csv").exists()
        assert (tmp_path / "exp.manifest.json").exists()

    def test_cli_rerun_byte_identical(self, tmp_path):
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(dict(
            BASE, m_tx=10, velocity_mps=15.0, schemes=["superimposed_mf"],
            bounds=["chernoff"], p_out_grid=[0.02], trials=5_000)))
        d1, d2 = tmp_path / "r1", tmp_path / "r2"
        for d in (d1, d2):
            res = self.run_cli("outage", "--config", str(cfg_path), "--seed", "7",
                               "--out-dir", str(d))
            assert res.returncode == 0, res.stderr
        assert (d1 / "exp.csv").read_bytes() == (d2 / "exp.csv").read_bytes()

    def test_missing_field_exit_2(self, tmp_path):
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text(json.dumps(dict(BASE, velocity_mps=15.0,
                                            schemes=["superimposed_mf"],
                                            bounds=["chernoff"], p_out_grid=[0.02])))
        res = self.run_cli("outage", "--config", str(cfg_path),
                           "--out-dir", str(tmp_path))
        assert res.returncode == 2
        assert "m_tx" in res.stderr

    def test_trials_override(self, tmp_path):
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(dict(
            BASE, m_tx=10, velocity_mps=15.0, schemes=["superimposed_mf"],
            bounds=["chernoff"], p_out_grid=[0.05], trials=5_000)))
        res = self.run_cli("outage", "--config", str(cfg_path), "--trials", "2000",
                           "--out-dir", str(tmp_path))
        assert res.returncode == 0
        assert ",2000," in (tmp_path / "exp.csv").read_text().splitlines()[1]


class TestCommittedConfigs:
    def test_all_committed_configs_parse(self):
        cfg_dir = Path(__file__).resolve().parents[1] / "configs"
        seen = 0
        for path in sorted(cfg_dir.glob("*.json")):
            ExperimentConfig.from_json(path)
            seen += 1
        assert seen >= 9
