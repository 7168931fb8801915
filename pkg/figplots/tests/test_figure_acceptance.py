"""Acceptance for the figure layer: every committed figure spec renders the
CSV its experiment produces, yielding a non-empty image whose series count
matches the spec/CSV schema.

The CSVs are produced by the agedmimo CLI (the only interface used), with
Monte Carlo sizes reduced where the schema does not depend on them.
"""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from figplots import load_spec, render

ROOT = Path(__file__).resolve().parents[2]
SPEC_DIR = ROOT / "figplots" / "specs"
CONFIG_DIR = ROOT / "configs"

EXPERIMENTS = [
    ("outage", "fig2_outage.json", {}),
    ("pdf", "fig3_pdf.json", {"channel_draws": 2000}),
    ("hardening", "fig4_hardening.json", {"channel_draws": 300}),
    ("power-pdec", "fig5_power_pdec.json", {"channel_draws": 300}),
    ("power-m", "fig6_power_m_v15.json", {"channel_draws": 300}),
    ("power-m", "fig6_power_m_v5.json", {"channel_draws": 300}),
    ("recycling", "fig7_recycling.json", {"trials": 50000, "channel_draws": 300}),
    ("power-m", "fig8_power_m_gstbc_v5.json", {"channel_draws": 300}),
    ("power-m", "fig9_power_m_gstbc_v15.json", {"channel_draws": 300}),
]

FIGURES = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"]


@pytest.fixture(scope="module")
def results_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("results")
    for sub, config, shrink in EXPERIMENTS:
        raw = json.loads((CONFIG_DIR / config).read_text())
        raw.update(shrink)
        cfg_path = out / config
        cfg_path.write_text(json.dumps(raw))
        res = subprocess.run(
            [sys.executable, "-m", "agedmimo.cli", sub, "--config", str(cfg_path),
             "--out-dir", str(out)],
            capture_output=True, text=True)
        assert res.returncode == 0, f"{sub}/{config}: {res.stderr}"
    return out


@pytest.mark.parametrize("figure", FIGURES)
def test_c12_figure_renders(figure, results_dir, tmp_path):
    spec_path = SPEC_DIR / f"{figure}.json"
    spec = load_spec(spec_path)
    out = tmp_path / f"{figure}.png"
    result = render(spec, out, csv_dir=results_dir)
    ok = out.exists() and out.stat().st_size > 0 and result.n_series == len(spec.series)
    print(f"\n[C12:{figure}] {'PASS' if ok else 'FAIL'} - {result.n_series} series "
          f"(spec lists {len(spec.series)}), {out.stat().st_size} bytes", flush=True)
    assert ok


@pytest.mark.parametrize("figure", FIGURES)
def test_cli_round_trip(figure, results_dir, tmp_path):
    out = tmp_path / f"{figure}.png"
    res = subprocess.run(
        [sys.executable, "-m", "figplots.cli", "--spec", str(SPEC_DIR / f"{figure}.json"),
         "--out", str(out), "--csv-dir", str(results_dir)],
        capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert out.stat().st_size > 0
