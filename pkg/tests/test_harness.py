import csv
import io
import math
from dataclasses import replace

import numpy as np
import pytest

from esdrevival import harness
from esdrevival.config import parse_config
from esdrevival.entanglement import DEATH, REVIVAL
from esdrevival.exceptions import ConfigError, ProtocolError
from esdrevival.presets import load_preset, preset_text
from esdrevival.tomography import CountRecord


@pytest.fixture(scope="module")
def fig2a():
    return load_preset("fig2a")


@pytest.fixture(scope="module")
def fig2b():
    return load_preset("fig2b")


@pytest.fixture(scope="module")
def fig2a_sweep(fig2a):
    return harness.run_sweep(fig2a)


@pytest.fixture(scope="module")
def fig2b_sweep(fig2b):
    return harness.run_sweep(fig2b)


def _tomo(cfg, **kw):
    return replace(cfg, tomography=replace(cfg.tomography, **kw))


def test_sweep_rows_invariants(fig2a_sweep, fig2b_sweep):
    for rows, _ in (fig2a_sweep, fig2b_sweep):
        assert len(rows) == 801
        assert [r.x for r in rows] == list(np.arange(801.0))
        for r in rows:
            assert r.abs_kappa_b <= 1 + 1e-12
            assert abs(r.concurrence - max(0.0, r.gamma)) <= 1e-12
    assert all(r.polarization is None for r in fig2a_sweep[0])
    for r in fig2b_sweep[0]:
        assert r.polarization == pytest.approx(r.abs_kappa_b, abs=1e-10)


def test_fig2a_revival(fig2a, fig2a_sweep):
    rows, report = fig2a_sweep
    assert len(report) == 0
    window = [r for r in rows if 400 <= r.x <= 700]
    peak = max(window, key=lambda r: r.concurrence)
    assert peak.concurrence == pytest.approx(0.354, abs=0.02)
    assert abs(peak.x - 560) <= 20
    summary = harness.sweep_summary(fig2a, *fig2a_sweep)
    assert summary["revival_peak"]["x"] == peak.x


def test_fig2b_crossings_and_peak(fig2b, fig2b_sweep):
    rows, report = fig2b_sweep
    assert [c.direction for c in report] == [DEATH, REVIVAL, DEATH]
    for c, want, tol in zip(report, (189, 440, 663), (15, 20, 20)):
        assert abs(c.x - want) <= tol
    window = [r for r in rows if report.revivals[0] <= r.x <= report.deaths[1]]
    peak = max(window, key=lambda r: r.concurrence)
    assert peak.concurrence == pytest.approx(0.11, abs=0.02)
    assert abs(peak.x - 540) <= 20


def test_degenerate_sweep(fig2a):
    cfg = replace(fig2a, sweep=replace(fig2a.sweep, x_min=0.0, x_max=0.0))
    rows, report = harness.run_sweep(cfg)
    assert len(rows) == 1
    assert rows[0].abs_kappa_b == pytest.approx(1, abs=1e-12)
    assert rows[0].concurrence == pytest.approx(1, abs=1e-12)
    assert len(report) == 0


def test_sweep_csv_layout(fig2b):
    cfg = replace(fig2b, sweep=replace(fig2b.sweep, x_max=2.0), include_s=True)
    rows, _ = harness.run_sweep(cfg)
    text = harness.sweep_to_csv(rows)
    table = list(csv.reader(io.StringIO(text)))
    assert tuple(table[0]) == harness.SWEEP_COLUMNS
    assert table[1][:4] == ["0", "1", "0", "1"]
    assert len(table) == 4 and all(len(row) == 8 for row in table)
    assert all(cell != "" for cell in table[2])
    maximal = harness.sweep_to_csv(harness.run_sweep(load_preset("fig2a"))[0][:1])
    assert maximal.splitlines()[1].split(",")[6:] == ["", ""]


def test_fmt_nine_significant_digits():
    assert harness.fmt(math.pi) == "3.14159265"
    assert harness.fmt(1.0) == "1"


def test_estimator_transform(fig2b):
    est = harness.sweep_estimator(fig2b)
    out = est.transform(np.array([[0.0], [189.0]]))
    assert out.shape == (2, 6)
    assert out[0, 2] == pytest.approx(1)
    with pytest.raises(ConfigError):
        harness.EntanglementSweep(fig2b.spectrum, "partial", None).fit()


def test_dump_state(fig2a):
    def corner(x):
        s = harness.dump_state(fig2a, x)
        return math.hypot(s["real"][0][3], s["imag"][0][3])

    assert corner(0) == pytest.approx(0.5, abs=1e-12)
    assert corner(243) <= 0.06
    assert corner(560) == pytest.approx(0.177, abs=0.01)
    s = harness.dump_state(fig2a, 560)
    assert s["basis"] == ["HH", "HV", "VH", "VV"]
    assert corner(560) == pytest.approx(s["kappa_b"]["abs"] / 2, abs=1e-8)


def test_tomography_noiseless_revived_state(fig2a):
    rep = harness.run_tomography(_tomo(fig2a, n_per_setting=10**6, noiseless=True), 560)
    assert rep["fidelity"] >= 0.9999
    # self-consistency with the model concurrence (0.3416), see notes on the 0.354 target
    assert rep["reconstructed_concurrence"] == pytest.approx(rep["model_concurrence"], abs=0.005)
    assert len(rep["counts"]) == 16


def test_tomography_bell_state_median(fig2a):
    vals = [
        harness.run_tomography(_tomo(fig2a, n_per_setting=10**4, seed=s), 0)["reconstructed_concurrence"]
        for s in range(20)
    ]
    assert np.median(vals) >= 0.95


def test_tomography_zero_counts(fig2a):
    with pytest.raises(ProtocolError):
        harness.run_tomography(fig2a, 0, [CountRecord(i, 0) for i in range(16)])


def test_chsh_reports(fig2a):
    bell = harness.run_chsh(fig2a, 0)
    assert bell["optimized"]["s"] == pytest.approx(2 * math.sqrt(2), abs=1e-4)
    rev = harness.run_chsh(fig2a, 560)
    assert rev["horodecki_smax"] == pytest.approx(2 * math.sqrt(1 + 0.354**2), abs=0.02)
    assert rev["optimized"]["s"] >= 2.04
    assert rev["optimized"]["s"] <= rev["horodecki_smax"] + 1e-6
    assert rev["violates_at_angles"] == (rev["s_at_angles"] > 2)
    assert harness.run_chsh(fig2a, 243)["horodecki_smax"] <= 2.01
    no_opt = replace(fig2a, chsh=replace(fig2a.chsh, optimize=False))
    assert "optimized" not in harness.run_chsh(no_opt, 560)


def test_outputs_are_deterministic(fig2b):
    a = harness.to_json(harness.run_tomography(fig2b, 300))
    b = harness.to_json(harness.run_tomography(load_preset("fig2b"), 300))
    assert a == b
    rows1, rep1 = harness.run_sweep(fig2b)
    rows2, rep2 = harness.run_sweep(parse_config(preset_text("fig2b")))
    assert harness.sweep_to_csv(rows1) == harness.sweep_to_csv(rows2)
    assert harness.to_json(harness.sweep_summary(fig2b, rows1, rep1)) == harness.to_json(
        harness.sweep_summary(fig2b, rows2, rep2)
    )


def test_first_local_minimum():
    assert harness.first_local_minimum([1, 0.5, 0.2, 0.3, 0.1]) == 2
    assert harness.first_local_minimum([1, 1, 1]) is None
