import json

import numpy as np
import pytest

from eit5.analytic import chi_reduced, narrow_resonances
from eit5.errors import ConfigError
from eit5.model import AtomParams, FieldParams
from eit5.sweep import (COLUMNS, PRESETS, SweepConfig, extract_features, features_from_csv,
                        parse_config_text, preset, read_csv, run_sweep, thread_count, write_outputs)


def small(**kw):
    base = dict(fields=FieldParams(omega_mu=2.0, omega_b_rf=0.1, omega_c_rf=0.1), range=(-1.5, 1.5, 301))
    base.update(kw)
    return SweepConfig(**base)


def test_parse_flat_config():
    cfg = parse_config_text("""
        # comment line
        omega_mu = 2.0
        omega_b_rf = 0.1   # trailing comment
        gamma_Cprime = 1e-3
        start = -0.2
        stop = 0.2
        count = 401
        method = analytic
        outputs = re_chi, im_chi
    """)
    assert cfg.fields.omega_mu == 2.0 and cfg.fields.omega_b_rf == 0.1
    assert cfg.atom.gamma_Cprime == 1e-3
    assert cfg.range == (-0.2, 0.2, 401)
    assert cfg.method == "analytic"
    assert cfg.outputs == ("delta_p", "re_chi", "im_chi")


def test_config_on_top_of_preset():
    cfg = parse_config_text("preset = fig8\ncount = 101\n")
    assert cfg.fields.omega_b_rf == pytest.approx(0.06)
    assert cfg.range[2] == 101


@pytest.mark.parametrize("text", [
    "start = 1\nstop = 1\n",
    "count = 1\n",
    "count = 2.5\n",
    "method = euler\n",
    "sweep_axis = omega_p\n",
    "colour = red\n",
    "omega_mu = fast\n",
    "omega_mu\n",
    "omega_mu = 1\nomega_mu = 2\n",
    "omega_mu = -1\n",
    "outputs = delta_p, phase\n",
    "preset = fig4\n",
    "preset = fig99\n",
    "delta_b = 0.1\nmethod = analytic\n",
])
def test_bad_configs_rejected(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_energy_level_figure_has_no_preset():
    with pytest.raises(ConfigError):
        preset("fig4")


def test_every_preset_builds():
    for name in PRESETS:
        cfg = preset(name)
        assert cfg.probe_grid().size >= 2


def test_method_aliases():
    assert SweepConfig(method="linear-solve").method == "solve"
    assert SweepConfig(method="time-domain").method == "ode"


def test_config_dict_round_trip():
    cfg = preset("fig6")
    assert SweepConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv("EIT5_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("EIT5_THREADS", "zero")
    with pytest.raises(ConfigError):
        thread_count()


def test_table_layout():
    table = run_sweep(small())
    assert table.header() == list(COLUMNS) + ["error"]
    assert table.n_rows == 301
    assert not any(table.errors)
    two_axis = run_sweep(SweepConfig(sweep_axis="omega_b_rf", values=(0.0, 0.1), dp_range=(-1, 1, 11)))
    assert two_axis.header()[0] == "omega_b_rf"
    assert two_axis.n_rows == 22
    assert two_axis.rows_for(0.1)["delta_p"].size == 11


def test_csv_is_deterministic_across_thread_counts():
    cfg = small(range=(-1.5, 1.5, 5001))
    one = run_sweep(cfg, threads=1).to_csv()
    assert one == run_sweep(cfg, threads=1).to_csv()
    assert one == run_sweep(cfg, threads=4).to_csv()


def test_csv_round_trip(tmp_path):
    table = run_sweep(small())
    csv_path, json_path = tmp_path / "s.csv", tmp_path / "s.json"
    write_outputs(table, str(csv_path), str(json_path))
    back = read_csv(str(csv_path))
    for key in COLUMNS:
        assert np.array_equal(back[key], table.columns[key])
    meta = json.loads(json_path.read_text())
    assert meta["rows"] == 301 and meta["failed_rows"] == 0
    assert SweepConfig.from_dict(meta["config"]) == table.config


def test_methods_agree():
    atom = AtomParams(gamma_C=1e-3, gamma_Cprime=2e-3, gamma_bb_tilde=1e-3)
    cfg = dict(atom=atom, range=(-1.5, 1.5, 61))
    solve = run_sweep(small(method="solve", **cfg)).columns
    analytic = run_sweep(small(method="analytic", **cfg)).columns
    ode = run_sweep(small(method="ode", **cfg)).columns
    for key in ("re_chi", "im_chi"):
        assert np.allclose(analytic[key], solve[key], rtol=1e-10, atol=1e-12)
        assert np.allclose(ode[key], solve[key], rtol=1e-8, atol=1e-10)
    assert np.allclose(analytic["slope"], solve["slope"], rtol=1e-5)


def test_failed_points_are_recorded_not_fatal(monkeypatch):
    from eit5 import steady_state
    from eit5.errors import DegenerateSystemError

    original = steady_state.chi_numeric

    def flaky(atom, fields, dp=None, **kw):
        if np.any(np.asarray(dp) == 0.0):
            raise DegenerateSystemError("synthetic pole")
        return original(atom, fields, dp, **kw)

    monkeypatch.setattr(steady_state, "chi_numeric", flaky)
    table = run_sweep(small(range=(-1.0, 1.0, 5)))
    assert table.n_rows == 5
    assert [bool(e) for e in table.errors] == [False, False, True, False, False]
    assert "synthetic pole" in table.errors[2]
    assert np.isnan(table.columns["im_chi"][2]) and np.isfinite(table.columns["im_chi"][1])
    assert "synthetic pole" in table.to_csv().splitlines()[3]


def test_figure_two_has_four_maxima():
    cfg = preset("fig2")
    table = run_sweep(cfg)
    report = extract_features(table.columns["delta_p"], table.columns["im_chi"])
    centers = sorted(p.center for p in report.peaks)
    assert len(centers) == 4
    assert centers[1] == pytest.approx(-0.05, abs=1e-3) and centers[2] == pytest.approx(0.05, abs=1e-3)
    # the narrow pair spans about five grid points here
    assert [p.under_resolved for p in sorted(report.peaks, key=lambda p: p.center)] == [False, True, True, False]


def test_features_stable_under_refinement():
    atom, fields = AtomParams(), FieldParams(omega_mu=2.0, omega_b_rf=0.1, omega_c_rf=0.1)
    coarse = np.linspace(-0.1, 0.1, 20001)
    fine = np.linspace(-0.1, 0.1, 40001)
    a = extract_features(coarse, chi_reduced(atom, fields, coarse).imag).peaks
    b = extract_features(fine, chi_reduced(atom, fields, fine).imag).peaks
    assert len(a) == len(b) == 2
    for p, q in zip(a, b):
        assert p.center == pytest.approx(q.center, abs=2e-5)
        assert p.fwhm == pytest.approx(q.fwhm, rel=1e-3)
        assert p.height == pytest.approx(q.height, rel=1e-6)


def test_flat_and_tiny_inputs_give_no_peaks():
    x = np.linspace(-1, 1, 101)
    assert extract_features(x, np.zeros_like(x)).peaks == []
    assert extract_features(x, np.full_like(x, 0.3)).peaks == []
    assert extract_features(x[:2], x[:2]).peaks == []


def test_synthetic_lorentzian_width():
    x = np.linspace(-1, 1, 20001)
    y = 0.01 / (x ** 2 + 0.01)
    (peak,) = extract_features(x, y).peaks
    assert peak.center == pytest.approx(0.0, abs=1e-12)
    assert peak.height == pytest.approx(1.0)
    # baseline 1/101 at the window edges shifts the half level slightly
    base = 0.01 / 1.01
    half = np.sqrt(0.01 / ((1 + base) / 2) - 0.01)
    assert peak.fwhm == pytest.approx(2 * half, rel=1e-4)


@pytest.mark.parametrize("rf_b, rf_c, count", [
    (0.0, 0.0, 2),
    (0.1, 0.0, 2),
    (0.0, 0.5, 3),
    (4.0, 0.0, 4),
    (2.2, 1.8, 6),
    (0.1, 0.1, 4),
])
def test_number_of_absorption_maxima(rf_b, rf_c, count):
    atom = AtomParams()
    fields = FieldParams(omega_mu=2.0, omega_b_rf=rf_b, omega_c_rf=rf_c)
    dp = np.linspace(-6, 6, 120001)
    assert len(extract_features(dp, chi_reduced(atom, fields, dp).imag).peaks) == count


def test_dephasing_lowers_narrow_peaks():
    table = run_sweep(preset("fig6"))
    heights = []
    for value in (0.0, 1e-3, 1e-2):
        rows = table.rows_for(value)
        peaks = extract_features(rows["delta_p"], rows["im_chi"]).peaks
        heights.append(max(p.height for p in peaks if abs(p.center) < 0.1))
    assert heights[0] > heights[1] > heights[2]


def test_features_from_csv_pairs_predictions(tmp_path):
    cfg = preset("fig2-zoom")
    table = run_sweep(cfg)
    path = tmp_path / "zoom.csv"
    write_outputs(table, str(path))
    report = features_from_csv(str(path), cfg)
    assert len(report.peaks) == 2
    expected = narrow_resonances(cfg.atom, cfg.fields)
    assert [r.center for r in report.analytic] == [r.center for r in expected]
    for err in report.relative_errors:
        assert err["center"] < 1e-3 and err["fwhm"] < 0.02 and err["height_model"] < 0.02


def test_two_axis_features(tmp_path):
    cfg = preset("fig6")
    path = tmp_path / "fig6.csv"
    write_outputs(run_sweep(cfg), str(path))
    reports = features_from_csv(str(path), cfg)
    assert sorted(reports) == sorted(repr(v) for v in (0.0, 1e-3, 1e-2))
