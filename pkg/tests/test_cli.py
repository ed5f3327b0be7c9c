import json
import os

import numpy as np
import pytest

from kerramp import fitres, touchstone
from kerramp.cli import main
from kerramp.constants import TWO_PI
from conftest import config_path


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBasics:
    def test_help_exits_zero(self, capsys):
        code, out, err = run(capsys, "--help")
        assert code == 0

    def test_missing_subcommand_usage_error(self, capsys):
        code, out, err = run(capsys)
        assert code == 2

    def test_malformed_config_exit_2_no_output(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[device]\nlabel = x\n")  # no junction/elements
        out_dir = tmp_path / "out"
        code, out, err = run(
            capsys, "predict", "--config", str(bad), "--out", str(out_dir)
        )
        assert code == 2
        record = json.loads(err.splitlines()[0])
        assert record["exit_code"] == 2
        assert not out_dir.exists() or not os.listdir(out_dir)


class TestPredict:
    def test_pinned_device_b(self, capsys):
        code, out, _ = run(
            capsys, "predict", "--config", config_path("device_b_pinned.cfg")
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["participation"] == pytest.approx(0.110, abs=1e-3)
        assert payload["manifest"]["tool"] == "kerramp"

    def test_output_directory_atomic(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "predict", "--config", config_path("device_b_pinned.cfg"),
            "--out", str(tmp_path),
        )
        assert code == 0
        files = os.listdir(tmp_path)
        assert any(f.startswith("predict_") for f in files)
        assert not any(f.endswith(".tmp") for f in files)
        payload = json.load(open(os.path.join(tmp_path, files[0])))
        assert "e_c_over_h_hz" in payload


class TestCalibrate:
    def test_photon_number(self, capsys):
        code, out, _ = run(
            capsys, "calibrate",
            "--f-r-GHz", "7.52", "--kappa-2pi-MHz", "41.3",
            "--kappa-ext-2pi-MHz", "41.3", "--f-d-GHz", "7.52",
            "--power-dBm", "-100",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["photon_number_linear"] == pytest.approx(309.35, rel=1e-3)


class TestKerrFit:
    def test_round_trip(self, tmp_path, capsys):
        n = np.linspace(10, 1000, 40)
        shift = 2 * (-3300.0) * n
        csv = tmp_path / "stark.csv"
        lines = ["photon_number,shift_hz"] + [
            f"{a:.6e},{b:.6e}" for a, b in zip(n, shift)
        ]
        csv.write_text("\n".join(lines))
        code, out, _ = run(capsys, "kerr-fit", "--csv", str(csv))
        assert code == 0
        payload = json.loads(out)
        assert payload["kerr_hz"] == pytest.approx(-3300.0, rel=1e-5)


class TestKerrIip3:
    def test_formula(self, capsys):
        from scipy.constants import hbar

        f0, kappa, kerr = 6.63e9, TWO_PI * 32.3e6, 150.0
        iip3_w = hbar * TWO_PI * f0 * kappa**2 / (8 * TWO_PI * kerr)
        iip3_dbm = 10 * np.log10(iip3_w / 1e-3)
        code, out, _ = run(
            capsys, "kerr-iip3", "--f0-GHz", "6.63",
            "--kappa-2pi-MHz", "32.3", "--iip3-dBm", f"{iip3_dbm}",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["kerr_magnitude_hz"] == pytest.approx(150.0, rel=1e-6)


class TestFit:
    def test_fit_from_touchstone(self, tmp_path, capsys):
        f_r, kappa = 7.52e9, TWO_PI * 41.3e6
        f = np.linspace(f_r - 150e6, f_r + 150e6, 301)
        s = fitres.synthesize_reflection(f, f_r, 0.8 * kappa, 0.2 * kappa)
        path = str(tmp_path / "trace.s1p")
        touchstone.write_touchstone(path, f, s)
        code, out, _ = run(capsys, "fit", "--touchstone", path)
        assert code == 0
        payload = json.loads(out)
        assert payload["f_r_hz"] == pytest.approx(f_r, rel=1e-6)
        assert payload["kappa_over_2pi_hz"] == pytest.approx(41.3e6, rel=1e-3)

    def test_fit_from_csv_hanger(self, tmp_path, capsys):
        f_r, kappa = 6.63e9, TWO_PI * 32.3e6
        f = np.linspace(f_r - 120e6, f_r + 120e6, 301)
        s = fitres.synthesize_hanger(f, f_r, 0.7 * kappa, 0.3 * kappa)
        path = str(tmp_path / "trace.csv")
        touchstone.write_csv_trace(path, f, s, value_label="s21")
        code, out, _ = run(capsys, "fit", "--csv", path, "--type", "hanger")
        assert code == 0
        payload = json.loads(out)
        assert payload["kappa_ext_over_2pi_hz"] == pytest.approx(
            0.7 * 41.3e6 * 32.3 / 41.3, rel=1e-3
        )

    def test_fit_without_input_is_usage_error(self, capsys):
        code, out, err = run(capsys, "fit")
        assert code == 2


class TestBbq:
    def test_from_touchstone_impedance(self, tmp_path, capsys):
        f = np.linspace(3e9, 8e9, 3001)
        w = TWO_PI * f
        z = 1.0 + 1j * w * 1e-9 + 1.0 / (1j * w * 1e-12)
        path = str(tmp_path / "z.s1p")
        touchstone.write_touchstone(path, f, z, parameter="Z")
        code, out, _ = run(capsys, "bbq", "--touchstone", path)
        assert code == 0
        payload = json.loads(out)
        assert payload["l_h"] == pytest.approx(1e-9, rel=1e-3)
        assert payload["c_f"] == pytest.approx(1e-12, rel=1e-3)

    def test_needs_input(self, capsys):
        code, out, err = run(capsys, "bbq")
        assert code == 2


class TestP1dbExport:
    def test_pumped_s11_export_wiring(self, tmp_path, capsys, monkeypatch):
        import kerramp.cli as cli
        import kerramp.hb as hbmod

        def fake_p1db(net, poly, pump, probe_freq, *a, **kw):
            return hbmod.CompressionResult(
                p_1db_dbm=-120.0, gain_small_db=21.0,
                probe_powers_dbm=np.array([-140.0]), gains_db=np.array([21.0]),
            )

        def fake_pumped(net, poly, pump, probe_freqs, *a, **kw):
            return np.full(len(probe_freqs), 0.5 + 0.1j)

        monkeypatch.setattr(cli.hb, "p1db", fake_p1db)
        monkeypatch.setattr(cli.hb, "pumped_reflection", fake_pumped)
        code, out, _ = run(
            capsys, "p1db", "--config", config_path("device_a_like.cfg"),
            "--pump-f-GHz", "7.487", "--pump-power-dBm", "-84.6",
            "--export-pumped-s11", "--out", str(tmp_path),
        )
        assert code == 0
        files = os.listdir(tmp_path)
        assert any(f.endswith(".s1p") for f in files)
        assert any(f.startswith("p1db_") for f in files)


class TestGainMapCli:
    def test_low_gain_region_runs_and_writes(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "gain-map", "--config", config_path("device_a_like.cfg"),
            "--f-start-GHz", "7.45", "--f-stop-GHz", "7.46", "--n-freq", "2",
            "--p-start-dBm", "-110", "--p-stop-dBm", "-105", "--n-power", "2",
            "--out", str(tmp_path),
        )
        assert code == 0
        files = os.listdir(tmp_path)
        assert any(f.startswith("gain_map_") and f.endswith(".csv") for f in files)
        json_file = [f for f in files if f.endswith(".json")][0]
        payload = json.load(open(os.path.join(tmp_path, json_file)))
        assert payload["cells"] == 4
        assert "manifest" in payload


class TestCompareCli:
    def test_wiring_with_stubbed_pipeline(self, tmp_path, capsys, monkeypatch):
        import kerramp.cli as cli
        import kerramp.hb as hbmod
        from kerramp import pipeline as pl

        gm = hbmod.GainMap(
            np.array([7.48e9, 7.49e9]), np.array([-88.0, -85.0]),
            np.zeros((2, 2)), np.zeros((2, 2), dtype=bool),
        )

        def fake_compare(spec, freqs, powers, **kw):
            entry = pl.TuneResult(
                label=spec.label, pump_freq=7.487e9, pump_power_dbm=-84.6,
                gain_db=21.0, gain_map=gm, compression=None,
                compression_error="stub",
            )
            twin = pl.TuneResult(
                label=f"{spec.label}_sis_twin", pump_freq=7.486e9,
                pump_power_dbm=-107.0, gain_db=21.0, gain_map=gm,
                compression=None, compression_error="stub",
            )
            return pl.ComparisonReport(
                entries={entry.label: entry, twin.label: twin},
                delta_p1db_db=None,
            )

        monkeypatch.setattr(cli.pipeline, "compare_junctions", fake_compare)
        code, out, _ = run(
            capsys, "compare", "--config", config_path("device_a_like.cfg"),
            "--f-start-GHz", "7.48", "--f-stop-GHz", "7.49",
            "--p-start-dBm", "-88", "--p-stop-dBm", "-85",
            "--out", str(tmp_path),
        )
        assert code == 0
        files = os.listdir(tmp_path)
        assert any(f.startswith("compare_") for f in files)
        assert sum(f.startswith("gain_map_") for f in files) == 2


class TestIip3NotFound:
    def test_linear_junction_reports_not_found(self, tmp_path, capsys):
        cfg = tmp_path / "lin.cfg"
        cfg.write_text(
            "[device]\nlabel = lin\ntopology = reflection\n"
            "[element.1]\nkind = series_resistor\nr_ohm = 5\n"
            "[element.2]\nkind = series_capacitor\nc_fF = 500\n"
            "[element.3]\nkind = junction\n"
            "[junction]\nkind = ssms_quartic\nl_j_nH = 1.0\nc4_over_c2 = 0\n"
        )
        f0 = 1.0 / (2 * np.pi * np.sqrt(1e-9 * 0.5e-12))
        code, out, _ = run(
            capsys, "iip3", "--config", str(cfg),
            "--f1-GHz", f"{f0 / 1e9 * 0.9999}", "--f2-GHz", f"{f0 / 1e9 * 1.0001}",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["status"] == "not-found"
