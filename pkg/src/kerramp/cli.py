"""Command-line entry point.

Subcommands map one-to-one onto the analysis flows:

    predict     design -> extraction -> participation/E_C/Kerr prediction
    bbq         series-RLC extraction from a config or Touchstone impedance
    calibrate   drive power -> intra-cavity photon number
    kerr-fit    Kerr from a CSV of (photon number, frequency shift)
    kerr-iip3   Kerr from a third-order intercept
    gain-map    pump frequency/power sweep of small-signal gain
    p1db        1 dB compression of a pumped amplifier
    iip3        two-tone intermodulation intercept
    compare     SIS-vs-weakly-nonlinear compression comparison
    fit         resonance fit of a Touchstone/CSV trace

All file outputs are written atomically (temp file + rename), so failures
leave no partial artifacts.  Exit codes: 0 success, 1 computation failure,
2 configuration or usage error.  Failures print one machine-parsable JSON
line to stderr followed by a human-readable message.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, bbq, duffing, fitres, hb, pipeline, touchstone
from .config import ConfigError, load_device_config
from .constants import TWO_PI, dbm_to_watt

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _emit_error(stage, exc, code):
    record = {
        "error": type(exc).__name__,
        "stage": stage,
        "message": str(exc),
        "exit_code": code,
    }
    print(json.dumps(record), file=sys.stderr)
    print(f"kerramp: {stage} failed: {exc}", file=sys.stderr)
    return code


def _write_json(path, payload):
    touchstone._atomic_write(path, json.dumps(payload, indent=2) + "\n")


def _outdir(args):
    out = args.out or os.environ.get("KERRAMP_OUT")
    if out:
        os.makedirs(out, exist_ok=True)
    return out


def _print_or_write(args, name, payload):
    out = _outdir(args)
    text = json.dumps(payload, indent=2)
    if out:
        path = os.path.join(out, name)
        _write_json(path, payload)
        print(path)
    else:
        print(text)


def _load_spec(path):
    cfg = load_device_config(path)
    return cfg, pipeline.spec_from_config(cfg)


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def cmd_predict(args):
    cfg, spec = _load_spec(args.config)
    pred = pipeline.predict_device(spec, pinned=cfg.bbq_pin)
    payload = pred.to_dict()
    payload["manifest"] = pipeline.run_manifest([args.config])
    _print_or_write(args, f"predict_{spec.label}.json", payload)
    return EXIT_OK


def cmd_bbq(args):
    if args.touchstone:
        freqs, z = touchstone.impedance_from_touchstone(args.touchstone)
        omega0, l, c, r = bbq.extract_series_rlc_from_samples(freqs, z)
        if args.l_j_nh is not None:
            rec = bbq.extraction_with_junction(
                omega0, l, c, r, args.l_j_nh * 1e-9, args.c4_over_c2
            )
            payload = rec.to_dict()
        else:
            payload = {
                "omega0_rad_per_s": omega0,
                "f0_hz": omega0 / TWO_PI,
                "l_h": l,
                "c_f": c,
                "r_ohm": r,
            }
        label = os.path.basename(args.touchstone)
    else:
        if not args.config:
            raise UsageError("bbq needs --config or --touchstone")
        cfg, spec = _load_spec(args.config)
        pred = pipeline.predict_device(spec, pinned=cfg.bbq_pin)
        payload = pred.extraction.to_dict()
        label = spec.label
    _print_or_write(args, f"bbq_{label}.json", payload)
    return EXIT_OK


def _mode_from_args(args):
    return duffing.ModeParams(
        f_r=args.f_r_ghz * 1e9,
        kappa=TWO_PI * args.kappa_2pi_mhz * 1e6,
        kappa_ext=TWO_PI * args.kappa_ext_2pi_mhz * 1e6,
        kerr_hz=args.kerr_hz,
        topology=args.topology,
    )


def cmd_calibrate(args):
    mode = _mode_from_args(args)
    drive = duffing.DriveSpec(
        p_g=dbm_to_watt(args.power_dbm),
        f_d=args.f_d_ghz * 1e9,
        attenuation=10.0 ** (args.attenuation_db / 10.0),
    )
    n_linear = duffing.photon_number(mode, drive)
    roots = duffing.steady_state_occupation(mode, drive)
    payload = {
        "photon_number_linear": float(n_linear),
        "steady_state_occupations": [float(r) for r in roots],
        "drive_power_dbm": args.power_dbm,
        "drive_frequency_hz": drive.f_d,
        "attenuation_db": args.attenuation_db,
    }
    _print_or_write(args, "calibrate.json", payload)
    return EXIT_OK


def cmd_kerr_fit(args):
    rows = np.loadtxt(args.csv, delimiter=",", skiprows=args.skip_rows)
    if rows.ndim != 2 or rows.shape[1] < 2:
        raise UsageError("CSV must have columns: photon_number, shift_hz")
    kerr, stderr = duffing.fit_kerr_from_stark(rows[:, :2])
    payload = {
        "kerr_hz": float(kerr),
        "kerr_stderr_hz": float(stderr),
        "points": int(rows.shape[0]),
        "input_csv": args.csv,
    }
    _print_or_write(args, "kerr_fit.json", payload)
    return EXIT_OK


def cmd_kerr_iip3(args):
    kerr = duffing.kerr_from_iip3(
        args.f0_ghz * 1e9,
        TWO_PI * args.kappa_2pi_mhz * 1e6,
        dbm_to_watt(args.iip3_dbm),
    )
    payload = {
        "kerr_magnitude_hz": float(kerr),
        "f0_hz": args.f0_ghz * 1e9,
        "kappa_over_2pi_hz": args.kappa_2pi_mhz * 1e6,
        "iip3_dbm": args.iip3_dbm,
    }
    _print_or_write(args, "kerr_iip3.json", payload)
    return EXIT_OK


def cmd_gain_map(args):
    cfg, spec = _load_spec(args.config)
    poly = spec.hb_polynomial()
    freqs = np.linspace(args.f_start_ghz * 1e9, args.f_stop_ghz * 1e9, args.n_freq)
    powers = np.linspace(args.p_start_dbm, args.p_stop_dbm, args.n_power)
    gmap = hb.gain_map(spec.resolved_netlist(), poly, freqs, powers)
    best_gain, best_f, best_p = gmap.best()
    payload = {
        "label": spec.label,
        "best_gain_db": best_gain,
        "best_pump_freq_hz": best_f,
        "best_pump_power_dbm": best_p,
        "failed_cells": int(np.sum(gmap.failed)),
        "cells": int(gmap.failed.size),
        "manifest": pipeline.run_manifest([args.config]),
    }
    out = _outdir(args)
    if out:
        csv_path = os.path.join(out, f"gain_map_{spec.label}.csv")
        touchstone.write_csv_matrix(
            csv_path, gmap.pump_powers_dbm, gmap.pump_freqs,
            np.where(gmap.failed, np.nan, gmap.gain_db),
            row_label="pump_power_dbm", col_label="pump_freq_hz",
            cell_label="gain_db (NaN = solver failure)",
        )
        payload["gain_map_csv"] = csv_path
    _print_or_write(args, f"gain_map_{spec.label}.json", payload)
    return EXIT_OK


def cmd_p1db(args):
    cfg, spec = _load_spec(args.config)
    poly = spec.hb_polynomial()
    net = spec.resolved_netlist()
    pump = hb.Tone(args.pump_f_ghz * 1e9, dbm_to_watt(args.pump_power_dbm))
    probe_freq = pump.freq + args.probe_offset_hz
    result = hb.p1db(net, poly, pump, probe_freq)
    payload = {
        "label": spec.label,
        "pump_freq_hz": pump.freq,
        "pump_power_dbm": args.pump_power_dbm,
        "small_signal_gain_db": result.gain_small_db,
        "p_1db_dbm": result.p_1db_dbm,
        "sweep_probe_dbm": result.probe_powers_dbm.tolist(),
        "sweep_gain_db": result.gains_db.tolist(),
    }
    out = _outdir(args)
    if args.export_pumped_s11 and out:
        span = args.export_span_mhz * 1e6
        probe_freqs = pump.freq + np.linspace(-span / 2, span / 2, 81)
        probe_freqs = probe_freqs[np.abs(probe_freqs - pump.freq) > 1e4]
        gamma_on = hb.pumped_reflection(net, poly, pump, probe_freqs)
        s1p = os.path.join(out, f"pumped_s11_{spec.label}.s1p")
        touchstone.write_touchstone(
            s1p, probe_freqs, gamma_on, z0=net.z_port,
            comment=f"pumped small-signal response, pump "
                    f"{pump.freq / 1e9:.6f} GHz {args.pump_power_dbm} dBm",
        )
        payload["pumped_s11_touchstone"] = s1p
    _print_or_write(args, f"p1db_{spec.label}.json", payload)
    return EXIT_OK


def cmd_iip3(args):
    cfg, spec = _load_spec(args.config)
    poly = spec.hb_polynomial(domain_fraction=0.15, order=4)
    powers = None
    if args.p_start_dbm is not None and args.p_stop_dbm is not None:
        powers = np.linspace(args.p_start_dbm, args.p_stop_dbm, args.n_power)
    try:
        result = hb.iip3(
            spec.resolved_netlist(), poly,
            args.f1_ghz * 1e9, args.f2_ghz * 1e9, powers,
        )
    except hb.ThirdOrderFloorError as exc:
        payload = {
            "label": spec.label,
            "iip3_dbm": None,
            "status": "not-found",
            "reason": str(exc),
        }
        _print_or_write(args, f"iip3_{spec.label}.json", payload)
        return EXIT_OK
    payload = {
        "label": spec.label,
        "iip3_w": result.iip3_w,
        "iip3_dbm": result.iip3_dbm,
        "slope_fund": result.slope_fund,
        "slope_im3": result.slope_im3,
        "input_powers_dbm": result.input_powers_dbm.tolist(),
        "p_fund_out_dbm": result.p_fund_dbm.tolist(),
        "p_im3_out_dbm": result.p_im3_dbm.tolist(),
    }
    _print_or_write(args, f"iip3_{spec.label}.json", payload)
    return EXIT_OK


def cmd_compare(args):
    cfg, spec = _load_spec(args.config)
    freqs = np.linspace(args.f_start_ghz * 1e9, args.f_stop_ghz * 1e9, args.n_freq)
    powers = np.linspace(args.p_start_dbm, args.p_stop_dbm, args.n_power)
    report = pipeline.compare_junctions(spec, freqs, powers)
    payload = report.to_dict()
    payload["manifest"] = pipeline.run_manifest([args.config])
    out = _outdir(args)
    if out:
        for label, entry in report.entries.items():
            csv_path = os.path.join(out, f"gain_map_{label}.csv")
            gm = entry.gain_map
            touchstone.write_csv_matrix(
                csv_path, gm.pump_powers_dbm, gm.pump_freqs,
                np.where(gm.failed, np.nan, gm.gain_db),
                row_label="pump_power_dbm", col_label="pump_freq_hz",
                cell_label="gain_db (NaN = solver failure)",
            )
    _print_or_write(args, f"compare_{spec.label}.json", payload)
    return EXIT_OK


def cmd_fit(args):
    if args.touchstone:
        ts = touchstone.read_touchstone(args.touchstone)
        data = ts["data"]
        freqs = ts["freqs_hz"]
        if data.ndim == 3:
            data = data[:, 1, 0]  # S21 of a two-port
        source = args.touchstone
    elif args.csv:
        freqs, data = touchstone.read_csv_trace(args.csv)
        source = args.csv
    else:
        raise UsageError("fit needs --touchstone or --csv")
    trace = np.column_stack([freqs, data])
    if args.type == "reflection":
        fit = fitres.fit_reflection(trace)
    else:
        fit = fitres.fit_hanger(trace)
    payload = fit.to_dict()
    payload["input"] = source
    payload["model"] = args.type
    _print_or_write(args, "fit.json", payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="kerramp",
        description="Kerr nonlinearity and parametric-amplifier analysis "
        "of generalized Josephson-junction circuits",
    )
    p.add_argument("--version", action="version", version=f"kerramp {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output directory (env KERRAMP_OUT)")
        sp.add_argument("--seed", type=int, default=None,
                        help="seed for stochastic fits")
        sp.add_argument("--jobs", type=int, default=1,
                        help="worker budget for sweeps")

    sp = sub.add_parser("predict", help="design-to-Kerr prediction")
    sp.add_argument("--config", required=True)
    common(sp)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("bbq", help="series-RLC extraction")
    sp.add_argument("--config")
    sp.add_argument("--touchstone", help="one-port impedance file")
    sp.add_argument("--l-j-nH", dest="l_j_nh", type=float, default=None)
    sp.add_argument("--c4-over-c2", dest="c4_over_c2", type=float, default=1.0)
    common(sp)
    sp.set_defaults(func=cmd_bbq)

    sp = sub.add_parser("calibrate", help="drive power to photon number")
    sp.add_argument("--f-r-GHz", dest="f_r_ghz", type=float, required=True)
    sp.add_argument("--kappa-2pi-MHz", dest="kappa_2pi_mhz", type=float, required=True)
    sp.add_argument("--kappa-ext-2pi-MHz", dest="kappa_ext_2pi_mhz", type=float,
                    required=True)
    sp.add_argument("--kerr-Hz", dest="kerr_hz", type=float, default=0.0)
    sp.add_argument("--topology", choices=["reflection", "hanger"],
                    default="reflection")
    sp.add_argument("--f-d-GHz", dest="f_d_ghz", type=float, required=True)
    sp.add_argument("--power-dBm", dest="power_dbm", type=float, required=True)
    sp.add_argument("--attenuation-dB", dest="attenuation_db", type=float,
                    default=0.0)
    common(sp)
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("kerr-fit", help="Kerr from (photon number, shift) CSV")
    sp.add_argument("--csv", required=True,
                    help="columns: photon_number, shift_hz")
    sp.add_argument("--skip-rows", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_kerr_fit)

    sp = sub.add_parser("kerr-iip3", help="Kerr from a third-order intercept")
    sp.add_argument("--f0-GHz", dest="f0_ghz", type=float, required=True)
    sp.add_argument("--kappa-2pi-MHz", dest="kappa_2pi_mhz", type=float,
                    required=True)
    sp.add_argument("--iip3-dBm", dest="iip3_dbm", type=float, required=True)
    common(sp)
    sp.set_defaults(func=cmd_kerr_iip3)

    sp = sub.add_parser("gain-map", help="pump sweep of small-signal gain")
    sp.add_argument("--config", required=True)
    sp.add_argument("--f-start-GHz", dest="f_start_ghz", type=float, required=True)
    sp.add_argument("--f-stop-GHz", dest="f_stop_ghz", type=float, required=True)
    sp.add_argument("--n-freq", type=int, default=41)
    sp.add_argument("--p-start-dBm", dest="p_start_dbm", type=float, required=True)
    sp.add_argument("--p-stop-dBm", dest="p_stop_dbm", type=float, required=True)
    sp.add_argument("--n-power", type=int, default=41)
    common(sp)
    sp.set_defaults(func=cmd_gain_map)

    sp = sub.add_parser("p1db", help="1 dB compression point")
    sp.add_argument("--config", required=True)
    sp.add_argument("--pump-f-GHz", dest="pump_f_ghz", type=float, required=True)
    sp.add_argument("--pump-power-dBm", dest="pump_power_dbm", type=float,
                    required=True)
    sp.add_argument("--probe-offset-Hz", dest="probe_offset_hz", type=float,
                    default=1e5)
    sp.add_argument("--export-pumped-s11", action="store_true",
                    help="write the pumped small-signal reflection as .s1p")
    sp.add_argument("--export-span-MHz", dest="export_span_mhz", type=float,
                    default=30.0)
    common(sp)
    sp.set_defaults(func=cmd_p1db)

    sp = sub.add_parser("iip3", help="two-tone third-order intercept")
    sp.add_argument("--config", required=True)
    sp.add_argument("--f1-GHz", dest="f1_ghz", type=float, required=True)
    sp.add_argument("--f2-GHz", dest="f2_ghz", type=float, required=True)
    sp.add_argument("--p-start-dBm", dest="p_start_dbm", type=float, default=None)
    sp.add_argument("--p-stop-dBm", dest="p_stop_dbm", type=float, default=None)
    sp.add_argument("--n-power", type=int, default=6)
    common(sp)
    sp.set_defaults(func=cmd_iip3)

    sp = sub.add_parser("compare", help="SIS-vs-device compression comparison")
    sp.add_argument("--config", required=True,
                    help="device config; the SIS twin shares its netlist")
    sp.add_argument("--f-start-GHz", dest="f_start_ghz", type=float, required=True)
    sp.add_argument("--f-stop-GHz", dest="f_stop_ghz", type=float, required=True)
    sp.add_argument("--n-freq", type=int, default=7)
    sp.add_argument("--p-start-dBm", dest="p_start_dbm", type=float, required=True)
    sp.add_argument("--p-stop-dBm", dest="p_stop_dbm", type=float, required=True)
    sp.add_argument("--n-power", type=int, default=9)
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("fit", help="resonance fit of a trace file")
    sp.add_argument("--touchstone")
    sp.add_argument("--csv")
    sp.add_argument("--type", choices=["reflection", "hanger"],
                    default="reflection")
    common(sp)
    sp.set_defaults(func=cmd_fit)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors already.
        return int(exc.code or 0)
    if args.seed is not None:
        np.random.seed(args.seed)
    try:
        return args.func(args)
    except (ConfigError, UsageError, FileNotFoundError) as exc:
        return _emit_error(args.command, exc, EXIT_USAGE)
    except Exception as exc:
        return _emit_error(args.command, exc, EXIT_COMPUTE)


if __name__ == "__main__":
    sys.exit(main())
