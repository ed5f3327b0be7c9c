"""Characterize the direct-coupled amplifier end to end.

Reproduces the bench sequence on the bundled reflection device: linear
prediction, a pump power/frequency gain map, the hunt for a 20-22 dB
operating point, the probe-compression sweep, and a Touchstone export of
the pumped small-signal response.

Run:  python scripts/run_amplifier_characterization.py [out_dir]
"""

import json
import os
import sys

import numpy as np

from kerramp import hb, pipeline, touchstone
from kerramp.config import load_device_config
from kerramp.constants import dbm_to_watt

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs",
                      "device_a_like.cfg")


def main(out_dir="out_device_a"):
    os.makedirs(out_dir, exist_ok=True)
    spec = pipeline.spec_from_config(load_device_config(CONFIG))

    pred = pipeline.predict_device(spec)
    print("prediction:")
    print(f"  f_r = {pred.f_r_fit/1e9:.4f} GHz, kappa/2pi = "
          f"{pred.kappa_fit/2/np.pi/1e6:.2f} MHz, p = {pred.extraction.p:.3f}, "
          f"K/2pi = {pred.extraction.kerr_signed_hz:.1f} Hz")

    result = pipeline.tune_and_compress(
        spec,
        pump_freqs=np.linspace(7.483e9, 7.491e9, 5),
        pump_powers_dbm=np.linspace(-88.0, -84.2, 6),
    )
    print(f"operating point: {result.pump_freq/1e9:.4f} GHz, "
          f"{result.pump_power_dbm:.2f} dBm, gain {result.gain_db:.2f} dB")
    if result.compression is not None:
        print(f"P_1dB = {result.p_1db_dbm:.2f} dBm "
              f"(small-signal {result.compression.gain_small_db:.2f} dB)")
    else:
        print(f"compression failed: {result.compression_error}")

    gm = result.gain_map
    touchstone.write_csv_matrix(
        os.path.join(out_dir, "gain_map.csv"),
        gm.pump_powers_dbm, gm.pump_freqs,
        np.where(gm.failed, np.nan, gm.gain_db),
        row_label="pump_power_dbm", col_label="pump_freq_hz",
        cell_label="gain_db (NaN = solver failure)",
    )

    pump = hb.Tone(result.pump_freq, dbm_to_watt(result.pump_power_dbm))
    probe = result.pump_freq + np.linspace(-15e6, 15e6, 61)
    probe = probe[np.abs(probe - result.pump_freq) > 5e4]
    gamma = hb.pumped_reflection(
        spec.resolved_netlist(), spec.hb_polynomial(), pump, probe
    )
    touchstone.write_touchstone(
        os.path.join(out_dir, "pumped_s11.s1p"), probe, gamma,
        comment=f"pump {pump.freq/1e9:.6f} GHz {result.pump_power_dbm:.2f} dBm",
    )
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump({**result.to_dict(), **pred.to_dict()}, fh, indent=2)
    print(f"wrote {out_dir}/gain_map.csv, pumped_s11.s1p, summary.json")


if __name__ == "__main__":
    main(*sys.argv[1:2])
