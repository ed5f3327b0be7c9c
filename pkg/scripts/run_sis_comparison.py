"""Compression comparison: weakly nonlinear junction vs its SIS twin.

Both amplifiers share the embedding circuit; only the junction's
current-phase relation differs. Each is tuned to the lowest pump power
with 20-22 dB small-signal gain, then probe-swept to its 1 dB compression
point. The inter-junction P_1dB delta isolates the effect of the quartic
ratio on dynamic range.

Run:  python scripts/run_sis_comparison.py [out_dir]
"""

import json
import os
import sys

import numpy as np

from kerramp import pipeline
from kerramp.config import load_device_config

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs",
                      "device_a_like.cfg")


def main(out_dir="out_comparison"):
    os.makedirs(out_dir, exist_ok=True)
    spec = pipeline.spec_from_config(load_device_config(CONFIG))
    report = pipeline.compare_junctions(
        spec,
        pump_freqs=np.linspace(7.483e9, 7.491e9, 5),
        pump_powers_dbm=np.linspace(-88.0, -84.2, 6),
    )
    for label, entry in report.entries.items():
        print(f"{label}: pump {entry.pump_freq/1e9:.4f} GHz "
              f"{entry.pump_power_dbm:.2f} dBm, gain {entry.gain_db:.2f} dB, "
              f"P_1dB {entry.p_1db_dbm} dBm")
    print(f"delta P_1dB = {report.delta_p1db_db:.2f} dB")
    payload = report.to_dict()
    payload["manifest"] = pipeline.run_manifest([CONFIG])
    with open(os.path.join(out_dir, "comparison.json"), "w") as fh:
        json.dump(payload, fh, indent=2)
    print(f"wrote {out_dir}/comparison.json")


if __name__ == "__main__":
    main(*sys.argv[1:2])
