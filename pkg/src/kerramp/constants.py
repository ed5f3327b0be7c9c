"""Physical constants and unit helpers.

Everything internal to the package is strict SI (Hz, H, F, Ohm, W, J, rad).
dBm and GHz conversions exist only for interface code.
"""

import numpy as np
from scipy.constants import e as E_CHARGE
from scipy.constants import h as PLANCK
from scipy.constants import hbar as HBAR

# Reduced flux quantum hbar / 2e, in Wb.
PHI0 = HBAR / (2.0 * E_CHARGE)

TWO_PI = 2.0 * np.pi


def dbm_to_watt(p_dbm):
    return 1e-3 * 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def watt_to_dbm(p_w):
    p_w = np.asarray(p_w, dtype=float)
    return 10.0 * np.log10(p_w / 1e-3)


def db(x):
    """Power ratio in dB."""
    return 10.0 * np.log10(np.asarray(x, dtype=float))
