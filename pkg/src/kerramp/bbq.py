"""Single-mode black-box extraction and Kerr prediction.

The impedance seen by the junction (plane open, port terminated) is fit to
a series RLC around its series resonance: the zero of Im Z gives omega0,
the slope there gives L through Im Z'(omega0) = 2 L, then C = 1/(omega0^2 L)
and R = Re Z(omega0).  The junction participation, mode charging energy and
quartic-ratio-weighted Kerr follow:

    p = Lj / (Lj + L)
    E_C = e^2 / (2 C)
    K / 2pi = (c4/c2) p^3 (E_C / h)

Softening junctions shift the resonance down with photon number, so the
physical Kerr is negative; extractions report the magnitude plus a sign
flag.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .constants import E_CHARGE, PLANCK
from .netlist import FrequencyGrid, find_im_zero_crossings


class ModeCountError(RuntimeError):
    """Zero or several Im Z crossings on the scan: not a single series mode."""


class NotSeriesResonanceError(RuntimeError):
    """Extracted inductance came out non-positive."""


@dataclass(frozen=True)
class SeriesRlcExtraction:
    """Series-RLC mode parameters plus the derived junction quantities."""

    omega0: float  # rad/s
    l: float  # H
    c: float  # F
    r: float  # Ohm
    p: float  # junction participation, dimensionless
    e_c: float  # charging energy, J
    kerr_hz: float  # |K|/2pi in Hz
    softening: bool = True  # True: physical Kerr is negative

    def __post_init__(self):
        if self.l <= 0 or self.c <= 0:
            raise ValueError("extracted L and C must be > 0")
        if not (0.0 < self.p <= 1.0):
            raise ValueError("participation must lie in (0, 1]")
        if self.e_c <= 0:
            raise ValueError("charging energy must be > 0")

    @property
    def f0(self) -> float:
        return self.omega0 / (2.0 * math.pi)

    @property
    def e_c_over_h(self) -> float:
        return self.e_c / PLANCK

    @property
    def kerr_signed_hz(self) -> float:
        return -self.kerr_hz if self.softening else self.kerr_hz

    def to_dict(self) -> dict:
        return {
            "omega0_rad_per_s": self.omega0,
            "f0_hz": self.f0,
            "l_h": self.l,
            "c_f": self.c,
            "r_ohm": self.r,
            "participation": self.p,
            "e_c_joule": self.e_c,
            "e_c_over_h_hz": self.e_c_over_h,
            "kerr_magnitude_hz": self.kerr_hz,
            "kerr_sign": -1 if self.softening else 1,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _im_z_derivative(zfunc, omega0: float) -> float:
    """d Im Z / d omega by Richardson-extrapolated 5-point central difference."""

    def five_point(h):
        w = omega0 + h * np.array([-2.0, -1.0, 1.0, 2.0])
        v = np.imag(zfunc(w / (2.0 * math.pi)))
        return (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h)

    h = omega0 * 1e-6
    d1 = five_point(h)
    d2 = five_point(h / 2.0)
    return (16.0 * d2 - d1) / 15.0


def extract_series_rlc(zfunc, grid: FrequencyGrid) -> tuple[float, float, float, float]:
    """Extract (omega0, L, C, R) from an impedance function.

    Parameters
    ----------
    zfunc : callable
        Vectorized complex impedance of frequency in Hz.
    grid : FrequencyGrid
        Scan used to bracket the series resonance; Im Z must cross zero
        upward exactly once on it.

    Returns
    -------
    (omega0, l, c, r)

    Raises
    ------
    ModeCountError
        If the scan shows zero or multiple crossings (of either sign).
    NotSeriesResonanceError
        If the local slope gives a non-positive inductance.
    """
    all_crossings = find_im_zero_crossings(zfunc, grid, direction=None)
    up = find_im_zero_crossings(zfunc, grid, direction="up")
    if len(all_crossings) != 1 or len(up) != 1:
        raise ModeCountError(
            f"expected a single upward Im Z crossing on the grid, found "
            f"{len(up)} upward of {len(all_crossings)} total; single-mode "
            f"extraction needs a narrower scan or a cleaner circuit"
        )
    f0 = up[0]
    omega0 = 2.0 * math.pi * f0
    l = _im_z_derivative(zfunc, omega0) / 2.0
    if l <= 0:
        raise NotSeriesResonanceError(
            f"Im Z'(omega0)/2 = {l:.4g} H is not a series resonance"
        )
    c = 1.0 / (omega0**2 * l)
    r = float(np.real(zfunc(np.array([f0]))[0]))
    return omega0, l, c, r


def extract_series_rlc_from_samples(
    freqs_hz: np.ndarray, z: np.ndarray
) -> tuple[float, float, float, float]:
    """Series-RLC extraction from sampled impedance data (e.g. Touchstone).

    A cubic spline interpolant stands in for the analytic impedance; the
    samples must be dense enough across the resonance for its derivative
    to be trustworthy.
    """
    from scipy.interpolate import CubicSpline

    freqs_hz = np.asarray(freqs_hz, dtype=float)
    z = np.asarray(z, dtype=complex)
    if freqs_hz.ndim != 1 or freqs_hz.size < 8:
        raise ValueError("need at least 8 impedance samples")
    if np.any(np.diff(freqs_hz) <= 0):
        raise ValueError("frequencies must be strictly increasing")
    sre = CubicSpline(freqs_hz, z.real)
    sim = CubicSpline(freqs_hz, z.imag)

    def zfunc(f):
        return sre(f) + 1j * sim(f)

    grid = FrequencyGrid(freqs_hz[0], freqs_hz[-1], freqs_hz.size)
    return extract_series_rlc(zfunc, grid)


def participation(l_j: float, l: float) -> float:
    """Junction inductive participation p = Lj / (Lj + L)."""
    if l_j <= 0 or l <= 0:
        raise ValueError("inductances must be > 0")
    return l_j / (l_j + l)


def charging_energy(c: float) -> float:
    """Mode charging energy e^2 / (2 C) in J."""
    if c <= 0:
        raise ValueError("capacitance must be > 0")
    return E_CHARGE**2 / (2.0 * c)


def charging_energy_over_h(c: float) -> float:
    """E_C / h in Hz, the form entering the Kerr prediction."""
    return charging_energy(c) / PLANCK


def predict_kerr(c4_over_c2: float, p: float, e_c_over_h: float) -> float:
    """Predicted |K|/2pi in Hz from the quartic ratio, participation and E_C/h."""
    if c4_over_c2 < 0 or p < 0 or e_c_over_h < 0:
        raise ValueError("inputs must be >= 0")
    return c4_over_c2 * p**3 * e_c_over_h


def infer_c4_ratio(kerr_hz: float, p: float, e_c_over_h: float) -> float:
    """Exact algebraic inverse of predict_kerr."""
    if kerr_hz <= 0:
        raise ValueError("measured Kerr magnitude must be > 0")
    if p <= 0 or e_c_over_h <= 0:
        raise ValueError("participation and charging energy must be > 0")
    return kerr_hz / (p**3 * e_c_over_h)


def extraction_with_junction(
    omega0: float, l: float, c: float, r: float, l_j: float, c4_over_c2: float
) -> SeriesRlcExtraction:
    """Assemble the full extraction record for a given junction."""
    p = participation(l_j, l)
    e_c = charging_energy(c)
    kerr = predict_kerr(c4_over_c2, p, e_c / PLANCK)
    return SeriesRlcExtraction(
        omega0=omega0, l=l, c=c, r=r, p=p, e_c=e_c, kerr_hz=kerr, softening=True
    )


# ---------------------------------------------------------------------------
# Published-value consistency checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyFlag:
    """Result of cross-checking published numbers against first principles."""

    quantity: str
    computed: float
    published: float
    rel_deviation: float
    consistent: bool

    def describe(self) -> str:
        verdict = "consistent" if self.consistent else "INCONSISTENT"
        return (
            f"{self.quantity}: computed {self.computed:.6g} vs published "
            f"{self.published:.6g} ({100 * self.rel_deviation:.1f}% off) -> {verdict}"
        )


def check_participation_triple(
    l_j: float, l: float, p_published: float, rtol: float = 0.05
) -> ConsistencyFlag:
    """Does p = Lj/(Lj+L) reproduce a published participation?"""
    p_calc = participation(l_j, l)
    dev = abs(p_calc - p_published) / p_published
    return ConsistencyFlag("participation", p_calc, p_published, dev, dev <= rtol)


def check_charging_energy(
    c: float, e_c_over_h_published: float, rtol: float = 0.05
) -> ConsistencyFlag:
    """Does e^2/2C reproduce a published E_C/h?"""
    calc = charging_energy_over_h(c)
    dev = abs(calc - e_c_over_h_published) / e_c_over_h_published
    return ConsistencyFlag(
        "charging_energy_over_h", calc, e_c_over_h_published, dev, dev <= rtol
    )
