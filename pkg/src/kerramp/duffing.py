"""Driven Kerr (Duffing) resonator analytics.

The single mode obeys H/hbar = w_r a'a + K a'^2 a^2, so a drive populating
the resonator with n photons shifts the resonance by Delta f = 2 (K/2pi) n.
Steady states under a coherent drive solve the cubic

    n [ (Delta - 2 K n)^2 + (kappa/2)^2 ] = kappa_ext * P / (hbar w_d A)

with a factor 1/2 on the right for symmetric hanger coupling.  Everything
here is a pure function of the mode/drive parameters; the harmonic-balance
engine provides the independent circuit-level route to the same physics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR, TWO_PI

REFLECTION = "reflection"
HANGER = "hanger"


@dataclass(frozen=True)
class ModeParams:
    """Linear mode parameters plus the signed Kerr.

    ``kerr_hz`` is K/2pi in Hz; softening junctions give negative values.
    Rates ``kappa`` and ``kappa_ext`` are angular (rad/s).
    """

    f_r: float
    kappa: float
    kappa_ext: float
    kerr_hz: float = 0.0
    topology: str = REFLECTION

    def __post_init__(self):
        if self.f_r <= 0:
            raise ValueError("f_r must be > 0")
        if not (0.0 < self.kappa_ext <= self.kappa):
            raise ValueError("need 0 < kappa_ext <= kappa")
        if self.topology not in (REFLECTION, HANGER):
            raise ValueError(f"unknown topology {self.topology!r}")

    @property
    def kerr_rad(self) -> float:
        return TWO_PI * self.kerr_hz


@dataclass(frozen=True)
class DriveSpec:
    """Generator tone: power at the generator, frequency, line attenuation.

    ``attenuation`` is the linear power factor A >= 1 between generator and
    device; use 1.0 when quoting powers at the device plane.
    """

    p_g: float
    f_d: float
    attenuation: float = 1.0

    def __post_init__(self):
        if self.p_g < 0:
            raise ValueError("drive power must be >= 0")
        if self.f_d <= 0:
            raise ValueError("drive frequency must be > 0")
        if self.attenuation < 1.0:
            raise ValueError("attenuation is a linear power factor >= 1")


def _topology_factor(mode: ModeParams) -> float:
    return 0.5 if mode.topology == HANGER else 1.0


def _drive_strength(mode: ModeParams, drive: DriveSpec) -> float:
    """kappa_ext * P / (hbar w_d A), times the hanger 1/2 where applicable."""
    w_d = TWO_PI * drive.f_d
    return (
        _topology_factor(mode)
        * mode.kappa_ext
        * drive.p_g
        / (HBAR * w_d * drive.attenuation)
    )


def photon_number(mode: ModeParams, drive: DriveSpec) -> float:
    """Linear-response intra-cavity photon number.

    n = kappa_ext / (Delta^2 + (kappa/2)^2) * P / (hbar w_d A), halved for
    hanger topology; Delta = 2pi (f_d - f_r).
    """
    delta = TWO_PI * (drive.f_d - mode.f_r)
    return _drive_strength(mode, drive) / (delta**2 + (mode.kappa / 2.0) ** 2)


def steady_state_occupation(mode: ModeParams, drive: DriveSpec) -> np.ndarray:
    """Real nonnegative roots of the Duffing steady-state cubic, ascending.

    One root below the bifurcation threshold, three above (outer two
    stable).  With K = 0 the single root equals ``photon_number``.
    """
    delta = TWO_PI * (drive.f_d - mode.f_r)
    k = mode.kerr_rad
    s = _drive_strength(mode, drive)
    half_k2 = (mode.kappa / 2.0) ** 2
    if k == 0.0:
        return np.array([s / (delta**2 + half_k2)])
    # 4 K^2 n^3 - 4 K Delta n^2 + (Delta^2 + (kappa/2)^2) n - s = 0
    coeffs = [4.0 * k**2, -4.0 * k * delta, delta**2 + half_k2, -s]
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) < 1e-9 * np.maximum(np.abs(roots.real), 1.0)].real
    real = np.sort(real[real >= -1e-30])
    real = np.clip(real, 0.0, None)
    # Polish each root with one Newton step to tighten the residual.
    poly = np.polynomial.polynomial.Polynomial(coeffs[::-1])
    dpoly = poly.deriv()
    polished = []
    for n in real:
        d = dpoly(n)
        if d != 0.0:
            n = n - poly(n) / d
        polished.append(max(n, 0.0))
    return np.array(sorted(polished))


def occupation_stability(mode: ModeParams, drive: DriveSpec, roots) -> np.ndarray:
    """Stability flags for steady-state roots via the response-slope sign.

    On the multivalued branch structure the outer roots are stable and the
    middle one is not; sweep-direction hysteresis between the stable
    branches is the caller's concern.
    """
    delta = TWO_PI * (drive.f_d - mode.f_r)
    k = mode.kerr_rad
    half_k2 = (mode.kappa / 2.0) ** 2
    roots = np.asarray(roots, dtype=float)

    def ds_dn(n):
        return (delta - 2.0 * k * n) ** 2 + half_k2 + n * 2.0 * (
            delta - 2.0 * k * n
        ) * (-2.0 * k)

    return np.array([ds_dn(n) > 0 for n in roots])


def occupation_residual(mode: ModeParams, drive: DriveSpec, n) -> np.ndarray:
    """Relative cubic residual of candidate occupations (diagnostic)."""
    delta = TWO_PI * (drive.f_d - mode.f_r)
    k = mode.kerr_rad
    s = _drive_strength(mode, drive)
    n = np.asarray(n, dtype=float)
    lhs = n * ((delta - 2.0 * k * n) ** 2 + (mode.kappa / 2.0) ** 2)
    scale = max(abs(s), 1e-300)
    return np.abs(lhs - s) / scale


def stark_shift(mode: ModeParams, n_bar) -> np.ndarray:
    """Resonance shift Delta f_r = 2 (K/2pi) n in Hz (signed)."""
    n_bar = np.asarray(n_bar, dtype=float)
    if np.any(n_bar < 0):
        raise ValueError("photon number must be >= 0")
    return 2.0 * mode.kerr_hz * n_bar


def fit_kerr_from_stark(data) -> tuple[float, float]:
    """Ordinary least-squares Kerr estimate from (n, Delta f_r) pairs.

    Fits a line with intercept and returns (slope/2, std error of slope/2).
    The shift is only linear well below bifurcation; restrict sweeps to
    occupations under half of bifurcation_threshold's n_crit.

    Parameters
    ----------
    data : sequence of (float, float)
        Photon number and frequency shift in Hz.

    Returns
    -------
    (kerr_hz, kerr_stderr_hz)
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise ValueError("need at least 3 (n, shift) points")
    x, y = arr[:, 0], arr[:, 1]
    if np.ptp(x) == 0.0:
        raise ValueError("degenerate abscissae: photon numbers all equal")
    n = x.size
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    dof = max(n - 2, 1)
    sigma2 = np.sum(resid**2) / dof
    slope_se = math.sqrt(sigma2 / sxx)
    return slope / 2.0, slope_se / 2.0


def kerr_from_iip3(f0: float, kappa: float, iip3: float) -> float:
    """|K|/2pi from the input third-order intercept: K = hbar w0 kappa^2 / (8 IIP3)."""
    if f0 <= 0 or kappa <= 0:
        raise ValueError("f0 and kappa must be > 0")
    if iip3 <= 0:
        raise ValueError("IIP3 must be > 0")
    w0 = TWO_PI * f0
    return HBAR * w0 * kappa**2 / (8.0 * iip3) / TWO_PI


class NoBifurcationError(ValueError):
    """Linear mode (K = 0): the response never becomes multivalued."""


def bifurcation_threshold(mode: ModeParams) -> tuple[float, float, float]:
    """Onset of bistability of the driven Duffing mode.

    Returns
    -------
    (n_crit, delta_crit, p_crit)
        Critical occupation, the detuning (rad/s) at which three roots
        first appear, and the device-plane drive power in W there.

    Notes
    -----
    The cubic develops a double root when d/dn of the response first
    vanishes: |Delta| = sqrt(3) kappa / 2 with Delta on the same side as
    the Kerr shift (negative for softening K < 0), n_crit = Delta/(3K) =
    kappa / (2 sqrt(3) |K|), and the drive term there is
    kappa^3 / (6 sqrt(3) |K|).
    """
    k = mode.kerr_rad
    if k == 0.0:
        raise NoBifurcationError("K = 0: no bifurcation")
    delta_crit = math.copysign(math.sqrt(3.0) * mode.kappa / 2.0, k)
    n_crit = delta_crit / (3.0 * k)
    s_crit = mode.kappa**3 / (6.0 * math.sqrt(3.0) * abs(k))
    f_d = mode.f_r + delta_crit / TWO_PI
    w_d = TWO_PI * f_d
    p_crit = s_crit * HBAR * w_d / (mode.kappa_ext * _topology_factor(mode))
    return n_crit, delta_crit, p_crit
