"""Linear embedding circuits and their frequency-domain response.

A circuit is an ordered cascade of two-port elements between the excitation
port and the junction reference plane.  Two topologies are supported:

* ``reflection``: one physical port, the element chain ends at the junction
  which closes to ground.  This is the direct-coupled amplifier geometry.
* ``hanger``: a matched through feedline with a side branch hanging from its
  midpoint; the element chain describes the branch (coupling element first,
  junction last to ground).

All element values are strict SI.  Frequencies may be negative (the analytic
continuation used by the harmonic-balance engine); responses then come out
conjugated, as they must for real time-domain signals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .constants import TWO_PI

# Frequencies below this magnitude are treated as DC and nudged off zero so
# reactive elements evaluate without 1/0 (a 1 uHz tail is electrically open
# or short to ~1e-15 relative for any realistic element value).
F_FLOOR = 1e-6


class TopologyError(ValueError):
    """Operation applied to a netlist of the wrong topology."""


class EvaluationError(RuntimeError):
    """Cascade evaluation produced a singular/non-finite result."""


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TlSegment:
    """Ideal TEM transmission-line segment.

    Parameters
    ----------
    z0 : float
        Characteristic impedance in Ohm, > 0.
    length : float
        Physical length in m, >= 0.
    v_ph : float
        Phase velocity in m/s, > 0.
    loss : float, optional
        Attenuation constant in Np/m, >= 0 (default lossless).
    """

    z0: float
    length: float
    v_ph: float
    loss: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.z0) and self.z0 > 0):
            raise ValueError(f"z0 must be finite and > 0, got {self.z0}")
        if not (math.isfinite(self.length) and self.length >= 0):
            raise ValueError(f"length must be finite and >= 0, got {self.length}")
        if not (math.isfinite(self.v_ph) and self.v_ph > 0):
            raise ValueError(f"v_ph must be finite and > 0, got {self.v_ph}")
        if not (math.isfinite(self.loss) and self.loss >= 0):
            raise ValueError(f"loss must be finite and >= 0, got {self.loss}")


@dataclass(frozen=True)
class KineticInductor:
    """Thin-film kinetic inductance, modelled as one series lumped inductor.

    ``length_squares`` is the l/w square count of the film section and
    ``l_sq`` the inductance per square in H.
    """

    length_squares: float
    l_sq: float

    def __post_init__(self):
        if self.length_squares < 0 or self.l_sq < 0:
            raise ValueError("kinetic inductor parameters must be >= 0")

    @property
    def total(self) -> float:
        return self.length_squares * self.l_sq


@dataclass(frozen=True)
class SeriesInductor:
    l: float

    def __post_init__(self):
        if not (math.isfinite(self.l) and self.l >= 0):
            raise ValueError("series inductance must be finite and >= 0")


@dataclass(frozen=True)
class SeriesCapacitor:
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError("series capacitance must be finite and > 0")


@dataclass(frozen=True)
class SeriesResistor:
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValueError("series resistance must be finite and >= 0")


@dataclass(frozen=True)
class ShuntInductor:
    l: float

    def __post_init__(self):
        if not (math.isfinite(self.l) and self.l > 0):
            raise ValueError("shunt inductance must be finite and > 0")


@dataclass(frozen=True)
class ShuntCapacitor:
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 0):
            raise ValueError("shunt capacitance must be finite and >= 0")


@dataclass(frozen=True)
class ShuntResistor:
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r > 0):
            raise ValueError("shunt resistance must be finite and > 0")


@dataclass(frozen=True)
class JunctionPlaceholder:
    """Marks the junction reference plane.

    ``l_j`` is the linear (small-signal) junction inductance used when the
    cascade is solved as a fully linear network (s11/s21).  It may be left
    ``None`` for impedance-at-plane evaluations, which treat the plane as
    open per the series black-box extraction convention.
    """

    l_j: float | None = None

    def __post_init__(self):
        if self.l_j is not None and not (math.isfinite(self.l_j) and self.l_j > 0):
            raise ValueError("junction l_j must be finite and > 0 when given")


Element = Union[
    TlSegment,
    KineticInductor,
    SeriesInductor,
    SeriesCapacitor,
    SeriesResistor,
    ShuntInductor,
    ShuntCapacitor,
    ShuntResistor,
    JunctionPlaceholder,
]

REFLECTION = "reflection"
HANGER = "hanger"


@dataclass(frozen=True)
class Netlist:
    """Ordered element chain from the port (or feedline tap) to the junction."""

    elements: tuple[Element, ...]
    topology: str = REFLECTION
    z_port: float = 50.0

    def __post_init__(self):
        if self.topology not in (REFLECTION, HANGER):
            raise ValueError(f"unknown topology {self.topology!r}")
        # z_port = 0 (shorted port) is allowed for impedance evaluations.
        if not (math.isfinite(self.z_port) and self.z_port >= 0):
            raise ValueError("port impedance must be finite and >= 0")
        junctions = [e for e in self.elements if isinstance(e, JunctionPlaceholder)]
        if len(junctions) != 1:
            raise ValueError(
                f"netlist must contain exactly one junction placeholder, found {len(junctions)}"
            )
        if not isinstance(self.elements[-1], JunctionPlaceholder):
            raise ValueError("junction placeholder must be the last element")
        if self.topology == HANGER:
            first = self.elements[0]
            if not isinstance(first, (SeriesCapacitor, SeriesInductor)):
                raise ValueError(
                    "hanger netlist must start with a series coupling element"
                )

    @property
    def junction(self) -> JunctionPlaceholder:
        return self.elements[-1]

    @property
    def linear_elements(self) -> tuple[Element, ...]:
        return self.elements[:-1]

    def with_junction_inductance(self, l_j: float) -> "Netlist":
        return Netlist(
            self.linear_elements + (JunctionPlaceholder(l_j),),
            self.topology,
            self.z_port,
        )


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform frequency scan in Hz."""

    start: float
    stop: float
    count: int

    def __post_init__(self):
        if not (self.start < self.stop):
            raise ValueError("start must be < stop")
        if self.count < 2:
            raise ValueError("count must be >= 2")

    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


# ---------------------------------------------------------------------------
# ABCD matrices
# ---------------------------------------------------------------------------


def _safe_omega(f):
    """Angular frequency with exact zeros nudged to the DC floor."""
    f = np.asarray(f, dtype=float)
    nudged = np.where(np.abs(f) < F_FLOOR, F_FLOOR, f)
    return TWO_PI * nudged


def abcd_of_segment(seg: TlSegment, f) -> np.ndarray:
    """ABCD matrix of a (lossy) transmission-line segment.

    Parameters
    ----------
    seg : TlSegment
    f : float or array of float
        Frequency in Hz.

    Returns
    -------
    ndarray, shape (..., 2, 2), complex
        [[cosh(gl), Z0 sinh(gl)], [sinh(gl)/Z0, cosh(gl)]] with
        g = loss + j*2*pi*f/v_ph.
    """
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite frequency")
    beta = TWO_PI * f / seg.v_ph
    gl = (seg.loss + 1j * beta) * seg.length
    ch, sh = np.cosh(gl), np.sinh(gl)
    m = np.empty(f.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = ch
    m[..., 0, 1] = seg.z0 * sh
    m[..., 1, 0] = sh / seg.z0
    m[..., 1, 1] = ch
    return m


def _abcd_series(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    m = np.zeros(z.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 1.0
    m[..., 0, 1] = z
    m[..., 1, 1] = 1.0
    return m


def _abcd_shunt(y) -> np.ndarray:
    y = np.asarray(y, dtype=complex)
    m = np.zeros(y.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 1.0
    m[..., 1, 0] = y
    m[..., 1, 1] = 1.0
    return m


def abcd_of_element(el: Element, f) -> np.ndarray:
    """ABCD matrix of any linear element; the junction plane is pass-through."""
    f = np.asarray(f, dtype=float)
    w = _safe_omega(f)
    if isinstance(el, TlSegment):
        return abcd_of_segment(el, f)
    if isinstance(el, KineticInductor):
        return _abcd_series(1j * w * el.total)
    if isinstance(el, SeriesInductor):
        return _abcd_series(1j * w * el.l)
    if isinstance(el, SeriesCapacitor):
        return _abcd_series(1.0 / (1j * w * el.c))
    if isinstance(el, SeriesResistor):
        return _abcd_series(np.full(f.shape, el.r, dtype=complex))
    if isinstance(el, ShuntInductor):
        return _abcd_shunt(1.0 / (1j * w * el.l))
    if isinstance(el, ShuntCapacitor):
        return _abcd_shunt(1j * w * el.c)
    if isinstance(el, ShuntResistor):
        return _abcd_shunt(np.full(f.shape, 1.0 / el.r, dtype=complex))
    if isinstance(el, JunctionPlaceholder):
        return _abcd_series(np.zeros(f.shape, dtype=complex))
    raise TypeError(f"unknown element {el!r}")


def cascade(*matrices) -> np.ndarray:
    """Multiply ABCD matrices left to right (port side first)."""
    out = matrices[0]
    for m in matrices[1:]:
        out = out @ m
    return out


def chain_abcd(elements, f) -> np.ndarray:
    """Cascade ABCD of an element list at frequency array ``f``."""
    f = np.asarray(f, dtype=float)
    out = np.zeros(f.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 1.0
    for el in elements:
        out = out @ abcd_of_element(el, f)
    return out


# ---------------------------------------------------------------------------
# Responses at the junction plane and at the port
# ---------------------------------------------------------------------------


def _check_finite(arr, f, what):
    arr = np.asarray(arr)
    bad = ~np.isfinite(arr)
    if np.any(bad):
        fbad = np.atleast_1d(np.asarray(f, dtype=float))[np.atleast_1d(bad)]
        raise EvaluationError(
            f"singular cascade while evaluating {what} at f = {fbad[:3]} Hz"
        )
    return arr


def thevenin_at_junction(net: Netlist, f):
    """Thevenin equivalent of everything behind the junction plane.

    Returns
    -------
    (v_transfer, z_env) : tuple of complex arrays
        ``v_transfer`` is the open-circuit voltage at the junction plane per
        unit source EMF behind the port impedance; ``z_env`` the impedance
        looking back from the plane, port termination included.
    """
    f = np.asarray(f, dtype=float)
    if net.topology == REFLECTION:
        z_src = net.z_port
        src_divider = 1.0
        elements = net.linear_elements
    else:
        # Matched feedline: the tap node sees half the source EMF behind
        # the two port impedances in parallel.
        z_src = net.z_port / 2.0
        src_divider = 0.5
        elements = net.linear_elements
    m = chain_abcd(elements, f)
    a, b = m[..., 0, 0], m[..., 0, 1]
    c, d = m[..., 1, 0], m[..., 1, 1]
    den = a + c * z_src
    v_transfer = src_divider / den
    z_env = (d * z_src + b) / den
    _check_finite(v_transfer, f, "thevenin transfer")
    _check_finite(z_env, f, "junction-plane impedance")
    return v_transfer, z_env


def impedance_at_junction_plane(net: Netlist, f):
    """Impedance Z(f) seen by the junction looking into the rest of the circuit.

    The junction itself is removed (open at the reference plane); the port
    termination is included.  Input may be scalar or array; output matches.
    """
    _, z_env = thevenin_at_junction(net, f)
    return z_env


def s11(net: Netlist, f, l_j: float | None = None):
    """Port reflection coefficient with the junction as a linear inductor.

    ``l_j`` overrides the inductance stored on the junction placeholder.
    """
    if net.topology != REFLECTION:
        raise TopologyError("s11 requires a reflection netlist")
    if net.z_port <= 0:
        raise ValueError("s11 needs a positive port impedance")
    lj = l_j if l_j is not None else net.junction.l_j
    if lj is None:
        raise ValueError("junction linear inductance required for s11")
    f = np.asarray(f, dtype=float)
    w = _safe_omega(f)
    m = chain_abcd(net.linear_elements, f)
    a, b = m[..., 0, 0], m[..., 0, 1]
    c, d = m[..., 1, 0], m[..., 1, 1]
    z_l = 1j * w * lj
    z_in = (a * z_l + b) / (c * z_l + d)
    gamma = (z_in - net.z_port) / (z_in + net.z_port)
    return _check_finite(gamma, f, "s11")


def s21_hanger(net: Netlist, f, l_j: float | None = None):
    """Feedline transmission past the hanging branch (junction as inductor)."""
    if net.topology != HANGER:
        raise TopologyError("s21_hanger requires a hanger netlist")
    lj = l_j if l_j is not None else net.junction.l_j
    if lj is None:
        raise ValueError("junction linear inductance required for s21")
    f = np.asarray(f, dtype=float)
    w = _safe_omega(f)
    m = chain_abcd(net.linear_elements, f)
    a, b = m[..., 0, 0], m[..., 0, 1]
    c, d = m[..., 1, 0], m[..., 1, 1]
    z_l = 1j * w * lj
    z_branch = (a * z_l + b) / (c * z_l + d)
    _check_finite(z_branch, f, "hanger branch impedance")
    s = 2.0 / (2.0 + net.z_port / z_branch)
    return _check_finite(s, f, "s21")


# ---------------------------------------------------------------------------
# Zero-crossing location
# ---------------------------------------------------------------------------


def find_im_zero_crossings(
    zfunc, grid: FrequencyGrid, direction: str | None = "up", f_tol: float = 1.0
):
    """Locate zeros of Im z(f) on the grid by bracketing and bisection.

    Parameters
    ----------
    zfunc : callable
        Vectorized complex impedance of frequency in Hz.
    grid : FrequencyGrid
        Scan range.
    direction : {"up", "down", None}
        "up" keeps negative-to-positive crossings (series resonances),
        "down" the opposite, None keeps both.
    f_tol : float
        Absolute bisection tolerance in Hz.

    Returns
    -------
    list of float
        Crossing frequencies, ascending.
    """
    f = grid.points()
    im = np.imag(zfunc(f))
    crossings = []
    for i in range(len(f) - 1):
        a, b = im[i], im[i + 1]
        if a == 0.0:
            # Grid point exactly on a zero: classify by neighbours.
            if i > 0 and np.sign(im[i - 1]) != np.sign(b):
                crossings.append((f[i], np.sign(b) - np.sign(im[i - 1])))
            continue
        if np.sign(a) != np.sign(b) and b != 0.0:
            lo, hi = f[i], f[i + 1]
            va = a
            while hi - lo > f_tol:
                mid = 0.5 * (lo + hi)
                vm = np.imag(zfunc(np.array([mid])))[0]
                if vm == 0.0:
                    lo = hi = mid
                    break
                if np.sign(vm) == np.sign(va):
                    lo, va = mid, vm
                else:
                    hi = mid
            crossings.append((0.5 * (lo + hi), np.sign(b) - np.sign(a)))
    if direction == "up":
        keep = [fc for fc, s in crossings if s > 0]
    elif direction == "down":
        keep = [fc for fc, s in crossings if s < 0]
    else:
        keep = [fc for fc, _ in crossings]
    return sorted(keep)
