"""Time-domain oracle for the harmonic-balance engine.

Netlists made only of series lumped elements reduce to one driven loop

    (L_lin + L(i)) di/dt = v_s(t) - R_tot i - q/C_ser,   dq/dt = i

which is integrated to steady state with an implicit stiff scheme; harmonic
amplitudes then come from an FFT over exact whole periods of the drive.
Tones must be commensurate so a common period exists.  This route shares
no code with the spectral solver and serves as its independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from .junction import InductancePolynomial
from .netlist import (
    JunctionPlaceholder,
    KineticInductor,
    Netlist,
    SeriesCapacitor,
    SeriesInductor,
    SeriesResistor,
)


class ReductionError(ValueError):
    """Netlist is not a pure series loop; no state-space form available."""


class StiffnessError(RuntimeError):
    """Integrator failed (step-size collapse or similar)."""


@dataclass(frozen=True)
class SeriesLoop:
    """Canonical series circuit: R (port included), optional C, linear L."""

    r_total: float
    c_series: float  # inf when no capacitor present
    l_linear: float
    z_port: float

    @property
    def inv_c(self) -> float:
        return 0.0 if math.isinf(self.c_series) else 1.0 / self.c_series


def reduce_to_series_loop(net: Netlist) -> SeriesLoop:
    """Collapse a series-only reflection netlist to its loop parameters."""
    if net.topology != "reflection":
        raise ReductionError("transient oracle handles reflection netlists only")
    if net.z_port <= 0:
        raise ReductionError("transient oracle needs a resistive port")
    r = net.z_port
    inv_c = 0.0
    l_lin = 0.0
    for el in net.linear_elements:
        if isinstance(el, SeriesResistor):
            r += el.r
        elif isinstance(el, SeriesInductor):
            l_lin += el.l
        elif isinstance(el, KineticInductor):
            l_lin += el.total
        elif isinstance(el, SeriesCapacitor):
            inv_c += 1.0 / el.c
        elif isinstance(el, JunctionPlaceholder):
            pass
        else:
            raise ReductionError(
                f"element {type(el).__name__} has no series state-space form"
            )
    c_ser = math.inf if inv_c == 0.0 else 1.0 / inv_c
    return SeriesLoop(r_total=r, c_series=c_ser, l_linear=l_lin, z_port=net.z_port)


def _common_period(freqs, max_denominator=10**6, max_period_ratio=1e4) -> float:
    """Common period of commensurate tones via rational frequency ratios.

    Rejects tone sets whose common period exceeds ``max_period_ratio``
    periods of the fastest tone; integrating such sets to steady state is
    impractical and usually signals unintended incommensurate tones.
    """
    base = freqs[0]
    fracs = [Fraction(f / base).limit_denominator(max_denominator) for f in freqs]
    for f, fr in zip(freqs, fracs):
        if abs(float(fr) - f / base) > 1e-9:
            raise ValueError(
                f"tones are not commensurate within 1e-9 relative: {freqs}"
            )
    denom_lcm = np.lcm.reduce([fr.denominator for fr in fracs])
    num_gcd = np.gcd.reduce([fr.numerator * denom_lcm // fr.denominator for fr in fracs])
    f_base = base * num_gcd / denom_lcm
    period = 1.0 / f_base
    if period * max(freqs) > max_period_ratio:
        raise ValueError(
            f"common period spans {period * max(freqs):.3g} tone periods; "
            f"tones effectively incommensurate: {freqs}"
        )
    return period


@dataclass
class TransientResult:
    """Steady-state waveform and its harmonic content."""

    time: np.ndarray  # one common period, s
    current: np.ndarray  # loop current samples, A
    harmonic_freqs: np.ndarray  # Hz, the FFT bins up to max_harmonic
    harmonic_amplitudes: np.ndarray  # complex phasors, i = Re sum I exp(jwt)
    source_power: float  # mean v_s * i over the window, W
    dissipated_power: float  # mean R i^2, W
    settle_error: float  # relative window-to-window amplitude drift

    def amplitude_at(self, freq_hz: float) -> complex:
        idx = int(np.argmin(np.abs(self.harmonic_freqs - freq_hz)))
        if abs(self.harmonic_freqs[idx] - freq_hz) > 1e-3 * max(freq_hz, 1.0):
            raise ValueError(f"{freq_hz} Hz is not on the harmonic grid")
        return self.harmonic_amplitudes[idx]


def transient_oracle(
    net: Netlist,
    junction: InductancePolynomial,
    tones,
    *,
    settle_periods: int | None = None,
    samples_per_period: int = 4096,
    max_harmonic_hz: float | None = None,
    rtol: float = 1e-10,
    settle_target: float = 1e-4,
    max_extra_rounds: int = 6,
) -> TransientResult:
    """Integrate the series loop to steady state and extract harmonics.

    Parameters
    ----------
    net, junction : circuit under test (series-reducible netlist).
    tones : sequence of hb.Tone
        Commensurate excitation tones (available power at the port).
    settle_periods : int, optional
        Transient-decay allowance; estimated from the loop time constant
        when omitted.
    samples_per_period : int
        FFT record length per common period.
    settle_target : float
        Required window-to-window relative drift of the dominant harmonic.

    Raises
    ------
    ReductionError, StiffnessError
    """
    loop = reduce_to_series_loop(net)
    freqs = np.array([t.freq for t in tones])
    amps = np.array([math.sqrt(8.0 * loop.z_port * t.power) for t in tones])
    phases = np.array([t.phase for t in tones])
    period = _common_period(freqs)

    def v_source(t):
        return np.sum(amps * np.cos(2 * np.pi * freqs * t + phases))

    l0_total = loop.l_linear + junction.l0

    def rhs(t, y):
        q, i = y
        l_now = loop.l_linear + junction.inductance(i)
        di = (v_source(t) - loop.r_total * i - q * loop.inv_c) / l_now
        return (i, di)

    # Linear estimate of the response sets tolerances and the settle time.
    w_ref = 2 * np.pi * freqs
    z_ref = loop.r_total + 1j * w_ref * l0_total + loop.inv_c / (1j * w_ref)
    i_est = float(np.max(np.abs(amps / z_ref)))
    tau = 2.0 * l0_total / loop.r_total
    if settle_periods is None:
        settle_periods = int(np.ceil(17.0 * tau / period)) + 2

    atol_i = max(rtol * i_est, 1e-18)
    atol_q = atol_i * period / (2 * np.pi)

    def integrate(y0, t0, t1, t_eval=None):
        sol = solve_ivp(
            rhs,
            (t0, t1),
            y0,
            method="Radau",
            rtol=rtol,
            atol=(atol_q, atol_i),
            t_eval=t_eval,
            max_step=period / 16.0,
        )
        if not sol.success:
            raise StiffnessError(f"integrator failed: {sol.message}")
        return sol

    # Settle, then record two consecutive periods and compare.
    t_now = settle_periods * period
    sol = integrate((0.0, 0.0), 0.0, t_now)
    y_now = sol.y[:, -1]

    def record(y0, t0):
        t_eval = t0 + period * np.arange(samples_per_period) / samples_per_period
        sol = integrate(y0, t0, t0 + period, t_eval=t_eval)
        y_end = integrate(sol.y[:, -1], t_eval[-1], t0 + period).y[:, -1]
        return t_eval, sol.y[1], y_end

    prev_spec = None
    settle_error = np.inf
    extra_chunk = max(settle_periods // 2, 2)
    for round_idx in range(max_extra_rounds):
        t_eval, i_samples, y_now = record(y_now, t_now)
        t_now += period
        spec = np.fft.rfft(i_samples) / samples_per_period
        if prev_spec is not None:
            dom = np.argmax(np.abs(spec[1:])) + 1
            settle_error = abs(spec[dom] - prev_spec[dom]) / abs(spec[dom])
            if settle_error < settle_target:
                break
        prev_spec = spec
        if round_idx >= 1:
            # Slow ring-down (e.g. near a fold): grant extra decay time
            # between comparison windows instead of single periods.
            sol = integrate(y_now, t_now, t_now + extra_chunk * period)
            y_now = sol.y[:, -1]
            t_now += extra_chunk * period
            extra_chunk *= 2
    else:
        raise StiffnessError(
            f"steady state not reached: window drift {settle_error:.2e} "
            f"exceeds {settle_target:.0e}"
        )

    # Phasors referenced to the source time origin: shift by t0 per bin.
    bins = np.arange(spec.size)
    bin_freqs = bins / period
    t0 = t_eval[0]
    phasors = 2.0 * spec * np.exp(-1j * 2 * np.pi * bin_freqs * t0)
    phasors[0] = spec[0].real * np.exp(0j)
    if max_harmonic_hz is None:
        max_harmonic_hz = 10.5 * float(np.max(freqs))
    keep = bin_freqs <= max_harmonic_hz
    v_samples = np.array([v_source(t) for t in t_eval])
    p_src = float(np.mean(v_samples * i_samples))
    p_diss = float(np.mean(loop.r_total * i_samples**2))
    return TransientResult(
        time=t_eval,
        current=i_samples,
        harmonic_freqs=bin_freqs[keep],
        harmonic_amplitudes=phasors[keep],
        source_power=p_src,
        dissipated_power=p_diss,
        settle_error=float(settle_error),
    )
