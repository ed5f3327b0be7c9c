"""Multi-tone harmonic balance for circuits with one nonlinear inductor.

The linear embedding circuit is reduced to its Thevenin equivalent at the
junction plane, so the only nonlinear unknowns are the spectral components
of the junction branch current on a truncated grid of tone mixing products.
At each retained harmonic k (frequency f_k = k . f_tones):

    I_k = Y_env(f_k) * ( V_oc,k - j w_k Phi_k[i] )

where Phi_k is the Fourier component of the inductor flux Phi(i(t)),
evaluated by sampling i(t) on an alias-free multidimensional time grid and
transforming back (the standard harmonic-balance splitting).  The residual
of this fixed point, in amperes, is driven below tolerance by a damped
Newton iteration with an analytic Jacobian assembled from the spectrum of
the differential inductance L(i(t)); drive-amplitude continuation takes
over when a cold start fails near bifurcation.

Derived measurements (gain with pump on/off, 1 dB compression, two-tone
third-order intercept) are phrased exactly as the bench procedures they
mimic and operate on port waves a_k, b_k reconstructed from the solved
junction spectrum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len

from .constants import dbm_to_watt, watt_to_dbm
from .junction import InductancePolynomial
from .netlist import REFLECTION, Netlist, chain_abcd, thevenin_at_junction
from .transient import transient_oracle  # re-export: the independent oracle

__all__ = [
    "Tone",
    "ToneSet",
    "HbSolution",
    "GainMap",
    "ConvergenceError",
    "OverdriveError",
    "CompressionNotFoundError",
    "ThirdOrderFloorError",
    "solve",
    "gain",
    "gain_map",
    "p1db",
    "iip3",
    "transient_oracle",
]


class ConvergenceError(RuntimeError):
    """Newton iteration failed; carries the final residual in A."""

    def __init__(self, message, residual=math.nan, iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class OverdriveError(RuntimeError):
    """Solution current exceeded the polynomial fit domain."""


class CompressionNotFoundError(RuntimeError):
    """No 1 dB gain drop inside the probe power sweep."""


class ThirdOrderFloorError(RuntimeError):
    """Third-order products indistinguishable from the numerical floor."""


@dataclass(frozen=True)
class Tone:
    """One excitation: frequency (Hz), available power at the port (W), phase."""

    freq: float
    power: float
    phase: float = 0.0

    def __post_init__(self):
        if self.freq <= 0:
            raise ValueError("tone frequency must be > 0")
        if self.power < 0:
            raise ValueError("tone power must be >= 0")


@dataclass(frozen=True)
class ToneSet:
    """Excitation tones plus the mixing-product truncation.

    ``truncation`` bounds the total order |k1| + |k2| + ...; ``axis_caps``
    optionally tightens the per-tone order (useful when one tone is a weak
    probe whose higher harmonics are irrelevant).
    """

    tones: tuple[Tone, ...]
    truncation: int = 7
    axis_caps: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.tones) < 1:
            raise ValueError("need at least one tone")
        freqs = [t.freq for t in self.tones]
        if len(set(freqs)) != len(freqs):
            raise ValueError("tone frequencies must be pairwise distinct")
        if self.truncation < 3:
            raise ValueError("truncation must be >= 3")
        if self.axis_caps is not None and len(self.axis_caps) != len(self.tones):
            raise ValueError("axis_caps length must match tone count")

    @property
    def caps(self) -> tuple[int, ...]:
        if self.axis_caps is None:
            return tuple(self.truncation for _ in self.tones)
        return tuple(min(c, self.truncation) for c in self.axis_caps)


class _HarmonicGrid:
    """Index lattice of retained mixing products and its FFT layout."""

    def __init__(self, toneset: ToneSet, poly_degree: int):
        self.base_freqs = np.array([t.freq for t in toneset.tones])
        self.ndim = len(toneset.tones)
        caps = toneset.caps
        trunc = toneset.truncation
        # Enumerate the half lattice: k = 0 and all k whose first nonzero
        # component is positive (the conjugate bins are implied).
        ranges = [range(-c, c + 1) for c in caps]
        half = []

        def canonical(k):
            for v in k:
                if v != 0:
                    return v > 0
            return True  # the zero vector

        for k in itertools.product(*ranges):
            if sum(abs(v) for v in k) > trunc:
                continue
            if canonical(k):
                half.append(k)
        # Sorted by total order, so DC sits at index 0.
        half.sort(key=lambda k: (sum(abs(v) for v in k), k))
        self.half = half
        self.index = {k: n for n, k in enumerate(self.half)}
        self.n_half = len(self.half)
        # FFT sizes: spectrum of a degree-d polynomial of the truncated
        # signal must be alias-free up to 2*cap on each axis.
        d = max(poly_degree, 1)
        self.shape = tuple(
            next_fast_len(d * c + 2 * c + 2) if c > 0 else 1 for c in caps
        )
        self.npts = int(np.prod(self.shape))
        self.freqs = np.array(
            [float(np.dot(k, self.base_freqs)) for k in self.half]
        )

    def bins(self, ks):
        """FFT bin (tuple of index arrays) for a list of index vectors."""
        arr = np.asarray(ks, dtype=int)
        return tuple(
            np.mod(arr[:, axis], self.shape[axis]) for axis in range(self.ndim)
        )

    def spectrum_to_time(self, coeffs: np.ndarray) -> np.ndarray:
        """Real time-domain samples from half-spectrum phasors."""
        s = np.zeros(self.shape, dtype=complex)
        ks = np.asarray(self.half, dtype=int)
        pos = self.bins(ks)
        neg = self.bins(-ks)
        vals = coeffs.copy() / 2.0
        vals[0] = coeffs[0]  # DC carried at full weight
        np.add.at(s, pos, vals)
        conj_vals = np.conj(coeffs) / 2.0
        conj_vals[0] = 0.0  # DC already placed
        np.add.at(s, neg, conj_vals)
        x = np.fft.ifftn(s) * self.npts
        return np.ascontiguousarray(x.real)

    def time_to_spectrum_bins(self, x: np.ndarray) -> np.ndarray:
        """Full normalized FFT of real samples (for arbitrary bin lookups)."""
        return np.fft.fftn(x) / self.npts

    def half_spectrum(self, x: np.ndarray) -> np.ndarray:
        """Phasors on the half lattice from real time samples."""
        g = self.time_to_spectrum_bins(x)
        ks = np.asarray(self.half, dtype=int)
        vals = 2.0 * g[self.bins(ks)]
        vals[0] = g[tuple(0 for _ in range(self.ndim))]
        return vals


@dataclass
class HbSolution:
    """Converged harmonic-balance steady state.

    ``amplitudes`` maps the harmonic index vector to the junction branch
    current phasor (peak convention, i(t) = Re sum I_k exp(j w_k t)).
    Port waves use the same convention; powers are |b|^2 / 2.
    """

    indices: tuple[tuple[int, ...], ...]
    freqs: np.ndarray
    amplitudes: dict
    flux: dict
    port_a: dict
    port_b: dict
    residual: float
    iterations: int
    converged: bool
    max_current: float
    _vector: np.ndarray = field(repr=False, default=None)

    def current(self, k) -> complex:
        return self.amplitudes[tuple(k)]

    def b_wave(self, k) -> complex:
        return self.port_b[tuple(k)]

    def a_wave(self, k) -> complex:
        return self.port_a[tuple(k)]

    def output_power(self, k) -> float:
        """Outgoing port power at harmonic k in W (peak phasor convention)."""
        b = self.port_b[tuple(k)]
        return 0.5 * abs(b) ** 2


def _pack(coeffs: np.ndarray) -> np.ndarray:
    """Half-spectrum phasors -> real Newton vector [I0, Re, Im, Re, Im...]."""
    out = np.empty(1 + 2 * (coeffs.size - 1))
    out[0] = coeffs[0].real
    out[1::2] = coeffs[1:].real
    out[2::2] = coeffs[1:].imag
    return out


def _unpack(x: np.ndarray) -> np.ndarray:
    n = (x.size - 1) // 2
    out = np.empty(n + 1, dtype=complex)
    out[0] = x[0]
    out[1:] = x[1::2] + 1j * x[2::2]
    return out


class _Problem:
    """Assembled residual/Jacobian for one (netlist, polynomial, tones)."""

    def __init__(self, net: Netlist, poly: InductancePolynomial, tones: ToneSet):
        if net.z_port <= 0:
            raise ValueError("harmonic balance needs a resistive source port")
        self.net = net
        self.poly = poly
        self.tones = tones
        self.grid = _HarmonicGrid(tones, poly.degree)
        g = self.grid
        vt, z_env = thevenin_at_junction(net, g.freqs)
        self.y_env = 1.0 / z_env
        self.omega = 2.0 * math.pi * g.freqs
        # DC: the junction is an inductor, j*w*Phi vanishes identically.
        self.omega[0] = 0.0
        self.v_oc = np.zeros(g.n_half, dtype=complex)
        for axis, tone in enumerate(tones.tones):
            k = tuple(1 if a == axis else 0 for a in range(g.ndim))
            vs = math.sqrt(8.0 * net.z_port * tone.power) * np.exp(1j * tone.phase)
            self.v_oc[g.index[k]] = vt[g.index[k]] * vs
        # Jacobian lookup tables: bins for k-m and k+m over the half lattice.
        ks = np.asarray(g.half, dtype=int)
        diff = ks[:, None, :] - ks[None, :, :]
        summ = ks[:, None, :] + ks[None, :, :]
        self._diff_bins = tuple(
            np.mod(diff[:, :, a], g.shape[a]) for a in range(g.ndim)
        )
        self._sum_bins = tuple(
            np.mod(summ[:, :, a], g.shape[a]) for a in range(g.ndim)
        )

    def linear_guess(self, ramp: float) -> np.ndarray:
        z = 1.0 / self.y_env + 1j * self.omega * self.poly.l0
        coeffs = ramp * self.v_oc / z
        coeffs[0] = 0.0
        return _pack(coeffs)

    def residual(self, x: np.ndarray, ramp: float):
        g = self.grid
        coeffs = _unpack(x)
        i_t = g.spectrum_to_time(coeffs)
        phi_t = self.poly.flux(i_t)
        phi_k = g.half_spectrum(phi_t)
        r = coeffs - self.y_env * (ramp * self.v_oc - 1j * self.omega * phi_k)
        out = np.empty(x.size)
        out[0] = r[0].real
        out[1::2] = r[1:].real
        out[2::2] = r[1:].imag
        return out, i_t

    def jacobian(self, x: np.ndarray, i_t: np.ndarray) -> np.ndarray:
        g = self.grid
        ell = self.poly.inductance(i_t)
        lam = g.time_to_spectrum_bins(ell)
        lam_diff = lam[self._diff_bins]  # (k, m) -> Lambda(k - m)
        lam_sum = lam[self._sum_bins]  # (k, m) -> Lambda(k + m)
        yjw = (self.y_env * 1j * self.omega)[:, None]
        p = yjw * lam_diff
        q = yjw * lam_sum
        jac = np.zeros((x.size, x.size))
        # DC column: dPhi_k/dI0 = 2 Lambda(k); both lookup tables hold
        # Lambda(k) at m = 0, so p + q supplies the factor of two.
        dcol = (p + q)[:, 0]
        jac[0, 0] = 1.0
        jac[1::2, 0] = dcol[1:].real
        jac[2::2, 0] = dcol[1:].imag
        # m > 0 blocks.
        pq_sum = p[1:, 1:] + q[1:, 1:]
        pq_dif = p[1:, 1:] - q[1:, 1:]
        jac[1::2, 1::2] = pq_sum.real
        jac[1::2, 2::2] = -pq_dif.imag
        jac[2::2, 1::2] = pq_sum.imag
        jac[2::2, 2::2] = pq_dif.real
        idx = np.arange(1, x.size)
        jac[idx, idx] += 1.0
        # DC row: R_0 = I_0 - Y_0 (ramp V_0 - j*0*Phi) has no spectral coupling.
        jac[0, :] = 0.0
        jac[0, 0] = 1.0
        return jac


def _newton(problem: _Problem, x0: np.ndarray, ramp: float, tol_abs, tol_rel,
            max_iter) -> tuple[np.ndarray, float, int]:
    x = x0.copy()
    r, i_t = problem.residual(x, ramp)
    rnorm = np.max(np.abs(r))
    for it in range(1, max_iter + 1):
        scale = max(np.max(np.abs(x)), 0.0)
        if rnorm < max(tol_abs, tol_rel * scale):
            return x, rnorm, it - 1
        jac = problem.jacobian(x, i_t)
        try:
            dx = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(
                f"singular Jacobian at iteration {it}", rnorm, it
            ) from exc
        alpha = 1.0
        for _ in range(12):
            x_try = x + alpha * dx
            r_try, i_try = problem.residual(x_try, ramp)
            rn_try = np.max(np.abs(r_try))
            if rn_try < rnorm or not np.isfinite(rnorm):
                x, r, i_t, rnorm = x_try, r_try, i_try, rn_try
                break
            alpha *= 0.5
        else:
            raise ConvergenceError(
                f"line search stalled at iteration {it} (residual {rnorm:.3e} A)",
                rnorm,
                it,
            )
    scale = max(np.max(np.abs(x)), 0.0)
    if rnorm < max(tol_abs, tol_rel * scale):
        return x, rnorm, max_iter
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations (residual {rnorm:.3e} A)",
        rnorm,
        max_iter,
    )


def _port_waves(problem: _Problem, coeffs: np.ndarray, ramp: float):
    """Incident/outgoing waves at the measurement port per harmonic."""
    net, g = problem.net, problem.grid
    zp = net.z_port
    v_j = 1j * problem.omega * _flux_spectrum(problem, coeffs)
    m = chain_abcd(net.linear_elements, g.freqs)
    a_m, b_m = m[..., 0, 0], m[..., 0, 1]
    c_m, d_m = m[..., 1, 0], m[..., 1, 1]
    v1 = a_m * v_j + b_m * coeffs
    i1 = c_m * v_j + d_m * coeffs
    sq = 2.0 * math.sqrt(zp)
    if net.topology == REFLECTION:
        b = (v1 - zp * i1) / sq
    else:
        # Transmitted wave past the tap node into the matched output port.
        b = 2.0 * v1 / sq
    a = np.zeros(g.n_half, dtype=complex)
    for axis, tone in enumerate(problem.tones.tones):
        k = tuple(1 if ax == axis else 0 for ax in range(g.ndim))
        vs = ramp * math.sqrt(8.0 * zp * tone.power) * np.exp(1j * tone.phase)
        a[g.index[k]] = vs / sq
    return a, b


def _flux_spectrum(problem: _Problem, coeffs: np.ndarray) -> np.ndarray:
    g = problem.grid
    i_t = g.spectrum_to_time(coeffs)
    return g.half_spectrum(problem.poly.flux(i_t))


def solve(
    net: Netlist,
    junction: InductancePolynomial,
    tones: ToneSet,
    *,
    tol_abs: float = 1e-12,
    tol_rel: float = 0.0,
    max_iter: int = 200,
    max_ramp_steps: int = 64,
    initial: HbSolution | None = None,
    check_domain: bool = True,
) -> HbSolution:
    """Solve the pumped steady state of the circuit.

    Parameters
    ----------
    net : Netlist
        Linear embedding; the junction placeholder marks where the
        nonlinear inductor sits.
    junction : InductancePolynomial
        Current-dependent inductance of the junction.
    tones : ToneSet
        Excitations and truncation.
    tol_abs, tol_rel : float
        Convergence on the max KCL residual: below
        max(tol_abs, tol_rel * max |I_k|).
    max_iter : int
        Newton iteration cap per continuation step.
    max_ramp_steps : int
        Drive-amplitude continuation budget for hard cases.
    initial : HbSolution, optional
        Warm start from a previous solution on the same harmonic grid.
    check_domain : bool
        Raise OverdriveError if the converged waveform leaves the
        polynomial fit domain.

    Raises
    ------
    ConvergenceError, OverdriveError
    """
    problem = _Problem(net, junction, tones)
    if initial is not None and initial._vector is not None and initial._vector.size == 1 + 2 * (problem.grid.n_half - 1):
        starts = [initial._vector, problem.linear_guess(1.0)]
    else:
        starts = [problem.linear_guess(1.0)]

    x = None
    err = None
    total_iters = 0
    for x0 in starts:
        try:
            x, rnorm, its = _newton(problem, x0, 1.0, tol_abs, tol_rel, max_iter)
            total_iters += its
            break
        except ConvergenceError as exc:
            err = exc
            total_iters += exc.iterations
            x = None
    if x is None:
        # Adaptive source stepping: track the solution branch upward in
        # drive amplitude, bisecting the step near folds.
        xc = problem.linear_guess(0.0)
        ramp = 0.0
        step = 0.5
        steps_used = 0
        min_step = 1.0 / (64.0 * max_ramp_steps)
        while ramp < 1.0 and steps_used < 8 * max_ramp_steps:
            target = min(1.0, ramp + step)
            try:
                x_try, rnorm, its = _newton(
                    problem, xc if ramp > 0 else problem.linear_guess(target),
                    target, tol_abs, tol_rel, max_iter,
                )
                total_iters += its
                xc, ramp = x_try, target
                step = min(2.0 * step, 1.0)
            except ConvergenceError as exc:
                err = exc
                total_iters += exc.iterations
                step *= 0.5
                if step < min_step:
                    # The tracked branch likely folds here; a driven power
                    # sweep would jump branches, so attempt the full drive
                    # from the last converged state.
                    try:
                        x_try, rnorm, its = _newton(
                            problem, xc, 1.0, tol_abs, tol_rel, max_iter
                        )
                        total_iters += its
                        xc, ramp = x_try, 1.0
                        break
                    except ConvergenceError as exc2:
                        raise ConvergenceError(
                            f"continuation stalled at ramp {ramp:.4f}: {exc2}",
                            exc2.residual,
                            total_iters,
                        ) from exc2
            steps_used += 1
        if ramp >= 1.0:
            x = xc
        else:
            raise ConvergenceError(
                f"continuation exhausted at ramp {ramp:.4f}: {err}",
                getattr(err, "residual", math.nan),
                total_iters,
            )

    coeffs = _unpack(x)
    i_t = problem.grid.spectrum_to_time(coeffs)
    i_peak = float(np.max(np.abs(i_t)))
    if check_domain and math.isfinite(junction.fit_domain) and i_peak > junction.fit_domain:
        raise OverdriveError(
            f"waveform peak {i_peak:.3e} A exceeds the polynomial fit domain "
            f"{junction.fit_domain:.3e} A"
        )
    phi_k = _flux_spectrum(problem, coeffs)
    a, b = _port_waves(problem, coeffs, 1.0)
    g = problem.grid
    return HbSolution(
        indices=tuple(g.half),
        freqs=g.freqs.copy(),
        amplitudes={k: coeffs[n] for n, k in enumerate(g.half)},
        flux={k: phi_k[n] for n, k in enumerate(g.half)},
        port_a={k: a[n] for n, k in enumerate(g.half)},
        port_b={k: b[n] for n, k in enumerate(g.half)},
        residual=float(rnorm),
        iterations=total_iters,
        converged=True,
        max_current=i_peak,
        _vector=x,
    )


# ---------------------------------------------------------------------------
# Amplifier measurements
# ---------------------------------------------------------------------------

PROBE_POWER_DEFAULT = dbm_to_watt(-140.0)


def _gain_tones(pump: Tone, probe_freq: float, probe_power: float,
                truncation: int, probe_cap: int) -> ToneSet:
    return ToneSet(
        (pump, Tone(probe_freq, probe_power)),
        truncation=truncation,
        axis_caps=(truncation, probe_cap),
    )


def gain(
    net: Netlist,
    junction: InductancePolynomial,
    pump: Tone,
    probe_freq: float,
    probe_power: float = PROBE_POWER_DEFAULT,
    *,
    truncation: int = 7,
    probe_cap: int = 2,
    _warm=None,
) -> float:
    """Pump on/off reflection gain at the probe frequency, in dB.

    The probe rides as a true harmonic-balance tone (default -140 dBm) so
    compression at higher probe powers is captured self-consistently; the
    off state is the same computation with the pump amplitude set to zero.
    """
    tones_on = _gain_tones(pump, probe_freq, probe_power, truncation, probe_cap)
    tones_off = _gain_tones(
        Tone(pump.freq, 0.0, pump.phase), probe_freq, probe_power, truncation, probe_cap
    )
    probe_bin = (0, 1)
    sol_on = solve(net, junction, tones_on, initial=_warm)
    sol_off = solve(net, junction, tones_off)
    g_on = sol_on.b_wave(probe_bin) / sol_on.a_wave(probe_bin)
    g_off = sol_off.b_wave(probe_bin) / sol_off.a_wave(probe_bin)
    return 20.0 * math.log10(abs(g_on) / abs(g_off))


def pumped_reflection(
    net: Netlist,
    junction: InductancePolynomial,
    pump: Tone,
    probe_freqs,
    probe_power: float = PROBE_POWER_DEFAULT,
    *,
    truncation: int = 7,
    probe_cap: int = 2,
):
    """Pumped small-signal response b/a at each probe frequency.

    Returns the complex probe-port ratio with the pump on, suitable for
    Touchstone export of the amplifier's operating response.
    """
    probe_freqs = np.asarray(probe_freqs, dtype=float)
    out = np.empty(probe_freqs.size, dtype=complex)
    warm = None
    for n, f_probe in enumerate(probe_freqs):
        tones = _gain_tones(pump, f_probe, probe_power, truncation, probe_cap)
        sol = solve(net, junction, tones, initial=warm)
        warm = sol
        out[n] = sol.b_wave((0, 1)) / sol.a_wave((0, 1))
    return out


@dataclass(frozen=True)
class GainMap:
    """Gain over a pump frequency/power sweep; failed cells stay NaN."""

    pump_freqs: np.ndarray  # Hz, ascending
    pump_powers_dbm: np.ndarray  # dBm at device, ascending
    gain_db: np.ndarray  # shape (n_powers, n_freqs)
    failed: np.ndarray  # bool mask, same shape

    def __post_init__(self):
        if np.any(np.diff(self.pump_freqs) <= 0) or np.any(
            np.diff(self.pump_powers_dbm) <= 0
        ):
            raise ValueError("sweep axes must be strictly increasing")

    def best(self) -> tuple[float, float, float]:
        """(gain_db, pump_freq, pump_power_dbm) of the best solved cell."""
        masked = np.where(self.failed, -np.inf, self.gain_db)
        idx = np.unravel_index(np.nanargmax(masked), masked.shape)
        return (
            float(masked[idx]),
            float(self.pump_freqs[idx[1]]),
            float(self.pump_powers_dbm[idx[0]]),
        )

    def cells_in_band(self, lo_db: float, hi_db: float):
        """Solved cells with gain inside [lo_db, hi_db], as (power_dbm, freq, gain)."""
        out = []
        for ip, p in enumerate(self.pump_powers_dbm):
            for jf, f in enumerate(self.gain_db[ip]):
                if self.failed[ip, jf]:
                    continue
                if lo_db <= self.gain_db[ip, jf] <= hi_db:
                    out.append(
                        (float(p), float(self.pump_freqs[jf]), float(self.gain_db[ip, jf]))
                    )
        return out


def gain_map(
    net: Netlist,
    junction: InductancePolynomial,
    pump_freqs,
    pump_powers_dbm,
    *,
    probe_offset: float = 1e5,
    probe_power: float = PROBE_POWER_DEFAULT,
    truncation: int = 7,
    probe_cap: int = 2,
) -> GainMap:
    """Small-signal gain over the pump grid.

    The probe sits ``probe_offset`` Hz above the pump (coincident tones are
    degenerate in the quasi-periodic representation).  Cells where the
    solver fails are reported as NaN with the mask set, never interpolated.
    """
    pump_freqs = np.asarray(pump_freqs, dtype=float)
    powers = np.asarray(pump_powers_dbm, dtype=float)
    gains = np.full((powers.size, pump_freqs.size), np.nan)
    failed = np.zeros_like(gains, dtype=bool)
    for jf, fp in enumerate(pump_freqs):
        warm = None
        for ip, pdbm in enumerate(powers):
            pump = Tone(fp, dbm_to_watt(pdbm))
            try:
                tones_on = _gain_tones(
                    pump, fp + probe_offset, probe_power, truncation, probe_cap
                )
                sol_on = solve(net, junction, tones_on, initial=warm)
                warm = sol_on
                tones_off = _gain_tones(
                    Tone(fp, 0.0), fp + probe_offset, probe_power, truncation, probe_cap
                )
                sol_off = solve(net, junction, tones_off)
                pb = (0, 1)
                g_on = sol_on.b_wave(pb) / sol_on.a_wave(pb)
                g_off = sol_off.b_wave(pb) / sol_off.a_wave(pb)
                gains[ip, jf] = 20.0 * math.log10(abs(g_on) / abs(g_off))
            except (ConvergenceError, OverdriveError):
                failed[ip, jf] = True
                warm = None
    return GainMap(pump_freqs, powers, gains, failed)


@dataclass(frozen=True)
class CompressionResult:
    p_1db_dbm: float
    gain_small_db: float
    probe_powers_dbm: np.ndarray
    gains_db: np.ndarray


def p1db(
    net: Netlist,
    junction: InductancePolynomial,
    pump: Tone,
    probe_freq: float,
    probe_powers_dbm=None,
    *,
    truncation: int = 7,
    probe_cap: int = 2,
    bisect_db: float = 0.05,
) -> CompressionResult:
    """1 dB compression point of the pumped amplifier.

    Sweeps probe power upward from the small-signal level, brackets the
    first crossing of (small-signal gain - 1 dB) and bisects it to
    ``bisect_db``.  The small-signal gain must be at least 10 dB.
    """
    if probe_powers_dbm is None:
        probe_powers_dbm = np.arange(-140.0, -79.0, 2.0)
    probe_powers_dbm = np.asarray(probe_powers_dbm, dtype=float)

    def g_at(p_dbm):
        return gain(
            net,
            junction,
            pump,
            probe_freq,
            dbm_to_watt(p_dbm),
            truncation=truncation,
            probe_cap=probe_cap,
        )

    gains = []
    g_small = g_at(probe_powers_dbm[0])
    if g_small < 10.0:
        raise ValueError(
            f"small-signal gain {g_small:.1f} dB < 10 dB; pick a better pump point"
        )
    gains.append(g_small)
    target = g_small - 1.0
    bracket = None
    for p_dbm in probe_powers_dbm[1:]:
        try:
            gnow = g_at(p_dbm)
        except (ConvergenceError, OverdriveError):
            break
        gains.append(gnow)
        if gnow < target:
            prev = probe_powers_dbm[len(gains) - 2]
            bracket = (prev, p_dbm)
            break
    if bracket is None:
        raise CompressionNotFoundError(
            f"gain never dropped {1.0:.1f} dB below {g_small:.2f} dB within the sweep"
        )
    lo, hi = bracket
    while hi - lo > bisect_db:
        mid = 0.5 * (lo + hi)
        if g_at(mid) < target:
            hi = mid
        else:
            lo = mid
    swept = probe_powers_dbm[: len(gains)]
    return CompressionResult(
        p_1db_dbm=0.5 * (lo + hi),
        gain_small_db=g_small,
        probe_powers_dbm=np.asarray(swept),
        gains_db=np.asarray(gains),
    )


@dataclass(frozen=True)
class Iip3Result:
    iip3_w: float
    iip3_dbm: float
    input_powers_dbm: np.ndarray
    p_fund_dbm: np.ndarray
    p_im3_dbm: np.ndarray
    slope_fund: float
    slope_im3: float


def iip3(
    net: Netlist,
    junction: InductancePolynomial,
    f1: float,
    f2: float,
    input_powers_dbm=None,
    *,
    truncation: int = 5,
    slope_tol: float = 0.15,
) -> Iip3Result:
    """Two-tone input third-order intercept of the (unpumped) circuit.

    Equal-power tones at f1 and f2 drive the device; the output powers of
    the fundamental (f1) and the lower intermodulation product (2 f1 - f2)
    are recorded against input power.  Their asymptotic slopes are checked
    against 1 and 3, and the intercept is extrapolated per point via
    IIP3 = P_in + (P1 - P3)/2 and averaged.
    """
    if input_powers_dbm is None:
        input_powers_dbm = np.linspace(-125.0, -105.0, 6)
    input_powers_dbm = np.asarray(input_powers_dbm, dtype=float)
    if f1 == f2:
        raise ValueError("tones must be distinct")
    fund_bin, im3_bin = (1, 0), (2, -1)
    p1_out, p3_out = [], []
    for p_dbm in input_powers_dbm:
        p_w = dbm_to_watt(p_dbm)
        tones = ToneSet(
            (Tone(f1, p_w), Tone(f2, p_w)),
            truncation=truncation,
            axis_caps=(3, 3),
        )
        sol = solve(net, junction, tones, tol_abs=0.0, tol_rel=1e-12)
        i_fund = abs(sol.current(fund_bin))
        i_im3 = abs(sol.current(im3_bin))
        if i_im3 < 1e3 * max(sol.residual, 1e-300) or i_im3 < 1e-13 * i_fund:
            raise ThirdOrderFloorError(
                f"third-order product at {p_dbm:.1f} dBm input is at the "
                f"numerical floor ({i_im3:.2e} A); junction too linear or "
                f"drive too weak"
            )
        p1_out.append(sol.output_power(fund_bin))
        p3_out.append(sol.output_power(im3_bin))
    p1_dbm = watt_to_dbm(np.asarray(p1_out))
    p3_dbm = watt_to_dbm(np.asarray(p3_out))
    slope1 = np.polyfit(input_powers_dbm, p1_dbm, 1)[0]
    slope3 = np.polyfit(input_powers_dbm, p3_dbm, 1)[0]
    if abs(slope1 - 1.0) > slope_tol or abs(slope3 - 3.0) > 3 * slope_tol:
        raise ThirdOrderFloorError(
            f"asymptotic slopes {slope1:.2f}/{slope3:.2f} deviate from 1/3; "
            f"inputs not in the perturbative region"
        )
    per_point = input_powers_dbm + 0.5 * (p1_dbm - p3_dbm)
    iip3_dbm = float(np.mean(per_point))
    return Iip3Result(
        iip3_w=float(dbm_to_watt(iip3_dbm)),
        iip3_dbm=iip3_dbm,
        input_powers_dbm=input_powers_dbm,
        p_fund_dbm=p1_dbm,
        p_im3_dbm=p3_dbm,
        slope_fund=float(slope1),
        slope_im3=float(slope3),
    )
