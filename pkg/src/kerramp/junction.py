"""Junction constitutive models.

Three current-phase relations are supported:

* ``sis``: the tunnel-junction cosine potential, I = Ic sin(phi).
* ``ssms_quartic``: a quartic Taylor potential
  U(phi) = Ej (c2 phi^2/2! - c4 phi^4/4!), the softening model used for
  proximity junctions with weak anharmonicity.
* ``koops_cpr``: I(phi) = (I0/An) sin(phi) / sqrt(1 - tau* sin^2(phi/2)),
  a short-junction form parameterized by an effective channel
  transmission tau*; the potential is obtained by quadrature.

Sign convention: c4 is stored positive and the softening minus sign lives
in the potential expression, so all three kinds describe junctions whose
inductance grows with phase excursion and whose mode Kerr is negative.

The linear inductance always satisfies dI/dphi(0) = phi0 / l_j; with the
quartic potential this fixes the energy scale as Ej = phi0^2 / (c2 l_j).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from .constants import PHI0

SIS = "sis"
SSMS_QUARTIC = "ssms_quartic"
KOOPS_CPR = "koops_cpr"

_KINDS = (SIS, SSMS_QUARTIC, KOOPS_CPR)


class PhaseDomainError(ValueError):
    """Phase outside the validity range of the model."""


@dataclass(frozen=True)
class JunctionModel:
    """A junction kind plus its inductance scale and shape parameters."""

    kind: str
    l_j: float
    c2: float = 1.0
    c4: float = 1.0
    tau_star: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown junction kind {self.kind!r}")
        if not (math.isfinite(self.l_j) and self.l_j > 0):
            raise ValueError("l_j must be finite and > 0")
        if not (self.c2 > 0):
            raise ValueError("c2 must be > 0")
        if self.c4 < 0:
            raise ValueError("c4 must be >= 0 (softening sign carried internally)")
        if not (0.0 <= self.tau_star < 1.0):
            raise ValueError("tau_star must lie in [0, 1)")

    @property
    def e_j(self) -> float:
        """Junction energy scale, chosen so dI/dphi(0) = phi0/l_j."""
        return PHI0**2 / (self.c2 * self.l_j)

    @property
    def c4_over_c2(self) -> float:
        if self.kind == SIS:
            return 1.0
        if self.kind == SSMS_QUARTIC:
            return self.c4 / self.c2
        c2n, c4n = taylor_from_cpr(self.tau_star)
        return c4n / c2n

    @property
    def critical_current(self) -> float:
        """Largest current on the increasing branch of I(phi)."""
        i_scale = PHI0 / self.l_j
        if self.kind == SIS:
            return i_scale
        if self.kind == SSMS_QUARTIC:
            # dI/dphi = 0 at phi* = sqrt(2 c2/c4); I(phi*) = (2/3) phi* i_scale.
            if self.c4 == 0.0:
                return math.inf
            phi_star = math.sqrt(2.0 * self.c2 / self.c4)
            return i_scale * (2.0 / 3.0) * phi_star
        # Koops: slope-matched CPR peaks at I0 = An * phi0/l_j.
        return i_scale * _koops_norm(self.tau_star)

    @property
    def phase_at_critical(self) -> float:
        """Phase where I(phi) peaks on [0, pi]."""
        if self.kind == SIS:
            return math.pi / 2.0
        if self.kind == SSMS_QUARTIC:
            if self.c4 == 0.0:
                return math.inf
            return math.sqrt(2.0 * self.c2 / self.c4)
        return _koops_peak_phase(self.tau_star)


def sis(l_j: float) -> JunctionModel:
    return JunctionModel(SIS, l_j)


def ssms(l_j: float, c4_over_c2: float, c2: float = 1.0) -> JunctionModel:
    return JunctionModel(SSMS_QUARTIC, l_j, c2=c2, c4=c4_over_c2 * c2)


def koops(l_j: float, tau_star: float) -> JunctionModel:
    return JunctionModel(KOOPS_CPR, l_j, tau_star=tau_star)


# ---------------------------------------------------------------------------
# Koops CPR helpers
# ---------------------------------------------------------------------------


def _koops_shape(phi, tau_star):
    """Unnormalized CPR shape sin(phi)/sqrt(1 - tau* sin^2(phi/2))."""
    phi = np.asarray(phi, dtype=float)
    return np.sin(phi) / np.sqrt(1.0 - tau_star * np.sin(0.5 * phi) ** 2)


def _koops_peak_phase(tau_star: float) -> float:
    res = minimize_scalar(
        lambda p: -_koops_shape(p, tau_star),
        bounds=(1e-6, math.pi - 1e-9),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x)


def _koops_norm(tau_star: float) -> float:
    """Normalization An = max of the unnormalized shape, so max I = I0."""
    return float(_koops_shape(_koops_peak_phase(tau_star), tau_star))


# ---------------------------------------------------------------------------
# Constitutive relations
# ---------------------------------------------------------------------------


def potential(model: JunctionModel, phi) -> np.ndarray:
    """Junction potential energy U(phi) in J, with U(0) = 0."""
    phi = np.asarray(phi, dtype=float)
    if model.kind == SIS:
        return (PHI0**2 / model.l_j) * (1.0 - np.cos(phi))
    if model.kind == SSMS_QUARTIC:
        return model.e_j * (
            model.c2 * phi**2 / 2.0 - model.c4 * phi**4 / 24.0
        )
    # Koops: no closed form, integrate phi0 * I(phi).  The shape has unit
    # slope at zero, so I(phi) = (phi0/l_j) * shape(phi).
    scale = PHI0 * PHI0 / model.l_j
    flat = phi.ravel()
    res = np.empty(flat.shape, dtype=float)
    for i, p in enumerate(flat):
        val, _ = quad(lambda u: _koops_shape(u, model.tau_star), 0.0, p, limit=200)
        res[i] = scale * val
    return res.reshape(phi.shape)


def current(model: JunctionModel, phi) -> np.ndarray:
    """Current-phase relation I(phi) in A; odd, with slope phi0/l_j at zero."""
    phi = np.asarray(phi, dtype=float)
    i_scale = PHI0 / model.l_j
    if model.kind == SIS:
        return i_scale * np.sin(phi)
    if model.kind == SSMS_QUARTIC:
        r = model.c4 / model.c2
        return i_scale * (phi - r * phi**3 / 6.0)
    # shape'(0) = 1, so slope matching needs no normalization here; the
    # Koops normalization only fixes what "I0" means (I0 = An * phi0/l_j).
    return i_scale * _koops_shape(phi, model.tau_star)


def koops_i0(model: JunctionModel) -> float:
    """Critical current I0 of a Koops junction (peak of I(phi))."""
    if model.kind != KOOPS_CPR:
        raise ValueError("koops_i0 applies to koops_cpr models")
    return (PHI0 / model.l_j) * _koops_norm(model.tau_star)


def inductance_of_phase(model: JunctionModel, phi) -> np.ndarray:
    """Differential inductance L(phi) = phi0^2 / U''(phi) in H."""
    phi = np.asarray(phi, dtype=float)
    if model.kind == SIS:
        c = np.cos(phi)
        if np.any(c <= 0):
            raise PhaseDomainError(
                "SIS inductance diverges at |phi| = pi/2; phase out of range"
            )
        return model.l_j / c
    if model.kind == SSMS_QUARTIC:
        r = model.c4 / model.c2
        if r > 0:
            bound = math.sqrt(2.0 / r)
            if np.any(np.abs(phi) >= bound):
                raise PhaseDomainError(
                    f"quartic model valid for |phi| < sqrt(2 c2/c4) = {bound:.4g}"
                )
        return model.l_j / (1.0 - 0.5 * r * phi**2)
    # Koops: L = phi0 / (dI/dphi), derivative analytic.
    t = model.tau_star
    s2 = np.sin(0.5 * phi) ** 2
    root = np.sqrt(1.0 - t * s2)
    dshape = np.cos(phi) / root + np.sin(phi) * (
        0.25 * t * np.sin(phi) / root**3
    )
    if np.any(dshape <= 0):
        raise PhaseDomainError("Koops inductance diverges past the CPR peak")
    return model.l_j / dshape


def taylor_from_cpr(tau_star: float) -> tuple[float, float]:
    """Quartic-potential coefficients of the Koops CPR, normalized to c2 = 1.

    Expanding sin(phi)/sqrt(1 - tau* sin^2(phi/2)) about zero gives
    phi + (tau*/8 - 1/6) phi^3 + ..., so the potential's quartic ratio is
    c4/c2 = 1 - 3 tau*/4.
    """
    if not (0.0 <= tau_star < 1.0):
        raise ValueError("tau_star must lie in [0, 1)")
    return 1.0, 1.0 - 0.75 * tau_star


# ---------------------------------------------------------------------------
# Polynomial inductance fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InductancePolynomial:
    """L(I) = sum_k coefficients[k] * I^k, valid for |I| <= fit_domain."""

    coefficients: tuple[float, ...]
    fit_domain: float
    fit_residual: float = 0.0

    def __post_init__(self):
        if len(self.coefficients) < 1 or self.coefficients[0] <= 0:
            raise ValueError("polynomial needs a positive constant term L0")
        if self.fit_domain <= 0:
            raise ValueError("fit_domain must be > 0")

    @property
    def l0(self) -> float:
        return self.coefficients[0]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def inductance(self, i) -> np.ndarray:
        i = np.asarray(i, dtype=float)
        return np.polynomial.polynomial.polyval(i, self.coefficients)

    def flux(self, i) -> np.ndarray:
        """Flux Phi(I) = integral of L, the quantity the HB engine balances."""
        i = np.asarray(i, dtype=float)
        coeffs = [0.0] + [
            c / (k + 1.0) for k, c in enumerate(self.coefficients)
        ]
        return np.polynomial.polynomial.polyval(i, coeffs)


def constant_inductance(l0: float) -> InductancePolynomial:
    """Linear inductor as a degenerate polynomial (any current allowed)."""
    return InductancePolynomial((l0,), fit_domain=math.inf)


def _phase_of_current(model: JunctionModel, i: float) -> float:
    """Invert I(phi) on the increasing branch."""
    if i == 0.0:
        return 0.0
    peak = model.phase_at_critical
    hi = min(peak, 1e6) * (1.0 - 1e-12) if math.isfinite(peak) else 1e6
    sgn = 1.0 if i > 0 else -1.0
    target = abs(i)

    def g(p):
        return float(current(model, p)) - target

    return sgn * brentq(g, 0.0, hi, xtol=1e-16, rtol=8.9e-16)


def inductance_of_current(model: JunctionModel, i) -> np.ndarray:
    """L(I) on the increasing CPR branch.

    For the SIS kind this is the closed form l_j / sqrt(1 - (I/Ic)^2); the
    other kinds invert I(phi) numerically and evaluate L(phi).
    """
    i = np.asarray(i, dtype=float)
    i_c = model.critical_current
    if model.kind == SIS:
        x = i / i_c
        if np.any(np.abs(x) >= 1.0):
            raise PhaseDomainError("current at or beyond the SIS critical current")
        return model.l_j / np.sqrt(1.0 - x**2)
    flat = i.ravel()
    out = np.empty(flat.shape, dtype=float)
    for n, val in enumerate(flat):
        if abs(val) >= i_c:
            raise PhaseDomainError("current at or beyond the critical current")
        out[n] = float(inductance_of_phase(model, _phase_of_current(model, val)))
    return out.reshape(i.shape)


def fit_inductance_polynomial(
    model: JunctionModel, i_max: float, order: int
) -> InductancePolynomial:
    """Least-squares polynomial fit of L(I) over [-i_max, i_max].

    Sampling is a uniform 501-point current grid; dense symmetric
    sampling keeps the odd coefficients of a symmetric junction at
    numerical-noise level.

    Parameters
    ----------
    model : JunctionModel
    i_max : float
        Largest fit current in A; must stay below the model's critical
        current.
    order : int
        Polynomial degree, >= 2.

    Returns
    -------
    InductancePolynomial
        Coefficients plus the max relative deviation over the fit domain.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    i_c = model.critical_current
    if not (0 < i_max < i_c):
        raise ValueError(
            f"i_max must lie in (0, critical current = {i_c:.4g} A), got {i_max:.4g}"
        )
    n_samples = 501
    if order + 1 > n_samples // 4:
        raise ValueError("order too high for the 501-point sample grid")
    grid = np.linspace(-i_max, i_max, n_samples)
    l_vals = inductance_of_current(model, grid)
    # Vandermonde least squares, scaled current for conditioning.
    x = grid / i_max
    v = np.vander(x, order + 1, increasing=True)
    sol, *_ = np.linalg.lstsq(v, l_vals, rcond=None)
    coeffs = tuple(sol[k] / i_max**k for k in range(order + 1))
    poly = InductancePolynomial(coeffs, fit_domain=i_max)
    resid = float(np.max(np.abs(poly.inductance(grid) - l_vals) / l_vals))
    return InductancePolynomial(coeffs, fit_domain=i_max, fit_residual=resid)
