import numpy as np
import pytest

from kerramp import junction as jn
from kerramp.constants import PHI0

LJ = 0.205e-9

SIS_MODEL = jn.sis(LJ)
SSMS_MODEL = jn.ssms(LJ, 5.3e-3)
KOOPS_MODEL = jn.koops(LJ, 0.7)
ALL_MODELS = [SIS_MODEL, SSMS_MODEL, KOOPS_MODEL]


def fd_derivative(func, x, h):
    """Five-point central difference, the independent derivative oracle."""
    return (func(x - 2 * h) - 8 * func(x - h) + 8 * func(x + h) - func(x + 2 * h)) / (
        12 * h
    )


class TestPotential:
    def test_ssms_zero_at_origin(self):
        assert jn.potential(SSMS_MODEL, 0.0) == 0.0

    def test_sis_at_pi(self):
        assert jn.potential(SIS_MODEL, np.pi) == pytest.approx(
            2 * PHI0**2 / LJ, rel=1e-12
        )

    def test_ssms_direct_evaluation(self):
        m = jn.ssms(LJ, 5.3e-3, c2=1.0)
        expect = m.e_j * (0.5 - 5.3e-3 / 24.0)
        assert jn.potential(m, 1.0) == pytest.approx(expect, rel=1e-12)

    def test_koops_potential_by_quadrature_matches_fd(self):
        # U exists only by quadrature; check dU/dphi = phi0 I(phi).
        m = KOOPS_MODEL
        for phi in [0.4, 1.1]:
            du = fd_derivative(lambda p: float(jn.potential(m, p)), phi, 1e-5)
            assert du == pytest.approx(PHI0 * float(jn.current(m, phi)), rel=1e-8)


class TestCurrent:
    @pytest.mark.parametrize("model", ALL_MODELS)
    def test_zero_at_origin(self, model):
        assert jn.current(model, 0.0) == 0.0

    def test_sis_peak_is_critical_current(self):
        assert jn.current(SIS_MODEL, np.pi / 2) == pytest.approx(
            PHI0 / LJ, rel=1e-12
        )
        assert SIS_MODEL.critical_current == pytest.approx(PHI0 / LJ, rel=1e-12)

    def test_koops_small_tau_reduces_to_sine(self):
        m = jn.koops(LJ, 0.0)
        i0 = PHI0 / LJ
        for phi in [0.3, 1.0, 2.0]:
            assert float(jn.current(m, phi)) == pytest.approx(
                i0 * np.sin(phi), rel=1e-9
            )
        # A_N = 1 in the sinusoidal limit.
        assert jn.koops_i0(m) == pytest.approx(i0, rel=1e-9)

    @pytest.mark.parametrize("model", ALL_MODELS)
    def test_slope_at_origin_is_phi0_over_lj(self, model):
        d = fd_derivative(lambda p: float(jn.current(model, p)), 0.0, 1e-6)
        assert d == pytest.approx(PHI0 / LJ, rel=1e-9)


class TestInductanceOfPhase:
    @pytest.mark.parametrize("model", ALL_MODELS)
    def test_lj_at_origin(self, model):
        assert float(jn.inductance_of_phase(model, 0.0)) == pytest.approx(
            LJ, rel=1e-12
        )

    def test_ssms_table_value(self):
        # c4/c2 = 5.3e-3 at phi = 1 gives L_J / (1 - 2.65e-3).
        val = float(jn.inductance_of_phase(SSMS_MODEL, 1.0))
        assert val == pytest.approx(LJ / (1 - 2.65e-3), rel=1e-12)

    @pytest.mark.parametrize("model", ALL_MODELS)
    def test_matches_fd_of_potential(self, model):
        # Oracle: L = phi0^2 / U''(phi) with U'' by central differences.
        phi, h = 0.5, 1e-4
        u = lambda p: float(jn.potential(model, p))
        upp = (u(phi + h) - 2 * u(phi) + u(phi - h)) / h**2
        assert float(jn.inductance_of_phase(model, phi)) == pytest.approx(
            PHI0**2 / upp, rel=1e-6
        )

    def test_domain_error_names_bound(self):
        with pytest.raises(jn.PhaseDomainError, match="sqrt"):
            jn.inductance_of_phase(SSMS_MODEL, 25.0)
        with pytest.raises(jn.PhaseDomainError):
            jn.inductance_of_phase(SIS_MODEL, np.pi / 2 + 0.01)

    def test_monotone_in_abs_phi(self):
        phis = np.linspace(0, 1.5, 40)
        vals = jn.inductance_of_phase(SSMS_MODEL, phis)
        assert np.all(np.diff(vals) > 0)


class TestSymmetry:
    @pytest.mark.parametrize("model", ALL_MODELS)
    def test_u_even_i_odd_l_even(self, model):
        for phi in [0.2, 0.7, 1.3]:
            assert float(jn.potential(model, phi)) == pytest.approx(
                float(jn.potential(model, -phi)), rel=1e-10
            )
            assert float(jn.current(model, phi)) == pytest.approx(
                -float(jn.current(model, -phi)), rel=1e-10
            )
            assert float(jn.inductance_of_phase(model, phi)) == pytest.approx(
                float(jn.inductance_of_phase(model, -phi)), rel=1e-10
            )

    @pytest.mark.parametrize("model", ALL_MODELS)
    def test_current_is_gradient_of_potential(self, model):
        for phi in np.linspace(-1.4, 1.4, 9):
            if abs(phi) < 1e-3:
                continue
            du = fd_derivative(lambda p: float(jn.potential(model, p)), phi, 1e-5)
            assert du / PHI0 == pytest.approx(
                float(jn.current(model, phi)), rel=1e-6
            )


class TestTaylorFromCpr:
    @staticmethod
    def oracle_c4_over_c2(tau):
        """Richardson-extrapolated third derivative of the CPR shape at zero.

        c4/c2 = -s'''(0)/s'(0) for s(phi) = sin(phi)/sqrt(1-tau sin^2(phi/2)).
        """

        def s(phi):
            return np.sin(phi) / np.sqrt(1 - tau * np.sin(phi / 2) ** 2)

        def third(h):
            # central 5-point third derivative
            return (-s(-2 * h) + 2 * s(-h) - 2 * s(h) + s(2 * h)) / (2 * h**3)

        d1, d2 = third(1e-2), third(5e-3)
        sppp = (4 * d2 - d1) / 3.0
        def first(h):
            return (s(-2 * h) - 8 * s(-h) + 8 * s(h) - s(2 * h)) / (12 * h)
        sp = first(1e-4)
        return -sppp / sp

    def test_sinusoidal_limit(self):
        c2, c4 = jn.taylor_from_cpr(0.0)
        assert c4 / c2 == pytest.approx(1.0, rel=1e-12)

    def test_half_transmission_against_derivative_oracle(self):
        c2, c4 = jn.taylor_from_cpr(0.5)
        assert c4 / c2 == pytest.approx(self.oracle_c4_over_c2(0.5), rel=1e-5)

    def test_monotone_decreasing_on_grid(self):
        taus = np.linspace(0.0, 0.95, 20)
        ratios = [jn.taylor_from_cpr(t)[1] / jn.taylor_from_cpr(t)[0] for t in taus]
        assert all(b < a for a, b in zip(ratios, ratios[1:]))
        for t, r in zip(taus[::4], ratios[::4]):
            assert r == pytest.approx(self.oracle_c4_over_c2(t), rel=1e-4)

    def test_rejects_bad_tau(self):
        with pytest.raises(ValueError):
            jn.taylor_from_cpr(1.0)
        with pytest.raises(ValueError):
            jn.taylor_from_cpr(-0.1)


class TestInductanceOfCurrent:
    def test_sis_closed_form(self):
        ic = SIS_MODEL.critical_current
        i = np.array([0.0, 0.3 * ic, 0.8 * ic])
        expect = LJ / np.sqrt(1 - (i / ic) ** 2)
        assert np.allclose(jn.inductance_of_current(SIS_MODEL, i), expect, rtol=1e-12)

    def test_ssms_parametric_inversion_consistency(self):
        # L(I(phi)) must equal L(phi).
        for phi in [0.1, 0.8, 2.5]:
            i = float(jn.current(SSMS_MODEL, phi))
            li = float(jn.inductance_of_current(SSMS_MODEL, np.array([i]))[0])
            assert li == pytest.approx(
                float(jn.inductance_of_phase(SSMS_MODEL, phi)), rel=1e-10
            )

    def test_beyond_critical_current_rejected(self):
        ic = SIS_MODEL.critical_current
        with pytest.raises(jn.PhaseDomainError):
            jn.inductance_of_current(SIS_MODEL, np.array([1.01 * ic]))


class TestFitInductancePolynomial:
    def test_linear_junction(self):
        m = jn.ssms(LJ, 0.0)
        poly = jn.fit_inductance_polynomial(m, i_max=1e-6, order=4)
        assert poly.l0 == pytest.approx(LJ, rel=1e-9)
        for k, coef in enumerate(poly.coefficients[1:], start=1):
            assert abs(coef) * (1e-6) ** k < 1e-9 * LJ

    def test_sis_quadratic_coefficient_matches_series(self):
        # Oracle: Taylor series of L_J / sqrt(1 - (I/Ic)^2) gives
        # L2 = L_J / (2 Ic^2).
        ic = SIS_MODEL.critical_current
        poly = jn.fit_inductance_polynomial(SIS_MODEL, i_max=0.3 * ic, order=4)
        l2_expect = LJ / (2 * ic**2)
        assert poly.coefficients[2] == pytest.approx(l2_expect, rel=0.01)

    def test_ssms_l2_smaller_by_quartic_ratio(self):
        # Leading-order elimination of phi between I(phi) and L(phi) makes
        # L2(SSmS)/L2(SIS) = c4/c2 at equal L_J.
        ic_sis = SIS_MODEL.critical_current
        p_sis = jn.fit_inductance_polynomial(SIS_MODEL, i_max=0.2 * ic_sis, order=4)
        p_ssms = jn.fit_inductance_polynomial(SSMS_MODEL, i_max=0.2 * ic_sis, order=4)
        ratio = p_ssms.coefficients[2] / p_sis.coefficients[2]
        assert ratio == pytest.approx(5.3e-3, rel=0.05)

    def test_l0_within_1e6_of_lj(self):
        ic = SSMS_MODEL.critical_current
        poly = jn.fit_inductance_polynomial(SSMS_MODEL, i_max=0.5 * ic, order=6)
        assert poly.l0 == pytest.approx(LJ, rel=1e-6)

    def test_round_trip_within_reported_residual(self):
        ic = SSMS_MODEL.critical_current
        poly = jn.fit_inductance_polynomial(SSMS_MODEL, i_max=0.5 * ic, order=6)
        i = np.linspace(-poly.fit_domain, poly.fit_domain, 173)
        model_l = jn.inductance_of_current(SSMS_MODEL, i)
        rel = np.abs(poly.inductance(i) - model_l) / model_l
        assert np.max(rel) <= poly.fit_residual * (1 + 1e-9)

    def test_odd_coefficients_near_zero(self):
        ic = SIS_MODEL.critical_current
        poly = jn.fit_inductance_polynomial(SIS_MODEL, i_max=0.4 * ic, order=6)
        for k in (1, 3, 5):
            assert abs(poly.coefficients[k]) * poly.fit_domain**k < 1e-9 * LJ

    def test_rejections(self):
        with pytest.raises(ValueError):
            jn.fit_inductance_polynomial(
                SIS_MODEL, i_max=2 * SIS_MODEL.critical_current, order=4
            )
        with pytest.raises(ValueError):
            jn.fit_inductance_polynomial(SIS_MODEL, i_max=1e-7, order=1)
        with pytest.raises(ValueError):
            jn.fit_inductance_polynomial(SIS_MODEL, i_max=1e-7, order=200)

    def test_flux_is_integral_of_inductance(self):
        poly = jn.InductancePolynomial((1e-9, 0.0, 2e3), fit_domain=1e-5)
        i = 3e-6
        assert poly.flux(i) == pytest.approx(1e-9 * i + 2e3 * i**3 / 3, rel=1e-12)


class TestModelValidation:
    def test_bad_kind(self):
        with pytest.raises(ValueError):
            jn.JunctionModel("weird", 1e-9)

    def test_bad_params(self):
        with pytest.raises(ValueError):
            jn.JunctionModel(jn.SIS, -1e-9)
        with pytest.raises(ValueError):
            jn.JunctionModel(jn.SSMS_QUARTIC, 1e-9, c2=0.0)
        with pytest.raises(ValueError):
            jn.JunctionModel(jn.SSMS_QUARTIC, 1e-9, c4=-1.0)
        with pytest.raises(ValueError):
            jn.JunctionModel(jn.KOOPS_CPR, 1e-9, tau_star=1.0)
