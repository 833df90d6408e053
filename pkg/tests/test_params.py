import math
import warnings
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solvfel import params as P
from solvfel.errors import DegenerateCouplingError, DomainError, PolarizationRangeError

# Literal CODATA-2018 values, kept separate from the package's table.
C = 299792458.0
HBAR = 1.054571817e-34
KB = 1.380649e-23
MP = 1.67262192369e-27
E = 1.602176634e-19
MU0 = 1.25663706212e-6

log_uniform = st.floats(min_value=-6.0, max_value=6.0).map(lambda x: 10.0**x)


def test_codata_table_pinned():
    k = P.CODATA
    assert (k.c, k.hbar, k.k_B, k.m_p, k.e_charge, k.mu0) == (C, HBAR, KB, MP, E, MU0)


def test_constants_must_be_positive():
    with pytest.raises(DomainError):
        P.PhysicalConstants(hbar=0.0)


class TestResonance:
    def test_coherence_length_default(self):
        res = P.resonance_params(16_000.0)
        assert res.l_c == pytest.approx(62.5e-6, rel=1e-15)
        assert abs(res.l_c / 63e-6 - 1) < 0.02

    def test_gap_over_kT_at_room_temperature(self):
        oracle = HBAR * C * 16_000.0 / (KB * 300.0)
        ratio = P.resonance_params(16_000.0).eps / (KB * 300.0)
        assert ratio == pytest.approx(oracle, rel=1e-15)
        assert round(ratio, 3) == 0.122
        assert abs(ratio / 0.12 - 1) < 0.03

    def test_unit_wavenumber(self):
        res = P.resonance_params(1.0)
        assert res.l_c == 1.0
        assert res.omega_c == C

    def test_gap_identities(self):
        res = P.resonance_params(16_000.0)
        assert res.l_c * 16_000.0 == 1.0
        assert res.omega_c == pytest.approx(C / res.l_c, rel=1e-15)
        assert res.eps == pytest.approx(HBAR * res.omega_c, rel=1e-15)

    @pytest.mark.parametrize("k", [0.0, -5.0, math.nan])
    def test_rejects_non_positive(self, k):
        with pytest.raises(DomainError):
            P.resonance_params(k)


class TestDipole:
    def test_default_dipole(self):
        d0, dt = P.dipole_constants(0.2e-10)
        assert d0 == pytest.approx(2 * E * 0.2e-10, rel=1e-15)
        assert f"{d0:.3e}" == "6.409e-30"

    def test_rescaling_factor(self):
        d0, dt = P.dipole_constants(0.37e-10)
        assert dt / d0 == pytest.approx(math.sqrt(2 / 3), rel=1e-15)
        assert round(dt / d0, 4) == 0.8165

    def test_zero_rejected(self):
        with pytest.raises(DomainError):
            P.dipole_constants(0.0)


class TestMomentOfInertia:
    def test_default(self):
        I_w = P.moment_of_inertia(0.82e-10)
        assert I_w == pytest.approx(2 * MP * 0.82e-10**2, rel=1e-15)
        assert f"{I_w:.3e}" == "2.249e-47"

    def test_quadratic(self):
        assert P.moment_of_inertia(1.64e-10) == pytest.approx(4 * P.moment_of_inertia(0.82e-10), rel=1e-15)

    def test_unit_length(self):
        assert P.moment_of_inertia(1.0) == 2 * MP

    def test_rejects_zero(self):
        with pytest.raises(DomainError):
            P.moment_of_inertia(0.0)


class TestPopulationDifference:
    eps = HBAR * C * 16_000.0

    def test_worked_value(self):
        dn = P.population_difference(30, self.eps, 300.0)
        assert dn == pytest.approx(30 * math.tanh(self.eps / (KB * 300.0)), rel=1e-15)
        assert round(dn, 2) == 3.65
        assert abs(dn / 3.6 - 1) < 0.03

    def test_hot_limit(self):
        assert P.population_difference(30, self.eps, 1e12) < 1e-8

    def test_cold_limit(self):
        assert P.population_difference(30, self.eps, 1e-3) == pytest.approx(30.0, rel=1e-15)

    @pytest.mark.parametrize("T", [0.0, -1.0])
    def test_rejects_non_positive_temperature(self, T):
        with pytest.raises(DomainError):
            P.population_difference(30, self.eps, T)

    @given(st.floats(1.0, 1e4), st.floats(1.0, 1e4), st.integers(1, 100))
    def test_monotone(self, T1, T2, n):
        lo, hi = sorted((T1, T2))
        assert P.population_difference(n, self.eps, hi) <= P.population_difference(n, self.eps, lo)
        assert P.population_difference(n + 1, self.eps, lo) > P.population_difference(n, self.eps, lo)
        assert 0 < P.population_difference(n, self.eps, lo) <= n


class TestPolarization:
    def test_linear_law(self):
        assert P.polarization_from_field(1e6) == pytest.approx(9.1e-3, rel=1e-15)

    def test_zero_field(self):
        assert P.polarization_from_field(0.0) == 0.0

    def test_over_unity_is_an_error(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(PolarizationRangeError):
                P.polarization_from_field(2e8)

    def test_validity_warning(self):
        with pytest.warns(UserWarning, match="validity"):
            P.polarization_from_field(5e7)

    def test_negative_field(self):
        with pytest.raises(DomainError):
            P.polarization_from_field(-1.0)


def _oracle_alpha_beta(n, T, rho, pz):
    eps = HBAR * C * 16_000.0
    dn = n * math.tanh(eps / (KB * T))
    dt_ave = pz * 2 * E * 0.2e-10 * math.sqrt(2 / 3)
    alpha = dn * (C * 16_000.0) * dt_ave / (n * 2 * MP * 0.82e-10**2)
    beta = MU0 * C**2 * rho * dn * dt_ave / 2
    return alpha, beta


class TestCoupling:
    def _coeffs(self, pz, rho=6.022e23, n=30, T=300.0):
        d = P.derive(P.MediumParams(n=n, T=T, rho=rho, E0z=None, Pz_override=pz))
        return d.alpha, d.beta

    def test_alpha_worked_value(self):
        alpha, _ = self._coeffs(0.1)
        assert alpha == pytest.approx(_oracle_alpha_beta(30, 300.0, 6.022e23, 0.1)[0], rel=1e-13)
        assert f"{alpha:.3e}" == "1.356e+28"

    def test_beta_worked_value(self):
        _, beta = self._coeffs(0.1)
        assert beta == pytest.approx(_oracle_alpha_beta(30, 300.0, 6.022e23, 0.1)[1], rel=1e-13)
        assert f"{beta:.2e}" == "6.49e+04"

    def test_linear_in_polarization(self):
        a1, b1 = self._coeffs(0.1)
        a2, b2 = self._coeffs(0.2)
        assert a2 / a1 == pytest.approx(2.0, rel=1e-15)
        assert b2 / b1 == pytest.approx(2.0, rel=1e-15)

    def test_zero_polarization(self):
        with pytest.raises(DegenerateCouplingError):
            P.coupling_coefficients(3.6, 4.8e12, 0.0, 30, 2.2e-47, 6e23)
        with pytest.raises(DegenerateCouplingError):
            P.MediumParams(E0z=0.0)


class TestScaleFactors:
    def test_fixed_point(self):
        assert P.scale_factors(2.0, 1.0) == (1.0, 1.0)

    @given(log_uniform, log_uniform)
    def test_round_trip_identities(self, alpha, beta):
        a, t = P.scale_factors(alpha, beta)
        assert alpha * a * t**2 == pytest.approx(2.0, rel=1e-12)
        assert beta * t / a == pytest.approx(1.0, rel=1e-12)
        a8, t8 = P.scale_factors(8 * alpha, 8 * beta)
        assert 8 * alpha * a8 * t8**2 == pytest.approx(2.0, rel=1e-12)
        # a ~ (beta**2 / alpha)**(1/3): scaling both by 8 doubles it
        assert a8 / a == pytest.approx(2.0, rel=1e-12)

    @pytest.mark.parametrize("alpha,beta", [(0.0, 1.0), (1.0, -1.0)])
    def test_rejects(self, alpha, beta):
        with pytest.raises(DomainError):
            P.scale_factors(alpha, beta)

    def test_worked_time_scale(self):
        rho, pz = 6.022e23, 0.1
        d = P.derive(P.MediumParams(rho=rho, E0z=None, Pz_override=pz))
        assert d.t_scale == pytest.approx(2.39e-4 * rho ** (-1 / 3) * pz ** (-2 / 3), rel=5e-3)


class TestDesignFormulas:
    def test_coefficients(self):
        pred = P.design_formulas(6.022e23, 9.1e-3)
        alpha, beta = _oracle_alpha_beta(30, 300.0, 6.022e23, 9.1e-3)
        a_oracle = (2 * beta**2 / alpha) ** (1 / 3)
        assert pred.A_sat == pytest.approx(a_oracle, rel=1e-13)
        assert f"{pred.c_A_eff:.2e}" == "2.58e-22"
        assert f"{pred.c_t_eff:.2e}" == "2.39e-04"
        assert abs(pred.c_A_eff / 2.6e-22 - 1) < 0.05
        assert abs(pred.c_t_eff / 2.4e-4 - 1) < 0.05

    def test_gain_time_example(self):
        pred = P.design_formulas(6.022e23, P.polarization_from_field(1e6))
        assert f"{pred.t_gain:.1e}" == "6.5e-11"

    @given(st.floats(18.0, 28.0), st.floats(-5.0, 0.0))
    @settings(max_examples=50)
    def test_coefficients_independent_of_rho_and_pz(self, lg_rho, lg_pz):
        ref = P.design_formulas(6.022e23, 9.1e-3)
        pred = P.design_formulas(10.0**lg_rho, 10.0**lg_pz)
        assert pred.c_A_eff == pytest.approx(ref.c_A_eff, rel=1e-10)
        assert pred.c_t_eff == pytest.approx(ref.c_t_eff, rel=1e-10)

    @pytest.mark.parametrize("pz,exc", [(0.0, DegenerateCouplingError), (1.5, PolarizationRangeError)])
    def test_bad_polarization(self, pz, exc):
        with pytest.raises(exc):
            P.design_formulas(6e23, pz)


class TestLennardJones:
    def test_zero_at_sigma(self):
        assert P.lennard_jones(1e-10, 2.0, 1e-10) == 0.0

    def test_minimum(self):
        # dV/dr = 0 analytically at r = 2**(1/6) sigma, where V = -eps
        assert P.lennard_jones(2 ** (1 / 6) * 3e-10, 1.5, 3e-10) == pytest.approx(-1.5, rel=1e-12)

    def test_decays_from_below(self):
        v = P.lennard_jones(1e3, 1.0, 1.0)
        assert -1e-17 < v < 0

    def test_singularity(self):
        with pytest.raises(DomainError):
            P.lennard_jones(0.0, 1.0, 1.0)

    @given(st.floats(0.05, 50.0).filter(lambda r: abs(r - 1.0) > 1e-9))
    def test_single_sign_change(self, r):
        v = P.lennard_jones(r, 1.0, 1.0)
        assert (v < 0) == (r > 1.0)


class TestSlippage:
    def test_slow_ions(self):
        s = P.slippage_check(1e-4, 1e-3, 1.0)
        assert s.l_s == pytest.approx((C - 1.0) * 1e-3, rel=1e-15)
        assert f"{s.l_s:.1e}" == "3.0e+05"
        assert s.condition_met

    def test_half_light_speed(self):
        assert P.slippage_check(1e-3, 1.0, C / 2).l_s == pytest.approx(1.0, rel=1e-15)

    def test_equal_lengths_fail(self):
        l_s = P.slippage_check(1.0, 1.0, C / 2).l_s
        res = P.slippage_check(l_s, 1.0, C / 2)
        assert res.ratio == 1.0
        assert not res.condition_met

    def test_superluminal(self):
        with pytest.raises(DomainError):
            P.slippage_check(1.0, 1.0, C)


class TestMedium:
    def test_hydration_warning(self):
        with pytest.warns(UserWarning, match="hydration"):
            P.MediumParams(n=5)

    def test_needs_concentration(self):
        with pytest.raises(DomainError):
            P.MediumParams(rho=None)

    def test_rho_must_match_count(self):
        P.MediumParams(rho=6e23, N_ions=6e11, V=1e-12)
        with pytest.raises(DomainError, match="disagrees"):
            P.MediumParams(rho=6e23, N_ions=7e11, V=1e-12)

    def test_exactly_one_polarization_source(self):
        with pytest.raises(DomainError):
            P.MediumParams(E0z=1e6, Pz_override=0.1)
        with pytest.raises(DomainError):
            P.MediumParams(E0z=None)

    def test_rejects_bad_temperature(self):
        with pytest.raises(DomainError):
            P.MediumParams(T=0.0)


def test_derived_invariants():
    d = P.derive(P.MediumParams())
    assert d.l_c * 16_000.0 == 1.0
    assert d.eps == pytest.approx(HBAR * d.omega_c, rel=1e-15)
    assert d.d0_tilde / d.d0 == pytest.approx(math.sqrt(2 / 3), rel=1e-15)
    assert 0 < d.delta_n < d.n
    assert d.d0_tilde_ave == pytest.approx(d.P_z * d.d0_tilde, rel=1e-15)
    assert d.alpha * d.a_scale * d.t_scale**2 == pytest.approx(2.0, rel=1e-12)
    assert d.beta * d.t_scale / d.a_scale == pytest.approx(1.0, rel=1e-12)


def test_perturbed_constants_flow_through():
    k = replace(P.CODATA, mu0=2 * P.CODATA.mu0)
    base = P.derive(P.MediumParams())
    pert = P.derive(P.MediumParams(), k)
    assert pert.beta / base.beta == pytest.approx(2.0, rel=1e-15)
    assert pert.alpha == base.alpha
