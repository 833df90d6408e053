"""Physical constants, scenario parameters and every derived coupling.

All functions here are pure.  SI units throughout; "scaled" quantities are
dimensionless and carry the suffix ``_scaled`` wherever they leave this
package.
"""

from __future__ import annotations

import math
import numbers
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .errors import DegenerateCouplingError, DomainError, PolarizationRangeError


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA-2018 SI values.

    ``mu0`` stands in for the permeability of water (non-magnetic medium).
    """

    c: float = 299_792_458.0
    hbar: float = 1.054571817e-34
    k_B: float = 1.380649e-23
    m_p: float = 1.67262192369e-27
    e_charge: float = 1.602176634e-19
    mu0: float = 1.25663706212e-6

    def __post_init__(self):
        for name in ("c", "hbar", "k_B", "m_p", "e_charge", "mu0"):
            if not getattr(self, name) > 0:
                raise DomainError(f"physical constant {name} must be positive")


CODATA = PhysicalConstants()

# Polarization per unit static field, m/V.  Taken as given.
C_P = 9.1e-9
# Static field above which the linear polarization law is no longer trusted.
E0Z_LINEAR_LIMIT = 1e7

DEFAULT_WAVENUMBER = 16_000.0  # 160 cm^-1
DEFAULT_D_E = 0.2e-10
DEFAULT_D_G = 0.82e-10
DEFAULT_N = 30
DEFAULT_T = 300.0
DEFAULT_RHO = 6.022e23
DEFAULT_E0Z = 1e6
DEFAULT_V = 1e-12

HYDRATION_RANGE = (20, 40)


def _positive(name, value):
    if not (isinstance(value, numbers.Real) and not isinstance(value, bool) and math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class MediumParams:
    """Scenario description: solvated-ion medium plus static field.

    Give either ``rho`` or ``N_ions`` (or both, if consistent with ``V``), and
    exactly one of ``E0z`` / ``Pz_override``.
    """

    n: int = DEFAULT_N
    T: float = DEFAULT_T
    rho: Optional[float] = DEFAULT_RHO
    E0z: Optional[float] = DEFAULT_E0Z
    Pz_override: Optional[float] = None
    N_ions: Optional[float] = None
    V: float = DEFAULT_V
    wavenumber: float = DEFAULT_WAVENUMBER
    d_e: float = DEFAULT_D_E
    d_g: float = DEFAULT_D_G

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, numbers.Integral) or self.n < 1:
            raise DomainError(f"hydration number n must be an integer >= 1, got {self.n!r}")
        lo, hi = HYDRATION_RANGE
        if not lo <= self.n <= hi:
            warnings.warn(
                f"hydration number n={self.n} outside the observed range [{lo}, {hi}]",
                stacklevel=3,
            )
        _positive("T", self.T)
        _positive("V", self.V)
        _positive("wavenumber", self.wavenumber)
        _positive("d_e", self.d_e)
        _positive("d_g", self.d_g)
        if self.rho is None and self.N_ions is None:
            raise DomainError("one of rho or N_ions is required")
        if self.rho is not None:
            _positive("rho", self.rho)
        if self.N_ions is not None:
            if not self.N_ions >= 1:
                raise DomainError(f"N_ions must be >= 1, got {self.N_ions!r}")
            if self.rho is not None:
                implied = self.N_ions / self.V
                if abs(implied - self.rho) > 1e-6 * self.rho:
                    raise DomainError(
                        f"rho={self.rho!r} disagrees with N_ions/V={implied!r}"
                    )
        if (self.E0z is None) == (self.Pz_override is None):
            raise DomainError("exactly one of E0z or Pz_override must be given")
        pz = self.P_z
        if pz == 0:
            raise DegenerateCouplingError("P_z = 0: no permanent polarization")

    @property
    def concentration(self) -> float:
        """Ion number concentration N/V in m^-3."""
        if self.rho is not None:
            return float(self.rho)
        return self.N_ions / self.V

    @property
    def ion_count(self) -> float:
        if self.N_ions is not None:
            return float(self.N_ions)
        return self.rho * self.V

    @property
    def P_z(self) -> float:
        if self.Pz_override is not None:
            pz = float(self.Pz_override)
            if not 0 <= pz <= 1:
                raise PolarizationRangeError(f"Pz_override must lie in [0, 1], got {pz!r}")
            return pz
        return polarization_from_field(self.E0z)


@dataclass(frozen=True)
class DerivedParams:
    """Everything computed from a :class:`MediumParams`."""

    n: int
    l_c: float
    omega_c: float
    eps: float
    d0: float
    d0_tilde: float
    I_w: float
    delta_n: float
    P_z: float
    d0_tilde_ave: float
    alpha: float
    beta: float
    a_scale: float
    t_scale: float
    constants: PhysicalConstants = field(default=CODATA, repr=False)

    def as_dict(self):
        return {
            "n": self.n,
            "l_c": self.l_c,
            "omega_c": self.omega_c,
            "eps": self.eps,
            "d0": self.d0,
            "d0_tilde": self.d0_tilde,
            "I_w": self.I_w,
            "delta_n": self.delta_n,
            "P_z": self.P_z,
            "d0_tilde_ave": self.d0_tilde_ave,
            "alpha": self.alpha,
            "beta": self.beta,
            "a_scale": self.a_scale,
            "t_scale": self.t_scale,
        }


class Resonance(NamedTuple):
    l_c: float
    omega_c: float
    eps: float


class DesignPrediction(NamedTuple):
    A_sat: float
    t_gain: float
    c_A_eff: float
    c_t_eff: float


class Slippage(NamedTuple):
    l_s: float
    ratio: float
    condition_met: bool


def resonance_params(wavenumber, constants=CODATA):
    """Coherence length, angular frequency and two-level gap.

    The wavenumber is used without a 2*pi: ``l_c = 1/wavenumber``.
    """
    _positive("wavenumber", wavenumber)
    l_c = 1.0 / wavenumber
    omega_c = constants.c * wavenumber
    eps = constants.hbar * constants.c * wavenumber
    return Resonance(l_c, omega_c, eps)


def dipole_constants(d_e, constants=CODATA):
    """Return ``(d0, d0_tilde)`` for dipole half-length ``d_e``.

    ``d0_tilde`` absorbs the angular matrix element of the ground-to-first
    excited rotational transition, a factor sqrt(2/3).
    """
    _positive("d_e", d_e)
    d0 = 2.0 * constants.e_charge * d_e
    return d0, d0 * math.sqrt(2.0 / 3.0)


def moment_of_inertia(d_g, constants=CODATA):
    _positive("d_g", d_g)
    return 2.0 * constants.m_p * d_g**2


def population_difference(n, eps, T, constants=CODATA):
    """Thermal excess of ground over excited waters per ion."""
    if not n >= 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    _positive("T", T)
    _positive("eps", eps)
    return n * math.tanh(eps / (constants.k_B * T))


def polarization_from_field(E0z):
    """Linear polarization law ``P_z = C_P * E0z``.

    Raises rather than clamps when the result exceeds 1.
    """
    if not (math.isfinite(E0z) and E0z >= 0):
        raise DomainError(f"E0z must be a non-negative finite field, got {E0z!r}")
    if E0z > E0Z_LINEAR_LIMIT:
        warnings.warn(
            f"E0z={E0z:g} V/m exceeds the {E0Z_LINEAR_LIMIT:g} V/m validity of the "
            "linear polarization law",
            stacklevel=2,
        )
    pz = C_P * E0z
    if pz > 1:
        raise PolarizationRangeError(f"E0z={E0z:g} V/m gives P_z={pz:.4g} > 1")
    return pz


def coupling_coefficients(delta_n, omega_c, d0_tilde_ave, n, I_w, rho, constants=CODATA):
    """Return ``(alpha, beta)``.

    alpha couples the field amplitude to the phase acceleration
    (``theta'' = -alpha * A0 * cos``); beta is the rate at which bunching
    drives the field (``A0' = beta * <cos>``).
    """
    if d0_tilde_ave == 0:
        raise DegenerateCouplingError("zero permanent polarization: system has no drive")
    for name, value in (
        ("delta_n", delta_n),
        ("omega_c", omega_c),
        ("d0_tilde_ave", d0_tilde_ave),
        ("n", n),
        ("I_w", I_w),
        ("rho", rho),
    ):
        _positive(name, value)
    alpha = delta_n * omega_c * d0_tilde_ave / (n * I_w)
    beta = constants.mu0 * constants.c**2 * rho * delta_n * d0_tilde_ave / 2.0
    return alpha, beta


def scale_factors(alpha, beta):
    """Return ``(a_scale, t_scale)`` with ``A0 = a_scale * A0_scaled``, ``t = t_scale * tau``."""
    _positive("alpha", alpha)
    _positive("beta", beta)
    a_scale = (2.0 * beta**2 / alpha) ** (1.0 / 3.0)
    t_scale = (2.0 / (alpha * beta)) ** (1.0 / 3.0)
    return a_scale, t_scale


def derive(medium: MediumParams, constants: PhysicalConstants = CODATA) -> DerivedParams:
    res = resonance_params(medium.wavenumber, constants)
    d0, d0_tilde = dipole_constants(medium.d_e, constants)
    I_w = moment_of_inertia(medium.d_g, constants)
    delta_n = population_difference(medium.n, res.eps, medium.T, constants)
    pz = medium.P_z
    d0_tilde_ave = pz * d0_tilde
    alpha, beta = coupling_coefficients(
        delta_n, res.omega_c, d0_tilde_ave, medium.n, I_w, medium.concentration, constants
    )
    a_scale, t_scale = scale_factors(alpha, beta)
    return DerivedParams(
        n=medium.n,
        l_c=res.l_c,
        omega_c=res.omega_c,
        eps=res.eps,
        d0=d0,
        d0_tilde=d0_tilde,
        I_w=I_w,
        delta_n=delta_n,
        P_z=pz,
        d0_tilde_ave=d0_tilde_ave,
        alpha=alpha,
        beta=beta,
        a_scale=a_scale,
        t_scale=t_scale,
        constants=constants,
    )


def design_formulas(
    rho,
    P_z,
    n=DEFAULT_N,
    T=DEFAULT_T,
    wavenumber=DEFAULT_WAVENUMBER,
    d_e=DEFAULT_D_E,
    d_g=DEFAULT_D_G,
    constants=CODATA,
):
    """Saturated field amplitude and gain time, plus their factored coefficients.

    ``A_sat = c_A * rho**(2/3) * P_z**(1/3)`` and
    ``t_gain = c_t * rho**(-1/3) * P_z**(-2/3)``; the returned ``c_A_eff``
    and ``c_t_eff`` depend on (n, T) and the material constants only.
    """
    _positive("rho", rho)
    if not 0 < P_z <= 1:
        if P_z == 0:
            raise DegenerateCouplingError("P_z = 0: system has no drive")
        raise PolarizationRangeError(f"P_z must lie in (0, 1], got {P_z!r}")
    res = resonance_params(wavenumber, constants)
    _, d0_tilde = dipole_constants(d_e, constants)
    I_w = moment_of_inertia(d_g, constants)
    delta_n = population_difference(n, res.eps, T, constants)
    alpha, beta = coupling_coefficients(
        delta_n, res.omega_c, P_z * d0_tilde, n, I_w, rho, constants
    )
    a_scale, t_scale = scale_factors(alpha, beta)
    c_A = a_scale / (rho ** (2.0 / 3.0) * P_z ** (1.0 / 3.0))
    c_t = t_scale * rho ** (1.0 / 3.0) * P_z ** (2.0 / 3.0)
    return DesignPrediction(a_scale, t_scale, c_A, c_t)


def lennard_jones(r, eps_LJ, sigma_LJ):
    """Ion-water Lennard-Jones potential; zero at ``r = sigma_LJ``."""
    _positive("r", r)
    _positive("eps_LJ", eps_LJ)
    _positive("sigma_LJ", sigma_LJ)
    x6 = (sigma_LJ / r) ** 6
    return 4.0 * eps_LJ * (x6 * x6 - x6)


def slippage_check(l_b, l_g, v, threshold=0.01, constants=CODATA):
    """Slippage length ``(c - v) * l_g / v`` and whether ``l_b << l_s`` holds.

    ``condition_met`` is ``l_b / l_s < threshold``.
    """
    _positive("l_b", l_b)
    _positive("l_g", l_g)
    _positive("v", v)
    if v >= constants.c:
        raise DomainError(f"ion speed must be below c, got {v!r}")
    l_s = (constants.c - v) * l_g / v
    ratio = l_b / l_s
    return Slippage(l_s, ratio, ratio < threshold)
