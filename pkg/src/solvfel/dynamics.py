"""Collective phase/field dynamics in scaled and physical variables.

The scaled system is the universal single-mode FEL form::

    theta' = p
    p'     = -2 Re(A exp(i theta))          (= -2 A0 cos(theta + phi))
    A'     = <exp(-i theta)>                (A = A0 exp(i phi))

Integrating the complex field removes the 1/A0 singularity that the polar
form carries in its phase equation.  The physical system is the same flow
written for phases, angular momenta and the field amplitude in SI units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .diagnostics import trace_record
from .errors import DomainError, IntegrationDiverged
from .params import DerivedParams

PHASE_MODES = ("uniform-grid", "uniform-random")


class Derivative(NamedTuple):
    """Time derivative of a state: phases, momenta, complex field."""

    d_theta: np.ndarray
    d_mom: np.ndarray
    d_field: complex


def _check_arrays(theta, mom, label):
    if theta.ndim != 1 or theta.shape != mom.shape:
        raise DomainError(f"theta and {label} must be 1-d arrays of equal length")
    if theta.size < 2:
        raise DomainError(f"need at least 2 particles, got {theta.size}")


@dataclass(frozen=True)
class SimState:
    tau: float
    theta: np.ndarray
    p: np.ndarray
    field_re: float
    field_im: float

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        _check_arrays(self.theta, self.p, "p")

    @property
    def time(self):
        return self.tau

    @property
    def field(self) -> complex:
        return complex(self.field_re, self.field_im)

    @property
    def A0(self) -> float:
        return math.hypot(self.field_re, self.field_im)

    @property
    def phi(self) -> float:
        return math.atan2(self.field_im, self.field_re)

    @property
    def n_particles(self):
        return self.theta.size

    def advanced(self, h, d: Derivative) -> "SimState":
        f = self.field + h * d.d_field
        return SimState(self.tau + h, self.theta + h * d.d_theta, self.p + h * d.d_mom, f.real, f.imag)

    def at_time(self, tau) -> "SimState":
        return replace(self, tau=tau)

    def is_finite(self):
        return (
            math.isfinite(self.field_re)
            and math.isfinite(self.field_im)
            and bool(np.all(np.isfinite(self.theta)))
            and bool(np.all(np.isfinite(self.p)))
        )


@dataclass(frozen=True)
class PhysState:
    """Physical state: phases (rad), angular momenta (J s), field amplitude and shifted phase."""

    t: float
    theta: np.ndarray
    L: np.ndarray
    A0: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "L", np.asarray(self.L, dtype=float))
        _check_arrays(self.theta, self.L, "L")
        if self.A0 < 0:
            raise DomainError("field amplitude must be non-negative")

    @property
    def time(self):
        return self.t

    @property
    def field(self) -> complex:
        return self.A0 * complex(math.cos(self.phi), math.sin(self.phi))

    def advanced(self, h, d: Derivative) -> "PhysState":
        f = self.field + h * d.d_field
        return PhysState(self.t + h, self.theta + h * d.d_theta, self.L + h * d.d_mom, abs(f), math.atan2(f.imag, f.real))

    def at_time(self, t) -> "PhysState":
        return replace(self, t=t)

    def is_finite(self):
        return (
            math.isfinite(self.A0)
            and math.isfinite(self.phi)
            and bool(np.all(np.isfinite(self.theta)))
            and bool(np.all(np.isfinite(self.L)))
        )


class PhysRecord(NamedTuple):
    t: float
    A0: float
    phi: float


def phys_record(state: PhysState) -> PhysRecord:
    return PhysRecord(float(state.t), float(state.A0), float(state.phi))


@dataclass(frozen=True)
class SimConfig:
    N_p: int = 8192
    seed: int = 1
    A0_init: float = 1e-6
    phi_init: float = 0.0
    bunching_seed: float = 0.0
    p_spread: float = 0.0
    d_tau: float = 1e-3
    tau_max: float = 12.0
    phase_init_mode: str = "uniform-random"
    record_stride: int = 10

    def __post_init__(self):
        if isinstance(self.N_p, bool) or int(self.N_p) != self.N_p or self.N_p < 2:
            raise DomainError(f"N_p must be an integer >= 2, got {self.N_p!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not self.d_tau > 0:
            raise DomainError("d_tau must be positive")
        if not self.tau_max > 0:
            raise DomainError("tau_max must be positive")
        if not self.A0_init >= 0:
            raise DomainError("A0_init must be non-negative")
        if not self.p_spread >= 0:
            raise DomainError("p_spread must be non-negative")
        if not math.isfinite(self.phi_init) or not math.isfinite(self.bunching_seed):
            raise DomainError("phi_init and bunching_seed must be finite")
        if self.phase_init_mode not in PHASE_MODES:
            raise DomainError(f"phase_init_mode must be one of {PHASE_MODES}, got {self.phase_init_mode!r}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise DomainError("record_stride must be a positive integer")


def init_state(cfg: SimConfig) -> SimState:
    """Initial scaled state; bit-identical for identical configs."""
    n = int(cfg.N_p)
    phase_seq, mom_seq = np.random.SeedSequence(int(cfg.seed)).spawn(2)
    if cfg.phase_init_mode == "uniform-grid":
        theta = 2.0 * np.pi * np.arange(n) / n
    else:
        theta = np.random.default_rng(phase_seq).uniform(0.0, 2.0 * np.pi, n)
    if cfg.p_spread > 0:
        p = np.random.default_rng(mom_seq).normal(0.0, cfg.p_spread, n)
    else:
        p = np.zeros(n)
    if cfg.bunching_seed:
        theta = theta + cfg.bunching_seed * np.sin(theta)
    f = cfg.A0_init * complex(math.cos(cfg.phi_init), math.sin(cfg.phi_init))
    return SimState(0.0, theta, p, f.real, f.imag)


def deriv_scaled(s: SimState) -> Derivative:
    c = np.cos(s.theta)
    sn = np.sin(s.theta)
    d_p = -2.0 * (s.field_re * c - s.field_im * sn)
    return Derivative(s.p, d_p, complex(np.mean(c), -np.mean(sn)))


def deriv_unscaled(s: PhysState, dp: DerivedParams) -> Derivative:
    """Physical right-hand side.

    The amplitude/phase pair is advanced as the complex field
    ``A0 exp(i phi)`` with derivative ``beta <exp(-i theta)>``; its polar
    components are ``beta <cos(theta+phi)>`` and ``-(beta/A0) <sin(theta+phi)>``.
    """
    c = np.cos(s.theta)
    sn = np.sin(s.theta)
    f = s.field
    d_theta = 2.0 * s.L / (dp.n * dp.I_w) - dp.omega_c
    torque = 0.5 * dp.omega_c * dp.delta_n * dp.d0_tilde_ave
    d_L = -torque * (f.real * c - f.imag * sn)
    return Derivative(d_theta, d_L, dp.beta * complex(np.mean(c), -np.mean(sn)))


def polar_rates(state, d: Derivative):
    """``(dA0/dt, dphi/dt)`` from a complex field derivative; needs A0 > 0."""
    f = state.field
    a0 = abs(f)
    rot = d.d_field * f.conjugate() / a0
    return rot.real, rot.imag / a0


def _rk4_step(s, rhs, h):
    k1 = rhs(s)
    k2 = rhs(s.advanced(0.5 * h, k1))
    k3 = rhs(s.advanced(0.5 * h, k2))
    k4 = rhs(s.advanced(h, k3))
    combined = Derivative(
        (k1.d_theta + 2.0 * k2.d_theta + 2.0 * k3.d_theta + k4.d_theta) / 6.0,
        (k1.d_mom + 2.0 * k2.d_mom + 2.0 * k3.d_mom + k4.d_mom) / 6.0,
        (k1.d_field + 2.0 * k2.d_field + 2.0 * k3.d_field + k4.d_field) / 6.0,
    )
    return s.advanced(h, combined)


def integrate(
    s0,
    rhs: Callable,
    d_tau: float,
    tau_max: float,
    observer: Optional[Callable] = None,
    record_stride: int = 10,
    recorder: Callable = trace_record,
):
    """Classical fixed-step RK4 from ``s0`` over a duration ``tau_max``.

    Times are in the state's own unit (scaled tau or seconds).  ``observer``
    receives ``recorder(state)`` at the start, every ``record_stride`` steps
    and at the final step.  Returns the final state.
    """
    if not d_tau > 0:
        raise DomainError("d_tau must be positive")
    if not tau_max >= d_tau:
        raise DomainError("tau_max must be at least one step")
    if record_stride < 1:
        raise DomainError("record_stride must be >= 1")
    n_steps = int(round(tau_max / d_tau))
    t0 = s0.time
    s = s0
    if observer is not None:
        observer(recorder(s))
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n_steps + 1):
            nxt = _rk4_step(s, rhs, d_tau).at_time(t0 + k * d_tau)
            if not nxt.is_finite():
                raise IntegrationDiverged(
                    f"non-finite state at step {k} (time {t0 + k * d_tau:g})",
                    last_record=recorder(s),
                )
            s = nxt
            if observer is not None and (k % record_stride == 0 or k == n_steps):
                observer(recorder(s))
    return s


def to_scaled(s: PhysState, dp: DerivedParams) -> SimState:
    p = dp.t_scale * (2.0 * s.L / (dp.n * dp.I_w) - dp.omega_c)
    amp = s.A0 / dp.a_scale
    return SimState(s.t / dp.t_scale, s.theta.copy(), p, amp * math.cos(s.phi), amp * math.sin(s.phi))


def to_physical(s: SimState, dp: DerivedParams) -> PhysState:
    L = 0.5 * dp.n * dp.I_w * (dp.omega_c + s.p / dp.t_scale)
    return PhysState(s.tau * dp.t_scale, s.theta.copy(), L, s.A0 * dp.a_scale, s.phi)


def pulse_phase(theta0, k, t, omega_c):
    """Bare field phase ``phi0`` of the pulse solution at time ``t``."""
    return -(omega_c * t + theta0 + 0.5 * math.pi + k * math.pi)


def pulse_solution_residual(theta0, k, t, A0, dp: DerivedParams, phase_error=0.0):
    """Right-hand side of the two-level phase equation on the pulse family.

    On the family the shifted phase ``phi = phi0 + omega_c t`` equals
    ``-(theta0 + pi/2 + k pi)``; the ``omega_c t`` terms cancel exactly and
    are dropped before rounding.  ``phase_error`` offsets ``phi`` to probe
    departures from the family.
    """
    if int(k) != k:
        raise DomainError("k must be an integer")
    phi = -(theta0 + 0.5 * math.pi + k * math.pi) + phase_error
    return A0 * dp.omega_c * dp.d0_tilde_ave * math.cos(theta0 + phi)
