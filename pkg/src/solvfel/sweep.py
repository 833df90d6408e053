"""Parameter sweeps and recovery of the scaling laws."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from . import diagnostics as dg
from .dynamics import (
    SimConfig,
    deriv_scaled,
    deriv_unscaled,
    init_state,
    integrate,
    phys_record,
    to_physical,
)
from .errors import DomainError, SolvfelError
from .params import CODATA, MediumParams, derive, design_formulas

AXES = ("rho", "E0z", "N_ions", "T", "n")
OBSERVABLES = ("sat_amplitude_physical", "gain_time_physical", "sat_intensity_physical")
MODES = ("per_row", "shared")

# Saturation detection threshold in scaled amplitude.
SAT_THRESHOLD = 0.5


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: Sequence[float]
    base: MediumParams = field(default_factory=MediumParams)
    sim: SimConfig = field(
        default_factory=lambda: SimConfig(N_p=512, d_tau=5e-3, tau_max=14.0, record_stride=2)
    )
    observable: str = "sat_amplitude_physical"
    mode: str = "per_row"

    def __post_init__(self):
        if self.axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.observable not in OBSERVABLES:
            raise DomainError(f"observable must be one of {OBSERVABLES}, got {self.observable!r}")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        vals = [float(v) for v in self.values]
        if len(vals) < 3:
            raise DomainError(f"a sweep needs at least 3 axis values, got {len(vals)}")
        if any(not (math.isfinite(v) and v > 0) for v in vals):
            raise DomainError("axis values must be finite and positive")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise DomainError("axis values must be strictly ascending")
        object.__setattr__(self, "values", tuple(vals))


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    observable: float
    tau_sat: float
    A_peak: float
    growth_rate: float
    status: str = "ok"


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: List[SweepRow]
    fit: Optional[dg.PowerLawFit]


def medium_at(base: MediumParams, axis: str, value: float) -> MediumParams:
    """``base`` with one axis replaced; concentration and ion count stay consistent."""
    if axis == "rho":
        return replace(base, rho=value, N_ions=None)
    if axis == "N_ions":
        return replace(base, N_ions=value, rho=None)
    if axis == "E0z":
        return replace(base, E0z=value, Pz_override=None)
    if axis == "T":
        return replace(base, T=value)
    if int(value) != value:
        raise DomainError(f"hydration number must be an integer, got {value!r}")
    return replace(base, n=int(value))


@dataclass(frozen=True)
class _Measured:
    """Saturation measurements of one run, in scaled units."""

    tau_sat: float
    A_peak: float
    tau_gain: float
    growth_rate: float


def _measure_scaled(sim: SimConfig) -> _Measured:
    trace = []
    integrate(init_state(sim), deriv_scaled, sim.d_tau, sim.tau_max, trace.append, sim.record_stride)
    tau_sat, a_peak = dg.detect_saturation(trace, SAT_THRESHOLD)
    tau = [r.tau for r in trace]
    amp = [r.A0_scaled for r in trace]
    return _Measured(tau_sat, a_peak, dg.first_crossing(tau, amp, 1.0), _growth_or_nan(trace))


def _growth_or_nan(trace):
    try:
        return dg.fit_growth_rate_modal(trace)
    except SolvfelError:
        return float("nan")


def _observable(name, a_peak_phys, t_gain_phys):
    if name == "sat_amplitude_physical":
        return a_peak_phys
    if name == "gain_time_physical":
        return t_gain_phys
    return a_peak_phys**2


def _row_per_row(spec: SweepSpec, value: float, constants) -> SweepRow:
    """Full physical-unit simulation for one axis value."""
    dp = derive(medium_at(spec.base, spec.axis, value), constants)
    sim = spec.sim
    phys = []
    integrate(
        to_physical(init_state(sim), dp),
        lambda s: deriv_unscaled(s, dp),
        sim.d_tau * dp.t_scale,
        sim.tau_max * dp.t_scale,
        phys.append,
        sim.record_stride,
        recorder=phys_record,
    )
    t = np.array([r.t for r in phys])
    a = np.array([r.A0 for r in phys])
    i = dg.first_peak(t, a, SAT_THRESHOLD * dp.a_scale)
    t_gain = dg.first_crossing(t, a, dp.a_scale)
    scaled = [
        dg.TraceRecord(r.t / dp.t_scale, r.A0 / dp.a_scale, r.phi, 0.0, 0.0, 0.0, 0.0) for r in phys
    ]
    return SweepRow(
        axis_value=value,
        observable=_observable(spec.observable, float(a[i]), t_gain),
        tau_sat=float(t[i]) / dp.t_scale,
        A_peak=float(a[i]) / dp.a_scale,
        growth_rate=_growth_or_nan(scaled),
    )


def _row_shared(spec: SweepSpec, value: float, measured: _Measured, constants) -> SweepRow:
    dp = derive(medium_at(spec.base, spec.axis, value), constants)
    return SweepRow(
        axis_value=value,
        observable=_observable(spec.observable, measured.A_peak * dp.a_scale, measured.tau_gain * dp.t_scale),
        tau_sat=measured.tau_sat,
        A_peak=measured.A_peak,
        growth_rate=measured.growth_rate,
    )


def _failed(value, exc):
    nan = float("nan")
    return SweepRow(value, nan, nan, nan, nan, status=f"{type(exc).__name__}: {exc}")


def run_sweep(spec: SweepSpec, max_workers: int = 1, constants=CODATA) -> SweepResult:
    """Run every row and fit a power law of the observable against the axis.

    Rows that fail are flagged in ``status`` and left out of the fit.  Row
    order in the result follows the axis values, whatever the execution order.
    """
    measured = None
    if spec.mode == "shared":
        try:
            measured = _measure_scaled(spec.sim)
        except SolvfelError as exc:
            rows = [_failed(v, exc) for v in spec.values]
            return SweepResult(spec, rows, None)

    def one(value):
        try:
            if measured is not None:
                return _row_shared(spec, value, measured, constants)
            return _row_per_row(spec, value, constants)
        except SolvfelError as exc:
            return _failed(value, exc)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            by_value = dict(zip(spec.values, pool.map(one, spec.values)))
    else:
        by_value = {v: one(v) for v in spec.values}
    rows = [by_value[v] for v in spec.values]
    good = [(r.axis_value, r.observable) for r in rows if r.status == "ok"]
    fit = dg.fit_power_law(good) if len(good) >= 3 else None
    return SweepResult(spec, rows, fit)


@dataclass(frozen=True)
class DesignReport:
    n: int
    T: float
    c_A_eff: float
    c_t_eff: float
    c_A_reference: float
    c_t_reference: float
    c_A_deviation: float
    c_t_deviation: float
    pair_spread_c_A: float
    pair_spread_c_t: float


REFERENCE_C_A = 2.6e-22
REFERENCE_C_T = 2.4e-4


def verify_design_constants(n=30, T=300.0, constants=CODATA,
                            pairs=((6.022e23, 9.1e-3), (3.7e25, 0.42))) -> DesignReport:
    """Factored design coefficients at two (rho, P_z) points and their deviation from the reference values."""
    first, second = (design_formulas(rho, pz, n=n, T=T, constants=constants) for rho, pz in pairs)
    return DesignReport(
        n=n,
        T=T,
        c_A_eff=first.c_A_eff,
        c_t_eff=first.c_t_eff,
        c_A_reference=REFERENCE_C_A,
        c_t_reference=REFERENCE_C_T,
        c_A_deviation=first.c_A_eff / REFERENCE_C_A - 1.0,
        c_t_deviation=first.c_t_eff / REFERENCE_C_T - 1.0,
        pair_spread_c_A=abs(second.c_A_eff / first.c_A_eff - 1.0),
        pair_spread_c_t=abs(second.c_t_eff / first.c_t_eff - 1.0),
    )
