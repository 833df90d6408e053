"""Observables and estimators computed from states and traces."""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, InsufficientGrowthError, NotSaturatedError


class TraceRecord(NamedTuple):
    """One diagnostics row; every field is dimensionless."""

    tau: float
    A0_scaled: float
    phi: float
    bunching_re: float
    bunching_im: float
    mean_p: float
    conserved_C: float


class PowerLawFit(NamedTuple):
    exponent: float
    prefactor: float
    r_squared: float


def bunching(theta) -> complex:
    """Bunching factor ``<exp(-i theta)>``.

    Sums are exactly rounded, so any permutation of ``theta`` gives a
    bit-identical result.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.size == 0:
        raise DomainError("bunching of an empty phase set")
    n = theta.size
    return complex(math.fsum(np.cos(theta)) / n, -math.fsum(np.sin(theta)) / n)


def conserved_quantity(state) -> float:
    """``<p> + |A|^2``; constant along exact scaled trajectories."""
    with np.errstate(over="ignore"):
        return float(np.mean(state.p) + np.square(state.field_re) + np.square(state.field_im))


def trace_record(state) -> TraceRecord:
    b = bunching(state.theta)
    return TraceRecord(
        tau=float(state.tau),
        A0_scaled=math.hypot(state.field_re, state.field_im),
        phi=math.atan2(state.field_im, state.field_re),
        bunching_re=b.real,
        bunching_im=b.imag,
        mean_p=float(np.mean(state.p)),
        conserved_C=conserved_quantity(state),
    )


def _columns(trace):
    if len(trace) == 0:
        raise DomainError("empty trace")
    tau = np.array([r.tau for r in trace], dtype=float)
    amp = np.array([r.A0_scaled for r in trace], dtype=float)
    return tau, amp


def fit_growth_rate(trace: Sequence[TraceRecord], lo=1e-4, hi=1e-2) -> float:
    """Least-squares slope of ``ln A0_scaled`` against tau.

    The window is the last contiguous run of samples inside ``[lo, hi)``
    that ends at the first crossing of ``hi``.  Shot-noise transients
    dominate this window unless the initial bunching is far below ``lo``;
    see :func:`fit_growth_rate_modal` for noisy starts.
    """
    if not 0 < lo < hi:
        raise DomainError("growth window needs 0 < lo < hi")
    tau, amp = _columns(trace)
    above = np.nonzero(amp >= hi)[0]
    if above.size == 0:
        raise InsufficientGrowthError(f"amplitude never reaches {hi:g}")
    i_hi = int(above[0])
    below = np.nonzero(amp[:i_hi] < lo)[0]
    if below.size == 0:
        raise InsufficientGrowthError(f"amplitude does not rise through [{lo:g}, {hi:g}]")
    i_lo = int(below[-1]) + 1
    window = slice(i_lo, i_hi + 1)
    if i_hi + 1 - i_lo < 3:
        raise InsufficientGrowthError("growth window holds fewer than 3 samples")
    slope = np.polyfit(tau[window], np.log(amp[window]), 1)[0]
    if not slope > 0:
        raise InsufficientGrowthError(f"fitted slope {slope:g} is not positive")
    return float(slope)


def matrix_pencil(samples, dt, n_modes):
    """Complex exponents ``s_k`` of ``x_j = sum_k c_k exp(s_k * j * dt)``.

    Standard matrix-pencil estimate from a Hankel matrix of uniformly spaced
    complex samples, truncated to ``n_modes`` singular vectors.
    """
    x = np.asarray(samples, dtype=complex)
    m = x.size
    if m < 4 * n_modes:
        raise DomainError(f"need at least {4 * n_modes} samples, got {m}")
    pencil = m // 2
    hankel = np.lib.stride_tricks.sliding_window_view(x, pencil + 1)
    _, _, vh = np.linalg.svd(hankel, full_matrices=False)
    basis = vh[:n_modes].T
    shift = np.linalg.pinv(basis[:-1]) @ basis[1:]
    return np.log(np.linalg.eigvals(shift)) / dt


def fit_growth_rate_modal(trace: Sequence[TraceRecord], hi=0.05, n_modes=3) -> float:
    """Growth rate of the unstable collective mode of the complex field.

    Fits the linear stage (from the first record up to the first sample with
    ``A0_scaled >= hi``) as a sum of ``n_modes`` complex exponentials and
    returns the real part of the mode carrying the most amplitude at the end
    of that stage.  Unlike the log-slope fit this separates the growing mode
    from the neutral and damped ones seeded by shot noise; weighting by
    amplitude keeps weak nonlinear harmonics from being selected.
    """
    tau, amp = _columns(trace)
    above = np.nonzero(amp >= hi)[0]
    if above.size == 0:
        raise InsufficientGrowthError(f"amplitude never reaches {hi:g}")
    stop = int(above[0])
    steps = np.diff(tau[: stop + 1])
    if steps.size == 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise DomainError("modal fit needs uniformly spaced records")
    phi = np.array([r.phi for r in trace[: stop + 1]])
    field = amp[: stop + 1] * np.exp(1j * phi)
    try:
        exponents = matrix_pencil(field, steps[0], n_modes)
    except DomainError as exc:
        raise InsufficientGrowthError(f"linear stage too short: {exc}") from None
    t = tau[: stop + 1] - tau[0]
    vander = np.exp(np.outer(t, exponents))
    weights = np.linalg.lstsq(vander, field, rcond=None)[0]
    dominant = int(np.argmax(np.abs(weights * vander[-1])))
    rate = float(exponents[dominant].real)
    if not rate > 0:
        raise InsufficientGrowthError(f"dominant mode is not growing (rate {rate:g})")
    return rate


def first_peak(t, a, threshold):
    """Index of the first local maximum of ``a`` with ``a >= threshold``."""
    a = np.asarray(a, dtype=float)
    for i in range(1, a.size - 1):
        if a[i] >= threshold and a[i] >= a[i - 1] and a[i] > a[i + 1]:
            return i
    raise NotSaturatedError(f"no local maximum at or above {threshold:g}")


def detect_saturation(trace: Sequence[TraceRecord], threshold=0.5):
    """Return ``(tau_sat, A_peak)`` at the first qualifying maximum."""
    tau, amp = _columns(trace)
    i = first_peak(tau, amp, threshold)
    return float(tau[i]), float(amp[i])


def first_crossing(t, a, level):
    """Linearly interpolated time at which ``a`` first reaches ``level``."""
    a = np.asarray(a, dtype=float)
    t = np.asarray(t, dtype=float)
    hits = np.nonzero(a >= level)[0]
    if hits.size == 0:
        raise NotSaturatedError(f"level {level:g} never reached")
    i = int(hits[0])
    if i == 0:
        return float(t[0])
    frac = (level - a[i - 1]) / (a[i] - a[i - 1])
    return float(t[i - 1] + frac * (t[i] - t[i - 1]))


def fit_power_law(points) -> PowerLawFit:
    """Fit ``y = prefactor * x**exponent`` by least squares in log-log space."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DomainError("points must be a sequence of (x, y) pairs")
    if pts.shape[0] < 3:
        raise DomainError(f"need at least 3 points, got {pts.shape[0]}")
    if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
        raise DomainError("power-law fit needs finite positive coordinates")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(lx) == 0:
        raise DomainError("all x values coincide")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return PowerLawFit(float(slope), float(math.exp(intercept)), min(1.0, max(0.0, r2)))
