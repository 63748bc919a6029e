"""Optical observables derived from the reduced susceptibility.

Sign convention: ``delta_p = w_a - w_b - nu_p`` decreases as the probe frequency
``nu_p`` increases, so ``d/d nu_p = -(1/u) d/d delta_p`` where ``u`` is the SI
value of one reduced frequency unit. :func:`d_dprobe_frequency` is the only
place this conversion happens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import DegenerateSystemError
from .model import SPEED_OF_LIGHT, AtomParams, FieldParams, PhysicalScaling
from .steady_state import chi_derivative, chi_numeric


@dataclass(frozen=True)
class SpectrumPoint:
    """Observables at one probe detuning (reduced units unless noted).

    ``alpha`` is ``k_p * prefactor * Im chi`` in m^-1, ``slope`` is
    ``d Re chi / d delta_p`` of the reduced susceptibility.
    """

    delta_p: float
    chi: complex
    alpha: float
    n: float
    slope: float
    vg_ratio: float
    delay: float = math.nan


@dataclass(frozen=True)
class SlopeEstimate:
    value: float
    error: float
    step: float


def d_dprobe_frequency(d_ddelta_p, scaling: PhysicalScaling):
    """Convert a derivative with respect to ``delta_p`` (reduced units) into one per rad/s of probe frequency."""
    return -np.asarray(d_ddelta_p) / scaling.rate_unit_si


def default_step(atom: AtomParams, fields: FieldParams) -> float:
    """Finite-difference step: ``1e-4`` of the narrow-resonance width, or ``1e-4`` when it vanishes."""
    width = 2 * atom.gamma_ab * (fields.omega_c_rf ** 2 / fields.omega_mu ** 2) \
        if fields.omega_mu > 0 else 0.0
    width += 2 * atom.gamma_Cprime
    return 1e-4 * width if width > 0 else 1e-4


def dispersion_slope(chi_fn: Callable[[float], complex], delta_p: float, step: float) -> SlopeEstimate:
    """``d Re chi / d delta_p`` by central differences with one Richardson extrapolation.

    ``error`` is ``|D(h/2) - D(h)| / 3``, the leading-order error of the
    half-step central difference.
    """
    if not step > 0:
        raise ValueError("step must be positive")

    def central(h):
        return (np.real(chi_fn(delta_p + h)) - np.real(chi_fn(delta_p - h))) / (2 * h)

    coarse = central(step)
    fine = central(step / 2)
    return SlopeEstimate(float((4 * fine - coarse) / 3), float(abs(fine - coarse) / 3), step)


def refractive_index(chi, scaling: PhysicalScaling):
    """``n = sqrt(1 + prefactor * Re chi)``."""
    return np.sqrt(1 + scaling.prefactor * np.real(chi))


def absorption(chi, scaling: PhysicalScaling | None = None):
    """Absorption coefficient ``k_p * prefactor * Im chi`` (m^-1), or ``Im chi`` when ``scaling`` is None."""
    if scaling is None:
        return np.imag(chi)
    return scaling.k_p * scaling.prefactor * np.imag(chi)


def group_velocity(chi, slope, scaling: PhysicalScaling):
    """``c / (n + (w_p / 2n) d Re chi / d w_p)`` from the reduced ``chi`` and ``d Re chi / d delta_p``."""
    n = refractive_index(chi, scaling)
    d_dw = d_dprobe_frequency(scaling.prefactor * np.asarray(slope), scaling)
    return SPEED_OF_LIGHT / (n + scaling.omega_p_abs / (2 * n) * d_dw)


def reference_fields(fields: FieldParams) -> FieldParams:
    """Same fields with both RF couplings switched off (the plain-EIT reference)."""
    return replace(fields, omega_b_rf=0.0, omega_c_rf=0.0)


def group_velocity_ratio(atom: AtomParams, fields: FieldParams, scaling: PhysicalScaling, delta_p=None):
    """``v_g / v_EIT`` where ``v_EIT`` uses identical parameters with ``Omega_b = Omega_c = 0``.

    Both velocities use the exact slope from the linear solves. Vectorized over
    ``delta_p``.
    """
    dp = np.asarray(fields.delta_p if delta_p is None else delta_p, dtype=float)
    ref = reference_fields(fields)
    vg = group_velocity(chi_numeric(atom, fields, dp), chi_derivative(atom, fields, dp).real, scaling)
    v_ref = group_velocity(chi_numeric(atom, ref, dp), chi_derivative(atom, ref, dp).real, scaling)
    if np.any(v_ref == 0) or not np.all(np.isfinite(v_ref)):
        raise DegenerateSystemError("reference group velocity vanishes or diverges")
    out = vg / v_ref
    return out[()] if np.ndim(out) == 0 else out


def delay_time(vg, sample_length: float):
    """Pulse delay ``L (1/v_g - 1/c)`` relative to vacuum propagation."""
    vg = np.asarray(vg, dtype=float)
    if np.any(vg <= 0) or sample_length <= 0:
        raise ValueError("group velocity and sample length must be positive")
    out = sample_length * (1 / vg - 1 / SPEED_OF_LIGHT)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class SlowLightWindow:
    """Deepest group-velocity reduction between the two narrow resonances.

    ``width`` is the extent (reduced units) of the contiguous region around the
    minimum where the ratio stays within ``spread`` times its minimum;
    ``width_si`` is the same in s^-1.
    """

    min_ratio: float
    at_delta_p: float
    width: float
    width_si: float


def slow_light_window(delta_p, vg_ratio, inner_half_width: float, scaling: PhysicalScaling,
                      spread: float = 10.0) -> SlowLightWindow:
    """Locate the slow-light minimum among points with ``|delta_p| < inner_half_width`` and ``v_g > 0``."""
    dp = np.asarray(delta_p, dtype=float)
    ratio = np.asarray(vg_ratio, dtype=float)
    mask = (np.abs(dp) < inner_half_width) & (ratio > 0) & np.isfinite(ratio)
    if not mask.any():
        raise ValueError("no grid point with positive group velocity inside the window")
    idx = np.flatnonzero(mask)
    k = idx[np.argmin(ratio[idx])]
    limit = spread * ratio[k]
    lo = hi = k
    while lo > 0 and mask[lo - 1] and ratio[lo - 1] <= limit:
        lo -= 1
    while hi < dp.size - 1 and mask[hi + 1] and ratio[hi + 1] <= limit:
        hi += 1
    width = float(dp[hi] - dp[lo])
    return SlowLightWindow(float(ratio[k]), float(dp[k]), width, width * scaling.rate_unit_si)


def spectrum_points(atom: AtomParams, fields: FieldParams, delta_p, scaling: PhysicalScaling,
                    sample_length: float | None = None) -> list[SpectrumPoint]:
    """Observables on a detuning grid from the linear solves."""
    dp = np.atleast_1d(np.asarray(delta_p, dtype=float))
    chi = np.atleast_1d(chi_numeric(atom, fields, dp))
    slope = np.atleast_1d(chi_derivative(atom, fields, dp).real)
    ratio = np.atleast_1d(group_velocity_ratio(atom, fields, scaling, dp))
    vg = np.atleast_1d(group_velocity(chi, slope, scaling))
    alpha = absorption(chi, scaling)
    n = refractive_index(chi, scaling)
    points = []
    for i in range(dp.size):
        delay = math.nan
        if sample_length is not None and vg[i] > 0:
            delay = float(delay_time(vg[i], sample_length))
        points.append(SpectrumPoint(float(dp[i]), complex(chi[i]), float(alpha[i]), float(n[i]),
                                    float(slope[i]), float(ratio[i]), delay))
    return points
