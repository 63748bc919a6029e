"""Closed-form susceptibility of the five-level atom and its limits.

Normalization: every function here returns the reduced susceptibility
``chi = gamma_ab * rho_ab / omega_p`` exactly as produced by the steady-state
equations of motion with the relaxed dressed doublet (``rho_BB = rho_B'B' = 1/2``).
The widely quoted two-term closed form carries a prefactor ``gamma_ab / 2``; the
equations of motion give ``gamma_ab / 8``. :func:`chi_reduced_as_printed` keeps
the quoted prefactor for comparison, :func:`chi_reduced` is consistent with the
numerical solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AtomParams, FieldParams, dressing_angles

PRINTED_TO_MODEL = 4.0


def _branch(atom: AtomParams, fields: FieldParams, dp, sign: int):
    """Response of one dressed ground state (sign=+1: B, sign=-1: B').

    ``T = N / (d_a N + (W_mu^2/4) x_C')`` with ``N = x_C x_C' - W_c^2/4``. Common
    factors are cancelled by hand when a coupling vanishes so that no 0/0 appears.
    """
    f = fields
    half_b = f.omega_b_rf / 2
    x_cp = f.delta_mu - dp + 1j * atom.gamma_Cprime - sign * half_b
    x_c = f.delta_mu - dp + 1j * atom.gamma_C - sign * half_b
    d_a = dp - 1j * atom.gamma_ab + sign * half_b
    control = f.omega_mu ** 2 / 4
    if control == 0:
        return 1.0 / d_a
    rf_c = f.omega_c_rf ** 2 / 4
    if rf_c == 0:
        return x_c / (d_a * x_c + control)
    num = x_cp * x_c - rf_c
    return num / (d_a * num + control * x_cp)


def chi_reduced(atom: AtomParams, fields: FieldParams, delta_p=None):
    """Closed-form reduced susceptibility for resonant RF fields (``delta_b = delta_c = 0``).

    ``(gamma_ab/8) * (T_B + T_B')`` where each term is the continued-fraction
    response of one dressed ground state. Vectorized over ``delta_p``.
    """
    if not fields.on_resonance_rf:
        raise ValueError("closed form requires delta_b = delta_c = 0; use steady_state.chi_numeric")
    dp = np.asarray(fields.delta_p if delta_p is None else delta_p, dtype=float)
    out = (atom.gamma_ab / 8) * (_branch(atom, fields, dp, +1) + _branch(atom, fields, dp, -1))
    return out[()] if out.ndim == 0 else out


def chi_reduced_as_printed(atom: AtomParams, fields: FieldParams, delta_p=None):
    """The two-term closed form with its originally quoted ``gamma_ab/2`` prefactor."""
    return PRINTED_TO_MODEL * chi_reduced(atom, fields, delta_p)


def chi_standard_eit(atom: AtomParams, omega_mu: float, delta_p, gamma_cb: float,
                     delta_mu: float = 0.0):
    """Lambda-system EIT with all population in the probed ground state.

    ``(gamma_ab/2) (d - i g_cb) / ((delta_p - i gamma_ab)(d - i g_cb) - omega_mu**2/4)``
    with two-photon detuning ``d = delta_p - delta_mu``.
    """
    dp = np.asarray(delta_p, dtype=float)
    two_photon = dp - delta_mu - 1j * gamma_cb
    g = atom.gamma_ab
    if omega_mu == 0:
        out = (g / 2) / (dp - 1j * g)
    else:
        out = (g / 2) * two_photon / ((dp - 1j * g) * two_photon - omega_mu ** 2 / 4)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class NarrowResonance:
    """One of the two dark-state resonances inside the transparency window.

    ``height`` is the closed-form estimate as usually quoted,
    ``Omega_c^2 Omega_mu / (2 (gamma_ab Omega_c^2 + Omega_mu^2 gamma_C'))``;
    ``height_model`` is the peak of the Lorentzian limit of :func:`chi_reduced`,
    ``gamma_ab Omega_c^2 / (8 (gamma_ab Omega_c^2 + Omega_mu^2 gamma_C'))``.
    """

    center: float
    fwhm: float
    height: float
    height_model: float
    valid: bool


def narrow_width(atom: AtomParams, fields: FieldParams) -> float:
    """FWHM ``2 gamma_ab (Omega_c^2/Omega_mu^2 + gamma_C'/gamma_ab)``: power broadening plus dephasing."""
    g = atom.gamma_ab
    return 2 * g * (fields.omega_c_rf ** 2 / fields.omega_mu ** 2 + atom.gamma_Cprime / g)


def narrow_resonances(atom: AtomParams, fields: FieldParams) -> tuple[NarrowResonance, NarrowResonance]:
    """Position, width and height of the two narrow resonances (``delta_mu = 0``).

    ``valid`` is False outside ``omega_mu, gamma_ab >> omega_b, omega_c, gamma_C, gamma_C'``
    (taken as a factor of 10).
    """
    f = fields
    g = atom.gamma_ab
    om_b_eff = dressing_angles(f.delta_b, f.omega_b_rf).omega_eff
    fwhm = narrow_width(atom, f)
    small = max(f.omega_b_rf, f.omega_c_rf, atom.gamma_C, atom.gamma_Cprime)
    valid = 10 * small <= min(f.omega_mu, g) and f.delta_mu == 0
    denom = g * f.omega_c_rf ** 2 + f.omega_mu ** 2 * atom.gamma_Cprime
    if denom > 0:
        height = f.omega_c_rf ** 2 * f.omega_mu / (2 * denom)
        height_model = g * f.omega_c_rf ** 2 / (8 * denom)
    else:
        height = height_model = math.nan
    return tuple(NarrowResonance(sign * om_b_eff / 2, fwhm, height, height_model, valid)
                 for sign in (-1, +1))


def narrow_lorentzian(atom: AtomParams, fields: FieldParams, delta_p, *, printed: bool = False):
    """Sum of the two Lorentzian approximations to the narrow resonances.

    ``printed=True`` returns the profile with the quoted amplitude
    ``gamma_ab Omega_c^2 / (2 Omega_mu)``, which is ``4 Omega_mu / gamma_ab``
    times the model amplitude.
    """
    f = fields
    g = atom.gamma_ab
    dp = np.asarray(delta_p, dtype=float)
    w = f.omega_c_rf ** 2 / f.omega_mu ** 2 + atom.gamma_Cprime / g
    if printed:
        amp = g * f.omega_c_rf ** 2 / (2 * f.omega_mu) * w
    else:
        amp = g * g * f.omega_c_rf ** 2 / (8 * f.omega_mu ** 2) * w
    out = sum(amp / ((dp - s * f.omega_b_rf / 2) ** 2 + (g * w) ** 2) for s in (-1, +1))
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DressedExcitedTriplet:
    """Control- and RF-dressed states of the ``{a, c, c'}`` subsystem.

    ``states`` maps ``'+', '-', '0'`` to amplitude vectors over ``(a, c, c')``.
    ``transition_detunings`` are the six probe detunings that connect
    ``{B, B'}`` to the triplet, sorted.
    """

    theta: float
    energies: dict
    states: dict
    transition_detunings: np.ndarray


def dressed_excited_triplet(omega_mu: float, omega_c_rf: float, omega_b_eff: float) -> DressedExcitedTriplet:
    """Eigenstates of the ``{a, c, c'}`` block for ``delta_mu = delta_c = 0``.

    With couplings ``-Omega_mu/2`` (a-c) and ``-Omega_c/2`` (c-c'), the mixing
    angle satisfies ``sin(theta) = -Omega_mu/R`` and ``cos(theta) = -Omega_c/R``
    with ``R = sqrt(Omega_mu^2 + Omega_c^2)``, and
    ``|a+-> = (sin(theta)|a> +- |c> + cos(theta)|c'>)/sqrt(2)``,
    ``|a0> = cos(theta)|a> - sin(theta)|c'>``.
    """
    R = math.hypot(omega_mu, omega_c_rf)
    theta = math.atan2(-omega_mu, -omega_c_rf) if R > 0 else 0.0
    s, c = math.sin(theta), math.cos(theta)
    states = {
        "+": np.array([s, 1.0, c]) / math.sqrt(2),
        "-": np.array([s, -1.0, c]) / math.sqrt(2),
        "0": np.array([c, 0.0, -s]),
    }
    energies = {"+": R / 2, "-": -R / 2, "0": 0.0}
    detunings = np.sort([sb * omega_b_eff / 2 + e for sb in (-1, +1) for e in energies.values()])
    return DressedExcitedTriplet(theta, energies, states, detunings)


@dataclass(frozen=True)
class ZeroDetuningResponse:
    """Absorption and dispersion slope at ``delta_p = 0`` to lowest order.

    ``im_chi`` carries the coefficient ``gamma_ab`` on the dephasing-free
    ``(Omega_b^2 - Omega_c^2)^2`` term, as the small-parameter expansion of
    :func:`chi_reduced` gives; ``im_chi_as_printed`` keeps the commonly quoted
    ``4 gamma_ab``, which overestimates that term fourfold. ``*_symmetric`` are
    the reduced expressions for ``Omega_b = Omega_c`` and ``gamma_C = gamma_C'``
    (evaluated with ``Omega_c`` and ``gamma_C``).
    """

    im_chi: float
    dispersion_slope: float
    im_chi_symmetric: float
    dispersion_slope_symmetric: float
    valid: bool
    im_chi_as_printed: float


def chi_at_zero_detuning(atom: AtomParams, fields: FieldParams) -> ZeroDetuningResponse:
    """Leading-order ``Im chi(0)`` and ``d Re chi / d delta_p`` at ``delta_p = delta_mu = 0``.

    The expansion treats the ground-state dephasings as higher order than the
    RF Rabi frequencies; in practice it needs ``gamma_C, gamma_C' <~ 0.02 Omega_b``
    in addition to ``Omega_b, Omega_c << Omega_mu, gamma_ab``.
    """
    g = atom.gamma_ab
    gC, gCp = atom.gamma_C, atom.gamma_Cprime
    ob2, oc2, om2 = fields.omega_b_rf ** 2, fields.omega_c_rf ** 2, fields.omega_mu ** 2
    denom = ob2 * (ob2 - oc2) ** 2 - 2 * (ob2 * ob2 + (g * gCp + ob2) * oc2) * om2 + ob2 * om2 * om2
    dephasing = (gC * ob2 + gCp * oc2) * om2
    im = g * (g * (ob2 - oc2) ** 2 + dephasing) / denom
    im_printed = g * (4 * g * (ob2 - oc2) ** 2 + dephasing) / denom
    slope = g * (-8 * g * (gC * ob2 * ob2 + (gC + 3 * gCp) * ob2 * oc2 - gCp * oc2 * oc2) * om2
                 - ob2 * (ob2 + oc2) * om2 * om2) / (
        om2 * (8 * g * (gC * ob2 + gCp * oc2) + ob2 * (-2 * ob2 + oc2 + om2)) ** 2)
    im_sym = (2 * gC * g / om2) * (1 + 2 * (g * gC + 2 * oc2) / om2)
    slope_sym = -(2 * g / om2) * (1 - 16 * g * gC / om2)
    small = max(fields.omega_b_rf, fields.omega_c_rf, gC, gCp)
    valid = (10 * small <= min(fields.omega_mu, g) and fields.delta_mu == 0
             and max(gC, gCp) <= 0.02 * max(min(fields.omega_b_rf, fields.omega_c_rf), 1e-300))
    return ZeroDetuningResponse(float(im), float(slope), float(im_sym), float(slope_sym), valid,
                                float(im_printed))
