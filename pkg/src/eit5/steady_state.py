"""Steady states of the dressed b-doublet and of the two probe-coherence systems.

To first order in the probe the problem splits into

* a 4-variable system for the dressed ground doublet ``(rho_BB, rho_B'B', rho_BB', rho_B'B)``,
  which acts as a source for
* two decoupled 3x3 systems, ``(rho_aB, rho_CB, rho_C'B)`` and ``(rho_aB', rho_CB', rho_C'B')``.

Each coherence system is written ``i dX/dt = K X + s``, so its steady state is
``X = -K^{-1} s`` (equivalently ``M^{-1} A`` with ``M = iK`` and ``A = -i s``).
The probe coherence is recovered as ``rho_ab = cos(theta_b) rho_aB - sin(theta_b) rho_aB'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import null_space

from .errors import DegenerateSystemError, IntegrationError
from .model import AtomParams, DressedFrame, FieldParams

# Condition number above which a 3x3 solve is reported instead of returned.
SINGULAR_COND = 1e14
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BBManifoldState:
    rho_BB: float
    rho_BpBp: float
    rho_BBp: complex
    rho_BpB: complex

    def as_vector(self) -> np.ndarray:
        return np.array([self.rho_BB, self.rho_BpBp, self.rho_BBp, self.rho_BpB], dtype=complex)

    @classmethod
    def from_vector(cls, x) -> "BBManifoldState":
        x = np.asarray(x, dtype=complex)
        return cls(float(x[0].real), float(x[1].real), complex(x[2]), complex(x[3]))

    @classmethod
    def relaxed(cls) -> "BBManifoldState":
        """Equal dressed populations and no dressed coherence."""
        return cls(0.5, 0.5, 0j, 0j)

    @classmethod
    def from_bare(cls, rho_bare, theta_b: float) -> "BBManifoldState":
        """Rotate a 2x2 density matrix over ``(b, b')`` into the dressed basis."""
        c, s = math.cos(theta_b), math.sin(theta_b)
        D = np.array([[c, s], [-s, c]])
        r = D @ np.asarray(rho_bare, dtype=complex) @ D.T
        return cls(float(r[0, 0].real), float(r[1, 1].real), complex(r[0, 1]), complex(r[1, 0]))


def initial_bb_state(frame: DressedFrame, population_b: float = 1.0) -> BBManifoldState:
    """Dressed-basis form of an incoherent split ``population_b`` in ``b``, the rest in ``b'``."""
    rho = np.diag([population_b, 1.0 - population_b])
    return BBManifoldState.from_bare(rho, frame.theta_b)


def bb_generator(atom: AtomParams, frame: DressedFrame) -> np.ndarray:
    """Matrix ``L`` with ``dx/dt = L x`` for ``x = (rho_BB, rho_B'B', rho_BB', rho_B'B)``.

    Pure dephasing ``gamma_bb_tilde`` of the bare ``b``/``b'`` coherence rotated
    into the dressed basis. The population couplings carry ``sin^2(2 theta_b)``.
    """
    g = atom.gamma_bb_tilde
    om = frame.omega_b_eff
    th = frame.theta_b
    s2, c2 = math.sin(2 * th), math.cos(2 * th)
    s4, c4 = math.sin(4 * th), math.cos(4 * th)
    pop = (g / 2) * np.array([s2 * s2, -s2 * s2, s2 * c2, s2 * c2])
    diag = g * (3 + c4) / 4
    cross = g * (1 - c4) / 4
    tilt = g * s4 / 4
    return np.array([
        -pop,
        pop,
        [-tilt, tilt, 1j * om - diag, cross],
        [-tilt, tilt, cross, -1j * om - diag],
    ], dtype=complex)


def bb_manifold_steady_state(atom: AtomParams, frame: DressedFrame,
                             initial: BBManifoldState | None = None) -> BBManifoldState:
    """Long-time limit of the dressed b-doublet starting from ``initial``.

    The limit is the projection of the initial state onto the kernel of the
    generator along its range, i.e. the time average of the trajectory. When the
    kernel is one-dimensional this is the trace-normalized fixed point
    ``(1/2, 1/2, 0, 0)`` and ``initial`` is irrelevant; with no dephasing, or with
    no RF dressing (``theta_b`` = 0 or pi/2), dressed populations are conserved.
    ``initial`` defaults to all population in the bare state ``b``.
    """
    if initial is None:
        initial = initial_bb_state(frame)
    L = bb_generator(atom, frame)
    x0 = initial.as_vector()
    if not np.any(L):
        return initial
    right = null_space(L, rcond=1e-10)
    left = null_space(L.conj().T, rcond=1e-10)
    if right.shape[1] == 0:
        raise IntegrationError("b-doublet generator has no stationary state")
    overlap = left.conj().T @ right
    if right.shape[1] != left.shape[1] or np.linalg.cond(overlap) > 1e10:
        raise IntegrationError("zero eigenvalue of the b-doublet generator is not semisimple")
    x = right @ np.linalg.solve(overlap, left.conj().T @ x0)
    return BBManifoldState.from_vector(x)


@dataclass(frozen=True)
class CoherenceSolution:
    rho_aB: complex
    rho_CB: complex
    rho_CpB: complex
    rho_aBp: complex
    rho_CBp: complex
    rho_CpBp: complex
    rho_ab: complex

    def as_vector(self) -> np.ndarray:
        return np.array([self.rho_aB, self.rho_CB, self.rho_CpB,
                         self.rho_aBp, self.rho_CBp, self.rho_CpBp, self.rho_ab])


def on_resonance_matrices(atom: AtomParams, fields: FieldParams, delta_p=None):
    """Coefficient matrices ``K`` and sources ``s`` of the two on-resonance systems.

    Literal form for ``delta_b = delta_c = 0`` (both mixing angles pi/4) with the
    relaxed doublet ``rho_BB = rho_B'B' = 1/2`` as source. ``delta_p`` may be an
    array; the matrices then carry a leading axis.
    """
    f = fields
    dp = np.asarray(f.delta_p if delta_p is None else delta_p, dtype=float)
    gab = atom.gamma_ab
    gsum = (atom.gamma_C + atom.gamma_Cprime) / 2
    gdiff = (atom.gamma_Cprime - atom.gamma_C) / 2
    k = f.omega_mu * SQRT2 / 4
    src = f.omega_p * SQRT2 / 8
    out = []
    for sign in (+1, -1):
        shift = sign * f.omega_b_rf / 2
        K = np.zeros(dp.shape + (3, 3), dtype=complex)
        K[..., 0, 0] = dp + shift - 1j * gab
        K[..., 1, 1] = dp - f.delta_mu - f.omega_c_rf / 2 + shift - 1j * gsum
        K[..., 2, 2] = dp - f.delta_mu + f.omega_c_rf / 2 + shift - 1j * gsum
        K[..., 0, 1] = K[..., 1, 0] = -k
        K[..., 0, 2] = K[..., 2, 0] = k
        K[..., 1, 2] = K[..., 2, 1] = -1j * gdiff
        s = np.zeros(dp.shape + (3,), dtype=complex)
        s[..., 0] = -sign * src
        out.append((K, s))
    return out


def general_matrices(atom: AtomParams, fields: FieldParams, frame: DressedFrame,
                     bb: BBManifoldState, delta_p=None):
    """Coefficient matrices and sources of the two systems for arbitrary RF detunings."""
    f = fields
    dp = np.asarray(f.delta_p if delta_p is None else delta_p, dtype=float)
    cb, sb, cc, sc = frame.cb, frame.sb, frame.cc, frame.sc
    gab = atom.gamma_ab
    gC, gCp = atom.gamma_C, atom.gamma_Cprime
    g_CC = gC * cc * cc + gCp * sc * sc
    g_CpCp = gC * sc * sc + gCp * cc * cc
    g_mix = (gCp - gC) * cc * sc
    base = dp - f.delta_b / 2
    base_c = dp - f.delta_mu + f.delta_c / 2 - f.delta_b / 2
    sources = (
        -(f.omega_p / 2) * (cb * bb.rho_BB - sb * bb.rho_BpB),
        (f.omega_p / 2) * (sb * bb.rho_BpBp - cb * bb.rho_BBp),
    )
    out = []
    for sign, source in zip((+1, -1), sources):
        shift = sign * frame.omega_b_eff / 2
        K = np.zeros(dp.shape + (3, 3), dtype=complex)
        K[..., 0, 0] = base + shift - 1j * gab
        K[..., 1, 1] = base_c - frame.omega_c_eff / 2 + shift - 1j * g_CC
        K[..., 2, 2] = base_c + frame.omega_c_eff / 2 + shift - 1j * g_CpCp
        K[..., 0, 1] = K[..., 1, 0] = -(f.omega_mu / 2) * cc
        K[..., 0, 2] = K[..., 2, 0] = (f.omega_mu / 2) * sc
        K[..., 1, 2] = K[..., 2, 1] = -1j * g_mix
        s = np.zeros(dp.shape + (3,), dtype=complex)
        s[..., 0] = source
        out.append((K, s))
    return out


def solve_stationary(K: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Solve ``K x = -s`` (LU with partial pivoting), broadcasting over leading axes.

    A singular system is still solved when it is consistent, which happens when
    an undriven, uncoupled, lossless coherence sits exactly on resonance; the
    minimum-norm solution leaves that coherence at zero. An inconsistent
    singular system raises :class:`DegenerateSystemError`; no regularization is
    applied because it would move the poles.
    """
    K = np.asarray(K)
    s = np.asarray(s)
    cond = np.linalg.cond(K)
    singular = ~np.isfinite(cond) | (cond > SINGULAR_COND)
    if not np.any(singular):
        return np.linalg.solve(K, -s[..., None])[..., 0]
    K_flat = K.reshape(-1, 3, 3)
    s_flat = np.broadcast_to(s, K.shape[:-1]).reshape(-1, 3)
    out = np.empty_like(s_flat, dtype=complex)
    regular = ~singular.reshape(-1)
    out[regular] = np.linalg.solve(K_flat[regular], -s_flat[regular][..., None])[..., 0]
    for i in np.flatnonzero(~regular):
        x = np.linalg.lstsq(K_flat[i], -s_flat[i], rcond=None)[0]
        if np.linalg.norm(K_flat[i] @ x + s_flat[i]) > 1e-10 * max(np.linalg.norm(s_flat[i]), 1e-300):
            raise DegenerateSystemError("singular coherence system driven on a pole "
                                        "(lossless configuration)")
        out[i] = x
    return out.reshape(K.shape[:-1])


def _assemble(x1, x2, cb, sb) -> CoherenceSolution:
    rho_ab = cb * x1[0] - sb * x2[0]
    return CoherenceSolution(*(complex(v) for v in (*x1, *x2, rho_ab)))


def coherence_steady_state_on_resonance(atom: AtomParams, fields: FieldParams) -> CoherenceSolution:
    """Steady state of the on-resonance systems (``delta_b = delta_c = 0``)."""
    (K1, s1), (K2, s2) = on_resonance_matrices(atom, fields)
    x1 = solve_stationary(K1, s1)
    x2 = solve_stationary(K2, s2)
    return _assemble(x1, x2, 1 / SQRT2, 1 / SQRT2)


def coherence_steady_state_general(atom: AtomParams, fields: FieldParams,
                                   frame: DressedFrame | None = None,
                                   bb: BBManifoldState | None = None) -> CoherenceSolution:
    """Steady state of the coherence systems for arbitrary RF detunings.

    ``bb`` defaults to :func:`bb_manifold_steady_state` of ``frame``.
    """
    if frame is None:
        frame = DressedFrame.from_fields(fields)
    if bb is None:
        bb = bb_manifold_steady_state(atom, frame)
    (K1, s1), (K2, s2) = general_matrices(atom, fields, frame, bb)
    x1 = solve_stationary(K1, s1)
    x2 = solve_stationary(K2, s2)
    return _assemble(x1, x2, frame.cb, frame.sb)


def chi_numeric(atom: AtomParams, fields: FieldParams, delta_p=None, *, general: bool = True,
                frame: DressedFrame | None = None, bb: BBManifoldState | None = None):
    """Reduced susceptibility ``gamma_ab rho_ab / omega_p`` from the linear solves.

    Vectorized over ``delta_p``. The result is independent of ``omega_p`` (linear
    response), so the solve uses a unit probe. ``general=False`` uses the
    on-resonance systems, which assume the relaxed doublet.
    """
    unit = _unit_probe(fields)
    if general:
        if frame is None:
            frame = DressedFrame.from_fields(fields)
        if bb is None:
            bb = bb_manifold_steady_state(atom, frame)
        systems = general_matrices(atom, unit, frame, bb, delta_p)
        cb, sb = frame.cb, frame.sb
    else:
        systems = on_resonance_matrices(atom, unit, delta_p)
        cb = sb = 1 / SQRT2
    (K1, s1), (K2, s2) = systems
    x1 = solve_stationary(K1, s1)
    x2 = solve_stationary(K2, s2)
    rho_ab = cb * x1[..., 0] - sb * x2[..., 0]
    out = atom.gamma_ab * rho_ab
    return out[()] if out.ndim == 0 else out


def chi_derivative(atom: AtomParams, fields: FieldParams, delta_p=None, *, general: bool = True,
                   frame: DressedFrame | None = None, bb: BBManifoldState | None = None):
    """Exact ``d chi / d delta_p`` from the linear solves.

    ``delta_p`` enters each system only through ``K += delta_p * I``, hence
    ``dx/d delta_p = -K^{-1} x``.
    """
    unit = _unit_probe(fields)
    if general:
        if frame is None:
            frame = DressedFrame.from_fields(fields)
        if bb is None:
            bb = bb_manifold_steady_state(atom, frame)
        systems = general_matrices(atom, unit, frame, bb, delta_p)
        cb, sb = frame.cb, frame.sb
    else:
        systems = on_resonance_matrices(atom, unit, delta_p)
        cb = sb = 1 / SQRT2
    derivs = []
    for K, s in systems:
        x = solve_stationary(K, s)
        derivs.append(solve_stationary(K, x)[..., 0])
    out = atom.gamma_ab * (cb * derivs[0] - sb * derivs[1])
    return out[()] if out.ndim == 0 else out


def _unit_probe(fields: FieldParams) -> FieldParams:
    return replace(fields, omega_p=1.0)
