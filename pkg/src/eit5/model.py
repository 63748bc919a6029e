"""Parameters, unit conventions and Hamiltonians of the five-level atom.

Levels are ordered ``(a, b, b', c, c')``: ``a`` is the excited state, ``{b, b'}``
and ``{c, c'}`` are the two RF-coupled ground doublets. The probe drives
``b <-> a``, the control drives ``c <-> a``.

All rates, Rabi frequencies and detunings are stored in units of the optical
coherence decay rate ``gamma_ab`` (so the default :class:`AtomParams` has
``gamma_ab == 1``). Conversion to SI happens only through
:class:`PhysicalScaling`. Field phases are fixed to zero: every Rabi frequency is
real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigError

SPEED_OF_LIGHT = 299_792_458.0  # m/s
GAMMA_A_SI = 1.0e7  # s^-1, excited-state decay rate used as the physical anchor
OMEGA_P_ABS_DEFAULT = 2.414e15  # rad/s, Rb D2-scale optical frequency
PREFACTOR_DEFAULT = 1.0e-4

LEVELS = ("a", "b", "b'", "c", "c'")


@dataclass(frozen=True)
class AtomParams:
    """Decay and dephasing rates of the five-level atom.

    The optical coherences ``rho_ab`` and ``rho_ab'`` decay at
    ``gamma_ab = gamma_a / 6 + gamma_ab_tilde``. ``gamma_C`` (``gamma_Cprime``)
    is the dephasing between ``c`` (``c'``) and either member of the b-doublet;
    ``gamma_bb_tilde`` dephases ``b`` against ``b'``.
    """

    gamma_a: float = 6.0
    gamma_ab_tilde: float = 0.0
    gamma_C: float = 0.0
    gamma_Cprime: float = 0.0
    gamma_bb_tilde: float = 0.0

    def __post_init__(self):
        for name in ("gamma_a", "gamma_ab_tilde", "gamma_C", "gamma_Cprime", "gamma_bb_tilde"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be a finite non-negative rate, got {value!r}")
        if self.gamma_ab <= 0:
            raise ConfigError("gamma_a / 6 + gamma_ab_tilde must be positive")

    @property
    def gamma_ab(self) -> float:
        return self.gamma_a / 6.0 + self.gamma_ab_tilde

    @classmethod
    def from_gamma_a_units(cls, gamma_ab_tilde=0.0, gamma_C=0.0, gamma_Cprime=0.0,
                           gamma_bb_tilde=0.0) -> "AtomParams":
        """Atom with every rate given in units of ``gamma_a`` and rescaled so ``gamma_ab = 1``."""
        gab = 1.0 / 6.0 + gamma_ab_tilde
        return cls(gamma_a=1.0 / gab, gamma_ab_tilde=gamma_ab_tilde / gab,
                   gamma_C=gamma_C / gab, gamma_Cprime=gamma_Cprime / gab,
                   gamma_bb_tilde=gamma_bb_tilde / gab)


@dataclass(frozen=True)
class FieldParams:
    """Rabi frequencies and detunings of the probe, control and the two RF fields.

    Detunings: ``delta_p = w_a - w_b - nu_p``, ``delta_mu = w_a - w_c - nu_mu``,
    ``delta_b = w_b' - w_b - nu_b``, ``delta_c = w_c' - w_c - nu_c``.
    """

    omega_p: float = 1.0e-3
    omega_mu: float = 2.0
    omega_b_rf: float = 0.0
    omega_c_rf: float = 0.0
    delta_p: float = 0.0
    delta_mu: float = 0.0
    delta_b: float = 0.0
    delta_c: float = 0.0

    def __post_init__(self):
        for name in ("omega_p", "omega_mu", "omega_b_rf", "omega_c_rf"):
            value = getattr(self, name)
            if not value >= 0:
                raise ConfigError(f"{name} must be a non-negative real Rabi frequency, got {value!r}")
        for name in ("delta_p", "delta_mu", "delta_b", "delta_c"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    def weak_probe(self, atom: AtomParams) -> bool:
        """True while the linear-response assumption ``omega_p << gamma_ab`` holds."""
        return self.omega_p < 0.1 * atom.gamma_ab

    @property
    def on_resonance_rf(self) -> bool:
        return self.delta_b == 0 and self.delta_c == 0


class Dressing(NamedTuple):
    theta: float
    omega_eff: float
    degenerate: bool


def dressing_angles(delta: float, omega: float) -> Dressing:
    """Mixing angle and effective Rabi frequency that diagonalize one RF-coupled doublet.

    ``cos(theta) = sqrt((1 + delta/omega_eff)/2)``, ``sin(theta) = sqrt((1 - delta/omega_eff)/2)``
    with ``omega_eff = sqrt(delta**2 + omega**2)`` and ``theta`` in ``[0, pi/2]``.
    ``delta == omega == 0`` returns the undressed basis (``theta = 0``) flagged degenerate.
    """
    if omega < 0:
        raise ConfigError(f"RF Rabi frequency must be non-negative, got {omega!r}")
    omega_eff = math.hypot(delta, omega)
    if omega_eff == 0.0:
        return Dressing(0.0, 0.0, True)
    # tan(2 theta) = omega / delta, better conditioned than the half-angle square roots
    theta = 0.5 * math.atan2(omega, delta)
    return Dressing(theta, omega_eff, False)


@dataclass(frozen=True)
class DressedFrame:
    theta_b: float
    theta_c: float
    omega_b_eff: float
    omega_c_eff: float
    degenerate_b: bool = False
    degenerate_c: bool = False

    @classmethod
    def from_fields(cls, fields: FieldParams) -> "DressedFrame":
        b = dressing_angles(fields.delta_b, fields.omega_b_rf)
        c = dressing_angles(fields.delta_c, fields.omega_c_rf)
        return cls(b.theta, c.theta, b.omega_eff, c.omega_eff, b.degenerate, c.degenerate)

    @property
    def cb(self) -> float:
        return math.cos(self.theta_b)

    @property
    def sb(self) -> float:
        return math.sin(self.theta_b)

    @property
    def cc(self) -> float:
        return math.cos(self.theta_c)

    @property
    def sc(self) -> float:
        return math.sin(self.theta_c)


def rotation(theta: float) -> np.ndarray:
    """SO(2) matrix whose rows are the dressed states ``|B>`` and ``|B'>`` in the bare basis."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def dressing_matrix(frame: DressedFrame) -> np.ndarray:
    """Block-diagonal 5x5 rotation ``D = 1 (+) D_b (+) D_c``."""
    D = np.zeros((5, 5))
    D[0, 0] = 1.0
    D[1:3, 1:3] = rotation(frame.theta_b)
    D[3:5, 3:5] = rotation(frame.theta_c)
    return D


def bare_hamiltonian(fields: FieldParams) -> np.ndarray:
    """Rotating-frame Hamiltonian / hbar in the bare basis, energies measured from ``w_a``."""
    f = fields
    H = np.zeros((5, 5), dtype=complex)
    H[1, 1] = -f.delta_p
    H[2, 2] = f.delta_b - f.delta_p
    H[3, 3] = -f.delta_mu
    H[4, 4] = f.delta_c - f.delta_mu
    couplings = {(0, 1): f.omega_p, (0, 3): f.omega_mu, (2, 1): f.omega_b_rf, (4, 3): f.omega_c_rf}
    for (i, j), omega in couplings.items():
        H[i, j] = H[j, i] = -omega / 2
    return H


def dressed_hamiltonian(fields: FieldParams, frame: DressedFrame | None = None) -> np.ndarray:
    """Partially dressed Hamiltonian / hbar in the basis ``(a, B, B', C, C')``.

    Written entry by entry rather than by conjugation, so ``D @ H @ D.T`` of
    :func:`bare_hamiltonian` is an independent check.
    """
    if frame is None:
        frame = DressedFrame.from_fields(fields)
    f = fields
    eb = f.delta_b / 2 - f.delta_p
    ec = f.delta_c / 2 - f.delta_mu
    H = np.diag([0.0, eb - frame.omega_b_eff / 2, eb + frame.omega_b_eff / 2,
                 ec - frame.omega_c_eff / 2, ec + frame.omega_c_eff / 2]).astype(complex)
    row = [-f.omega_p * frame.cb / 2, f.omega_p * frame.sb / 2,
           -f.omega_mu * frame.cc / 2, f.omega_mu * frame.sc / 2]
    H[0, 1:] = row
    H[1:, 0] = row
    return H


@dataclass(frozen=True)
class PhysicalScaling:
    """Conversion between reduced quantities and laboratory units.

    ``prefactor`` is the dimensionless factor with ``chi = prefactor * chi_reduced``
    (it absorbs ``2 sigma N D_ab**2 / (eps0 hbar gamma_ab)``).
    ``rate_unit_si`` is the value of one reduced frequency unit in s^-1.
    """

    prefactor: float = PREFACTOR_DEFAULT
    omega_p_abs: float = OMEGA_P_ABS_DEFAULT
    rate_unit_si: float = GAMMA_A_SI / 6.0
    k_p: float = field(default=None)

    def __post_init__(self):
        if self.k_p is None:
            object.__setattr__(self, "k_p", self.omega_p_abs / SPEED_OF_LIGHT)
        for name in ("prefactor", "omega_p_abs", "rate_unit_si", "k_p"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive, got {value!r}")

    @classmethod
    def for_atom(cls, atom: AtomParams, gamma_a_si: float = GAMMA_A_SI, **kwargs) -> "PhysicalScaling":
        """Scaling whose frequency unit matches ``atom`` when its ``gamma_a`` is ``gamma_a_si``."""
        return cls(rate_unit_si=gamma_a_si / atom.gamma_a, **kwargs)
