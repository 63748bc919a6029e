"""Time-domain integration used as an independent check of the steady-state solvers.

The first-order equations of motion are built here directly from the density
matrix commutator and a dephasing model applied in the bare basis; nothing is
taken from :mod:`eit5.steady_state`. Their generator is then extracted by applying
the right-hand side to unit vectors, and integrated with classical RK4.

For horizons of many decay times the RK4 update ``x -> P x + q`` is composed
with itself by repeated squaring, which reproduces ``2**k`` fixed steps exactly
(up to rounding) in ``k`` matrix products and works on stacks of systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.linalg import null_space

from .errors import IntegrationError
from .model import AtomParams, DressedFrame, FieldParams, bare_hamiltonian, dressed_hamiltonian, dressing_matrix

# State layout of the first-order system.
BB_SLICE = slice(0, 4)  # rho_BB, rho_B'B', rho_BB', rho_B'B
COH_SLICE = slice(4, 10)  # rho_aB, rho_CB, rho_C'B, rho_aB', rho_CB', rho_C'B'
_BB_INDEX = [(1, 1), (2, 2), (1, 2), (2, 1)]
_COH_INDEX = [(0, 1), (3, 1), (4, 1), (0, 2), (3, 2), (4, 2)]


@dataclass(frozen=True)
class OdeSystem:
    """Linear system ``dx/dt = generator @ x + source``."""

    generator: np.ndarray
    source: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.generator, dtype=complex)
        s = np.asarray(self.source, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or s.shape != g.shape[:1]:
            raise ValueError("generator must be square and match the source length")
        object.__setattr__(self, "generator", g)
        object.__setattr__(self, "source", s)

    @property
    def dimension(self) -> int:
        return self.source.size

    def rhs(self, x: np.ndarray) -> np.ndarray:
        return self.generator @ x + self.source

    def residual(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(self.rhs(x)))

    def max_growth_rate(self) -> float:
        """Largest real part among the generator eigenvalues."""
        return float(np.max(np.linalg.eigvals(self.generator).real))


@dataclass(frozen=True)
class SteadyStateResult:
    state: np.ndarray
    converged: bool
    t_reached: float


def rk4_step(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, dt: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of ``dx/dt = f(x)``."""
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(f: Callable[[np.ndarray], np.ndarray], x0, dt: float, t_end: float,
              record_every: int = 0):
    """Fixed-step RK4 from ``t = 0`` to ``t_end`` (rounded to a whole number of steps).

    Returns the final state, or ``(times, states)`` when ``record_every > 0``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    n_steps = int(round(t_end / dt))
    x = np.array(x0, dtype=complex)
    times, states = [0.0], [x.copy()]
    for i in range(1, n_steps + 1):
        x = rk4_step(f, x, dt)
        if record_every and i % record_every == 0:
            times.append(i * dt)
            states.append(x.copy())
    if record_every:
        return np.array(times), np.array(states)
    return x


def integrate_to_steady_state(system: OdeSystem, x0, dt: float, t_max: float,
                              tol: float = 1e-12) -> SteadyStateResult:
    """Step RK4 until ``|dx/dt| < tol * |x| + tol`` or ``t_max`` is reached.

    Raises :class:`IntegrationError` if the norm grows beyond any physical bound,
    which signals that ``dt`` is too large for the fastest mode.
    """
    x = np.array(x0, dtype=complex)
    bound = 1e6 * (1 + np.linalg.norm(x) + np.linalg.norm(system.source) * t_max)
    n_steps = int(math.ceil(t_max / dt))
    for i in range(1, n_steps + 1):
        x = rk4_step(system.rhs, x, dt)
        norm = np.linalg.norm(x)
        if not np.isfinite(norm) or norm > bound:
            raise IntegrationError(
                f"RK4 unstable at t={i * dt:.3g}: |x|={norm:.3g}; reduce dt below "
                f"{2.5 / np.linalg.norm(system.generator, 2):.3g}")
        if i % 16 == 0 and system.residual(x) < tol * norm + tol:
            return SteadyStateResult(x, True, i * dt)
    return SteadyStateResult(x, system.residual(x) < tol * np.linalg.norm(x) + tol, n_steps * dt)


def rk4_affine_map(generator: np.ndarray, source: np.ndarray, dt: float):
    """Matrices ``(P, q)`` with ``rk4_step(x) == P @ x + q`` for a linear system.

    Accepts stacks: ``generator`` of shape ``(..., n, n)``, ``source`` ``(..., n)``.
    """
    h = dt * np.asarray(generator, dtype=complex)
    eye = np.broadcast_to(np.eye(h.shape[-1]), h.shape)
    h2 = h @ h
    h3 = h2 @ h
    P = eye + h + h2 / 2 + h3 / 6 + (h3 @ h) / 24
    Q = eye + h / 2 + h2 / 6 + h3 / 24
    q = dt * (Q @ np.asarray(source, dtype=complex)[..., None])[..., 0]
    return P, q


def propagate_doubling(generator, source, x0, dt: float, max_doublings: int = 80,
                       rtol: float = 1e-12, normalize: Callable | None = None):
    """Long-time RK4 limit by composing the one-step map with itself.

    After ``k`` doublings the map advances ``2**k`` steps. Iteration stops, per
    system in the stack, once a further doubling changes the state by less than
    ``rtol`` relative. ``normalize`` maps a stack of states to one conserved
    scalar per state (e.g. the trace); states are divided by it, which removes
    the slow rounding drift of a neutral mode over very long horizons.
    Returns ``(state, converged, t_reached)`` arrays.
    """
    P, q = rk4_affine_map(generator, source, dt)
    x0 = np.asarray(x0, dtype=complex)
    x0 = np.broadcast_to(x0, q.shape)
    x = (P @ x0[..., None])[..., 0] + q
    steps = np.ones(q.shape[:-1])
    converged = np.zeros(q.shape[:-1], dtype=bool)
    for _ in range(max_doublings):
        # (P, q) o (P, q) = (P P, P q + q)
        q = (P @ q[..., None])[..., 0] + q
        P = P @ P
        x_new = (P @ x0[..., None])[..., 0] + q
        if normalize is not None:
            x_new = x_new / normalize(x_new)[..., None]
        scale = np.maximum(np.linalg.norm(x_new, axis=-1), 1e-300)
        if not np.all(np.isfinite(x_new)) or np.any(scale > 1e100):
            raise IntegrationError("RK4 propagator diverged; dt too large, generator unstable, "
                                   "or a conserved mode needs `normalize`")
        done = np.linalg.norm(x_new - x, axis=-1) <= rtol * scale
        x = np.where(converged[..., None], x, x_new)
        steps = np.where(converged, steps, 2 * steps)
        converged |= done
        if converged.all():
            break
    return x, converged, steps * dt


def _dephasing_rates(atom: AtomParams) -> np.ndarray:
    """Symmetric matrix of bare-basis coherence decay rates over ``(a, b, b', c, c')``."""
    G = np.zeros((5, 5))
    pairs = {
        (0, 1): atom.gamma_ab, (0, 2): atom.gamma_ab,
        (3, 1): atom.gamma_C, (3, 2): atom.gamma_C,
        (4, 1): atom.gamma_Cprime, (4, 2): atom.gamma_Cprime,
        (1, 2): atom.gamma_bb_tilde,
    }
    for (i, j), rate in pairs.items():
        G[i, j] = G[j, i] = rate
    return G


def first_order_rhs(atom: AtomParams, fields: FieldParams, frame: DressedFrame | None = None):
    """Right-hand side of the first-order equations in the dressed basis.

    The state holds the dressed b-doublet block at zeroth order and the six
    optical/ground coherences ``rho_xY`` (``x`` in ``a, C, C'``, ``Y`` in
    ``B, B'``) at first order in the probe. Coherent evolution is
    ``-i [H, rho]``; decoherence is applied as element-wise decay in the bare
    basis and rotated back.
    """
    if frame is None:
        frame = DressedFrame.from_fields(fields)
    H = dressed_hamiltonian(fields, frame)
    H0 = dressed_hamiltonian(replace(fields, omega_p=0.0), frame)
    D = dressing_matrix(frame)
    rates = _dephasing_rates(atom)

    def decohere(rho):
        bare = D.T @ rho @ D
        return -D @ (rates * bare) @ D.T

    def rhs(x):
        rho0 = np.zeros((5, 5), dtype=complex)
        for k, (i, j) in enumerate(_BB_INDEX):
            rho0[i, j] = x[k]
        rho1 = np.zeros((5, 5), dtype=complex)
        for k, (i, j) in enumerate(_COH_INDEX):
            rho1[i, j] = x[4 + k]
        d0 = -1j * (H0 @ rho0 - rho0 @ H0) + decohere(rho0)
        total = rho0 + rho1
        d1 = -1j * (H @ total - total @ H) + decohere(total)
        out = np.empty(10, dtype=complex)
        for k, (i, j) in enumerate(_BB_INDEX):
            out[k] = d0[i, j]
        for k, (i, j) in enumerate(_COH_INDEX):
            out[4 + k] = d1[i, j]
        return out

    return rhs


def generator_from_rhs(rhs: Callable[[np.ndarray], np.ndarray], dimension: int) -> OdeSystem:
    """Extract ``(G, b)`` of an affine right-hand side by probing it with unit vectors."""
    b = rhs(np.zeros(dimension, dtype=complex))
    G = np.empty((dimension, dimension), dtype=complex)
    for k in range(dimension):
        e = np.zeros(dimension, dtype=complex)
        e[k] = 1.0
        G[:, k] = rhs(e) - b
    return OdeSystem(G, b)


def first_order_system(atom: AtomParams, fields: FieldParams, frame: DressedFrame | None = None) -> OdeSystem:
    """Combined 10-variable linear system (doublet plus coherences); homogeneous."""
    return generator_from_rhs(first_order_rhs(atom, fields, frame), 10)


def coherence_system(atom: AtomParams, fields: FieldParams, bb_state, frame: DressedFrame | None = None) -> OdeSystem:
    """Six-variable coherence system driven by a frozen doublet state ``bb_state`` (4-vector)."""
    full = first_order_system(atom, fields, frame)
    G = full.generator
    source = G[COH_SLICE, BB_SLICE] @ np.asarray(bb_state, dtype=complex)
    return OdeSystem(G[COH_SLICE, COH_SLICE], source)


def bare_initial_state(frame: DressedFrame, population_b: float = 1.0) -> np.ndarray:
    """10-vector with the doublet in ``population_b |b><b| + (1 - population_b) |b'><b'|`` and no coherences."""
    D = dressing_matrix(frame)[1:3, 1:3]
    rho = D @ np.diag([population_b, 1.0 - population_b]) @ D.T
    x = np.zeros(10, dtype=complex)
    x[:4] = [rho[0, 0], rho[1, 1], rho[0, 1], rho[1, 0]]
    return x


def probe_coherence(state: np.ndarray, frame: DressedFrame) -> np.ndarray:
    """``rho_ab`` from the dressed coherences ``rho_aB`` and ``rho_aB'`` (last axis is the state)."""
    return frame.cb * state[..., 4] - frame.sb * state[..., 7]


def default_dt(generator: np.ndarray) -> float:
    """Step of ``0.1 / |G|``, well inside the RK4 stability region."""
    norm = np.max(np.linalg.norm(generator, ord=2, axis=(-2, -1)))
    return 0.1 / max(float(norm), 1e-12)


def chi_time_domain(atom: AtomParams, fields: FieldParams, delta_p=None, *, population_b: float = 1.0,
                    rtol: float = 1e-12):
    """Reduced susceptibility from the long-time limit of the combined first-order dynamics.

    Starts with the doublet population in ``b`` (by default) and no
    coherences. Vectorized over ``delta_p``; raises :class:`IntegrationError`
    if any point fails to settle.
    """
    dp = np.atleast_1d(np.asarray(fields.delta_p if delta_p is None else delta_p, dtype=float))
    unit = replace(fields, omega_p=1.0)
    frame = DressedFrame.from_fields(unit)
    # the generator is affine in delta_p; two evaluations fix it exactly
    base = first_order_system(atom, replace(unit, delta_p=0.0), frame).generator
    per_unit = first_order_system(atom, replace(unit, delta_p=1.0), frame).generator - base
    G = base[None, :, :] + dp[:, None, None] * per_unit[None]
    x0 = bare_initial_state(frame, population_b)
    x, ok, _ = propagate_doubling(G, np.zeros((dp.size, 10)), x0, default_dt(G), rtol=rtol,
                                  normalize=lambda x: (x[..., 0] + x[..., 1]) / (x0[0] + x0[1]))
    if not ok.all():
        raise IntegrationError(f"time-domain integration did not settle at {np.count_nonzero(~ok)} point(s)")
    out = atom.gamma_ab * probe_coherence(x, frame)
    return out[0] if np.ndim(delta_p if delta_p is not None else fields.delta_p) == 0 else out


@dataclass(frozen=True)
class DecayExponents:
    """Oscillation ``A`` and damping ``B`` of the doublet coherence, ``exp((iA - B) t)``.

    When ``overdamped`` the printed ``A`` is imaginary and ``A`` holds its
    magnitude.
    """

    A: float
    B: float
    overdamped: bool


def decay_exponents_bb(atom: AtomParams, omega_b_rf: float) -> DecayExponents:
    """``A = sqrt(4 Omega_b^2 - g^2)/2`` and ``B = g/2`` with ``g`` the b-doublet dephasing."""
    g = atom.gamma_bb_tilde
    disc = 4 * omega_b_rf ** 2 - g ** 2
    return DecayExponents(math.sqrt(abs(disc)) / 2, g / 2, disc < 0)


# Full five-level master equation (bare basis) ------------------------------------------------

def emission_rate_per_channel(atom: AtomParams) -> float:
    """Rate of each of the three decay channels ``a -> b, b', c``.

    Chosen so that ``rho_ab`` decays at exactly ``gamma_ab``: the total
    population decay rate is ``2 (gamma_ab - gamma_ab_tilde) = gamma_a / 3``.
    """
    return 2 * (atom.gamma_ab - atom.gamma_ab_tilde) / 3


def lindblad_rhs(atom: AtomParams, fields: FieldParams):
    """Master-equation right-hand side acting on a 5x5 density matrix in the bare rotating frame.

    Spontaneous emission from ``a`` into ``b``, ``b'`` and ``c`` with equal
    rates and element-wise pure dephasing of the coherences. Rates are set so
    that the linear coherences decay exactly as in the first-order model.
    """
    H = bare_hamiltonian(fields)
    r = emission_rate_per_channel(atom)
    total = 3 * r
    pure = np.zeros((5, 5))
    extra = {(0, 1): atom.gamma_ab_tilde, (0, 2): atom.gamma_ab_tilde,
             (3, 1): atom.gamma_C, (3, 2): atom.gamma_C,
             (4, 1): atom.gamma_Cprime, (4, 2): atom.gamma_Cprime, (1, 2): atom.gamma_bb_tilde}
    for (i, j), rate in extra.items():
        pure[i, j] = pure[j, i] = rate
    # anticommutator part of the emission dissipator damps every element in row/column a by total/2
    damp = np.zeros((5, 5))
    damp[0, :] += total / 2
    damp[:, 0] += total / 2

    def rhs(rho):
        d = -1j * (H @ rho - rho @ H) - (damp + pure) * rho
        feed = r * rho[0, 0]
        d[1, 1] += feed
        d[2, 2] += feed
        d[3, 3] += feed
        return d

    return rhs


def lindblad_trajectory(atom: AtomParams, fields: FieldParams, rho0, dt: float, t_end: float,
                        record_every: int = 0):
    """RK4 integration of the full master equation from ``rho0``."""
    f = lindblad_rhs(atom, fields)
    return integrate(f, np.asarray(rho0, dtype=complex), dt, t_end, record_every)


def lindblad_steady_state(atom: AtomParams, fields: FieldParams) -> np.ndarray:
    """Trace-one stationary density matrix from the null space of the Liouvillian.

    Raises :class:`IntegrationError` when the stationary state is not unique.
    """
    f = lindblad_rhs(atom, fields)
    L = np.empty((25, 25), dtype=complex)
    for k in range(25):
        e = np.zeros(25, dtype=complex)
        e[k] = 1.0
        L[:, k] = f(e.reshape(5, 5)).reshape(25)
    kernel = null_space(L, rcond=1e-12)
    if kernel.shape[1] != 1:
        raise IntegrationError(f"master equation has {kernel.shape[1]} stationary states")
    rho = kernel[:, 0].reshape(5, 5)
    rho = rho / np.trace(rho)
    return (rho + rho.conj().T) / 2
