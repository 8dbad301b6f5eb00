"""
Entropy, potentials, pressure and Gibbs channels.

All quantities are finite double sums over the atoms of a Kraus family.  With
``A_i = K_i rho K_i^dagger`` and ``N_ij = tr(K_j A_i K_j^dagger)`` the
transition kernel is ``P(i, j) = N_ij / tr(A_i)`` and the entropy is
``-sum_ij w_i w_j N_ij log P(i, j)``.  Logarithms are natural.
"""

from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np

from .channel import Channel, SpectralData, as_channel, is_stochastic, spectral_data
from .errors import DimensionError, MeasureMismatchError, NotStochasticError, SpectralError
from .linalg import as_matrix, dagger
from .measure import KrausFamily, ScaledShift, cyclic_shift

logger = logging.getLogger(__name__)

DEAD_ROW_TOL = 1e-14


class TransitionKernel(NamedTuple):
    """``P[i, j] = P_L(v_i, v_j)`` with stationary atom traces ``q_tilde[i] = tr(K_i rho K_i^dagger)``.

    Dead rows (``q_tilde <= 1e-14``) are all zeros and flagged in ``alive``.
    """

    P: np.ndarray
    q_tilde: np.ndarray
    weights: np.ndarray
    alive: np.ndarray

    @property
    def q(self) -> np.ndarray:
        """Stationary atom masses ``w_i q_tilde_i``."""
        return self.weights * self.q_tilde


def _word_traces(K: np.ndarray, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``q_tilde_i = tr(A_i)`` and ``N_ij = tr(G_j A_i)`` with ``G_j = K_j^dagger K_j``.

    Both are real for hermitian ``rho``; ``N`` is a single real matrix product
    over flattened ``A`` and ``G``, so the ``m^2`` words cost ``O(m^2 k^2)``.
    """
    m, k, _ = K.shape
    A = K @ rho @ dagger(K)
    G = dagger(K) @ K
    qt = np.real(np.trace(A, axis1=1, axis2=2))
    Af = A.reshape(m, -1)
    # tr(G A) = sum_ab G_ab A_ba = sum_ab conj(G_ba) A_ba since G is hermitian
    Gf = G.reshape(m, -1)
    N = Af.real @ Gf.real.T + Af.imag @ Gf.imag.T
    return qt, np.clip(N, 0.0, None)


def _stationary(channel: Channel, rho, tol: float) -> np.ndarray:
    chk = is_stochastic(channel, tol=tol)
    if not chk:
        raise NotStochasticError(
            f"entropy needs a stochastic channel (residual {chk.residual:.3e}); normalize first")
    if rho is None:
        return channel.spectral.rho
    rho = as_matrix(rho)
    if rho.shape[0] != channel.dim:
        raise DimensionError(f"rho has shape {rho.shape}, channel acts on dim {channel.dim}")
    residual = float(np.linalg.norm(channel.apply(rho) - rho))
    if residual > max(tol, 1e-9) * 10:
        raise SpectralError(f"supplied rho is not a fixed point (residual {residual:.3e})")
    return rho


def transition_kernel(channel, rho=None, tol: float = 1e-9) -> TransitionKernel:
    """Kernel ``P_L(v_i, v_j)`` of a stochastic channel at its fixed density.

    Parameters
    ----------
    channel : Channel or KrausFamily
    rho : array, optional
        Fixed density to use instead of ``rho_L``; needed when the fixed
        point is not unique.
    tol : float
        Stochasticity tolerance.
    """
    channel = as_channel(channel)
    rho = _stationary(channel, rho, tol)
    qt, N = _word_traces(channel.family.operators, rho)
    alive = qt > DEAD_ROW_TOL
    P = np.zeros_like(N)
    P[alive] = N[alive] / qt[alive, None]
    return TransitionKernel(P, qt, np.asarray(channel.family.weights), alive)


def entropy_from_kernel(kernel: TransitionKernel) -> float:
    """``-sum_ij w_i w_j q_tilde_i P_ij log P_ij`` with ``0 log 0 = 0``."""
    w, P = kernel.weights, kernel.P
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
    return float(-np.sum((w * kernel.q_tilde)[:, None] * w[None, :] * plogp))


def entropy(channel, rho=None, tol: float = 1e-9) -> float:
    """Entropy ``h_mu(L)`` of a stochastic channel in nats.

    Computed straight from the word traces ``N_ij`` without forming the kernel
    (``-sum w_i w_j N_ij log(N_ij / q_tilde_i)``); :func:`entropy_from_kernel`
    is the second code path for the same number.
    """
    channel = as_channel(channel)
    rho = _stationary(channel, rho, tol)
    qt, N = _word_traces(channel.family.operators, rho)
    w = np.asarray(channel.family.weights)
    alive = qt > DEAD_ROW_TOL
    N = N[alive]
    den = qt[alive, None]
    mask = N > 0
    terms = np.zeros_like(N)
    terms[mask] = N[mask] * np.log((N / den)[mask])
    return float(-np.sum(w[alive, None] * w[None, :] * terms))


class PotentialData(NamedTuple):
    spectral: SpectralData
    U: np.ndarray

    @property
    def lam(self) -> float:
        return self.spectral.lam

    @property
    def phi_squared(self) -> np.ndarray:
        """``exp(U) / lambda_H``, the Gibbs kernel row."""
        return np.exp(self.U) / self.spectral.lam


def potential_data(H) -> PotentialData:
    """``U_H(v_i) = log tr(sigma_H H(v_i) rho_H H(v_i)^dagger)``.

    Raises
    ------
    ValueError
        If some atom has zero trace, where the potential is ``-inf``.
    """
    ch = as_channel(H)
    sd = ch.spectral
    K = ch.family.operators
    t = np.real(np.einsum("ab,mbc,cd,mad->m", sd.sigma, K, sd.rho, np.conj(K)))
    bad = np.flatnonzero(t <= 0)
    if bad.size:
        raise ValueError(f"atom {int(bad[0])} has tr(sigma H rho H^dagger) = {t[bad[0]]:.3e}; "
                         "the potential is undefined there")
    return PotentialData(sd, np.log(t))


def pressure(H) -> float:
    """``P(H) = log lambda_H``."""
    return float(np.log(as_channel(H).spectral.lam))


def pressure_functional(L, H, potential: PotentialData | None = None) -> float:
    """``h_mu(L) + sum_i w_i U_H(v_i) tr(K_i rho_L K_i^dagger)`` for stochastic ``L``."""
    L = as_channel(L)
    H = as_channel(H)
    if not L.family.shares_atoms_with(H.family):
        raise MeasureMismatchError("L and H must be defined on the same atoms")
    pot = potential if potential is not None else potential_data(H)
    kernel = transition_kernel(L)
    return entropy_from_kernel(kernel) + float(np.sum(kernel.q * pot.U))


def gibbs_maximizer(H, special_atom_index: int | None = None) -> KrausFamily:
    """The stochastic irreducible ``L`` attaining the pressure of ``H``.

    ``L(v) = phi(v) Q`` on the special atom and ``phi(v) P`` elsewhere, where
    ``phi(v)^2 = tr(sigma_H H(v) rho_H H(v)^dagger) / lambda_H``, ``P`` is the
    cyclic shift ``P e_{i+1} = e_i`` and ``Q = diag(1, ..., 1, -1)``.  Its
    kernel is ``P_L(v, w) = phi(w)^2`` for every ``v``.
    """
    ch = as_channel(H)
    fam = ch.family
    pot = potential_data(ch)
    phi = np.sqrt(pot.phi_squared)
    if np.count_nonzero(phi > 0) < 2:
        raise ValueError("need at least two atoms with nonzero potential")
    if special_atom_index is None:
        special_atom_index = int(np.argmax(phi))
    if not 0 <= special_atom_index < len(fam):
        raise IndexError(f"special atom {special_atom_index} out of range")
    lmap = ScaledShift(phi, special_atom_index)
    K = lmap(fam.points)
    return KrausFamily(weights=fam.weights, operators=K, points=fam.points, mass=fam.mass,
                       measure=fam.measure, lmap=lmap,
                       note=f"Gibbs maximizer, special atom {special_atom_index}")


class GibbsCheck(NamedTuple):
    ok: bool
    deviation: float

    def __bool__(self):
        return self.ok


def gibbs_condition_check(L, H, tol: float = 1e-8) -> GibbsCheck:
    """``max |P_L(i, j) - exp(U_H(v_j)) / lambda_H|`` over live rows."""
    L = as_channel(L)
    pot = potential_data(H)
    kernel = transition_kernel(L)
    dev = np.abs(kernel.P[kernel.alive] - pot.phi_squared[None, :])
    d = float(dev.max()) if dev.size else 0.0
    return GibbsCheck(d <= tol, d)


def gibbs_inequality_check(p, q, w) -> float:
    """``-sum w p log p + sum w p log q``, which is ``<= 0`` for normalized ``p, q``.

    Raises
    ------
    ValueError
        If ``sum w p`` or ``sum w q`` differs from one by more than 1e-9, or
        ``q`` vanishes where ``p`` does not.
    """
    p, q, w = (np.asarray(a, dtype=float) for a in (p, q, w))
    for name, a in (("p", p), ("q", q)):
        s = float(np.sum(w * a))
        if abs(s - 1.0) > 1e-9:
            raise ValueError(f"sum w {name} = {s!r}, expected 1")
    live = (w > 0) & (p > 0)
    if np.any(q[live] <= 0):
        raise ValueError("q must be positive where p is")
    val = float(np.sum(w[live] * p[live] * (np.log(q[live]) - np.log(p[live]))))
    assert val <= 1e-12, val
    return val
