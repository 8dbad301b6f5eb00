"""
Channels ``phi_L(rho) = sum_i w_i K_i rho K_i^dagger`` and their Perron data.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (ConvergenceError, DimensionError, NormalizationError, NotPositiveError,
                     NotStochasticError, SpectralError)
from .linalg import (as_matrix, dagger, dominant_eigenpair, hermitian_eigen, hermitian_inv_sqrt,
                     hermitian_sqrt, kraus_superoperator)
from .measure import KrausFamily

logger = logging.getLogger(__name__)

SIMPLICITY_TOL = 1e-8
POSITIVITY_TOL = 1e-9


class Channel:
    """The completely positive map of a Kraus family.

    The ``k^2 x k^2`` superoperator is built at construction, so instances are
    immutable and can be shared between threads.
    """

    def __init__(self, family: KrausFamily):
        if not isinstance(family, KrausFamily):
            family = KrausFamily.from_operators(family)
        self.family = family
        S = kraus_superoperator(family.operators, family.weights)
        S.setflags(write=False)
        self.superoperator = S
        self._spectral = None

    @classmethod
    def from_operators(cls, operators, weights=None) -> "Channel":
        return cls(KrausFamily.from_operators(operators, weights))

    @property
    def dim(self) -> int:
        return self.family.dim

    def _check(self, rho) -> np.ndarray:
        rho = as_matrix(rho)
        if rho.shape[0] != self.dim:
            raise DimensionError(f"channel acts on {self.dim}x{self.dim}, got {rho.shape}")
        return rho

    def apply(self, rho) -> np.ndarray:
        """Kraus sum ``sum_i w_i K_i rho K_i^dagger``."""
        rho = self._check(rho)
        K = self.family.operators
        return np.einsum("m,mab,bc,mdc->ad", self.family.weights, K, rho, np.conj(K))

    def apply_dual(self, rho) -> np.ndarray:
        """``sum_i w_i K_i^dagger rho K_i``, the Hilbert-Schmidt adjoint."""
        rho = self._check(rho)
        K = self.family.operators
        return np.einsum("m,mba,bc,mcd->ad", self.family.weights, np.conj(K), rho, K)

    def apply_power(self, rho, n: int) -> np.ndarray:
        v = self._check(rho).reshape(-1)
        for _ in range(n):
            v = self.superoperator @ v
        return v.reshape(self.dim, self.dim)

    def scaled(self, c) -> "Channel":
        return Channel(self.family.scaled(c))

    @property
    def spectral(self) -> "SpectralData":
        if self._spectral is None:
            self._spectral = spectral_data(self)
        return self._spectral

    def __repr__(self):
        return f"Channel({self.family!r})"


def as_channel(obj) -> Channel:
    return obj if isinstance(obj, Channel) else Channel(obj)


class StochasticityCheck(NamedTuple):
    ok: bool
    residual: float

    def __bool__(self):
        return self.ok


def is_stochastic(channel, tol: float = 1e-9) -> StochasticityCheck:
    """``||phi^*(Id) - Id||_HS <= tol``; the residual is reported either way."""
    channel = as_channel(channel)
    k = channel.dim
    residual = float(np.linalg.norm(channel.apply_dual(np.eye(k)) - np.eye(k)))
    return StochasticityCheck(residual <= tol, residual)


@dataclass(frozen=True)
class SpectralData:
    """Spectral radius with its eigenmatrices, ``tr rho = 1`` and ``tr(sigma rho) = 1``."""

    lam: float
    rho: np.ndarray
    sigma: np.ndarray
    simple: bool
    gap: float
    converged: bool = True
    notes: tuple = field(default=())


def _unvec_positive(x: np.ndarray, k: int, what: str) -> np.ndarray:
    R = x.reshape(k, k)
    t = np.trace(R)
    if abs(t) < 1e-300:
        raise SpectralError(f"{what} eigenmatrix has zero trace")
    R = R * (np.conj(t) / abs(t))
    R = 0.5 * (R + dagger(R))
    w, U = hermitian_eigen(R)
    scale = float(np.max(np.abs(w)))
    if w[0] < -1e-9 * scale:
        raise SpectralError(
            f"{what} eigenmatrix is not positive (min eigenvalue {w[0] / scale:.3e} relative); "
            "the map is reducible or the iteration failed")
    w = np.clip(w, 0.0, None)
    R = (U * w) @ dagger(U)
    return 0.5 * (R + dagger(R))


def spectral_data(channel, tol: float = 1e-13, max_iter: int = 50_000) -> SpectralData:
    """Spectral radius ``lam`` and positive eigenmatrices of ``phi`` and ``phi^*``.

    Power iteration starts from ``Id`` on both sides and is shifted by
    ``||phi^*(Id)||`` (an upper bound on ``lam`` for completely positive maps)
    so that periodic peripheral eigenvalues cannot stall it.  ``simple`` is set
    when the deflated gap exceeds ``1e-8 * lam``.
    """
    channel = as_channel(channel)
    k = channel.dim
    S = channel.superoperator
    shift = float(np.max(np.abs(np.linalg.eigvalsh(
        0.5 * (channel.apply_dual(np.eye(k)) + dagger(channel.apply_dual(np.eye(k))))))))
    start = np.eye(k, dtype=complex).reshape(-1)
    notes = []
    converged = True
    try:
        pair = dominant_eigenpair(S, tol=tol, max_iter=max_iter, shift=shift, x0=start, y0=start)
    except ConvergenceError as exc:
        logger.warning("spectral data: %s", exc)
        pair = exc.partial
        converged = False
        notes.append(str(exc))
        if pair is None:
            raise
        # the left vector is not trustworthy; redo it on its own
        try:
            left = dominant_eigenpair(np.conj(S.T), tol=tol, max_iter=max_iter, shift=shift,
                                      x0=start, y0=start)
            pair = pair._replace(left_vector=left.vector)
        except ConvergenceError as exc2:
            pair = pair._replace(left_vector=exc2.partial.vector)
    lam = pair.value
    if abs(lam.imag) > 1e-8 * max(abs(lam), 1.0):
        notes.append(f"dominant eigenvalue has imaginary part {lam.imag:.3e}")
    lam = float(lam.real)
    if not lam > 0:
        raise SpectralError(f"spectral radius is not positive ({lam:.3e})")
    rho = _unvec_positive(pair.vector, k, "right")
    rho = rho / np.trace(rho).real
    sigma = _unvec_positive(pair.left_vector, k, "left")
    sigma = sigma / np.trace(sigma @ rho).real
    simple = converged and pair.gap > SIMPLICITY_TOL * lam
    return SpectralData(lam, rho, sigma, bool(simple), float(pair.gap), converged, tuple(notes))


def normalize(channel) -> Channel:
    """``K_i -> lam^{-1/2} sigma^{1/2} K_i sigma^{-1/2}``: a stochastic channel of radius one."""
    channel = as_channel(channel)
    sd = channel.spectral
    try:
        s_half = hermitian_sqrt(sd.sigma)
        s_inv_half = hermitian_inv_sqrt(sd.sigma)
    except NotPositiveError as exc:
        w = np.linalg.eigvalsh(sd.sigma)
        raise NormalizationError(
            f"sigma is singular (min eigenvalue {w[0]:.3e}); channel is not normalizable") from exc
    K = s_half @ channel.family.operators @ s_inv_half / np.sqrt(sd.lam)
    return Channel(channel.family.with_operators(K, note="normalized"))


# ---------------------------------------------------------------------------
# Irreducibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IrreducibilityReport:
    verdict: str  # "irreducible" | "reducible" | "undetermined"
    evidence: dict


def _rank_one(v):
    v = v / np.linalg.norm(v)
    return np.outer(v, np.conj(v))


def irreducibility_report(channel, n_probe: int = 50, seed: int = 0) -> IrreducibilityReport:
    """Layered irreducibility test.

    Primary: simple spectral radius with both eigenmatrices positive definite.
    Otherwise a probe checks ``tr[B phi^n(A)] > 0`` for some ``n <= k-1`` over
    rank-one pairs (random ones plus basis and kernel directions of the
    eigenmatrices), and a common invariant subspace of the Kraus operators is
    searched for; only a certified subspace yields ``reducible``.
    """
    from .generic import invariant_subspace_search

    channel = as_channel(channel)
    k = channel.dim
    evidence: dict = {}
    sd = None
    try:
        sd = channel.spectral
        rho_min = float(np.linalg.eigvalsh(sd.rho)[0])
        sigma_min = float(np.linalg.eigvalsh(sd.sigma / np.trace(sd.sigma).real)[0])
        evidence.update(lam=sd.lam, simple=sd.simple, gap=sd.gap,
                        rho_min_eig=rho_min, sigma_min_eig=sigma_min)
        if sd.simple and rho_min > POSITIVITY_TOL and sigma_min > POSITIVITY_TOL:
            return IrreducibilityReport("irreducible", evidence)
    except (SpectralError, ConvergenceError) as exc:
        evidence["spectral_error"] = str(exc)

    rng = np.random.default_rng(seed)
    vectors = [rng.standard_normal(k) + 1j * rng.standard_normal(k) for _ in range(n_probe)]
    structured = list(np.eye(k, dtype=complex))
    if sd is not None:
        for M in (sd.rho, sd.sigma):
            w, U = np.linalg.eigh(M)
            structured.extend(U[:, w <= POSITIVITY_TOL * max(w[-1], 1e-300)].T)
    pairs = [(vectors[i], vectors[(i + 1) % n_probe]) for i in range(n_probe)]
    pairs += [(a, b) for a in structured for b in structured]
    pairs += [(a, b) for a in vectors[:10] for b in structured]
    failing = []
    n_max = max(k - 1, 1)
    for a, b in pairs:
        A, B = _rank_one(a), _rank_one(b)
        X = A
        hit = False
        for _ in range(n_max):
            X = channel.apply(X)
            if np.trace(B @ X).real > 1e-12:
                hit = True
                break
        if not hit:
            failing.append((a, b))
    evidence["probe_pairs"] = len(pairs)
    evidence["probe_failures"] = len(failing)
    subspaces = invariant_subspace_search(channel.family)
    evidence["invariant_subspaces"] = [s.basis for s in subspaces]
    if subspaces:
        return IrreducibilityReport("reducible", evidence)
    return IrreducibilityReport("undetermined", evidence)


# ---------------------------------------------------------------------------
# Ergodic averages
# ---------------------------------------------------------------------------


class TimeAverage(NamedTuple):
    mean: np.ndarray
    distance: float


def time_average(channel, rho0, n_steps: int) -> TimeAverage:
    """Cesaro mean ``(1/N) sum_{n=1}^N phi^n(rho0)`` and its HS distance to ``rho_L``."""
    channel = as_channel(channel)
    chk = is_stochastic(channel, tol=1e-8)
    if not chk:
        raise NotStochasticError(f"time averages need a stochastic channel (residual {chk.residual:.3e})")
    v = channel._check(rho0).reshape(-1)
    acc = np.zeros_like(v)
    for _ in range(n_steps):
        v = channel.superoperator @ v
        acc += v
    mean = (acc / n_steps).reshape(channel.dim, channel.dim)
    return TimeAverage(mean, float(np.linalg.norm(mean - channel.spectral.rho)))
