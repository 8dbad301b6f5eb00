"""
Dense complex matrix primitives.

Everything here works on plain ``numpy`` arrays of shape ``(k, k)`` (matrices)
or ``(k*k, k*k)`` (superoperators).  Superoperators use the row-major
vectorisation ``vec(A X B) = (A kron B.T) vec(X)``, so the map
``X -> K X K^dagger`` is represented by ``kron(K, conj(K))``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DimensionError, NotHermitianError, NotPositiveError

#: eigenvalues >= -PSD_TOL * (1 + ||A||) count as nonnegative
PSD_TOL = 1e-12
HERMITIAN_TOL = 1e-12


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    return A


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def hs_inner(A, B) -> complex:
    """Hilbert-Schmidt product ``tr(A B^dagger)``."""
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return complex(np.vdot(B, A))


def hs_norm(A) -> float:
    return float(np.linalg.norm(np.asarray(A)))


def is_hermitian(A, tol: float = HERMITIAN_TOL) -> bool:
    A = as_matrix(A)
    return float(np.max(np.abs(A - dagger(A)))) <= tol * (1.0 + hs_norm(A))


def _require_hermitian(A) -> np.ndarray:
    A = as_matrix(A)
    if not is_hermitian(A):
        raise NotHermitianError("matrix is not hermitian")
    return 0.5 * (A + dagger(A))


class HermitianEigen(NamedTuple):
    """Ascending real eigenvalues with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian_eigen(A) -> HermitianEigen:
    A = _require_hermitian(A)
    w, U = np.linalg.eigh(A)
    return HermitianEigen(w, U)


def min_eigenvalue(A) -> float:
    return float(hermitian_eigen(A).eigenvalues[0])


def is_psd(A, tol: float = PSD_TOL) -> bool:
    A = as_matrix(A)
    if not is_hermitian(A):
        return False
    return min_eigenvalue(A) >= -tol * (1.0 + hs_norm(A))


def positive_part_split(rho) -> tuple[np.ndarray, np.ndarray]:
    """Split a hermitian matrix as ``rho = plus - minus`` with orthogonal PSD parts.

    The parts come from the nonnegative and negative halves of the spectral
    decomposition, so ``plus @ minus == 0``.
    """
    w, U = hermitian_eigen(rho)
    pos = np.where(w > 0, w, 0.0)
    neg = np.where(w < 0, -w, 0.0)
    plus = (U * pos) @ dagger(U)
    minus = (U * neg) @ dagger(U)
    return plus, minus


def _checked_spectrum(A, strict: bool):
    A = _require_hermitian(A)
    w, U = np.linalg.eigh(A)
    scale = max(hs_norm(A), np.finfo(float).tiny)
    if strict:
        if w[0] <= 1e-10 * scale:
            raise NotPositiveError(f"matrix is singular to tolerance (min eigenvalue {w[0]:.3e})")
    elif w[0] < -PSD_TOL * (1.0 + scale):
        raise NotPositiveError(f"matrix has negative eigenvalue {w[0]:.3e}")
    return np.clip(w, 0.0, None), U


def hermitian_sqrt(A) -> np.ndarray:
    """Principal square root of a PSD matrix (tiny negative eigenvalues clamped)."""
    w, U = _checked_spectrum(A, strict=False)
    S = (U * np.sqrt(w)) @ dagger(U)
    return 0.5 * (S + dagger(S))


def hermitian_inv_sqrt(A) -> np.ndarray:
    w, U = _checked_spectrum(A, strict=True)
    S = (U / np.sqrt(w)) @ dagger(U)
    return 0.5 * (S + dagger(S))


def operator_norm(A) -> float:
    return float(np.linalg.norm(np.asarray(A), 2))


# ---------------------------------------------------------------------------
# Dominant eigenpair
# ---------------------------------------------------------------------------


class DominantPair(NamedTuple):
    value: complex
    vector: np.ndarray
    gap: float
    left_vector: np.ndarray
    iterations: int


def _phase_fix(x):
    # keep the phase from wandering so the iterates actually settle
    j = int(np.argmax(np.abs(x)))
    return x * (abs(x[j]) / x[j])


def _power(M, shift, x, tol, max_iter, scale, plain_steps=500, max_squarings=64):
    """Power iteration on ``M + shift*I``; after ``plain_steps`` switch to squaring.

    The squaring stage replaces ``T`` by ``T @ T`` (renormalised), so ``j``
    products give the power ``2^j`` and a slow ratio ``r`` decays as
    ``r^(2^j)``.  ``max_iter`` bounds the plain steps; at most
    ``max_squarings`` squarings follow.
    """
    n = M.shape[0]
    x = x / np.linalg.norm(x)
    lam = 0.0

    def settled(x):
        Mx = M @ x
        lam = np.vdot(x, Mx)
        return lam, bool(np.linalg.norm(Mx - lam * x) <= tol * scale)

    for it in range(1, min(plain_steps, max_iter) + 1):
        lam, ok = settled(x)
        if ok:
            return lam, x, it, True
        y = M @ x + shift * x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            # x is in the kernel of M + shift
            return lam, x, it, False
        x = _phase_fix(y / ny)
    T = M + shift * np.eye(n)
    x0 = x
    it = min(plain_steps, max_iter)
    for _ in range(max_squarings):
        T = T @ T
        nT = np.linalg.norm(T)
        if nT == 0.0 or not np.isfinite(nT):
            break
        T = T / nT
        y = T @ x0
        ny = np.linalg.norm(y)
        if ny == 0.0:
            break
        x = _phase_fix(y / ny)
        it += 1
        lam, ok = settled(x)
        if ok:
            return lam, x, it, True
    lam, ok = settled(x)
    return lam, x, it, ok


def _growth_rate(M, x, n_iter=400, window=100):
    """Largest eigenvalue modulus of ``M`` from the geometric growth of ``M^n x``."""
    x = x / np.linalg.norm(x)
    logs = []
    for _ in range(n_iter):
        x = M @ x
        nx = np.linalg.norm(x)
        if nx == 0.0 or not np.isfinite(nx):
            return 0.0
        logs.append(np.log(nx))
        x = x / nx
    return float(np.exp(np.mean(logs[-window:])))


def dominant_eigenpair(M, tol: float = 1e-12, max_iter: int = 20000, shift: float = 0.0,
                       x0=None, y0=None, seed: int = 0) -> DominantPair:
    """Dominant eigenvalue of ``M`` by power iteration, plus a spectral-gap estimate.

    The iteration runs on ``M + shift*I``; a positive shift separates the real
    Perron root of a positive map from other peripheral eigenvalues (e.g. the
    ``-1`` of a period-two channel), since ``|mu + shift| < lambda + shift``
    whenever ``mu != lambda`` lies in the disc of radius ``lambda``.

    Parameters
    ----------
    M : (n, n) array
    tol : float
        Stop when ``||M x - lam x|| <= tol * ||M||_F * ||x||``.
    shift : float
        Nonnegative shift applied during iteration only.
    x0, y0 : array, optional
        Start vectors for the right and left iterations.

    Returns
    -------
    DominantPair
        ``gap`` is ``|lam + shift| - |mu2 + shift|`` where ``mu2`` is the
        dominant eigenvalue left after deflating the found pair (so with
        ``shift=0`` it is ``|lam| - |lam_2|``).

    Raises
    ------
    ConvergenceError
        When the residual test is not met after ``max_iter`` steps, which
        signals several dominant eigenvalues of equal modulus.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    scale = max(np.linalg.norm(M), np.finfo(float).tiny)

    def start(v):
        if v is not None:
            return np.asarray(v, dtype=complex).ravel()
        return rng.standard_normal(n) + 1j * rng.standard_normal(n)

    lam, x, it, ok = _power(M, shift, start(x0), tol, max_iter, scale)
    if not ok:
        raise ConvergenceError(
            f"power iteration did not converge ({it} steps) "
            "(peripheral spectrum is degenerate)",
            partial=DominantPair(complex(lam), x, 0.0, x, it),
        )
    MH = dagger(M)
    mu, y, _, ok_left = _power(MH, shift, start(y0), tol, max_iter, scale)
    if not ok_left:
        raise ConvergenceError("adjoint power iteration did not converge",
                               partial=DominantPair(complex(lam), x, 0.0, y, it))

    S = M + shift * np.eye(n)
    overlap = np.vdot(y, x)
    if abs(overlap) < 1e-12:
        gap = 0.0
    else:
        deflated = S - (lam + shift) * np.outer(x, np.conj(y)) / overlap
        second = _growth_rate(deflated, start(None))
        gap = float(abs(lam + shift) - second)
    return DominantPair(complex(lam), x, gap, y, it)


def dense_eigvals(M) -> np.ndarray:
    """Full spectrum from LAPACK, used only as an independent test oracle."""
    return np.linalg.eigvals(np.asarray(M, dtype=complex))


# ---------------------------------------------------------------------------
# Superoperators
# ---------------------------------------------------------------------------


def kraus_superoperator(operators: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``sum_i w_i kron(K_i, conj(K_i))`` for a stack of operators."""
    K = np.asarray(operators, dtype=complex)
    w = np.asarray(weights, dtype=float)
    m, k, _ = K.shape
    S = np.einsum("m,mac,mbd->abcd", w, K, np.conj(K))
    return S.reshape(k * k, k * k)


def superoperator_apply(S: np.ndarray, X: np.ndarray) -> np.ndarray:
    k = X.shape[0]
    return (S @ X.reshape(-1)).reshape(k, k)


def choi_matrix(phi, dim: int | None = None) -> np.ndarray:
    """Choi matrix ``sum_ij E_ij kron phi(E_ij)``.

    ``phi`` may be a ``(k^2, k^2)`` superoperator array, a callable on
    ``(k, k)`` matrices (``dim`` required), or any object exposing
    ``operators`` and ``weights`` (a Kraus family) or a ``superoperator``
    (a channel).
    """
    if hasattr(phi, "superoperator"):
        phi = phi.superoperator
    if hasattr(phi, "operators") and hasattr(phi, "weights"):
        S = kraus_superoperator(phi.operators, phi.weights)
        k = S.shape[0]
        dim = int(round(np.sqrt(k)))
        fn = lambda X: superoperator_apply(S, X)  # noqa: E731
    elif callable(phi):
        if dim is None:
            raise ValueError("dim is required when phi is a callable")
        fn = phi
    else:
        S = np.asarray(phi, dtype=complex)
        dim = int(round(np.sqrt(S.shape[0])))
        if dim * dim != S.shape[0]:
            raise DimensionError("superoperator size is not a perfect square")
        fn = lambda X: superoperator_apply(S, X)  # noqa: E731
    k = dim
    C = np.zeros((k * k, k * k), dtype=complex)
    for i in range(k):
        for j in range(k):
            E = np.zeros((k, k), dtype=complex)
            E[i, j] = 1.0
            C += np.kron(E, fn(E))
    return C
