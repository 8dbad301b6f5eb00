"""
The projective Markov kernel ``Pi_L`` and the processes it drives.

From a unit vector ``x`` the kernel moves to the class of ``K_i x`` with
probability ``w_i ||K_i x||^2``.  Points of projective space are stored as unit
vectors with a canonical phase (first non-negligible coordinate real and
positive), so equal classes have equal representatives up to rounding.

Random numbers
--------------
All sampling uses ``numpy.random.Generator(PCG64)``.  Chain ``c`` of a run
with seed ``s`` draws from ``default_rng(SeedSequence([s, c]))``.  One step
consumes exactly one ``rng.random()`` and picks the atom by inverse CDF over
the current step probabilities in atom order, both in :func:`kernel_step`
and :func:`quantum_trajectory`, so the two processes couple pathwise.
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channel import as_channel
from .errors import DimensionError, NotStochasticError
from .linalg import dagger

logger = logging.getLogger(__name__)

PHASE_TOL = 1e-12
ATOM_TOL = 1e-14
MERGE_TOL = 1e-10
THREADS_ENV = "KRAUS_THERMO_THREADS"


def canonical_representative(x) -> np.ndarray:
    """Unit vector in the class of ``x`` whose first coordinate above 1e-12 in modulus is real positive."""
    x = np.asarray(x, dtype=complex).ravel()
    if np.linalg.norm(x) == 0:
        raise ValueError("the zero vector has no projective class")
    return canonical_rows(x[None])[0]


def canonical_rows(X: np.ndarray) -> np.ndarray:
    """:func:`canonical_representative` applied to every row of ``X`` (rows must be nonzero)."""
    X = np.asarray(X, dtype=complex)
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    j = np.argmax(np.abs(X) > PHASE_TOL, axis=1)
    lead = X[np.arange(len(X)), j]
    X = X * (np.abs(lead) / lead)[:, None]
    X[np.arange(len(X)), j] = np.abs(X[np.arange(len(X)), j])
    return X


def _wedge_distance(Y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``(1 - |<y, x>|^2)^(1/2)`` for unit rows ``y`` of ``Y``, free of cancellation.

    Uses ``|x|^2 |y|^2 - |<x, y>|^2 = 1/2 sum_ij |x_i y_j - x_j y_i|^2`` so
    distances far below ``sqrt(eps)`` are still resolved.
    """
    W = Y[:, :, None] * x[None, None, :] - Y[:, None, :] * x[None, :, None]
    return np.sqrt(0.5 * np.sum(np.abs(W) ** 2, axis=(1, 2)))


def proj_distance(x, y) -> float:
    """``(1 - |<x, y>|^2)^(1/2)`` between the classes of ``x`` and ``y``."""
    x = np.asarray(x, dtype=complex).ravel()
    y = np.asarray(y, dtype=complex).ravel()
    d = _wedge_distance((y / np.linalg.norm(y))[None], x / np.linalg.norm(x))[0]
    return float(min(d, 1.0))


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Finitely supported probability ``sum_j omega_j delta_{x_j}`` on projective space."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, dtype=complex))
        w = np.asarray(self.weights, dtype=float).ravel()
        if P.shape[0] != w.shape[0]:
            raise DimensionError("one weight per point is required")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        # absorb summation round-off so the invariant holds to 1e-12
        w = w / w.sum()
        P = canonical_rows(P)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, x) -> "EmpiricalMeasure":
        return cls([x], [1.0])

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalMeasure":
        """Equal weights on the samples, then merged."""
        samples = np.asarray(samples)
        n = len(samples)
        return cls(samples, np.full(n, 1.0 / n)).merged()

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def merged(self, tol: float = MERGE_TOL) -> "EmpiricalMeasure":
        """Combine points closer than ``tol`` in projective distance."""
        pts, ws = _merge(self.points, self.weights, tol)
        return EmpiricalMeasure(pts, ws)

    def mass_near(self, x, tol: float = 1e-6) -> float:
        d = _wedge_distance(self.points, canonical_representative(x))
        return float(self.weights[d < tol].sum())

    def integrate(self, f: Callable[[np.ndarray], complex]) -> complex:
        return complex(sum(w * f(x) for x, w in zip(self.points, self.weights)))


def _merge(points: np.ndarray, weights: np.ndarray, tol: float):
    """Greedy clustering: each remaining point absorbs everything within ``tol`` of it.

    Points must be unit vectors.  Costs one vectorised distance sweep per
    output point.
    """
    remaining = np.arange(len(points))
    kept_p, kept_w = [], []
    while remaining.size:
        x = points[remaining[0]]
        close = _wedge_distance(points[remaining], x) < tol
        kept_p.append(x)
        kept_w.append(float(weights[remaining[close]].sum()))
        remaining = remaining[~close]
    return np.array(kept_p), np.array(kept_w)


@dataclass(frozen=True)
class TrajectoryConfig:
    n_steps: int
    burn_in: int = 0
    n_chains: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_steps < 1 or self.n_chains < 1 or self.burn_in < 0:
            raise ValueError("n_steps and n_chains must be positive, burn_in nonnegative")
        if self.burn_in >= self.n_steps:
            raise ValueError("burn_in must be smaller than n_steps")


def chain_rng(seed: int, chain: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, chain]))


def _step_probabilities(channel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Kx = channel.family.operators @ x
    p = channel.family.weights * np.sum(np.abs(Kx) ** 2, axis=1)
    return p, Kx


def _draw(p: np.ndarray, u: float) -> int:
    """Inverse CDF on atoms with ``p >= 1e-14``; ``u`` uniform on [0, 1)."""
    p = np.where(p >= ATOM_TOL, p, 0.0)
    c = np.cumsum(p)
    i = int(np.searchsorted(c, u * c[-1], side="right"))
    i = min(i, len(p) - 1)
    # skip zero-probability atoms landed on by rounding at the top end
    while p[i] == 0.0:
        i -= 1
    return i


def _canonical_unit(y: np.ndarray) -> np.ndarray:
    y = y / np.sqrt(np.vdot(y, y).real)
    j = int(np.argmax(np.abs(y) > PHASE_TOL))
    y = y * (abs(y[j]) / y[j])
    y[j] = abs(y[j])
    return y


def _step(K: np.ndarray, w: np.ndarray, x: np.ndarray, u: float) -> tuple[np.ndarray, int]:
    Kx = K @ x
    p = w * (Kx.real**2 + Kx.imag**2).sum(axis=1)
    total = p.sum()
    if abs(total - 1.0) > 1e-6:
        raise NotStochasticError(f"step mass {total:.9f} at this point; channel is not stochastic")
    i = _draw(p, u)
    return _canonical_unit(Kx[i]), i


def kernel_step(channel, x, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """One move of ``Pi_L`` from the class of ``x``; returns the new point and the atom index.

    Raises
    ------
    NotStochasticError
        If ``sum_i w_i ||K_i x||^2`` differs from one by more than 1e-6.
    """
    channel = as_channel(channel)
    return _step(channel.family.operators, channel.family.weights,
                 canonical_representative(x), rng.random())


def markov_operator_apply(nu: EmpiricalMeasure, channel) -> EmpiricalMeasure:
    """Exact pushforward ``nu Pi_L`` of a finitely supported measure."""
    channel = as_channel(channel)
    K = channel.family.operators
    w = channel.family.weights
    Kx = np.einsum("mab,nb->nma", K, nu.points)  # (points, atoms, k)
    mass = nu.weights[:, None] * w[None, :] * np.sum(np.abs(Kx) ** 2, axis=2)
    keep = mass > ATOM_TOL
    lost = float(mass[~keep].sum())
    if lost > 0:
        logger.info("pushforward discarded %.3e of mass below threshold", lost)
    pts = Kx[keep]
    ms = mass[keep]
    pts, ms = _merge(canonical_rows(pts), ms, MERGE_TOL)
    return EmpiricalMeasure(pts, ms / ms.sum())


def total_variation(a: EmpiricalMeasure, b: EmpiricalMeasure, tol: float = MERGE_TOL) -> float:
    pts = np.concatenate([a.points, b.points])
    ws = np.concatenate([a.weights, -b.weights])
    _, merged = _merge(pts, ws, tol)
    return 0.5 * float(np.abs(merged).sum())


def feller_apply(f: Callable[[np.ndarray], complex], x, channel) -> complex:
    """``(U f)(x) = sum_i w_i f(K_i . x) ||K_i x||^2``."""
    channel = as_channel(channel)
    x = canonical_representative(x)
    p, Kx = _step_probabilities(channel, x)
    out = 0.0 + 0.0j
    for pi, y in zip(p, Kx):
        if pi > 0:
            out += pi * f(canonical_representative(y))
    return complex(out)


def barycenter(nu: EmpiricalMeasure) -> np.ndarray:
    """``sum_j omega_j |x_j><x_j|``."""
    X = nu.points
    B = np.einsum("n,na,nb->ab", nu.weights, X, np.conj(X))
    return 0.5 * (B + dagger(B))


@dataclass(frozen=True)
class InvariantMeasureResult:
    measure: EmpiricalMeasure
    method: str  # "pushforward" | "monte_carlo"
    iterations: int
    change: float


def invariant_measure(channel, x0=None, tol: float = 1e-10, max_iter: int = 10_000,
                      max_support: int = 10_000, config: TrajectoryConfig | None = None
                      ) -> InvariantMeasureResult:
    """Invariant probability of ``Pi_L``: exact pushforward first, Monte Carlo if that fails.

    The pushforward iterates ``nu -> nu Pi_L`` from ``delta_{x0}`` (default
    ``e_1``) until the total-variation change drops below ``tol``; it gives up
    when the support exceeds ``max_support`` points or ``max_iter`` is hit.
    """
    channel = as_channel(channel)
    k = channel.dim
    x0 = np.eye(k)[0] if x0 is None else x0
    nu = EmpiricalMeasure.dirac(x0)
    for it in range(1, max_iter + 1):
        new = markov_operator_apply(nu, channel)
        if len(new) > max_support:
            logger.info("support exceeded %d points; switching to Monte Carlo", max_support)
            break
        change = total_variation(new, nu)
        nu = new
        if change < tol:
            return InvariantMeasureResult(nu, "pushforward", it, change)
    config = config or TrajectoryConfig(n_steps=20_000, burn_in=1_000, n_chains=4)
    sim = simulate(channel, x0, config)
    return InvariantMeasureResult(sim.empirical, "monte_carlo", config.n_steps, float("nan"))


@dataclass(frozen=True)
class SimulationResult:
    paths: np.ndarray  # (n_chains, n_steps + 1, k)
    atoms: np.ndarray  # (n_chains, n_steps)
    empirical: EmpiricalMeasure
    chain_barycenters: np.ndarray
    spread: float

    @property
    def barycenter(self) -> np.ndarray:
        return barycenter(self.empirical)


def _run_chain(channel, x0, n_steps: int, rng) -> tuple[np.ndarray, np.ndarray]:
    k = channel.dim
    path = np.empty((n_steps + 1, k), dtype=complex)
    atoms = np.empty(n_steps, dtype=np.int64)
    K, w = channel.family.operators, channel.family.weights
    x = canonical_representative(x0)
    path[0] = x
    for n in range(n_steps):
        x, atoms[n] = _step(K, w, x, rng.random())
        path[n + 1] = x
    return path, atoms


def _n_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    return max(1, int(env)) if env else (os.cpu_count() or 1)


def simulate(channel, x0, config: TrajectoryConfig) -> SimulationResult:
    """Independent chains of ``Pi_L`` pooled after burn-in with equal weights.

    Chains run on a thread pool (size from ``KRAUS_THERMO_THREADS``, default
    the core count); results do not depend on scheduling since each chain owns
    its generator.
    """
    channel = as_channel(channel)
    rngs = [chain_rng(config.seed, c) for c in range(config.n_chains)]
    work = lambda c: _run_chain(channel, x0, config.n_steps, rngs[c])  # noqa: E731
    n_threads = min(_n_threads(), config.n_chains)
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            results = list(pool.map(work, range(config.n_chains)))
    else:
        results = [work(c) for c in range(config.n_chains)]
    paths = np.array([r[0] for r in results])
    atoms = np.array([r[1] for r in results])
    kept = paths[:, config.burn_in + 1:, :]
    bary = np.einsum("cna,cnb->cab", kept, np.conj(kept)) / kept.shape[1]
    empirical = EmpiricalMeasure.from_samples(kept.reshape(-1, channel.dim))
    spread = float(max(np.linalg.norm(b - bary.mean(axis=0)) for b in bary))
    return SimulationResult(paths, atoms, empirical, bary, spread)


def quantum_trajectory(channel, rho0, config: TrajectoryConfig, chain: int = 0) -> np.ndarray:
    """Densities ``rho_0, ..., rho_N`` of the unravelled channel for one chain.

    Atom ``i`` is drawn with probability ``w_i tr(K_i rho K_i^dagger)`` using
    the same generator and draw rule as :func:`kernel_step`.
    """
    channel = as_channel(channel)
    K = channel.family.operators
    w = channel.family.weights
    rng = chain_rng(config.seed, chain)
    rho = np.asarray(rho0, dtype=complex)
    out = np.empty((config.n_steps + 1,) + rho.shape, dtype=complex)
    out[0] = rho
    for n in range(config.n_steps):
        A = K @ rho @ dagger(K)
        p = w * np.real(np.trace(A, axis1=1, axis2=2))
        if p.sum() < 1e-12:
            raise ValueError("every atom annihilates the current density")
        i = _draw(p, rng.random())
        rho = A[i] / np.trace(A[i]).real
        rho = 0.5 * (rho + dagger(rho))
        out[n + 1] = rho
    return out


def word_probability(channel, rho, word: Sequence[int]) -> float:
    """``(prod_t w_{i_t}) tr(W rho W^dagger)`` with ``W = K_{i_n} ... K_{i_1}``."""
    channel = as_channel(channel)
    K = channel.family.operators
    w = channel.family.weights
    X = np.asarray(rho, dtype=complex)
    scale = 1.0
    for i in word:
        X = K[i] @ X @ dagger(K[i])
        scale *= w[i]
    return float(scale * np.trace(X).real)


def word_probabilities(channel, rho, n: int) -> np.ndarray:
    """All ``m^n`` word probabilities, indexed ``[i_1, ..., i_n]``."""
    channel = as_channel(channel)
    K = channel.family.operators
    w = channel.family.weights
    m = len(w)
    X = np.asarray(rho, dtype=complex)[None]
    weights = np.ones(1)
    for _ in range(n):
        X = np.einsum("mab,nbc,mdc->nmad", K, X, np.conj(K)).reshape(-1, *K.shape[1:])
        weights = np.outer(weights, w).ravel()
    return (weights * np.real(np.trace(X, axis1=1, axis2=2))).reshape((m,) * n)


def write_trajectory_csv(path, result: SimulationResult) -> None:
    """Rows ``step, chain, atom, re_1, im_1, ..., re_k, im_k``."""
    k = result.paths.shape[2]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["step", "chain", "atom"]
                    + [f"{p}_{j}" for j in range(1, k + 1) for p in ("re", "im")])
        for c, path_c in enumerate(result.paths):
            for n, x in enumerate(path_c):
                atom = "" if n == 0 else int(result.atoms[c, n - 1])
                coords = [repr(float(v)) for z in x for v in (z.real, z.imag)]
                wr.writerow([n, c, atom] + coords)
