"""
A-priori measures on matrix space and the Kraus families they induce.

A measure ``mu`` is always a finite list of weighted matrix atoms
``sum_i w_i delta_{v_i}``; continuous measures enter through quadrature.
Applying a map ``L`` atom by atom gives the pairs ``(w_i, K_i = L(v_i))``
from which every channel quantity in the package is a finite sum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, Union

import numpy as np

from .errors import DimensionError, NotStochasticError, TruncationError
from .linalg import dagger, hermitian_inv_sqrt

logger = logging.getLogger(__name__)

#: atoms with w * ||K||^2 below this are dropped when building a family
PRUNE_TOL = 1e-15


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MatrixAtom:
    point: np.ndarray
    weight: float

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError(f"atom weight must be positive, got {self.weight}")


class PriorMeasure:
    """Finitely many weighted matrix atoms.

    ``source`` optionally records the generator that produced the atoms
    (used when serialising the measure back to a spec file).
    """

    def __init__(self, points, weights, source: dict | None = None):
        P = np.asarray(points, dtype=complex)
        if P.ndim == 2:
            P = P[None]
        if P.ndim != 3 or P.shape[1] != P.shape[2] or P.shape[0] < 1:
            raise DimensionError(f"points must have shape (m, k, k), got {P.shape}")
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape[0] != P.shape[0]:
            raise DimensionError("one weight per atom is required")
        if np.any(~(w > 0)):
            raise ValueError("atom weights must be positive")
        self.points = _frozen(P)
        self.weights = _frozen(w)
        self.source = source

    @classmethod
    def from_atoms(cls, atoms, source=None) -> "PriorMeasure":
        atoms = list(atoms)
        return cls([a.point for a in atoms], [a.weight for a in atoms], source)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return self.points.shape[0]

    def __iter__(self) -> Iterator[MatrixAtom]:
        for p, w in zip(self.points, self.weights):
            yield MatrixAtom(p, float(w))

    def __repr__(self):
        return f"PriorMeasure(dim={self.dim}, atoms={len(self)}, mass={self.mass:.6g})"


# ---------------------------------------------------------------------------
# Maps L
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Identity:
    """``L(v) = v``."""

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.array(points, dtype=complex)


@dataclass(frozen=True)
class ConjugationByUnitary:
    """``L(v) = U v U^dagger`` (a C*-automorphism of the matrix algebra)."""

    U: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.U, dtype=complex)
        k = U.shape[0]
        if U.shape != (k, k) or np.linalg.norm(U @ dagger(U) - np.eye(k)) > 1e-10:
            raise ValueError("U is not unitary to 1e-10")
        object.__setattr__(self, "U", _frozen(U))

    def __call__(self, points):
        return self.U @ np.asarray(points, dtype=complex) @ dagger(self.U)


@dataclass(frozen=True)
class Table:
    """Explicit operator per atom; the atom locations are ignored."""

    operators: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "operators", _frozen(np.asarray(self.operators, dtype=complex)))

    def __call__(self, points):
        if self.operators.shape != np.shape(points):
            raise DimensionError("table must hold one operator per atom")
        return np.array(self.operators)


@dataclass(frozen=True)
class ScaledShift:
    """``L(v_i) = s_i Q`` on the special atom and ``s_i P`` elsewhere.

    ``P`` is the cyclic shift ``P|i+1> = |i>`` and ``Q = diag(1, ..., 1, -1)``.
    """

    scales: np.ndarray
    special_index: int

    def __post_init__(self):
        object.__setattr__(self, "scales", _frozen(np.asarray(self.scales, dtype=float)))

    def __call__(self, points):
        m, k, _ = np.shape(points)
        if self.scales.shape != (m,):
            raise DimensionError("one scale per atom is required")
        P = cyclic_shift(k)
        Q = np.eye(k, dtype=complex)
        Q[-1, -1] = -1.0
        ops = self.scales[:, None, None] * P[None]
        ops[self.special_index] = self.scales[self.special_index] * Q
        return ops


LMapSpec = Union[Identity, ConjugationByUnitary, Table, ScaledShift]


def cyclic_shift(k: int) -> np.ndarray:
    """``P = sum_i |i><i+1|`` with indices mod ``k``."""
    return np.roll(np.eye(k, dtype=complex), 1, axis=1)


# ---------------------------------------------------------------------------
# Kraus families
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KrausFamily:
    """Weighted operators ``(w_i, K_i)`` realising ``rho -> sum_i w_i K_i rho K_i^dagger``.

    ``points`` keeps the atom location ``v_i`` behind each operator; several
    constructions (perturbations, pressure comparisons) need it.
    """

    weights: np.ndarray
    operators: np.ndarray
    points: np.ndarray
    mass: float
    measure: PriorMeasure | None = None
    lmap: object = None
    note: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        K = np.asarray(self.operators, dtype=complex)
        if K.ndim != 3 or K.shape[1] != K.shape[2]:
            raise DimensionError(f"operators must have shape (m, k, k), got {K.shape}")
        if K.shape[0] == 0:
            raise ValueError("a Kraus family needs at least one operator")
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        P = np.asarray(self.points, dtype=complex)
        if w.shape[0] != K.shape[0] or P.shape != K.shape:
            raise DimensionError("weights, operators and points must align")
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "operators", _frozen(K))
        object.__setattr__(self, "points", _frozen(P))

    @classmethod
    def from_operators(cls, operators, weights=None, points=None, note="") -> "KrausFamily":
        """Family with ``L = Identity`` on the atoms ``v_i = K_i`` unless points are given."""
        K = np.asarray(operators, dtype=complex)
        if K.ndim == 2:
            K = K[None]
        w = np.ones(K.shape[0]) if weights is None else np.asarray(weights, dtype=float)
        P = K if points is None else np.asarray(points, dtype=complex)
        return cls(w, K, P, float(np.sum(w)), note=note)

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    def __len__(self) -> int:
        return self.operators.shape[0]

    @property
    def square_integrability(self) -> float:
        """``sum_i w_i ||K_i||_HS^2``."""
        return float(np.sum(self.weights * np.sum(np.abs(self.operators) ** 2, axis=(1, 2))))

    def dual_identity(self) -> np.ndarray:
        """``sum_i w_i K_i^dagger K_i``."""
        return np.einsum("m,mba,mbc->ac", self.weights, np.conj(self.operators), self.operators)

    def with_operators(self, operators, note: str = "") -> "KrausFamily":
        return KrausFamily(self.weights, operators, self.points, self.mass,
                           self.measure, Table(operators), note or self.note)

    def scaled(self, c: complex) -> "KrausFamily":
        return self.with_operators(c * self.operators, note=f"scaled by {c}")

    def shares_atoms_with(self, other: "KrausFamily", tol: float = 1e-12) -> bool:
        return (len(self) == len(other)
                and np.allclose(self.weights, other.weights, rtol=0, atol=tol)
                and np.allclose(self.points, other.points, rtol=0, atol=tol))

    def __repr__(self):
        return (f"KrausFamily(dim={self.dim}, atoms={len(self)}, mass={self.mass:.6g}"
                + (f", note={self.note!r}" if self.note else "") + ")")


def build_family(mu: PriorMeasure, L: LMapSpec = Identity(), prune: bool = True) -> KrausFamily:
    """Pairs ``(w_i, L(v_i))``; zero operators are pruned with a warning.

    The reported ``mass`` is the input measure's mass, pruned atoms included.
    """
    K = np.asarray(L(mu.points), dtype=complex)
    if K.shape != mu.points.shape:
        raise DimensionError(f"L maps {mu.points.shape} to {K.shape}")
    w = np.array(mu.weights)
    P = np.array(mu.points)
    if prune:
        contribution = w * np.sum(np.abs(K) ** 2, axis=(1, 2))
        keep = contribution >= PRUNE_TOL
        if not np.all(keep):
            dropped = np.flatnonzero(~keep)
            logger.warning("pruned %d zero Kraus operator(s), first at atom %d",
                           dropped.size, int(dropped[0]))
            if not np.any(keep):
                raise ValueError("every Kraus operator vanishes")
            w, K, P = w[keep], K[keep], P[keep]
    return KrausFamily(w, K, P, mu.mass, mu, L)


# ---------------------------------------------------------------------------
# Named constructions
# ---------------------------------------------------------------------------


def from_markov_chain(P, tol: float = 1e-12) -> tuple[PriorMeasure, KrausFamily]:
    """Atoms ``sqrt(p_ij) |i><j|`` of mass one each, for a column-stochastic ``P``.

    At ``d = 2`` the atoms come out in the order ``V_1..V_4`` =
    ``(0,0), (0,1), (1,0), (1,1)``.
    """
    P = np.asarray(P, dtype=float)
    d = P.shape[0]
    if P.shape != (d, d):
        raise DimensionError("P must be square")
    if np.any(P < 0) or np.max(np.abs(P.sum(axis=0) - 1.0)) > tol:
        raise NotStochasticError("P must be nonnegative with columns summing to one")
    points = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            points[i * d + j, i, j] = np.sqrt(P[i, j])
    mu = PriorMeasure(points, np.ones(d * d), source={"markov_chain": {"P": P.tolist()}})
    return mu, build_family(mu, Identity())


def four_projector_measure() -> PriorMeasure:
    """The four matrix units of ``M_2`` with mass 1/2 each."""
    points = np.zeros((4, 2, 2), dtype=complex)
    points[0, 0, 0] = points[1, 0, 1] = points[2, 1, 0] = points[3, 1, 1] = 1.0
    return PriorMeasure(points, np.full(4, 0.5), source={"four_projector": {}})


def rotation_matrix(x, y) -> np.ndarray:
    """``[[x, -y], [y, x]]`` for arrays of ``x, y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.empty(x.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = x
    out[..., 0, 1] = -y
    out[..., 1, 0] = y
    out[..., 1, 1] = x
    return out


def from_gaussian_rotation(n_r: int = 40, n_theta: int = 32,
                           radius: float = 12.0) -> tuple[PriorMeasure, KrausFamily]:
    """Quadrature of the density ``exp(-(x^2+y^2)/2) / (4 pi)`` on rotation-scaling matrices.

    Radius: Gauss-Legendre on ``[0, radius]``; angle: uniform trapezoid on
    ``[0, 2 pi)``.  The total mass is 1/2 and ``sum w v^dagger v -> Id``.
    """
    if n_r < 8 or n_theta < 8:
        raise ValueError("need at least 8 radial and 8 angular nodes")
    t, wt = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * radius * (t + 1.0)
    wr = 0.5 * radius * wt
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    wth = 2.0 * np.pi / n_theta
    R, TH = np.meshgrid(r, theta, indexing="ij")
    W = (wr[:, None] * wth) * R * np.exp(-0.5 * R**2) / (4.0 * np.pi)
    points = rotation_matrix(R * np.cos(TH), R * np.sin(TH)).reshape(-1, 2, 2)
    weights = W.reshape(-1)
    keep = weights > 0
    mu = PriorMeasure(points[keep], weights[keep],
                      source={"gaussian_rotation": {"n_r": n_r, "n_theta": n_theta}})
    return mu, build_family(mu, Identity())


# ---------------------------------------------------------------------------
# Infinite families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AtomGenerator:
    """An indexed atom rule ``n -> (w_n, V_n)`` for ``n = 1, 2, ...``.

    ``tail_bound(N)`` must bound ``sum_{n > N} w_n ||V_n||^2`` from above.
    """

    atom: Callable[[int], tuple[float, np.ndarray]]
    tail_bound: Callable[[int], float]
    name: str = ""


def example1_generator() -> AtomGenerator:
    """``V_2n = E_11 / (2n)`` and ``V_2n-1 = E_12 / (2n-1)``, unit mass each.

    The normalising constants are applied by the truncation step, so here the
    raw ``1/n`` scaling is generated.  The tail bound uses
    ``sum_{n > N} 1/n^2 < 1/N``.
    """

    def atom(n):
        V = np.zeros((2, 2), dtype=complex)
        if n % 2 == 0:
            V[0, 0] = 1.0 / n
        else:
            V[0, 1] = 1.0 / n
        return 1.0, V

    return AtomGenerator(atom, lambda N: 1.0 / N, "example1")


def truncate_infinite_family(generator: AtomGenerator, mass_tol: float,
                             max_atoms: int = 100_000,
                             normalize: bool = True) -> PriorMeasure:
    """Finite truncation of a countable measure.

    Keeps the first ``N`` atoms with ``tail_bound(N) <= mass_tol``.  When
    ``normalize`` is set the kept atoms are right-multiplied by
    ``S^{-1/2}``, ``S = sum w V^dagger V``, which makes the truncated family
    exactly stochastic (for the diagonal ``S`` of the shift example this is a
    recomputation of the two column normalisers over the kept indices).
    """
    N = 1
    while generator.tail_bound(N) > mass_tol:
        N *= 2
        if N >= max_atoms:
            N = max_atoms
            if generator.tail_bound(N) > mass_tol:
                raise TruncationError(
                    f"tail bound {generator.tail_bound(N):.3e} still exceeds "
                    f"mass_tol={mass_tol:g} at the cap of {max_atoms} atoms")
            break
    # bisect down to the smallest admissible N
    lo, hi = max(N // 2, 1), N
    if generator.tail_bound(lo) <= mass_tol:
        hi = lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if generator.tail_bound(mid) <= mass_tol:
            hi = mid
        else:
            lo = mid
    N = hi
    atoms = [generator.atom(n) for n in range(1, N + 1)]
    w = np.array([a[0] for a in atoms], dtype=float)
    V = np.array([a[1] for a in atoms], dtype=complex)
    if normalize:
        S = np.einsum("m,mba,mbc->ac", w, np.conj(V), V)
        V = V @ hermitian_inv_sqrt(S)
    source = {"truncated": {"generator": generator.name, "mass_tol": mass_tol, "atoms": N}}
    return PriorMeasure(V, w, source=source)


def example1_family(mass_tol: float = 1e-4, max_atoms: int = 100_000) -> tuple[PriorMeasure, KrausFamily]:
    mu = truncate_infinite_family(example1_generator(), mass_tol, max_atoms)
    mu = PriorMeasure(mu.points, mu.weights, source={"example1_truncated": {"mass_tol": mass_tol}})
    return mu, build_family(mu, Identity())
