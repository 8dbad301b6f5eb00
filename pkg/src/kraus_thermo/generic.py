"""
Invariant subspaces of a Kraus family and perturbations that remove them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import dagger, operator_norm
from .measure import KrausFamily

logger = logging.getLogger(__name__)

RANK_TOL = 1e-9


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal columns spanning a subspace ``E`` together with its invariance residual."""

    basis: np.ndarray
    residual: float

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ dagger(self.basis)

    def contains(self, other: "SubspaceBasis", tol: float = RANK_TOL) -> bool:
        return bool(np.linalg.norm(other.basis - self.projector @ other.basis) <= tol * 10)

    def __eq__(self, other):
        return (isinstance(other, SubspaceBasis) and self.dim == other.dim
                and self.contains(other))

    def __hash__(self):
        return hash(self.dim)


def invariance_residual(operators: np.ndarray, basis: np.ndarray) -> float:
    """``max_i ||(Id - P_E) K_i P_E||`` in operator norm."""
    P = basis @ dagger(basis)
    Q = np.eye(P.shape[0]) - P
    return float(np.max(np.linalg.norm(Q @ np.asarray(operators) @ P, 2, axis=(1, 2))))


def _orth(M: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of the column span, cutting singular values at ``tol * s_max``."""
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    return U[:, s > tol * s[0]]


def _orbit_span(operators, seed_vec, tol):
    """Smallest subspace containing ``seed_vec`` and closed under every operator.

    Each round applies all operators to the current basis at once and
    re-orthonormalises; the rank grows until it stabilises (at most ``k`` rounds).
    """
    k = seed_vec.shape[0]
    basis = _orth(seed_vec[:, None], tol)
    while 0 < basis.shape[1] < k:
        images = np.moveaxis(operators @ basis, 0, 1).reshape(k, -1)
        # the images can be tiny relative to the basis; normalise their scale
        nrm = np.linalg.norm(images)
        if nrm == 0:
            break
        grown = _orth(np.concatenate([basis, images / nrm], axis=1), tol)
        if grown.shape[1] == basis.shape[1]:
            break
        basis = grown
    return basis


def _operator_span(operators: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (at most ``k^2`` matrices) of ``span{K_i}``.

    A subspace is invariant under every ``K_i`` exactly when it is invariant
    under this span, so orbit closures only need these few matrices.
    """
    m, k, _ = operators.shape
    _, s, Vh = np.linalg.svd(operators.reshape(m, -1), full_matrices=False)
    return Vh[s > tol * s[0]].reshape(-1, k, k)


def _distinct_lines(vectors: np.ndarray, tol: float = 1e-10) -> list[np.ndarray]:
    """Unit vectors with duplicates (up to phase) removed."""
    n, k = vectors.shape
    kept = np.empty((n, k), dtype=complex)
    count = 0
    for v in vectors:
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        v = v / nv
        if count and np.max(np.abs(kept[:count].conj() @ v)) > 1 - tol:
            continue
        kept[count] = v
        count += 1
    return list(kept[:count])


def invariant_subspace_search(family: KrausFamily, tol: float = RANK_TOL, n_draws: int = 20,
                              seed: int = 0) -> list[SubspaceBasis]:
    """Minimal nontrivial common invariant subspaces of the operators, found heuristically.

    Seeds are eigenvectors of every operator and of random real combinations
    ``sum c_i K_i``; each seed is closed under the family and only proper
    subspaces whose invariance residual is at most ``tol * max ||K_i||`` are
    kept, minimal under inclusion.  An empty list is evidence (not proof) of
    irreducibility.
    """
    K = np.asarray(family.operators)
    k = K.shape[1]
    scale = float(np.max(np.linalg.norm(K, 2, axis=(1, 2))))
    ops = K / scale
    span = _operator_span(ops, tol)
    rng = np.random.default_rng(seed)
    combos = np.tensordot(rng.standard_normal((n_draws, len(ops))), ops, axes=1)
    _, vecs = np.linalg.eig(np.concatenate([ops, combos]))
    seeds = _distinct_lines(np.swapaxes(vecs, 1, 2).reshape(-1, k))
    found: list[SubspaceBasis] = []
    for v in seeds:
        B = _orbit_span(span, v, tol)
        if B.shape[1] in (0, k):
            continue
        if any(B.shape[1] == f.dim and f.contains(SubspaceBasis(B, 0.0)) for f in found):
            continue
        res = invariance_residual(ops, B)
        if res > tol:
            continue
        found.append(SubspaceBasis(B, res * scale))
    found.sort(key=lambda s: s.dim)
    minimal = []
    for s in found:
        if not any(m.dim < s.dim and s.contains(m) for m in minimal):
            minimal.append(s)
    return minimal


@dataclass(frozen=True)
class Classification:
    kind: str  # "irreducible" | "phi_erg" | "not_phi_erg" | "undetermined"
    subspaces: tuple = ()

    def __str__(self):
        if self.kind in ("phi_erg", "not_phi_erg"):
            return f"{self.kind}(" + ", ".join(f"dim {s.dim}" for s in self.subspaces) + ")"
        return self.kind


def phi_erg_classify(family: KrausFamily) -> Classification:
    """``irreducible``, ``phi_erg(E)`` (unique minimal invariant subspace),
    ``not_phi_erg(E1, E2, ...)`` or ``undetermined``."""
    from .channel import Channel, irreducibility_report

    subs = invariant_subspace_search(family)
    if not subs:
        report = irreducibility_report(Channel(family))
        if report.verdict == "irreducible":
            return Classification("irreducible")
        return Classification("undetermined")
    if len(subs) == 1:
        return Classification("phi_erg", (subs[0],))
    return Classification("not_phi_erg", tuple(subs))


def _schur_greedy_shifts(diag: np.ndarray, delta: float, sep: float) -> np.ndarray:
    """Shifts ``delta / 2^i`` (``i >= 2``) that make the diagonal nonzero and pairwise distinct."""
    k = diag.shape[0]
    new = diag.astype(complex).copy()
    shifts = np.zeros(k)
    for j in range(k):
        def ok(z):
            return abs(z) > sep and all(abs(z - new[i]) > sep for i in range(j))
        if ok(new[j]):
            continue
        i = 2 if j == 0 else 3
        while not ok(diag[j] + delta / 2.0**i):
            i += 1
            if i > 200:
                raise RuntimeError("could not separate the spectrum")
        shifts[j] = delta / 2.0**i
        new[j] = diag[j] + shifts[j]
    return shifts


def distinct_spectrum_perturbation(family: KrausFamily, atom_index: int = 0,
                                   epsilon: float = 0.1) -> KrausFamily:
    """Replace ``K`` at one atom by ``K'`` with ``k`` distinct nonzero eigenvalues, ``||K'-K|| < eps/2``.

    The shift is diagonal in a complex Schur basis ``K = Z T Z^dagger``; since
    ``Z`` is unitary the operator-norm change equals the largest diagonal shift.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    K = np.array(family.operators)
    A = K[atom_index]
    T, Z = scipy.linalg.schur(A, output="complex")
    scale = max(operator_norm(A), 1.0)
    sep = 1e-8 * scale
    shifts = _schur_greedy_shifts(np.diag(T), epsilon, sep)
    if np.any(shifts):
        K[atom_index] = Z @ (T + np.diag(shifts)) @ dagger(Z)
    return family.with_operators(K, note=f"distinct spectrum at atom {atom_index}")


def _atom_weight_function(points: np.ndarray, ref: int) -> np.ndarray:
    """``||v - v_1|| / (||v|| + ||v_1||)``, zero only at the reference atom."""
    v1 = points[ref]
    n1 = np.linalg.norm(v1)
    num = np.linalg.norm((points - v1).reshape(len(points), -1), axis=1)
    den = np.linalg.norm(points.reshape(len(points), -1), axis=1) + n1
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def irreducible_perturbation(family: KrausFamily, epsilon: float = 0.1, atom_index: int = 0,
                             max_halvings: int = 40) -> KrausFamily:
    """A family within ``epsilon`` (operator norm, per atom) whose channel is irreducible.

    First the reference atom gets a distinct spectrum, then the cyclic shift
    ``A x_j = x_{j+1}`` on its eigenbasis is added with atom-dependent weight
    ``delta phi(v) / (2 ||A||)``; ``delta`` is halved from ``epsilon/2`` until
    the result classifies as irreducible.

    Raises
    ------
    RuntimeError
        If no admissible ``delta`` is found within ``max_halvings``.
    """
    if len(family) < 2:
        raise ValueError("need at least two atoms")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if phi_erg_classify(family).kind == "irreducible":
        return family
    eps_fam = distinct_spectrum_perturbation(family, atom_index, epsilon)
    K = np.array(eps_fam.operators)
    k = K.shape[1]
    _, X = np.linalg.eig(K[atom_index])
    X = X / np.linalg.norm(X, axis=0)
    shift = np.roll(np.eye(k), 1, axis=0)  # e_j -> e_{j+1}
    A = X @ shift @ np.linalg.inv(X)
    A = A / operator_norm(A)
    phi = _atom_weight_function(np.asarray(family.points), atom_index)
    if not np.any(phi > 0):
        raise ValueError("all atoms coincide with the reference atom")
    delta = epsilon / 2.0
    for _ in range(max_halvings):
        out = eps_fam.with_operators(K + (0.5 * delta * phi)[:, None, None] * A,
                                     note=f"irreducible perturbation eps={epsilon:g}")
        if phi_erg_classify(out).kind == "irreducible":
            return out
        delta /= 2.0
    raise RuntimeError(f"no irreducible perturbation found after {max_halvings} halvings")


def perturbation_distance(a: KrausFamily, b: KrausFamily) -> float:
    """Largest operator-norm difference over atoms."""
    return max(operator_norm(x - y) for x, y in zip(a.operators, b.operators))
