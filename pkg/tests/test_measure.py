import numpy as np
import pytest

from helpers import random_column_stochastic
from kraus_thermo.channel import Channel, is_stochastic
from kraus_thermo.errors import DimensionError, NotStochasticError, TruncationError
from kraus_thermo.measure import (AtomGenerator, ConjugationByUnitary, Identity, KrausFamily,
                                  MatrixAtom, PriorMeasure, ScaledShift, Table, build_family,
                                  cyclic_shift, example1_family, example1_generator,
                                  four_projector_measure, from_gaussian_rotation, from_markov_chain,
                                  truncate_infinite_family)


def test_prior_measure_mass_and_atoms():
    mu = four_projector_measure()
    assert mu.mass == 2.0
    assert mu.dim == 2 and len(mu) == 4
    assert all(isinstance(a, MatrixAtom) for a in mu)


def test_prior_measure_is_immutable():
    mu = four_projector_measure()
    with pytest.raises(ValueError):
        mu.weights[0] = 3.0


def test_atom_weight_must_be_positive():
    with pytest.raises(ValueError):
        MatrixAtom(np.eye(2), 0.0)


def test_build_family_identity_and_mass(fix_mc):
    assert fix_mc.mass == 4.0
    assert len(fix_mc) == 4
    np.testing.assert_allclose(fix_mc.operators, fix_mc.points)


def test_build_family_prunes_zero_operators(caplog):
    points = np.array([np.eye(2), np.zeros((2, 2))])
    mu = PriorMeasure(points, [1.0, 1.0])
    fam = build_family(mu)
    assert len(fam) == 1
    # reported mass still counts the pruned atom
    assert fam.mass == 2.0


def test_conjugation_lmap(rng):
    theta = 0.3
    U = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    mu = four_projector_measure()
    fam = build_family(mu, ConjugationByUnitary(U))
    np.testing.assert_allclose(fam.operators[1], U @ mu.points[1] @ U.T, atol=1e-15)
    with pytest.raises(ValueError):
        ConjugationByUnitary(np.diag([1.0, 2.0]))


def test_table_lmap_shape_check():
    mu = four_projector_measure()
    with pytest.raises(DimensionError):
        build_family(mu, Table(np.zeros((3, 2, 2))))


def test_cyclic_shift_moves_basis_down():
    P = cyclic_shift(3)
    e = np.eye(3)
    np.testing.assert_allclose(P @ e[1], e[0])
    np.testing.assert_allclose(P @ e[0], e[2])


def test_scaled_shift_k2_matrices():
    L = ScaledShift(np.array([2.0, 3.0]), special_index=0)
    ops = L(np.zeros((2, 2, 2)))
    np.testing.assert_allclose(ops[0], 2.0 * np.diag([1, -1]))
    np.testing.assert_allclose(ops[1], 3.0 * np.array([[0, 1], [1, 0]]))


def test_markov_atoms_order(fix_mc):
    # V_1..V_4 = sqrt(p00) E11, sqrt(p01) E12, sqrt(p10) E21, sqrt(p11) E22
    expected = np.zeros((4, 2, 2))
    expected[0, 0, 0] = np.sqrt(0.5)
    expected[1, 0, 1] = np.sqrt(0.3)
    expected[2, 1, 0] = np.sqrt(0.5)
    expected[3, 1, 1] = np.sqrt(0.7)
    np.testing.assert_allclose(fix_mc.operators, expected)


def test_markov_chain_rejects_row_stochastic():
    with pytest.raises(NotStochasticError):
        from_markov_chain([[0.9, 0.1], [0.9, 0.1]])


@pytest.mark.parametrize("d", [2, 3, 4])
def test_markov_families_are_stochastic(d):
    rng = np.random.default_rng(d)
    for _ in range(25):
        fam = from_markov_chain(random_column_stochastic(rng, d))[1]
        assert is_stochastic(Channel(fam))


def test_gaussian_mass_and_stochasticity(fix_gauss):
    assert np.isclose(fix_gauss.mass, 0.5, atol=1e-12)
    np.testing.assert_allclose(fix_gauss.dual_identity(), np.eye(2), atol=1e-6)
    # HS mass is 2 because each rotation-scaling matrix has ||v||^2 = 2 r^2
    assert np.isclose(fix_gauss.square_integrability, 2.0, atol=1e-6)


def test_gaussian_quadrature_order():
    errs = []
    for n_r, n_t in [(10, 8), (20, 16)]:
        fam = from_gaussian_rotation(n_r, n_t)[1]
        errs.append(np.linalg.norm(fam.dual_identity() - np.eye(2)))
    assert errs[1] <= errs[0] / 4


def test_gaussian_image_formula(fix_gauss):
    rho = np.array([[0.3, 0.2 + 0.1j], [0.4 - 0.3j, 0.7]])
    a, b, c, d = rho.ravel()
    expected = np.array([[0.5, (b - c) / 2], [(c - b) / 2, 0.5]])
    np.testing.assert_allclose(Channel(fix_gauss).apply(rho), expected, atol=1e-6)


def test_gaussian_needs_enough_nodes():
    with pytest.raises(ValueError):
        from_gaussian_rotation(4, 32)


def test_truncation_is_exactly_stochastic(fix_shift):
    np.testing.assert_allclose(fix_shift.dual_identity(), np.eye(2), atol=1e-12)


def test_truncation_count_matches_tail_bound():
    mu = truncate_infinite_family(example1_generator(), 1e-3)
    # tail bound 1/N <= 1e-3 first holds at N = 1000
    assert len(mu) == 1000


def test_truncation_single_atom_generator_is_identity():
    gen = AtomGenerator(lambda n: (1.0, np.eye(2) if n == 1 else np.zeros((2, 2))),
                        lambda N: 0.0, "single")
    mu = truncate_infinite_family(gen, 1e-8)
    np.testing.assert_allclose(mu.points[0], np.eye(2))


def test_truncation_cap():
    with pytest.raises(TruncationError):
        example1_family(mass_tol=1e-8)


def test_example1_image_is_e11(fix_shift, rng):
    from helpers import random_density
    ch = Channel(fix_shift)
    for _ in range(5):
        rho = random_density(rng, 2)
        np.testing.assert_allclose(ch.apply(rho), np.diag([1.0, 0.0]), atol=1e-12)


def test_family_helpers(fix_mc):
    assert fix_mc.scaled(2.0).shares_atoms_with(fix_mc)
    np.testing.assert_allclose(fix_mc.scaled(2.0).operators, 2 * fix_mc.operators)
    fam = KrausFamily.from_operators(np.eye(2))
    assert len(fam) == 1 and fam.mass == 1.0
