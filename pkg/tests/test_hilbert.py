import math
import warnings

import numpy as np
import pytest

from degenjc.angular import build_coefficient_table
from degenjc.errors import CutoffTooSmallError, InvalidInputError
from degenjc.hilbert import (LevelSpec, ProductBasis, annihilation, atomic_initial_state,
                             atomic_operators, coherent_vector, dispersive_hamiltonian,
                             effective_hamiltonian, first_order_hamiltonian, initial_state,
                             number_operator, small_rotation_residual)

LEVELS = LevelSpec(3, 3)
COEFFS = build_coefficient_table(3, 3)


def _hermitian_residual(h):
    return np.abs(h - h.conj().T).max() / max(1.0, np.abs(h).max())


# -- basis -----------------------------------------------------------------

def test_basis_ordering_is_bijective():
    basis = ProductBasis(LEVELS, 5)
    seen = set()
    for level, two_m in LEVELS.atom_labels():
        for n in range(5):
            flat = basis.index(level, two_m, n)
            label = basis.label(flat)
            assert (label.level, label.two_m, label.n) == (level, two_m, n)
            seen.add(flat)
    assert seen == set(range(basis.dim))


def test_basis_order_b_then_c_then_photons():
    basis = ProductBasis(LEVELS, 4)
    assert basis.index("b", -3, 0) == 0
    assert basis.index("b", -3, 1) == 1
    assert basis.index("b", -1, 0) == 4
    assert basis.index("c", -3, 0) == 16


def test_basis_rejects_bad_labels():
    basis = ProductBasis(LEVELS, 4)
    with pytest.raises(InvalidInputError):
        basis.index("b", 1, 4)
    with pytest.raises(InvalidInputError):
        basis.index("x", 1, 0)
    with pytest.raises(InvalidInputError):
        basis.index("c", 5, 0)


def test_level_dimensions():
    spec = LevelSpec(5, 3)
    assert (spec.dim_b, spec.dim_c, spec.dim) == (6, 4, 10)
    assert spec.common == [-3, -1, 1, 3]


# -- field operators -------------------------------------------------------

def test_annihilation_cutoff_two():
    np.testing.assert_array_equal(annihilation(2), [[0, 1], [0, 0]])


def test_annihilation_rejects_tiny_cutoff():
    with pytest.raises(InvalidInputError):
        annihilation(1)


def test_number_and_commutator_below_edge():
    a = annihilation(12)
    np.testing.assert_allclose(a.T @ a, number_operator(12), atol=1e-14)
    comm = a @ a.T - a.T @ a
    np.testing.assert_allclose(comm[:11, :11], np.eye(11), atol=1e-13)


# -- atomic operators ------------------------------------------------------

def test_sz_diagonal_values():
    ops = atomic_operators(LEVELS, COEFFS)
    np.testing.assert_allclose(np.diag(ops.s_z)[:4], [3 / 40, 1 / 120, 1 / 120, 3 / 40],
                               atol=1e-16)
    np.testing.assert_allclose(np.diag(ops.s_z)[4:], [-3 / 40, -1 / 120, -1 / 120, -3 / 40],
                               atol=1e-16)


def test_s_plus_is_adjoint_and_sz_commutators():
    ops = atomic_operators(LEVELS, COEFFS)
    np.testing.assert_array_equal(ops.s_plus, ops.s_minus.conj().T)
    comm = ops.s_plus @ ops.s_minus - ops.s_minus @ ops.s_plus
    np.testing.assert_allclose(comm, 2 * ops.s_z, atol=1e-16)
    cubed = np.zeros_like(ops.s_z)
    for two_m, alpha in COEFFS.entries.items():
        cubed[LEVELS.atom_index("b", two_m), LEVELS.atom_index("c", two_m)] = alpha**3
    np.testing.assert_allclose(ops.s_z @ ops.s_plus - ops.s_plus @ ops.s_z, cubed, atol=1e-16)
    # The naive relation [S_+, S_z] = -S_+ does not hold for sublevel-dependent alpha_m.
    assert np.abs(ops.s_plus @ ops.s_z - ops.s_z @ ops.s_plus + ops.s_plus).max() > 0.1


def test_populations_complete():
    ops = atomic_operators(LEVELS, COEFFS)
    np.testing.assert_array_equal(ops.n_b + ops.n_c, np.eye(8))
    np.testing.assert_allclose(ops.r_b - ops.r_c, 2 * ops.s_z, atol=1e-16)


def test_mismatched_coefficients():
    with pytest.raises(InvalidInputError):
        atomic_operators(LevelSpec(1, 1), COEFFS)


# -- Hamiltonians ----------------------------------------------------------

def test_dispersive_zero_coupling_is_diagonal():
    h = dispersive_hamiltonian(LEVELS, COEFFS, 0.0, 2.0, 6)
    expected = np.repeat([1.0] * 4 + [-1.0] * 4, 6)
    np.testing.assert_array_equal(h, np.diag(expected))


def test_dispersive_matrix_element():
    g, cutoff = 0.01, 8
    h = dispersive_hamiltonian(LEVELS, COEFFS, g, 1.0, cutoff)
    basis = ProductBasis(LEVELS, cutoff)
    for two_m, alpha in COEFFS.entries.items():
        for n in range(cutoff - 1):
            el = h[basis.index("b", two_m, n), basis.index("c", two_m, n + 1)]
            assert el == pytest.approx(g * alpha * math.sqrt(n + 1), abs=1e-16)
    assert _hermitian_residual(h) < 1e-12


def test_dispersive_warns_outside_regime_and_rejects_zero_detuning():
    with pytest.warns(UserWarning):
        dispersive_hamiltonian(LEVELS, COEFFS, 0.5, 1.0, 4)
    with pytest.raises(InvalidInputError):
        dispersive_hamiltonian(LEVELS, COEFFS, 0.01, 0.0, 4)


def test_effective_hamiltonian_values():
    omega, cutoff = 1.7, 10
    h = effective_hamiltonian(LEVELS, COEFFS, omega, cutoff)
    basis = ProductBasis(LEVELS, cutoff)
    assert h[basis.index("b", 3, 0), basis.index("b", 3, 0)] == pytest.approx(omega * 3 / 40)
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    diag = np.diag(h).real.reshape(8, cutoff)
    np.testing.assert_allclose(diag.sum(axis=0), 0, atol=1e-15)
    for level, two_m in LEVELS.atom_labels():
        sign = 1 if level == "b" else -1
        a2 = COEFFS.entries[two_m] ** 2
        for n in range(cutoff):
            idx = basis.index(level, two_m, n)
            assert h[idx, idx].real == pytest.approx(sign * omega * (2 * n + 1) * a2 / 2)


def test_effective_commutes_with_number_and_inversion():
    cutoff = 6
    h = effective_hamiltonian(LEVELS, COEFFS, 1.0, cutoff)
    basis = ProductBasis(LEVELS, cutoff)
    ops = atomic_operators(LEVELS, COEFFS)
    n_full = basis.embed_field(number_operator(cutoff))
    inversion = basis.embed_atom(ops.n_b - ops.n_c)
    for op in (n_full, inversion):
        assert np.abs(h @ op - op @ h).max() == 0


def test_first_order_is_hermitian():
    h = first_order_hamiltonian(LEVELS, COEFFS, 0.05, 1.0, 10)
    assert _hermitian_residual(h) < 1e-12


# -- small-rotation residual -----------------------------------------------

def test_residual_zero_coupling():
    assert small_rotation_residual(LEVELS, COEFFS, 0.0, 1.0, 12) == pytest.approx(0, abs=1e-14)


def test_residual_rejects_large_angle():
    with pytest.raises(InvalidInputError):
        small_rotation_residual(LEVELS, COEFFS, 0.4, 1.0, 12)


def test_residual_half_shift_leaves_third_order():
    # With the constant shift at 1/2 the remainder is third order in g/delta
    # at fixed delta, so halving g cuts it by about 8.
    r1 = small_rotation_residual(LEVELS, COEFFS, 0.05, 1.0, 40, shift_coefficient=0.5)
    r2 = small_rotation_residual(LEVELS, COEFFS, 0.025, 1.0, 40, shift_coefficient=0.5)
    assert r1 / r2 == pytest.approx(8.0, rel=0.05)


def test_residual_grows_without_edge_exclusion():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        inner = [small_rotation_residual(LEVELS, COEFFS, 0.05, 1.0, c) for c in (20, 40)]
        edge = [small_rotation_residual(LEVELS, COEFFS, 0.05, 1.0, c, exclude_edge=False)
                for c in (20, 40)]
    assert edge[1] > edge[0]
    assert edge[0] > inner[0]
    assert inner[1] == pytest.approx(
        small_rotation_residual(LEVELS, COEFFS, 0.05, 1.0, 40), rel=1e-12)


# -- states ----------------------------------------------------------------

def test_coherent_vector_amplitudes():
    alpha = 0.8 - 0.3j
    vec = coherent_vector(alpha, 30)
    n = np.arange(30)
    fact = np.array([float(math.factorial(k)) for k in n])
    expected = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.sqrt(fact)
    np.testing.assert_allclose(vec, expected, atol=1e-15)
    assert abs(np.vdot(vec, vec) - 1) < 1e-10


def test_coherent_vector_vacuum_and_large_n():
    np.testing.assert_array_equal(coherent_vector(0, 5), [1, 0, 0, 0, 0])
    vec = coherent_vector(10.0, 200)
    assert np.all(np.isfinite(vec))


def test_coherent_vector_cutoff_too_small():
    with pytest.raises(CutoffTooSmallError) as info:
        coherent_vector(2.0, 5)
    assert info.value.deficit > 0.3


def test_initial_atomic_elements():
    rho = initial_state(LEVELS, 1.0, 20)
    atom = np.einsum("ipjp->ij", rho.reshape(8, 20, 8, 20))
    np.testing.assert_allclose(atom[:4, :4], np.full((4, 4), 1 / 8), atol=1e-10)
    np.testing.assert_allclose(atom[4:, 4:], np.full((4, 4), 1 / 8), atol=1e-10)
    np.testing.assert_allclose(atom[:4, 4:], np.full((4, 4), 1 / (2 * 4)), atol=1e-10)


def test_initial_unequal_cross_block():
    levels = LevelSpec(3, 1)
    psi = atomic_initial_state(levels)
    cross = np.outer(psi, psi)[0, 4]
    assert cross == pytest.approx(1 / (2 * math.sqrt(4 * 2)))


def test_initial_state_is_pure():
    rho = initial_state(LEVELS, 0.7 + 0.2j, 20)
    assert np.trace(rho).real == pytest.approx(1, abs=1e-10)
    assert np.trace(rho @ rho).real == pytest.approx(1, abs=1e-10)
