import itertools

import numpy as np
import pytest

from matdirac.gamma import (
    METRIC,
    anticommutator,
    build_dirac_gammas,
    decompose_in_basis,
    reconstruct_from_basis,
    slash,
)

# Pauli matrices typed out by hand, independent of the library
S0 = np.eye(2)
S1 = np.array([[0, 1], [1, 0]])
S2 = np.array([[0, -1j], [1j, 0]])
S3 = np.array([[1, 0], [0, -1]])
Z = np.zeros((2, 2))


def _oracle_gammas():
    g0 = np.block([[S0, Z], [Z, -S0]])
    gk = [np.block([[Z, -s], [s, Z]]) for s in (S1, S2, S3)]
    return [g0] + gk


def test_gammas_match_dirac_representation():
    gs = build_dirac_gammas()
    for mu, ref in enumerate(_oracle_gammas()):
        assert np.array_equal(gs.gamma[mu], ref)


def test_gamma5_is_product_of_four():
    gs = build_dirac_gammas()
    g = _oracle_gammas()
    assert np.array_equal(gs.gamma5, g[0] @ g[1] @ g[2] @ g[3])
    # with this ordering gamma5 squares to -1 and is antihermitian
    assert np.array_equal(gs.gamma5 @ gs.gamma5, -np.eye(4))
    assert np.array_equal(gs.gamma5.conj().T, -gs.gamma5)


@pytest.mark.parametrize("mu,nu", list(itertools.product(range(4), repeat=2)))
def test_anticommutators_exact(mu, nu):
    assert np.array_equal(anticommutator(mu, nu), 2 * METRIC.g[mu, nu] * np.eye(4))


def test_gamma5_anticommutes_with_every_gamma():
    gs = build_dirac_gammas()
    for g in gs.gamma:
        assert np.array_equal(g @ gs.gamma5 + gs.gamma5 @ g, np.zeros((4, 4)))


def test_anticommutator_bad_index():
    with pytest.raises(IndexError):
        anticommutator(4, 0)


def test_basis16_gram_rank():
    B = build_dirac_gammas().basis16
    assert B.shape == (16, 4, 4)
    G = np.einsum("iab,jab->ij", B.conj(), B)
    assert np.linalg.matrix_rank(G) == 16


def test_arrays_are_read_only():
    gs = build_dirac_gammas()
    with pytest.raises(ValueError):
        gs.gamma[0][0, 0] = 5


def test_decompose_matches_least_squares(rng):
    B = build_dirac_gammas().basis16
    M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    ref = np.linalg.lstsq(B.reshape(16, 16).T, M.ravel(), rcond=None)[0]
    c = decompose_in_basis(M)
    np.testing.assert_allclose(c, ref, atol=1e-12)
    np.testing.assert_allclose(reconstruct_from_basis(c), M, atol=1e-12)


def test_decompose_basis_elements_are_unit_vectors():
    B = build_dirac_gammas().basis16
    for j in range(16):
        c = decompose_in_basis(B[j])
        np.testing.assert_allclose(c, np.eye(16)[j], atol=1e-13)


def test_slash_squares_to_p2(rng):
    p = rng.standard_normal(4)
    ps = slash(p)
    p2 = p[0] ** 2 - p[1:] @ p[1:]
    np.testing.assert_allclose(ps @ ps, p2 * np.eye(4), atol=1e-13)


def test_lowered_gammas():
    gs = build_dirac_gammas()
    for mu in range(4):
        np.testing.assert_array_equal(gs.gamma_lower[mu], METRIC.g[mu, mu] * gs.gamma[mu])
