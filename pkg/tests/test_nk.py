from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from matdirac.errors import BadPartition, ConstraintViolation, NotCanonical, SingularV, ZeroY
from matdirac.linalg import fro
from matdirac.nk import (
    CanonicalNK,
    NKPair,
    angle_multiset_distance,
    classify,
    column_split,
    jordan_coefficients,
    make_canonical,
    make_diagonal_pair,
    make_jordan_pair,
    standard_pair,
    validate_consistency,
    validate_two_level_structure,
)
from matdirac.sampling import complex_normal, random_invertible, random_unitary

J = np.diag(np.ones(3), 1)


def test_standard_pair():
    pair = standard_pair(3)
    assert pair.satisfies_consistency and pair.satisfies_structure and pair.hermitian
    np.testing.assert_array_equal(pair.N, np.eye(3))


def test_validate_identity_pair_fails():
    res = validate_consistency(np.eye(1), np.eye(1))
    assert not res.ok
    assert res.square_residual == pytest.approx(1.0)
    assert not NKPair.from_matrices(np.eye(1), np.eye(1)).satisfies_consistency


def test_jordan_coefficients_exact_rational():
    a, b, c = jordan_coefficients(0.6, 0.8)
    assert Fraction(a).limit_denominator(10000) == Fraction(-3, 4)
    assert Fraction(b).limit_denominator(10000) == Fraction(-125, 128)
    assert Fraction(c).limit_denominator(10000) == Fraction(-1875, 2048)
    assert jordan_coefficients(0.0, 1.0) == (0.0, -0.5, 0.0)


def test_jordan_closed_form():
    pair = make_jordan_pair(0.0, 1.0)
    np.testing.assert_array_equal(pair.N, J)
    np.testing.assert_array_equal(pair.K, np.eye(4) - J @ J / 2)


@pytest.mark.parametrize("t", [0.4, 1.1, 2.0, -0.9, -2.5])
def test_jordan_K_is_principal_square_root(t):
    z, y = np.cos(t), np.sin(t)
    pair = make_jordan_pair(z, y)
    # K is the square root of 1 - N^2 whose eigenvalue is y
    root = scipy.linalg.sqrtm(np.eye(4) - pair.N @ pair.N)
    root = root * np.sign(y)
    np.testing.assert_allclose(pair.K, root, atol=1e-10)
    assert pair.satisfies_consistency
    assert not pair.hermitian and not pair.satisfies_structure


def test_jordan_errors():
    with pytest.raises(ZeroY):
        make_jordan_pair(1.0, 0.0)
    with pytest.raises(ConstraintViolation):
        make_jordan_pair(0.5, 0.5)
    with pytest.raises(SingularV):
        make_jordan_pair(0.6, 0.8, np.zeros((4, 4)))


def test_diagonal(rng):
    th = rng.uniform(0, 2 * np.pi, 4)
    V = random_invertible(rng, 4)
    pair = make_diagonal_pair(np.cos(th), np.sin(th), V)
    assert pair.satisfies_consistency
    np.testing.assert_allclose(np.sort_complex(np.linalg.eigvals(pair.N)), np.sort_complex(np.cos(th) + 0j), atol=1e-10)
    with pytest.raises(ConstraintViolation):
        make_diagonal_pair(np.ones(2), np.ones(2), np.eye(2))


def test_two_level_structure_counts_clusters(rng):
    U = random_unitary(rng, 4)
    N = (U * np.array([1.0, 1.0, -1.0, -1.0])) @ U.conj().T
    assert validate_two_level_structure(N, np.zeros((4, 4)))
    N3 = (U * np.array([1.0, 0.5, -1.0, -1.0])) @ U.conj().T
    assert not validate_two_level_structure(N3, np.zeros((4, 4)))


@pytest.mark.parametrize("p,q", [(4, 0), (1, 3), (2, 2), (3, 1)])
def test_canonical_angles_roundtrip(rng, p, q):
    params = CanonicalNK("angles", random_unitary(rng, 4), p=p, q=q, xi=0.7, eta=2.3)
    pair = make_canonical(params)
    assert pair.satisfies_consistency and pair.satisfies_structure
    rec = classify(pair.N, pair.K)
    assert angle_multiset_distance(rec.angles(), params.angles()) < 1e-9
    back = make_canonical(rec)
    np.testing.assert_allclose(back.N, pair.N, atol=1e-10)
    np.testing.assert_allclose(back.K, pair.K, atol=1e-10)


def test_canonical_signs_roundtrip(rng):
    params = CanonicalNK("signs", random_unitary(rng, 4), xi=0.4, sign_pattern=(1, -1, -1, 1))
    pair = make_canonical(params)
    rec = classify(pair.N, pair.K)
    assert rec.form == "signs"
    assert angle_multiset_distance(rec.angles(), params.angles()) < 1e-9


def test_canonical_independent_signs(rng):
    params = CanonicalNK("signs", random_unitary(rng, 4), xi=0.4, sign_pattern=(1, -1, -1, 1), sign_pattern_k=(1, 1, -1, -1))
    pair = make_canonical(params)
    assert pair.satisfies_consistency and pair.satisfies_structure
    rec = classify(pair.N, pair.K)
    assert angle_multiset_distance(rec.angles(), params.angles()) < 1e-9


def test_canonical_errors(rng):
    with pytest.raises(BadPartition):
        make_canonical(CanonicalNK("angles", np.eye(3), p=1, q=1))
    with pytest.raises(NotCanonical):
        make_canonical(CanonicalNK("angles", 2 * np.eye(2), p=1, q=1))
    A = complex_normal(rng, (3, 3))
    with pytest.raises(Exception):
        classify(A, A)


def test_angle_distance_is_circular():
    assert angle_multiset_distance([0.0, 1.0], [1.0, 2 * np.pi - 1e-12]) < 1e-11


def test_json_roundtrip(rng):
    pair = make_jordan_pair(0.6, 0.8, random_unitary(rng, 4))
    again = NKPair.from_json(pair.to_json())
    np.testing.assert_array_equal(again.N, pair.N)
    assert again.provenance == "jordan"


def test_column_split(rng):
    V = random_unitary(rng, 3)
    psi0 = complex_normal(rng, (4, 3))
    cols = column_split(psi0, V)
    assert fro(np.column_stack(cols) - psi0 @ V) < 1e-12 if isinstance(cols, list) else fro(cols - psi0 @ V) < 1e-12
