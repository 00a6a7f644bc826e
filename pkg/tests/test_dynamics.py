import numpy as np
import pytest

from matdirac.commutant import lie_algebra_basis
from matdirac.dynamics import (
    bilinear_current_raw,
    build_plane_wave,
    current_J,
    dirac_residual,
    divergence,
    factorization_residual,
    current_identity_residual,
    kg_residual,
    dirac_lagrangian_density,
    random_solution,
    residual_scale,
    sup_norm,
)
from matdirac.errors import ConstraintViolation, NotASolution, NotHermitianNK, ShapeMismatch
from matdirac.fields import FourierField
from matdirac.gamma import build_dirac_gammas
from matdirac.nk import CanonicalNK, make_canonical, make_diagonal_pair, make_jordan_pair, standard_pair
from matdirac.sampling import complex_normal, off_shell_momentum, on_shell_momentum, random_unitary

GS = build_dirac_gammas()


def _pts(rng, n=5):
    return rng.standard_normal((n, 4))


def test_rest_frame_standard_pair():
    pos = build_plane_wave([1.0, 0, 0, 0], standard_pair(1), 1.0)
    neg = build_plane_wave([-1.0, 0, 0, 0], standard_pair(1), 1.0)
    assert pos.dim == neg.dim == 2
    # positive energy lives in the upper components, negative in the lower
    upper = np.zeros((4, 1))
    upper[:2] = 1
    for b in pos.basis:
        assert np.allclose(b * (1 - upper), 0, atol=1e-12)
    for b in neg.basis:
        assert np.allclose(b * upper, 0, atol=1e-12)


@pytest.mark.parametrize("l", [1, 2, 3])
def test_on_shell_dimension_is_2l_for_diagonal_pairs(rng, l):
    th = rng.uniform(0, 2 * np.pi, l)
    pair = make_diagonal_pair(np.cos(th), np.sin(th), np.eye(l))
    sol = build_plane_wave(on_shell_momentum(rng, 1.3), pair, 1.3)
    assert sol.dim == 2 * l


def test_off_shell_is_empty(rng):
    for pair in (standard_pair(2), make_jordan_pair(0.6, 0.8, random_unitary(rng, 4))):
        assert build_plane_wave(off_shell_momentum(rng, 1.0), pair, 1.0).dim == 0


def test_kg_residual_off_shell_oracle(rng):
    p = rng.standard_normal(4)
    C = complex_normal(rng, (4, 2))
    psi = FourierField.plane_wave(p, C)
    x = rng.standard_normal(4)
    p2 = p[0] ** 2 - p[1:] @ p[1:]
    np.testing.assert_allclose(kg_residual(psi, 0.7).value(x), (0.49 - p2) * psi.value(x), atol=1e-12)


def test_solutions_solve_dirac(rng):
    pair = make_jordan_pair(0.6, 0.8, random_unitary(rng, 4))
    psi = random_solution(rng, pair, 1.0, n_momenta=3)
    assert psi.n_terms == 3
    assert dirac_residual(psi, pair, 1.0).coeff_norm() < 1e-12 * residual_scale(psi, 1.0)


@pytest.mark.parametrize("z,y", [(1.0, 0.0), (0.0, 1.0), (0.6, -0.8), (np.cos(1 + 0.3j), np.sin(1 + 0.3j))])
def test_factorization(rng, z, y):
    psi = FourierField(rng.standard_normal((3, 4)), complex_normal(rng, (3, 4, 2)))
    res = sup_norm(factorization_residual(z, y, psi, 1.1), _pts(rng))
    assert res < 1e-12 * residual_scale(psi, 1.1, order=2)


def test_factorization_constraint():
    with pytest.raises(ConstraintViolation):
        factorization_residual(1.0, 1.0, FourierField.zeros(4, 1), 1.0)


def test_bilinear_current_oracle(rng):
    psi = FourierField(rng.standard_normal((2, 4)), complex_normal(rng, (2, 4, 3)))
    x = rng.standard_normal(4)
    v = psi.value(x)
    bar = v.conj().T @ GS.gamma[0]
    for nu, comp in enumerate(bilinear_current_raw(psi)):
        val = comp.value(x)
        np.testing.assert_allclose(val, 1j * bar @ GS.gamma[nu] @ v, atol=1e-12)
        np.testing.assert_allclose(val, -val.conj().T, atol=1e-12)


def test_single_plane_wave_current_is_constant(rng):
    pair = make_jordan_pair(0.6, 0.8)
    sol = build_plane_wave(on_shell_momentum(rng, 1.0), pair, 1.0)
    psi = sol.field()
    basis = lie_algebra_basis(pair.N, pair.K)
    assert sup_norm(divergence(current_J(psi, basis)), _pts(rng)) < 1e-12


@pytest.mark.parametrize("which", ["canonical", "jordan"])
def test_current_identity(rng, which):
    if which == "canonical":
        pair = make_canonical(CanonicalNK("angles", random_unitary(rng, 3), p=1, q=2, xi=0.3, eta=1.9))
    else:
        pair = make_jordan_pair(0.6, 0.8, random_unitary(rng, 4))
    psi = random_solution(rng, pair, 1.0, n_momenta=3)
    scale = residual_scale(psi, 1.0) * psi.coeff_norm()
    assert sup_norm(current_identity_residual(psi, pair, 1.0), _pts(rng)) < 1e-12 * scale


def test_current_identity_rejects_non_solution(rng):
    psi = FourierField(rng.standard_normal((1, 4)), complex_normal(rng, (1, 4, 1)))
    with pytest.raises(NotASolution):
        current_identity_residual(psi, standard_pair(1), 1.0)


def test_conservation_canonical_vs_jordan(rng):
    pair = make_canonical(CanonicalNK("angles", random_unitary(rng, 4), p=2, q=2, xi=0.5, eta=2.0))
    psi = random_solution(rng, pair, 1.0, n_momenta=3)
    basis = lie_algebra_basis(pair.N, pair.K)
    scale = residual_scale(psi, 1.0) * psi.coeff_norm()
    assert sup_norm(divergence(current_J(psi, basis)), _pts(rng)) < 1e-12 * scale

    pair2 = make_jordan_pair(0.6, 0.8)
    basis2 = lie_algebra_basis(pair2.N, pair2.K)
    worst = 0.0
    for _ in range(5):
        psi2 = random_solution(rng, pair2, 1.0, n_momenta=3)
        scale2 = residual_scale(psi2, 1.0) * psi2.coeff_norm()
        worst = max(worst, sup_norm(divergence(current_J(psi2, basis2)), _pts(rng)) / scale2)
    assert worst > 1e-3


def test_lagrangian_vanishes_on_single_plane_wave(rng):
    pair = make_canonical(CanonicalNK("angles", random_unitary(rng, 2), p=1, q=1, xi=0.2, eta=1.0))
    sol = build_plane_wave(on_shell_momentum(rng, 0.9), pair, 0.9)
    psi = sol.field(complex_normal(rng, sol.dim))
    assert abs(dirac_lagrangian_density(psi, pair, 0.9, rng.standard_normal(4))) < 1e-12


def test_lagrangian_requires_hermitian():
    with pytest.raises(NotHermitianNK):
        dirac_lagrangian_density(FourierField.zeros(4, 4), make_jordan_pair(0.6, 0.8), 1.0, np.zeros(4))


def test_shape_checks():
    with pytest.raises(ShapeMismatch):
        build_plane_wave([1, 0, 0], standard_pair(1), 1.0)
    with pytest.raises(ShapeMismatch):
        dirac_residual(FourierField.zeros(3, 1), standard_pair(1), 1.0)
