import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matdirac.errors import NotAntihermitian, ShapeMismatch, TermBudgetExceeded
from matdirac.fields import (
    FourierField,
    GaugeTransformField,
    PointField,
    add,
    dirac_adjoint,
    finite_difference_error,
    lmul,
    multiply,
    rmul,
)
from matdirac.gamma import build_dirac_gammas
from matdirac.sampling import complex_normal, random_antihermitian, random_real_scalar_field


def _field(rng, shape=(2, 3), n=3):
    return FourierField(rng.standard_normal((n, 4)), complex_normal(rng, (n,) + shape))


def _brute_value(F, x):
    # direct sum, independent of the vectorized evaluation
    out = np.zeros(F.shape, complex)
    for p, C in zip(F.freqs, F.coeffs):
        out += C * np.exp(-1j * (p @ x))
    return out


def test_value_matches_direct_sum(rng):
    F = _field(rng)
    x = rng.standard_normal(4)
    np.testing.assert_allclose(F.value(x), _brute_value(F, x), atol=1e-13)


def test_plane_wave_derivative_is_exact():
    p = np.array([1.0, 0.5, -0.2, 0.3])
    C = np.array([[1.0 + 2j]])
    F = FourierField.plane_wave(p, C)
    x = np.array([0.1, 0.2, 0.3, 0.4])
    for mu in range(4):
        np.testing.assert_allclose(F.derivative(mu, x), -1j * p[mu] * F.value(x), atol=1e-14)
        for nu in range(4):
            np.testing.assert_allclose(F.second_derivative(mu, nu, x), -p[mu] * p[nu] * F.value(x), atol=1e-14)


def test_constant_field_has_zero_derivative():
    F = FourierField.constant(np.ones((2, 2)))
    assert np.all(F.derivative(2, np.zeros(4)) == 0)


def test_zero_field():
    Z = FourierField.zeros(4, 2)
    assert Z.n_terms == 0
    assert np.all(Z.value(np.ones(4)) == 0)
    assert Z.coeff_norm() == 0.0


def test_terms_merge(rng):
    p = rng.standard_normal(4)
    F = FourierField(np.stack([p, p]), np.array([[[1.0]], [[2.0]]]))
    assert F.n_terms == 1
    np.testing.assert_allclose(F.coeffs[0], [[3.0]])
    G = FourierField(np.stack([p, p]), np.array([[[1.0]], [[-1.0]]]))
    assert G.n_terms == 0


def test_term_budget(rng):
    with pytest.raises(TermBudgetExceeded):
        FourierField(rng.standard_normal((10, 4)), np.ones((10, 1, 1)), term_budget=5)


@pytest.mark.parametrize("order", [1, 2])
def test_derivatives_agree_with_finite_differences(rng, order):
    F = _field(rng)
    assert finite_difference_error(F, rng.standard_normal(4), order=order) < 1e-6


def test_product_leibniz(rng):
    A = _field(rng, (2, 3))
    B = _field(rng, (3, 2))
    x = rng.standard_normal(4)
    P = multiply(A, B)
    np.testing.assert_allclose(P.value(x), A.value(x) @ B.value(x), atol=1e-12)
    assert finite_difference_error(P, x, order=1) < 1e-6
    assert finite_difference_error(P, x, order=2) < 1e-5


def test_composite_product_against_finite_difference(rng):
    A = _field(rng, (2, 2))
    B = _field(rng, (2, 2))
    comp = multiply(add(A, B, weights=[1.0, -2.0]), lmul(np.eye(2) * 3, B))
    assert isinstance(comp, PointField)
    assert finite_difference_error(comp, rng.standard_normal(4), order=2) < 1e-5


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_linearity(seed, c):
    rng = np.random.default_rng(seed)
    A, B = _field(rng), _field(rng)
    x = rng.standard_normal(4)
    lhs = (A + B * c).derivative(1, x)
    rhs = A.derivative(1, x) + c * B.derivative(1, x)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + abs(c)))


def test_fourier_product_is_fourier(rng):
    A, B = _field(rng, (2, 3)), _field(rng, (3, 1))
    P = A @ B
    assert isinstance(P, FourierField)
    assert P.n_terms <= A.n_terms * B.n_terms
    x = rng.standard_normal(4)
    np.testing.assert_allclose(P.second_derivative(0, 3, x), multiply(A, B).second_derivative(0, 3, x), atol=1e-11)


def test_matrix_times_field(rng):
    A = _field(rng, (3, 2))
    M = complex_normal(rng, (2, 3))
    x = rng.standard_normal(4)
    np.testing.assert_allclose((M @ A).value(x), M @ A.value(x), atol=1e-12)
    np.testing.assert_allclose(rmul(A, M).value(x), A.value(x) @ M, atol=1e-12)


def test_shape_mismatch(rng):
    with pytest.raises(ShapeMismatch):
        _field(rng, (2, 3)) + _field(rng, (3, 2))


def test_dirac_adjoint(rng):
    psi = _field(rng, (4, 2))
    x = rng.standard_normal(4)
    g0 = build_dirac_gammas().gamma[0]
    np.testing.assert_allclose(dirac_adjoint(psi).value(x), psi.value(x).conj().T @ g0, atol=1e-12)


def test_json_roundtrip(rng):
    F = _field(rng)
    G = FourierField.from_json(F.to_json())
    x = rng.standard_normal(4)
    np.testing.assert_array_equal(F.value(x), G.value(x))


def test_gauge_transform_field(rng):
    theta = random_antihermitian(rng, 3)
    phi = random_real_scalar_field(rng)
    V = GaugeTransformField(theta, phi)
    x = rng.standard_normal(4)
    Vx = V.value(x)
    np.testing.assert_allclose(Vx.conj().T @ Vx, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(V.inverse().value(x) @ Vx, np.eye(3), atol=1e-12)
    assert finite_difference_error(V, x, order=1) < 1e-6
    assert finite_difference_error(V, x, order=2) < 1e-5
    for mu in range(4):
        mc = V.maurer_cartan(mu).value(x)
        np.testing.assert_allclose(mc, np.linalg.solve(Vx, V.derivative(mu, x)), atol=1e-11)


def test_gauge_transform_field_rejects_hermitian(rng):
    A = complex_normal(rng, (2, 2))
    with pytest.raises(NotAntihermitian):
        GaugeTransformField(A + A.conj().T, random_real_scalar_field(rng))
