import numpy as np
import pytest

from matdirac.commutant import lie_algebra_basis
from matdirac.dynamics import covariant_dirac_residual, random_solution
from matdirac.errors import NotInL, RankDeficient
from matdirac.fields import FourierField, GaugeTransformField
from matdirac.gauge import (
    GaugeField,
    field_strength,
    gauge_transform,
    gauge_lagrangian_density,
    polar_gauge,
    raise_indices,
    ym_residual,
)
from matdirac.linalg import fro
from matdirac.nk import CanonicalNK, NKPair, make_canonical, standard_pair
from matdirac.sampling import (
    complex_normal,
    random_antihermitian,
    random_lie_field,
    random_real_scalar_field,
    random_unitary,
)

G = np.diag([1.0, -1.0, -1.0, -1.0])


def _setup(rng, l=3, m=0.7):
    pair = make_canonical(CanonicalNK("angles", random_unitary(rng, l), p=1, q=l - 1, xi=0.4, eta=2.2))
    basis = lie_algebra_basis(pair.N, pair.K)
    psi = random_solution(rng, pair, m, n_momenta=2)
    a = GaugeField(tuple(random_lie_field(rng, basis.elements) for _ in range(4)), basis)
    return pair, basis, psi, a


def _fd(F, mu, x, h=1e-5):
    e = np.zeros(4)
    e[mu] = h
    return (F(x + e) - F(x - e)) / (2 * h)


def test_field_strength_against_finite_differences(rng):
    _, _, _, a = _setup(rng)
    f = field_strength(a)
    x = rng.standard_normal(4)
    for mu in range(4):
        for nu in range(4):
            dan = _fd(a.components[nu].value, mu, x)
            dam = _fd(a.components[mu].value, nu, x)
            An, Am = a.components[nu].value(x), a.components[mu].value(x)
            ref = dan - dam - (An @ Am - Am @ An)
            np.testing.assert_allclose(f.value(mu, nu, x), ref, atol=1e-8)


def test_field_strength_antisymmetric_and_in_L(rng):
    pair, basis, _, a = _setup(rng)
    fv = field_strength(a).values(rng.standard_normal(4))
    for mu in range(4):
        for nu in range(4):
            np.testing.assert_allclose(fv[mu, nu], -fv[nu, mu], atol=1e-13)
            assert basis.contains(fv[mu, nu])


def test_raise_indices(rng):
    _, _, _, a = _setup(rng)
    f = field_strength(a)
    x = rng.standard_normal(4)
    up = raise_indices(f).values(x)
    down = f.values(x)
    for mu in range(4):
        for nu in range(4):
            np.testing.assert_allclose(up[mu, nu], G[mu, mu] * G[nu, nu] * down[mu, nu])


def test_abelian_ym_oracle(rng):
    # u(1): a_mu = i eps_mu P(x) with P = c e^{-ik.x} + cc, so d_mu f^{mu nu} = i (k^nu k.eps - k^2 eps^nu) P
    k = rng.standard_normal(4)
    eps = rng.standard_normal(4)
    c = 0.3 + 0.2j
    comps = tuple(
        FourierField(np.stack([k, -k]), np.array([[[1j * eps[mu] * c]], [[1j * eps[mu] * np.conj(c)]]]))
        for mu in range(4)
    )
    a = GaugeField(comps)
    basis = lie_algebra_basis(np.eye(1), np.zeros((1, 1)))
    x = rng.standard_normal(4)
    prof = 2 * np.real(c * np.exp(-1j * k @ x))
    k_up, eps_up = G @ k, G @ eps
    k2, keps = k @ k_up, k @ eps_up
    ref = np.array([1j * (k_up[nu] * keps - k2 * eps_up[nu]) * prof for nu in range(4)])
    out = ym_residual(a, field_strength(a), None, basis, x)
    np.testing.assert_allclose(out[:, 0, 0], ref, atol=1e-11)


def test_gauge_invariance_single_generator(rng):
    m = 0.7
    pair, basis, psi, a = _setup(rng, m=m)
    f = field_strength(a)
    theta = np.einsum("j,jab->ab", rng.standard_normal(basis.dim_R), basis.elements)
    V = GaugeTransformField(theta, random_real_scalar_field(rng))
    psi_t, a_t, f_t = gauge_transform(psi, a, V, pair, f)
    for x in rng.standard_normal((3, 4)):
        assert abs(gauge_lagrangian_density(psi, a, pair, m, x) - gauge_lagrangian_density(psi_t, a_t, pair, m, x, f=f_t)) < 1e-10
        r0 = covariant_dirac_residual(psi, a, pair, m, x)
        r1 = covariant_dirac_residual(psi_t, a_t, pair, m, x)
        np.testing.assert_allclose(r1, r0 @ V.value(x), atol=1e-10)
        y0, y1 = ym_residual(a, f, psi, basis, x), ym_residual(a_t, f_t, psi_t, basis, x)
        assert abs(fro(y0) - fro(y1)) < 1e-10
        np.testing.assert_allclose(f_t.values(x), field_strength(a_t).values(x), atol=1e-10)
        assert a_t.in_L(x, pair.N, pair.K)


def test_constant_gauge_transform_keeps_fourier(rng):
    pair, basis, psi, a = _setup(rng)
    V = np.linalg.qr(complex_normal(rng, (3, 3)))[0]
    with pytest.raises(NotInL):
        gauge_transform(psi, a, V, pair)
    Vc = random_unitary(rng, 1)[0, 0] * np.eye(3)
    psi_t, a_t, _ = gauge_transform(psi, a, Vc, pair)
    assert isinstance(psi_t, FourierField)


def test_gauge_transform_rejects_generator_outside_L(rng):
    pair, _, psi, a = _setup(rng)
    V = GaugeTransformField(random_antihermitian(rng, 3), random_real_scalar_field(rng))
    with pytest.raises(NotInL):
        gauge_transform(psi, a, V, pair)


def _scalar_setup(rng, m=0.9):
    xi = 0.8
    pair = NKPair.from_matrices(np.cos(xi) * np.eye(4), np.sin(xi) * np.eye(4))
    basis = lie_algebra_basis(pair.N, pair.K)
    psi0 = random_solution(rng, pair, m, n_momenta=3)
    V = GaugeTransformField(random_antihermitian(rng, 4), random_real_scalar_field(rng))
    psi, a, _ = gauge_transform(psi0, GaugeField.zero(4, basis), V, pair)
    return pair, psi, a


def test_polar_gauge(rng):
    m = 0.9
    pair, psi, a = _scalar_setup(rng, m)
    xs = rng.standard_normal((5, 4))
    for s, x in zip(polar_gauge(psi, a, xs, pair), xs):
        M = psi.value(x)
        np.testing.assert_allclose(s.psi, s.psi.conj().T, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(s.psi)) > 0
        np.testing.assert_allclose(s.psi @ s.psi, M @ M.conj().T, atol=1e-10)
        assert fro(s.covariant_residual(pair, m)) < 1e-9
        assert s.fd_error < 1e-5
        # the new gauge field stays antihermitian
        for amu in s.a:
            assert fro(amu + amu.conj().T) < 1e-8


def test_polar_gauge_requirements(rng):
    pair, basis, psi, a = _setup(rng, l=3)
    with pytest.raises(Exception):
        polar_gauge(psi, a, [np.zeros(4)], pair)
    sp = NKPair.from_matrices(np.eye(4), np.zeros((4, 4)))
    zero = FourierField.plane_wave(np.array([1.0, 0, 0, 0]), np.diag([1.0, 1.0, 0.0, 0.0]))
    with pytest.raises(RankDeficient):
        polar_gauge(zero, GaugeField.zero(4), [np.zeros(4)], sp)


def test_gauge_field_json_roundtrip(rng):
    _, _, _, a = _setup(rng)
    b = GaugeField.from_json(a.to_json())
    x = rng.standard_normal(4)
    np.testing.assert_array_equal(a.values(x), b.values(x))
