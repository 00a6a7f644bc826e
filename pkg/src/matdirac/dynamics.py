"""
The matrix Dirac equation

    i gamma^mu d_mu psi - m (psi N + gamma^5 psi K) = 0,    psi a 4 x l matrix,

together with its Klein-Gordon consistency, plane-wave solutions, bilinear
currents and lagrangian densities.

Momenta are covariant, so a plane wave ``C exp(-i p.x)`` obeys
``i gamma^mu d_mu -> gamma^mu p_mu`` and is on shell when
``p_0^2 - p_1^2 - p_2^2 - p_3^2 = m^2``.
"""

from dataclasses import dataclass

import numpy as np

from .commutant import LieBasis, project_complex
from .errors import ConstraintViolation, NotASolution, NotHermitianNK, ShapeMismatch
from .fields import (
    FourierField,
    LinearMapField,
    add,
    differentiate,
    dirac_adjoint,
    lmul,
    multiply,
    rmul,
)
from .gamma import METRIC, build_dirac_gammas, slash
from .linalg import DEFAULT_TOL, fro, null_space
from .nk import NKPair
from .sampling import complex_normal, on_shell_momentum
from .serialization import matrix_to_json

__all__ = [
    "PlaneWaveSolution",
    "CurrentField",
    "PointwiseField",
    "kg_residual",
    "dirac_residual",
    "covariant_dirac_residual",
    "amplitude_operator",
    "build_plane_wave",
    "random_solution",
    "factorization_residual",
    "bilinear_current_raw",
    "current_J",
    "divergence",
    "current_identity_residual",
    "dirac_lagrangian_density",
    "dirac_lagrangian_value",
    "sup_norm",
    "residual_scale",
]


class PointwiseField:
    """Field known only through its values; used for derived residuals."""

    def __init__(self, shape, value_fn):
        self.shape = tuple(shape)
        self._value = value_fn

    def value(self, x):
        return self._value(np.asarray(x, dtype=float))

    def derivative(self, mu, x):
        raise NotImplementedError("pointwise field carries no derivative")

    def second_derivative(self, mu, nu, x):
        raise NotImplementedError("pointwise field carries no derivative")


def sup_norm(F, points):
    """Largest Frobenius norm of ``F`` over the sample points."""
    return max(fro(F.value(x)) for x in points)


def residual_scale(psi, m=0.0, order=1):
    """Size of ``psi`` weighted by ``(|p| + m)^order``; a bound for its derivatives."""
    if psi.n_terms == 0:
        return 0.0
    amps = np.linalg.norm(psi.coeffs.reshape(psi.n_terms, -1), axis=1)
    mom = np.linalg.norm(psi.freqs, axis=1)
    return float(np.sum(amps * (1.0 + mom + m) ** order))


def _nk_matrices(nk):
    if isinstance(nk, NKPair):
        return nk.N, nk.K
    N, K = nk
    return np.atleast_2d(np.asarray(N, dtype=complex)), np.atleast_2d(np.asarray(K, dtype=complex))


def _check_psi(psi, l=None):
    if tuple(psi.shape)[0] != 4 or (l is not None and tuple(psi.shape)[1] != l):
        want = "4 x l" if l is None else f"4 x {l}"
        raise ShapeMismatch(f"psi must be {want}, got {tuple(psi.shape)}")


def kg_residual(psi, m):
    """``(box + m^2) psi`` with ``box = d_0^2 - d_1^2 - d_2^2 - d_3^2``."""
    g = np.diag(METRIC.g)
    if isinstance(psi, FourierField):
        box = -(psi.freqs**2 @ g)
        return psi._new(psi.freqs, (box + m * m)[:, None, None] * psi.coeffs)

    def value(x):
        out = m * m * psi.value(x)
        for mu in range(4):
            out = out + g[mu] * psi.second_derivative(mu, mu, x)
        return out

    return PointwiseField(psi.shape, value)


def dirac_residual(psi, nk, m):
    """``i gamma^mu d_mu psi - m (psi N + gamma^5 psi K)`` as an exact field."""
    N, K = _nk_matrices(nk)
    _check_psi(psi, N.shape[0])
    gs = build_dirac_gammas()
    kinetic = add(*[lmul(1j * gs.gamma[mu], differentiate(psi, mu)) for mu in range(4)])
    mass = add(rmul(psi, N), rmul(lmul(gs.gamma5, psi), K))
    return add(kinetic, mass, weights=[1.0, -m])


def _gauge_components(a):
    if a is None:
        return None
    comps = getattr(a, "components", a)
    comps = list(comps)
    if len(comps) != 4:
        raise ShapeMismatch(f"gauge field needs 4 components, got {len(comps)}")
    return comps


def covariant_dirac_residual(psi, a, nk, m, x):
    """``i gamma^mu (d_mu psi - psi a_mu) - m (psi N + gamma^5 psi K)`` at x."""
    N, K = _nk_matrices(nk)
    _check_psi(psi, N.shape[0])
    gs = build_dirac_gammas()
    comps = _gauge_components(a)
    val = psi.value(x)
    out = -m * (val @ N + gs.gamma5 @ val @ K)
    for mu in range(4):
        d = psi.derivative(mu, x)
        if comps is not None:
            d = d - val @ comps[mu].value(x)
        out = out + 1j * gs.gamma[mu] @ d
    return out


def amplitude_operator(p, nk, m):
    """Matrix of ``X -> (gamma.p) X - m (X N + gamma^5 X K)`` on column-major vec(X).

    Uses ``vec(A X B) = (B^T kron A) vec(X)``.
    """
    N, K = _nk_matrices(nk)
    l = N.shape[0]
    g5 = build_dirac_gammas().gamma5
    return (
        np.kron(np.eye(l), slash(p))
        - m * np.kron(N.T, np.eye(4))
        - m * np.kron(K.T, g5)
    )


@dataclass(frozen=True)
class PlaneWaveSolution:
    p: np.ndarray
    basis: np.ndarray  # (dim, 4, l), orthonormal in the Frobenius inner product
    nk: NKPair
    m: float

    @property
    def dim(self):
        return self.basis.shape[0]

    def field(self, weights=None):
        """``sum_j w_j Psi_j exp(-i p.x)``; all weights 1 when omitted."""
        l = self.nk.l
        if self.dim == 0:
            return FourierField.zeros(4, l)
        w = np.ones(self.dim) if weights is None else np.asarray(weights, dtype=complex)
        amp = np.einsum("j,jab->ab", w, self.basis)
        return FourierField.plane_wave(self.p, amp)

    def to_json(self):
        return {
            "p": [float(v) for v in self.p],
            "m": float(self.m),
            "dimension": self.dim,
            "basis": [matrix_to_json(b) for b in self.basis],
            "nk": self.nk.to_json(),
        }


def build_plane_wave(p, nk, m, tol=DEFAULT_TOL):
    """Amplitudes ``Psi`` with ``(gamma.p) Psi = m (Psi N + gamma^5 Psi K)``."""
    if not isinstance(nk, NKPair):
        nk = NKPair.from_matrices(*nk)
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise ShapeMismatch(f"momentum must have 4 components, got {p.shape}")
    l = nk.l
    vecs = null_space(amplitude_operator(p, nk, m), tol)
    basis = np.stack([v.reshape(4, l, order="F") for v in vecs.T]) if vecs.shape[1] else np.zeros((0, 4, l), complex)
    return PlaneWaveSolution(p=p, basis=basis, nk=nk, m=float(m))


def random_solution(rng, nk, m, n_momenta=2, spatial_scale=1.0, tol=DEFAULT_TOL):
    """Superposition of plane-wave solutions at several random on-shell momenta."""
    total = None
    for _ in range(n_momenta):
        sol = build_plane_wave(on_shell_momentum(rng, m, spatial_scale), nk, m, tol)
        if sol.dim == 0:
            continue
        f = sol.field(complex_normal(rng, sol.dim) / np.sqrt(2 * sol.dim))
        total = f if total is None else total + f
    if total is None:
        return FourierField.zeros(4, nk.l)
    return total


def factorization_residual(z, y, psi, m, tol=DEFAULT_TOL):
    """``(i g.d + m(z - y g5)) (i g.d - m(z + y g5)) psi + (box + m^2) psi``."""
    z, y = complex(z), complex(y)
    if abs(z * z + y * y - 1.0) > tol.rel:
        raise ConstraintViolation(f"z^2 + y^2 = {z * z + y * y} != 1")
    _check_psi(psi)
    gs = build_dirac_gammas()
    eye = np.eye(4)

    def idslash(f):
        return add(*[lmul(1j * gs.gamma[mu], differentiate(f, mu)) for mu in range(4)])

    inner_ = add(idslash(psi), lmul(z * eye + y * gs.gamma5, psi), weights=[1.0, -m])
    outer = add(idslash(inner_), lmul(z * eye - y * gs.gamma5, inner_), weights=[1.0, m])
    return add(outer, kg_residual(psi, m))


def bilinear_current_raw(psi):
    """The four fields ``i psi_bar gamma^nu psi`` (antihermitian at every point)."""
    _check_psi(psi)
    gs = build_dirac_gammas()
    psibar = dirac_adjoint(psi)
    return [multiply(rmul(psibar, 1j * gs.gamma[nu]), psi) for nu in range(4)]


@dataclass(frozen=True)
class CurrentField:
    components: tuple

    def value(self, x):
        return np.stack([c.value(x) for c in self.components])


def current_J(psi, basis):
    """Projected current ``J^nu = pi_L(i psi_bar gamma^nu psi)``."""
    if not isinstance(basis, LieBasis):
        raise TypeError("basis must be a LieBasis")
    _check_psi(psi, basis.l)

    def proj(C):
        return project_complex(C, basis)

    comps = []
    for raw in bilinear_current_raw(psi):
        if isinstance(raw, FourierField):
            comps.append(raw.map_coeffs(proj))
        else:
            comps.append(LinearMapField(raw, proj, shape=raw.shape))
    return CurrentField(tuple(comps))


def divergence(J):
    comps = getattr(J, "components", J)
    return add(*[differentiate(c, nu) for nu, c in enumerate(comps)])


def _mass_bilinears(psi, N, K):
    """``psi_bar psi N - N^H psi_bar psi + psi_bar g5 psi K - K^H psi_bar g5 psi``."""
    g5 = build_dirac_gammas().gamma5
    psibar = dirac_adjoint(psi)
    s = multiply(psibar, psi)
    s5 = multiply(rmul(psibar, g5), psi)
    return add(
        rmul(s, N),
        lmul(-N.conj().T, s),
        rmul(s5, K),
        lmul(-K.conj().T, s5),
    )


def current_identity_residual(psi, nk, m, tol=DEFAULT_TOL):
    """``d_mu(i psi_bar gamma^mu psi) - m (mass bilinears)`` for a solution psi."""
    N, K = _nk_matrices(nk)
    _check_psi(psi, N.shape[0])
    if isinstance(psi, FourierField):
        res = dirac_residual(psi, (N, K), m).coeff_norm()
        scale = residual_scale(psi, m * (1.0 + fro(N) + fro(K)))
        if res > tol.rel * max(scale, 1.0):
            raise NotASolution(f"Dirac residual {res:.3e} exceeds {tol.rel:.1e} x {scale:.3e}")
    div = divergence(bilinear_current_raw(psi))
    return add(div, _mass_bilinears(psi, N, K), weights=[1.0, -m])


def dirac_lagrangian_value(psi, a, N, K, m, x):
    """Complex value of the traced Dirac part of the lagrangian at x.

    ``1/2 tr( i (psi_bar g^mu D_mu psi - (D_mu psi_bar) g^mu psi)
    - m (psi_bar psi N + N psi_bar psi + psi_bar g5 psi K + K psi_bar g5 psi) )``
    with ``D_mu psi = d_mu psi - psi a_mu`` and
    ``D_mu psi_bar = d_mu psi_bar + a_mu psi_bar``; ``a = None`` means no gauge field.
    """
    gs = build_dirac_gammas()
    g0 = gs.gamma[0]
    comps = _gauge_components(a)
    val = psi.value(x)
    bar = val.conj().T @ g0
    kin = 0.0
    for mu in range(4):
        d = psi.derivative(mu, x)
        dbar = d.conj().T @ g0
        if comps is not None:
            amu = comps[mu].value(x)
            d = d - val @ amu
            dbar = dbar + amu @ bar
        kin = kin + np.trace(bar @ gs.gamma[mu] @ d - dbar @ gs.gamma[mu] @ val)
    s = bar @ val
    s5 = bar @ gs.gamma5 @ val
    mass = np.trace(s @ N + N @ s + s5 @ K + K @ s5)
    return 0.5 * (1j * kin - m * mass)


def _require_hermitian(N, K, tol):
    for name, A in (("N", N), ("K", K)):
        if fro(A - A.conj().T) > tol.rel * max(1.0, fro(A)):
            raise NotHermitianNK(f"{name} must be hermitian for the lagrangian to be real")


def dirac_lagrangian_density(psi, nk, m, x, tol=DEFAULT_TOL):
    """Real value of the gauge-free lagrangian density at x."""
    N, K = _nk_matrices(nk)
    _require_hermitian(N, K, tol)
    _check_psi(psi, N.shape[0])
    return float(np.real(dirac_lagrangian_value(psi, None, N, K, m, x)))
