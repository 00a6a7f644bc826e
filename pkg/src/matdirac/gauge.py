"""
Gauge fields, field strength, Yang-Mills residuals and gauge transformations.

Conventions follow the covariant derivative ``D_mu psi = d_mu psi - psi a_mu``
acting from the right:

    f_{mu nu} = d_mu a_nu - d_nu a_mu - [a_nu, a_mu]
    psi -> psi V,  a_mu -> V^{-1} a_mu V + V^{-1} d_mu V,  f -> V^{-1} f V

and the Yang-Mills equations with source are taken as

    d_mu f^{mu nu} - [f^{mu nu}, a_mu] = -pi_L(i psi_bar gamma^nu psi).
"""

from dataclasses import dataclass, field

import numpy as np

from .commutant import LieBasis, project_to_L
from .dynamics import _gauge_components, _nk_matrices, _require_hermitian, dirac_lagrangian_value
from .errors import NotInL, RankDeficient, ShapeMismatch
from .fields import (
    FourierField,
    GaugeTransformField,
    ProductField,
    SumField,
    differentiate,
    lmul,
    multiply,
    rmul,
)
from .gamma import METRIC, build_dirac_gammas
from .linalg import DEFAULT_TOL, commutator, fro, polar_decompose
from .serialization import matrix_to_json

__all__ = [
    "GaugeField",
    "FieldStrength",
    "PolarGaugeSample",
    "field_strength",
    "raise_indices",
    "ym_residual",
    "gauge_transform",
    "gauge_lagrangian_density",
    "polar_gauge",
    "check_generator",
]


def _scaled(F, s):
    if isinstance(F, FourierField):
        return s * F
    return SumField([F], [s])


@dataclass(frozen=True)
class GaugeField:
    components: tuple
    lie_basis: LieBasis = None

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != 4:
            raise ShapeMismatch(f"gauge field needs 4 components, got {len(comps)}")
        shape = tuple(comps[0].shape)
        if shape[0] != shape[1] or any(tuple(c.shape) != shape for c in comps):
            raise ShapeMismatch("gauge components must be square and of equal size")
        object.__setattr__(self, "components", comps)

    @property
    def l(self):
        return self.components[0].shape[0]

    @classmethod
    def zero(cls, l, lie_basis=None):
        return cls(tuple(FourierField.zeros(l, l) for _ in range(4)), lie_basis)

    def values(self, x):
        return np.stack([c.value(x) for c in self.components])

    def in_L(self, x, N, K, tol=DEFAULT_TOL):
        """Whether every component at x is antihermitian and commutes with N, K."""
        for A in self.values(x):
            scale = max(1.0, fro(A))
            if fro(A + A.conj().T) > tol.rel * scale:
                return False
            bound = tol.rel * scale * max(1.0, fro(N) + fro(K))
            if fro(commutator(A, N)) > bound or fro(commutator(A, K)) > bound:
                return False
        return True

    def to_json(self):
        if not all(isinstance(c, FourierField) for c in self.components):
            raise TypeError("only Fourier-sum gauge fields serialize")
        return {"components": [c.to_json() for c in self.components]}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(FourierField.from_json(c) for c in obj["components"]))


@dataclass(frozen=True)
class FieldStrength:
    """Antisymmetric 4 x 4 array of l x l fields; ``components[mu][nu]``."""

    components: tuple
    contravariant: bool = False

    def value(self, mu, nu, x):
        return self.components[mu][nu].value(x)

    def values(self, x):
        return np.stack([np.stack([self.components[m][n].value(x) for n in range(4)]) for m in range(4)])

    def to_json(self):
        return {
            "contravariant": self.contravariant,
            "components": [[c.to_json() for c in row] for row in self.components],
        }


def _antisymmetric(upper, l):
    """Fill a 4x4 table from the entries with mu < nu."""
    zero = FourierField.zeros(l, l)
    rows = []
    for mu in range(4):
        row = []
        for nu in range(4):
            if mu == nu:
                row.append(zero)
            elif mu < nu:
                row.append(upper[mu, nu])
            else:
                row.append(_scaled(upper[nu, mu], -1.0))
        rows.append(tuple(row))
    return tuple(rows)


def field_strength(a):
    """``f_{mu nu} = d_mu a_nu - d_nu a_mu - [a_nu, a_mu]``.

    Exact Fourier sums when every component is a FourierField, otherwise
    composite fields whose derivatives use second derivatives of ``a``.
    """
    comps = _gauge_components(a)
    l = comps[0].shape[0]
    upper = {}
    for mu in range(4):
        for nu in range(mu + 1, 4):
            am, an = comps[mu], comps[nu]
            if isinstance(am, FourierField) and isinstance(an, FourierField):
                upper[mu, nu] = an.differentiate(mu) - am.differentiate(nu) - (an @ am - am @ an)
            else:
                upper[mu, nu] = SumField(
                    [differentiate(an, mu), differentiate(am, nu), ProductField(an, am), ProductField(am, an)],
                    [1.0, -1.0, -1.0, 1.0],
                )
    return FieldStrength(_antisymmetric(upper, l))


def raise_indices(f):
    """``f^{mu nu} = g^{mu a} g^{nu b} f_{ab}``; the metric is diagonal and its own inverse."""
    g = np.diag(METRIC.g)
    rows = tuple(
        tuple(_scaled(f.components[mu][nu], g[mu] * g[nu]) if g[mu] * g[nu] != 1 else f.components[mu][nu] for nu in range(4))
        for mu in range(4)
    )
    return FieldStrength(rows, contravariant=not f.contravariant)


def ym_residual(a, f, psi, basis, x, tol=DEFAULT_TOL):
    """Per-nu values of ``d_mu f^{mu nu} - [f^{mu nu}, a_mu] + pi_L(i psi_bar gamma^nu psi)``.

    ``f`` is the covariant field strength of ``a``; ``psi = None`` drops the
    source.  Returns an array of shape ``(4, l, l)``.
    """
    comps = _gauge_components(a)
    l = comps[0].shape[0]
    fup = f if f.contravariant else raise_indices(f)
    avals = [c.value(x) for c in comps]
    out = np.zeros((4, l, l), dtype=complex)
    if psi is not None:
        if tuple(psi.shape) != (4, l):
            raise ShapeMismatch(f"psi must be 4 x {l}, got {tuple(psi.shape)}")
        gs = build_dirac_gammas()
        val = psi.value(x)
        bar = val.conj().T @ gs.gamma[0]
    for nu in range(4):
        acc = np.zeros((l, l), dtype=complex)
        for mu in range(4):
            F = fup.components[mu][nu]
            acc += F.derivative(mu, x) - commutator(F.value(x), avals[mu])
        if psi is not None:
            source = 1j * bar @ gs.gamma[nu] @ val
            acc += project_to_L(source, basis, tol, check=False)
        out[nu] = acc
    return out


def check_generator(theta, N=None, K=None, basis=None, tol=DEFAULT_TOL):
    """Raise NotInL unless ``theta`` is antihermitian and commutes with N and K."""
    theta = np.asarray(theta, dtype=complex)
    scale = max(1.0, fro(theta))
    if fro(theta + theta.conj().T) > tol.rel * scale:
        raise NotInL("generator is not antihermitian")
    if N is not None:
        bound = tol.rel * scale * max(1.0, fro(N) + fro(K))
        if fro(commutator(theta, N)) > bound or fro(commutator(theta, K)) > bound:
            raise NotInL("generator does not commute with N and K")
    if basis is not None and not basis.contains(theta, tol):
        raise NotInL("generator lies outside the gauge Lie algebra")


def gauge_transform(psi, a, V, nk=None, f=None, tol=DEFAULT_TOL):
    """Apply ``psi -> psi V``, ``a -> V^-1 a V + V^-1 dV``, ``f -> V^-1 f V``.

    ``V`` is a :class:`GaugeTransformField` or a constant unitary matrix.  The
    transformed fields are composites with exact derivatives up to order two
    (constant ``V`` keeps Fourier fields Fourier).  When ``f`` is omitted it
    is computed from ``a``.
    """
    comps = _gauge_components(a)
    lie_basis = getattr(a, "lie_basis", None)
    N, K = (None, None) if nk is None else _nk_matrices(nk)
    if f is None:
        f = field_strength(comps)

    if isinstance(V, GaugeTransformField):
        check_generator(V.theta, N, K, lie_basis, tol)
        Vinv = V.inverse()
        psi_t = multiply(psi, V)
        a_t = tuple(
            SumField([ProductField(ProductField(Vinv, c), V), V.maurer_cartan(mu)])
            for mu, c in enumerate(comps)
        )

        def conj(F):
            return ProductField(ProductField(Vinv, F), V)
    else:
        Vc = np.atleast_2d(np.asarray(V, dtype=complex))
        l = Vc.shape[0]
        if fro(Vc.conj().T @ Vc - np.eye(l)) > tol.rel * l:
            raise NotInL("constant gauge transformation is not unitary")
        if N is not None:
            bound = tol.rel * max(1.0, fro(N) + fro(K))
            if fro(commutator(Vc, N)) > bound or fro(commutator(Vc, K)) > bound:
                raise NotInL("constant gauge transformation does not commute with N and K")
        Vh = Vc.conj().T
        psi_t = rmul(psi, Vc)
        a_t = tuple(lmul(Vh, rmul(c, Vc)) for c in comps)

        def conj(F):
            return lmul(Vh, rmul(F, Vc))

    f_t = FieldStrength(
        tuple(tuple(conj(F) for F in row) for row in f.components),
        contravariant=f.contravariant,
    )
    return psi_t, GaugeField(a_t, lie_basis), f_t


def gauge_lagrangian_density(psi, a, nk, m, x, f=None, tol=DEFAULT_TOL):
    """Gauge-invariant density: covariant Dirac part plus ``+1/4 tr(f_{mu nu} f^{mu nu})``."""
    N, K = _nk_matrices(nk)
    _require_hermitian(N, K, tol)
    comps = _gauge_components(a)
    if f is None:
        f = field_strength(comps)
    if f.contravariant:
        f = raise_indices(f)
    g = np.diag(METRIC.g)
    fv = f.values(x)
    ym = 0.0
    for mu in range(4):
        for nu in range(4):
            ym += g[mu] * g[nu] * np.trace(fv[mu, nu] @ fv[mu, nu])
    total = dirac_lagrangian_value(psi, comps, N, K, m, x) + 0.25 * ym
    return float(np.real(total))


@dataclass
class PolarGaugeSample:
    x: np.ndarray
    psi: np.ndarray  # hermitian positive semidefinite factor, the transformed psi
    V: np.ndarray  # inverse of the unitary polar factor
    dV: np.ndarray  # (4, l, l) central differences of V
    dpsi: np.ndarray  # (4, 4, l) derivatives of psi V
    a: np.ndarray  # (4, l, l) transformed gauge field
    fd_error: float  # Richardson estimate of the difference error in dV
    singular_values: np.ndarray = field(default=None)

    def covariant_residual(self, nk, m):
        N, K = _nk_matrices(nk)
        gs = build_dirac_gammas()
        out = -m * (self.psi @ N + gs.gamma5 @ self.psi @ K)
        for mu in range(4):
            out = out + 1j * gs.gamma[mu] @ (self.dpsi[mu] - self.psi @ self.a[mu])
        return out

    def to_json(self):
        return {
            "x": [float(v) for v in self.x],
            "psi": matrix_to_json(self.psi),
            "V": matrix_to_json(self.V),
            "a": [matrix_to_json(m) for m in self.a],
            "fd_error": float(self.fd_error),
            "min_eigenvalue": float(np.min(np.linalg.eigvalsh(self.psi))),
            "singular_values": [float(s) for s in self.singular_values],
        }


def _require_scalar_pair(N, K, tol):
    l = N.shape[0]
    for name, A in (("N", N), ("K", K)):
        c = np.trace(A) / l
        if fro(A - c * np.eye(l)) > tol.rel * max(1.0, fro(A)):
            raise ShapeMismatch(f"polar gauge needs {name} proportional to the identity")


def polar_gauge(psi, a, x_samples, nk, tol=DEFAULT_TOL, h=1e-5):
    """Transform to the gauge in which psi is hermitian positive semidefinite.

    Needs a square 4 x 4 psi and scalar N, K (so the gauge group is all of
    U(4)).  At each sample ``psi(x) = P(x) U(x)`` and ``V = U^{-1}``;
    ``d_mu V`` comes from central differences with step ``h``.
    """
    N, K = _nk_matrices(nk)
    if tuple(psi.shape) != (4, 4) or N.shape != (4, 4):
        raise ShapeMismatch("polar gauge is defined for l = 4 (square psi)")
    _require_scalar_pair(N, K, tol)
    comps = _gauge_components(a)

    def unitary_factor(x):
        M = psi.value(x)
        s = np.linalg.svd(M, compute_uv=False)
        if s[-1] < tol.rank_cut * s[0]:
            raise RankDeficient(f"psi is rank deficient at x = {np.asarray(x).tolist()}")
        _, U = polar_decompose(M)
        return U

    samples = []
    for x in x_samples:
        x = np.asarray(x, dtype=float)
        M = psi.value(x)
        s = np.linalg.svd(M, compute_uv=False)
        if s[-1] < tol.rank_cut * s[0]:
            raise RankDeficient(f"psi is rank deficient at x = {x.tolist()}")
        P, U = polar_decompose(M)
        V = U.conj().T
        dV = np.zeros((4, 4, 4), dtype=complex)
        err = 0.0
        for mu in range(4):
            e = np.zeros(4)
            e[mu] = 1.0
            d1 = (unitary_factor(x + h * e) - unitary_factor(x - h * e)).conj().T / (2 * h)
            d2 = (unitary_factor(x + 2 * h * e) - unitary_factor(x - 2 * h * e)).conj().T / (4 * h)
            dV[mu] = d1
            err = max(err, fro(d1 - d2) / 3.0)
        a_t = np.stack([U @ comps[mu].value(x) @ V + U @ dV[mu] for mu in range(4)])
        dpsi = np.stack([psi.derivative(mu, x) @ V + M @ dV[mu] for mu in range(4)])
        samples.append(
            PolarGaugeSample(x=x, psi=P, V=V, dV=dV, dpsi=dpsi, a=a_t, fd_error=err, singular_values=s)
        )
    return samples
