"""
Commutant of a matrix pair and its unitary Lie algebra.

``com(N, K)`` is the complex algebra of matrices commuting with N and K.  Its
antihermitian part ``L = com(N, K) ∩ u(l)`` is a real Lie algebra; the
projector onto L is orthogonal for the real inner product
``<A, B> = Re tr(A^H B)`` on u(l).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import NotAntihermitian, NotInL, ShapeMismatch
from .linalg import DEFAULT_TOL, commutator, fro, null_space

__all__ = [
    "ComBasis",
    "LieBasis",
    "commutant_basis",
    "lie_algebra_basis",
    "project_to_L",
    "project_complex",
    "inner",
    "group_membership",
    "exp_generator",
]


def inner(A, B):
    """Real inner product ``Re tr(A^H B)``."""
    return float(np.real(np.vdot(A, B)))


@dataclass(frozen=True)
class ComBasis:
    l: int
    elements: np.ndarray  # (dim_C, l, l), Frobenius-orthonormal

    @property
    def dim_C(self):
        return self.elements.shape[0]


@dataclass(frozen=True)
class LieBasis:
    l: int
    elements: np.ndarray  # (dim_R, l, l), orthonormal under Re tr(A^H B)

    @property
    def dim_R(self):
        return self.elements.shape[0]

    def to_json(self):
        from .serialization import matrix_to_json

        return {"l": self.l, "dim_R": self.dim_R, "elements": [matrix_to_json(e) for e in self.elements]}

    def contains(self, X, tol=DEFAULT_TOL):
        X = np.asarray(X, dtype=complex)
        return fro(X - project_to_L(X, self, tol, check=False)) <= tol.rel * max(1.0, fro(X))


def _pair(N, K):
    N = np.atleast_2d(np.asarray(N, dtype=complex))
    K = np.atleast_2d(np.asarray(K, dtype=complex))
    if N.ndim != 2 or N.shape[0] != N.shape[1] or N.shape != K.shape:
        raise ShapeMismatch(f"N {N.shape} and K {K.shape} must be square and of equal size")
    return N, K


def _commutator_operator(N, K):
    # column-major vec: vec(X A - A X) = (A^T kron I - I kron A) vec(X)
    l = N.shape[0]
    I = np.eye(l)
    blocks = [np.kron(A.T, I) - np.kron(I, A) for A in (N, K)]
    return np.vstack(blocks)


def commutant_basis(N, K, tol=DEFAULT_TOL):
    N, K = _pair(N, K)
    l = N.shape[0]
    vecs = null_space(_commutator_operator(N, K), tol, scale=fro(N) + fro(K))
    elements = np.stack([v.reshape(l, l, order="F") for v in vecs.T])
    return ComBasis(l=l, elements=elements)


def _orthonormalize(mats):
    """Modified Gram-Schmidt under Re tr(A^H B), two passes."""
    basis = []
    for m in mats:
        v = np.array(m, dtype=complex)
        for _ in range(2):
            for b in basis:
                v = v - inner(b, v) * b
        n = np.sqrt(inner(v, v))
        if n > 1e-12:
            basis.append(v / n)
    return basis


def lie_algebra_basis(N, K, tol=DEFAULT_TOL):
    """Orthonormal real basis of the antihermitian matrices commuting with N and K.

    The unknown ``X = A + iB`` is split into 2 l^2 real coordinates and the
    real-linear conditions ``[X, N] = [X, K] = 0``, ``X + X^H = 0`` are
    assembled column by column from their action on the coordinate basis.
    """
    N, K = _pair(N, K)
    l = N.shape[0]
    cols = []
    for part in (1.0, 1j):
        for a in range(l):
            for b in range(l):
                X = np.zeros((l, l), dtype=complex)
                X[a, b] = part
                image = np.concatenate(
                    [commutator(X, N).ravel(), commutator(X, K).ravel(), (X + X.conj().T).ravel()]
                )
                cols.append(np.concatenate([image.real, image.imag]))
    R = np.array(cols).T
    vecs = np.real(null_space(R, tol, scale=2.0 + fro(N) + fro(K)))
    mats = [v[: l * l].reshape(l, l) + 1j * v[l * l :].reshape(l, l) for v in vecs.T]
    elements = _orthonormalize(mats)
    return LieBasis(l=l, elements=np.stack(elements))


def _antihermitian_check(M, tol):
    M = np.asarray(M, dtype=complex)
    if fro(M + M.conj().T) > tol.rel * max(1.0, fro(M)):
        raise NotAntihermitian("projector is defined on antihermitian matrices only")
    return M


def project_to_L(M, basis, tol=DEFAULT_TOL, check=True):
    """Orthogonal projection ``sum_j <B_j, M> B_j`` of an antihermitian M onto L."""
    M = np.asarray(M, dtype=complex)
    if M.shape != (basis.l, basis.l):
        raise ShapeMismatch(f"expected {basis.l}x{basis.l}, got {M.shape}")
    if check:
        _antihermitian_check(M, tol)
    coeffs = np.real(np.einsum("jab,ab->j", basis.elements.conj(), M))
    return np.einsum("j,jab->ab", coeffs, basis.elements)


def project_complex(M, basis):
    """Complex-linear extension of the projector to all of M(l, C).

    Writing ``M = A + i H'`` with A, H' antihermitian, the result is
    ``pi(A) + i pi(H')``, which equals ``sum_j tr(B_j^H M) B_j``.  Being
    complex-linear, it can be applied term by term to a Fourier field.
    """
    M = np.asarray(M, dtype=complex)
    coeffs = np.einsum("jab,ab->j", basis.elements.conj(), M)
    return np.einsum("j,jab->ab", coeffs, basis.elements)


def group_membership(V, N, K, tol=DEFAULT_TOL):
    """True when V is unitary and commutes with N and K."""
    N, K = _pair(N, K)
    V = np.atleast_2d(np.asarray(V, dtype=complex))
    if V.shape != N.shape:
        raise ShapeMismatch(f"V {V.shape} does not match N {N.shape}")
    l = N.shape[0]
    if fro(V.conj().T @ V - np.eye(l)) > tol.rel * l:
        return False
    bound = tol.rel * max(1.0, fro(N) + fro(K)) * max(1.0, fro(V))
    return fro(commutator(V, N)) <= bound and fro(commutator(V, K)) <= bound


def exp_generator(theta, N, K, tol=DEFAULT_TOL):
    """Matrix exponential of a generator in L, giving an element of the gauge group."""
    N, K = _pair(N, K)
    theta = np.atleast_2d(np.asarray(theta, dtype=complex))
    if theta.shape != N.shape:
        raise ShapeMismatch(f"generator {theta.shape} does not match N {N.shape}")
    scale = max(1.0, fro(theta))
    if fro(theta + theta.conj().T) > tol.rel * scale:
        raise NotInL("generator is not antihermitian")
    bound = tol.rel * scale * max(1.0, fro(N) + fro(K))
    if fro(commutator(theta, N)) > bound or fro(commutator(theta, K)) > bound:
        raise NotInL("generator does not commute with N and K")
    return expm(theta)
