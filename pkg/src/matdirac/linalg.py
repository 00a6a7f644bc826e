"""Dense complex matrix utilities: null spaces, polar factors, joint eigenbases."""

from dataclasses import dataclass

import numpy as np

from .errors import NotCommuting, NotHermitian, ShapeMismatch

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "dagger",
    "commutator",
    "fro",
    "null_space",
    "polar_decompose",
    "joint_diagonalize",
    "cluster_values",
]


@dataclass(frozen=True)
class Tolerances:
    rel: float = 1e-10
    rank_cut: float = 1e-10

    def __post_init__(self):
        for name in ("rel", "rank_cut"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"Tolerances.{name} must lie in (0, 1), got {v!r}")


DEFAULT_TOL = Tolerances()


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def commutator(a, b):
    return a @ b - b @ a


def fro(a):
    return float(np.linalg.norm(a))


def _as_matrix(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ShapeMismatch(f"expected a 2-d matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def null_space(M, tol=DEFAULT_TOL, scale=None):
    """Orthonormal basis of ``{v : M v = 0}``, returned as the columns of an array.

    Singular values below ``tol.rank_cut * max(s_max, scale)`` are treated as
    zero.  ``scale`` is the size M would have if it were not degenerate; pass
    it when M may consist of rounding noise only.  An all-zero matrix has
    every vector in its null space.
    """
    M = _as_matrix(M)
    n = M.shape[1]
    if M.shape[0] == 0 or n == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(n, dtype=complex)
    ref = smax if scale is None else max(smax, float(scale))
    rank = int(np.sum(s > tol.rank_cut * ref))
    return vh[rank:].conj().T


def polar_decompose(M):
    """Left polar decomposition ``M = P @ U``.

    P is hermitian positive semidefinite with the rank of M and U is unitary.
    Computed from the SVD ``M = W S Z^H`` as ``P = W S W^H``, ``U = W Z^H``.
    """
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ShapeMismatch(f"polar decomposition needs a square matrix, got {M.shape}")
    w, s, zh = np.linalg.svd(M)
    P = (w * s) @ w.conj().T
    P = 0.5 * (P + P.conj().T)
    U = w @ zh
    return P, U


def cluster_values(values, gap):
    """Group sorted-real values into runs whose neighbours differ by <= gap.

    Returns a list of index arrays, one per cluster, ordered by value.
    """
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    clusters = []
    current = [order[0]] if order.size else []
    for prev, idx in zip(order[:-1], order[1:]):
        if values[idx] - values[prev] <= gap:
            current.append(idx)
        else:
            clusters.append(np.array(current))
            current = [idx]
    if current:
        clusters.append(np.array(current))
    return clusters


def _check_hermitian_pair(N, K, tol):
    scale = fro(N) + fro(K)
    bound = tol.rel * max(scale, 1.0)
    for name, A in (("N", N), ("K", K)):
        if fro(A - A.conj().T) > bound:
            raise NotHermitian(f"{name} is not hermitian")
    if fro(commutator(N, K)) > bound:
        raise NotCommuting("N and K do not commute")


def joint_diagonalize(N, K, tol=DEFAULT_TOL, rng=None):
    """Common unitary eigenbasis of a commuting hermitian pair.

    Returns ``(U, lam, eps)`` with ``U^H N U = diag(lam)`` and
    ``U^H K U = diag(eps)``.

    A random combination ``N + t K`` separates most joint eigenvalues; the
    result is then refined by diagonalizing K inside every eigenspace of N,
    which handles the highly degenerate spectra that occur for (N, K) built
    from two reflections.
    """
    N = _as_matrix(N)
    K = _as_matrix(K)
    if N.shape != K.shape or N.shape[0] != N.shape[1]:
        raise ShapeMismatch(f"N {N.shape} and K {K.shape} must be square of equal size")
    _check_hermitian_pair(N, K, tol)
    rng = np.random.default_rng(0x5EED) if rng is None else rng
    t = rng.uniform(0.5, 1.5)

    Nh = 0.5 * (N + N.conj().T)
    Kh = 0.5 * (K + K.conj().T)
    _, U = np.linalg.eigh(Nh + t * Kh)

    lam = np.real(np.diag(U.conj().T @ Nh @ U))
    radius = max(np.max(np.abs(lam)) if lam.size else 0.0, 1.0)
    for idx in cluster_values(lam, 1e-8 * radius):
        if idx.size < 2:
            continue
        sub = U[:, idx]
        _, w = np.linalg.eigh(sub.conj().T @ Kh @ sub)
        U[:, idx] = sub @ w

    lam = np.real(np.diag(U.conj().T @ Nh @ U))
    eps = np.real(np.diag(U.conj().T @ Kh @ U))
    return U, lam, eps
