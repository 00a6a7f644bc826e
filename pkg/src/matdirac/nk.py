"""
Parameter pairs (N, K) of the matrix Dirac equation.

Consistency with the Klein-Gordon equation needs ``[N, K] = 0`` and
``N^2 + K^2 = 1``.  Conservation of the Yang-Mills source needs in addition
that N and K each be a real combination of the identity and a hermitian
unitary matrix.  Pairs meeting both conditions are exactly the canonical forms

    angles: N = U^H diag(cos xi (p times), cos eta (q times)) U,
            K = U^H diag(sin xi (p times), sin eta (q times)) U
    signs:  N = U^H diag(r) U cos xi,  K = U^H diag(s) U sin xi,  r, s in {+1,-1}^l

which this module constructs and recognises.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    BadPartition,
    ConstraintViolation,
    NotCanonical,
    ShapeMismatch,
    SingularV,
    ZeroY,
)
from .fields import FourierField
from .linalg import DEFAULT_TOL, cluster_values, commutator, fro, joint_diagonalize
from .serialization import matrix_from_json, matrix_to_json

__all__ = [
    "NKPair",
    "CanonicalNK",
    "Consistency",
    "PROVENANCES",
    "make_diagonal_pair",
    "make_jordan_pair",
    "jordan_coefficients",
    "make_canonical",
    "validate_consistency",
    "validate_two_level_structure",
    "classify",
    "column_split",
    "angle_multiset",
    "angle_multiset_distance",
    "standard_pair",
]

TWO_PI = 2.0 * np.pi
PROVENANCES = ("diagonal", "jordan", "canonical_angles", "canonical_signs", "user")
# eigenvalues closer than this (times 1 + spectral radius) count as equal
SPECTRAL_GAP = 1e-8
ANGLE_GAP = 1e-7


class Consistency(NamedTuple):
    ok: bool
    commutator_residual: float
    square_residual: float


def _square_pair(N, K):
    N = np.atleast_2d(np.asarray(N, dtype=complex))
    K = np.atleast_2d(np.asarray(K, dtype=complex))
    if N.ndim != 2 or N.shape[0] != N.shape[1] or N.shape != K.shape:
        raise ShapeMismatch(f"N {N.shape} and K {K.shape} must be square and of equal size")
    return N, K


def validate_consistency(N, K, tol=DEFAULT_TOL):
    """Residuals of ``[N, K] = 0`` and ``N^2 + K^2 = 1`` (Frobenius norms).

    ``ok`` is true when both are at most ``tol.rel * l``.
    """
    N, K = _square_pair(N, K)
    l = N.shape[0]
    c = fro(commutator(N, K))
    s = fro(N @ N + K @ K - np.eye(l))
    return Consistency(c <= tol.rel * l and s <= tol.rel * l, c, s)


def _is_hermitian(A, tol):
    return fro(A - A.conj().T) <= tol.rel * max(1.0, fro(A))


def _distinct_eigenvalues(A):
    w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    radius = np.max(np.abs(w)) if w.size else 0.0
    return len(cluster_values(w, SPECTRAL_GAP * (1.0 + radius)))


def validate_two_level_structure(N, K, tol=DEFAULT_TOL):
    """True when N, K are hermitian, commute, and each has at most two eigenvalues.

    That is equivalent to ``N = a1 + b1 P1``, ``K = a2 + b2 P2`` with real
    coefficients and hermitian unitary ``P1``, ``P2``.
    """
    N, K = _square_pair(N, K)
    if not (_is_hermitian(N, tol) and _is_hermitian(K, tol)):
        return False
    if fro(commutator(N, K)) > tol.rel * max(1.0, fro(N) + fro(K)):
        return False
    return _distinct_eigenvalues(N) <= 2 and _distinct_eigenvalues(K) <= 2


@dataclass(frozen=True)
class NKPair:
    N: np.ndarray
    K: np.ndarray
    l: int
    satisfies_consistency: bool
    satisfies_structure: bool
    hermitian: bool
    provenance: str = "user"

    @classmethod
    def from_matrices(cls, N, K, provenance="user", tol=DEFAULT_TOL):
        N, K = _square_pair(N, K)
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        N, K = N.copy(), K.copy()
        N.setflags(write=False)
        K.setflags(write=False)
        return cls(
            N=N,
            K=K,
            l=N.shape[0],
            satisfies_consistency=validate_consistency(N, K, tol).ok,
            satisfies_structure=validate_two_level_structure(N, K, tol),
            hermitian=_is_hermitian(N, tol) and _is_hermitian(K, tol),
            provenance=provenance,
        )

    def to_json(self):
        return {
            "l": self.l,
            "N": matrix_to_json(self.N),
            "K": matrix_to_json(self.K),
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, obj, tol=DEFAULT_TOL):
        try:
            N = matrix_from_json(obj["N"])
            K = matrix_from_json(obj["K"])
            l = int(obj.get("l", N.shape[0]))
            prov = obj.get("provenance", "user")
        except (KeyError, TypeError) as exc:
            raise ShapeMismatch(f"malformed NKPair JSON: {exc}") from exc
        pair = cls.from_matrices(N, K, provenance=prov, tol=tol)
        if pair.l != l:
            raise ShapeMismatch(f"NKPair JSON declares l={l} but matrices are {pair.l}x{pair.l}")
        return pair


def standard_pair(l=1):
    """N = 1, K = 0: every column obeys the ordinary Dirac equation."""
    return NKPair.from_matrices(np.eye(l), np.zeros((l, l)), provenance="diagonal")


def _check_invertible(V, tol):
    V = np.atleast_2d(np.asarray(V, dtype=complex))
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ShapeMismatch(f"V must be square, got {V.shape}")
    s = np.linalg.svd(V, compute_uv=False)
    if s[-1] <= tol.rank_cut * s[0]:
        raise SingularV(f"V is numerically singular (condition {s[0] / max(s[-1], 1e-300):.3g})")
    return V


def _similarity(V, D):
    # V D V^{-1} without forming the inverse
    return np.linalg.solve(V.T, (V @ D).T).T


def make_diagonal_pair(z, y, V, tol=DEFAULT_TOL):
    """``N = V diag(z) V^{-1}``, ``K = V diag(y) V^{-1}`` with ``z_k^2 + y_k^2 = 1``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    if z.shape != y.shape or z.ndim != 1:
        raise ShapeMismatch(f"z {z.shape} and y {y.shape} must be equal-length lists")
    bad = np.abs(z * z + y * y - 1.0) > tol.rel
    if np.any(bad):
        raise ConstraintViolation(f"z_k^2 + y_k^2 != 1 at positions {np.flatnonzero(bad).tolist()}")
    V = _check_invertible(V, tol)
    if V.shape[0] != z.size:
        raise ShapeMismatch(f"V is {V.shape} but {z.size} pairs were given")
    N = _similarity(V, np.diag(z))
    K = _similarity(V, np.diag(y))
    return NKPair.from_matrices(N, K, provenance="diagonal", tol=tol)


def jordan_coefficients(z, y):
    """``(a, b, c) = (-z/y, -1/(2 y^3), -z/(2 y^5))``."""
    if y == 0:
        raise ZeroY("y must be nonzero")
    return -z / y, -1.0 / (2.0 * y**3), -z / (2.0 * y**5)


def make_jordan_pair(z, y, V=None, tol=DEFAULT_TOL):
    """Jordan-block pair for l = 4.

    ``N = V (z + J) V^{-1}`` and ``K = V (y + a J + b J^2 + c J^3) V^{-1}``
    with J the nilpotent upper shift.
    """
    z, y = complex(z), complex(y)
    if y == 0:
        raise ZeroY("y must be nonzero")
    if abs(z * z + y * y - 1.0) > tol.rel:
        raise ConstraintViolation(f"z^2 + y^2 = {z * z + y * y} != 1")
    a, b, c = jordan_coefficients(z, y)
    J = np.diag(np.ones(3), 1).astype(complex)
    J2 = J @ J
    J3 = J2 @ J
    I = np.eye(4, dtype=complex)
    N0 = z * I + J
    K0 = y * I + a * J + b * J2 + c * J3
    if V is None:
        N, K = N0, K0
    else:
        V = _check_invertible(V, tol)
        if V.shape != (4, 4):
            raise ShapeMismatch(f"V must be 4x4, got {V.shape}")
        N, K = _similarity(V, N0), _similarity(V, K0)
    return NKPair.from_matrices(N, K, provenance="jordan", tol=tol)


@dataclass(frozen=True)
class CanonicalNK:
    """Parameters of a canonical pair.

    ``form`` is ``"angles"`` (two angle blocks of sizes p and q) or
    ``"signs"`` (a common angle xi with per-entry signs).  In the signs form
    ``sign_pattern`` multiplies cos xi and ``sign_pattern_k`` multiplies
    sin xi; when ``sign_pattern_k`` is None it equals ``sign_pattern``.
    """

    form: str
    U: np.ndarray
    p: int = 0
    q: int = 0
    xi: float = 0.0
    eta: float = 0.0
    sign_pattern: Optional[tuple] = None
    sign_pattern_k: Optional[tuple] = field(default=None)

    @property
    def l(self):
        return self.U.shape[0]

    def diagonals(self):
        """Per-entry ``(cos, sin)`` values of the diagonal form."""
        if self.form == "angles":
            th = np.array([self.xi] * self.p + [self.eta] * self.q, dtype=float)
            return np.cos(th), np.sin(th)
        r = np.asarray(self.sign_pattern, dtype=float)
        s = r if self.sign_pattern_k is None else np.asarray(self.sign_pattern_k, dtype=float)
        return r * np.cos(self.xi), s * np.sin(self.xi)

    def angles(self):
        lam, eps = self.diagonals()
        return np.mod(np.arctan2(eps, lam), TWO_PI)

    def to_json(self):
        out = {
            "form": self.form,
            "l": self.l,
            "p": self.p,
            "q": self.q,
            "xi": float(self.xi),
            "eta": float(self.eta),
            "angles": [float(t) for t in self.angles()],
            "U": matrix_to_json(self.U),
        }
        if self.form == "signs":
            out["sign_pattern"] = [int(v) for v in self.sign_pattern]
            out["sign_pattern_k"] = [int(v) for v in (self.sign_pattern_k or self.sign_pattern)]
        return out


def make_canonical(params, tol=DEFAULT_TOL):
    U = np.atleast_2d(np.asarray(params.U, dtype=complex))
    l = U.shape[0]
    if U.shape != (l, l) or fro(U.conj().T @ U - np.eye(l)) > 1e3 * tol.rel * l:
        raise NotCanonical("U must be a square unitary matrix")
    if params.form == "angles":
        if params.p < 0 or params.q < 0 or params.p + params.q != l:
            raise BadPartition(f"p + q = {params.p + params.q} but l = {l}")
        provenance = "canonical_angles"
    elif params.form == "signs":
        for pattern in (params.sign_pattern, params.sign_pattern_k):
            if pattern is None:
                continue
            if len(pattern) != l or any(v not in (1, -1) for v in pattern):
                raise BadPartition(f"sign pattern must hold {l} entries of +1/-1")
        if params.sign_pattern is None:
            raise BadPartition("signs form needs a sign pattern")
        provenance = "canonical_signs"
    else:
        raise ValueError(f"unknown canonical form {params.form!r}")
    lam, eps = params.diagonals()
    Uh = U.conj().T
    N = (Uh * lam) @ U
    K = (Uh * eps) @ U
    N = 0.5 * (N + N.conj().T)
    K = 0.5 * (K + K.conj().T)
    return NKPair.from_matrices(N, K, provenance=provenance, tol=tol)


def _circular_clusters(theta, gap):
    """Cluster angles on the circle; returns (representative, indices) pairs."""
    theta = np.mod(theta, TWO_PI)
    clusters = cluster_values(theta, gap)
    if len(clusters) > 1:
        first, last = clusters[0], clusters[-1]
        if theta[first].min() + TWO_PI - theta[last].max() <= gap:
            clusters = [np.concatenate([last, first])] + clusters[1:-1]
    out = []
    for idx in clusters:
        rep = np.mod(np.angle(np.mean(np.exp(1j * theta[idx]))), TWO_PI)
        out.append((float(rep), np.sort(idx)))
    out.sort(key=lambda item: item[0])
    return out


def _circ_dist(a, b):
    d = np.mod(np.asarray(a) - np.asarray(b), TWO_PI)
    return np.minimum(d, TWO_PI - d)


def classify(N, K, tol=DEFAULT_TOL):
    """Recover canonical parameters of a pair satisfying both structural conditions."""
    N, K = _square_pair(N, K)
    if not validate_consistency(N, K, tol).ok:
        raise NotCanonical("pair violates [N,K] = 0 or N^2 + K^2 = 1")
    if not validate_two_level_structure(N, K, tol):
        raise NotCanonical("N or K is not a real combination of 1 and a hermitian unitary")
    W, lam, eps = joint_diagonalize(N, K, tol)
    theta = np.mod(np.arctan2(eps, lam), TWO_PI)
    clusters = _circular_clusters(theta, ANGLE_GAP)
    l = N.shape[0]

    if len(clusters) == 1:
        (xi, idx), = clusters
        return CanonicalNK("angles", W.conj().T, p=l, q=0, xi=xi, eta=xi)

    if len(clusters) == 2:
        (t1, i1), (t2, i2) = clusters
        if abs(_circ_dist(t1, t2) - np.pi) <= ANGLE_GAP:
            # opposite points: a single angle with a common sign pattern
            if t1 < np.pi:
                xi, plus, minus = t1, i1, i2
            else:
                xi, plus, minus = t2, i2, i1
            order = np.concatenate([plus, minus])
            pattern = (1,) * plus.size + (-1,) * minus.size
            return CanonicalNK("signs", W[:, order].conj().T, xi=xi, sign_pattern=pattern)
        order = np.concatenate([i1, i2])
        return CanonicalNK("angles", W[:, order].conj().T, p=i1.size, q=i2.size, xi=t1, eta=t2)

    # three or four clusters can only be {xi, -xi, pi - xi, pi + xi}
    base = np.arctan2(np.abs(eps), np.abs(lam))
    xi = float(np.mean(base))
    if np.max(np.abs(base - xi)) > ANGLE_GAP or len(clusters) > 4:
        raise NotCanonical(f"{len(clusters)} distinct joint eigenvalue angles")
    r = tuple(int(v) for v in np.where(lam < 0, -1, 1))
    s = tuple(int(v) for v in np.where(eps < 0, -1, 1))
    return CanonicalNK("signs", W.conj().T, xi=xi, sign_pattern=r, sign_pattern_k=s)


def angle_multiset(obj):
    """Angles of the joint eigenvalues, for a CanonicalNK or an (N, K) tuple."""
    if isinstance(obj, CanonicalNK):
        return obj.angles()
    N, K = obj
    _, lam, eps = joint_diagonalize(*_square_pair(N, K))
    return np.mod(np.arctan2(eps, lam), TWO_PI)


def angle_multiset_distance(a, b):
    """Largest circular distance under the best one-to-one matching."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return np.inf
    if a.size == 0:
        return 0.0
    cost = _circ_dist(a[:, None], b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def column_split(psi0, V, tol=DEFAULT_TOL):
    """Columns ``psi0 @ v_k`` for the columns ``v_k`` of an invertible V.

    ``psi0`` may be a 4 x l matrix or a 4 x l FourierField; the result is a
    list of 4 x 1 objects of the same kind.
    """
    V = _check_invertible(V, tol)
    if psi0.shape[1] != V.shape[0]:
        raise ShapeMismatch(f"psi has {psi0.shape[1]} columns but V is {V.shape}")
    if isinstance(psi0, FourierField):
        return [psi0 @ V[:, k : k + 1] for k in range(V.shape[1])]
    psi0 = np.asarray(psi0, dtype=complex)
    return [psi0 @ V[:, k : k + 1] for k in range(V.shape[1])]
