"""
Dirac gamma matrices in the Dirac representation.

The four matrices are built from Pauli blocks,

    gamma^0 = [[s0, 0], [0, -s0]],   gamma^k = [[0, -s_k], [s_k, 0]],

and gamma^5 = gamma^0 gamma^1 gamma^2 gamma^3.  With this sign convention
gamma^5 squares to -1 and is antihermitian.  All entries are Gaussian
integers, so the Clifford relations hold with zero floating point error.

Attributes
----------
METRIC : Metric
    Minkowski metric diag(1, -1, -1, -1).
BASIS_LABELS : tuple[str]
    Labels of the 16 basis elements in the order used by ``basis16``.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

__all__ = [
    "Metric",
    "GammaSet",
    "METRIC",
    "BASIS_LABELS",
    "build_dirac_gammas",
    "anticommutator",
    "decompose_in_basis",
    "reconstruct_from_basis",
    "slash",
]


@dataclass(frozen=True)
class Metric:
    g: np.ndarray
    signature: str = "(+,-,-,-)"

    def __post_init__(self):
        self.g.setflags(write=False)


METRIC = Metric(np.diag([1.0, -1.0, -1.0, -1.0]))


def _basis_index_sets():
    sets = [()]
    for r in (1, 2, 3, 4):
        sets.extend(combinations(range(4), r))
    return sets


BASIS_LABELS = tuple(
    "1" if not s else ("g5" if len(s) == 4 else "g" + "".join(map(str, s)))
    for s in _basis_index_sets()
)


@dataclass(frozen=True)
class GammaSet:
    """Immutable bundle of the Dirac matrices.

    Attributes
    ----------
    gamma : (4, 4, 4) complex ndarray
        ``gamma[mu]`` is gamma^mu (upper index).
    gamma5 : (4, 4) complex ndarray
    basis16 : (16, 4, 4) complex ndarray
        1, gamma^mu, gamma^{mu nu} (mu<nu), gamma^{mu nu la} (mu<nu<la), gamma^5.
    pauli : (4, 2, 2) complex ndarray
        sigma^0 (identity) and the three Pauli matrices.
    """

    gamma: np.ndarray
    gamma5: np.ndarray
    basis16: np.ndarray
    pauli: np.ndarray

    def __post_init__(self):
        for arr in (self.gamma, self.gamma5, self.basis16, self.pauli):
            arr.setflags(write=False)

    @property
    def gamma_lower(self):
        """gamma_mu = g_{mu nu} gamma^nu."""
        return np.einsum("mn,nab->mab", METRIC.g, self.gamma)


@lru_cache(maxsize=None)
def build_dirac_gammas():
    s0 = np.eye(2, dtype=complex)
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    pauli = np.stack([s0, s1, s2, s3])
    zero = np.zeros((2, 2), dtype=complex)

    g0 = np.block([[s0, zero], [zero, -s0]])
    gk = [np.block([[zero, -s], [s, zero]]) for s in (s1, s2, s3)]
    gamma = np.stack([g0, *gk])
    gamma5 = gamma[0] @ gamma[1] @ gamma[2] @ gamma[3]

    basis = []
    for idx in _basis_index_sets():
        mat = np.eye(4, dtype=complex)
        for mu in idx:
            mat = mat @ gamma[mu]
        basis.append(mat)
    return GammaSet(gamma=gamma, gamma5=gamma5, basis16=np.stack(basis), pauli=pauli)


def _check_index(mu):
    if not (isinstance(mu, (int, np.integer)) and 0 <= mu <= 3):
        raise IndexError(f"spacetime index must be in 0..3, got {mu!r}")


def anticommutator(mu, nu):
    """Return gamma^mu gamma^nu + gamma^nu gamma^mu."""
    _check_index(mu)
    _check_index(nu)
    g = build_dirac_gammas().gamma
    return g[mu] @ g[nu] + g[nu] @ g[mu]


@lru_cache(maxsize=None)
def _basis_system():
    # column i is the row-major flattening of basis16[i]
    return build_dirac_gammas().basis16.reshape(16, 16).T.copy()


def decompose_in_basis(M):
    """Coefficients ``c`` with ``sum_i c[i] * basis16[i] == M``.

    Solved as a dense 16x16 linear system; the basis is not orthonormal under
    the naive trace pairing, so no trace shortcut is used.
    """
    M = np.asarray(M, dtype=complex)
    if M.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {M.shape}")
    return np.linalg.solve(_basis_system(), M.reshape(16))


def reconstruct_from_basis(coeffs):
    coeffs = np.asarray(coeffs, dtype=complex)
    return np.einsum("i,iab->ab", coeffs, build_dirac_gammas().basis16)


def slash(p):
    """gamma^mu p_mu for a covariant 4-vector ``p``."""
    p = np.asarray(p, dtype=float)
    return np.einsum("m,mab->ab", p, build_dirac_gammas().gamma)
