"""
Matrix-valued fields on R^4.

Two kinds of field are provided:

* :class:`FourierField` -- a finite sum ``sum_k C_k exp(-i p_k . x)`` with
  ``p . x = sum_mu p_mu x^mu``.  Differentiation, products and adjoints act
  on the terms, so every identity checked on these fields is exact up to
  rounding.
* Composite fields (:class:`ProductField`, :class:`GaugeTransformField`, ...)
  that are not finite exponential sums.  They are evaluated lazily at a point
  and supply first and second derivatives through the product and chain
  rules.

Every field implements the :class:`PointField` protocol.
"""

from typing import Protocol, runtime_checkable

import numpy as np

from .errors import MatDiracError, NotAntihermitian, ShapeMismatch, TermBudgetExceeded
from .gamma import build_dirac_gammas
from .serialization import matrix_from_json, matrix_to_json

__all__ = [
    "PointField",
    "FourierField",
    "ProductField",
    "SumField",
    "ConstMulField",
    "AdjointField",
    "LinearMapField",
    "DerivativeField",
    "GaugeTransformField",
    "differentiate",
    "multiply",
    "add",
    "dirac_adjoint",
    "evaluate",
    "lmul",
    "rmul",
    "finite_difference_error",
    "DEFAULT_TERM_BUDGET",
]

DEFAULT_TERM_BUDGET = 4096


@runtime_checkable
class PointField(Protocol):
    shape: tuple

    def value(self, x): ...

    def derivative(self, mu, x): ...

    def second_derivative(self, mu, nu, x): ...


def _x(x):
    x = np.asarray(x, dtype=float)
    if x.shape != (4,):
        raise ValueError(f"spacetime point must have 4 coordinates, got shape {x.shape}")
    return x


class FourierField:
    """Finite sum of matrix-valued complex exponentials.

    Parameters
    ----------
    freqs : (n, 4) array_like
        Covariant frequencies ``p_k``.
    coeffs : (n, rows, cols) array_like
        Matrix amplitudes ``C_k``.
    shape : tuple, optional
        ``(rows, cols)``; required when there are no terms.
    term_budget : int
        Maximum number of distinct frequencies after merging.

    Terms with bitwise-identical frequencies are merged and exactly-zero
    amplitudes are dropped.  Instances are treated as immutable.
    """

    __slots__ = ("freqs", "coeffs", "shape", "term_budget")
    # make ``ndarray @ field`` and ``scalar * field`` defer to this class
    __array_ufunc__ = None

    def __init__(self, freqs, coeffs, shape=None, term_budget=DEFAULT_TERM_BUDGET):
        freqs = np.asarray(freqs, dtype=float).reshape(-1, 4)
        coeffs = np.asarray(coeffs, dtype=complex)
        if shape is None:
            if coeffs.ndim != 3 or coeffs.shape[0] == 0:
                raise ShapeMismatch("shape must be given for a field without terms")
            shape = coeffs.shape[1:]
        shape = (int(shape[0]), int(shape[1]))
        coeffs = coeffs.reshape((-1,) + shape)
        if coeffs.shape[0] != freqs.shape[0]:
            raise ShapeMismatch(f"{freqs.shape[0]} frequencies but {coeffs.shape[0]} amplitudes")
        if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(coeffs))):
            raise MatDiracError("field terms must be finite")

        if freqs.shape[0] > 1:
            # + 0.0 folds -0.0 into +0.0 so bitwise and value equality agree
            uniq, inverse = np.unique(freqs + 0.0, axis=0, return_inverse=True)
            if uniq.shape[0] < freqs.shape[0]:
                merged = np.zeros((uniq.shape[0],) + shape, dtype=complex)
                np.add.at(merged, inverse.ravel(), coeffs)
                freqs, coeffs = uniq, merged
        keep = np.any(coeffs != 0, axis=(1, 2))
        freqs, coeffs = freqs[keep], coeffs[keep]
        if freqs.shape[0] > term_budget:
            raise TermBudgetExceeded(
                f"{freqs.shape[0]} distinct frequencies exceed the budget of {term_budget}"
            )
        freqs.setflags(write=False)
        coeffs.setflags(write=False)
        self.freqs = freqs
        self.coeffs = coeffs
        self.shape = shape
        self.term_budget = term_budget

    # construction helpers

    @classmethod
    def zeros(cls, rows, cols):
        return cls(np.zeros((0, 4)), np.zeros((0, rows, cols)), shape=(rows, cols))

    @classmethod
    def constant(cls, C):
        C = np.atleast_2d(np.asarray(C, dtype=complex))
        return cls(np.zeros((1, 4)), C[None])

    @classmethod
    def plane_wave(cls, p, C):
        C = np.atleast_2d(np.asarray(C, dtype=complex))
        return cls(np.asarray(p, dtype=float)[None], C[None])

    @property
    def n_terms(self):
        return self.freqs.shape[0]

    def __repr__(self):
        return f"FourierField(shape={self.shape}, n_terms={self.n_terms})"

    def _new(self, freqs, coeffs, shape=None):
        return FourierField(freqs, coeffs, shape=shape or self.shape, term_budget=self.term_budget)

    # evaluation

    def _phases(self, x):
        return np.exp(-1j * (self.freqs @ _x(x)))

    def value(self, x):
        return np.einsum("k,kab->ab", self._phases(x), self.coeffs)

    def derivative(self, mu, x):
        w = -1j * self.freqs[:, mu] * self._phases(x)
        return np.einsum("k,kab->ab", w, self.coeffs)

    def second_derivative(self, mu, nu, x):
        w = -self.freqs[:, mu] * self.freqs[:, nu] * self._phases(x)
        return np.einsum("k,kab->ab", w, self.coeffs)

    def coeff_norm(self):
        """Sum of amplitude Frobenius norms; bounds the sup norm of the field."""
        if self.n_terms == 0:
            return 0.0
        return float(np.sum(np.linalg.norm(self.coeffs, axis=(1, 2))))

    # exact algebra

    def differentiate(self, mu):
        return self._new(self.freqs, (-1j * self.freqs[:, mu])[:, None, None] * self.coeffs)

    def map_coeffs(self, fn, shape=None):
        """Apply a complex-linear matrix map to every amplitude."""
        if self.n_terms == 0:
            out_shape = shape or np.shape(fn(np.zeros(self.shape, dtype=complex)))
            return FourierField.zeros(*out_shape)
        mapped = np.stack([fn(c) for c in self.coeffs])
        return self._new(self.freqs, mapped, shape=mapped.shape[1:])

    def dagger(self):
        """Pointwise conjugate transpose; frequencies flip sign."""
        return self._new(-self.freqs, np.conj(np.swapaxes(self.coeffs, 1, 2)), shape=self.shape[::-1])

    def times_matrix(self, M):
        """Scalar (1x1) field times a constant matrix."""
        if self.shape != (1, 1):
            raise ShapeMismatch("times_matrix needs a 1x1 field")
        M = np.asarray(M, dtype=complex)
        return self._new(self.freqs, self.coeffs[:, 0, 0, None, None] * M[None], shape=M.shape)

    def is_real(self, atol=0.0):
        """True when every term (p, C) is matched by (-p, conj(C))."""
        table = {tuple(p): c for p, c in zip(self.freqs + 0.0, self.coeffs)}
        for p, c in table.items():
            partner = table.get(tuple(-np.asarray(p) + 0.0))
            if partner is None or np.max(np.abs(partner - np.conj(c))) > atol:
                return False
        return True

    def __add__(self, other):
        if not isinstance(other, FourierField):
            return NotImplemented
        if other.shape != self.shape:
            raise ShapeMismatch(f"cannot add fields of shapes {self.shape} and {other.shape}")
        return self._new(
            np.concatenate([self.freqs, other.freqs]),
            np.concatenate([self.coeffs, other.coeffs]),
        )

    def __neg__(self):
        return self._new(self.freqs, -self.coeffs)

    def __sub__(self, other):
        if not isinstance(other, FourierField):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, (FourierField, np.ndarray)):
            return NotImplemented
        return self._new(self.freqs, complex(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, FourierField):
            if self.shape[1] != other.shape[0]:
                raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
            shape = (self.shape[0], other.shape[1])
            if self.n_terms == 0 or other.n_terms == 0:
                return FourierField.zeros(*shape)
            freqs = (self.freqs[:, None, :] + other.freqs[None, :, :]).reshape(-1, 4)
            coeffs = np.einsum("iab,jbc->ijac", self.coeffs, other.coeffs).reshape((-1,) + shape)
            return FourierField(freqs, coeffs, shape=shape, term_budget=min(self.term_budget, other.term_budget))
        M = np.asarray(other, dtype=complex)
        if M.ndim != 2 or M.shape[0] != self.shape[1]:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {M.shape}")
        return self._new(self.freqs, self.coeffs @ M, shape=(self.shape[0], M.shape[1]))

    def __rmatmul__(self, other):
        M = np.asarray(other, dtype=complex)
        if M.ndim != 2 or M.shape[1] != self.shape[0]:
            raise ShapeMismatch(f"cannot multiply {M.shape} by {self.shape}")
        return self._new(self.freqs, M @ self.coeffs, shape=(M.shape[0], self.shape[1]))

    # serialization

    def to_json(self):
        return {
            "rows": self.shape[0],
            "cols": self.shape[1],
            "terms": [
                {"p": [float(v) for v in p], "C": matrix_to_json(c)}
                for p, c in zip(self.freqs, self.coeffs)
            ],
        }

    @classmethod
    def from_json(cls, obj, term_budget=DEFAULT_TERM_BUDGET):
        try:
            shape = (int(obj["rows"]), int(obj["cols"]))
            terms = obj["terms"]
            freqs = np.array([t["p"] for t in terms], dtype=float).reshape(-1, 4)
            coeffs = np.array([matrix_from_json(t["C"]) for t in terms]).reshape((-1,) + shape)
        except (KeyError, TypeError, ValueError) as exc:
            raise MatDiracError(f"malformed field JSON: {exc}") from exc
        return cls(freqs, coeffs, shape=shape, term_budget=term_budget)


class ProductField:
    """Pointwise product ``A(x) @ B(x)`` with Leibniz-rule derivatives."""

    def __init__(self, a, b):
        if a.shape[1] != b.shape[0]:
            raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
        self.a, self.b = a, b
        self.shape = (a.shape[0], b.shape[1])

    def value(self, x):
        return self.a.value(x) @ self.b.value(x)

    def derivative(self, mu, x):
        return self.a.derivative(mu, x) @ self.b.value(x) + self.a.value(x) @ self.b.derivative(mu, x)

    def second_derivative(self, mu, nu, x):
        a, b = self.a, self.b
        return (
            a.second_derivative(mu, nu, x) @ b.value(x)
            + a.derivative(mu, x) @ b.derivative(nu, x)
            + a.derivative(nu, x) @ b.derivative(mu, x)
            + a.value(x) @ b.second_derivative(mu, nu, x)
        )


class SumField:
    """``sum_i w_i F_i`` for scalar weights ``w_i``."""

    def __init__(self, fields, weights=None):
        fields = list(fields)
        if not fields:
            raise ValueError("SumField needs at least one field")
        shape = tuple(fields[0].shape)
        for f in fields:
            if tuple(f.shape) != shape:
                raise ShapeMismatch(f"cannot add fields of shapes {shape} and {f.shape}")
        self.fields = fields
        self.weights = [1.0] * len(fields) if weights is None else list(weights)
        self.shape = shape

    def _combine(self, getter):
        return sum(w * getter(f) for w, f in zip(self.weights, self.fields))

    def value(self, x):
        return self._combine(lambda f: f.value(x))

    def derivative(self, mu, x):
        return self._combine(lambda f: f.derivative(mu, x))

    def second_derivative(self, mu, nu, x):
        return self._combine(lambda f: f.second_derivative(mu, nu, x))


class LinearMapField:
    """Pointwise application of a fixed linear map ``fn`` to a field.

    Because ``fn`` is linear and constant it commutes with differentiation.
    """

    def __init__(self, field, fn, shape=None):
        self.field = field
        self.fn = fn
        self.shape = shape or np.shape(fn(np.zeros(field.shape, dtype=complex)))

    def value(self, x):
        return self.fn(self.field.value(x))

    def derivative(self, mu, x):
        return self.fn(self.field.derivative(mu, x))

    def second_derivative(self, mu, nu, x):
        return self.fn(self.field.second_derivative(mu, nu, x))


class ConstMulField(LinearMapField):
    """``L @ F(x) @ R`` with constant matrices (either may be None)."""

    def __init__(self, field, left=None, right=None):
        L = None if left is None else np.asarray(left, dtype=complex)
        R = None if right is None else np.asarray(right, dtype=complex)

        def fn(v):
            if L is not None:
                v = L @ v
            if R is not None:
                v = v @ R
            return v

        rows = field.shape[0] if L is None else L.shape[0]
        cols = field.shape[1] if R is None else R.shape[1]
        super().__init__(field, fn, shape=(rows, cols))


class AdjointField(LinearMapField):
    """Pointwise conjugate transpose (real-linear; commutes with real derivatives)."""

    def __init__(self, field):
        super().__init__(field, lambda v: np.conj(v.T), shape=tuple(field.shape)[::-1])


class DerivativeField:
    """``d_mu F`` as a field; supports one further derivative."""

    def __init__(self, field, mu):
        self.field, self.mu = field, mu
        self.shape = tuple(field.shape)

    def value(self, x):
        return self.field.derivative(self.mu, x)

    def derivative(self, nu, x):
        return self.field.second_derivative(self.mu, nu, x)

    def second_derivative(self, nu, rho, x):
        raise NotImplementedError("third derivatives are not tracked")


class GaugeTransformField:
    """``V(x) = exp(phi(x) * theta)`` for antihermitian ``theta`` and real scalar ``phi``.

    ``theta`` commutes with itself, so ``d_mu V = (d_mu phi) theta V`` and
    ``d_mu d_nu V = (d_mu d_nu phi theta + d_mu phi d_nu phi theta^2) V``
    hold exactly.
    """

    def __init__(self, theta, phi, atol=1e-12):
        theta = np.asarray(theta, dtype=complex)
        if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
            raise ShapeMismatch(f"generator must be square, got {theta.shape}")
        if np.linalg.norm(theta + theta.conj().T) > atol * max(1.0, np.linalg.norm(theta)):
            raise NotAntihermitian("generator must be antihermitian")
        if not isinstance(phi, FourierField) or phi.shape != (1, 1):
            raise ShapeMismatch("phi must be a 1x1 FourierField")
        if not phi.is_real(atol=atol * max(1.0, phi.coeff_norm())):
            raise MatDiracError("phi must be a real-valued field")
        self.theta = theta
        self.phi = phi
        self.shape = theta.shape
        # -i theta is hermitian: theta = W diag(i w) W^H
        w, W = np.linalg.eigh(-1j * theta)
        self._w, self._W = w, W

    def inverse(self):
        return GaugeTransformField(self.theta, -self.phi)

    def _phi(self, x):
        return float(np.real(self.phi.value(x)[0, 0]))

    def value(self, x):
        W = self._W
        return (W * np.exp(1j * self._phi(x) * self._w)) @ W.conj().T

    def derivative(self, mu, x):
        dphi = float(np.real(self.phi.derivative(mu, x)[0, 0]))
        return dphi * self.theta @ self.value(x)

    def second_derivative(self, mu, nu, x):
        phi = self.phi
        d_mu = float(np.real(phi.derivative(mu, x)[0, 0]))
        d_nu = float(np.real(phi.derivative(nu, x)[0, 0]))
        d_mn = float(np.real(phi.second_derivative(mu, nu, x)[0, 0]))
        th = self.theta
        return (d_mn * th + d_mu * d_nu * th @ th) @ self.value(x)

    def maurer_cartan(self, mu):
        """``V^{-1} d_mu V = (d_mu phi) theta`` as an exact FourierField."""
        return self.phi.differentiate(mu).times_matrix(self.theta)


# dispatching operations ------------------------------------------------------


def differentiate(F, mu):
    if not 0 <= mu <= 3:
        raise IndexError(f"spacetime index must be in 0..3, got {mu}")
    if isinstance(F, FourierField):
        return F.differentiate(mu)
    return DerivativeField(F, mu)


def multiply(F, G):
    if isinstance(F, FourierField) and isinstance(G, FourierField):
        return F @ G
    if isinstance(G, np.ndarray):
        return rmul(F, G)
    if isinstance(F, np.ndarray):
        return lmul(F, G)
    return ProductField(F, G)


def add(*fields, weights=None):
    if all(isinstance(f, FourierField) for f in fields):
        ws = [1.0] * len(fields) if weights is None else weights
        out = ws[0] * fields[0]
        for w, f in zip(ws[1:], fields[1:]):
            out = out + w * f
        return out
    return SumField(fields, weights)


def lmul(L, F):
    if isinstance(F, FourierField):
        return np.asarray(L, dtype=complex) @ F
    return ConstMulField(F, left=L)


def rmul(F, R):
    if isinstance(F, FourierField):
        return F @ np.asarray(R, dtype=complex)
    return ConstMulField(F, right=R)


def dirac_adjoint(psi):
    """``psi_bar = psi^H gamma^0`` for a 4 x l field."""
    if tuple(psi.shape)[0] != 4:
        raise ShapeMismatch(f"Dirac adjoint needs 4 rows, got shape {psi.shape}")
    g0 = build_dirac_gammas().gamma[0]
    if isinstance(psi, FourierField):
        return psi.dagger() @ g0
    return ConstMulField(AdjointField(psi), right=g0)


def evaluate(F, x):
    return F.value(x)


def finite_difference_error(F, x, h=1e-4, order=1):
    """Largest relative gap between analytic and central-difference derivatives.

    ``order=1`` compares ``derivative`` with differences of ``value``;
    ``order=2`` compares ``second_derivative`` with differences of
    ``derivative``.  Relative to ``max(1, |analytic|)``.
    """
    x = _x(x)
    worst = 0.0
    for mu in range(4):
        e = np.zeros(4)
        e[mu] = h
        if order == 1:
            fd = (F.value(x + e) - F.value(x - e)) / (2 * h)
            exact = F.derivative(mu, x)
            worst = max(worst, np.linalg.norm(fd - exact) / max(1.0, np.linalg.norm(exact)))
        else:
            for nu in range(4):
                fd = (F.derivative(nu, x + e) - F.derivative(nu, x - e)) / (2 * h)
                exact = F.second_derivative(mu, nu, x)
                worst = max(worst, np.linalg.norm(fd - exact) / max(1.0, np.linalg.norm(exact)))
    return float(worst)
