"""Random draws used by the verification suites and the tests.

Everything takes an explicit :class:`numpy.random.Generator`; nothing touches
global random state, so a seed fully determines a run.
"""

import numpy as np

from .fields import FourierField

__all__ = [
    "make_rng",
    "complex_normal",
    "random_unitary",
    "random_antihermitian",
    "random_invertible",
    "on_shell_momentum",
    "off_shell_momentum",
    "real_field",
    "random_real_scalar_field",
    "random_lie_field",
]


def make_rng(seed):
    """PCG64 generator seeded from a 64-bit integer."""
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def complex_normal(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(rng, n):
    """Haar-distributed unitary via QR with the phase correction of Mezzadri."""
    q, r = np.linalg.qr(complex_normal(rng, (n, n)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_antihermitian(rng, n):
    a = complex_normal(rng, (n, n))
    return 0.5 * (a - a.conj().T)


def random_invertible(rng, n, max_cond=20.0):
    """Complex matrix with condition number at most ``max_cond``."""
    u = random_unitary(rng, n)
    v = random_unitary(rng, n)
    s = np.exp(rng.uniform(0.0, np.log(max_cond), size=n))
    s[0], s[-1] = 1.0, max_cond if n > 1 else 1.0
    return (u * s) @ v


def on_shell_momentum(rng, m, spatial_scale=1.0):
    """Covariant momentum with p_0^2 - |p|^2 = m^2 and random sign of energy."""
    k = spatial_scale * rng.standard_normal(3)
    e = np.sqrt(m * m + k @ k)
    if rng.random() < 0.5:
        e = -e
    return np.concatenate([[e], k])


def off_shell_momentum(rng, m, gap=0.5, spatial_scale=1.0):
    """Momentum whose energy misses the mass shell by at least ``gap``."""
    k = spatial_scale * rng.standard_normal(3)
    e = np.sqrt(m * m + k @ k) + gap * (1.0 + rng.random())
    return np.concatenate([[e], k])


def real_field(freqs, amplitudes, mats):
    """``sum_k (c_k e^{-i p_k.x} + conj(c_k) e^{+i p_k.x}) M_k``.

    The scalar profile multiplying each ``M_k`` is real, so when every
    ``M_k`` is antihermitian the field is antihermitian at every point.
    """
    freqs = np.asarray(freqs, dtype=float).reshape(-1, 4)
    amplitudes = np.asarray(amplitudes, dtype=complex).ravel()
    mats = np.asarray(mats, dtype=complex)
    coeffs = np.concatenate([amplitudes[:, None, None] * mats, np.conj(amplitudes)[:, None, None] * mats])
    return FourierField(np.concatenate([freqs, -freqs]), coeffs, shape=mats.shape[1:])


def random_real_scalar_field(rng, n_modes=2, freq_scale=1.0, amplitude=1.0):
    freqs = freq_scale * rng.standard_normal((n_modes, 4))
    amps = amplitude * complex_normal(rng, n_modes) / np.sqrt(2 * n_modes)
    return real_field(freqs, amps, np.ones((n_modes, 1, 1)))


def random_lie_field(rng, elements, n_modes=2, freq_scale=1.0, amplitude=1.0):
    """Random real combination of the given antihermitian matrices, one per mode."""
    elements = np.asarray(elements, dtype=complex)
    freqs = freq_scale * rng.standard_normal((n_modes, 4))
    weights = rng.standard_normal((n_modes, elements.shape[0]))
    mats = np.einsum("kj,jab->kab", weights, elements) / np.sqrt(elements.shape[0])
    amps = amplitude * complex_normal(rng, n_modes) / np.sqrt(2 * n_modes)
    return real_field(freqs, amps, mats)
