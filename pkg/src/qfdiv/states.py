"""Vectorized states and seeded random generators.

Random draws go through a Philox (counter-based) bit generator keyed by a
``SeedSequence``; every function taking ``seed`` also accepts an existing
``numpy.random.Generator`` so trials can share one stream.
"""

import numpy as np

from .errors import InvalidInput
from .linalg import as_hermitian, matrix_power, require_positive_definite

MAX_CONDITION = 1e6


def make_rng(seed=None, *spawn_key) -> np.random.Generator:
    """Generator for ``seed``; extra integers select an independent substream."""
    if isinstance(seed, np.random.Generator):
        if spawn_key:
            raise InvalidInput("cannot derive a substream from a live generator")
        return seed
    if seed is not None:
        seed = int(seed)
        if seed < 0:
            raise InvalidInput("seed must be non-negative")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.Philox(ss))


def gamma_vector(d: int) -> np.ndarray:
    """Unnormalized maximally entangled vector ``sum_i |i>|i>``."""
    d = int(d)
    if d < 1:
        raise InvalidInput("dimension must be positive")
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0
    return v


def purification(X) -> np.ndarray:
    """``(X^{1/2} (x) I)|Gamma>``; squared norm equals ``Tr X``.

    With the row-major composite index this is just ``X^{1/2}`` flattened.
    """
    X = require_positive_definite(X, "X")
    return matrix_power(X, 0.5).reshape(-1)


def _ginibre(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hermitian(d: int, seed=None) -> np.ndarray:
    """GUE-distributed Hermitian matrix."""
    rng = make_rng(seed)
    G = _ginibre(rng, d, d)
    return 0.5 * (G + G.conj().T)


def random_density(d: int, seed=None, max_condition: float = MAX_CONDITION) -> np.ndarray:
    """Invertible density operator ``GG^dag / Tr GG^dag`` from a Ginibre ``G``.

    Draws with condition number above ``max_condition`` are rejected.
    """
    d = int(d)
    if d < 1:
        raise InvalidInput("dimension must be positive")
    rng = make_rng(seed)
    while True:
        G = _ginibre(rng, d, d)
        rho = G @ G.conj().T
        rho = 0.5 * (rho + rho.conj().T)
        w = np.linalg.eigvalsh(rho)
        if w[0] > 0 and w[-1] / w[0] <= max_condition:
            return rho / np.trace(rho).real


def random_isometry(d_in: int, d_out: int, seed=None) -> np.ndarray:
    """Haar-random isometry (``d_out x d_in``, orthonormal columns)."""
    if d_out < d_in or d_in < 1:
        raise InvalidInput(f"no isometry from dimension {d_in} into {d_out}")
    rng = make_rng(seed)
    Q, R = np.linalg.qr(_ginibre(rng, d_out, d_in))
    # fix the phase ambiguity of QR so the distribution is Haar
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_unitary(d: int, seed=None) -> np.ndarray:
    return random_isometry(d, d, seed)


def is_density(rho, tol: float = 1e-10) -> bool:
    try:
        rho = as_hermitian(rho)
    except InvalidInput:
        return False
    w = np.linalg.eigvalsh(rho)
    return abs(np.sum(w) - 1.0) <= tol and w[0] > 0 and w[0] > 1e-12 * w[-1]
