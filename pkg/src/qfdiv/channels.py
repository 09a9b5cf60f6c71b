"""Quantum channels in Kraus form, Stinespring isometries, Petz recovery."""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import InvalidInput
from .linalg import (as_hermitian, as_matrix, check_dims, matrix_power,
                     partial_trace, require_positive_definite)
from .states import _ginibre, make_rng

COMPLETENESS_TOL = 1e-10


@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map ``X -> sum_i K_i X K_i^dag`` with ``sum_i K_i^dag K_i = I``."""

    kraus: Tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(as_matrix(K) for K in self.kraus)
        if not ops:
            raise InvalidInput("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(K.shape != shape for K in ops):
            raise InvalidInput("Kraus operators must share one shape")
        S = sum(K.conj().T @ K for K in ops)
        err = float(np.max(np.abs(S - np.eye(shape[1]))))
        if err > COMPLETENESS_TOL:
            raise InvalidInput(f"Kraus operators are not complete (error {err:.3e})")
        object.__setattr__(self, "kraus", ops)

    @property
    def input_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.kraus[0].shape[0]

    def __call__(self, X) -> np.ndarray:
        return apply_channel(self, X)


def apply_channel(ch: QuantumChannel, X) -> np.ndarray:
    X = as_hermitian(X)
    if X.shape[0] != ch.input_dim:
        raise InvalidInput(
            f"channel expects input dimension {ch.input_dim}, got {X.shape[0]}")
    out = sum(K @ X @ K.conj().T for K in ch.kraus)
    return 0.5 * (out + out.conj().T)


def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel((np.eye(d),))


def depolarizing_qubit_channel() -> QuantumChannel:
    """Completely depolarizing qubit channel, ``X -> Tr{X} I/2``."""
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]),
              np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0])]
    return QuantumChannel(tuple(P / 2 for P in paulis))


def random_channel(d_in: int, d_out: int, n_kraus: int, seed=None) -> QuantumChannel:
    """Slice an orthonormalized Gaussian ``(d_out*n_kraus) x d_in`` block into Kraus ops."""
    if min(d_in, d_out, n_kraus) < 1:
        raise InvalidInput("dimensions and Kraus count must be positive")
    if d_out * n_kraus < d_in:
        raise InvalidInput(
            f"{n_kraus} Kraus operators of shape {d_out}x{d_in} cannot be complete")
    rng = make_rng(seed)
    Q, _ = np.linalg.qr(_ginibre(rng, d_out * n_kraus, d_in))
    return QuantumChannel(tuple(Q[i * d_out:(i + 1) * d_out] for i in range(n_kraus)))


def stinespring_isometry(ch: QuantumChannel) -> np.ndarray:
    """``V = sum_i K_i (x) |i>_E``, output index ``b * n_kraus + e``."""
    n = len(ch.kraus)
    V = np.zeros((ch.output_dim * n, ch.input_dim), dtype=complex)
    for i, K in enumerate(ch.kraus):
        e = np.zeros((n, 1))
        e[i] = 1.0
        V += np.kron(K, e)
    return V


def apply_via_stinespring(ch: QuantumChannel, X) -> np.ndarray:
    """``Tr_E{V X V^dag}``; agrees with ``apply_channel``."""
    V = stinespring_isometry(ch)
    out = partial_trace(V @ as_hermitian(X) @ V.conj().T, [ch.output_dim, len(ch.kraus)], 0)
    return 0.5 * (out + out.conj().T)


def check_isometry(V, tol: float = 1e-10) -> np.ndarray:
    V = as_matrix(V)
    if V.shape[0] < V.shape[1]:
        raise InvalidInput(f"an isometry needs rows >= cols, got {V.shape}")
    err = float(np.max(np.abs(V.conj().T @ V - np.eye(V.shape[1]))))
    if err > tol:
        raise InvalidInput(f"V^dag V deviates from the identity by {err:.3e}")
    return V


def _petz_factors(X_AB, dims: Sequence[int]):
    X_AB = require_positive_definite(X_AB, "X_AB")
    dA, dB = check_dims(dims, X_AB.shape[0])
    X_A = require_positive_definite(partial_trace(X_AB, (dA, dB), 0), "X_A")
    return matrix_power(X_AB, 0.5), matrix_power(X_A, -0.5), dA, dB


def petz_recovery_channel(X_AB, dims: Sequence[int]) -> QuantumChannel:
    """Channel ``Z_A -> X_AB^{1/2} ([X_A^{-1/2} Z_A X_A^{-1/2}] (x) I_B) X_AB^{1/2}``.

    Kraus operators are ``X_AB^{1/2} (X_A^{-1/2} (x) |j>_B)``, one per basis
    vector of B; it maps ``X_A = Tr_B X_AB`` back to ``X_AB``.
    """
    sqrt_AB, inv_sqrt_A, dA, dB = _petz_factors(X_AB, dims)
    kraus = []
    for j in range(dB):
        ket = np.zeros((dB, 1))
        ket[j] = 1.0
        kraus.append(sqrt_AB @ np.kron(inv_sqrt_A, ket))
    return QuantumChannel(tuple(kraus))


def petz_recovery_isometry(X_AB, dims: Sequence[int]) -> np.ndarray:
    """Isometric extension ``X_AB^{1/2} [X_A^{-1/2} (x) I_Ahat] |Gamma>_{B Bhat}``.

    Maps the doubled space (A, Ahat) into (A, B, Ahat, Bhat), the factor
    order used by ``purification`` for an AB operator, so that
    ``V @ purification(X_A) == purification(X_AB)``.
    """
    sqrt_AB, inv_sqrt_A, dA, dB = _petz_factors(X_AB, dims)
    # W0 |a, ahat> = sum_b |a, b, ahat, b>
    W0 = np.zeros((dA, dB, dA, dB, dA, dA), dtype=complex)
    for a in range(dA):
        for ah in range(dA):
            for b in range(dB):
                W0[a, b, ah, b, a, ah] = 1.0
    W0 = W0.reshape(dA * dB * dA * dB, dA * dA)
    n = dA * dB
    return np.kron(sqrt_AB, np.eye(n)) @ W0 @ np.kron(inv_sqrt_A, np.eye(dA))
