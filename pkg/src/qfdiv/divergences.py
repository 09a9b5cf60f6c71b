"""Petz and optimized f-divergence objectives and closed-form divergences.

All values are in nats.

The quadratic form ``<phi^X| f(T^{-1} (x) Y^T) |phi^X>`` is evaluated two
ways. ``method="direct"`` builds the ``d^2``-dimensional operator and the
purification literally. ``method="spectral"`` (default) uses the Kronecker
eigenstructure: with ``T = U diag(t) U^dag`` and ``Y = W diag(y) W^dag`` the
value is ``sum_ij f(y_j / t_i) |(U^dag X^{1/2} W)_ij|^2``.
"""

import numpy as np

from .errors import DomainViolation, InvalidInput
from .functions import AntiMonotoneFunction
from .linalg import (_eigh, as_hermitian, kron, matrix_function, matrix_power,
                     require_positive_definite, schatten_quasi_norm,
                     transpose_in_basis)
from .states import purification

ALPHA_ONE_GAP = 1e-6
TRACE_TOL = 1e-10


def _pair(X, Y):
    X = require_positive_definite(X, "X")
    Y = require_positive_definite(Y, "Y")
    if X.shape != Y.shape:
        raise InvalidInput(f"X and Y differ in shape: {X.shape} vs {Y.shape}")
    return X, Y


def _quadratic_form_direct(X, Y, T, f) -> float:
    phi = purification(X)
    op = matrix_function(kron(matrix_power(T, -1.0), transpose_in_basis(Y)), f)
    return float(np.real(np.vdot(phi, op @ phi)))


def _overlap_weights(sqrt_X, U, W) -> np.ndarray:
    M = U.conj().T @ sqrt_X @ W
    return np.abs(M) ** 2


def _quadratic_form_spectral(sqrt_X, t, U, y, W, f) -> float:
    ratios = y[None, :] / t[:, None]
    return float(np.sum(np.asarray(f(ratios), dtype=float) * _overlap_weights(sqrt_X, U, W)))


def petz_f_divergence(X, Y, f: AntiMonotoneFunction, method: str = "spectral") -> float:
    """``Q_f(X||Y) = <phi^X| f(X^{-1} (x) Y^T) |phi^X>``."""
    X, Y = _pair(X, Y)
    if method == "direct":
        return _quadratic_form_direct(X, Y, X, f)
    if method != "spectral":
        raise InvalidInput(f"unknown method {method!r}")
    x, U = _eigh(X)
    y, W = _eigh(Y)
    # with T = X, U^dag X^{1/2} W = diag(sqrt x) U^dag W
    weights = x[:, None] * np.abs(U.conj().T @ W) ** 2
    return float(np.sum(np.asarray(f(y[None, :] / x[:, None]), dtype=float) * weights))


def optimized_objective(X, Y, tau, f: AntiMonotoneFunction, method: str = "spectral") -> float:
    """``<phi^X| f(tau^{-1} (x) Y^T) |phi^X>`` for one candidate ``tau``."""
    X, Y = _pair(X, Y)
    tau = require_positive_definite(tau, "tau")
    if tau.shape != X.shape:
        raise InvalidInput("tau must act on the same space as X")
    if np.trace(tau).real > 1.0 + TRACE_TOL:
        raise DomainViolation(f"tau has trace {np.trace(tau).real:.12g} > 1")
    if method == "direct":
        return _quadratic_form_direct(X, Y, tau, f)
    if method != "spectral":
        raise InvalidInput(f"unknown method {method!r}")
    t, U = _eigh(tau)
    y, W = _eigh(Y)
    return _quadratic_form_spectral(matrix_power(X, 0.5), t, U, y, W, f)


def _xlogx_trace(X) -> float:
    w = np.linalg.eigvalsh(X)
    return float(np.sum(w * np.log(w)))


def _trace_x_log_y(X, Y) -> float:
    y, W = _eigh(Y)
    # Tr{X log Y} = sum_j log(y_j) <w_j|X|w_j>
    diag = np.real(np.einsum("ij,ik,kj->j", W.conj(), X, W))
    return float(np.sum(diag * np.log(y)))


def quantum_relative_entropy(X, Y) -> float:
    """``D(Xbar||Y) = Tr{Xbar (log Xbar - log Y)}`` with ``Xbar = X / Tr X``."""
    X, Y = _pair(X, Y)
    Xbar = X / np.trace(X).real
    return _xlogx_trace(Xbar) - _trace_x_log_y(Xbar, Y)


def _check_alpha_not_one(alpha):
    if abs(alpha - 1.0) < ALPHA_ONE_GAP:
        raise InvalidInput(
            f"alpha = {alpha} is within {ALPHA_ONE_GAP:g} of 1; use the relative entropy instead")


def petz_renyi(X, Y, alpha: float) -> float:
    """``D_alpha(X||Y) = log Tr{X^alpha Y^{1-alpha}} / (alpha - 1)``, alpha in (0,1) u (1,2]."""
    alpha = float(alpha)
    _check_alpha_not_one(alpha)
    if not (0.0 < alpha < 1.0 or 1.0 < alpha <= 2.0):
        raise InvalidInput(f"Petz-Renyi needs alpha in (0, 1) or (1, 2], got {alpha}")
    X, Y = _pair(X, Y)
    q = np.trace(matrix_power(X, alpha) @ matrix_power(Y, 1.0 - alpha)).real
    return float(np.log(q) / (alpha - 1.0))


def sandwiched_operator(X, Y, alpha: float) -> np.ndarray:
    """``Y^{(1-alpha)/2alpha} X Y^{(1-alpha)/2alpha}``."""
    S = matrix_power(Y, (1.0 - alpha) / (2.0 * alpha))
    Z = S @ X @ S
    return 0.5 * (Z + Z.conj().T)


def sandwiched_quasi_norm(X, Y, alpha: float) -> float:
    """``||Y^{(1-alpha)/2alpha} X Y^{(1-alpha)/2alpha}||_alpha``."""
    X, Y = _pair(X, Y)
    return schatten_quasi_norm(sandwiched_operator(X, Y, alpha), alpha)


def sandwiched_renyi(X, Y, alpha: float) -> float:
    """``(alpha/(alpha-1)) log ||Y^{(1-alpha)/2alpha} X Y^{(1-alpha)/2alpha}||_alpha``."""
    alpha = float(alpha)
    _check_alpha_not_one(alpha)
    if not (0.5 <= alpha < 1.0 or 1.0 < alpha < np.inf):
        raise InvalidInput(f"sandwiched Renyi needs alpha in [1/2, 1) or (1, inf), got {alpha}")
    return float(alpha / (alpha - 1.0) * np.log(sandwiched_quasi_norm(X, Y, alpha)))


def classical_f_divergence(p, q, f) -> float:
    """``sum_x q(x) f(p(x)/q(x))`` for strictly positive distributions.

    Note the argument order: on commuting inputs the Petz divergence
    ``Q_f(diag p || diag q)`` equals ``classical_f_divergence(q, p, f)``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.ndim != 1 or p.shape != q.shape:
        raise InvalidInput("p and q must be 1-d arrays of equal length")
    if np.any(p <= 0) or np.any(q <= 0):
        raise InvalidInput("distributions must be strictly positive")
    for name, v in (("p", p), ("q", q)):
        if abs(v.sum() - 1.0) > 1e-12:
            raise InvalidInput(f"{name} sums to {v.sum():.15g}, not 1")
    return float(np.sum(q * np.asarray(f(p / q), dtype=float)))


def fidelity(X, Y) -> float:
    """Root fidelity ``Tr{(Y^{1/2} X Y^{1/2})^{1/2}}``."""
    X, Y = _pair(X, Y)
    S = matrix_power(Y, 0.5)
    w = np.linalg.eigvalsh(as_hermitian(S @ X @ S))
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))
