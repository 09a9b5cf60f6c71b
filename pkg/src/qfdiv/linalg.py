"""Dense complex Hermitian linear algebra.

Matrices are plain ``numpy`` arrays. Bipartite operators use the composite
index ``i_A * d_B + i_B`` (row-major, what ``np.kron`` produces).
"""

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DomainViolation, InvalidInput, NumericalFailure

HERMITIAN_TOL = 1e-12
DOMAIN_FLOOR = 1e-12
# relative: min eigenvalue must exceed this times the max eigenvalue
INVERTIBLE_RTOL = 1e-12
PSD_TOL = 1e-12

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise InvalidInput(f"expected a 2-d array, got shape {M.shape}")
    if M.size == 0:
        raise InvalidInput("empty matrix")
    if not np.all(np.isfinite(M)):
        raise InvalidInput("matrix has non-finite entries")
    return M


def max_norm(M) -> float:
    """Largest absolute entry."""
    return float(np.max(np.abs(M)))


def is_hermitian(H, tol: float = HERMITIAN_TOL) -> bool:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        return False
    scale = max(1.0, max_norm(H))
    return max_norm(H - H.conj().T) <= tol * scale


def as_hermitian(H, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``H`` and return its exactly symmetrized copy."""
    H = as_matrix(H)
    if H.shape[0] != H.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {H.shape}")
    if not is_hermitian(H, tol):
        raise InvalidInput(
            f"matrix is not Hermitian (max |H - H^dag| = {max_norm(H - H.conj().T):.3e})")
    return 0.5 * (H + H.conj().T)


def _off_norm(A):
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def _jacobi_eigh(A: np.ndarray, tol: float, max_sweeps: int):
    """Cyclic Jacobi for a complex Hermitian matrix.

    Each rotation first removes the phase of ``A[p, q]`` with a diagonal
    unitary and then applies a real Givens rotation.
    """
    A = A.copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    fro = np.linalg.norm(A)
    if n == 1 or fro == 0.0:
        return np.real(np.diag(A)).copy(), V, 0
    threshold = tol * fro
    for sweep in range(1, max_sweeps + 1):
        off = _off_norm(A)
        if off < threshold:
            return np.real(np.diag(A)).copy(), V, sweep - 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r
                app, aqq = A[p, p].real, A[q, q].real
                zeta = (aqq - app) / (2.0 * r)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                G = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ G
                A[idx, :] = G.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ G
    off = _off_norm(A)
    if off < threshold:
        return np.real(np.diag(A)).copy(), V, max_sweeps
    raise NumericalFailure(
        f"Jacobi iteration did not converge in {max_sweeps} sweeps (off-diagonal {off:.3e})")


def eig_hermitian(H, method: str = "lapack", tol: float = JACOBI_TOL,
                  max_sweeps: int = JACOBI_MAX_SWEEPS) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    ``method="jacobi"`` runs cyclic Jacobi rotations until the off-diagonal
    Frobenius norm drops below ``tol`` times the matrix norm;
    ``method="lapack"`` defers to ``numpy.linalg.eigh``.
    """
    H = as_hermitian(H)
    if method == "lapack":
        try:
            w, U = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(str(exc)) from exc
        return SpectralDecomposition(w, U)
    if method == "jacobi":
        w, U, _ = _jacobi_eigh(H, tol, max_sweeps)
        order = np.argsort(w, kind="stable")
        return SpectralDecomposition(w[order], U[:, order])
    raise InvalidInput(f"unknown eigensolver {method!r}")


def _eigh(H: np.ndarray):
    # hot-path helper: caller guarantees H is Hermitian
    return np.linalg.eigh(0.5 * (H + H.conj().T))


def matrix_function(H, f: Callable[[np.ndarray], np.ndarray],
                    domain_floor: float = DOMAIN_FLOOR) -> np.ndarray:
    """Apply a scalar function on (0, inf) through the spectrum of ``H``.

    Raises DomainViolation if some eigenvalue is not above ``domain_floor``.
    Pass ``domain_floor=None`` for functions defined on the whole real line.
    """
    w, U = eig_hermitian(H)
    if domain_floor is not None and w[0] <= domain_floor:
        raise DomainViolation(
            f"eigenvalue {w[0]:.3e} is not above the domain floor {domain_floor:.1e}")
    fw = np.asarray(f(w), dtype=float)
    out = (U * fw) @ U.conj().T
    return 0.5 * (out + out.conj().T)


def matrix_power(H, p: float) -> np.ndarray:
    """Spectral power ``H**p``; fractional or negative ``p`` needs ``H > 0``."""
    p = float(p)
    if p == 0.0:
        return np.eye(as_hermitian(H).shape[0], dtype=complex)
    if p.is_integer() and p > 0:
        return matrix_function(H, lambda w: w ** p, domain_floor=None)
    return matrix_function(H, lambda w: w ** p)


def matrix_log(H) -> np.ndarray:
    return matrix_function(H, np.log)


def kron(A, B) -> np.ndarray:
    return np.kron(as_matrix(A), as_matrix(B))


def transpose_in_basis(M) -> np.ndarray:
    """Entrywise transpose in the computational basis; no conjugation."""
    return as_matrix(M).T.copy()


def check_dims(dims: Sequence[int], n: int) -> tuple:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise InvalidInput(f"system dimensions must be positive integers, got {dims}")
    if int(np.prod(dims)) != n:
        raise InvalidInput(f"dims {dims} do not multiply to the matrix dimension {n}")
    return dims


def partial_trace(M, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every factor of ``dims`` except those listed in ``keep``.

    ``keep`` is a factor index or a sequence of indices; kept factors stay in
    their original order.
    """
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InvalidInput(f"partial trace needs a square matrix, got {M.shape}")
    dims = check_dims(dims, M.shape[0])
    keep = [keep] if np.isscalar(keep) else list(keep)
    n = len(dims)
    if any(not 0 <= k < n for k in keep) or len(set(keep)) != len(keep):
        raise InvalidInput(f"invalid factor selection {keep} for dims {dims}")
    keep = sorted(keep)
    T = M.reshape(dims + dims)
    # row labels 0..n-1, column labels n..2n-1; traced factors share a label
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    R = np.einsum(T, row + col, out)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return R.reshape(d, d)


def schatten_quasi_norm(Z, alpha: float) -> float:
    """``(sum_i lambda_i**alpha)**(1/alpha)`` for positive semi-definite ``Z``."""
    alpha = float(alpha)
    if not alpha > 0:
        raise InvalidInput(f"alpha must be positive, got {alpha}")
    w = eig_hermitian(Z).eigenvalues
    if w[0] < -PSD_TOL * max(1.0, abs(w[-1])):
        raise DomainViolation(f"operator has negative eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return float(np.sum(w ** alpha) ** (1.0 / alpha))


def require_positive_definite(H, name: str = "operator") -> np.ndarray:
    """Return the symmetrized ``H``; raise DomainViolation unless it is invertible."""
    H = as_hermitian(H)
    w = np.linalg.eigvalsh(H)
    if not (w[-1] > 0 and w[0] > INVERTIBLE_RTOL * w[-1]):
        raise DomainViolation(
            f"{name} is not positive definite (eigenvalues span [{w[0]:.3e}, {w[-1]:.3e}])")
    return H


def trace_distance(A, B) -> float:
    w = np.linalg.eigvalsh(as_hermitian(np.asarray(A) - np.asarray(B)))
    return 0.5 * float(np.sum(np.abs(w)))
