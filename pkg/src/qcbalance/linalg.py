"""Dense complex-matrix kernel.

Everything here is a thin, validated layer over numpy. Matrices are plain
``np.ndarray`` objects of complex dtype; no wrapper class is introduced.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-9
EIG_CLAMP = 1e-12
MAX_SIDE = 2**14


class LinalgError(Exception):
    """Base class for kernel errors."""


class DimensionLimitError(LinalgError):
    pass


class ValidationError(LinalgError, ValueError):
    pass


class NumericError(LinalgError, ArithmeticError):
    pass


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValidationError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product with a per-side dimension budget."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > MAX_SIDE or cols > MAX_SIDE:
        raise DimensionLimitError(f"kron result {rows}x{cols} exceeds {MAX_SIDE} per side")
    return np.kron(a, b)


def kron_all(*mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = kron(out, m)
    return out


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def hermiticity_error(a) -> float:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return float("inf")
    return float(np.max(np.abs(a - a.conj().T)))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(a) <= tol


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def hermitian_eig(a, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized as ``(A + A^dagger) / 2`` before solving, which
    absorbs round-off from repeated conjugation.

    Returns:
        ``(eigenvalues, eigenvectors)`` with eigenvalues real and sorted in
        descending order; column ``k`` of ``eigenvectors`` belongs to
        eigenvalue ``k``.

    Raises:
        ValidationError: if ``a`` is not square or not Hermitian within ``tol``.
        NumericError: if LAPACK fails to converge.
    """
    a = as_matrix(a)
    err = hermiticity_error(a)
    if err > tol:
        raise ValidationError(f"matrix is not Hermitian (max deviation {err:.3e})")
    h = (a + a.conj().T) / 2
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericError(str(exc)) from exc
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def hermitian_eigvals(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = as_matrix(a)
    err = hermiticity_error(a)
    if err > tol:
        raise ValidationError(f"matrix is not Hermitian (max deviation {err:.3e})")
    try:
        w = np.linalg.eigvalsh((a + a.conj().T) / 2)
    except np.linalg.LinAlgError as exc:
        raise NumericError(str(exc)) from exc
    return w[::-1]


def clamp_spectrum(w: np.ndarray) -> np.ndarray:
    """Zero out eigenvalues below ``EIG_CLAMP`` in magnitude and clip to [0, 1]."""
    w = np.where(np.abs(w) < EIG_CLAMP, 0.0, w)
    return np.clip(w, 0.0, 1.0)


def shannon_bits(probs) -> float:
    """Shannon entropy in bits with ``0 log 0 = 0``."""
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


# Frequently used gates.
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def controlled(u, n_controls: int = 1) -> np.ndarray:
    """Unitary applying ``u`` to the trailing qubits when all controls are 1."""
    u = as_matrix(u)
    dim = (2**n_controls) * u.shape[0]
    out = np.eye(dim, dtype=complex)
    out[dim - u.shape[0]:, dim - u.shape[0]:] = u
    return out
