"""
Dense complex linear algebra used by every other module.

Operators are plain 2-D numpy arrays of dtype complex128. The inner product
is linear in its first argument and conjugate-linear in its second,

    <u, v> = sum_k u_k conj(v_k),

so the adjoint of ``M`` is its conjugate transpose and the quadratic form
``<M phi, phi>`` equals ``phi^H M phi``.
"""
from typing import NamedTuple

import numpy as np

from .exceptions import ConvergenceFailure, DimensionMismatch, NotHermitian

#: Default tolerance for structural predicates on unit-scale operators.
ATOL = 1e-10


class HermitianEig(NamedTuple):
    """Eigenvalues in descending order and the matching unitary of column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_operator(M, name="operator", square=True) -> np.ndarray:
    """Coerce ``M`` to a 2-D complex128 array, optionally requiring it to be square."""
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    return M


def scaled_tol(M, tol=ATOL) -> float:
    """Scale an absolute tolerance by ``max(1, ||M||_F)``."""
    return tol * max(1.0, float(np.linalg.norm(M)))


def adjoint(M) -> np.ndarray:
    return as_operator(M, square=False).conj().T


def is_hermitian(M, tol=0.0) -> bool:
    M = as_operator(M)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if M.size == 0:
        return True
    return float(np.max(np.abs(M - M.conj().T))) <= tol


def _require_hermitian(M, tol, name="operator"):
    if not is_hermitian(M, tol):
        dev = float(np.max(np.abs(M - M.conj().T)))
        raise NotHermitian(f"{name} deviates from its adjoint by {dev:.3e} > {tol:.1e}")


def eig_hermitian(M, tol=ATOL) -> HermitianEig:
    """
    Eigendecomposition of a Hermitian operator.

    Parameters
    ----------
    M : array_like, shape (d, d)
        Operator, Hermitian to within ``tol`` (entrywise).
    tol : float
        Hermiticity tolerance.

    Returns
    -------
    HermitianEig
        Real eigenvalues sorted in descending order; eigenvectors as columns.
    """
    M = as_operator(M)
    _require_hermitian(M, tol)
    # symmetrize so roundoff in the lower triangle is not silently dropped
    H = 0.5 * (M + M.conj().T)
    try:
        w, Q = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return HermitianEig(w[::-1].copy(), Q[:, ::-1].copy())


def is_psd(M, tol=0.0) -> bool:
    M = as_operator(M)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    _require_hermitian(M, max(tol, ATOL))
    if M.size == 0:
        return True
    return bool(eig_hermitian(M, max(tol, ATOL)).eigenvalues[-1] >= -tol)


def unitary_from_hamiltonian(H, t, hbar=1.0) -> np.ndarray:
    """
    Propagator ``exp(-i t H / hbar)`` built from the spectral decomposition of ``H``.
    """
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    H = as_operator(H, "hamiltonian")
    w, Q = eig_hermitian(H, scaled_tol(H))
    phases = np.exp(-1j * t * w / hbar)
    return (Q * phases) @ Q.conj().T


def frobenius_distance(A, B) -> float:
    A = as_operator(A, square=False)
    B = as_operator(B, square=False)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    return float(np.linalg.norm(A - B))


def outer(u, v=None) -> np.ndarray:
    """The rank-one operator ``x -> <x, v> u`` (``v`` defaults to ``u``)."""
    u = np.asarray(u, dtype=np.complex128)
    v = u if v is None else np.asarray(v, dtype=np.complex128)
    return np.outer(u, v.conj())


def is_projector(P, tol=ATOL) -> bool:
    """Orthogonal projector test: Hermitian and idempotent."""
    P = as_operator(P)
    return is_hermitian(P, tol) and frobenius_distance(P @ P, P) <= tol * max(1, P.shape[0])
