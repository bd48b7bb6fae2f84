"""Input checks for complex sample matrices (sklearn's check_array rejects complex data)."""
import numpy as np

from .exceptions import DimensionMismatch


def check_fields(X, dim=None, name="samples") -> np.ndarray:
    """Return ``X`` as a finite ``(n, dim)`` complex128 array."""
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if X.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D (n_samples, dim), got shape {X.shape}")
    if dim is not None and X.shape[1] != dim:
        raise DimensionMismatch(f"{name} have dimension {X.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contain NaN or infinity")
    return X


def check_block_fields(X, n_blocks, dim, name="samples") -> np.ndarray:
    """Return ``X`` as an ``(n, n_blocks, dim)`` complex128 array of independent copies."""
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim != 3 or X.shape[1:] != (n_blocks, dim):
        raise DimensionMismatch(
            f"{name} must have shape (n_samples, {n_blocks}, {dim}), got {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contain NaN or infinity")
    return X


def check_vector(v, dim=None, name="vector") -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"{name} has length {v.shape[0]}, expected {dim}")
    return v
