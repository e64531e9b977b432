"""Input validation helpers used at the public API boundary."""

import numpy as np

from .errors import NotPositiveDefiniteError


def as_dataset(X):
    """Coerce ``X`` to a finite 2-D float array of observations (rows)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D data matrix, got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"data matrix must be non-empty, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("data matrix contains non-finite entries")
    return X


def check_square(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    return M


def check_symmetric(M, name="matrix", tol=1e-8):
    """Validate symmetry up to ``tol`` (relative to the largest entry)."""
    M = check_square(M, name)
    scale = max(1.0, float(np.abs(M).max()) if M.size else 1.0)
    if not np.all(np.abs(M - M.T) <= tol * scale):
        raise ValueError(f"{name} is not symmetric")
    return M


def spd_cholesky(M, name="matrix"):
    """Lower Cholesky factor of ``M``, or NotPositiveDefiniteError.

    The error message names the smallest eigenvalue so generation
    failures are diagnosable.
    """
    M = check_square(M, name)
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        smallest = float(np.linalg.eigvalsh(M)[0]) if M.size else float("nan")
        raise NotPositiveDefiniteError(
            f"{name} is not positive definite "
            f"(smallest eigenvalue {smallest:.6g})",
            smallest_eigenvalue=smallest,
        ) from None
