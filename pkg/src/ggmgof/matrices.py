"""Precision-matrix generators and inversion to covariance.

All generators validate positive definiteness at construction (a Cholesky
factorization must succeed) and place bitwise-exact zeros outside their
support, so the generated support pattern can be recovered with a zero
tolerance.
"""

import json

import numpy as np
from scipy import linalg as sla

from .errors import NotPositiveDefiniteError
from .validation import check_square, spd_cholesky


def _banded(p, s0, values_by_offset):
    idx = np.arange(p)
    dist = np.abs(idx[:, None] - idx[None, :])
    M = np.where(dist < s0, values_by_offset(dist), 0.0)
    spd_cholesky(M, "generated precision matrix")
    return M


def banded_exponential_precision(p, s0, base):
    """Banded precision matrix with geometrically decaying entries.

    Entry ``(i, j)`` is ``base ** |i - j|`` inside the band
    ``|i - j| < s0`` and exactly zero outside.  The diagonal is 1.
    """
    if p < 1:
        raise ValueError(f"dimension must be positive, got {p}")
    if not 1 <= s0 <= p:
        raise ValueError(f"bandwidth must be in [1, {p}], got {s0}")
    if not 0.0 < base < 1.0:
        raise ValueError(f"base must be in (0, 1), got {base}")
    return _banded(p, s0, lambda d: base ** d.astype(float))


def banded_polynomial_precision(p, s0, lam=2.0):
    """Banded precision matrix with polynomially decaying entries.

    Entry ``(i, j)`` is ``(1 + |i - j|) ** -lam`` inside the band
    ``|i - j| < s0`` and exactly zero outside.
    """
    if p < 1:
        raise ValueError(f"dimension must be positive, got {p}")
    if not 1 <= s0 <= p:
        raise ValueError(f"bandwidth must be in [1, {p}], got {s0}")
    if lam < 2.0:
        raise ValueError(f"decay exponent must be >= 2, got {lam}")
    return _banded(p, s0, lambda d: (1.0 + d.astype(float)) ** (-lam))


def factor_precision(p, terms):
    """Low-rank-plus-identity precision matrix ``I + sum_i alpha_i u_i u_i^T``.

    ``terms`` is a sequence of ``(alpha, u)`` pairs with ``u`` a length-``p``
    vector.  An empty sequence yields the identity.
    """
    if p < 1:
        raise ValueError(f"dimension must be positive, got {p}")
    M = np.eye(p)
    for alpha, u in terms:
        u = np.asarray(u, dtype=float)
        if u.shape != (p,):
            raise ValueError(f"factor vector has shape {u.shape}, expected ({p},)")
        M += float(alpha) * np.outer(u, u)
    spd_cholesky(M, "generated precision matrix")
    return M


def identity_precision(p):
    """Identity precision matrix (independent components)."""
    if p < 1:
        raise ValueError(f"dimension must be positive, got {p}")
    return np.eye(p)


def invert_to_covariance(M):
    """Invert a positive-definite precision matrix via its Cholesky factor.

    The result is explicitly symmetrized; ``M @ result`` is the identity to
    roughly 1e-10 in max norm at the matrix sizes this package targets.
    """
    M = check_square(M, "precision matrix")
    try:
        factor = sla.cho_factor(M, lower=True)
    except (sla.LinAlgError, ValueError) as exc:
        smallest = float(np.linalg.eigvalsh(M)[0])
        raise NotPositiveDefiniteError(
            f"cannot invert: matrix is not positive definite "
            f"(smallest eigenvalue {smallest:.6g})",
            smallest_eigenvalue=smallest,
        ) from exc
    inv = sla.cho_solve(factor, np.eye(M.shape[0]))
    return (inv + inv.T) / 2.0


def save_matrix_csv(M, path, provenance=None):
    """Write a dense matrix as headerless CSV; optionally write a sidecar
    ``<path>.meta.json`` recording generator parameters."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    np.savetxt(path, M, delimiter=",", fmt="%.17g")
    if provenance is not None:
        with open(f"{path}.meta.json", "w", encoding="utf-8") as fh:
            json.dump(provenance, fh, indent=1)
            fh.write("\n")


def load_matrix_csv(path):
    """Read a dense headerless CSV matrix."""
    M = np.loadtxt(path, delimiter=",", ndmin=2)
    return np.asarray(M, dtype=float)
