"""Sample covariance and the tuning-free constrained precision estimator.

The precision matrix compatible with a hypothesized structure is estimated
column by column: for column ``i`` with support rows ``J``, the fitted
column solves ``S[J, J] w = e_i[J]`` and is scattered back into a ``p x p``
matrix that is exactly zero off support.  Columns are fitted independently
and the result is deliberately NOT symmetrized; the goodness-of-fit
statistic consumes columns as fitted.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from sklearn.base import BaseEstimator

from .errors import (
    ColumnSingularError,
    DegenerateEstimateError,
    InsufficientDataError,
)
from .structure import EdgeSet
from .validation import as_dataset

# A support submatrix is declared singular when its condition estimate
# exceeds this; no silent regularization is applied.
CONDITION_LIMIT = 1e12


def sample_covariance(X):
    """Mean-centered sample covariance with the ``n - 1`` divisor."""
    X = as_dataset(X)
    n = X.shape[0]
    if n < 2:
        raise InsufficientDataError(f"need at least 2 observations, got {n}")
    Xc = X - X.mean(axis=0)
    S = (Xc.T @ Xc) / (n - 1)
    return (S + S.T) / 2.0


@dataclass
class ConstrainedPrecisionFit:
    """Column-wise constrained precision estimate.

    Attributes
    ----------
    edge_set : EdgeSet
        The structure the estimate was fitted under.
    matrix : (p, p) array
        Fitted columns assembled side by side; exactly zero off support and
        not necessarily symmetric.
    se : (p, p) array
        Entrywise standard error ``sqrt((w_ii w_kk + w_ik^2) / n)`` on the
        support, zero off support.
    n : int
        Sample size used for the fit.
    """

    edge_set: EdgeSet
    matrix: np.ndarray
    se: np.ndarray
    n: int

    def symmetrized(self):
        """Symmetric version ``(W + W') / 2`` of the column-wise estimate.

        The test statistic consumes raw columns; downstream uses that
        require a symmetric matrix (e.g. a regression working precision)
        take this average of the two independent fits of each entry.
        """
        return (self.matrix + self.matrix.T) / 2.0


def _solve_column(S, rows, i, n):
    """Slow-path single-column solve with explicit diagnostics."""
    if n - 1 < len(rows):
        raise InsufficientDataError(
            f"column {i}: support size {len(rows)} exceeds n - 1 = {n - 1}",
            column=i,
        )
    A = S[np.ix_(rows, rows)]
    b = np.zeros(len(rows))
    b[int(np.searchsorted(rows, i))] = 1.0
    try:
        return sla.cho_solve(sla.cho_factor(A, lower=True), b)
    except (sla.LinAlgError, ValueError):
        condition = float(np.linalg.cond(A))
        if not np.isfinite(condition) or condition > CONDITION_LIMIT:
            raise ColumnSingularError(i, condition) from None
        # Indefinite to rounding but still invertible: pivoted solve.
        return sla.solve(A, b)


def fit_single_column(S, edge_set, i, n):
    """Fit only column ``i``; other columns may be infeasible."""
    S = np.asarray(S, dtype=float)
    rows = edge_set.column_support(i)
    w = np.zeros(edge_set.p)
    w[rows] = _solve_column(S, rows, i, n)
    return w


def fit_constrained_precision(S, edge_set, n):
    """Fit every column of the constrained precision estimate.

    Parameters
    ----------
    S : (p, p) array
        Sample covariance.
    edge_set : EdgeSet
        Hypothesized support; column ``i`` is restricted to its support.
    n : int
        Sample size behind ``S`` (for feasibility checks and standard
        errors).

    Raises
    ------
    InsufficientDataError
        If some column's support size exceeds ``n - 1``.
    ColumnSingularError
        If a support submatrix has condition estimate above 1e12.
    """
    S = np.asarray(S, dtype=float)
    p = edge_set.p
    if S.shape != (p, p):
        raise ValueError(f"covariance shape {S.shape} does not match p={p}")
    supports = edge_set.column_supports()
    matrix = np.zeros((p, p))

    # Columns grouped by support size solve as one batched call; the slow
    # path only runs when a batched Cholesky fails somewhere in a group.
    by_size = {}
    for i, rows in enumerate(supports):
        by_size.setdefault(len(rows), []).append(i)
    for size, cols in sorted(by_size.items()):
        if n - 1 < size:
            raise InsufficientDataError(
                f"column {cols[0]}: support size {size} exceeds n - 1 = {n - 1}",
                column=cols[0],
            )
        J = np.stack([supports[i] for i in cols])
        A = S[J[:, :, None], J[:, None, :]]
        b = np.zeros((len(cols), size))
        b[np.arange(len(cols)), [int(np.searchsorted(supports[i], i)) for i in cols]] = 1.0
        try:
            np.linalg.cholesky(A)
            w = np.linalg.solve(A, b[..., None])[..., 0]
        except np.linalg.LinAlgError:
            w = np.stack([_solve_column(S, supports[i], i, n) for i in cols])
        matrix[J.ravel(), np.repeat(cols, size)] = w.ravel()

    diag = np.diag(matrix)
    with np.errstate(invalid="ignore"):
        se = np.sqrt((np.outer(diag, diag) + matrix**2) / n)
    se[~edge_set.to_mask()] = 0.0
    return ConstrainedPrecisionFit(edge_set=edge_set, matrix=matrix, se=se, n=int(n))


def entry_standard_error(fit, i, k, n=None):
    """Standard error of one supported precision entry.

    Returns ``sqrt((w_ii * w_kk + w_ik^2) / n)`` for ``(i, k)`` in the
    support of ``fit.edge_set``.
    """
    if (i, k) not in fit.edge_set.edges:
        raise ValueError(f"entry ({i}, {k}) is off the hypothesized support")
    n = fit.n if n is None else int(n)
    w_ii = fit.matrix[i, i]
    w_kk = fit.matrix[k, k]
    if w_ii <= 0 or w_kk <= 0:
        raise DegenerateEstimateError(
            f"nonpositive diagonal estimate (w[{i},{i}]={w_ii:.6g}, w[{k},{k}]={w_kk:.6g})"
        )
    return float(np.sqrt((w_ii * w_kk + fit.matrix[i, k] ** 2) / n))


class ConstrainedPrecision(BaseEstimator):
    """Precision-matrix estimator constrained to a fixed graph structure.

    Parameters
    ----------
    edge_set : EdgeSet
        Hypothesized support pattern.

    Attributes
    ----------
    covariance_ : (p, p) array
        Sample covariance of the training data.
    precision_ : (p, p) array
        Column-wise constrained precision estimate (zero off support).
    precision_se_ : (p, p) array
        Entrywise standard errors on the support.
    """

    def __init__(self, edge_set=None):
        self.edge_set = edge_set

    def fit(self, X, y=None):
        if self.edge_set is None:
            raise ValueError("edge_set must be provided before fitting")
        X = as_dataset(X)
        if X.shape[1] != self.edge_set.p:
            raise ValueError(
                f"data has {X.shape[1]} columns but edge set expects {self.edge_set.p}"
            )
        self.covariance_ = sample_covariance(X)
        result = fit_constrained_precision(self.covariance_, self.edge_set, X.shape[0])
        self.fit_result_ = result
        self.precision_ = result.matrix
        self.precision_se_ = result.se
        self.n_samples_, self.n_features_in_ = X.shape
        return self

    def get_precision(self):
        return self.precision_
