"""Generalized estimating equations with a supplied working precision.

The regression is linear with a common coefficient vector across subjects:
subject ``i`` contributes ``T`` repeated responses with design
``X_i = 1_T (x) (1, x_i)``.  Solving the estimating equation
``sum_i X_i' W (Y_i - X_i beta) = 0`` with working precision ``W`` has the
closed form used below; standard errors come from the robust sandwich
covariance, which stays valid when ``W`` is misspecified (the whole point
of comparing working structures).
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import SingularDesignError
from .sampling import replication_seed
from .validation import check_symmetric, spd_cholesky


@dataclass
class GeeProblem:
    """Repeated-measures regression inputs.

    Attributes
    ----------
    responses : (m, T) array
        Row ``i`` holds subject ``i``'s ``T`` correlated responses.
    covariates : (m, q) array
        Row ``i`` holds subject ``i``'s covariates (no intercept column;
        one is added internally).
    working_precision : (T, T) array
        Symmetric positive-definite working precision ``W = V^{-1}``.
    """

    responses: np.ndarray
    covariates: np.ndarray
    working_precision: np.ndarray

    def __post_init__(self):
        self.responses = np.asarray(self.responses, dtype=float)
        self.covariates = np.asarray(self.covariates, dtype=float)
        self.working_precision = check_symmetric(
            np.asarray(self.working_precision, dtype=float), "working precision"
        )
        if self.responses.ndim != 2:
            raise ValueError(f"responses must be 2-D, got shape {self.responses.shape}")
        if self.covariates.ndim != 2:
            raise ValueError(f"covariates must be 2-D, got shape {self.covariates.shape}")
        m, T = self.responses.shape
        if self.covariates.shape[0] != m:
            raise ValueError(
                f"covariates rows {self.covariates.shape[0]} != responses rows {m}"
            )
        if self.working_precision.shape != (T, T):
            raise ValueError(
                f"working precision shape {self.working_precision.shape} "
                f"does not match T={T}"
            )
        spd_cholesky(self.working_precision, "working precision")

    @property
    def n_subjects(self):
        return self.responses.shape[0]


@dataclass
class GeeFit:
    """Coefficients (intercept first), sandwich standard errors, and
    0.05-level significance flags."""

    beta: np.ndarray
    se: np.ndarray
    significant: np.ndarray
    covariance: np.ndarray


def fit_gee(problem):
    """Solve the estimating equation and attach sandwich standard errors."""
    Y = problem.responses
    W = problem.working_precision
    m, T = Y.shape
    Z = np.column_stack([np.ones(m), problem.covariates])
    q1 = Z.shape[1]

    ones = np.ones(T)
    w1 = W @ ones                    # X_i' W collapses to z_i * (1' W)
    s_w = float(ones @ w1)
    A = s_w * (Z.T @ Z)
    if np.linalg.matrix_rank(Z) < q1:
        raise SingularDesignError("design matrix is rank deficient")
    rhs = Z.T @ (Y @ w1)
    beta = np.linalg.solve(A, rhs)

    resid = Y - np.outer(Z @ beta, ones)
    g = resid @ w1                   # 1' W r_i per subject
    meat = (Z * g[:, None]).T @ (Z * g[:, None])
    A_inv = np.linalg.inv(A)
    cov = A_inv @ meat @ A_inv
    cov = (cov + cov.T) / 2.0
    se = np.sqrt(np.diag(cov))
    significant = np.abs(beta) / se > norm.ppf(0.975)
    return GeeFit(beta=beta, se=se, significant=significant, covariance=cov)


@dataclass
class BootstrapSummary:
    """Per-coefficient mean and population-style standard deviation of the
    subsampled standard errors (divide-by-``repeats``, not ``repeats - 1``)."""

    ave: np.ndarray
    sd: np.ndarray
    repeats: int
    subset_size: int


def subsample_bootstrap(problem, subset_size=40, repeats=100, seed=0):
    """Subsample subjects without replacement and track coefficient SEs.

    Each repeat refits on a uniform subject subset while reusing the
    full-data working precision, which stabilizes the procedure.  The
    repeat streams derive from ``(seed, repeat)`` so results are
    deterministic and order-independent.
    """
    m = problem.n_subjects
    if not 1 <= subset_size < m:
        raise ValueError(f"subset size must be in [1, {m - 1}], got {subset_size}")
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    ses = []
    for r in range(repeats):
        rng = np.random.Generator(np.random.Philox(replication_seed(seed, r)))
        idx = rng.choice(m, size=subset_size, replace=False)
        sub = GeeProblem(
            responses=problem.responses[idx],
            covariates=problem.covariates[idx],
            working_precision=problem.working_precision,
        )
        ses.append(fit_gee(sub).se)
    ses = np.asarray(ses)
    ave = ses.mean(axis=0)
    sd = np.sqrt(np.mean((ses - ave) ** 2, axis=0))
    return BootstrapSummary(ave=ave, sd=sd, repeats=repeats, subset_size=subset_size)
