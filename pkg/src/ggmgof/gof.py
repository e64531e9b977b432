"""Global and node-local goodness-of-fit tests for a hypothesized structure.

The plain statistic is the maximum over all index pairs ``(i, j)`` of the
squared, standardized residual of ``S @ W - I`` where ``W`` is the
column-wise constrained precision estimate.  Pairs inside column ``i``'s
support contribute exactly zero by construction of the fit.  Under a
correct hypothesis the centered statistic follows a scale-2 Gumbel law
whose location depends on the isolated-node fraction of the structure
through ``gamma = (1 - beta**2 / 2) ** -2``.

The consistency-empowered variant adds a constant to every supported
precision entry whose t-ratio falls below a threshold, which restores
power against structures that strictly contain the true one.
"""

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DegenerateEstimateError
from .estimation import (
    fit_constrained_precision,
    fit_single_column,
    sample_covariance,
)
from .structure import structure_stats
from .validation import as_dataset

# The node-local statistic has limit CDF exp(-exp(-t/2)/sqrt(pi)); within
# the exp(-exp(-t/2)/sqrt(2*gamma*pi)) family that is gamma = 1/2.
NODE_LOCAL_GAMMA = 0.5


@dataclass(frozen=True)
class GumbelLimit:
    """Scale-2 Gumbel limit with location ``-log(2 * gamma * pi)``."""

    gamma: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def location(self):
        return -math.log(2.0 * self.gamma * math.pi)

    @property
    def scale(self):
        return 2.0


def gumbel_cdf(limit, t):
    """CDF ``exp(-exp(-t/2) / sqrt(2 * gamma * pi))``; vectorized in ``t``."""
    t = np.asarray(t, dtype=float)
    out = np.exp(-np.exp(-t / 2.0) / math.sqrt(2.0 * limit.gamma * math.pi))
    return float(out) if out.ndim == 0 else out


def gumbel_quantile(limit, q):
    """Closed-form inverse of :func:`gumbel_cdf` for ``q`` in (0, 1)."""
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {q}")
    return -2.0 * math.log(-math.sqrt(2.0 * limit.gamma * math.pi) * math.log(q))


def global_centering(p):
    """Centering ``4 log p - log log p`` for the global statistic."""
    if p == 1:
        return math.inf
    return 4.0 * math.log(p) - math.log(math.log(p))


def node_centering(p):
    """Centering ``2 log p - log log p`` for the node-local statistic."""
    if p == 1:
        return math.inf
    return 2.0 * math.log(p) - math.log(math.log(p))


def theta_hat(fit, S, i, j, n=None):
    """Variance proxy ``(w_ii * S_jj + [i == j]) / n`` for the ``(i, j)``
    residual.

    The ``+1`` belongs to the diagonal pairs: the residual variance is
    ``w_ii sigma_jj / n`` off the diagonal and ``(w_ii sigma_ii + 1) / n``
    on it.
    """
    n = fit.n if n is None else int(n)
    w_ii = fit.matrix[i, i]
    s_jj = S[j, j]
    if w_ii <= 0 or s_jj <= 0:
        raise DegenerateEstimateError(
            f"nonpositive variance inputs (w[{i},{i}]={w_ii:.6g}, S[{j},{j}]={s_jj:.6g})"
        )
    return (w_ii * s_jj + (1.0 if i == j else 0.0)) / n


@dataclass(frozen=True)
class TestReport:
    """Outcome of one structure test.

    ``statistic`` is the maximum standardized squared residual;
    ``p_value = 1 - F(statistic - centering)`` under the scale-2 Gumbel
    limit with the report's ``gamma``; ``reject`` uses a strict inequality
    against the level-``level`` threshold.  ``argmax`` is the
    lexicographically smallest maximizing pair ``(i, j)``.
    """

    variant: str
    statistic: float
    centering: float
    gamma: float
    level: float
    p_value: float
    reject: bool
    argmax: tuple
    n_features: int
    n_samples: int
    node: int = None
    flagged_entries: tuple = field(default=None)

    def to_dict(self):
        out = {
            "variant": self.variant,
            "statistic": self.statistic,
            "centering": self.centering,
            "gamma": self.gamma,
            "level": self.level,
            "p_value": self.p_value,
            "reject": bool(self.reject),
            "decision": "reject" if self.reject else "fail-to-reject",
            "argmax": list(self.argmax),
            "n_features": self.n_features,
            "n_samples": self.n_samples,
        }
        if self.node is not None:
            out["node"] = self.node
        if self.flagged_entries is not None:
            out["flagged_entries"] = [list(e) for e in self.flagged_entries]
        return out

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _decision(statistic, centering, gamma, level):
    limit = GumbelLimit(gamma)
    if math.isinf(centering):
        return 1.0, False
    p_value = float(1.0 - gumbel_cdf(limit, statistic - centering))
    reject = statistic > centering + gumbel_quantile(limit, 1.0 - level)
    return p_value, reject


def decide(report, level=None, gamma_override=None):
    """Re-decide an existing report at a different level or gamma.

    ``gamma`` defaults to the report's own value; a conservative
    ``gamma_override=1`` is the standard choice when the number of
    isolated nodes in the true structure is unknown.
    """
    level = report.level if level is None else float(level)
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    gamma = report.gamma if gamma_override is None else float(gamma_override)
    p_value, reject = _decision(report.statistic, report.centering, gamma, level)
    return replace(report, level=level, gamma=gamma, p_value=p_value, reject=reject)


def _resolve_gamma(edge_set, gamma):
    if gamma is None or gamma == "auto":
        return structure_stats(edge_set).gamma
    return float(gamma)


def _squared_residuals(S, fit):
    """Matrix of ``D_ij^2`` indexed ``[i, j]`` (column fit ``i``, probe ``j``)."""
    p = S.shape[0]
    diag_w = np.diag(fit.matrix)
    diag_s = np.diag(S)
    if np.any(diag_w <= 0) or np.any(diag_s <= 0):
        raise DegenerateEstimateError(
            "nonpositive diagonal in the precision estimate or sample covariance"
        )
    numer = (S @ fit.matrix - np.eye(p)).T
    theta = (np.outer(diag_w, diag_s) + np.eye(p)) / fit.n
    return numer**2 / theta


def _max_and_argmax(dsq):
    # np.argmax scans in C order, so ties break to the smallest (i, j).
    flat = int(np.argmax(dsq))
    return float(dsq.flat[flat]), tuple(int(v) for v in np.unravel_index(flat, dsq.shape))


def dn_statistic(X, edge_set, level=0.05, gamma=None):
    """Global goodness-of-fit test of a hypothesized structure.

    Parameters
    ----------
    X : (n, p) array
        Observations.
    edge_set : EdgeSet
        Hypothesized support of the precision matrix.
    level : float
        Nominal size of the test.
    gamma : float, "auto", or None
        Gumbel location correction.  ``None``/"auto" uses the
        isolated-node fraction of ``edge_set``; pass 1 for the
        conservative choice.

    Returns
    -------
    TestReport
    """
    X = as_dataset(X)
    n, p = X.shape
    S = sample_covariance(X)
    fit = fit_constrained_precision(S, edge_set, n)
    statistic, argmax = _max_and_argmax(_squared_residuals(S, fit))
    centering = global_centering(p)
    g = _resolve_gamma(edge_set, gamma)
    p_value, reject = _decision(statistic, centering, g, level)
    return TestReport(
        variant="plain",
        statistic=statistic,
        centering=centering,
        gamma=g,
        level=float(level),
        p_value=p_value,
        reject=reject,
        argmax=argmax,
        n_features=p,
        n_samples=n,
    )


def node_statistic(X, edge_set, node, level=0.05):
    """Node-local test of one column's hypothesized support.

    Only column ``node`` is fitted, so other columns may be infeasible.
    The limit CDF is ``exp(-exp(-t/2)/sqrt(pi))`` with centering
    ``2 log p - log log p``, independent of the structure's gamma.
    """
    X = as_dataset(X)
    n, p = X.shape
    if not 0 <= node < p:
        raise ValueError(f"node {node} out of range for p={p}")
    S = sample_covariance(X)
    w = fit_single_column(S, edge_set, node, n)
    if w[node] <= 0 or np.any(np.diag(S) <= 0):
        raise DegenerateEstimateError("nonpositive diagonal estimate in node test")
    numer = S @ w
    numer[node] -= 1.0
    theta = (w[node] * np.diag(S) + (np.arange(p) == node)) / n
    dsq = numer**2 / theta
    j = int(np.argmax(dsq))
    statistic = float(dsq[j])
    centering = node_centering(p)
    p_value, reject = _decision(statistic, centering, NODE_LOCAL_GAMMA, level)
    return TestReport(
        variant="node-local",
        statistic=statistic,
        centering=centering,
        gamma=NODE_LOCAL_GAMMA,
        level=float(level),
        p_value=p_value,
        reject=reject,
        argmax=(node, j),
        n_features=p,
        n_samples=n,
        node=int(node),
    )


def _flag_small_entries(fit, delta_n):
    """Support entries whose |estimate| / SE falls at or below ``delta_n``.

    Flag positions are matrix positions ``[k, i]`` (component ``k`` of
    fitted column ``i``); the diagonal is screened too, though its t-ratio
    ``sqrt(n / 2)`` never trips in practice.
    """
    mask = fit.edge_set.to_mask()
    with np.errstate(invalid="ignore"):
        flags = mask & (np.abs(fit.matrix) <= delta_n * fit.se)
    return flags


def paired_statistics(
    X,
    edge_set,
    cn=0.05,
    delta_n=None,
    cn_mode="scaled",
    level=0.05,
    gamma=None,
):
    """Plain and empowered reports from one dataset, sharing one fit.

    Returns ``(plain, empowered)``.  When no entry is flagged the two
    statistics coincide bit for bit.
    """
    X = as_dataset(X)
    n, p = X.shape
    if cn == 0:
        raise ValueError("cn must be nonzero")
    if cn_mode not in ("scaled", "constant"):
        raise ValueError(f"cn_mode must be 'scaled' or 'constant', got {cn_mode!r}")
    if cn_mode == "scaled" and cn <= 0:
        raise ValueError(f"scaled mode requires cn > 0, got {cn}")
    if delta_n is None:
        delta_n = math.sqrt(math.log(n))
    if delta_n <= 0:
        raise ValueError(f"delta_n must be positive, got {delta_n}")

    S = sample_covariance(X)
    fit = fit_constrained_precision(S, edge_set, n)
    g = _resolve_gamma(edge_set, gamma)
    centering = global_centering(p)

    diag_w = np.diag(fit.matrix)
    diag_s = np.diag(S)
    if np.any(diag_w <= 0) or np.any(diag_s <= 0):
        raise DegenerateEstimateError(
            "nonpositive diagonal in the precision estimate or sample covariance"
        )
    theta = (np.outer(diag_w, diag_s) + np.eye(p)) / n
    numer = (S @ fit.matrix - np.eye(p)).T
    stat_plain, arg_plain = _max_and_argmax(numer**2 / theta)

    flags = _flag_small_entries(fit, delta_n)
    if flags.any():
        cn_eff = cn * math.sqrt(math.log(p)) if cn_mode == "scaled" else cn
        augmented = fit.matrix + np.where(flags, cn_eff, 0.0)
        numer_aug = (S @ augmented - np.eye(p)).T
        stat_emp, arg_emp = _max_and_argmax(numer_aug**2 / theta)
        flagged = tuple(sorted((int(i), int(k)) for k, i in zip(*np.nonzero(flags))))
    else:
        stat_emp, arg_emp, flagged = stat_plain, arg_plain, ()

    pv_plain, rej_plain = _decision(stat_plain, centering, g, level)
    pv_emp, rej_emp = _decision(stat_emp, centering, g, level)
    common = dict(
        centering=centering,
        gamma=g,
        level=float(level),
        n_features=p,
        n_samples=n,
    )
    plain = TestReport(
        variant="plain",
        statistic=stat_plain,
        p_value=pv_plain,
        reject=rej_plain,
        argmax=arg_plain,
        **common,
    )
    empowered = TestReport(
        variant="empowered",
        statistic=stat_emp,
        p_value=pv_emp,
        reject=rej_emp,
        argmax=arg_emp,
        flagged_entries=flagged,
        **common,
    )
    return plain, empowered


def empowered_statistic(
    X,
    edge_set,
    cn=0.05,
    delta_n=None,
    cn_mode="scaled",
    level=0.05,
    gamma=None,
):
    """Consistency-empowered variant of the global test.

    Every supported precision entry whose t-ratio ``|w| / se(w)`` is at
    most ``delta_n`` receives an additive bump ``C_n`` before the residual
    matrix is recomputed; the bump turns estimates that shrink to zero
    under a strictly-too-large hypothesis into detectable signal while
    leaving a correct hypothesis asymptotically untouched.

    Parameters
    ----------
    cn : float
        Bump coefficient.  Must be nonzero.
    delta_n : float or None
        Flagging threshold; defaults to ``sqrt(log n)``.
    cn_mode : {"scaled", "constant"}
        "scaled" uses ``C_n = cn * sqrt(log p)`` (the rate that keeps the
        null distribution intact while rejecting strict supersets with
        probability one, and the one that reproduces the reference
        rejection rates).  "constant" uses ``C_n = cn`` as given.
    """
    _, empowered = paired_statistics(
        X,
        edge_set,
        cn=cn,
        delta_n=delta_n,
        cn_mode=cn_mode,
        level=level,
        gamma=gamma,
    )
    return empowered


class StructureTest(BaseEstimator):
    """Goodness-of-fit test with a scikit-learn style fit interface.

    Parameters mirror :func:`dn_statistic`, :func:`node_statistic`, and
    :func:`empowered_statistic` depending on ``variant``.

    Attributes
    ----------
    report_ : TestReport
    statistic_, p_value_, reject_ : float, float, bool
    """

    def __init__(
        self,
        edge_set=None,
        variant="plain",
        level=0.05,
        gamma=None,
        node=None,
        cn=0.05,
        delta_n=None,
        cn_mode="scaled",
    ):
        self.edge_set = edge_set
        self.variant = variant
        self.level = level
        self.gamma = gamma
        self.node = node
        self.cn = cn
        self.delta_n = delta_n
        self.cn_mode = cn_mode

    def fit(self, X, y=None):
        if self.edge_set is None:
            raise ValueError("edge_set must be provided before fitting")
        if self.variant == "plain":
            report = dn_statistic(X, self.edge_set, level=self.level, gamma=self.gamma)
        elif self.variant == "node":
            if self.node is None:
                raise ValueError("variant='node' requires the node parameter")
            report = node_statistic(X, self.edge_set, self.node, level=self.level)
        elif self.variant == "empowered":
            report = empowered_statistic(
                X,
                self.edge_set,
                cn=self.cn,
                delta_n=self.delta_n,
                cn_mode=self.cn_mode,
                level=self.level,
                gamma=self.gamma,
            )
        else:
            raise ValueError(f"unknown variant {self.variant!r}")
        self.report_ = report
        self.statistic_ = report.statistic
        self.p_value_ = report.p_value
        self.reject_ = report.reject
        self.n_features_in_ = report.n_features
        return self
