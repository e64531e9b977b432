"""Seeded replication engine for empirical size and power studies.

Every replication draws its random stream from ``(master seed, replication
index)``, so results are identical for a fixed spec no matter how many
workers run the replications, and aggregation is a plain order-independent
sum of rejections.
"""

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .errors import GgmGofError, SimulationError
from .gof import dn_statistic, paired_statistics
from .matrices import (
    banded_exponential_precision,
    banded_polynomial_precision,
    factor_precision,
    identity_precision,
    invert_to_covariance,
)
from .sampling import replication_seed
from .structure import band_edge_set, isolated_edge_set, node_rewire, support_edge_set

# Offsets of the network-surgery alternatives, expressed as 0-based
# neighbor lists for the first one or two nodes.
ONE_DIFF_NEIGHBORS = (2, 6, 7, 8)
TWO_DIFF_NEIGHBORS_NODE0 = (2, 6, 7, 8)
TWO_DIFF_NEIGHBORS_NODE1 = (3, 8, 11)

_TRUTH_FAMILIES = ("exponential", "polynomial", "factor", "identity")
_HYPOTHESIS_KINDS = (
    "isolated",
    "band",
    "nested",
    "included",
    "1-diff",
    "2-diff",
    "truth-support",
)


@dataclass(frozen=True)
class SimulationSpec:
    """Configuration of one Monte Carlo experiment.

    ``truth`` describes the generating precision matrix, e.g.
    ``{"family": "exponential", "p": 150, "s0": 4, "base": 0.6}``;
    ``hypothesis`` the structure under test, e.g. ``{"kind": "band",
    "width": 3}`` or ``{"kind": "nested"}`` (band-width arithmetic on the
    truth's ``s0``).  ``variant`` is "plain", "empowered", or "both".
    """

    truth: dict
    hypothesis: dict
    n: int
    replications: int
    level: float = 0.05
    variant: str = "plain"
    cn: float = 0.05
    delta_n: float = None
    cn_mode: str = "scaled"
    seed: int = 0
    keep_statistics: bool = False

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must be in (0, 1), got {self.level}")
        if self.n < 2:
            raise ValueError(f"sample size must be >= 2, got {self.n}")
        if self.variant not in ("plain", "empowered", "both"):
            raise ValueError(f"unknown variant {self.variant!r}")
        family = self.truth.get("family")
        if family not in _TRUTH_FAMILIES:
            raise ValueError(f"unknown truth family {family!r}")
        kind = self.hypothesis.get("kind")
        if kind not in _HYPOTHESIS_KINDS:
            raise ValueError(f"unknown hypothesis kind {kind!r}")


@dataclass(frozen=True)
class SimulationResult:
    """Aggregate of one experiment: the empirical rejection rate, its
    binomial Monte Carlo standard error, and optionally the per-replication
    statistics."""

    rejection_rate: float
    replications: int
    mc_standard_error: float
    statistics: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True)
class ComparisonResult:
    plain: SimulationResult
    empowered: SimulationResult


def truth_precision(truth):
    """Build the generating precision matrix from its descriptor."""
    family = truth["family"]
    p = int(truth["p"])
    if family == "exponential":
        return banded_exponential_precision(p, int(truth["s0"]), float(truth.get("base", 0.6)))
    if family == "polynomial":
        return banded_polynomial_precision(p, int(truth["s0"]), float(truth.get("lam", 2.0)))
    if family == "factor":
        terms = [(float(a), np.asarray(u, dtype=float)) for a, u in truth["terms"]]
        return factor_precision(p, terms)
    if family == "identity":
        return identity_precision(p)
    raise ValueError(f"unknown truth family {family!r}")


def hypothesis_edge_set(hypothesis, truth, omega=None):
    """Resolve a hypothesis descriptor against the truth descriptor.

    "nested" and "included" are band widths ``s0 - 1`` and ``s0 + 1``;
    "1-diff" and "2-diff" rewire the first one or two nodes of the truth's
    support to fixed alternative neighbor sets.
    """
    kind = hypothesis["kind"]
    p = int(truth["p"])
    if kind == "isolated":
        return isolated_edge_set(p)
    if kind == "band":
        return band_edge_set(p, int(hypothesis["width"]))
    if kind in ("nested", "included"):
        s0 = int(truth["s0"])
        width = s0 - 1 if kind == "nested" else s0 + 1
        return band_edge_set(p, width)
    omega = truth_precision(truth) if omega is None else omega
    support = support_edge_set(omega, 0.0)
    if kind == "truth-support":
        return support
    if kind == "1-diff":
        return node_rewire(support, 0, ONE_DIFF_NEIGHBORS)
    if kind == "2-diff":
        rewired = node_rewire(support, 0, TWO_DIFF_NEIGHBORS_NODE0)
        return node_rewire(rewired, 1, TWO_DIFF_NEIGHBORS_NODE1)
    raise ValueError(f"unknown hypothesis kind {kind!r}")


def _replicate_plain(spec, chol, edge_set, r):
    rng_key = replication_seed(spec.seed, r)
    p = chol.shape[0]
    rng = np.random.Generator(np.random.Philox(rng_key))
    X = rng.standard_normal((spec.n, p)) @ chol.T
    try:
        report = dn_statistic(X, edge_set, level=spec.level)
    except GgmGofError as exc:
        raise SimulationError(r, str(exc)) from exc
    return report.reject, report.statistic


def _replicate_paired(spec, chol, edge_set, r):
    rng_key = replication_seed(spec.seed, r)
    p = chol.shape[0]
    rng = np.random.Generator(np.random.Philox(rng_key))
    X = rng.standard_normal((spec.n, p)) @ chol.T
    try:
        plain, empowered = paired_statistics(
            X,
            edge_set,
            cn=spec.cn,
            delta_n=spec.delta_n,
            cn_mode=spec.cn_mode,
            level=spec.level,
        )
    except GgmGofError as exc:
        raise SimulationError(r, str(exc)) from exc
    return plain.reject, plain.statistic, empowered.reject, empowered.statistic


def _aggregate(rejects, statistics, keep):
    rejects = np.asarray(rejects, dtype=bool)
    R = rejects.size
    rate = float(rejects.sum()) / R
    return SimulationResult(
        rejection_rate=rate,
        replications=R,
        mc_standard_error=math.sqrt(rate * (1.0 - rate) / R),
        statistics=np.asarray(statistics, dtype=float) if keep else None,
    )


def _prepare(spec):
    omega = truth_precision(spec.truth)
    sigma = invert_to_covariance(omega)
    chol = np.linalg.cholesky(sigma)
    edge_set = hypothesis_edge_set(spec.hypothesis, spec.truth, omega=omega)
    return chol, edge_set


def run_experiment(spec, n_jobs=1):
    """Run one experiment; deterministic for a fixed spec.

    A failed replication aborts the whole run (resampling instead would
    bias the rejection rates); the raised :class:`SimulationError` carries
    the replication index.
    """
    chol, edge_set = _prepare(spec)
    if spec.variant == "both":
        return run_comparison(spec, n_jobs=n_jobs)
    if spec.variant == "empowered":
        rows = Parallel(n_jobs=n_jobs)(
            delayed(_replicate_paired)(spec, chol, edge_set, r)
            for r in range(spec.replications)
        )
        rejects = [row[2] for row in rows]
        stats = [row[3] for row in rows]
    else:
        rows = Parallel(n_jobs=n_jobs)(
            delayed(_replicate_plain)(spec, chol, edge_set, r)
            for r in range(spec.replications)
        )
        rejects = [row[0] for row in rows]
        stats = [row[1] for row in rows]
    return _aggregate(rejects, stats, spec.keep_statistics)


def run_comparison(spec, n_jobs=1):
    """Plain and empowered statistics on the same replication datasets."""
    chol, edge_set = _prepare(spec)
    rows = Parallel(n_jobs=n_jobs)(
        delayed(_replicate_paired)(spec, chol, edge_set, r)
        for r in range(spec.replications)
    )
    plain = _aggregate([r[0] for r in rows], [r[1] for r in rows], spec.keep_statistics)
    empowered = _aggregate([r[2] for r in rows], [r[3] for r in rows], spec.keep_statistics)
    return ComparisonResult(plain=plain, empowered=empowered)


_SPEC_KEYS = {
    "truth",
    "hypothesis",
    "n",
    "replications",
    "level",
    "variant",
    "cn",
    "delta_n",
    "cn_mode",
    "seed",
    "keep_statistics",
}


def load_simulation_spec(path):
    """Read a spec from its JSON mirror; unknown keys are rejected."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    unknown = set(payload) - _SPEC_KEYS
    if unknown:
        raise ValueError(f"unknown spec fields: {sorted(unknown)}")
    for required in ("truth", "hypothesis", "n", "replications"):
        if required not in payload:
            raise ValueError(f"spec file missing required field {required!r}")
    return SimulationSpec(**payload)


def save_simulation_spec(spec, path):
    payload = {
        "truth": dict(spec.truth),
        "hypothesis": dict(spec.hypothesis),
        "n": spec.n,
        "replications": spec.replications,
        "level": spec.level,
        "variant": spec.variant,
        "cn": spec.cn,
        "delta_n": spec.delta_n,
        "cn_mode": spec.cn_mode,
        "seed": spec.seed,
        "keep_statistics": spec.keep_statistics,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


CSV_HEADER = (
    "family,p,s0,n,hypothesis,variant,level,replications,rejection_rate,mc_standard_error"
)


def results_csv(spec, labeled_results):
    """Render ``(variant label, SimulationResult)`` pairs as CSV rows
    suitable for diffing against tabulated reference rates."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    truth = spec.truth
    hyp = spec.hypothesis
    hyp_label = hyp["kind"] if hyp["kind"] != "band" else f"band({hyp['width']})"
    for label, result in labeled_results:
        buf.write(
            f"{truth['family']},{truth['p']},{truth.get('s0', '')},{spec.n},"
            f"{hyp_label},{label},{spec.level},{result.replications},"
            f"{result.rejection_rate:.6g},{result.mc_standard_error:.6g}\n"
        )
    return buf.getvalue()
