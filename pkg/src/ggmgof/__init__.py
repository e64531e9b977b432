"""Goodness-of-fit tests for Gaussian graphical model structures.

The core surface follows the scikit-learn estimator convention:
:class:`ConstrainedPrecision` fits a precision matrix restricted to a
hypothesized graph, and :class:`StructureTest` runs the global,
node-local, or consistency-empowered goodness-of-fit test.  Functional
equivalents, matrix generators, a seeded Monte Carlo engine, the
repeated-measures regression, and the weekly-panel ingestion live in the
submodules and are re-exported here.
"""

from .errors import (
    ColumnSingularError,
    DegenerateEstimateError,
    GgmGofError,
    InsufficientDataError,
    NotPositiveDefiniteError,
    ParseError,
    RegionMappingError,
    SimulationError,
    SingularDesignError,
)
from .estimation import (
    ConstrainedPrecision,
    ConstrainedPrecisionFit,
    entry_standard_error,
    fit_constrained_precision,
    fit_single_column,
    sample_covariance,
)
from .gee import BootstrapSummary, GeeFit, GeeProblem, fit_gee, subsample_bootstrap
from .gof import (
    GumbelLimit,
    StructureTest,
    TestReport,
    decide,
    dn_statistic,
    empowered_statistic,
    global_centering,
    gumbel_cdf,
    gumbel_quantile,
    node_centering,
    node_statistic,
    paired_statistics,
    theta_hat,
)
from .matrices import (
    banded_exponential_precision,
    banded_polynomial_precision,
    factor_precision,
    identity_precision,
    invert_to_covariance,
    load_matrix_csv,
    save_matrix_csv,
)
from .montecarlo import (
    ComparisonResult,
    SimulationResult,
    SimulationSpec,
    hypothesis_edge_set,
    load_simulation_spec,
    results_csv,
    run_comparison,
    run_experiment,
    save_simulation_spec,
    truth_precision,
)
from .sampling import replication_seed, sample_mvn
from .structure import (
    EdgeSet,
    StructureStats,
    band_edge_set,
    isolated_edge_set,
    load_edge_set,
    node_rewire,
    save_edge_set,
    structure_stats,
    support_edge_set,
)

__version__ = "0.1.0"

__all__ = [
    "BootstrapSummary",
    "ColumnSingularError",
    "ComparisonResult",
    "ConstrainedPrecision",
    "ConstrainedPrecisionFit",
    "DegenerateEstimateError",
    "EdgeSet",
    "GeeFit",
    "GeeProblem",
    "GgmGofError",
    "GumbelLimit",
    "InsufficientDataError",
    "NotPositiveDefiniteError",
    "ParseError",
    "RegionMappingError",
    "SimulationError",
    "SimulationResult",
    "SimulationSpec",
    "SingularDesignError",
    "StructureStats",
    "StructureTest",
    "TestReport",
    "band_edge_set",
    "banded_exponential_precision",
    "banded_polynomial_precision",
    "decide",
    "dn_statistic",
    "empowered_statistic",
    "entry_standard_error",
    "factor_precision",
    "fit_constrained_precision",
    "fit_gee",
    "fit_single_column",
    "global_centering",
    "gumbel_cdf",
    "gumbel_quantile",
    "hypothesis_edge_set",
    "identity_precision",
    "invert_to_covariance",
    "isolated_edge_set",
    "load_edge_set",
    "load_matrix_csv",
    "load_simulation_spec",
    "node_centering",
    "node_rewire",
    "node_statistic",
    "paired_statistics",
    "replication_seed",
    "results_csv",
    "run_comparison",
    "run_experiment",
    "sample_covariance",
    "sample_mvn",
    "save_edge_set",
    "save_matrix_csv",
    "save_simulation_spec",
    "structure_stats",
    "subsample_bootstrap",
    "support_edge_set",
    "theta_hat",
    "truth_precision",
]
