"""Constraint solving by maximal-set resampling with oracle guarantees.

The package provides the resampling engine, concrete oracles over
variables, permutations, perfect matchings, and spanning trees,
independence-polynomial convergence criteria, a finite-space oracle
synthesizer, statistical verification of the oracle contract, and
ready-made solvers for three coloring applications.
"""

from .apps import (
    ColorMatrix,
    ColoredCompleteGraph,
    LatinBundle,
    RainbowMatchingBundle,
    RainbowTreeBundle,
    SolutionReport,
    build_latin_instance,
    build_rainbow_matching_instance,
    build_rainbow_tree_instance,
    distinct_color_matrix,
    rainbow_edge_coloring,
    random_color_matrix,
    random_edge_coloring,
    round_robin_coloring,
    solve,
    validate_disjoint_transversals,
    validate_rainbow_matching,
    validate_rainbow_trees,
)
from .engine import RunLog, log_follows, maximal_set_resample
from .graphs import (
    DependencyGraph,
    RuleGraph,
    StableSetSequence,
    enumerate_independent_sets,
    validate_sequence,
)
from .oracles import (
    MatchingBundle,
    OracleEventError,
    PatternEvent,
    PermutationBundle,
    ProductBundle,
    TreeBundle,
    VariableBundle,
    VariableEvent,
    VariableState,
)
from .polynomials import (
    CriterionParams,
    PolynomialTable,
    build_table,
    check_cll,
    check_gll,
    in_shearer_region,
    partition_function,
    predicted_bound,
    sequence_mass,
    shearer_report,
    shearer_slack,
)
from .synth import (
    ExplicitBundle,
    ExplicitSpace,
    HallCertificate,
    SynthesizedOracle,
    check_lopsidependency,
    synthesize,
)
from .verify import (
    AppendixABundle,
    DistributionTestReport,
    StreakReport,
    appendix_a_bundle,
    derive_seed,
    exhaustive_r2,
    measure_consecutive_runs,
    test_r1,
    test_r2,
)

__version__ = "0.1.0"

__all__ = [
    "AppendixABundle",
    "ColorMatrix",
    "ColoredCompleteGraph",
    "CriterionParams",
    "DependencyGraph",
    "DistributionTestReport",
    "ExplicitBundle",
    "ExplicitSpace",
    "HallCertificate",
    "LatinBundle",
    "MatchingBundle",
    "OracleEventError",
    "PatternEvent",
    "PermutationBundle",
    "PolynomialTable",
    "ProductBundle",
    "RainbowMatchingBundle",
    "RainbowTreeBundle",
    "RuleGraph",
    "RunLog",
    "SolutionReport",
    "StableSetSequence",
    "StreakReport",
    "SynthesizedOracle",
    "TreeBundle",
    "VariableBundle",
    "VariableEvent",
    "VariableState",
    "appendix_a_bundle",
    "build_latin_instance",
    "build_rainbow_matching_instance",
    "build_rainbow_tree_instance",
    "build_table",
    "check_cll",
    "check_gll",
    "check_lopsidependency",
    "derive_seed",
    "distinct_color_matrix",
    "enumerate_independent_sets",
    "exhaustive_r2",
    "in_shearer_region",
    "log_follows",
    "maximal_set_resample",
    "measure_consecutive_runs",
    "partition_function",
    "predicted_bound",
    "rainbow_edge_coloring",
    "random_color_matrix",
    "random_edge_coloring",
    "round_robin_coloring",
    "sequence_mass",
    "shearer_report",
    "shearer_slack",
    "solve",
    "synthesize",
    "test_r1",
    "test_r2",
    "validate_disjoint_transversals",
    "validate_rainbow_matching",
    "validate_rainbow_trees",
    "validate_sequence",
]
