"""Discrete belief networks and influence diagrams for diagnostic reasoning.

The package covers the full consultation loop: canonical noisy-OR/MAX model
compilation, exact posterior inference by variable elimination, expected-cost
decision recommendations, sensitivity analysis of both posteriors and
decisions to probability-assessment error, a text network language, a CLI,
and an HTTP session service for interactive clients.
"""

from .model import (
    ASSESSMENT_PALETTE,
    Cpt,
    CycleError,
    DeterministicRule,
    Evidence,
    Network,
    NetworkError,
    Node,
    UtilityTable,
    ValidationIssue,
    ValidationReport,
    VariableSpec,
    d_separated,
    expand_deterministic_max,
    topological_order,
    validate,
)
from .canonical import (
    CountDiscrepancy,
    MaxCause,
    NoisyMaxSpec,
    NoisyOrSpec,
    ParameterCounts,
    ParameterError,
    compile_to_cpt,
    count_discrepancy,
    diff_cpts,
    expand_leaky_noisy_or,
    expand_noisy_max,
    expand_noisy_or,
    parameter_counts,
)
from .inference import (
    Factor,
    InferenceError,
    Posterior,
    Query,
    StateSpaceOverflowError,
    UnresolvedDecisionError,
    ZeroProbabilityEvidenceError,
    enumerate_joint,
    posterior,
    prob_of_evidence,
)
from .decision import (
    DecisionError,
    DecisionRecommendation,
    expected_utility,
    recommend,
)
from .sensitivity import (
    ChainPathError,
    CptCell,
    Event,
    LinkSensitivity,
    LogOddsDecomposition,
    OddsForm,
    SweepPoint,
    SweepTrace,
    chain_sensitivity,
    cpt_parameter_sweep,
    likelihood_sensitivity,
    log_odds_decomposition,
    posterior_from_odds,
    sensitivity_range,
)
from .netlang import (
    EvidenceResult,
    ParseDiagnostic,
    ParseResult,
    SourceSpan,
    parse_evidence,
    parse_network,
    serialize_evidence,
    serialize_network,
)

__version__ = "1.0.0"

__all__ = [
    "ASSESSMENT_PALETTE",
    "ChainPathError",
    "CountDiscrepancy",
    "Cpt",
    "CptCell",
    "CycleError",
    "DecisionError",
    "DecisionRecommendation",
    "DeterministicRule",
    "Event",
    "Evidence",
    "EvidenceResult",
    "Factor",
    "InferenceError",
    "LinkSensitivity",
    "LogOddsDecomposition",
    "MaxCause",
    "Network",
    "NetworkError",
    "NoisyMaxSpec",
    "NoisyOrSpec",
    "Node",
    "OddsForm",
    "ParameterCounts",
    "ParameterError",
    "ParseDiagnostic",
    "ParseResult",
    "Posterior",
    "Query",
    "SourceSpan",
    "StateSpaceOverflowError",
    "SweepPoint",
    "SweepTrace",
    "UnresolvedDecisionError",
    "UtilityTable",
    "ValidationIssue",
    "ValidationReport",
    "VariableSpec",
    "ZeroProbabilityEvidenceError",
    "chain_sensitivity",
    "compile_to_cpt",
    "count_discrepancy",
    "cpt_parameter_sweep",
    "d_separated",
    "diff_cpts",
    "enumerate_joint",
    "expand_deterministic_max",
    "expand_leaky_noisy_or",
    "expand_noisy_max",
    "expand_noisy_or",
    "expected_utility",
    "likelihood_sensitivity",
    "log_odds_decomposition",
    "parameter_counts",
    "parse_evidence",
    "parse_network",
    "posterior",
    "posterior_from_odds",
    "prob_of_evidence",
    "recommend",
    "sensitivity_range",
    "serialize_evidence",
    "serialize_network",
    "topological_order",
    "validate",
]
