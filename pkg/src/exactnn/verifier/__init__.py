"""Verification engines: exhaustive enumeration, interval bounds, and
complete branch-and-bound over relu phases, plus the lemma checkers."""

from .bab import (
    UnsupportedQueryError,
    verify_reach_bab,
    verify_robustness_bab,
)
from .brute import enumerate_ball, verify_robustness_brute
from .explain import PatternReport, explain_patterns
from .feasibility import LinearConstraint, find_feasible_point
from .intervals import Box, interval_propagate
from .lemmas import (
    ExtremeValuesReport,
    MonotonicityReport,
    check_extreme_values,
    check_monotonicity,
)
from .lowering import (
    ACTIVE,
    INACTIVE,
    AffineLayer,
    LinearForm,
    UnsupportedLayerError,
    affine_forms,
    lower_network,
    relu_nodes,
)
from .verdict import PROVED, REFUTED, TIMEOUT, SearchStats, Verdict

__all__ = [
    "ACTIVE",
    "AffineLayer",
    "Box",
    "ExtremeValuesReport",
    "INACTIVE",
    "LinearConstraint",
    "LinearForm",
    "MonotonicityReport",
    "PatternReport",
    "PROVED",
    "REFUTED",
    "SearchStats",
    "TIMEOUT",
    "UnsupportedLayerError",
    "UnsupportedQueryError",
    "Verdict",
    "affine_forms",
    "check_extreme_values",
    "check_monotonicity",
    "enumerate_ball",
    "explain_patterns",
    "find_feasible_point",
    "interval_propagate",
    "lower_network",
    "relu_nodes",
    "verify_reach_bab",
    "verify_robustness_bab",
    "verify_robustness_brute",
]
