"""Membership-inference audits driven by train/test accuracy statistics."""

from .attack import MembershipDecision, Verdict, btta_attack, btta_decide, cbtta_attack, take_the_typical_decide
from .estimation import assume_uniform_q, compute_stats, estimate_from_shadows
from .evaluation import Confusion, MetricsReport, refinement_comparison, score, table1_reproduction
from .partition import PartitionScheme, assign_category, category_count, ppc, ppl, ptc, ptl
from .records import Dump, PredictionRecord, Split, make_record, predicted_label
from .stats import (
    CaseKind,
    CategoryStats,
    ExpectedMetrics,
    GlobalStats,
    Undefined,
    aggregate_categories,
    classify_case,
    derive_category_quantities,
    expected_accuracy,
    expected_metrics,
    expected_precision,
    expected_recall,
    vulnerability_lower_bound,
)

__version__ = "0.1.0"
