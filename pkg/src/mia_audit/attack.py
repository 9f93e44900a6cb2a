"""Membership decisions: the plain attack and its per-category variant."""

from __future__ import annotations

import enum
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .partition import CategoryId, PartitionScheme, as_scheme
from .records import PredictionRecord
from .stats import CaseKind, CategoryStats, GlobalStats, classify_case

GLOBAL_CATEGORY: CategoryId = ()


class Verdict(str, enum.Enum):
    IN_TRAIN = "InTrain"
    NOT_IN_TRAIN = "NotInTrain"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class MembershipDecision:
    record_id: str
    verdict: Verdict
    category: CategoryId
    correct_prediction: bool
    case_used: CaseKind
    fallback: bool = False
    inverted_gap: bool = False


def btta_decide(stats: GlobalStats, correct: bool) -> Verdict:
    on_correct, on_wrong = stats.inequalities()
    hit = on_correct if correct else on_wrong
    return Verdict.IN_TRAIN if hit else Verdict.NOT_IN_TRAIN


def take_the_typical_decide(q: float) -> Verdict:
    return Verdict.IN_TRAIN if q >= 0.5 else Verdict.NOT_IN_TRAIN


@dataclass(frozen=True)
class Rule:
    on_correct: Verdict
    on_wrong: Verdict
    case: CaseKind
    fallback: bool = False
    inverted_gap: bool = False

    def __call__(self, correct: bool) -> Verdict:
        return self.on_correct if correct else self.on_wrong


def rule_for(stats: GlobalStats, fallback: bool = False) -> Rule:
    return Rule(
        btta_decide(stats, True),
        btta_decide(stats, False),
        classify_case(stats),
        fallback=fallback,
        inverted_gap=not stats.gap_ok,
    )


def category_rule(cs: CategoryStats | None, fallback: Rule) -> Rule:
    if cs is None or cs.d <= 0:
        return fallback
    side = cs.empty_side
    # one-sided categories are the q -> 1 and q -> 0 limits of the Bayes rule
    if side == "test":
        return Rule(Verdict.IN_TRAIN, Verdict.IN_TRAIN, CaseKind.CASE1)
    if side == "train":
        return Rule(Verdict.NOT_IN_TRAIN, Verdict.NOT_IN_TRAIN, CaseKind.CASE2)
    return rule_for(cs.global_stats())


def btta_attack(stats: GlobalStats, records: Sequence[PredictionRecord]) -> list[MembershipDecision]:
    rule = rule_for(stats)
    out = []
    for record in records:
        record.validate()
        correct = record.correct
        out.append(
            MembershipDecision(
                record.id, rule(correct), GLOBAL_CATEGORY, correct, rule.case,
                inverted_gap=rule.inverted_gap,
            )
        )
    return out


def cbtta_attack(
    scheme: PartitionScheme | str,
    per_category: Mapping[CategoryId, CategoryStats],
    fallback: GlobalStats,
    records: Sequence[PredictionRecord],
) -> list[MembershipDecision]:
    """Attack each record with the statistics of its own category.

    Records whose category is missing from ``per_category`` (or has no
    mass) are decided with ``fallback`` and flagged.
    """
    scheme = as_scheme(scheme)
    default = rule_for(fallback, fallback=True)
    rules: dict[CategoryId, Rule] = {}
    out = []
    for record in records:
        record.validate()
        cid = scheme.assign(record)
        rule = rules.get(cid)
        if rule is None:
            rule = rules[cid] = category_rule(per_category.get(cid), default)
        correct = record.correct
        out.append(
            MembershipDecision(
                record.id, rule(correct), cid, correct, rule.case,
                fallback=rule.fallback, inverted_gap=rule.inverted_gap,
            )
        )
    return out
