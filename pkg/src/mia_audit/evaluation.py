"""Scoring attack decisions against ground truth."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .attack import Verdict, cbtta_attack, category_rule, rule_for
from .errors import IdMismatch, InvariantBreach, MissingGroundTruth, NotARefinement
from .estimation import compute_stats
from .partition import CategoryId, PartitionScheme, as_scheme, format_category
from .records import Dump, Split
from .stats import (
    CategoryStats,
    GlobalStats,
    Undefined,
    expected_metrics,
    expected_precision,
    global_from_categories,
    rule_masses,
)


def _ratio(num: float, den: float, reason: str) -> float | Undefined:
    return num / den if den > 0 else Undefined(reason)


def _num(value: float | Undefined) -> float | None:
    return None if isinstance(value, Undefined) else value


@dataclass(frozen=True)
class Confusion:
    """Counts of (verdict, true split); in-train is the positive class."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @classmethod
    def from_arrays(cls, reported_in: np.ndarray, is_train: np.ndarray) -> Confusion:
        reported_in = np.asarray(reported_in, dtype=bool)
        is_train = np.asarray(is_train, dtype=bool)
        tp = int(np.count_nonzero(reported_in & is_train))
        fp = int(np.count_nonzero(reported_in & ~is_train))
        fn = int(np.count_nonzero(~reported_in & is_train))
        return cls(tp, fp, len(is_train) - tp - fp - fn, fn)

    def __add__(self, other: Confusion) -> Confusion:
        return Confusion(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float | Undefined:
        return _ratio(self.tp + self.tn, self.total, "no decisions")

    @property
    def precision(self) -> float | Undefined:
        return _ratio(self.tp, self.tp + self.fp, "no in-train verdicts")

    @property
    def recall(self) -> float | Undefined:
        return _ratio(self.tp, self.tp + self.fn, "no training records")

    def metrics(self) -> dict:
        out: dict = {}
        for name in ("accuracy", "precision", "recall"):
            value = getattr(self, name)
            out[name] = _num(value)
            if isinstance(value, Undefined):
                out[f"{name}_reason"] = value.reason
        return out

    def counts(self) -> dict:
        return {"TP": self.tp, "FP": self.fp, "TN": self.tn, "FN": self.fn}


def expected_from_categories(per_category: Mapping[CategoryId, CategoryStats]) -> dict:
    """Expected aggregate metrics of the categorical attack under the given statistics."""
    cats = {k: v for k, v in per_category.items() if v.d > 0}
    fallback = rule_for(global_from_categories(cats.values()), fallback=True)
    tp = fp = tn = fn = 0.0
    for cs in cats.values():
        rule = category_rule(cs, fallback)
        side = cs.empty_side
        p0 = cs.p_train if cs.p_train is not None else 0.0
        p1 = cs.p_test if cs.p_test is not None else 0.0
        q = 1.0 if side == "test" else 0.0 if side == "train" else cs.q
        m = rule_masses(GlobalStats(q, p0, p1), rule.on_correct is Verdict.IN_TRAIN, rule.on_wrong is Verdict.IN_TRAIN)
        tp += m[0] * cs.d
        fp += m[1] * cs.d
        tn += m[2] * cs.d
        fn += m[3] * cs.d
    out = {
        "accuracy": tp + tn,
        "precision": _num(_ratio(tp, tp + fp, "")),
        "recall": _num(_ratio(tp, tp + fn, "")),
    }
    if out["precision"] is None:
        out["precision_reason"] = "no in-train verdicts expected"
    return out


def _expected_cell(stats: GlobalStats) -> dict:
    if not stats.gap_ok:
        return {"undefined": True, "reason": "train accuracy below test accuracy"}
    return expected_metrics(stats).to_dict()


@dataclass
class MetricsReport:
    empirical: Confusion
    expected: dict | None = None
    expected_by_category: dict[str, dict] = field(default_factory=dict)

    @property
    def deltas(self) -> dict:
        if not self.expected:
            return {}
        emp = self.empirical.metrics()
        out = {}
        for name in ("accuracy", "precision", "recall"):
            e, x = emp.get(name), self.expected.get(name)
            # never difference an undefined cell
            out[name] = None if e is None or x is None else e - x
        return out

    def to_dict(self) -> dict:
        return {
            "empirical": self.empirical.metrics(),
            "counts": self.empirical.counts(),
            "expected": self.expected,
            "expected_by_category": self.expected_by_category,
            "deltas": self.deltas,
        }


def confusion_of(decisions: Sequence, truth: Dump) -> Confusion:
    split = {r.id: r.split for r in truth.records}
    ids = [d.record_id for d in decisions]
    if len(ids) != len(split) or set(ids) != set(split):
        missing = sorted(set(split) - set(ids))[:5]
        extra = sorted(set(ids) - set(split))[:5]
        raise IdMismatch(f"decision ids differ from truth ids (missing {missing}, unexpected {extra})")
    tp = fp = tn = fn = 0
    for d in decisions:
        s = split[d.record_id]
        if s is Split.UNKNOWN:
            raise MissingGroundTruth(f"record {d.record_id!r} has no split tag")
        reported = d.verdict is Verdict.IN_TRAIN
        if s is Split.TRAIN:
            tp += reported
            fn += not reported
        else:
            fp += reported
            tn += not reported
    return Confusion(tp, fp, tn, fn)


def score(
    decisions: Sequence,
    truth: Dump,
    stats: GlobalStats | Mapping[CategoryId, CategoryStats] | None = None,
) -> MetricsReport:
    """Confusion counts of ``decisions`` plus, if ``stats`` is given, the expected metrics."""
    report = MetricsReport(confusion_of(decisions, truth))
    if isinstance(stats, GlobalStats):
        report.expected = _expected_cell(stats)
        if report.expected.get("undefined"):
            report.expected = None
    elif stats is not None:
        report.expected = expected_from_categories(stats)
        for cid, cs in stats.items():
            if cs.d > 0 and cs.empty_side is None:
                report.expected_by_category[format_category(cid)] = _expected_cell(cs.global_stats())
    return report


def _check_refinement(fine: PartitionScheme, coarse: PartitionScheme, dump: Dump) -> None:
    parent: dict[CategoryId, CategoryId] = {}
    for record in dump.records:
        f, c = fine.assign(record), coarse.assign(record)
        if parent.setdefault(f, c) != c:
            raise NotARefinement(f"category {f} of {fine} straddles {parent[f]} and {c} of {coarse}")


def attack_with_own_stats(scheme: PartitionScheme | str, dump: Dump):
    """Categorical attack using statistics computed from ``dump`` itself."""
    per_category = compute_stats(dump, scheme)
    return cbtta_attack(scheme, per_category, global_from_categories(per_category.values()), dump.records)


def refinement_comparison(
    fine: PartitionScheme | str, coarse: PartitionScheme | str, dump: Dump
) -> tuple[float, float]:
    """Exact-parameter accuracies of the fine and coarse categorical attacks."""
    fine, coarse = as_scheme(fine), as_scheme(coarse)
    _check_refinement(fine, coarse, dump)
    cf = confusion_of(attack_with_own_stats(fine, dump), dump)
    cc = confusion_of(attack_with_own_stats(coarse, dump), dump)
    if cf.tp + cf.tn < cc.tp + cc.tn:
        raise InvariantBreach(f"refinement {fine} scored below {coarse} with exact statistics")
    n = max(len(dump), 1)
    return (cf.tp + cf.tn) / n, (cc.tp + cc.tn) / n


# (dataset, train accuracy, test accuracy, published precision of the attack)
TABLE1_ROWS: tuple[tuple[str, float, float, float], ...] = (
    ("Adult", 0.848, 0.842, 0.502),
    ("MNIST", 0.984, 0.928, 0.515),
    ("Location", 1.0, 0.673, 0.598),
    ("Purchase(2)", 0.999, 0.984, 0.504),
    ("Purchase(10)", 0.999, 0.866, 0.536),
    ("Purchase(20)", 1.0, 0.781, 0.561),
    ("Purchase(50)", 1.0, 0.693, 0.591),
    ("Purchase(100)", 0.999, 0.659, 0.603),
    ("TX hosp. stay", 0.668, 0.517, 0.564),
)


@dataclass(frozen=True)
class Table1Row:
    dataset: str
    p0: float
    p1: float
    btta_precision: float
    published: float

    @property
    def rendered(self) -> str:
        return f"{self.btta_precision:.3f}"


def table1_reproduction(q: float = 0.5) -> list[Table1Row]:
    rows = []
    for name, p0, p1, published in TABLE1_ROWS:
        precision = expected_precision(GlobalStats(q, p0, p1))
        rows.append(Table1Row(name, p0, p1, precision, published))
    return rows
