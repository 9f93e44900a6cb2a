"""Closed-form results for the Bayesian take-the-typical attack.

Everything here is a pure function of a :class:`GlobalStats` triple
``(q, p0, p1)``: the training proportion, the model's accuracy on its
training split and its accuracy on the held-out split.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable
from dataclasses import dataclass

from .errors import EmptyCategory, GapViolation, InvalidStats, InvariantBreach, MassMismatch

MASS_TOLERANCE = 1e-9


class CaseKind(str, enum.Enum):
    CASE1 = "Case1"  # always report in-train
    CASE2 = "Case2"  # always report not-in-train
    CASE3 = "Case3"  # report in-train iff the prediction is correct
    CASE4 = "Case4"  # report in-train iff the prediction is wrong; needs p0 < p1

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Undefined:
    """Marker for a metric whose defining ratio has a zero denominator."""

    reason: str

    def __bool__(self) -> bool:
        return False


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise InvalidStats(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class GlobalStats:
    """Training proportion ``q``, train accuracy ``p0``, test accuracy ``p1``.

    ``q`` is allowed to sit on the closed interval so that degenerate
    categories (all-train or all-test) can be expressed; the usual audit
    setting has ``0 < q < 1``.
    """

    q: float
    p0: float
    p1: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", _check_probability("q", self.q))
        object.__setattr__(self, "p0", _check_probability("p0", self.p0))
        object.__setattr__(self, "p1", _check_probability("p1", self.p1))

    @property
    def gap(self) -> float:
        return self.p0 - self.p1

    @property
    def gap_ok(self) -> bool:
        return self.p0 >= self.p1

    def inequalities(self) -> tuple[bool, bool]:
        """The two tests of the attack: (correct -> in-train, wrong -> in-train)."""
        q, p0, p1 = self.q, self.p0, self.p1
        return q * p0 >= (1 - q) * p1, q * (1 - p0) >= (1 - q) * (1 - p1)


def classify_case(stats: GlobalStats) -> CaseKind:
    on_correct, on_wrong = stats.inequalities()
    if on_correct and on_wrong:
        return CaseKind.CASE1
    if not on_correct and not on_wrong:
        return CaseKind.CASE2
    if on_correct:
        return CaseKind.CASE3
    if stats.p0 == stats.p1 == 1.0:
        # 0 >= 0 on a misclassification that never happens; what remains is Case2
        return CaseKind.CASE2
    if stats.gap_ok:
        raise InvariantBreach(f"Case4 reached with p0 >= p1 for {stats}")
    return CaseKind.CASE4


def _require_gap(stats: GlobalStats) -> None:
    if not stats.gap_ok:
        raise GapViolation(
            f"closed forms need train accuracy >= test accuracy, got p0={stats.p0} < p1={stats.p1}"
        )


def expected_accuracy(stats: GlobalStats) -> float:
    _require_gap(stats)
    case = classify_case(stats)
    if case is CaseKind.CASE1:
        return stats.q
    if case is CaseKind.CASE2:
        return 1 - stats.q
    return stats.q * stats.p0 + (1 - stats.q) * (1 - stats.p1)


def expected_precision(stats: GlobalStats) -> float | Undefined:
    """Expected precision of the in-train reports.

    In Case 1 every point is reported, so precision is the fraction of
    points that really are in training, ``q``.
    """
    _require_gap(stats)
    case = classify_case(stats)
    q, p0, p1 = stats.q, stats.p0, stats.p1
    if case is CaseKind.CASE1:
        return q
    if case is CaseKind.CASE2:
        return Undefined("Case2 never reports in-train")
    reported = q * p0 + (1 - q) * p1
    if reported == 0:
        # Case3 on a model that is never correct: the in-train branch has probability zero
        return Undefined("in-train reports have probability zero")
    return q * p0 / reported


def expected_recall(stats: GlobalStats) -> float:
    _require_gap(stats)
    case = classify_case(stats)
    if case is CaseKind.CASE1:
        return 1.0
    if case is CaseKind.CASE2:
        return 0.0
    return stats.p0


def vulnerability_lower_bound(stats: GlobalStats) -> tuple[float, float]:
    """Return ``(bound, weak_bound)``; both are at least 1/2 when p0 >= p1."""
    _require_gap(stats)
    q = stats.q
    bound = max(q, 1 - q, q * stats.p0 + (1 - q) * (1 - stats.p1))
    weak = max(q, 1 - q, min(q, 1 - q) * (1 + stats.gap))
    return bound, weak


@dataclass(frozen=True)
class ExpectedMetrics:
    accuracy: float
    precision: float | Undefined
    recall: float
    case: CaseKind
    lower_bound: float
    gap: float

    def to_dict(self) -> dict:
        out = {
            "accuracy": self.accuracy,
            "precision": None if isinstance(self.precision, Undefined) else self.precision,
            "recall": self.recall,
            "case": self.case.value,
            "lower_bound": self.lower_bound,
            "gap": self.gap,
        }
        if isinstance(self.precision, Undefined):
            out["precision_reason"] = self.precision.reason
        return out


def expected_metrics(stats: GlobalStats) -> ExpectedMetrics:
    return ExpectedMetrics(
        accuracy=expected_accuracy(stats),
        precision=expected_precision(stats),
        recall=expected_recall(stats),
        case=classify_case(stats),
        lower_bound=vulnerability_lower_bound(stats)[0],
        gap=stats.gap,
    )


def rule_masses(stats: GlobalStats, on_correct: bool, on_wrong: bool) -> tuple[float, float, float, float]:
    """Expected (TP, FP, TN, FN) masses of a deterministic rule.

    ``on_correct``/``on_wrong`` say whether the rule reports in-train for a
    correctly/incorrectly classified point. Valid for any stats, gap or not.
    """
    q, p0, p1 = stats.q, stats.p0, stats.p1
    tp = fp = tn = fn = 0.0
    for reported, train_mass, test_mass in (
        (on_correct, q * p0, (1 - q) * p1),
        (on_wrong, q * (1 - p0), (1 - q) * (1 - p1)),
    ):
        if reported:
            tp += train_mass
            fp += test_mass
        else:
            fn += train_mass
            tn += test_mass
    return tp, fp, tn, fn


def bayes_accuracy(stats: GlobalStats) -> float:
    """Accuracy of the Bayes rule; equals :func:`expected_accuracy` when p0 >= p1."""
    tp, _, tn, _ = rule_masses(stats, *stats.inequalities())
    return tp + tn


@dataclass(frozen=True)
class CategoryStats:
    """Masses and accuracies of one category.

    ``p_train``/``p_test`` are ``None`` when the corresponding part of the
    category is empty (its mass is then 0).
    """

    d_train: float
    d_test: float
    p_train: float | None
    p_test: float | None

    def __post_init__(self) -> None:
        for name in ("d_train", "d_test"):
            _check_probability(name, getattr(self, name))
        for name in ("p_train", "p_test"):
            value = getattr(self, name)
            if value is not None:
                _check_probability(name, value)

    @property
    def d(self) -> float:
        return self.d_train + self.d_test

    @property
    def q(self) -> float:
        if self.d <= 0:
            raise EmptyCategory("category has zero mass")
        return self.d_train / self.d

    @property
    def p(self) -> float:
        return derive_category_quantities(self)[2]

    @property
    def empty_side(self) -> str | None:
        """``"train"`` or ``"test"`` if exactly that part carries no mass."""
        if self.d_train == 0 or self.p_train is None:
            return "train"
        if self.d_test == 0 or self.p_test is None:
            return "test"
        return None

    def global_stats(self) -> GlobalStats:
        """The per-category triple ``(q_i, p_i^train, p_i^test)``."""
        if self.p_train is None or self.p_test is None:
            raise EmptyCategory("category accuracy is undefined on an empty split")
        return GlobalStats(self.q, self.p_train, self.p_test)


def _accuracy_mass(acc: float | None, mass: float) -> float:
    if mass == 0:
        return 0.0
    if acc is None:
        raise EmptyCategory("non-empty split with undefined accuracy")
    return acc * mass


def derive_category_quantities(cs: CategoryStats) -> tuple[float, float, float]:
    """Return ``(d_i, q_i, p_i)`` for one category."""
    d = cs.d_train + cs.d_test
    if d <= 0:
        raise EmptyCategory("category has zero mass")
    p = (_accuracy_mass(cs.p_train, cs.d_train) + _accuracy_mass(cs.p_test, cs.d_test)) / d
    return d, cs.d_train / d, p


def aggregate_categories(categories: Iterable[CategoryStats]) -> tuple[float, float]:
    """Overall ``(q, p)`` from the per-category quantities."""
    cats = list(categories)
    total = math.fsum(c.d_train + c.d_test for c in cats)
    if abs(total - 1.0) > MASS_TOLERANCE:
        raise MassMismatch(f"category masses sum to {total!r}, expected 1")
    q = p = 0.0
    for c in cats:
        if c.d_train + c.d_test == 0:
            continue
        d, qi, pi = derive_category_quantities(c)
        q += qi * d
        p += pi * d
    return q, p


def global_from_categories(categories: Iterable[CategoryStats]) -> GlobalStats:
    """Pool categories back into one ``(q, p0, p1)`` triple."""
    cats = list(categories)
    d_train = math.fsum(c.d_train for c in cats)
    d_test = math.fsum(c.d_test for c in cats)
    total = d_train + d_test
    if total <= 0:
        raise EmptyCategory("no category carries mass")
    hit_train = math.fsum(_accuracy_mass(c.p_train, c.d_train) for c in cats)
    hit_test = math.fsum(_accuracy_mass(c.p_test, c.d_test) for c in cats)
    # an empty split has no accuracy; 0 keeps the triple valid and is never consulted
    p0 = hit_train / d_train if d_train > 0 else 0.0
    p1 = hit_test / d_test if d_test > 0 else 0.0
    return GlobalStats(d_train / total, min(p0, 1.0), min(p1, 1.0))
