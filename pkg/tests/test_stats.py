import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mia_audit.errors import EmptyCategory, GapViolation, InvalidStats, MassMismatch
from mia_audit.stats import (
    CaseKind,
    CategoryStats,
    GlobalStats,
    Undefined,
    aggregate_categories,
    bayes_accuracy,
    classify_case,
    derive_category_quantities,
    expected_accuracy,
    expected_metrics,
    expected_precision,
    expected_recall,
    global_from_categories,
    vulnerability_lower_bound,
)

unit = st.floats(0.0, 1.0, allow_nan=False)
open_unit = st.floats(1e-6, 1 - 1e-6, allow_nan=False)


@st.composite
def gap_ok_stats(draw):
    q = draw(open_unit)
    a, b = draw(unit), draw(unit)
    return GlobalStats(q, max(a, b), min(a, b))


def mc_accuracy(q, p0, p1, n, seed):
    """Independent Monte Carlo of the correctness-reveals-membership rule."""
    rng = np.random.default_rng(seed)
    train = rng.random(n) < q
    correct = rng.random(n) < np.where(train, p0, p1)
    return np.mean(train == correct)


class TestGlobalStats:
    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidStats):
            GlobalStats(1.2, 0.5, 0.5)
        with pytest.raises(InvalidStats):
            GlobalStats(0.5, -0.1, 0.5)
        with pytest.raises(InvalidStats):
            GlobalStats(0.5, 0.5, float("nan"))

    def test_gap_flag(self):
        assert GlobalStats(0.5, 0.9, 0.8).gap_ok
        assert not GlobalStats(0.5, 0.8, 0.9).gap_ok
        assert GlobalStats(0.5, 0.9, 0.8).gap == pytest.approx(0.1)


class TestClassifyCase:
    @pytest.mark.parametrize(
        "q, p0, p1, case",
        [
            (0.5, 0.984, 0.928, CaseKind.CASE3),
            (0.6, 0.85, 0.80, CaseKind.CASE1),  # 0.51 >= 0.32 and 0.09 >= 0.08
            (0.3, 0.90, 0.85, CaseKind.CASE2),  # 0.27 < 0.595 and 0.03 < 0.105
            (0.4, 0.5, 0.9, CaseKind.CASE4),  # 0.20 < 0.54 and 0.20 >= 0.06
        ],
    )
    def test_examples(self, q, p0, p1, case):
        assert classify_case(GlobalStats(q, p0, p1)) is case

    def test_zero_gap_half_is_case1(self):
        assert classify_case(GlobalStats(0.5, 0.7, 0.7)) is CaseKind.CASE1

    @given(gap_ok_stats())
    def test_case4_never_with_gap(self, stats):
        assert classify_case(stats) is not CaseKind.CASE4

    def test_table1_rows_are_case3(self):
        for p0, p1 in [(0.848, 0.842), (1.0, 0.673), (0.668, 0.517)]:
            assert classify_case(GlobalStats(0.5, p0, p1)) is CaseKind.CASE3


class TestExpectedAccuracy:
    def test_location_against_monte_carlo(self):
        oracle = mc_accuracy(0.5, 1.0, 0.673, 10**6, seed=1)
        value = expected_accuracy(GlobalStats(0.5, 1.0, 0.673))
        assert abs(oracle - 0.6635) < 0.002
        assert value == pytest.approx(0.6635, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 0.3, 0.5, 0.99, 1.0])
    def test_zero_gap_is_half(self, p):
        assert expected_accuracy(GlobalStats(0.5, p, p)) == 0.5

    def test_case1(self):
        assert expected_accuracy(GlobalStats(0.7, 0.9, 0.9)) == pytest.approx(0.7)

    def test_rejects_inverted_gap(self):
        for fn in (expected_accuracy, expected_precision, expected_recall, vulnerability_lower_bound):
            with pytest.raises(GapViolation):
                fn(GlobalStats(0.4, 0.5, 0.9))

    @given(gap_ok_stats())
    def test_dominates_take_the_typical(self, stats):
        acc = expected_accuracy(stats)
        base = max(stats.q, 1 - stats.q)
        assert acc >= base - 1e-12
        if classify_case(stats) is not CaseKind.CASE3:
            assert acc == pytest.approx(base, abs=1e-12)

    @given(gap_ok_stats())
    def test_matches_bayes_rule_masses(self, stats):
        assert expected_accuracy(stats) == pytest.approx(bayes_accuracy(stats), abs=1e-12)


class TestExpectedPrecision:
    @pytest.mark.parametrize(
        "p0, p1, published",
        [(0.848, 0.842, 0.502), (1.0, 0.673, 0.598), (0.999, 0.659, 0.603)],
    )
    def test_table1(self, p0, p1, published):
        assert abs(expected_precision(GlobalStats(0.5, p0, p1)) - published) <= 0.0005

    def test_case1_reports_everything(self):
        # every point reported in-train, so precision is the train fraction
        assert expected_precision(GlobalStats(0.7, 0.9, 0.9)) == pytest.approx(0.7)

    def test_zero_gap_half(self):
        assert expected_precision(GlobalStats(0.5, 0.6, 0.6)) == 0.5

    def test_case2_undefined(self):
        value = expected_precision(GlobalStats(0.3, 0.9, 0.85))
        assert isinstance(value, Undefined)
        assert "Case2" in value.reason
        with pytest.raises(TypeError):
            value + 1.0


class TestExpectedRecall:
    def test_examples(self):
        assert expected_recall(GlobalStats(0.5, 0.984, 0.928)) == 0.984
        assert expected_recall(GlobalStats(0.3, 0.90, 0.85)) == 0
        assert expected_recall(GlobalStats(0.7, 0.9, 0.9)) == 1

    def test_metrics_bundle(self):
        m = expected_metrics(GlobalStats(0.3, 0.9, 0.85))
        assert m.case is CaseKind.CASE2
        d = m.to_dict()
        assert d["precision"] is None and d["precision_reason"]
        assert d["recall"] == 0.0


class TestLowerBound:
    def test_location(self):
        bound, weak = vulnerability_lower_bound(GlobalStats(0.5, 1.0, 0.673))
        assert bound == pytest.approx(0.6635, abs=1e-12)
        assert weak == pytest.approx(0.6635, abs=1e-12)

    def test_zero_gap(self):
        assert vulnerability_lower_bound(GlobalStats(0.5, 0.8, 0.8))[0] == 0.5

    def test_three_way_max(self):
        bound, weak = vulnerability_lower_bound(GlobalStats(0.9, 0.9, 0.8))
        assert bound == pytest.approx(0.9)
        assert 0.9 * 0.9 + 0.1 * 0.2 == pytest.approx(0.83)
        assert weak == pytest.approx(0.9)

    @given(gap_ok_stats())
    def test_chain_and_attainment(self, stats):
        bound, weak = vulnerability_lower_bound(stats)
        assert bound >= weak - 1e-12
        assert weak >= 0.5 - 1e-12
        assert bound == pytest.approx(expected_accuracy(stats), abs=1e-12)


class TestCategoryQuantities:
    def test_derived_quantities_arithmetic(self):
        d, q, p = derive_category_quantities(CategoryStats(0.3, 0.2, 0.9, 0.6))
        assert (d, q, p) == pytest.approx((0.5, 0.6, 0.78))

    @pytest.mark.parametrize("p", [0.0, 0.4, 1.0])
    def test_symmetric(self, p):
        assert derive_category_quantities(CategoryStats(0.5, 0.5, p, p)) == pytest.approx((1.0, 0.5, p))

    def test_empty(self):
        with pytest.raises(EmptyCategory):
            derive_category_quantities(CategoryStats(0.0, 0.0, 0.5, 0.5))

    def test_aggregate_symmetry(self):
        q, _ = aggregate_categories([CategoryStats(0.25, 0.25, 0.5, 0.5)] * 2)
        assert q == pytest.approx(0.5)

    def test_aggregate_replicated(self):
        half = CategoryStats(0.3, 0.2, 0.9, 0.6)
        _, p = aggregate_categories([half, half])
        assert p == pytest.approx(0.78)

    def test_mass_mismatch(self):
        with pytest.raises(MassMismatch):
            aggregate_categories([CategoryStats(0.45, 0.45, 0.5, 0.5)])

    @settings(max_examples=200)
    @given(st.lists(st.tuples(st.floats(0.01, 1), st.floats(0.01, 1), unit, unit), min_size=1, max_size=8))
    def test_aggregation_identities_hold(self, raw):
        total = sum(a + b for a, b, _, _ in raw)
        cats = [CategoryStats(a / total, b / total, pt, ps) for a, b, pt, ps in raw]
        agg_q, agg_p = aggregate_categories(cats)
        for c in cats:
            d, qi, pi = derive_category_quantities(c)
            assert d == pytest.approx(c.d_train + c.d_test, abs=1e-12)
            assert qi * d == pytest.approx(c.d_train, abs=1e-12)
            assert pi * d == pytest.approx(c.p_train * c.d_train + c.p_test * c.d_test, abs=1e-12)
        assert agg_q == pytest.approx(math.fsum(c.d_train for c in cats), abs=1e-12)
        assert agg_p == pytest.approx(math.fsum(c.p_train * c.d_train + c.p_test * c.d_test for c in cats), abs=1e-12)

    def test_global_from_categories(self):
        g = global_from_categories([CategoryStats(0.25, 0.25, 1.0, 0.5), CategoryStats(0.25, 0.25, 0.6, 0.6)])
        assert (g.q, g.p0, g.p1) == pytest.approx((0.5, 0.8, 0.55))


def test_never_correct_model_has_undefined_precision():
    stats = GlobalStats(0.36, 0.0, 0.0)
    assert classify_case(stats) is CaseKind.CASE3
    assert isinstance(expected_precision(stats), Undefined)
    assert expected_accuracy(stats) == pytest.approx(0.64)


def test_perfect_model_below_half_is_case2():
    # the misclassified branch ties at 0 >= 0 but has probability zero
    stats = GlobalStats(0.25, 1.0, 1.0)
    assert classify_case(stats) is CaseKind.CASE2
    assert expected_accuracy(stats) == pytest.approx(0.75)
    assert bayes_accuracy(stats) == pytest.approx(0.75)
    assert isinstance(expected_precision(stats), Undefined)
