import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rec
from mia_audit.errors import InvalidScheme, MalformedRecord
from mia_audit.partition import (
    PartitionScheme,
    assign_category,
    category_count,
    format_category,
    parse_category,
    ppc,
    ppl,
    ptc,
    ptl,
)
from mia_audit.records import PredictionRecord, Split, predicted_label


class TestPredictedLabel:
    @pytest.mark.parametrize(
        "probs, label",
        [([0.1, 0.7, 0.2], 1), ([0.5, 0.5], 0), ([0.25, 0.25, 0.25, 0.25], 0), ([0.2, 0.4, 0.4], 1)],
    )
    def test_argmax_lowest_tie(self, probs, label):
        assert predicted_label(rec("a", 0, probs)) == label


class TestAssign:
    def test_ppc_interval(self):
        # m=10, n=3: edges 0.1 + k*0.3 -> [0.1,0.4), [0.4,0.7), [0.7,1]
        probs = [0.55] + [0.05] * 9
        assert assign_category(PartitionScheme.of(ppc(3)), rec("a", 0, probs)) == (2,)

    @pytest.mark.parametrize("value, expected", [(0.0, 1), (1.0, 10), (0.1, 2), (0.95, 10), (0.0999, 1)])
    def test_ptc_edges(self, value, expected):
        r = rec("a", 0, [value, 1 - value])
        assert assign_category(PartitionScheme.of(ptc(10)), r) == (expected,)

    def test_ppc_boundary_goes_right(self):
        # m=2, n=2: intervals [0.5, 0.75), [0.75, 1]
        assert assign_category("ppc:2", rec("a", 0, [0.75, 0.25])) == (2,)
        assert assign_category("ppc:2", rec("a", 0, [0.5, 0.5])) == (1,)
        assert assign_category("ppc:2", rec("a", 0, [1.0, 0.0])) == (2,)

    def test_product(self):
        probs = [0.0] * 10
        probs[3] = 0.95
        probs[0] = 0.05
        assert assign_category(PartitionScheme.of(ptl(), ptc(10)), rec("a", 3, probs)) == (3, 10)

    def test_labels(self):
        r = rec("a", 2, [0.6, 0.1, 0.3])
        assert assign_category("ptl", r) == (2,)
        assert assign_category("ppl", r) == (0,)

    def test_ppc_malformed(self):
        bad = PredictionRecord("x", 0, (0.2, 0.2, 0.2), Split.TEST)
        with pytest.raises(MalformedRecord):
            assign_category("ppc:3", bad)


class TestSchemes:
    def test_count(self):
        assert category_count(PartitionScheme.of(ptl()), 10) == 10
        assert category_count(PartitionScheme.of(ppl(), ppc(3)), 10) == 30
        assert category_count("ptc:1", 7) == 1
        with pytest.raises(InvalidScheme):
            category_count("ptl", 1)

    def test_parse_round_trip(self):
        for text in ["ptl", "ppl", "ptc:4", "ppc:5", "ppl+ppc:5", "ptl+ptc:10"]:
            assert str(PartitionScheme.parse(text)) == text

    def test_default_intervals(self):
        assert str(PartitionScheme.parse("ptc")) == "ptc:10"

    def test_flattening(self):
        inner = PartitionScheme.of(ppl(), ppc(3))
        outer = PartitionScheme.of(inner, ptc(2))
        assert outer.factors == (ppl(), ppc(3), ptc(2))

    def test_ptl_ppl_rejected(self):
        with pytest.raises(InvalidScheme, match="force"):
            PartitionScheme.parse("ptl+ppl")
        assert str(PartitionScheme.parse("ptl+ppl", force=True)) == "ptl+ppl"

    @pytest.mark.parametrize("text", ["xyz", "ptc:0", "ptc:abc", "ptl:3", ""])
    def test_bad(self, text):
        with pytest.raises(InvalidScheme):
            PartitionScheme.parse(text)

    def test_category_text(self):
        assert format_category((3, 10)) == "3,10"
        assert parse_category("3,10") == (3, 10)


@st.composite
def records(draw, m=None):
    m = m or draw(st.integers(2, 6))
    raw = draw(st.lists(st.floats(0, 1, allow_nan=False), min_size=m, max_size=m))
    total = sum(raw)
    probs = [x / total for x in raw] if total > 0 else [1.0 / m] * m
    return rec("r", draw(st.integers(0, m - 1)), probs)


schemes = st.sampled_from(["ptl", "ppl", "ptc:1", "ptc:7", "ppc:3", "ppc:10", "ppl+ppc:3", "ptl+ptc:4"])


@given(records(), schemes)
def test_totality_and_range(record, text):
    scheme = PartitionScheme.parse(text)
    cid = scheme.assign(record)
    assert len(cid) == len(scheme.factors)
    for c, f in zip(cid, scheme.factors):
        if f.n is None:
            assert 0 <= c < record.m
        else:
            assert 1 <= c <= f.n
    assert scheme.assign(record) == cid


@given(records())
def test_product_refines_factors(record):
    both = PartitionScheme.parse("ppl+ppc:3").assign(record)
    assert both[0] == PartitionScheme.parse("ppl").assign(record)[0]
    assert both[1] == PartitionScheme.parse("ppc:3").assign(record)[0]
