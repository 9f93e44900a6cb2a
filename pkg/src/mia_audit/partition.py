"""Partition schemes that split a dump into categories.

Schemes serialize as ``ptl``, ``ppl``, ``ptc:<n>``, ``ppc:<n>`` and
``+``-joined products such as ``ppl+ppc:5``. Label coordinates of a
category id are 0-based class indices; confidence coordinates are 1-based
interval indices.
"""

from __future__ import annotations

import bisect
import enum
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import InvalidScheme, MalformedRecord
from .records import PredictionRecord, predicted_label

DEFAULT_INTERVALS = 10
CategoryId = tuple[int, ...]


class Kind(str, enum.Enum):
    TRUE_LABEL = "ptl"
    PREDICTED_LABEL = "ppl"
    TRUE_LABEL_CONFIDENCE = "ptc"
    PREDICTED_LABEL_CONFIDENCE = "ppc"


@dataclass(frozen=True)
class Factor:
    kind: Kind
    n: int | None = None

    def __post_init__(self) -> None:
        confidence = self.kind in (Kind.TRUE_LABEL_CONFIDENCE, Kind.PREDICTED_LABEL_CONFIDENCE)
        if confidence:
            if self.n is None:
                object.__setattr__(self, "n", DEFAULT_INTERVALS)
            if not isinstance(self.n, int) or self.n < 1:
                raise InvalidScheme(f"{self.kind.value} needs a positive interval count, got {self.n!r}")
        elif self.n is not None:
            raise InvalidScheme(f"{self.kind.value} takes no interval count")

    def __str__(self) -> str:
        return self.kind.value if self.n is None else f"{self.kind.value}:{self.n}"

    def count(self, m: int) -> int:
        return m if self.n is None else self.n

    def assign(self, record: PredictionRecord) -> int:
        kind = self.kind
        if kind is Kind.TRUE_LABEL:
            return record.true_label
        if kind is Kind.PREDICTED_LABEL:
            return predicted_label(record)
        if kind is Kind.TRUE_LABEL_CONFIDENCE:
            return _interval_index(_ptc_edges(self.n), record.probs[record.true_label])
        m = len(record.probs)
        top = max(record.probs)
        if top < 1.0 / m - 1e-9:
            raise MalformedRecord(f"max probability {top!r} below 1/m", record_id=record.id)
        return _interval_index(_ppc_edges(m, self.n), top)


_edge_cache: dict[tuple, list[float]] = {}


def _ptc_edges(n: int) -> list[float]:
    key = ("ptc", n)
    if key not in _edge_cache:
        _edge_cache[key] = [k / n for k in range(1, n)]
    return _edge_cache[key]


def _ppc_edges(m: int, n: int) -> list[float]:
    key = ("ppc", m, n)
    if key not in _edge_cache:
        _edge_cache[key] = [1 / m + k * (m - 1) / (m * n) for k in range(1, n)]
    return _edge_cache[key]


def _interval_index(interior_edges: list[float], value: float) -> int:
    # half-open intervals, last one closed: a value on an interior edge goes right
    return bisect.bisect_right(interior_edges, value) + 1


@dataclass(frozen=True)
class PartitionScheme:
    """An ordered product of factor schemes (a single scheme has one factor)."""

    factors: tuple[Factor, ...]

    def __post_init__(self) -> None:
        if not self.factors:
            raise InvalidScheme("a scheme needs at least one factor")

    @classmethod
    def of(cls, *parts: Factor | PartitionScheme, force: bool = False) -> PartitionScheme:
        """Combine factors and schemes into one flat product."""
        flat: list[Factor] = []
        for part in parts:
            flat.extend(part.factors if isinstance(part, PartitionScheme) else (part,))
        kinds = {f.kind for f in flat}
        if not force and {Kind.TRUE_LABEL, Kind.PREDICTED_LABEL} <= kinds:
            raise InvalidScheme(
                "combining true-label and predicted-label partitions makes every category "
                "all-correct or all-wrong; pass force=True to build it anyway"
            )
        return cls(tuple(flat))

    @classmethod
    def parse(cls, text: str, force: bool = False) -> PartitionScheme:
        factors = []
        for token in text.strip().lower().split("+"):
            name, _, arg = token.strip().partition(":")
            try:
                kind = Kind(name)
            except ValueError:
                raise InvalidScheme(f"unknown partition {name!r} in {text!r}") from None
            n = None
            if arg:
                try:
                    n = int(arg)
                except ValueError:
                    raise InvalidScheme(f"bad interval count {arg!r} in {text!r}") from None
            factors.append(Factor(kind, n))
        return cls.of(*factors, force=force)

    def __str__(self) -> str:
        return "+".join(str(f) for f in self.factors)

    def assign(self, record: PredictionRecord) -> CategoryId:
        return tuple(f.assign(record) for f in self.factors)

    def count(self, m: int) -> int:
        total = 1
        for f in self.factors:
            total *= f.count(m)
        return total


def ptl() -> Factor:
    return Factor(Kind.TRUE_LABEL)


def ppl() -> Factor:
    return Factor(Kind.PREDICTED_LABEL)


def ptc(n: int = DEFAULT_INTERVALS) -> Factor:
    return Factor(Kind.TRUE_LABEL_CONFIDENCE, n)


def ppc(n: int = DEFAULT_INTERVALS) -> Factor:
    return Factor(Kind.PREDICTED_LABEL_CONFIDENCE, n)


def as_scheme(scheme: PartitionScheme | Factor | str) -> PartitionScheme:
    if isinstance(scheme, PartitionScheme):
        return scheme
    if isinstance(scheme, Factor):
        return PartitionScheme((scheme,))
    return PartitionScheme.parse(scheme)


def assign_category(scheme: PartitionScheme | Factor | str, record: PredictionRecord) -> CategoryId:
    return as_scheme(scheme).assign(record)


def category_count(scheme: PartitionScheme | Factor | str, m: int) -> int:
    if m < 2:
        raise InvalidScheme(f"label space needs m >= 2, got {m}")
    return as_scheme(scheme).count(m)


def assign_all(scheme: PartitionScheme | Factor | str, records: Sequence[PredictionRecord]) -> list[CategoryId]:
    scheme = as_scheme(scheme)
    return [scheme.assign(r) for r in records]


def format_category(cid: CategoryId) -> str:
    return ",".join(str(c) for c in cid)


def parse_category(text: str) -> CategoryId:
    try:
        return tuple(int(c) for c in text.split(","))
    except ValueError:
        raise InvalidScheme(f"bad category id {text!r}") from None
