"""Prediction records and dumps."""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .errors import MalformedRecord

PROB_SUM_TOLERANCE = 1e-6


class Split(str, enum.Enum):
    TRAIN = "train"
    TEST = "test"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class PredictionRecord:
    id: str
    true_label: int
    probs: tuple[float, ...]
    split: Split = Split.UNKNOWN
    model_id: str | None = None

    @property
    def m(self) -> int:
        return len(self.probs)

    def validate(self) -> None:
        if len(self.probs) < 2:
            raise MalformedRecord("probability vector needs at least 2 entries", record_id=self.id)
        if not 0 <= self.true_label < len(self.probs):
            raise MalformedRecord(
                f"true_label {self.true_label} outside [0, {len(self.probs)})", record_id=self.id
            )
        for value in self.probs:
            if not (0.0 <= value <= 1.0):
                raise MalformedRecord(f"probability {value!r} outside [0, 1]", record_id=self.id)
        total = math.fsum(self.probs)
        if abs(total - 1.0) > PROB_SUM_TOLERANCE:
            raise MalformedRecord(f"probabilities sum to {total!r}", record_id=self.id)

    @property
    def predicted_label(self) -> int:
        return predicted_label(self)

    @property
    def correct(self) -> bool:
        return predicted_label(self) == self.true_label


def make_record(
    id: str,
    true_label: int,
    probs: Iterable[float],
    split: Split | str = Split.UNKNOWN,
    model_id: str | None = None,
) -> PredictionRecord:
    """Build and validate a record."""
    try:
        split = Split(split)
    except ValueError:
        raise MalformedRecord(f"unknown split {split!r}", record_id=id) from None
    record = PredictionRecord(str(id), int(true_label), tuple(float(p) for p in probs), split, model_id)
    record.validate()
    return record


def predicted_label(record: PredictionRecord) -> int:
    """Argmax of the probability vector; ties go to the lowest index."""
    probs = record.probs
    best = 0
    for i in range(1, len(probs)):
        if probs[i] > probs[best]:
            best = i
    return best


@dataclass
class Dump:
    """The records exported from one model.

    ``m`` is ``None`` only for an empty dump.
    """

    records: list[PredictionRecord] = field(default_factory=list)
    m: int | None = None

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for record in self.records:
            if self.m is None:
                self.m = record.m
            elif record.m != self.m:
                raise MalformedRecord(
                    f"has {record.m} classes, dump has {self.m}", record_id=record.id
                )
            if record.id in seen:
                raise MalformedRecord("duplicate id", record_id=record.id)
            seen.add(record.id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    @classmethod
    def from_records(cls, records: Sequence[PredictionRecord]) -> Dump:
        return cls(list(records))
