"""Per-category statistics from labelled dumps and from shadow models."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from .errors import MissingGroundTruth, NoShadows, PreconditionError
from .partition import CategoryId, PartitionScheme, as_scheme
from .records import Dump, Split
from .stats import CategoryStats

StatsMap = dict[CategoryId, CategoryStats]


@dataclass
class Counts:
    """Record counts of one category; merging is plain addition."""

    n_train: int = 0
    n_test: int = 0
    hit_train: int = 0
    hit_test: int = 0

    def __iadd__(self, other: Counts) -> Counts:
        self.n_train += other.n_train
        self.n_test += other.n_test
        self.hit_train += other.hit_train
        self.hit_test += other.hit_test
        return self

    def to_stats(self, total: int) -> CategoryStats:
        return CategoryStats(
            d_train=self.n_train / total,
            d_test=self.n_test / total,
            p_train=self.hit_train / self.n_train if self.n_train else None,
            p_test=self.hit_test / self.n_test if self.n_test else None,
        )


def count_categories(dump: Dump, scheme: PartitionScheme | str) -> dict[CategoryId, Counts]:
    scheme = as_scheme(scheme)
    counts: dict[CategoryId, Counts] = {}
    for record in dump.records:
        if record.split is Split.UNKNOWN:
            raise MissingGroundTruth(f"record {record.id!r} has no split tag")
        record.validate()
        c = counts.setdefault(scheme.assign(record), Counts())
        hit = int(record.correct)
        if record.split is Split.TRAIN:
            c.n_train += 1
            c.hit_train += hit
        else:
            c.n_test += 1
            c.hit_test += hit
    return dict(sorted(counts.items()))


def merge_counts(parts: Iterable[Mapping[CategoryId, Counts]]) -> dict[CategoryId, Counts]:
    merged: dict[CategoryId, Counts] = {}
    for part in parts:
        for cid, c in part.items():
            merged.setdefault(cid, Counts()).__iadd__(c)
    return dict(sorted(merged.items()))


def stats_from_counts(counts: Mapping[CategoryId, Counts], total: int) -> StatsMap:
    return {cid: c.to_stats(total) for cid, c in counts.items()}


def compute_stats(dump: Dump, scheme: PartitionScheme | str) -> StatsMap:
    """Exact per-category statistics of a dump whose split tags are known."""
    return stats_from_counts(count_categories(dump, scheme), len(dump))


def estimate_from_shadows(shadows: Sequence[Dump], scheme: PartitionScheme | str) -> StatsMap:
    """Pool the category counts of every shadow dump.

    Accuracies are therefore weighted by each shadow's per-category record
    counts, and masses are fractions of all shadow records together.
    """
    if not shadows:
        raise NoShadows("at least one shadow dump is required")
    merged = merge_counts(count_categories(d, scheme) for d in shadows)
    return stats_from_counts(merged, sum(len(d) for d in shadows))


def assume_uniform_q(stats_map: Mapping[CategoryId, CategoryStats], q: float) -> StatsMap:
    """Force every category's training proportion to ``q``, keeping ``d_i``."""
    if not 0 < q < 1:
        raise PreconditionError(f"q must lie in (0, 1), got {q}")
    out = {}
    for cid, cs in stats_map.items():
        d = cs.d
        out[cid] = CategoryStats(q * d, d - q * d, cs.p_train, cs.p_test)
    return out
