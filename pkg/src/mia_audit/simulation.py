"""Monte Carlo checks of the closed forms and the brute-force rule oracle.

Sampling is keyed by ``(seed, block index)`` through numpy's counter-based
Philox generator, so a simulation gives the same bits no matter how many
worker threads produce the blocks.
"""

from __future__ import annotations

import os
from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .attack import Rule, Verdict, category_rule, rule_for
from .errors import MassMismatch, PreconditionError
from .evaluation import Confusion
from .partition import CategoryId
from .records import Dump, PredictionRecord, Split
from .stats import MASS_TOLERANCE, CategoryStats, GlobalStats, global_from_categories

BLOCK_SIZE = 1 << 16
THREADS_ENV = "MIA_AUDIT_THREADS"


def worker_count() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def block_generator(seed: int, block: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_blocks(seed: int, n: int, width: int, workers: int | None = None) -> np.ndarray:
    """``(n, width)`` uniforms; row ``i`` depends only on ``(seed, i)``."""
    out = np.empty((n, width))
    starts = range(0, n, BLOCK_SIZE)

    def fill(start: int) -> None:
        stop = min(start + BLOCK_SIZE, n)
        rows = block_generator(seed, start // BLOCK_SIZE).random((BLOCK_SIZE, width))
        out[start:stop] = rows[: stop - start]

    workers = worker_count() if workers is None else workers
    if workers <= 1 or n <= BLOCK_SIZE:
        for s in starts:
            fill(s)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, starts))
    return out


@dataclass(frozen=True)
class SimConfig:
    """Either one global triple or a map of per-category statistics.

    Categorical configs must be keyed ``(0,), (1,), ...``: the simulated
    record's true label is its category, so a true-label partition
    recovers it.
    """

    stats: GlobalStats | Mapping[CategoryId, CategoryStats]
    n: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise PreconditionError(f"sample count must be >= 1, got {self.n}")
        if isinstance(self.stats, Mapping):
            keys = sorted(self.stats)
            if keys != [(i,) for i in range(len(keys))]:
                raise PreconditionError("categorical configs must be keyed (0,), (1,), ...")
            total = sum(cs.d for cs in self.stats.values())
            if abs(total - 1.0) > MASS_TOLERANCE:
                raise MassMismatch(f"category masses sum to {total!r}, expected 1")

    @property
    def categorical(self) -> bool:
        return isinstance(self.stats, Mapping)


@dataclass
class Outcomes:
    category: np.ndarray  # int index into the sorted category keys
    is_train: np.ndarray
    correct: np.ndarray


def _category_arrays(config: SimConfig):
    if not config.categorical:
        s = config.stats
        return np.array([1.0]), np.array([s.q]), np.array([s.p0]), np.array([s.p1])
    cats = [config.stats[k] for k in sorted(config.stats)]
    d = np.array([c.d for c in cats])
    q = np.array([c.d_train / c.d if c.d > 0 else 0.0 for c in cats])
    p0 = np.array([c.p_train or 0.0 for c in cats])
    p1 = np.array([c.p_test or 0.0 for c in cats])
    return d, q, p0, p1


def sample_outcomes(config: SimConfig, workers: int | None = None) -> Outcomes:
    d, q, p0, p1 = _category_arrays(config)
    u = uniform_blocks(config.seed, config.n, 3, workers)
    if len(d) == 1:
        cat = np.zeros(config.n, dtype=np.int64)
    else:
        edges = np.cumsum(d)[:-1]
        cat = np.searchsorted(edges, u[:, 0], side="right")
    is_train = u[:, 1] < q[cat]
    correct = u[:, 2] < np.where(is_train, p0[cat], p1[cat])
    return Outcomes(cat, is_train, correct)


def outcomes_to_dump(outcomes: Outcomes, m: int = 2) -> Dump:
    """Materialize outcomes as records with one-hot probability vectors."""
    records = []
    for i, (c, tr, ok) in enumerate(zip(outcomes.category.tolist(), outcomes.is_train.tolist(), outcomes.correct.tolist())):
        predicted = c if ok else (c + 1) % m
        probs = [0.0] * m
        probs[predicted] = 1.0
        records.append(PredictionRecord(f"s{i}", c, tuple(probs), Split.TRAIN if tr else Split.TEST))
    return Dump(records, m)


def simulate_outcomes(config: SimConfig, workers: int | None = None) -> Dump:
    outcomes = sample_outcomes(config, workers)
    m = max(2, len(config.stats)) if config.categorical else 2
    return outcomes_to_dump(outcomes, m)


def _rules(config: SimConfig) -> list[Rule]:
    if not config.categorical:
        return [rule_for(config.stats)]
    fallback = rule_for(global_from_categories(config.stats.values()), fallback=True)
    return [category_rule(config.stats[k], fallback) for k in sorted(config.stats)]


def monte_carlo_metrics(config: SimConfig, workers: int | None = None) -> Confusion:
    """Attack simulated outcomes with the configured statistics and score them."""
    outcomes = sample_outcomes(config, workers)
    rules = _rules(config)
    in_if_correct = np.array([r.on_correct is Verdict.IN_TRAIN for r in rules])
    in_if_wrong = np.array([r.on_wrong is Verdict.IN_TRAIN for r in rules])
    reported = np.where(outcomes.correct, in_if_correct[outcomes.category], in_if_wrong[outcomes.category])
    return Confusion.from_arrays(reported, outcomes.is_train)


ALL_RULES: tuple[tuple[Verdict, Verdict], ...] = tuple(
    (a, b) for a in (Verdict.IN_TRAIN, Verdict.NOT_IN_TRAIN) for b in (Verdict.IN_TRAIN, Verdict.NOT_IN_TRAIN)
)


def rule_accuracies(stats: GlobalStats) -> dict[tuple[Verdict, Verdict], float]:
    """Expected accuracy of every deterministic rule (verdict if correct, verdict if wrong)."""
    q, p0, p1 = stats.q, stats.p0, stats.p1
    # joint masses of (membership, correctness)
    train_hit, train_miss = q * p0, q * (1 - p0)
    test_hit, test_miss = (1 - q) * p1, (1 - q) * (1 - p1)
    out = {}
    for on_hit, on_miss in ALL_RULES:
        acc = train_hit if on_hit is Verdict.IN_TRAIN else test_hit
        acc += train_miss if on_miss is Verdict.IN_TRAIN else test_miss
        out[(on_hit, on_miss)] = acc
    return out


def enumerate_rules_oracle(stats: GlobalStats) -> tuple[tuple[Verdict, Verdict], float]:
    """Best deterministic rule by exhaustive evaluation; ties go to the attack's own rule."""
    accs = rule_accuracies(stats)
    best = max(accs.values())
    own = rule_for(stats)
    own_key = (own.on_correct, own.on_wrong)
    if accs[own_key] == best:
        return own_key, best
    winner = next(k for k, v in accs.items() if v == best)
    return winner, best
