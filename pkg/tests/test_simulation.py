import itertools
import math

import numpy as np
import pytest

from mia_audit.attack import Verdict, btta_attack, btta_decide
from mia_audit.evaluation import expected_from_categories, score
from mia_audit.records import Split
from mia_audit.simulation import (
    BLOCK_SIZE,
    SimConfig,
    enumerate_rules_oracle,
    monte_carlo_metrics,
    rule_accuracies,
    sample_outcomes,
    simulate_outcomes,
    uniform_blocks,
)
from mia_audit.stats import CategoryStats, GlobalStats, expected_accuracy

IN, OUT = Verdict.IN_TRAIN, Verdict.NOT_IN_TRAIN


class TestSampling:
    def test_degenerate(self):
        dump = simulate_outcomes(SimConfig(GlobalStats(1.0, 1.0, 0.3), 100, seed=5))
        assert len(dump) == 100
        assert all(r.split is Split.TRAIN and r.correct for r in dump)

    def test_binomial_bounds(self):
        dump = simulate_outcomes(SimConfig(GlobalStats(0.5, 0.984, 0.928), 10**6, seed=42))
        train = [r for r in dump if r.split is Split.TRAIN]
        assert abs(len(train) / len(dump) - 0.5) <= 0.0015
        assert abs(sum(r.correct for r in train) / len(train) - 0.984) <= 0.0005

    def test_same_seed_same_dump(self):
        cfg = SimConfig(GlobalStats(0.4, 0.8, 0.7), 2000, seed=9)
        assert simulate_outcomes(cfg) == simulate_outcomes(cfg)
        other = simulate_outcomes(SimConfig(GlobalStats(0.4, 0.8, 0.7), 2000, seed=10))
        assert other != simulate_outcomes(cfg)

    def test_worker_count_independent(self):
        n = 3 * BLOCK_SIZE + 17
        one = uniform_blocks(123, n, 3, workers=1)
        many = uniform_blocks(123, n, 3, workers=4)
        assert np.array_equal(one, many)

    def test_rows_keyed_by_index(self):
        short = uniform_blocks(7, 1000, 3, workers=1)
        long = uniform_blocks(7, BLOCK_SIZE + 5, 3, workers=1)
        assert np.array_equal(short, long[:1000])

    def test_categorical_labels_are_categories(self):
        cats = {(0,): CategoryStats(0.3, 0.2, 0.9, 0.5), (1,): CategoryStats(0.1, 0.4, 0.7, 0.6)}
        dump = simulate_outcomes(SimConfig(cats, 5000, seed=1))
        frac0 = sum(r.true_label == 0 for r in dump) / len(dump)
        assert abs(frac0 - 0.5) < 3 * math.sqrt(0.25 / 5000)

    def test_bad_config(self):
        with pytest.raises(Exception):
            SimConfig(GlobalStats(0.5, 0.5, 0.5), 0)
        with pytest.raises(Exception):
            SimConfig({(1,): CategoryStats(0.5, 0.5, 0.5, 0.5)}, 10)


class TestMonteCarlo:
    def test_location_accuracy(self):
        c = monte_carlo_metrics(SimConfig(GlobalStats(0.5, 1.0, 0.673), 10**6, seed=3))
        assert abs(c.accuracy - 0.6635) <= 0.002

    def test_adult_precision(self):
        c = monte_carlo_metrics(SimConfig(GlobalStats(0.5, 0.848, 0.842), 10**6, seed=4))
        assert abs(c.precision - 0.502) <= 0.002

    def test_case1_recall_exact(self):
        c = monte_carlo_metrics(SimConfig(GlobalStats(0.7, 0.9, 0.9), 10**6, seed=5))
        assert c.recall == 1.0

    def test_no_in_train_reports(self):
        c = monte_carlo_metrics(SimConfig(GlobalStats(0.3, 0.9, 0.85), 1000, seed=5))
        assert not c.precision and c.precision.reason

    def test_matches_record_path(self):
        cfg = SimConfig(GlobalStats(0.5, 0.9, 0.7), 5000, seed=11)
        dump = simulate_outcomes(cfg)
        by_records = score(btta_attack(cfg.stats, dump.records), dump).empirical
        assert by_records == monte_carlo_metrics(cfg)

    def test_categorical_expectation(self):
        cats = {
            (0,): CategoryStats(0.25, 0.25, 1.0, 0.5),
            (1,): CategoryStats(0.25, 0.25, 0.6, 0.6),
        }
        c = monte_carlo_metrics(SimConfig(cats, 10**6, seed=8))
        expected = expected_from_categories(cats)
        assert expected["accuracy"] == pytest.approx(0.625)
        assert abs(c.accuracy - 0.625) <= 3 * math.sqrt(0.625 * 0.375 / 10**6)


class TestOracle:
    def test_case3(self):
        rule, acc = enumerate_rules_oracle(GlobalStats(0.5, 0.984, 0.928))
        assert rule == (IN, OUT)
        assert acc == pytest.approx(0.5 * 0.984 + 0.5 * 0.072)
        assert acc == pytest.approx(0.528)

    def test_case1(self):
        rule, acc = enumerate_rules_oracle(GlobalStats(0.7, 0.9, 0.9))
        assert rule == (IN, IN)
        assert acc == pytest.approx(0.7)

    def test_four_rules(self):
        accs = rule_accuracies(GlobalStats(0.3, 0.8, 0.4))
        assert len(accs) == 4
        assert accs[(IN, IN)] == pytest.approx(0.3)
        assert accs[(OUT, OUT)] == pytest.approx(0.7)
        assert accs[(IN, OUT)] + accs[(OUT, IN)] == pytest.approx(1.0)

    def test_grid_equals_expected_accuracy(self):
        values = np.linspace(0.0, 1.0, 21)
        for q in np.linspace(0.05, 0.95, 19):
            for p0, p1 in itertools.product(values, values):
                if p0 < p1:
                    continue
                s = GlobalStats(q, p0, p1)
                rule, best = enumerate_rules_oracle(s)
                assert best == pytest.approx(expected_accuracy(s), abs=1e-12)
                own = (btta_decide(s, True), btta_decide(s, False))
                assert rule_accuracies(s)[own] == pytest.approx(best, abs=1e-12)
