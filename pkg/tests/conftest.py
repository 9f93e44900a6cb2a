import numpy as np
import pytest

from mia_audit.records import Dump, make_record


def rec(id, label, probs, split="unknown"):
    return make_record(str(id), label, probs, split)


def correct_probs(label, m=2):
    probs = [0.0] * m
    probs[label] = 1.0
    return probs


def wrong_probs(label, m=2):
    probs = [0.0] * m
    probs[(label + 1) % m] = 1.0
    return probs


def counted_dump(cells, m=2, label=0):
    """Dump from ``[(split, correct, count), ...]`` with one-hot predictions."""
    records = []
    for split, correct, count in cells:
        for _ in range(count):
            probs = correct_probs(label, m) if correct else wrong_probs(label, m)
            records.append(rec(f"r{len(records)}", label, probs, split))
    return Dump(records)


def finite_difference_check(model, X, y, step=1e-5):
    """Max relative error of the analytic gradient against central differences."""
    _, gW, gb = model.loss_and_grad(X, y)
    worst = 0.0
    for param, grad in ((model.W, gW), (model.b, gb)):
        for idx in np.ndindex(param.shape):
            saved = param[idx]
            param[idx] = saved + step
            up = model.loss_and_grad(X, y)[0]
            param[idx] = saved - step
            down = model.loss_and_grad(X, y)[0]
            param[idx] = saved
            numeric = (up - down) / (2 * step)
            denom = max(abs(numeric), abs(grad[idx]), 1e-8)
            worst = max(worst, abs(numeric - grad[idx]) / denom)
    return worst


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
