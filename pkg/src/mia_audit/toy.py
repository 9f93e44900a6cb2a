"""Synthetic data and a small softmax-regression trainer.

These stand in for a real target model: the trainer produces prediction
dumps with known split tags, which is all the rest of the package needs.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, TrainingDiverged
from .records import Dump, PredictionRecord, Split


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray  # (n, d)
    y: np.ndarray  # (n,) int labels
    m: int

    def __len__(self) -> int:
        return len(self.y)


def class_centroids(m: int, d: int, radius: float = 3.0) -> np.ndarray:
    """Fixed, seed-independent class centres.

    With ``d >= m`` the centres are scaled unit vectors (a regular simplex);
    otherwise they are spread evenly on a circle (or a line when ``d == 1``).
    """
    centres = np.zeros((m, d))
    if d >= m:
        centres[np.arange(m), np.arange(m)] = radius
    elif d >= 2:
        angles = 2 * np.pi * np.arange(m) / m
        centres[:, 0] = radius * np.cos(angles)
        centres[:, 1] = radius * np.sin(angles)
    else:
        centres[:, 0] = radius * np.linspace(-1.0, 1.0, m)
    return centres


def make_synthetic_dataset(m: int, d: int, per_class: int, spread: float, seed: int | Sequence[int]) -> Dataset:
    if m < 2 or d < 1:
        raise PreconditionError(f"need m >= 2 and d >= 1, got m={m}, d={d}")
    if spread < 0:
        raise PreconditionError(f"spread must be non-negative, got {spread}")
    rng = np.random.default_rng(seed)
    y = np.repeat(np.arange(m), per_class)
    X = class_centroids(m, d)[y] + spread * rng.standard_normal((len(y), d))
    order = rng.permutation(len(y))
    return Dataset(X[order], y[order], m)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class ToyModel:
    """Multinomial logistic regression: ``softmax(X @ W.T + b)``."""

    W: np.ndarray  # (m, d)
    b: np.ndarray  # (m,)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(X @ self.W.T + self.b)

    def loss_and_grad(self, X: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """Mean cross-entropy and its gradient with respect to ``W`` and ``b``."""
        logits = X @ self.W.T + self.b
        z = logits - logits.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(z).sum(axis=1))
        n = len(y)
        loss = float(np.mean(log_norm - z[np.arange(n), y]))
        g = np.exp(z - log_norm[:, None])
        g[np.arange(n), y] -= 1.0
        g /= n
        return loss, g.T @ X, g.sum(axis=0)

    def copy(self) -> ToyModel:
        return ToyModel(self.W.copy(), self.b.copy())


def init_model(m: int, d: int, seed: int | Sequence[int], scale: float = 0.01) -> ToyModel:
    rng = np.random.default_rng(seed)
    return ToyModel(scale * rng.standard_normal((m, d)), np.zeros(m))


def fit(model: ToyModel, X: np.ndarray, y: np.ndarray, epochs: int, lr: float) -> ToyModel:
    """Full-batch gradient descent, in place."""
    for epoch in range(epochs):
        with np.errstate(over="ignore", invalid="ignore"):
            loss, gW, gb = model.loss_and_grad(X, y)
        if not np.isfinite(loss):
            raise TrainingDiverged(f"loss became {loss} at epoch {epoch} (lr={lr})")
        model.W -= lr * gW
        model.b -= lr * gb
    return model


def dump_predictions(
    model: ToyModel, data: Dataset, train_mask: np.ndarray, model_id: str | None = None
) -> Dump:
    probs = model.predict_proba(data.X)
    prefix = f"{model_id}-" if model_id else "x"
    records = [
        PredictionRecord(
            f"{prefix}{i}",
            int(label),
            tuple(row),
            Split.TRAIN if is_train else Split.TEST,
            model_id,
        )
        for i, (label, row, is_train) in enumerate(zip(data.y.tolist(), probs.tolist(), train_mask.tolist()))
    ]
    return Dump(records, data.m)


def train_toy_model(
    dataset: Dataset,
    train_fraction: float,
    epochs: int,
    lr: float,
    seed: int | Sequence[int],
    model_id: str | None = None,
) -> tuple[ToyModel, Dump]:
    """Train on a random ``train_fraction`` of ``dataset`` and dump predictions for all of it."""
    if not 0 < train_fraction < 1:
        raise PreconditionError(f"train fraction must lie in (0, 1), got {train_fraction}")
    n = len(dataset)
    rng = np.random.default_rng(seed)
    train_mask = np.zeros(n, dtype=bool)
    train_mask[rng.permutation(n)[: int(round(train_fraction * n))]] = True
    model = init_model(dataset.m, dataset.X.shape[1], seed)
    fit(model, dataset.X[train_mask], dataset.y[train_mask], epochs, lr)
    return model, dump_predictions(model, dataset, train_mask, model_id)
