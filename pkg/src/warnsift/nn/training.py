"""Training loop: minibatch descent with plateau-based rate decay.

Epoch order, shuffling, and initialization all derive from the config
seed, so two runs over the same corpus produce identical parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from warnsift.config import ModelConfig
from warnsift.dataset import INSENSITIVE, SENSITIVE, LabeledWarning
from warnsift.encoding import Vocabulary, build_value_vocab, build_vocab, encode_batch
from warnsift.metrics import compute_metrics
from warnsift.nn.loss import focal_loss
from warnsift.nn.model import backward, forward, init_params
from warnsift.nn.optim import Adam


class PlateauScheduler:
    """Decays the optimizer learning rate when a score stops improving.

    ``step`` is called once per epoch with the monitored score (higher
    is better).  After ``patience`` consecutive non-improving epochs the
    rate is multiplied by ``factor`` and the counter resets; the best
    score seen so far is kept, so recovery requires beating it.
    """

    def __init__(self, optimizer: Adam, patience: int, factor: float) -> None:
        if patience < 1:
            raise ValueError("patience must be positive")
        if not 0.0 < factor < 1.0:
            raise ValueError("factor must lie in (0, 1)")
        self.optimizer = optimizer
        self.patience = patience
        self.factor = factor
        self.best = -np.inf
        self.stale = 0

    def step(self, score: float) -> bool:
        """Record an epoch score; returns True when a decay fired."""
        if score > self.best:
            self.best = score
            self.stale = 0
            return False
        self.stale += 1
        if self.stale >= self.patience:
            self.optimizer.learning_rate *= self.factor
            self.stale = 0
            return True
        return False


@dataclass(frozen=True)
class TrainEpoch:
    epoch: int
    train_loss: float
    valid_precision: float
    valid_recall: float
    valid_f1: float
    learning_rate: float


@dataclass
class TrainResult:
    params: dict
    vocab: Vocabulary
    rule_vocab: Vocabulary
    category_vocab: Vocabulary
    history: list


def _batches(n: int, batch_size: int):
    for start in range(0, n, batch_size):
        yield start, min(start + batch_size, n)


def predict_probs(
    params: dict,
    entries: Sequence[LabeledWarning],
    vocab: Vocabulary,
    rule_vocab: Vocabulary,
    category_vocab: Vocabulary,
    config: ModelConfig,
) -> np.ndarray:
    """Sensitive-class probabilities for each entry, in order."""
    probs = np.empty(len(entries), dtype=np.float64)
    for start, end in _batches(len(entries), config.batch_size):
        batch = encode_batch(
            entries[start:end], vocab, rule_vocab, category_vocab, config.channel_lengths
        )
        probs[start:end], _ = forward(params, batch)
    return probs


def _validation_scores(
    params: dict,
    entries: Sequence[LabeledWarning],
    vocab: Vocabulary,
    rule_vocab: Vocabulary,
    category_vocab: Vocabulary,
    config: ModelConfig,
) -> tuple[float, float, float]:
    if not entries:
        return 0.0, 0.0, 0.0
    probs = predict_probs(params, entries, vocab, rule_vocab, category_vocab, config)
    predicted = [SENSITIVE if p > config.threshold else INSENSITIVE for p in probs]
    actual = [e.label for e in entries]
    sensitive = compute_metrics(actual, predicted).per_class[SENSITIVE]
    if sensitive is None:
        return 0.0, 0.0, 0.0
    return sensitive.precision, sensitive.recall, sensitive.f1


def train_model(
    config: ModelConfig,
    train_entries: Sequence[LabeledWarning],
    valid_entries: Sequence[LabeledWarning],
    log: Callable[[TrainEpoch], None] | None = None,
    stop_f1: float | None = None,
) -> TrainResult:
    """Fit a classifier on the training split.

    Vocabularies come from the training entries alone.  Validation runs
    after every epoch; its sensitive-class F1 drives the plateau
    scheduler and, when ``stop_f1`` is given, early stopping.
    """
    if not train_entries:
        raise ValueError("training split is empty")
    train_entries = list(train_entries)
    vocab = build_vocab(train_entries, max_size=config.vocab_size)
    rule_vocab = build_value_vocab(e.warning.rule for e in train_entries)
    category_vocab = build_value_vocab(e.warning.category for e in train_entries)

    params = init_params(config, len(vocab), len(rule_vocab), len(category_vocab))
    optimizer = Adam(params, config.learning_rate)
    scheduler = PlateauScheduler(optimizer, config.plateau_patience, config.lr_decay)
    rng = np.random.default_rng(config.seed)

    history: list[TrainEpoch] = []
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_entries))
        total_loss = 0.0
        for start, end in _batches(len(train_entries), config.batch_size):
            picked = [train_entries[i] for i in order[start:end]]
            batch = encode_batch(
                picked, vocab, rule_vocab, category_vocab, config.channel_lengths
            )
            probs, traces = forward(params, batch)
            loss = focal_loss(
                probs, batch.labels, alpha=config.focal_alpha, gamma=config.focal_gamma
            )
            grads = backward(params, traces, loss.dprobs)
            optimizer.step(params, grads)
            total_loss += loss.value * len(picked)

        precision, recall, f1 = _validation_scores(
            params, valid_entries, vocab, rule_vocab, category_vocab, config
        )
        row = TrainEpoch(
            epoch=epoch,
            train_loss=total_loss / len(train_entries),
            valid_precision=precision,
            valid_recall=recall,
            valid_f1=f1,
            learning_rate=optimizer.learning_rate,
        )
        history.append(row)
        if log is not None:
            log(row)
        if stop_f1 is not None and f1 >= stop_f1:
            break
        scheduler.step(f1)

    return TrainResult(
        params=params,
        vocab=vocab,
        rule_vocab=rule_vocab,
        category_vocab=category_vocab,
        history=history,
    )


__all__ = [
    "PlateauScheduler",
    "TrainEpoch",
    "TrainResult",
    "predict_probs",
    "train_model",
]
