"""Tokenization, vocabularies, and numeric encoding of corpus entries.

Four text channels feed the model: the enclosing function source, the
class field declarations, the dependence-slice IR, and the warning
message.  All share one tokenizer and one token vocabulary built from
the training split only.  The categorical warning attributes (rule,
category, rank, confidence) encode through their own small id spaces.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from warnsift.dataset import SENSITIVE, LabeledWarning

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_ID = 0
UNK_ID = 1

# Stands in for a channel that tokenizes to nothing, so every channel
# mask keeps at least one active position.
EMPTY_MARKER = "$empty"

RANK_TABLE_SIZE = 21  # ranks 1..20, index 0 unused
CONFIDENCE_TABLE_SIZE = 4  # confidences 1..3, index 0 unused

_TOKEN_RE = re.compile(
    r'"(?:\\.|[^"\\])*"'
    r"|'(?:\\.|[^'\\])*'"
    r"|[A-Za-z_$][A-Za-z0-9_$]*"
    r"|0[xX][0-9a-fA-F]+|\d+\.\d+|\d+"
    r"|:=|==|!=|<=|>=|&&|\|\||\+\+|--|\+=|-=|\*=|/=|%="
    r"|\S"
)


def tokenize_code(text: str) -> list[str]:
    """Split code or message text into tokens.

    Identifiers (including ``$stack0`` style temporaries), numbers and
    quoted literals stay whole; multi-character operators are single
    tokens; whitespace separates.
    """
    return _TOKEN_RE.findall(text)


class Vocabulary:
    """Token-to-id mapping with reserved pad (0) and unknown (1) slots."""

    def __init__(self, tokens: Sequence[str]) -> None:
        if list(tokens[:2]) != [PAD_TOKEN, UNK_TOKEN]:
            raise ValueError("vocabulary must start with the pad and unknown tokens")
        if len(set(tokens)) != len(tokens):
            raise ValueError("vocabulary contains duplicates")
        self._tokens = list(tokens)
        self._ids = {tok: i for i, tok in enumerate(self._tokens)}

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def id_of(self, token: str) -> int:
        return self._ids.get(token, UNK_ID)

    def token_of(self, token_id: int) -> str:
        return self._tokens[token_id]

    def save(self, path) -> None:
        """One token per line; the line number (from zero) is the id."""
        with open(path, "w", encoding="utf-8") as fh:
            for token in self._tokens:
                fh.write(token)
                fh.write("\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, "r", encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh]
        return cls(tokens)

    @classmethod
    def build(cls, counts: Counter, max_size: int | None = None) -> "Vocabulary":
        """Most frequent tokens first; ties break lexicographically.

        ``max_size`` includes the two reserved slots.
        """
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        keep = ordered if max_size is None else ordered[: max(0, max_size - 2)]
        return cls([PAD_TOKEN, UNK_TOKEN] + [tok for tok, _ in keep])


def _entry_texts(entry: LabeledWarning) -> tuple[str, str, str, str]:
    return (entry.function_text, entry.field_text, entry.slice_text, entry.warning.message)


def build_vocab(entries: Iterable[LabeledWarning], max_size: int | None = None) -> Vocabulary:
    """Token vocabulary over every text channel of the given entries.

    Callers must pass the training split only; evaluation tokens absent
    from it map to the unknown id.
    """
    counts: Counter = Counter()
    for entry in entries:
        for text in _entry_texts(entry):
            tokens = tokenize_code(text)
            counts.update(tokens if tokens else [EMPTY_MARKER])
    return Vocabulary.build(counts, max_size)


def build_value_vocab(values: Iterable[str]) -> Vocabulary:
    """Uncapped vocabulary for categorical attribute values."""
    return Vocabulary.build(Counter(values))


@dataclass
class EncodedSample:
    function_ids: np.ndarray
    function_mask: np.ndarray
    field_ids: np.ndarray
    field_mask: np.ndarray
    slice_ids: np.ndarray
    slice_mask: np.ndarray
    message_ids: np.ndarray
    message_mask: np.ndarray
    rule_id: int
    category_id: int
    rank: int
    confidence: int
    label: float


@dataclass
class EncodedBatch:
    """Stacked samples; ids are (B, L) int64, masks (B, L) bool."""

    function_ids: np.ndarray
    function_mask: np.ndarray
    field_ids: np.ndarray
    field_mask: np.ndarray
    slice_ids: np.ndarray
    slice_mask: np.ndarray
    message_ids: np.ndarray
    message_mask: np.ndarray
    rule_ids: np.ndarray
    category_ids: np.ndarray
    ranks: np.ndarray
    confidences: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return self.labels.shape[0]


def _encode_channel(text: str, vocab: Vocabulary, length: int) -> tuple[np.ndarray, np.ndarray]:
    tokens = tokenize_code(text)[:length]
    if not tokens:
        tokens = [EMPTY_MARKER]
    ids = np.full(length, PAD_ID, dtype=np.int64)
    mask = np.zeros(length, dtype=bool)
    for i, token in enumerate(tokens):
        ids[i] = vocab.id_of(token)
        mask[i] = True
    return ids, mask


def encode_entry(
    entry: LabeledWarning,
    vocab: Vocabulary,
    rule_vocab: Vocabulary,
    category_vocab: Vocabulary,
    lengths: tuple[int, int, int, int],
) -> EncodedSample:
    """Numeric encoding of one corpus entry.

    ``lengths`` gives the (function, field, slice, message) channel
    capacities; longer channels truncate, shorter ones pad.
    """
    len_f, len_fc, len_j, len_m = lengths
    function_ids, function_mask = _encode_channel(entry.function_text, vocab, len_f)
    field_ids, field_mask = _encode_channel(entry.field_text, vocab, len_fc)
    slice_ids, slice_mask = _encode_channel(entry.slice_text, vocab, len_j)
    message_ids, message_mask = _encode_channel(entry.warning.message, vocab, len_m)
    return EncodedSample(
        function_ids=function_ids,
        function_mask=function_mask,
        field_ids=field_ids,
        field_mask=field_mask,
        slice_ids=slice_ids,
        slice_mask=slice_mask,
        message_ids=message_ids,
        message_mask=message_mask,
        rule_id=rule_vocab.id_of(entry.warning.rule),
        category_id=category_vocab.id_of(entry.warning.category),
        rank=entry.warning.rank,
        confidence=entry.warning.confidence,
        label=1.0 if entry.label == SENSITIVE else 0.0,
    )


def encode_batch(
    entries: Sequence[LabeledWarning],
    vocab: Vocabulary,
    rule_vocab: Vocabulary,
    category_vocab: Vocabulary,
    lengths: tuple[int, int, int, int],
) -> EncodedBatch:
    samples = [encode_entry(e, vocab, rule_vocab, category_vocab, lengths) for e in entries]
    stack = lambda attr: np.stack([getattr(s, attr) for s in samples])
    return EncodedBatch(
        function_ids=stack("function_ids"),
        function_mask=stack("function_mask"),
        field_ids=stack("field_ids"),
        field_mask=stack("field_mask"),
        slice_ids=stack("slice_ids"),
        slice_mask=stack("slice_mask"),
        message_ids=stack("message_ids"),
        message_mask=stack("message_mask"),
        rule_ids=np.array([s.rule_id for s in samples], dtype=np.int64),
        category_ids=np.array([s.category_id for s in samples], dtype=np.int64),
        ranks=np.array([s.rank for s in samples], dtype=np.int64),
        confidences=np.array([s.confidence for s in samples], dtype=np.int64),
        labels=np.array([s.label for s in samples], dtype=np.float64),
    )


__all__ = [
    "CONFIDENCE_TABLE_SIZE",
    "EMPTY_MARKER",
    "EncodedBatch",
    "EncodedSample",
    "PAD_ID",
    "PAD_TOKEN",
    "RANK_TABLE_SIZE",
    "UNK_ID",
    "UNK_TOKEN",
    "Vocabulary",
    "build_value_vocab",
    "build_vocab",
    "encode_batch",
    "encode_entry",
    "tokenize_code",
]
