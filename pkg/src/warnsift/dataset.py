"""Labeled-corpus construction from buggy/fixed commit pairs.

A warning raised on the buggy side of a fix commit is *bug-sensitive* when
its fingerprint is gone from the fixed side, and *bug-insensitive* when it
survives. Two corpus-wide cleanup passes follow: any fingerprint seen as
sensitive anywhere forces that label on all of its occurrences, and
duplicated insensitive warnings are collapsed to their first occurrence.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from warnsift.reports import WarningRecord, fingerprint

SENSITIVE = "sensitive"
INSENSITIVE = "insensitive"

# A commit message qualifies as a bug fix when it contains "fix" plus either
# one of these words or one of the configured bug-classification phrases.
BUG_WORDS = ("bug", "defect", "error", "fault", "issue")
DEFAULT_BUG_PHRASES = (
    "null pointer dereference",
    "resource leak",
    "memory leak",
    "race condition",
    "buffer overflow",
)

SPLIT_FRACTIONS = (0.8, 0.1, 0.1)
MIN_SPLIT_SIZE = 10


@dataclass(frozen=True)
class CommitPair:
    """A fix commit together with its parent (the buggy version)."""

    repo_id: str
    fixed_commit: str
    buggy_commit: str
    commit_message: str
    changed_files: frozenset[str]

    def __post_init__(self) -> None:
        if not self.changed_files:
            raise ValueError("changed_files must be non-empty")
        if self.buggy_commit == self.fixed_commit:
            raise ValueError("buggy and fixed commits must differ")


@dataclass(frozen=True)
class LabeledWarning:
    """A warning with its label and originating (repo, fix commit)."""

    warning: WarningRecord
    label: str
    repo_id: str = ""
    commit: str = ""
    # Code context channels, filled in by the dataset builder so that the
    # corpus file is self-contained for training and evaluation.
    function_text: str = ""
    field_text: str = ""
    slice_text: str = ""

    def __post_init__(self) -> None:
        if self.label not in (SENSITIVE, INSENSITIVE):
            raise ValueError(f"bad label: {self.label!r}")


def is_bugfix_commit(message: str, bug_phrases: Sequence[str] = DEFAULT_BUG_PHRASES) -> bool:
    """Keyword filter for fix commits.

    Case-insensitive containment: the message must mention "fix" and at
    least one bug-related word or one bug-classification phrase.
    """
    text = message.lower()
    if "fix" not in text:
        return False
    if any(word in text for word in BUG_WORDS):
        return True
    return any(phrase.lower() in text for phrase in bug_phrases)


def label_warnings(
    buggy_report: Sequence[WarningRecord],
    fixed_report: Sequence[WarningRecord],
    changed_files: frozenset[str] | set[str],
    repo_id: str = "",
    commit: str = "",
) -> list[LabeledWarning]:
    """Label the buggy-side warnings of one commit pair.

    Only warnings in the commit's changed files are considered. A warning is
    sensitive iff its fingerprint does not occur in the fixed-side report
    (restricted to the same files).
    """
    if not changed_files:
        raise ValueError("changed_files must be non-empty")
    surviving = {fingerprint(w) for w in fixed_report if w.source_path in changed_files}
    labeled = []
    for w in buggy_report:
        if w.source_path not in changed_files:
            continue
        label = INSENSITIVE if fingerprint(w) in surviving else SENSITIVE
        labeled.append(LabeledWarning(warning=w, label=label, repo_id=repo_id, commit=commit))
    return labeled


def promote_labels(corpus: Sequence[LabeledWarning]) -> list[LabeledWarning]:
    """Force every occurrence of a fingerprint seen as sensitive to sensitive."""
    sensitive_prints = {fingerprint(e.warning) for e in corpus if e.label == SENSITIVE}
    return [
        replace(e, label=SENSITIVE)
        if e.label == INSENSITIVE and fingerprint(e.warning) in sensitive_prints
        else e
        for e in corpus
    ]


def dedup(corpus: Sequence[LabeledWarning]) -> list[LabeledWarning]:
    """Drop duplicated warnings, keeping first occurrences.

    Insensitive entries are unique per fingerprint across the whole corpus;
    sensitive entries are kept once per (fingerprint, provenance) so the same
    logical warning may recur across different fix commits. Promotion must
    already have run.
    """
    seen_insensitive = set()
    seen_sensitive = set()
    kept = []
    for e in corpus:
        fp = fingerprint(e.warning)
        if e.label == INSENSITIVE:
            if fp in seen_insensitive:
                continue
            seen_insensitive.add(fp)
        else:
            key = (fp, e.repo_id, e.commit)
            if key in seen_sensitive:
                continue
            seen_sensitive.add(key)
        kept.append(e)
    return kept


def _split_sizes(n: int) -> tuple[int, int, int]:
    """Validation/test sizes for one label group; train takes the rest."""
    if n >= 3:
        n_val = max(1, round(n * SPLIT_FRACTIONS[1]))
        n_test = max(1, round(n * SPLIT_FRACTIONS[2]))
    else:
        n_val = round(n * SPLIT_FRACTIONS[1])
        n_test = round(n * SPLIT_FRACTIONS[2])
    return n - n_val - n_test, n_val, n_test


def split(
    corpus: Sequence[LabeledWarning], seed: int
) -> tuple[list[LabeledWarning], list[LabeledWarning], list[LabeledWarning]]:
    """Deterministic stratified 8:1:1 split.

    Each label group is shuffled with the seed and partitioned so both
    classes appear in every split whenever their counts permit.
    """
    if len(corpus) < MIN_SPLIT_SIZE:
        raise ValueError(f"corpus too small to split: {len(corpus)} < {MIN_SPLIT_SIZE}")
    rng = random.Random(seed)
    train: list[LabeledWarning] = []
    valid: list[LabeledWarning] = []
    test: list[LabeledWarning] = []
    for label in (INSENSITIVE, SENSITIVE):
        group = [e for e in corpus if e.label == label]
        rng.shuffle(group)
        n_train, n_val, _ = _split_sizes(len(group))
        train.extend(group[:n_train])
        valid.extend(group[n_train : n_train + n_val])
        test.extend(group[n_train + n_val :])
    return train, valid, test


def to_json_dict(e: LabeledWarning) -> dict:
    w = e.warning
    d = {
        "rule": w.rule,
        "category": w.category,
        "rank": w.rank,
        "confidence": w.confidence,
        "message": w.message,
        "class_name": w.class_name,
        "method_name": w.method_name,
        "source_path": w.source_path,
        "line_start": w.line_start,
        "line_end": w.line_end,
        "label": e.label,
        "repo_id": e.repo_id,
        "commit": e.commit,
    }
    if e.function_text or e.field_text or e.slice_text:
        d["function_text"] = e.function_text
        d["field_text"] = e.field_text
        d["slice_text"] = e.slice_text
    return d


def from_json_dict(d: dict) -> LabeledWarning:
    w = WarningRecord(
        rule=d["rule"],
        category=d["category"],
        rank=d["rank"],
        confidence=d["confidence"],
        message=d["message"],
        class_name=d["class_name"],
        method_name=d.get("method_name"),
        source_path=d["source_path"],
        line_start=d.get("line_start"),
        line_end=d.get("line_end"),
    )
    return LabeledWarning(
        warning=w,
        label=d["label"],
        repo_id=d.get("repo_id", ""),
        commit=d.get("commit", ""),
        function_text=d.get("function_text", ""),
        field_text=d.get("field_text", ""),
        slice_text=d.get("slice_text", ""),
    )


def write_corpus(path, corpus: Iterable[LabeledWarning]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in corpus:
            fh.write(json.dumps(to_json_dict(e), sort_keys=True))
            fh.write("\n")


def load_corpus(path) -> list[LabeledWarning]:
    corpus = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                corpus.append(from_json_dict(json.loads(line)))
    return corpus
