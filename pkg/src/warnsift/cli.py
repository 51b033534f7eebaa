"""Command-line surface: build-dataset, train, eval, filter."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from warnsift.code.context import build_context
from warnsift.code.javaparse import ParseError
from warnsift.config import load_config
from warnsift.dataset import (
    INSENSITIVE,
    SENSITIVE,
    CommitPair,
    LabeledWarning,
    dedup,
    is_bugfix_commit,
    label_warnings,
    load_corpus,
    promote_labels,
    split,
    write_corpus,
)
from warnsift.metrics import EvalMetrics, compute_metrics
from warnsift.nn.checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from warnsift.nn.training import TrainEpoch, predict_probs, train_model
from warnsift.reports import ReportParseError, WarningRecord, parse_report


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


# ---------------------------------------------------------------- contexts


def _attach_context(entry: LabeledWarning, src_root: Path) -> tuple[LabeledWarning, bool]:
    """Fill the code channels from the warning's source file.

    Returns the enriched entry and a fallback flag: a missing file
    leaves the channels empty, an unparseable one degrades to the raw
    file text; neither drops the warning.
    """
    source_file = src_root / entry.warning.source_path
    if not source_file.is_file():
        _warn(f"source not found: {source_file}")
        return entry, True
    text = source_file.read_text(encoding="utf-8")
    try:
        context = build_context(text, entry.warning)
    except ParseError as exc:
        _warn(f"unparseable source {source_file}: {exc}")
        return dataclasses.replace(entry, function_text=text), True
    enriched = dataclasses.replace(
        entry,
        function_text=context.function_text,
        field_text=context.field_text,
        slice_text=context.slice_text,
    )
    return enriched, False


# ------------------------------------------------------------ build-dataset


def _load_report(path: Path) -> list[WarningRecord]:
    records = parse_report(path.read_bytes(), on_reject=_warn)
    return list(records)


def _split_paths(out: Path) -> tuple[Path, Path, Path]:
    name = out.name
    stem = name[: -len(".jsonl")] if name.endswith(".jsonl") else name
    return tuple(out.parent / f"{stem}.{part}.jsonl" for part in ("train", "valid", "test"))


def _cmd_build_dataset(args: argparse.Namespace) -> int:
    manifest_path = Path(args.pairs)
    base = manifest_path.parent
    pairs = json.loads(manifest_path.read_text(encoding="utf-8"))
    if not isinstance(pairs, list):
        raise ValueError("pairs manifest must be a JSON list")

    corpus: list[LabeledWarning] = []
    kept_pairs = 0
    for i, raw in enumerate(pairs):
        try:
            pair = CommitPair(
                repo_id=raw["repo_id"],
                fixed_commit=raw["fixed_commit"],
                buggy_commit=raw["buggy_commit"],
                commit_message=raw["commit_message"],
                changed_files=frozenset(raw["changed_files"]),
            )
            buggy_report = base / raw["buggy_report"]
            fixed_report = base / raw["fixed_report"]
            src_root = base / raw["src_root"]
        except KeyError as exc:
            raise ValueError(f"pair {i}: missing key {exc}") from None
        if not is_bugfix_commit(pair.commit_message):
            _warn(f"pair {i} ({pair.repo_id}/{pair.fixed_commit}): not a bug-fixing commit, skipped")
            continue
        kept_pairs += 1
        labeled = label_warnings(
            _load_report(buggy_report),
            _load_report(fixed_report),
            pair.changed_files,
            repo_id=pair.repo_id,
            commit=pair.fixed_commit,
        )
        corpus.extend(_attach_context(entry, src_root)[0] for entry in labeled)

    corpus = dedup(promote_labels(corpus))
    out = Path(args.out)
    write_corpus(out, corpus)
    train, valid, test = split(corpus, args.seed)
    for part_path, part in zip(_split_paths(out), (train, valid, test)):
        write_corpus(part_path, part)

    sensitive = sum(1 for e in corpus if e.label == SENSITIVE)
    print(
        f"{len(corpus)} warnings ({sensitive} sensitive) from {kept_pairs} commit pairs; "
        f"splits {len(train)}/{len(valid)}/{len(test)}"
    )
    return 0


# ------------------------------------------------------------------- train


def _print_epoch(row: TrainEpoch) -> None:
    print(
        f"epoch {row.epoch:3d}  loss {row.train_loss:.6f}  "
        f"valid P {100 * row.valid_precision:6.2f}  R {100 * row.valid_recall:6.2f}  "
        f"F1 {100 * row.valid_f1:6.2f}  lr {row.learning_rate:.2e}"
    )


def _cmd_train(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    corpus = load_corpus(args.data)
    train_entries, valid_entries, _ = split(corpus, config.seed)
    result = train_model(config, train_entries, valid_entries, log=_print_epoch)
    save_checkpoint(
        args.out,
        result.params,
        config,
        result.vocab,
        result.rule_vocab,
        result.category_vocab,
    )
    print(f"saved {args.out}")
    return 0


# -------------------------------------------------------------------- eval


def _predicted_labels(probs, threshold: float) -> list[str]:
    return [SENSITIVE if p > threshold else INSENSITIVE for p in probs]


def _metrics_dict(metrics: EvalMetrics) -> dict:
    def as_pct(x: float) -> float:
        return round(100.0 * x, 2)

    per_class = {}
    for cls, m in metrics.per_class.items():
        per_class[cls] = (
            None
            if m is None
            else {
                "precision": as_pct(m.precision),
                "recall": as_pct(m.recall),
                "f1": as_pct(m.f1),
                "support": m.support,
            }
        )
    return {
        "per_class": per_class,
        "overall": {
            "precision": as_pct(metrics.overall_precision),
            "recall": as_pct(metrics.overall_recall),
            "f1": as_pct(metrics.overall_f1),
        },
        "accuracy": as_pct(metrics.accuracy),
        "total": metrics.total,
    }


def _print_metrics(metrics: EvalMetrics) -> None:
    print(f"{'class':<14}{'precision':>10}{'recall':>10}{'f1':>10}{'support':>10}")
    for cls, m in metrics.per_class.items():
        if m is None:
            print(f"{cls:<14}{'-':>10}{'-':>10}{'-':>10}{0:>10}")
            continue
        print(
            f"{cls:<14}{100 * m.precision:>10.2f}{100 * m.recall:>10.2f}"
            f"{100 * m.f1:>10.2f}{m.support:>10}"
        )
    print(
        f"{'overall':<14}{100 * metrics.overall_precision:>10.2f}"
        f"{100 * metrics.overall_recall:>10.2f}{100 * metrics.overall_f1:>10.2f}"
        f"{metrics.total:>10}"
    )
    print(f"accuracy {100 * metrics.accuracy:.2f} on {metrics.total} warnings")


def _cmd_eval(args: argparse.Namespace) -> int:
    ckpt = load_checkpoint(args.model)
    entries = load_corpus(args.data)
    if not entries:
        raise ValueError(f"no entries in {args.data}")
    probs = predict_probs(
        ckpt.params, entries, ckpt.vocab, ckpt.rule_vocab, ckpt.category_vocab, ckpt.config
    )
    predicted = _predicted_labels(probs, ckpt.config.threshold)
    metrics = compute_metrics([e.label for e in entries], predicted)
    if args.json:
        print(json.dumps(_metrics_dict(metrics), sort_keys=True))
    else:
        _print_metrics(metrics)
    return 0


# ------------------------------------------------------------------ filter


@dataclass(frozen=True)
class ScoredWarning:
    warning: WarningRecord
    score: float
    fallback: bool  # context came from a missing or unparseable source


def score_report(
    records: list[WarningRecord], checkpoint: Checkpoint, src_root
) -> list[ScoredWarning]:
    """Model score for every warning, in report order."""
    if not records:
        return []
    src_root = Path(src_root)
    entries = []
    fallbacks = []
    for record in records:
        entry, fallback = _attach_context(
            LabeledWarning(warning=record, label=INSENSITIVE), src_root
        )
        entries.append(entry)
        fallbacks.append(fallback)
    probs = predict_probs(
        checkpoint.params,
        entries,
        checkpoint.vocab,
        checkpoint.rule_vocab,
        checkpoint.category_vocab,
        checkpoint.config,
    )
    return [
        ScoredWarning(warning=r, score=float(p), fallback=fb)
        for r, p, fb in zip(records, probs, fallbacks)
    ]


def filter_report(
    records: list[WarningRecord],
    checkpoint: Checkpoint,
    src_root,
    threshold: float,
) -> list[ScoredWarning]:
    """Warnings scoring strictly above the threshold, best first.

    Raising the threshold never adds a warning; ties keep report order.
    """
    scored = score_report(records, checkpoint, src_root)
    retained = [s for s in scored if s.score > threshold]
    retained.sort(key=lambda s: -s.score)
    return retained


def _warning_json(scored: ScoredWarning) -> str:
    w = scored.warning
    payload = {
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
        "score": scored.score,
        "fallback": scored.fallback,
    }
    return json.dumps(payload, sort_keys=True)


def _cmd_filter(args: argparse.Namespace) -> int:
    ckpt = load_checkpoint(args.model)
    records = parse_report(Path(args.report).read_bytes(), on_reject=_warn)
    threshold = ckpt.config.threshold if args.threshold is None else args.threshold
    for scored in filter_report(list(records), ckpt, args.src, threshold):
        print(_warning_json(scored))
    return 0


# -------------------------------------------------------------------- main


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warnsift",
        description="Verify static-analyzer warnings against bug-fix history.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dataset", help="label warnings from commit-pair reports")
    p.add_argument("--pairs", required=True, help="JSON manifest of commit pairs")
    p.add_argument("--out", required=True, help="corpus JSON-lines output path")
    p.add_argument("--seed", type=int, default=0, help="split shuffling seed")
    p.set_defaults(func=_cmd_build_dataset)

    p = sub.add_parser("train", help="fit a classifier on a corpus")
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--data", required=True, help="corpus JSON-lines path")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="score a split and report metrics")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--data", required=True, help="JSON-lines split to evaluate")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("filter", help="drop low-scoring warnings from a report")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--report", required=True, help="analyzer XML report")
    p.add_argument("--src", required=True, help="source tree the report refers to")
    p.add_argument("--threshold", type=float, default=None, help="retention threshold")
    p.set_defaults(func=_cmd_filter)
    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, ParseError, ReportParseError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


__all__ = ["ScoredWarning", "cli_main", "filter_report", "main", "score_report"]
