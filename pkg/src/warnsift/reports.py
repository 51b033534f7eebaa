"""Analyzer XML report ingestion.

Parses SpotBugs-family XML reports into normalized :class:`WarningRecord`
objects and derives line-insensitive fingerprints so the same logical
warning can be matched across two versions of a program whose line numbers
shifted.
"""

from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Callable, NamedTuple

logger = logging.getLogger(__name__)

# Closed category set of the analyzer. NOISE is parsed but intended as a
# data-mining control, so downstream consumers exclude it.
CATEGORIES = frozenset(
    {
        "BAD_PRACTICE",
        "CORRECTNESS",
        "EXPERIMENTAL",
        "I18N",
        "MALICIOUS_CODE",
        "MT_CORRECTNESS",
        "NOISE",
        "PERFORMANCE",
        "SECURITY",
        "STYLE",
    }
)

EXCLUDED_CATEGORIES = frozenset({"NOISE"})

RANK_RANGE = (1, 20)
CONFIDENCE_RANGE = (1, 3)

_DIGIT_RUN = re.compile(r"\d+")
_NUM_PLACEHOLDER = "#"


class ReportParseError(ValueError):
    """Malformed analyzer XML. Carries the approximate byte offset."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


@dataclass(frozen=True)
class WarningRecord:
    """One analyzer warning with its attributes and source coordinates."""

    rule: str
    category: str
    rank: int
    confidence: int
    message: str
    class_name: str
    source_path: str
    method_name: str | None = None
    line_start: int | None = None
    line_end: int | None = None

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category: {self.category!r}")
        if not RANK_RANGE[0] <= self.rank <= RANK_RANGE[1]:
            raise ValueError(f"rank {self.rank} outside {RANK_RANGE}")
        if not CONFIDENCE_RANGE[0] <= self.confidence <= CONFIDENCE_RANGE[1]:
            raise ValueError(f"confidence {self.confidence} outside {CONFIDENCE_RANGE}")
        if self.line_start is None and self.line_end is not None:
            raise ValueError("line_end present without line_start")
        if self.line_start is not None:
            if self.line_start <= 0:
                raise ValueError("line_start must be positive")
            if self.line_end is not None and self.line_end < self.line_start:
                raise ValueError("line_end before line_start")


class WarningFingerprint(NamedTuple):
    """Version-stable identity of a warning.

    Line numbers are deliberately excluded and digit runs in the message are
    collapsed so that cosmetic shifts between a buggy and a fixed revision do
    not break the match.
    """

    rule: str
    source_path: str
    method_name: str | None
    normalized_message: str


def normalize_message(message: str) -> str:
    """Replace every digit run with a placeholder."""
    return _DIGIT_RUN.sub(_NUM_PLACEHOLDER, message)


def fingerprint(w: WarningRecord) -> WarningFingerprint:
    return WarningFingerprint(
        rule=w.rule,
        source_path=w.source_path,
        method_name=w.method_name,
        normalized_message=normalize_message(w.message),
    )


def _clamp(value: int, lo: int, hi: int, what: str) -> int:
    if value < lo or value > hi:
        clamped = min(max(value, lo), hi)
        logger.warning("%s %d outside [%d, %d]; clamped to %d", what, value, lo, hi, clamped)
        return clamped
    return value


def _byte_offset(data: bytes, line: int, column: int) -> int:
    """Translate a 1-based (line, column) position into a byte offset."""
    offset = 0
    for _ in range(line - 1):
        nl = data.find(b"\n", offset)
        if nl < 0:
            break
        offset = nl + 1
    return offset + column


def parse_report(
    report_bytes: bytes,
    on_reject: Callable[[str], None] | None = None,
) -> list[WarningRecord]:
    """Parse an analyzer XML report into warning records.

    One record is produced per ``BugInstance`` element, in document order.
    Instances that cannot be normalized (unknown category, missing
    mandatory fields) are rejected with a diagnostic; the remaining records
    are still returned. A malformed document raises
    :class:`ReportParseError` naming the byte offset.
    """
    reject = on_reject or (lambda msg: logger.warning("rejected BugInstance: %s", msg))
    try:
        root = ET.fromstring(report_bytes)
    except ET.ParseError as exc:
        line, column = exc.position
        raise ReportParseError(str(exc.msg), _byte_offset(report_bytes, line, column)) from exc

    records: list[WarningRecord] = []
    for idx, bug in enumerate(root.iter("BugInstance")):
        try:
            records.append(_record_from_element(bug))
        except (ValueError, KeyError) as exc:
            reject(f"instance {idx}: {exc}")
    return records


def _record_from_element(bug: ET.Element) -> WarningRecord:
    rule = bug.get("type")
    category = bug.get("category")
    if not rule:
        raise ValueError("missing type attribute")
    if category not in CATEGORIES:
        raise ValueError(f"unknown category: {category!r}")

    rank = _clamp(int(bug.get("rank", "20")), *RANK_RANGE, what="rank")
    confidence = _clamp(int(bug.get("priority", "3")), *CONFIDENCE_RANGE, what="confidence")

    clazz = bug.find("Class")
    if clazz is None or not clazz.get("classname"):
        raise ValueError("missing Class element")
    class_name = clazz.get("classname", "")

    method = bug.find("Method")
    method_name = method.get("name") if method is not None else None

    source = bug.find("SourceLine")
    line_start = line_end = None
    source_path = None
    if source is not None:
        source_path = source.get("sourcepath")
        if source.get("start") is not None:
            line_start = int(source.get("start", "0"))
            if source.get("end") is not None:
                line_end = int(source.get("end", "0"))
    if source_path is None:
        nested = bug.find("Class/SourceLine")
        if nested is not None:
            source_path = nested.get("sourcepath")
    if not source_path:
        raise ValueError("no sourcepath on any SourceLine")

    message_el = bug.find("LongMessage")
    message = (message_el.text or "") if message_el is not None else ""

    return WarningRecord(
        rule=rule,
        category=category,
        rank=rank,
        confidence=confidence,
        message=message,
        class_name=class_name,
        method_name=method_name,
        source_path=source_path,
        line_start=line_start,
        line_end=line_end,
    )


def serialize_report(records: list[WarningRecord]) -> bytes:
    """Render records back into the analyzer XML dialect.

    Fixture writer used by tests and corpus generators; ``parse_report``
    composed with this function is the identity.
    """
    root = ET.Element("BugCollection")
    for w in records:
        bug = ET.SubElement(
            root,
            "BugInstance",
            type=w.rule,
            category=w.category,
            rank=str(w.rank),
            priority=str(w.confidence),
        )
        ET.SubElement(bug, "Class", classname=w.class_name)
        if w.method_name is not None:
            ET.SubElement(bug, "Method", name=w.method_name)
        line_attrs = {"sourcepath": w.source_path}
        if w.line_start is not None:
            line_attrs["start"] = str(w.line_start)
            if w.line_end is not None:
                line_attrs["end"] = str(w.line_end)
        ET.SubElement(bug, "SourceLine", **line_attrs)
        ET.SubElement(bug, "LongMessage").text = w.message
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)
