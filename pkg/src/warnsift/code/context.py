"""Extraction of the code channels attached to a warning.

Each warning contributes three textual channels: the enclosing function
source, the class field declarations, and a dependence slice of the IR
around the flagged lines.  When a warning cannot be pinned to a single
method (missing line info, ambiguous or failed location) the context
degrades to whole-class granularity rather than being dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..reports import WarningRecord
from .ir import IrFunction, LoweringError, lower_method
from .javaparse import MethodDecl, SourceUnit, parse_java
from .slicing import SliceCriterionError, warning_aware_slice


@dataclass(frozen=True)
class CodeContext:
    function_text: str
    field_text: str
    slice_text: str
    located_methods: tuple[str, ...]
    whole_class: bool


def locate_function(unit: SourceUnit, warning: WarningRecord) -> list[MethodDecl]:
    """Methods the warning points at; empty list means the whole class.

    Line information wins over the method name: when the warning's line
    span falls inside exactly one method, that method is returned.  A
    span matching zero or several methods falls back to whole-class
    granularity.  Without line info, all methods matching the reported
    name are returned (overloads are indistinguishable here).
    """
    if warning.line_start is not None:
        start = warning.line_start
        end = warning.line_end if warning.line_end is not None else start
        containing = [
            m for m in unit.methods if m.line_start <= start and end <= m.line_end
        ]
        return containing if len(containing) == 1 else []
    if warning.method_name:
        return [m for m in unit.methods if m.name == warning.method_name]
    return []


def extract_fields(unit: SourceUnit) -> str:
    texts: list[str] = []
    for decl in unit.fields:
        # Multi-declarator statements repeat the same text per name.
        if texts and texts[-1] == decl.text:
            continue
        texts.append(decl.text)
    return "\n".join(texts)


def class_ir_text(unit: SourceUnit) -> str:
    """Rendered IR of every method body, tagged by method name."""
    sections: list[str] = []
    for method in unit.methods:
        if method.body is None:
            continue
        try:
            fn = lower_method(method, unit)
        except LoweringError:
            continue
        sections.append(f"method {method.name}:\n{fn.render_text()}")
    return "\n".join(sections)


def build_context(source_text: str, warning: WarningRecord) -> CodeContext:
    """Parse ``source_text`` and assemble the warning's code channels.

    Propagates :class:`~warnsift.code.javaparse.ParseError`; callers
    decide whether unparseable sources abort or degrade.
    """
    unit = parse_java(source_text)
    located = locate_function(unit, warning)
    field_text = extract_fields(unit)

    slice_text: str | None = None
    if warning.line_start is not None and len(located) == 1 and located[0].body is not None:
        end = warning.line_end if warning.line_end is not None else warning.line_start
        lines = set(range(warning.line_start, end + 1))
        try:
            fn: IrFunction = lower_method(located[0], unit)
            slice_text = warning_aware_slice(fn, lines)
        except (LoweringError, SliceCriterionError):
            slice_text = None

    if located:
        function_text = "\n\n".join(m.text for m in located)
        whole_class = False
    else:
        function_text = unit.source_text
        whole_class = True
    if slice_text is None:
        slice_text = class_ir_text(unit)

    return CodeContext(
        function_text=function_text,
        field_text=field_text,
        slice_text=slice_text,
        located_methods=tuple(m.name for m in located),
        whole_class=whole_class,
    )


__all__ = ["CodeContext", "build_context", "class_ir_text", "extract_fields", "locate_function"]
