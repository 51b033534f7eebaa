"""Dependence graph construction and intra-procedural slicing.

Data edges come from reaching definitions over the control-flow graph:
an edge (d, u) means the definition at index ``d`` may reach the use at
index ``u``.  Field and array stores are weak definitions: they add a
reaching definition without killing earlier ones, so flows through a
mutated object stay visible.  Control edges connect a conditional
branch to every instruction whose execution depends on it, including
instructions in nested guarded regions.

A slice is taken in both directions: everything the criterion
instructions transitively depend on, plus everything that transitively
depends on them, in original instruction order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .ir import IrFunction


class SliceCriterionError(ValueError):
    """No instruction matches the requested criterion lines."""


@dataclass
class Dpg:
    """Program dependence graph over instruction indices."""

    nodes: list[int]
    data_edges: set[tuple[int, int]]
    control_edges: set[tuple[int, int]]

    @property
    def edges(self) -> set[tuple[int, int]]:
        return self.data_edges | self.control_edges


def successors(fn: IrFunction) -> list[list[int]]:
    count = len(fn.instructions)
    succ: list[list[int]] = [[] for _ in range(count)]
    for ins in fn.instructions:
        i = ins.index
        if ins.kind == "goto":
            succ[i] = [fn.label_positions[ins.jump_target]]
        elif ins.kind == "branch":
            targets = [fn.label_positions[ins.jump_target]]
            if i + 1 < count:
                targets.append(i + 1)
            succ[i] = targets
        elif ins.kind == "return":
            succ[i] = []
        elif i + 1 < count:
            succ[i] = [i + 1]
    return succ


def reaching_definitions(fn: IrFunction) -> list[set[int]]:
    """IN set of definition sites per instruction, to a fixpoint."""
    instructions = fn.instructions
    count = len(instructions)
    succ = successors(fn)
    preds: list[list[int]] = [[] for _ in range(count)]
    for i, targets in enumerate(succ):
        for t in targets:
            preds[t].append(i)

    sites_by_var: dict[str, set[int]] = {}
    for ins in instructions:
        for name in ins.defs:
            sites_by_var.setdefault(name, set()).add(ins.index)

    gen: list[set[int]] = [set() for _ in range(count)]
    kill: list[set[int]] = [set() for _ in range(count)]
    for ins in instructions:
        if not ins.defs:
            continue
        gen[ins.index] = {ins.index}
        if not ins.weak_def:
            for name in ins.defs:
                kill[ins.index] |= sites_by_var[name] - {ins.index}

    in_sets: list[set[int]] = [set() for _ in range(count)]
    out_sets: list[set[int]] = [set() for _ in range(count)]
    work = deque(range(count))
    queued = [True] * count
    while work:
        i = work.popleft()
        queued[i] = False
        new_in: set[int] = set()
        for p in preds[i]:
            new_in |= out_sets[p]
        in_sets[i] = new_in
        new_out = gen[i] | (new_in - kill[i])
        if new_out != out_sets[i]:
            out_sets[i] = new_out
            for s in succ[i]:
                if not queued[s]:
                    work.append(s)
                    queued[s] = True
    return in_sets


def build_pdg(fn: IrFunction) -> Dpg:
    instructions = fn.instructions
    in_sets = reaching_definitions(fn)
    defs_at = {ins.index: ins.defs for ins in instructions}

    data_edges: set[tuple[int, int]] = set()
    for ins in instructions:
        if not ins.uses:
            continue
        for d in in_sets[ins.index]:
            if defs_at[d] & ins.uses:
                data_edges.add((d, ins.index))

    control_edges: set[tuple[int, int]] = set()
    for ins in instructions:
        parent = ins.control_parent
        while parent is not None:
            control_edges.add((parent, ins.index))
            parent = instructions[parent].control_parent

    return Dpg(
        nodes=[ins.index for ins in instructions],
        data_edges=data_edges,
        control_edges=control_edges,
    )


def slice_indices(graph: Dpg, criterion: set[int]) -> set[int]:
    """Bidirectional closure over dependence edges from ``criterion``."""
    forward: dict[int, list[int]] = {}
    backward: dict[int, list[int]] = {}
    for src, dst in graph.edges:
        forward.setdefault(src, []).append(dst)
        backward.setdefault(dst, []).append(src)

    result = set(criterion)
    for adjacency in (backward, forward):
        seen = set(criterion)
        frontier = deque(criterion)
        while frontier:
            node = frontier.popleft()
            for nxt in adjacency.get(node, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        result |= seen
    return result


def criterion_for_lines(fn: IrFunction, lines: set[int]) -> set[int]:
    return {ins.index for ins in fn.instructions if ins.source_line in lines}


def warning_slice_indices(fn: IrFunction, graph: Dpg, lines: set[int]) -> set[int]:
    criterion = criterion_for_lines(fn, lines)
    if not criterion:
        raise SliceCriterionError(f"no instruction maps to lines {sorted(lines)}")
    return slice_indices(graph, criterion)


def warning_aware_slice(fn: IrFunction, lines: set[int]) -> str:
    """Rendered slice text for a warning spanning ``lines``.

    Instructions appear in original order, one per line.
    """
    graph = build_pdg(fn)
    kept = warning_slice_indices(fn, graph, lines)
    return "\n".join(ins.render for ins in fn.instructions if ins.index in kept)


__all__ = [
    "Dpg",
    "SliceCriterionError",
    "build_pdg",
    "criterion_for_lines",
    "reaching_definitions",
    "slice_indices",
    "successors",
    "warning_aware_slice",
    "warning_slice_indices",
]
