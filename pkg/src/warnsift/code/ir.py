"""Lowering of parsed methods to a typed three-address IR.

Every instruction defines at most one variable.  Subexpression results
land in compiler temporaries named ``$stack0``, ``$stack1``, ... with
strictly increasing numbering in emission order.  Parameters enter the
function through identity instructions (``v0 := @parameter0``) so that
a definition site exists for every name the body reads.  Structured
control flow is flattened to conditional branches, gotos and labels.

Rendering canonicalizes names: every variable that is defined somewhere
in the function is renamed to ``v0``, ``v1``, ... in first-definition
order, while temporaries keep their ``$stackN`` names and never-defined
names (fields, ``this``) keep their source spelling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .javaparse import (
    ArrayAccess,
    Assign,
    Binary,
    Block,
    Break,
    Call,
    Continue,
    ExprStmt,
    FieldAccess,
    For,
    If,
    Incr,
    Literal,
    LocalDecl,
    MethodDecl,
    Name,
    New,
    NewArray,
    ParseError,
    Return,
    SourceUnit,
    Unary,
    While,
)


class LoweringError(ValueError):
    """Statement or expression that cannot be lowered to the IR."""

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class IrInstruction:
    index: int
    kind: str  # assign | unary | binary | invoke | field_access | array_op
    #          # | branch | goto | label | return
    defs: frozenset[str]
    uses: frozenset[str]
    source_line: int
    parts: tuple[tuple[str, str], ...] = ()
    jump_target: int | None = None  # label id for branch/goto
    label_id: int | None = None  # for label instructions
    control_parent: int | None = None  # index of the guarding branch
    weak_def: bool = False  # field/array stores do not kill prior defs
    render: str = ""


@dataclass
class IrFunction:
    name: str
    instructions: list[IrInstruction]
    label_positions: dict[int, int] = field(default_factory=dict)
    rename_map: dict[str, str] = field(default_factory=dict)

    def render_text(self) -> str:
        return "\n".join(ins.render for ins in self.instructions)


# Comparison negation used when a branch jumps on the condition being false.
_NEGATED = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
_COMPARISONS = frozenset(_NEGATED)

_VAR = "var"
_TXT = "txt"

Atom = tuple[str, str]


def _vars(*atoms: Atom) -> frozenset[str]:
    return frozenset(text for tag, text in atoms if tag == _VAR)


class _Lowerer:
    def __init__(self, method: MethodDecl, field_names: frozenset[str]) -> None:
        self.method = method
        self.instructions: list[IrInstruction] = []
        self.label_positions: dict[int, int] = {}
        self.temp_counter = 0
        self.label_counter = 0
        self.guard_stack: list[int] = []
        self.loop_stack: list[tuple[int, int]] = []  # (continue label, break label)
        self.scope = (
            set(method.param_names) | set(field_names) | {"this"} | _declared_locals(method.body)
        )

    # emission helpers

    def emit(
        self,
        kind: str,
        defs: frozenset[str],
        uses: frozenset[str],
        line: int,
        parts: tuple[tuple[str, str], ...],
        jump_target: int | None = None,
        label_id: int | None = None,
        weak_def: bool = False,
    ) -> int:
        parent = self.guard_stack[-1] if self.guard_stack else None
        ins = IrInstruction(
            index=len(self.instructions),
            kind=kind,
            defs=defs,
            uses=uses,
            source_line=line,
            parts=parts,
            jump_target=jump_target,
            label_id=label_id,
            control_parent=parent,
            weak_def=weak_def,
        )
        self.instructions.append(ins)
        return ins.index

    def new_temp(self) -> str:
        name = f"$stack{self.temp_counter}"
        self.temp_counter += 1
        return name

    def new_label(self) -> int:
        lid = self.label_counter
        self.label_counter += 1
        return lid

    def place_label(self, lid: int, line: int) -> None:
        index = self.emit(
            "label",
            frozenset(),
            frozenset(),
            line,
            ((_TXT, f"label{lid}:"),),
            label_id=lid,
        )
        self.label_positions[lid] = index

    # entry point

    def lower(self) -> IrFunction:
        for i, pname in enumerate(self.method.param_names):
            self.emit(
                "assign",
                frozenset({pname}),
                frozenset(),
                self.method.line_start,
                ((_VAR, pname), (_TXT, f" := @parameter{i}")),
            )
        if self.method.body is not None:
            self.lower_block(self.method.body)
        fn = IrFunction(self.method.name, self.instructions, self.label_positions)
        _render(fn)
        return fn

    # statements

    def lower_block(self, block: Block) -> None:
        for stmt in block.statements:
            self.lower_statement(stmt)

    def lower_statement(self, stmt: object) -> None:
        if isinstance(stmt, Block):
            self.lower_block(stmt)
        elif isinstance(stmt, LocalDecl):
            for name, init in stmt.declarators:
                if init is not None:
                    self.lower_into(name, init, stmt.line)
        elif isinstance(stmt, ExprStmt):
            self.lower_expr_statement(stmt.expr, stmt.line)
        elif isinstance(stmt, If):
            self.lower_if(stmt)
        elif isinstance(stmt, While):
            self.lower_while(stmt)
        elif isinstance(stmt, For):
            self.lower_for(stmt)
        elif isinstance(stmt, Return):
            self.lower_return(stmt)
        elif isinstance(stmt, Break):
            if not self.loop_stack:
                raise LoweringError("break outside a loop", stmt.line)
            self.emit_goto(self.loop_stack[-1][1], stmt.line)
        elif isinstance(stmt, Continue):
            if not self.loop_stack:
                raise LoweringError("continue outside a loop", stmt.line)
            self.emit_goto(self.loop_stack[-1][0], stmt.line)
        else:  # pragma: no cover - parser produces no other nodes
            raise LoweringError(f"unsupported statement {type(stmt).__name__}", 0)

    def lower_expr_statement(self, expr: object, line: int) -> None:
        if isinstance(expr, Assign):
            self.lower_assign(expr, line)
        elif isinstance(expr, Incr):
            op = "+" if expr.op == "++" else "-"
            self.lower_assign(Assign(expr.target, op + "=", Literal("1")), line)
        elif isinstance(expr, Call):
            self.lower_call(expr, line, target=None)
        else:
            # Expression statements outside calls have no effect; lower
            # for completeness so uses stay visible to the slicer.
            self.atom(expr, line)

    def lower_assign(self, node: Assign, line: int) -> None:
        target = node.target
        if isinstance(target, Name):
            if node.op == "=":
                self.lower_into(target.ident, node.value, line)
            else:
                value = self.atom(node.value, line)
                self.emit_binary(target.ident, (_VAR, target.ident), node.op[0], value, line)
        elif isinstance(target, FieldAccess):
            if node.op == "=":
                value = self.atom(node.value, line)
            else:
                current = self.lower_field_read(target, line)
                rhs = self.atom(node.value, line)
                temp = self.new_temp()
                self.emit_binary(temp, (_VAR, current), node.op[0], rhs, line)
                value = (_VAR, temp)
            self.lower_field_store(target, value, line)
        elif isinstance(target, ArrayAccess):
            recv = self.atom(target.receiver, line)
            index = self.atom(target.index, line)
            if node.op == "=":
                value = self.atom(node.value, line)
            else:
                temp = self.new_temp()
                self.emit(
                    "array_op",
                    frozenset({temp}),
                    _vars(recv, index),
                    line,
                    ((_VAR, temp), (_TXT, " = "), recv, (_TXT, "["), index, (_TXT, "]")),
                )
                rhs = self.atom(node.value, line)
                temp2 = self.new_temp()
                self.emit_binary(temp2, (_VAR, temp), node.op[0], rhs, line)
                value = (_VAR, temp2)
            self.emit(
                "array_op",
                _vars(recv),
                _vars(recv, index, value),
                line,
                (recv, (_TXT, "["), index, (_TXT, "] = "), value),
                weak_def=True,
            )
        else:  # pragma: no cover - parser rejects other targets
            raise LoweringError("invalid assignment target", line)

    def lower_if(self, stmt: If) -> None:
        end_label = self.new_label()
        else_label = self.new_label() if stmt.else_body is not None else end_label
        branch = self.lower_branch(stmt.cond, else_label, stmt.line, jump_if_false=True)
        self.guard_stack.append(branch)
        self.lower_statement(stmt.then_body)
        if stmt.else_body is not None:
            self.emit_goto(end_label, stmt.line)
            self.guard_stack.pop()
            self.place_label(else_label, stmt.line)
            self.guard_stack.append(branch)
            self.lower_statement(stmt.else_body)
        self.guard_stack.pop()
        self.place_label(end_label, stmt.line)

    def lower_while(self, stmt: While) -> None:
        head = self.new_label()
        end = self.new_label()
        self.place_label(head, stmt.line)
        branch = self.lower_branch(stmt.cond, end, stmt.line, jump_if_false=True)
        self.guard_stack.append(branch)
        self.loop_stack.append((head, end))
        self.lower_statement(stmt.body)
        self.emit_goto(head, stmt.line)
        self.loop_stack.pop()
        self.guard_stack.pop()
        self.place_label(end, stmt.line)

    def lower_for(self, stmt: For) -> None:
        if stmt.init is not None:
            self.lower_statement(stmt.init)
        head = self.new_label()
        cont = self.new_label()
        end = self.new_label()
        self.place_label(head, stmt.line)
        branch: int | None = None
        if stmt.cond is not None:
            branch = self.lower_branch(stmt.cond, end, stmt.line, jump_if_false=True)
            self.guard_stack.append(branch)
        self.loop_stack.append((cont, end))
        self.lower_statement(stmt.body)
        self.place_label(cont, stmt.line)
        if stmt.update is not None:
            self.lower_statement(stmt.update)
        self.emit_goto(head, stmt.line)
        self.loop_stack.pop()
        if branch is not None:
            self.guard_stack.pop()
        self.place_label(end, stmt.line)

    def lower_return(self, stmt: Return) -> None:
        if stmt.value is None:
            self.emit("return", frozenset(), frozenset(), stmt.line, ((_TXT, "return"),))
        else:
            value = self.atom(stmt.value, stmt.line)
            self.emit(
                "return",
                frozenset(),
                _vars(value),
                stmt.line,
                ((_TXT, "return "), value),
            )

    def emit_goto(self, label: int, line: int) -> None:
        self.emit(
            "goto",
            frozenset(),
            frozenset(),
            line,
            ((_TXT, f"goto label{label}"),),
            jump_target=label,
        )

    def lower_branch(self, cond: object, target: int, line: int, jump_if_false: bool) -> int:
        """Emit the conditional branch for ``cond``; returns its index."""
        if isinstance(cond, Unary) and cond.op == "!":
            return self.lower_branch(cond.operand, target, line, not jump_if_false)
        if isinstance(cond, Binary) and cond.op in _COMPARISONS:
            left = self.atom(cond.left, line)
            right = self.atom(cond.right, line)
            op = _NEGATED[cond.op] if jump_if_false else cond.op
            return self.emit(
                "branch",
                frozenset(),
                _vars(left, right),
                line,
                ((_TXT, "if "), left, (_TXT, f" {op} "), right, (_TXT, f" goto label{target}")),
                jump_target=target,
            )
        value = self.atom(cond, line)
        op = "==" if jump_if_false else "!="
        return self.emit(
            "branch",
            frozenset(),
            _vars(value),
            line,
            ((_TXT, "if "), value, (_TXT, f" {op} 0 goto label{target}")),
            jump_target=target,
        )

    # expressions

    def lower_into(self, name: str, expr: object, line: int) -> None:
        """Lower ``expr`` so its final instruction defines ``name``."""
        self.scope.add(name)
        self._define(expr, line, name)

    def _define(self, expr: object, line: int, target: str | None) -> str:
        """Lower ``expr``; the final instruction defines ``target``.

        With ``target=None`` a fresh temporary is allocated when the
        defining instruction is emitted, after every subexpression, so
        temp numbering is strictly increasing in instruction order.
        """
        if isinstance(expr, (Literal, Name, Assign, Incr)):
            value = self.atom(expr, line)
            name = target if target is not None else self.new_temp()
            self.emit(
                "assign",
                frozenset({name}),
                _vars(value),
                line,
                ((_VAR, name), (_TXT, " = "), value),
            )
            return name
        if isinstance(expr, Binary):
            left = self.atom(expr.left, line)
            right = self.atom(expr.right, line)
            name = target if target is not None else self.new_temp()
            self.emit_binary(name, left, expr.op, right, line)
            return name
        if isinstance(expr, Unary):
            value = self.atom(expr.operand, line)
            name = target if target is not None else self.new_temp()
            self.emit(
                "unary",
                frozenset({name}),
                _vars(value),
                line,
                ((_VAR, name), (_TXT, f" = {expr.op}"), value),
            )
            return name
        if isinstance(expr, Call):
            name = self.lower_call(expr, line, target=target, as_value=True)
            assert name is not None
            return name
        if isinstance(expr, New):
            args = tuple(self.atom(a, line) for a in expr.args)
            name = target if target is not None else self.new_temp()
            self.emit(
                "invoke",
                frozenset({name}),
                _vars(*args),
                line,
                ((_VAR, name), (_TXT, f" = new {expr.type_text}("))
                + _join_atoms(args)
                + ((_TXT, ")"),),
            )
            return name
        if isinstance(expr, NewArray):
            size = self.atom(expr.size, line)
            name = target if target is not None else self.new_temp()
            self.emit(
                "invoke",
                frozenset({name}),
                _vars(size),
                line,
                ((_VAR, name), (_TXT, f" = newarray {expr.type_text}["), size, (_TXT, "]")),
            )
            return name
        if isinstance(expr, FieldAccess):
            return self.lower_field_read(expr, line, target=target)
        if isinstance(expr, ArrayAccess):
            recv = self.atom(expr.receiver, line)
            index = self.atom(expr.index, line)
            name = target if target is not None else self.new_temp()
            self.emit(
                "array_op",
                frozenset({name}),
                _vars(recv, index),
                line,
                ((_VAR, name), (_TXT, " = "), recv, (_TXT, "["), index, (_TXT, "]")),
            )
            return name
        raise LoweringError(  # pragma: no cover - parser produces no other nodes
            f"unsupported expression {type(expr).__name__}", line
        )

    def emit_binary(self, name: str, left: Atom, op: str, right: Atom, line: int) -> None:
        self.emit(
            "binary",
            frozenset({name}),
            _vars(left, right),
            line,
            ((_VAR, name), (_TXT, " = "), left, (_TXT, f" {op} "), right),
        )

    def atom(self, expr: object, line: int) -> Atom:
        """Reduce ``expr`` to a variable or literal operand."""
        if isinstance(expr, Literal):
            return (_TXT, expr.text)
        if isinstance(expr, Name):
            return (_VAR, expr.ident)
        if isinstance(expr, FieldAccess):
            qualifier = self.static_qualifier(expr)
            if qualifier is not None:
                return (_TXT, qualifier)
            return (_VAR, self.lower_field_read(expr, line))
        if isinstance(expr, (Assign, Incr)):
            # Embedded assignment, e.g. while ((line = next()) != null).
            if not isinstance(expr.target, Name):
                raise LoweringError(
                    "assignment expressions in value position must target a name", line
                )
            self.lower_expr_statement(expr, line)
            return (_VAR, expr.target.ident)
        return (_VAR, self._define(expr, line, None))

    def lower_call(
        self, call: Call, line: int, target: str | None, as_value: bool = False
    ) -> str | None:
        recv_atom: Atom | None = None
        if call.receiver is None:
            opcode = (_TXT, f"staticinvoke {call.name}(")
        else:
            qualifier = self.static_qualifier(call.receiver)
            if qualifier is not None:
                opcode = (_TXT, f"staticinvoke {qualifier}.{call.name}(")
            else:
                recv_atom = self.atom(call.receiver, line)
                opcode = (_TXT, f".{call.name}(")
        args = tuple(self.atom(a, line) for a in call.args)
        if target is None and as_value:
            target = self.new_temp()
        defs = frozenset({target}) if target is not None else frozenset()
        head: tuple[tuple[str, str], ...]
        head = ((_VAR, target), (_TXT, " = ")) if target is not None else ()
        uses = _vars(*args) if recv_atom is None else _vars(recv_atom, *args)
        if recv_atom is None:
            parts = head + (opcode,) + _join_atoms(args) + ((_TXT, ")"),)
        else:
            parts = (
                head
                + ((_TXT, "virtualinvoke "), recv_atom, opcode)
                + _join_atoms(args)
                + ((_TXT, ")"),)
            )
        self.emit("invoke", defs, uses, line, parts)
        return target

    def lower_field_read(self, expr: FieldAccess, line: int, target: str | None = None) -> str:
        """Emit a field read; ``arr.length`` lowers to ``lengthof``."""
        qualifier = self.static_qualifier(expr)
        if qualifier is not None:
            name = target if target is not None else self.new_temp()
            self.emit(
                "field_access",
                frozenset({name}),
                frozenset(),
                line,
                ((_VAR, name), (_TXT, f" = {qualifier}")),
            )
            return name
        recv = self.atom(expr.receiver, line)
        name = target if target is not None else self.new_temp()
        if expr.name == "length":
            self.emit(
                "unary",
                frozenset({name}),
                _vars(recv),
                line,
                ((_VAR, name), (_TXT, " = lengthof "), recv),
            )
        else:
            self.emit(
                "field_access",
                frozenset({name}),
                _vars(recv),
                line,
                ((_VAR, name), (_TXT, " = "), recv, (_TXT, f".{expr.name}")),
            )
        return name

    def lower_field_store(self, target: FieldAccess, value: Atom, line: int) -> None:
        qualifier = self.static_qualifier(target)
        if qualifier is not None:
            self.emit(
                "field_access",
                frozenset(),
                _vars(value),
                line,
                ((_TXT, f"{qualifier} = "), value),
            )
            return
        recv = self.atom(target.receiver, line)
        self.emit(
            "field_access",
            _vars(recv),
            _vars(recv, value),
            line,
            (recv, (_TXT, f".{target.name} = "), value),
            weak_def=True,
        )

    def static_qualifier(self, expr: object) -> str | None:
        """Dotted-name text when the chain roots at a name outside scope.

        ``System.out`` or ``Integer`` style receivers denote classes, not
        values flowing through the function, so they render verbatim and
        contribute no uses.
        """
        names: list[str] = []
        node = expr
        while isinstance(node, FieldAccess):
            names.append(node.name)
            node = node.receiver
        if not isinstance(node, Name) or node.ident in self.scope:
            return None
        names.append(node.ident)
        return ".".join(reversed(names))


def _declared_locals(block: Block | None) -> set[str]:
    out: set[str] = set()

    def walk(stmt: object) -> None:
        if isinstance(stmt, Block):
            for s in stmt.statements:
                walk(s)
        elif isinstance(stmt, LocalDecl):
            out.update(name for name, _ in stmt.declarators)
        elif isinstance(stmt, If):
            walk(stmt.then_body)
            if stmt.else_body is not None:
                walk(stmt.else_body)
        elif isinstance(stmt, While):
            walk(stmt.body)
        elif isinstance(stmt, For):
            if stmt.init is not None:
                walk(stmt.init)
            walk(stmt.body)

    if block is not None:
        walk(block)
    return out


def _render(fn: IrFunction) -> None:
    rename: dict[str, str] = {}
    for ins in fn.instructions:
        for name in sorted(ins.defs):
            if name.startswith("$") or name == "this" or name in rename:
                continue
            rename[name] = f"v{len(rename)}"
    for ins in fn.instructions:
        pieces: list[str] = []
        for tag, text in ins.parts:
            if tag == _VAR:
                pieces.append(rename.get(text, text))
            else:
                pieces.append(text)
        ins.render = "".join(pieces)
    fn.rename_map = rename


def _join_atoms(atoms: tuple[Atom, ...]) -> tuple[tuple[str, str], ...]:
    parts: list[tuple[str, str]] = []
    for i, atom in enumerate(atoms):
        if i:
            parts.append((_TXT, ", "))
        parts.append(atom)
    return tuple(parts)


def lower_method(method: MethodDecl, unit: SourceUnit | None = None) -> IrFunction:
    """Lower one method of ``unit`` (field names inform scope tracking)."""
    field_names = frozenset(f.name for f in unit.fields) if unit is not None else frozenset()
    return _Lowerer(method, field_names).lower()


def lower_unit(unit: SourceUnit) -> dict[str, IrFunction]:
    """Lower every method with a body; keyed by method name.

    Overloads collapse to the last occurrence, which is acceptable for
    context extraction because same-named methods are concatenated at a
    higher level before this map is consulted.
    """
    out: dict[str, IrFunction] = {}
    for method in unit.methods:
        if method.body is None:
            continue
        out[method.name] = lower_method(method, unit)
    return out


__all__ = [
    "IrFunction",
    "IrInstruction",
    "LoweringError",
    "ParseError",
    "lower_method",
    "lower_unit",
]
