"""Recursive-descent parser for the Java subset used in warning contexts.

The parser accepts a single top-level class containing field and method
declarations.  Method bodies support local declarations, assignments
(including compound operators and increments), calls, object/array
creation, field and array access, ``if``/``else``, ``while``, ``for``,
``break``, ``continue`` and ``return``.  Constructs outside that subset
(nested types, generics, lambdas, try/catch, switch) raise
:class:`ParseError` carrying the offending line number.

Method and field source text is retained verbatim so downstream
consumers can feed the original characters to the tokenizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field


MODIFIERS = frozenset(
    {
        "public",
        "private",
        "protected",
        "static",
        "final",
        "abstract",
        "synchronized",
        "native",
        "transient",
        "volatile",
        "strictfp",
    }
)

PRIMITIVES = frozenset(
    {"boolean", "byte", "char", "short", "int", "long", "float", "double", "void"}
)

# Longest first so the lexer is greedy.
_MULTI_OPS = (
    "&&",
    "||",
    "==",
    "!=",
    "<=",
    ">=",
    "++",
    "--",
    "+=",
    "-=",
    "*=",
    "/=",
    "%=",
)

_SINGLE_OPS = set("+-*/%!<>=(){}[];,.@?:&|~")


class ParseError(ValueError):
    """Source construct outside the supported subset."""

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | char | punct | eof
    value: str
    line: int
    offset: int  # character offset of the token start in the source


def _lex(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            i = n if j < 0 else j
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                raise ParseError("unterminated block comment", line)
            line += source.count("\n", i, j)
            i = j + 2
            continue
        if ch == '"' or ch == "'":
            quote = ch
            j = i + 1
            while j < n:
                if source[j] == "\\":
                    j += 2
                    continue
                if source[j] == quote:
                    break
                if source[j] == "\n":
                    raise ParseError("unterminated literal", line)
                j += 1
            if j >= n:
                raise ParseError("unterminated literal", line)
            kind = "string" if quote == '"' else "char"
            tokens.append(Token(kind, source[i : j + 1], line, i))
            i = j + 1
            continue
        if ch.isdigit():
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] in "._xX"):
                # Accepts ints, floats, hex and suffixed literals in one run.
                j += 1
            tokens.append(Token("number", source[i:j], line, i))
            i = j
            continue
        if ch.isalpha() or ch in "_$":
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] in "_$"):
                j += 1
            tokens.append(Token("ident", source[i:j], line, i))
            i = j
            continue
        matched = False
        for op in _MULTI_OPS:
            if source.startswith(op, i):
                tokens.append(Token("punct", op, line, i))
                i += len(op)
                matched = True
                break
        if matched:
            continue
        if ch in _SINGLE_OPS:
            tokens.append(Token("punct", ch, line, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line)
    tokens.append(Token("eof", "", line, n))
    return tokens


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class FieldAccess:
    receiver: object
    name: str


@dataclass(frozen=True)
class ArrayAccess:
    receiver: object
    index: object


@dataclass(frozen=True)
class Call:
    receiver: object | None  # None means unqualified call
    name: str
    args: tuple


@dataclass(frozen=True)
class New:
    type_text: str
    args: tuple


@dataclass(frozen=True)
class NewArray:
    type_text: str
    size: object


@dataclass(frozen=True)
class Unary:
    op: str
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Assign:
    target: object
    op: str  # "=", "+=", "-=", "*=", "/=", "%="
    value: object


@dataclass(frozen=True)
class Incr:
    target: object
    op: str  # "++" or "--"


# Statements


@dataclass(frozen=True)
class Block:
    statements: tuple


@dataclass(frozen=True)
class LocalDecl:
    type_text: str
    declarators: tuple  # of (name, init expression or None)
    line: int


@dataclass(frozen=True)
class ExprStmt:
    expr: object
    line: int


@dataclass(frozen=True)
class If:
    cond: object
    then_body: object
    else_body: object | None
    line: int


@dataclass(frozen=True)
class While:
    cond: object
    body: object
    line: int


@dataclass(frozen=True)
class For:
    init: object | None
    cond: object | None
    update: object | None
    body: object
    line: int


@dataclass(frozen=True)
class Return:
    value: object | None
    line: int


@dataclass(frozen=True)
class Break:
    line: int


@dataclass(frozen=True)
class Continue:
    line: int


# Declarations


@dataclass(frozen=True)
class FieldDecl:
    modifiers: tuple[str, ...]
    type_text: str
    name: str
    init_text: str | None
    text: str
    line_start: int
    line_end: int


@dataclass(frozen=True)
class MethodDecl:
    name: str
    param_types: tuple[str, ...]
    param_names: tuple[str, ...]
    body: Block | None
    text: str
    line_start: int
    line_end: int
    is_constructor: bool = False


@dataclass(frozen=True)
class SourceUnit:
    class_name: str
    fields: tuple[FieldDecl, ...]
    methods: tuple[MethodDecl, ...]
    source_text: str


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, source: str) -> None:
        self.source = source
        self.tokens = _lex(source)
        self.pos = 0

    # token helpers

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, value: str) -> bool:
        return self.peek().value == value and self.peek().kind in ("punct", "ident")

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.advance()
            return True
        return False

    def expect(self, value: str) -> Token:
        tok = self.peek()
        if tok.value != value:
            raise ParseError(f"expected {value!r}, found {tok.value!r}", tok.line)
        return self.advance()

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise ParseError(f"expected identifier, found {tok.value!r}", tok.line)
        return self.advance()

    def text_between(self, start: Token, end: Token) -> str:
        return self.source[start.offset : end.offset + len(end.value)]

    # top level

    def parse_unit(self) -> SourceUnit:
        self._skip_header()
        self._skip_annotations()
        while self.peek().kind == "ident" and self.peek().value in MODIFIERS:
            self.advance()
        kw = self.peek()
        if kw.value in ("interface", "enum"):
            raise ParseError(f"{kw.value} declarations are not supported", kw.line)
        self.expect("class")
        name = self.expect_ident().value
        if self.at("<"):
            raise ParseError("generic type parameters are not supported", self.peek().line)
        while not self.at("{"):
            tok = self.advance()
            if tok.kind == "eof":
                raise ParseError("missing class body", tok.line)
        self.expect("{")
        fields: list[FieldDecl] = []
        methods: list[MethodDecl] = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise ParseError("unterminated class body", self.peek().line)
            self._parse_member(name, fields, methods)
        self.expect("}")
        return SourceUnit(
            class_name=name,
            fields=tuple(fields),
            methods=tuple(methods),
            source_text=self.source,
        )

    def _skip_header(self) -> None:
        while self.at("package") or self.at("import"):
            while not self.accept(";"):
                if self.peek().kind == "eof":
                    raise ParseError("unterminated header clause", self.peek().line)
                self.advance()

    def _skip_annotations(self) -> None:
        while self.at("@"):
            self.advance()
            self.expect_ident()
            if self.at("("):
                self._skip_balanced("(", ")")

    def _skip_balanced(self, open_tok: str, close_tok: str) -> None:
        line = self.peek().line
        self.expect(open_tok)
        depth = 1
        while depth:
            tok = self.advance()
            if tok.kind == "eof":
                raise ParseError(f"unbalanced {open_tok!r}", line)
            if tok.value == open_tok:
                depth += 1
            elif tok.value == close_tok:
                depth -= 1

    # members

    def _parse_member(
        self,
        class_name: str,
        fields: list[FieldDecl],
        methods: list[MethodDecl],
    ) -> None:
        self._skip_annotations()
        start = self.peek()
        modifiers: list[str] = []
        while self.peek().kind == "ident" and self.peek().value in MODIFIERS:
            modifiers.append(self.advance().value)
        tok = self.peek()
        if tok.value in ("class", "interface", "enum"):
            raise ParseError(f"nested {tok.value} declarations are not supported", tok.line)
        if tok.value == "{":
            raise ParseError("initializer blocks are not supported", tok.line)
        first = self.expect_ident()
        if first.value == class_name and self.at("("):
            methods.append(self._parse_method(start, first.value, is_constructor=True))
            return
        type_text = self._finish_type(first)
        name_tok = self.expect_ident()
        if self.at("("):
            methods.append(self._parse_method(start, name_tok.value))
            return
        self._parse_field(start, modifiers, type_text, name_tok, fields)

    def _finish_type(self, first: Token) -> str:
        parts = [first.value]
        while self.at(".") and self.peek(1).kind == "ident":
            self.advance()
            parts.append("." + self.expect_ident().value)
        if self.at("<"):
            raise ParseError("generic types are not supported", self.peek().line)
        while self.at("[") and self.peek(1).value == "]":
            self.advance()
            self.advance()
            parts.append("[]")
        return "".join(parts)

    def _parse_field(
        self,
        start: Token,
        modifiers: list[str],
        type_text: str,
        name_tok: Token,
        fields: list[FieldDecl],
    ) -> None:
        # Comma-separated declarators share modifiers and type but each
        # yields its own FieldDecl with the full statement text.
        declarators: list[tuple[str, str | None]] = []
        name = name_tok.value
        while True:
            init_text: str | None = None
            if self.accept("="):
                expr_start = self.peek()
                self._parse_expression()
                prev = self.tokens[self.pos - 1]
                init_text = self.text_between(expr_start, prev)
            declarators.append((name, init_text))
            if self.accept(","):
                name = self.expect_ident().value
                continue
            break
        end = self.expect(";")
        text = self.text_between(start, end)
        for decl_name, init_text in declarators:
            fields.append(
                FieldDecl(
                    modifiers=tuple(modifiers),
                    type_text=type_text,
                    name=decl_name,
                    init_text=init_text,
                    text=text,
                    line_start=start.line,
                    line_end=end.line,
                )
            )

    def _parse_method(self, start: Token, name: str, is_constructor: bool = False) -> MethodDecl:
        self.expect("(")
        param_types: list[str] = []
        param_names: list[str] = []
        if not self.at(")"):
            while True:
                self.accept("final")
                first = self.expect_ident()
                param_types.append(self._finish_type(first))
                param_names.append(self.expect_ident().value)
                if not self.accept(","):
                    break
        self.expect(")")
        if self.accept("throws"):
            self.expect_ident()
            while self.accept(","):
                self.expect_ident()
        if self.accept(";"):
            end = self.tokens[self.pos - 1]
            body: Block | None = None
        else:
            body = self._parse_block()
            end = self.tokens[self.pos - 1]
        return MethodDecl(
            name=name,
            param_types=tuple(param_types),
            param_names=tuple(param_names),
            body=body,
            text=self.text_between(start, end),
            line_start=start.line,
            line_end=end.line,
            is_constructor=is_constructor,
        )

    # statements

    def _parse_block(self) -> Block:
        self.expect("{")
        statements: list[object] = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise ParseError("unterminated block", self.peek().line)
            statements.append(self._parse_statement())
        self.expect("}")
        return Block(tuple(statements))

    _UNSUPPORTED_STATEMENTS = frozenset(
        {"try", "switch", "do", "throw", "synchronized", "assert"}
    )

    def _parse_statement(self) -> object:
        tok = self.peek()
        if tok.value == "{":
            return self._parse_block()
        if tok.value in self._UNSUPPORTED_STATEMENTS:
            raise ParseError(f"{tok.value} statements are not supported", tok.line)
        if tok.value == "if":
            return self._parse_if()
        if tok.value == "while":
            return self._parse_while()
        if tok.value == "for":
            return self._parse_for()
        if tok.value == "return":
            self.advance()
            value = None if self.at(";") else self._parse_expression()
            self.expect(";")
            return Return(value, tok.line)
        if tok.value == "break":
            self.advance()
            self.expect(";")
            return Break(tok.line)
        if tok.value == "continue":
            self.advance()
            self.expect(";")
            return Continue(tok.line)
        if tok.value == ";":
            self.advance()
            return Block(())
        if self._looks_like_decl():
            decl = self._parse_local_decl()
            self.expect(";")
            return decl
        expr = self._parse_expression()
        self.expect(";")
        return ExprStmt(expr, tok.line)

    def _looks_like_decl(self) -> bool:
        i = self.pos
        toks = self.tokens
        if toks[i].value == "final":
            i += 1
        if toks[i].kind != "ident" or toks[i].value in MODIFIERS:
            return False
        i += 1
        while toks[i].value == "." and toks[i + 1].kind == "ident":
            i += 2
        while toks[i].value == "[" and toks[i + 1].value == "]":
            i += 2
        if toks[i].kind != "ident":
            return False
        return toks[i + 1].value in ("=", ";", ",")

    def _parse_local_decl(self) -> LocalDecl:
        line = self.peek().line
        self.accept("final")
        first = self.expect_ident()
        type_text = self._finish_type(first)
        declarators: list[tuple[str, object | None]] = []
        while True:
            name = self.expect_ident().value
            init = self._parse_expression() if self.accept("=") else None
            declarators.append((name, init))
            if not self.accept(","):
                break
        return LocalDecl(type_text, tuple(declarators), line)

    def _parse_if(self) -> If:
        line = self.expect("if").line
        self.expect("(")
        cond = self._parse_expression()
        self.expect(")")
        then_body = self._parse_statement()
        else_body = self._parse_statement() if self.accept("else") else None
        return If(cond, then_body, else_body, line)

    def _parse_while(self) -> While:
        line = self.expect("while").line
        self.expect("(")
        cond = self._parse_expression()
        self.expect(")")
        return While(cond, self._parse_statement(), line)

    def _parse_for(self) -> For:
        line = self.expect("for").line
        self.expect("(")
        if self.at(";"):
            init: object | None = None
            self.advance()
        elif self._looks_like_decl():
            init = self._parse_local_decl()
            self.expect(";")
        else:
            init = ExprStmt(self._parse_expression(), self.peek().line)
            self.expect(";")
        cond = None if self.at(";") else self._parse_expression()
        self.expect(";")
        update = None if self.at(")") else ExprStmt(self._parse_expression(), self.peek().line)
        self.expect(")")
        return For(init, cond, update, self._parse_statement(), line)

    # expressions, by descending precedence

    def _parse_expression(self) -> object:
        return self._parse_assignment()

    _ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=")

    def _parse_assignment(self) -> object:
        left = self._parse_or()
        tok = self.peek()
        if tok.kind == "punct" and tok.value in self._ASSIGN_OPS:
            if not isinstance(left, (Name, FieldAccess, ArrayAccess)):
                raise ParseError("invalid assignment target", tok.line)
            self.advance()
            return Assign(left, tok.value, self._parse_assignment())
        return left

    def _parse_or(self) -> object:
        left = self._parse_and()
        while self.at("||"):
            self.advance()
            left = Binary("||", left, self._parse_and())
        return left

    def _parse_and(self) -> object:
        left = self._parse_equality()
        while self.at("&&"):
            self.advance()
            left = Binary("&&", left, self._parse_equality())
        return left

    def _parse_equality(self) -> object:
        left = self._parse_relational()
        while self.peek().value in ("==", "!="):
            op = self.advance().value
            left = Binary(op, left, self._parse_relational())
        return left

    def _parse_relational(self) -> object:
        left = self._parse_additive()
        while self.peek().value in ("<", ">", "<=", ">="):
            op = self.advance().value
            left = Binary(op, left, self._parse_additive())
        return left

    def _parse_additive(self) -> object:
        left = self._parse_multiplicative()
        while self.peek().value in ("+", "-"):
            op = self.advance().value
            left = Binary(op, left, self._parse_multiplicative())
        return left

    def _parse_multiplicative(self) -> object:
        left = self._parse_unary()
        while self.peek().value in ("*", "/", "%"):
            op = self.advance().value
            left = Binary(op, left, self._parse_unary())
        return left

    def _parse_unary(self) -> object:
        tok = self.peek()
        if tok.value in ("-", "!", "+"):
            self.advance()
            operand = self._parse_unary()
            if tok.value == "+":
                return operand
            return Unary(tok.value, operand)
        if tok.value in ("++", "--"):
            self.advance()
            target = self._parse_unary()
            if not isinstance(target, (Name, FieldAccess, ArrayAccess)):
                raise ParseError("invalid increment target", tok.line)
            return Incr(target, tok.value)
        return self._parse_postfix()

    def _parse_postfix(self) -> object:
        expr = self._parse_primary()
        while True:
            tok = self.peek()
            if tok.value == "." and self.peek(1).kind == "ident":
                self.advance()
                name = self.expect_ident().value
                if self.at("("):
                    expr = Call(expr, name, self._parse_args())
                else:
                    expr = FieldAccess(expr, name)
                continue
            if tok.value == "[":
                self.advance()
                index = self._parse_expression()
                self.expect("]")
                expr = ArrayAccess(expr, index)
                continue
            if tok.value in ("++", "--"):
                self.advance()
                if not isinstance(expr, (Name, FieldAccess, ArrayAccess)):
                    raise ParseError("invalid increment target", tok.line)
                return Incr(expr, tok.value)
            return expr

    def _parse_args(self) -> tuple:
        self.expect("(")
        args: list[object] = []
        if not self.at(")"):
            while True:
                args.append(self._parse_expression())
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(args)

    def _parse_primary(self) -> object:
        tok = self.peek()
        if tok.value == "(":
            self.advance()
            expr = self._parse_expression()
            self.expect(")")
            return expr
        if tok.kind in ("number", "string", "char"):
            self.advance()
            return Literal(tok.value)
        if tok.value == "new":
            self.advance()
            first = self.expect_ident()
            type_text = first.value
            while self.at(".") and self.peek(1).kind == "ident":
                self.advance()
                type_text += "." + self.expect_ident().value
            if self.at("<"):
                raise ParseError("generic types are not supported", self.peek().line)
            if self.at("["):
                self.advance()
                size = self._parse_expression()
                self.expect("]")
                return NewArray(type_text, size)
            return New(type_text, self._parse_args())
        if tok.kind == "ident":
            if tok.value in ("true", "false", "null"):
                self.advance()
                return Literal(tok.value)
            self.advance()
            if self.at("("):
                return Call(None, tok.value, self._parse_args())
            return Name(tok.value)
        raise ParseError(f"unexpected token {tok.value!r}", tok.line)


def parse_java(source: str) -> SourceUnit:
    """Parse one top-level class into a :class:`SourceUnit`.

    Raises :class:`ParseError` with the offending line for any construct
    outside the supported subset.
    """
    return _Parser(source).parse_unit()
