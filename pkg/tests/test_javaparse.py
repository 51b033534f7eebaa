from pathlib import Path

import pytest

from warnsift.code.javaparse import (
    Assign,
    Binary,
    Call,
    FieldAccess,
    If,
    LocalDecl,
    Name,
    ParseError,
    Return,
    While,
    parse_java,
)

FIXTURE = Path(__file__).parent / "fixtures" / "RequestSender.java"


@pytest.fixture(scope="module")
def unit():
    return parse_java(FIXTURE.read_text())


def test_class_and_member_inventory(unit):
    assert unit.class_name == "RequestSender"
    assert [f.name for f in unit.fields] == ["contentLengthHeader"]
    assert [m.name for m in unit.methods] == ["sendRequest"]


def test_field_capture(unit):
    field = unit.fields[0]
    assert field.modifiers == ("private", "static")
    assert field.type_text == "String"
    assert field.init_text == '"Content-Length"'
    assert field.line_start == field.line_end == 2
    assert field.text == 'private static String contentLengthHeader = "Content-Length";'


def test_method_span_and_signature(unit):
    method = unit.methods[0]
    assert method.param_types == ("HttpURLConnection", "String")
    assert method.param_names == ("connection", "data")
    assert (method.line_start, method.line_end) == (3, 21)
    assert method.text.startswith("public String sendRequest")
    assert method.text.endswith("}")
    assert "return body + tail;" in method.text


def test_statement_shapes(unit):
    body = unit.methods[0].body.statements
    assert isinstance(body[0], type(body[1]))  # two expression statements
    decl = body[2]
    assert isinstance(decl, LocalDecl)
    assert decl.type_text == "OutputStream"
    assert decl.declarators[0][0] == "out"
    guard = body[6]
    assert isinstance(guard, If)
    assert isinstance(guard.cond, Binary) and guard.cond.op == ">="


def test_nested_call_structure():
    unit = parse_java(
        "class A { void f(String s) { g(s.trim().length()); } }"
    )
    stmt = unit.methods[0].body.statements[0]
    outer = stmt.expr
    assert isinstance(outer, Call) and outer.receiver is None
    inner = outer.args[0]
    assert isinstance(inner, Call) and inner.name == "length"
    assert isinstance(inner.receiver, Call) and inner.receiver.name == "trim"


def test_control_statements_parse():
    unit = parse_java(
        """
class A {
    int f(int n) {
        int total = 0;
        for (int i = 0; i < n; i++) {
            if (i % 2 == 0) { continue; }
            total += i;
        }
        while (total > 100) { total = total - 10; }
        return total;
    }
}
"""
    )
    statements = unit.methods[0].body.statements
    assert isinstance(statements[2], While)
    assert isinstance(statements[3], Return)


def test_embedded_assignment_in_condition():
    unit = parse_java(
        "class A { void f(Reader r) { String s; while ((s = r.readLine()) != null) { use(s); } } }"
    )
    loop = unit.methods[0].body.statements[1]
    assert isinstance(loop, While)
    assert isinstance(loop.cond, Binary)
    assert isinstance(loop.cond.left, Assign)


def test_multi_declarator_fields():
    unit = parse_java("class A { int x = 1, y; }")
    assert [(f.name, f.init_text) for f in unit.fields] == [("x", "1"), ("y", None)]
    assert unit.fields[0].text == unit.fields[1].text


def test_constructor_is_recognized(unit=None):
    parsed = parse_java("class A { A(int x) { this.x = x; } int x; }")
    ctor = parsed.methods[0]
    assert ctor.is_constructor
    assert ctor.name == "A"


def test_annotations_and_comments_are_skipped():
    unit = parse_java(
        """
package com.example;
import java.util.List;

// top comment
@SuppressWarnings("all")
public class A {
    /* block
       comment */
    @Override
    public int f() { return 1; } // trailing
}
"""
    )
    assert unit.class_name == "A"
    assert unit.methods[0].name == "f"


@pytest.mark.parametrize(
    "source,fragment",
    [
        ("class A { class B {} }", "nested"),
        ("interface A { }", "interface"),
        ("class A { List<String> xs; }", "generic"),
        ("class A { void f() { try { g(); } catch (Exception e) {} } }", "try"),
        ("class A { void f() { switch (1) {} } }", "switch"),
        ("class A { static { init(); } }", "initializer"),
    ],
)
def test_out_of_subset_constructs_raise(source, fragment):
    with pytest.raises(ParseError) as exc:
        parse_java(source)
    assert fragment in str(exc.value)
    assert exc.value.line >= 1


def test_parse_error_carries_line_number():
    source = "class A {\n  void f() {\n    int x = ;\n  }\n}"
    with pytest.raises(ParseError) as exc:
        parse_java(source)
    assert exc.value.line == 3
