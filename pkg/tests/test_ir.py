import re
from pathlib import Path

import pytest

from warnsift.code.ir import lower_method, lower_unit
from warnsift.code.javaparse import parse_java

FIXTURE = Path(__file__).parent / "fixtures" / "RequestSender.java"


def _lower(source: str, index: int = 0):
    unit = parse_java(source)
    return lower_method(unit.methods[index], unit)


@pytest.fixture(scope="module")
def sender():
    unit = parse_java(FIXTURE.read_text())
    return lower_method(unit.methods[0], unit)


class TestHeaderLowering:
    def test_parameters_enter_through_identity_instructions(self, sender):
        first, second = sender.instructions[:2]
        assert first.render == "v0 := @parameter0"
        assert second.render == "v1 := @parameter1"
        assert first.defs == {"connection"} and first.uses == frozenset()

    def test_single_def_per_instruction(self, sender):
        assert all(len(ins.defs) <= 1 for ins in sender.instructions)


class TestExpressionDecomposition:
    def test_nested_call_spreads_over_four_instructions(self, sender):
        window = [ins for ins in sender.instructions if ins.source_line == 5]
        assert len(window) == 4
        a, b, c, d = window
        assert re.fullmatch(r"\$stack\d+ = virtualinvoke v1\.getBytes\(\)", a.render)
        assert re.fullmatch(r"\$stack\d+ = lengthof \$stack\d+", b.render)
        assert re.fullmatch(r"\$stack\d+ = staticinvoke Integer\.toString\(\$stack\d+\)", c.render)
        assert re.fullmatch(
            r"virtualinvoke v0\.setRequestProperty\(contentLengthHeader, \$stack\d+\)",
            d.render,
        )
        assert d.defs == frozenset()

    def test_temp_numbering_strictly_increases(self, sender):
        numbers = []
        for ins in sender.instructions:
            for name in ins.defs:
                if name.startswith("$stack"):
                    numbers.append(int(name.removeprefix("$stack")))
        assert numbers == sorted(numbers)
        assert len(numbers) == len(set(numbers))

    def test_each_temp_defined_before_use(self, sender):
        defined = set()
        for ins in sender.instructions:
            for used in ins.uses:
                if used.startswith("$stack"):
                    assert used in defined
            defined |= ins.defs


class TestControlFlow:
    def test_if_negates_comparison(self):
        fn = _lower("class A { int f(int x) { int r = 0; if (x >= 400) { r = 1; } return r; } }")
        branches = [ins for ins in fn.instructions if ins.kind == "branch"]
        assert len(branches) == 1
        assert branches[0].render == "if v0 < 400 goto label0"

    def test_guarded_instructions_point_at_their_branch(self):
        fn = _lower(
            "class A { int f(int x) { int r = 0; if (x > 1) { if (x > 2) { r = 2; } } return r; } }"
        )
        branches = [ins.index for ins in fn.instructions if ins.kind == "branch"]
        inner_assign = next(ins for ins in fn.instructions if ins.render == "v1 = 2")
        assert inner_assign.control_parent == branches[1]
        assert fn.instructions[branches[1]].control_parent == branches[0]

    def test_while_shape(self):
        fn = _lower("class A { int f(int x) { while (x < 10) { x = x + 1; } return x; } }")
        kinds = [ins.kind for ins in fn.instructions]
        assert kinds == ["assign", "label", "branch", "binary", "goto", "label", "return"]
        goto = fn.instructions[4]
        assert fn.label_positions[goto.jump_target] == 1
        assert goto.control_parent == 2

    def test_for_desugars_to_while_shape(self):
        fn = _lower(
            "class A { int f(int n) { int s = 0; for (int i = 0; i < n; i++) { s += i; } return s; } }"
        )
        renders = [ins.render for ins in fn.instructions]
        assert "v2 = 0" in renders  # loop induction variable
        assert any(r.startswith("if v2 >= v0 goto") for r in renders)
        assert "v2 = v2 + 1" in renders

    def test_break_and_continue_become_gotos(self):
        fn = _lower(
            """
class A {
    int f(int x) {
        while (x < 50) {
            x = x + 1;
            if (x == 7) { continue; }
            if (x == 9) { break; }
        }
        return x;
    }
}
"""
        )
        gotos = [ins for ins in fn.instructions if ins.kind == "goto"]
        targets = {fn.label_positions[g.jump_target] for g in gotos}
        head = next(ins.index for ins in fn.instructions if ins.kind == "label")
        assert head in targets  # continue and the loop-back edge
        end = max(fn.label_positions.values())
        assert end in targets  # break

    def test_empty_for_condition_loops_unconditionally(self):
        fn = _lower("class A { void f(int x) { for (;;) { x = x + 1; } } }")
        assert not any(ins.kind == "branch" for ins in fn.instructions)
        assert any(ins.kind == "goto" for ins in fn.instructions)


class TestMemoryTraffic:
    def test_field_store_is_weak_def_of_receiver(self):
        fn = _lower("class A { int n; void f(int v) { this.n = v; } }")
        store = fn.instructions[-1]
        assert store.kind == "field_access"
        assert store.render == "this.n = v0"
        assert store.defs == {"this"} and store.weak_def
        assert store.uses == {"this", "v"}

    def test_field_read_uses_receiver(self):
        fn = _lower("class A { int n; int f() { return this.n; } }")
        read = fn.instructions[0]
        assert read.render == "$stack0 = this.n"
        assert read.uses == {"this"}

    def test_array_store_does_not_kill(self):
        fn = _lower(
            "class A { int f(int i) { int[] d = new int[4]; d[i] = 1; d[0] = 2; return d[i]; } }"
        )
        stores = [ins for ins in fn.instructions if ins.kind == "array_op" and ins.weak_def]
        assert len(stores) == 2
        assert all(ins.defs == {"d"} for ins in stores)

    def test_static_qualifiers_contribute_no_uses(self):
        fn = _lower("class A { void f(int x) { System.out.println(x); } }")
        call = fn.instructions[-1]
        assert call.render == "staticinvoke System.out.println(v0)"
        assert call.uses == {"x"}

    def test_compound_assignment_reads_then_writes(self):
        fn = _lower("class A { void f(int x) { x += 3; } }")
        update = fn.instructions[-1]
        assert update.render == "v0 = v0 + 3"
        assert update.defs == {"x"} and update.uses == {"x"}


class TestRenderingCanonicalization:
    def test_locals_renamed_in_first_definition_order(self):
        fn = _lower("class A { int f(int b, int a) { int z = a; int y = b; return z; } }")
        assert fn.rename_map == {"b": "v0", "a": "v1", "z": "v2", "y": "v3"}

    def test_render_is_deterministic(self):
        source = FIXTURE.read_text()
        first = _lower(source).render_text()
        second = _lower(source).render_text()
        assert first == second

    def test_lower_unit_covers_every_method_with_a_body(self):
        unit = parse_java(
            "class A { abstract int g(); int f() { return 1; } void h() { f(); } }"
        )
        lowered = lower_unit(unit)
        assert set(lowered) == {"f", "h"}
