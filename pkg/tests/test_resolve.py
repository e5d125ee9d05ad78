import pytest
from numpy.testing import assert_equal

from filament.diagnostics import ErrorCode, ResolutionError
from filament.event_algebra import EventExpr
from filament.parser import parse
from filament.resolve import resolve

HEADER = ("comp main<G: 1>(@interface[G] go: 1, @[G, G+1] l: 32, @[G, G+1] r: 32) "
          "-> (@[G, G+1] out: 32)")


def codes_of(text, **kwargs):
    with pytest.raises(ResolutionError) as info:
        resolve(parse(text), **kwargs)
    return [d.code for d in info.value.diagnostics]


def body(*lines):
    return HEADER + " {\n" + "\n".join("  " + line for line in lines) + "\n}\n"


def test_resolve_twice(load_corpus):
    resolved = load_corpus("twice")
    assert_equal(resolved.entry, "main")
    # callees come before their callers
    assert_equal(resolved.order[-1], "main")
    assert_equal(sorted(resolved.order), ["Add", "Reg", "main"])
    assert_equal(resolved.user_components, ("main",))
    assert_equal([c.name for c in resolved.program.components][0], "main")

    scope = resolved.scope("main")
    assert_equal(sorted(scope.instances), ["A", "R0", "R1"])
    assert_equal(list(scope.invocations), ["a0", "r0", "r1", "a1"])
    assert_equal(scope.invocation_callee("a1").name, "Add")
    assert_equal(scope.binding("r1"), {"G": EventExpr("G", 1)})
    assert_equal([inv.name for inv in scope.invocations_of("A")], ["a0", "a1"])


def test_only_used_externs_are_included(load_corpus):
    resolved = load_corpus("alu")
    assert "Add" in resolved.scopes
    assert "Mult" not in resolved.scopes
    assert "Init" not in resolved.scopes


def test_instance_params(load_corpus):
    scope = load_corpus("systolic").scope("main")
    name = next(name for name, inst in scope.instances.items() if inst.component == "Prev")
    assert_equal(scope.instance_params(name), {"WIDTH": 32, "SAFE": 1})


def test_program_externs_take_precedence():
    text = ("extern comp Add<G: 2>(@interface[G] go: 1, @[G, G+1] left: 32, "
            "@[G, G+1] right: 32) -> (@[G+1, G+2] out: 32);\n" +
            body("A := new Add;", "a0 := A<G>(l, r);", "out = a0.out;"))
    resolved = resolve(parse(text))
    assert_equal(resolved.signature("Add").events[0].delay.value, 2)


def test_entry_selection():
    text = ("comp first<G: 1>(@interface[G] go: 1) -> () {\n}\n"
            "comp second<G: 1>(@interface[G] go: 1) -> () {\n}\n")
    assert_equal(resolve(parse(text)).entry, "second")
    assert_equal(resolve(parse(text), entry="first").entry, "first")
    assert_equal(codes_of(text, entry="third"), [ErrorCode.UnboundName])


def test_unknown_component_suggestion():
    text = body("M := new Mutl;", "out = l;")
    with pytest.raises(ResolutionError) as info:
        resolve(parse(text))
    diagnostic = info.value.diagnostics[0]
    assert_equal(diagnostic.code, ErrorCode.UnboundName)
    assert_equal(diagnostic.notes, ("did you mean `Mult`?",))


@pytest.mark.parametrize("lines, code", [
    (("A := new Add;", "A := new Add;", "out = l;"), ErrorCode.DuplicateName),
    (("a0 := A<G>(l, r);", "out = l;"), ErrorCode.UnboundName),
    (("A := new Add;", "a0 := A<G>(l);", "out = a0.out;"), ErrorCode.ArityMismatch),
    (("A := new Add;", "a0 := A<G, G>(l, r);", "out = a0.out;"), ErrorCode.ArityMismatch),
    (("A := new Add;", "a0 := A<T>(l, r);", "out = a0.out;"), ErrorCode.UnboundName),
    (("A := new Add;", "a0 := A<G>(l, r);", "out = a0.left;"), ErrorCode.BadPort),
    (("A := new Add;", "a0 := A<G>(l, r);", "out = a0.sum;"), ErrorCode.UnboundName),
    (("A := new Add;", "out = A.out;"), ErrorCode.BadPort),
    (("out = l;", "out = r;"), ErrorCode.MultipleDrivers),
    (("l = r;", "out = l;"), ErrorCode.BadPort),
    (("A := new Add;", "a0 := A<G>(l, out);", "out = a0.out;"), ErrorCode.BadPort),
    (("P := new Prev[8, 1, 3];", "out = l;"), ErrorCode.ArityMismatch),
    (("R := new Register;", "r0 := R<G, G+1>(l);", "out = r0.out;"), None),
])
def test_body_errors(lines, code):
    text = body(*lines)
    if code is None:
        resolve(parse(text))
        return
    assert code in codes_of(text)


def test_use_before_definition():
    text = body("A := new Add;", "a0 := A<G>(a1.out, r);", "a1 := A<G>(l, r);", "out = a1.out;")
    with pytest.raises(ResolutionError) as info:
        resolve(parse(text))
    diagnostic = info.value.diagnostics[0]
    assert_equal(diagnostic.code, ErrorCode.UnboundName)
    assert_equal(diagnostic.notes, ("`a1` is defined later in the body",))


@pytest.mark.parametrize("text, code", [
    ("comp main[W]<G: 1>(@interface[G] go: 1) -> () {\n}\n", ErrorCode.ParamsOnUserComponent),
    ("comp main<G: 1, L: 1>(@interface[G] go: 1) -> () where L > G {\n}\n",
     ErrorCode.OrderingConstraintInUserComponent),
    ("extern comp E<G: 1>(@interface[G] go: 1) -> () {\n}\n", ErrorCode.ExternWithBody),
    ("comp main<G: 1>(@interface[G] go: 1) -> ();", ErrorCode.MissingBody),
    ("comp main<G: 1>(@interface[G] go: 2) -> () {\n}\n", ErrorCode.BadPort),
    ("comp main<G: 1>(@interface[G] go: 1, @interface[G] en: 1) -> () {\n}\n",
     ErrorCode.BadPort),
    ("comp main<G: 1>(clk: 1) -> () {\n}\n", ErrorCode.BadPort),
    ("comp main<G: 1>(@[T, T+1] x: 1) -> () {\n}\n", ErrorCode.UnboundName),
    ("comp main<G: 1, G: 1>() -> () {\n}\n", ErrorCode.DuplicateName),
    ("extern comp E<G: 1>(@[G, G+1] x: W) -> ();", ErrorCode.UnboundName),
    ("comp main<G: 1>() -> () {\n}\ncomp main<G: 1>() -> () {\n}\n", ErrorCode.DuplicateName),
])
def test_signature_errors(text, code):
    assert code in codes_of(text)


def test_recursive_instantiation():
    text = ("comp a<G: 1>(@interface[G] go: 1) -> () {\n  B := new b;\n}\n"
            "comp b<G: 1>(@interface[G] go: 1) -> () {\n  A := new a;\n}\n")
    assert_equal(codes_of(text), [ErrorCode.RecursiveInstantiation])


def test_diagnostics_are_sorted():
    text = body("A := new Nope;", "B := new Nope;", "out = x;")
    with pytest.raises(ResolutionError) as info:
        resolve(parse(text))
    lines = [d.span.line for d in info.value.diagnostics]
    assert_equal(lines, sorted(lines))
    assert_equal(len(lines), 3)
