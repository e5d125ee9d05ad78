import hypothesis.strategies as st
import pytest
from hypothesis import given
from numpy.testing import assert_equal, assert_raises

from filament.diagnostics import ErrorCode, ParseError
from filament.event_algebra import Const, Diff, DifferenceConstraint, EventExpr, Interval
from filament.parser import parse, parse_file, tokenize
from filament.syntax import (Connect, Instantiate, Invoke, Literal, PortRef, compose, flatten,
                             pretty)

ADDER = """
// one transaction per cycle
comp main<G: 1>(@interface[G] go: 1, @[G, G+1] l: 32, @[G, G+1] r: 32)
    -> (@[G, G+1] out: 32) {
  A := new Add;
  a0 := A<G>(l, r);
  out = a0.out;
}
"""


def test_parse_signature():
    program = parse(ADDER)
    assert_equal(len(program.components), 1)
    main = program.component("main")
    signature = main.signature
    assert_equal(signature.event_names, ("G",))
    assert_equal(signature.events[0].delay, Const(1))
    assert_equal(signature.events[0].interface_port, "go")
    assert_equal(signature.events[0].is_phantom, False)
    assert_equal([p.name for p in signature.data_inputs], ["l", "r"])
    assert_equal(signature.output("out").interval, Interval(EventExpr("G"), EventExpr("G", 1)))
    assert_equal(signature.input("go").interval, Interval(EventExpr("G"), EventExpr("G", 1)))
    assert_equal(main.is_extern, False)
    assert_equal(program.entry_name, "main")


def test_parse_body():
    main = parse(ADDER).component("main")
    assert_equal(main.body, (Instantiate("A", "Add"),
                             Invoke("a0", "A", (EventExpr("G"),), (PortRef(None, "l"),
                                                                   PortRef(None, "r"))),
                             Connect(PortRef(None, "out"), PortRef("a0", "out"))))
    assert_equal(main.commands(Instantiate), (Instantiate("A", "Add"),))


def test_fused_instantiation():
    text = """
    comp main<G: 1>(@interface[G] go: 1, @[G, G+1] x: 32) -> (@[G, G+1] out: 32) {
      m := new Mult[16]<G+1>(x, 3);
      out = m.out;
    }
    """
    body = parse(text).component("main").body
    assert_equal(body[0], Instantiate("m_inst", "Mult", (16,)))
    assert_equal(body[1], Invoke("m", "m_inst", (EventExpr("G", 1),),
                                 (PortRef(None, "x"), Literal(3))))


def test_extern_with_parametric_delay():
    text = ("extern comp Register[WIDTH=32]<G: L-(G+1), L: 1>(@interface[G] en: 1, "
            "@[G, G+1] in: WIDTH) -> (@[G+1, L] out: WIDTH) where L > G+1;")
    component = parse(text).components[0]
    signature = component.signature
    assert component.is_extern
    assert not component.has_body
    assert_equal(signature.events[0].delay, Diff(EventExpr("L"), EventExpr("G", 1)))
    assert_equal(signature.events[1].is_phantom, True)
    assert_equal(signature.where, (DifferenceConstraint("L", "G", 2),))
    assert_equal(signature.param_values(), {"WIDTH": 32})
    assert_equal(signature.param_values((8,)), {"WIDTH": 8})
    assert_equal(signature.width_of(signature.output("out"), {"WIDTH": 8}), 8)


@pytest.mark.parametrize("operator, constraint", [
    (">", DifferenceConstraint("L", "G", 1)),
    (">=", DifferenceConstraint("L", "G", 0)),
    ("<", DifferenceConstraint("G", "L", 1)),
    ("<=", DifferenceConstraint("G", "L", 0)),
])
def test_where_clause(operator, constraint):
    text = "extern comp E<G: 1, L: 1>(@[G, L] x: 1) -> () where L {} G;".format(operator)
    assert_equal(parse(text).components[0].signature.where, (constraint,))


def test_comments_and_trailing_commas():
    text = "// header\nextern comp E<G: 1,>(@[G, G+1] x: 8,) -> (); // trailer\n"
    signature = parse(text).components[0].signature
    assert_equal(signature.event_names, ("G",))
    assert_equal(signature.inputs[0].width, 8)


def test_tokenize_spans():
    tokens = tokenize("comp x\n  := new")
    assert_equal([t.kind for t in tokens], ["KEYWORD", "IDENT", "SYMBOL", "KEYWORD", "EOF"])
    assert_equal((tokens[2].span.line, tokens[2].span.column, tokens[2].span.length), (2, 3, 2))


def test_round_trip_corpus(corpus_name, corpus_text):
    program = parse(corpus_text(corpus_name))
    assert_equal(parse(pretty(program)), program)


def test_parse_file(corpus_dir):
    program = parse_file(corpus_dir / "twice.fil")
    assert_equal(program.components[0].span.filename, str(corpus_dir / "twice.fil"))
    assert_equal(program.components[0].span.line, 2)


@given(st.lists(st.integers(min_value=0, max_value=50), min_size=2, max_size=2),
       st.integers(min_value=1, max_value=64), st.integers(min_value=1, max_value=9))
def test_round_trip_signature(offsets, width, delay):
    start, length = offsets
    text = "extern comp E<G: {}>(@[G+{}, G+{}] x: {}) -> ();".format(
        delay, start, start + length + 1, width)
    program = parse(text)
    assert_equal(parse(pretty(program)), program)
    assert_equal(program.components[0].signature.inputs[0].interval,
                 Interval(EventExpr("G", start), EventExpr("G", start + length + 1)))


def test_missing_semicolon():
    text = "comp main<G: 1>(@interface[G] go: 1) -> () {\n  A := new Add\n}\n"
    with pytest.raises(ParseError) as info:
        parse(text, "bad.fil")
    error = info.value
    assert_equal((error.span.filename, error.span.line, error.span.column), ("bad.fil", 3, 1))
    assert_equal(error.expected, ("';'",))
    assert_equal(error.to_diagnostic().code, ErrorCode.ParseError)
    assert "bad.fil:3:1" in str(error)


def test_unexpected_character():
    with pytest.raises(ParseError) as info:
        parse("comp $")
    assert_equal((info.value.span.line, info.value.span.column), (1, 6))


def test_unterminated_body():
    with pytest.raises(ParseError) as info:
        parse("comp main<G: 1>() -> () {\n  out = 1;\n")
    assert_equal(info.value.expected, ("'}'",))


@pytest.mark.parametrize("text, code", [
    ("extern comp E<G: 1>(@[G-1, G] x: 1) -> ();", ErrorCode.IllFormedEvent),
    ("extern comp E<G: 1>(@[G+L, G] x: 1) -> ();", ErrorCode.IllFormedEvent),
    ("extern comp E<G: L+G, L: 1>() -> ();", ErrorCode.IllFormedEvent),
    ("extern comp E<G: 1>(@[G, G+70000] x: 1) -> ();", ErrorCode.OffsetTooLarge),
])
def test_ill_formed_events(text, code):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert_equal(info.value.code, code)


def test_compose_flatten():
    body = parse(ADDER).component("main").body
    assert_equal(flatten(compose(body)), body)
    assert_equal(flatten(compose([])), ())
    assert_raises(TypeError, pretty, 3.5)
