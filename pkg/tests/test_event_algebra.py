import hypothesis.strategies as st
from hypothesis import assume, given, settings
from numpy.testing import assert_equal, assert_raises

from filament.diagnostics import IllFormedEvent, InconsistentFacts, OffsetOverflow
from filament.event_algebra import (Const, ConstraintSet, DifferenceConstraint, Diff, EventExpr,
                                    Interval, brute_force_prove, contains, delay_at_least,
                                    disjoint, evaluate, ge, make_delay, nonempty, normalize,
                                    prove, span_length, substitute)
from filament.global_vars import OFFSET_LIMIT

EVENTS = ("G", "L", "T")

offsets = st.integers(min_value=0, max_value=20)
small = st.integers(min_value=-3, max_value=3)


def window(start, end, base="G"):
    return Interval(EventExpr(base, start), EventExpr(base, end))


@st.composite
def constraints(draw):
    x, y = draw(st.lists(st.sampled_from(EVENTS), min_size=2, max_size=2, unique=True))
    return DifferenceConstraint(x, y, draw(small))


def test_normalize():
    assert_equal(normalize(("G", 1, 2)), EventExpr("G", 3))
    assert_equal(normalize((2, "L")), EventExpr("L", 2))
    assert_raises(IllFormedEvent, normalize, ("G", "L"))
    assert_raises(IllFormedEvent, normalize, (1, 2))


def test_event_offsets_are_bounded():
    assert_raises(IllFormedEvent, EventExpr, "G", -1)
    assert_raises(OffsetOverflow, EventExpr, "G", OFFSET_LIMIT + 1)
    assert_equal(str(EventExpr("G", OFFSET_LIMIT)), "G+{}".format(OFFSET_LIMIT))


def test_make_delay():
    assert_equal(make_delay([(1, 3)]), Const(3))
    assert_equal(make_delay([(1, "L"), (-1, "G")]), Diff(EventExpr("L"), EventExpr("G")))
    assert_equal(make_delay([(1, "L"), (-1, "G"), (-1, 1)]),
                 Diff(EventExpr("L"), EventExpr("G", 1)))
    assert_equal(str(make_delay([(1, "L"), (-1, "G"), (-1, 1)])), "L-(G+1)")
    assert_raises(IllFormedEvent, make_delay, [(1, "L"), (1, "G")])


def test_substitute_collapses_parametric_delay():
    delay = Diff(EventExpr("L"), EventExpr("G", 1))
    result = substitute(delay, {"G": EventExpr("T"), "L": EventExpr("T", 3)})
    assert_equal(result, Const(2))
    assert_raises(IllFormedEvent, substitute, delay, {"G": EventExpr("T")}, True)


def test_span_length_and_delays():
    assert_equal(span_length(window(2, 5)), 3)
    assert_equal(span_length(Interval(EventExpr("G", 1), EventExpr("L"))),
                 Diff(EventExpr("L"), EventExpr("G", 1)))
    assert_equal(delay_at_least(Const(3), 3), True)
    assert_equal(delay_at_least(Const(2), 3), False)

    # L-(G+1) >= 1 follows from L > G+1
    cs = ConstraintSet.for_events(("G", "L"), [ge(EventExpr("L"), EventExpr("G", 1), 1)])
    assert_equal(delay_at_least(Diff(EventExpr("L"), EventExpr("G", 1)), 1, cs), True)
    assert_equal(delay_at_least(Diff(EventExpr("L"), EventExpr("G", 1)), 2, cs), False)
    assert_equal(evaluate(Diff(EventExpr("L"), EventExpr("G", 1)), {"G": 2, "L": 7}), 4)


def test_prove_with_where_clause():
    cs = ConstraintSet.for_events(("G", "L"), [ge(EventExpr("L"), EventExpr("G", 3))])
    assert_equal(disjoint(window(0, 3), window(0, 3, "L"), cs), True)
    assert_equal(disjoint(window(0, 3), window(0, 3, "L")), False)
    assert_equal(contains(window(0, 1, "L"), window(0, 1, "L"), cs), True)


def test_inconsistent_facts():
    cs = ConstraintSet.for_events(EVENTS, [DifferenceConstraint("G", "L", 1),
                                           DifferenceConstraint("L", "G", 1)])
    assert_equal(cs.consistent, False)
    assert_raises(InconsistentFacts, prove, cs, DifferenceConstraint("G", "T", 0))


@given(offsets, offsets, offsets, offsets)
def test_contains_same_base(a, b, c, d):
    assume(a < b and c < d)
    assert_equal(contains(window(a, b), window(c, d)), a <= c and d <= b)


@given(offsets, offsets, offsets, offsets)
def test_disjoint_same_base(a, b, c, d):
    assume(a < b and c < d)
    overlap = max(a, c) < min(b, d)
    assert_equal(disjoint(window(a, b), window(c, d)), not overlap)


@given(offsets, offsets)
def test_nonempty(a, b):
    assert_equal(nonempty(window(a, b)), a < b)


@settings(max_examples=60, deadline=None)
@given(st.lists(constraints(), max_size=3), constraints())
def test_prove_agrees_with_brute_force(facts, claim):
    cs = ConstraintSet.for_events(EVENTS, facts)
    assume(cs.consistent)
    assert_equal(prove(cs, claim), brute_force_prove(cs, claim))


@settings(deadline=None)
@given(st.lists(constraints(), max_size=3), constraints(), constraints())
def test_prove_is_monotone(facts, extra, claim):
    cs = ConstraintSet.for_events(EVENTS, facts)
    stronger = cs.with_facts(extra)
    assume(stronger.consistent)
    if prove(cs, claim):
        assert prove(stronger, claim)
