"""
Symbolic time: event expressions, availability intervals, delays and a decision
procedure for difference constraints between events.

Every side condition of the type checker is a difference constraint ``X - Y >= c``
between two event variables. A set of such facts is decided with a shortest path
closure over the difference-constraint graph, which is sound and complete for this
fragment.

Notes
-----
* An edge ``x -> y`` with weight ``w`` encodes ``y - x <= w``; the closure entry
  ``D[x, y]`` therefore is the tightest upper bound on ``y - x``
* The closure is computed with a vectorised Floyd-Warshall sweep in numpy
"""

import functools
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, singledispatch
from typing import Dict, FrozenSet, Iterable, Mapping, Tuple, Union

import numpy as np

from filament.diagnostics import IllFormedEvent, InconsistentFacts, OffsetOverflow
from filament.global_vars import BRUTE_FORCE_BOUND, OFFSET_LIMIT, ORIGIN

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class EventExpr:
    """An event variable shifted by a constant number of cycles, ``G+3``"""
    base: str
    offset: int = 0

    def __post_init__(self):
        if self.offset < 0:
            raise IllFormedEvent("event {} has a negative offset {}".format(self.base,
                                                                           self.offset))
        if self.offset > OFFSET_LIMIT:
            raise OffsetOverflow("offset {} of event {} exceeds the limit {}"
                                 "".format(self.offset, self.base, OFFSET_LIMIT))

    def __add__(self, cycles: int) -> "EventExpr":
        return EventExpr(self.base, self.offset + cycles)

    def ground(self, grounding: Mapping[str, int]) -> int:
        return grounding[self.base] + self.offset

    def __str__(self):
        if self.offset == 0:
            return self.base
        return "{}+{}".format(self.base, self.offset)


@dataclass(frozen=True)
class Interval:
    """Half open availability window ``[start, end)``"""
    start: EventExpr
    end: EventExpr

    @property
    def same_base(self) -> bool:
        return self.start.base == self.end.base

    @property
    def bases(self) -> Tuple[str, ...]:
        if self.same_base:
            return self.start.base,
        return self.start.base, self.end.base

    def __str__(self):
        return "[{}, {})".format(self.start, self.end)


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Diff:
    """Parametric delay ``a - b``; only legal in extern signatures"""
    a: EventExpr
    b: EventExpr

    def normalized(self) -> "Diff":
        shift = min(self.a.offset, self.b.offset)
        return Diff(EventExpr(self.a.base, self.a.offset - shift),
                    EventExpr(self.b.base, self.b.offset - shift))

    def __str__(self):
        right = str(self.b)
        if self.b.offset:
            right = "(" + right + ")"
        return "{}-{}".format(self.a, right)


DelayExpr = Union[Const, Diff]


@dataclass(frozen=True, order=True)
class DifferenceConstraint:
    """The fact ``x - y >= c`` over event variables (or the origin)"""
    x: str
    y: str
    c: int

    @property
    def variables(self) -> Tuple[str, str]:
        return self.x, self.y

    def holds(self, model: Mapping[str, int]) -> bool:
        return model[self.x] - model[self.y] >= self.c

    def __str__(self):
        return "{} - {} >= {}".format(self.x, self.y, self.c)


def ge(a: EventExpr, b: EventExpr, c: int = 0) -> DifferenceConstraint:
    """The claim ``a - b >= c`` between two event expressions"""
    return DifferenceConstraint(a.base, b.base, c - a.offset + b.offset)


def normalize(raw: Union[EventExpr, str, Iterable[Union[str, int]]]) -> EventExpr:
    """Fold a sum of one event variable and constant offsets into normal form

    Parameters
    ----------
    raw: EventExpr, str or iterable
        The terms of the sum. Strings are event variables, integers are offsets

    Returns
    -------
    EventExpr:
        The unique (base, offset) form

    Raises
    ------
    IllFormedEvent
        If the sum does not contain exactly one event variable

    Examples
    --------
    >>> normalize(("G", 1, 2))
    EventExpr(base='G', offset=3)
    >>> normalize("G")
    EventExpr(base='G', offset=0)
    """
    if isinstance(raw, EventExpr):
        return raw
    if isinstance(raw, str):
        return EventExpr(raw)
    terms = list(raw)
    names = [term for term in terms if isinstance(term, str)]
    if len(names) != 1:
        if names:
            raise IllFormedEvent("adding event variables ({}) is not allowed"
                                 "".format(" + ".join(names)))
        raise IllFormedEvent("event expression {} has no event variable"
                             "".format(" + ".join(str(t) for t in terms)))
    return EventExpr(names[0], sum(term for term in terms if isinstance(term, int)))


def make_delay(signed_terms: Iterable[Tuple[int, Union[str, int]]]) -> DelayExpr:
    """Build a delay from a signed sum ``[(+1, "L"), (-1, "G"), (-1, 1)]``

    The result is a constant or the difference of exactly two events.

    Raises
    ------
    IllFormedEvent
        For any other linear form
    """
    coefficients: Dict[str, int] = {}
    constant = 0
    for sign, term in signed_terms:
        if isinstance(term, str):
            coefficients[term] = coefficients.get(term, 0) + sign
        else:
            constant += sign * term
    coefficients = {name: k for name, k in coefficients.items() if k != 0}
    if not coefficients:
        return Const(constant)
    positive = [name for name, k in coefficients.items() if k == 1]
    negative = [name for name, k in coefficients.items() if k == -1]
    if len(coefficients) != 2 or len(positive) != 1 or len(negative) != 1:
        raise IllFormedEvent("a delay must be a constant or the difference of two events")
    if constant >= 0:
        return Diff(EventExpr(positive[0], constant), EventExpr(negative[0]))
    return Diff(EventExpr(positive[0]), EventExpr(negative[0], -constant))


@dataclass(frozen=True)
class ConstraintSet:
    """A set of difference constraints and its shortest path closure"""
    facts: FrozenSet[DifferenceConstraint] = frozenset()

    @classmethod
    def for_events(cls, events: Iterable[str], facts: Iterable[DifferenceConstraint] = ()):
        """Facts of a signature: the where clause plus ``e - 0 >= 0`` for every event"""
        all_facts = set(facts)
        all_facts.update(DifferenceConstraint(event, ORIGIN, 0) for event in events)
        return cls(frozenset(all_facts))

    def with_facts(self, *facts: DifferenceConstraint) -> "ConstraintSet":
        return ConstraintSet(self.facts | frozenset(facts))

    @cached_property
    def variables(self) -> Tuple[str, ...]:
        names = set()
        for fact in self.facts:
            names.update(fact.variables)
        return tuple(sorted(names))

    @cached_property
    def closure(self) -> np.ndarray:
        index = {name: i for i, name in enumerate(self.variables)}
        n_vars = len(index)
        dist = np.full((n_vars, n_vars), np.inf)
        np.fill_diagonal(dist, 0)
        for fact in self.facts:
            i, j = index[fact.x], index[fact.y]
            dist[i, j] = min(dist[i, j], -fact.c)
        for k in range(n_vars):
            dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
        logger.debug("Closure over {} variables from {} facts".format(n_vars, len(self.facts)))
        return dist

    @cached_property
    def consistent(self) -> bool:
        if not self.variables:
            return True
        return bool(np.all(np.diag(self.closure) >= 0))

    def upper_bound(self, x: str, y: str) -> float:
        """Tightest upper bound on ``y - x``; infinite when unconstrained"""
        if x == y:
            return 0
        try:
            i = self.variables.index(x)
            j = self.variables.index(y)
        except ValueError:
            return np.inf
        return self.closure[i, j]


def prove(cs: ConstraintSet, claim: DifferenceConstraint) -> bool:
    """Decide whether ``claim`` is entailed by the facts of ``cs``

    Raises
    ------
    InconsistentFacts
        If the facts themselves contain a negative cycle

    Examples
    --------
    >>> prove(ConstraintSet(frozenset({DifferenceConstraint("L", "G", 2)})),
    ...       DifferenceConstraint("L", "G", 1))
    True
    >>> prove(ConstraintSet(), ge(EventExpr("G", 3), EventExpr("G", 1), 2))
    True
    """
    if not cs.consistent:
        raise InconsistentFacts("the ordering constraints {} are contradictory".format(
            ", ".join(str(f) for f in sorted(cs.facts))))
    return cs.upper_bound(claim.x, claim.y) <= -claim.c


def brute_force_prove(cs: ConstraintSet, claim: DifferenceConstraint,
                      bound: int = BRUTE_FORCE_BOUND) -> bool:
    """Decide a claim by enumerating every model with values in ``[0, bound]``

    The origin is fixed at 0. Only meant for cross-checking :func:`prove` on small sets.
    """
    names = sorted((set(cs.variables) | set(claim.variables)) - {ORIGIN})
    for values in itertools.product(range(bound + 1), repeat=len(names)):
        model = dict(zip(names, values))
        model[ORIGIN] = 0
        if all(fact.holds(model) for fact in cs.facts) and not claim.holds(model):
            return False
    return True


def contains(avail: Interval, req: Interval, cs: ConstraintSet = ConstraintSet()) -> bool:
    """True when the requirement window lies inside the availability window"""
    return prove(cs, ge(req.start, avail.start)) and prove(cs, ge(avail.end, req.end))


def disjoint(first: Interval, second: Interval, cs: ConstraintSet = ConstraintSet()) -> bool:
    return prove(cs, ge(second.start, first.end)) or prove(cs, ge(first.start, second.end))


def nonempty(interval: Interval, cs: ConstraintSet = ConstraintSet()) -> bool:
    return prove(cs, ge(interval.end, interval.start, 1))


def span_length(interval: Interval, cs: ConstraintSet = ConstraintSet()) -> Union[int, Diff]:
    """Length of an interval: an integer for a same-base interval, else ``end - start``"""
    if interval.same_base:
        return interval.end.offset - interval.start.offset
    return Diff(interval.end, interval.start).normalized()


def delay_at_least(delay: DelayExpr, amount: Union[int, Diff],
                   cs: ConstraintSet = ConstraintSet()) -> bool:
    """Prove ``delay >= amount`` where both may be constants or event differences"""
    if isinstance(delay, Const) and isinstance(amount, int):
        return delay.value >= amount
    if isinstance(delay, Const):
        # end - start <= d
        return prove(cs, ge(amount.b, amount.a, -delay.value))
    if isinstance(amount, int):
        return prove(cs, ge(delay.a, delay.b, amount))
    if delay.normalized() == amount.normalized():
        return True
    if delay.a.base == amount.a.base and delay.b.base == amount.b.base:
        return delay.a.offset - delay.b.offset - amount.a.offset + amount.b.offset >= 0
    return False


def evaluate(delay: DelayExpr, grounding: Mapping[str, int]) -> int:
    if isinstance(delay, Const):
        return delay.value
    return delay.a.ground(grounding) - delay.b.ground(grounding)


@singledispatch
def substitute(x, binding: Mapping[str, EventExpr], require_constant: bool = False):
    """Replace event variables by event expressions

    Offsets compose additively. A parametric delay whose two events land on the same
    base collapses to a constant.

    Parameters
    ----------
    x: EventExpr, Interval, Const, Diff, DifferenceConstraint or a tuple of those
    binding: dict
        event variable -> event expression. Variables not in the binding are kept
    require_constant: bool
        Raise IllFormedEvent when a delay does not collapse to a constant

    Examples
    --------
    >>> str(substitute(Interval(EventExpr("T"), EventExpr("T", 1)), {"T": EventExpr("G", 2)}))
    '[G+2, G+3)'
    >>> substitute(Diff(EventExpr("L"), EventExpr("G")), {"G": EventExpr("T"),
    ...                                                   "L": EventExpr("T", 3)})
    Const(value=3)
    """
    raise TypeError("cannot substitute events in {!r}".format(x))


@substitute.register
def _(x: EventExpr, binding, require_constant=False):
    target = binding.get(x.base)
    if target is None:
        return x
    return EventExpr(target.base, target.offset + x.offset)


@substitute.register
def _(x: Interval, binding, require_constant=False):
    return Interval(substitute(x.start, binding), substitute(x.end, binding))


@substitute.register
def _(x: Const, binding, require_constant=False):
    return x


@substitute.register
def _(x: Diff, binding, require_constant=False):
    a = substitute(x.a, binding)
    b = substitute(x.b, binding)
    if a.base == b.base:
        return Const(a.offset - b.offset)
    if require_constant:
        raise IllFormedEvent("delay {} does not evaluate to a constant under {}"
                             "".format(x, Diff(a, b)))
    return Diff(a, b).normalized()


@substitute.register
def _(x: DifferenceConstraint, binding, require_constant=False):
    left = substitute(EventExpr(x.x), binding) if x.x != ORIGIN else EventExpr(ORIGIN)
    right = substitute(EventExpr(x.y), binding) if x.y != ORIGIN else EventExpr(ORIGIN)
    return ge(left, right, x.c)


@substitute.register(tuple)
def _(x: tuple, binding, require_constant=False):
    return tuple(substitute(item, binding, require_constant) for item in x)


@functools.lru_cache(maxsize=None)
def unit_interval(event: EventExpr) -> Interval:
    """The window ``[e, e+1)`` of an interface port"""
    return Interval(event, event + 1)

