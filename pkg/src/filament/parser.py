"""
Lexer and recursive descent parser of filament source text

Grammar
-------
::

    program   := (["extern"] component)*
    component := "comp" IDENT [params] "<" binding ("," binding)* ">"
                 "(" [ports] ")" "->" "(" [ports] ")" ["where" order ("," order)*]
                 (body | ";")
    params    := "[" IDENT ["=" INT] ("," IDENT ["=" INT])* "]"
    binding   := IDENT ":" delay
    port      := ["@interface" "[" IDENT "]" | "@" "[" event "," event "]"] IDENT ":" width
    order     := event (">" | ">=" | "<" | "<=") event
    body      := "{" command* "}"
    command   := IDENT ":=" "new" IDENT ["[" INT ("," INT)* "]"] [schedule] ";"
               | IDENT ":=" IDENT schedule ";"
               | portref "=" arg ";"
    schedule  := "<" event ("," event)* ">" "(" [arg ("," arg)*] ")"

Lists accept a trailing comma. ``//`` starts a comment running to the end of the line.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

from filament.diagnostics import ErrorCode, EventError, ParseError, Span
from filament.event_algebra import (EventExpr, Interval, ge, make_delay, normalize,
                                    unit_interval)
from filament.global_vars import FUSED_INSTANCE_SUFFIX
from filament.regular_expressions import KEYWORDS, TOKEN_REGEXP
from filament.syntax import (ComponentDef, Connect, EventBinding, Instantiate, Invoke, Literal,
                             Param, PortDef, PortRef, Program, Signature)

logger = logging.getLogger(__name__)

ORDER_OPERATORS = (">", ">=", "<", "<=")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    span: Span

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of file"
        return "'{}'".format(self.value)


def tokenize(text: str, filename: str = "<string>") -> List[Token]:
    """Split source text into tokens; comments and layout are dropped

    Raises
    ------
    ParseError
        On a character that starts no token
    """
    tokens = []
    line = 1
    line_start = 0
    position = 0
    while position < len(text):
        match = TOKEN_REGEXP.match(text, position)
        column = position - line_start + 1
        if match is None:
            raise ParseError("unexpected character '{}'".format(text[position]),
                             Span(filename, line, column, 1))
        kind = match.lastgroup
        value = match.group()
        if kind == "NEWLINE":
            line += 1
            line_start = match.end()
        elif kind == "IDENT" and value in KEYWORDS:
            tokens.append(Token("KEYWORD", value, Span(filename, line, column, len(value))))
        elif kind not in ("COMMENT", "WHITESPACE"):
            tokens.append(Token(kind, value, Span(filename, line, column, len(value))))
        position = match.end()
    tokens.append(Token("EOF", "", Span(filename, line, position - line_start + 1, 1)))
    return tokens


class Parser(object):
    """Recursive descent parser over the token list of one source file

    Parameters
    ----------
    text: str
        Source text
    filename: str, optional
        Name used in the spans of the produced nodes and errors
    """

    def __init__(self, text: str, filename: str = "<string>"):
        self.filename = filename
        self.tokens = tokenize(text, filename)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        if token.kind != "EOF":
            self.index += 1
        return token

    def peek(self, value: str, offset: int = 0) -> bool:
        """True when the token ``offset`` ahead is the symbol or keyword ``value``"""
        position = min(self.index + offset, len(self.tokens) - 1)
        token = self.tokens[position]
        return token.kind in ("SYMBOL", "KEYWORD", "INTERFACE") and token.value == value

    def peek_kind(self, kind: str, offset: int = 0) -> bool:
        position = min(self.index + offset, len(self.tokens) - 1)
        return self.tokens[position].kind == kind

    def error(self, message: str, expected=(), token: Optional[Token] = None,
              code: ErrorCode = ErrorCode.ParseError):
        token = token or self.current
        return ParseError(message, token.span, expected, code)

    def match(self, value: str) -> Token:
        if not self.peek(value):
            raise self.error("unexpected {}".format(self.current.describe()),
                             expected=("'{}'".format(value),))
        return self.advance()

    def match_kind(self, kind: str, what: str) -> Token:
        if self.current.kind != kind:
            raise self.error("unexpected {}".format(self.current.describe()), expected=(what,))
        return self.advance()

    def accept(self, value: str) -> bool:
        if self.peek(value):
            self.advance()
            return True
        return False

    def parse_list(self, item, closing: str) -> list:
        """Comma separated items up to (and including) the closing symbol"""
        items = []
        while not self.peek(closing):
            items.append(item())
            if not self.accept(","):
                break
        self.match(closing)
        return items

    def parse_program(self) -> Program:
        components = []
        while self.current.kind != "EOF":
            components.append(self.parse_component())
        logger.debug("Parsed {} components from {}".format(len(components), self.filename))
        return Program(tuple(components))

    def parse_component(self) -> ComponentDef:
        start = self.current
        is_extern = self.accept("extern")
        if not self.peek("comp"):
            expected = ("'comp'",) if is_extern else ("'comp'", "'extern'")
            raise self.error("unexpected {}".format(self.current.describe()), expected)
        signature = self.parse_signature()
        if self.accept(";"):
            return ComponentDef(signature, is_extern, (), False, start.span)
        body = self.parse_body()
        return ComponentDef(signature, is_extern, tuple(body), True, start.span)

    def parse_signature(self) -> Signature:
        self.match("comp")
        name = self.match_kind("IDENT", "component name")
        params = ()
        if self.accept("["):
            params = tuple(self.parse_list(self.parse_param, "]"))
        self.match("<")
        events = self.parse_list(self.parse_event_binding, ">")
        self.match("(")
        inputs = self.parse_list(lambda: self.parse_port("in"), ")")
        self.match("->")
        self.match("(")
        outputs = self.parse_list(lambda: self.parse_port("out"), ")")
        where = ()
        if self.accept("where"):
            where = [self.parse_order()]
            while self.accept(","):
                where.append(self.parse_order())
            where = tuple(where)

        # an event is interfaced by the first input port that names it
        bindings = []
        for binding in events:
            port = next((p.name for p in inputs if p.interface_for == binding.var), None)
            bindings.append(EventBinding(binding.var, binding.delay, port, binding.span))
        return Signature(name.value, tuple(bindings), tuple(inputs), tuple(outputs), where,
                         params, name.span)

    def parse_param(self) -> Param:
        name = self.match_kind("IDENT", "parameter name")
        default = None
        if self.accept("="):
            default = int(self.match_kind("INT", "integer").value)
        return Param(name.value, default, name.span)

    def parse_event_binding(self) -> EventBinding:
        var = self.match_kind("IDENT", "event name")
        self.match(":")
        start = self.current
        terms = self.parse_delay_terms(1)
        try:
            delay = make_delay(terms)
        except EventError as err:
            raise self.error(str(err), token=start, code=err.code)
        return EventBinding(var.value, delay, None, var.span)

    def parse_delay_terms(self, sign: int) -> List[Tuple[int, object]]:
        """Signed terms of ``a + b - (c + 1)``; a sign in front of parentheses distributes"""
        terms = self.parse_delay_term(sign)
        while self.peek("+") or self.peek("-"):
            term_sign = sign if self.advance().value == "+" else -sign
            terms.extend(self.parse_delay_term(term_sign))
        return terms

    def parse_delay_term(self, sign: int) -> List[Tuple[int, object]]:
        if self.accept("("):
            terms = self.parse_delay_terms(sign)
            self.match(")")
            return terms
        if self.peek_kind("INT"):
            return [(sign, int(self.advance().value))]
        if self.peek_kind("IDENT"):
            return [(sign, self.advance().value)]
        raise self.error("unexpected {}".format(self.current.describe()),
                         expected=("integer", "event name", "'('"))

    def parse_event(self) -> EventExpr:
        """An event variable plus non-negative constant offsets, ``G+1+2``"""
        start = self.current
        terms = [self.parse_event_term()]
        while self.accept("+"):
            terms.append(self.parse_event_term())
        if self.peek("-"):
            raise self.error("event offsets cannot be negative", code=ErrorCode.IllFormedEvent)
        try:
            return normalize(terms)
        except EventError as err:
            raise self.error(str(err), token=start, code=err.code)

    def parse_event_term(self):
        if self.peek_kind("INT"):
            return int(self.advance().value)
        if self.peek_kind("IDENT"):
            return self.advance().value
        raise self.error("unexpected {}".format(self.current.describe()),
                         expected=("event name", "integer"))

    def parse_port(self, direction: str) -> PortDef:
        start = self.current
        interface_for = None
        interval = None
        if self.accept("@interface"):
            self.match("[")
            interface_for = self.match_kind("IDENT", "event name").value
            self.match("]")
            interval = unit_interval(EventExpr(interface_for))
        elif self.accept("@"):
            self.match("[")
            first = self.parse_event()
            self.match(",")
            second = self.parse_event()
            self.match("]")
            interval = Interval(first, second)
        name = self.match_kind("IDENT", "port name")
        self.match(":")
        if self.peek_kind("INT"):
            width = int(self.advance().value)
        else:
            width = self.match_kind("IDENT", "port width").value
        return PortDef(name.value, width, interval, direction, interface_for, start.span)

    def parse_order(self):
        start = self.current
        left = self.parse_event()
        operator = self.current
        if not any(self.peek(op) for op in ORDER_OPERATORS):
            raise self.error("unexpected {}".format(operator.describe()),
                             expected=tuple("'{}'".format(op) for op in ORDER_OPERATORS))
        self.advance()
        right = self.parse_event()
        try:
            if operator.value == ">":
                return ge(left, right, 1)
            if operator.value == ">=":
                return ge(left, right, 0)
            if operator.value == "<":
                return ge(right, left, 1)
            return ge(right, left, 0)
        except EventError as err:
            raise self.error(str(err), token=start, code=err.code)

    def parse_body(self) -> list:
        self.match("{")
        commands = []
        while not self.peek("}"):
            if self.current.kind == "EOF":
                raise self.error("unexpected end of file", expected=("'}'",))
            commands.extend(self.parse_command())
        self.match("}")
        return commands

    def parse_command(self) -> list:
        first = self.match_kind("IDENT", "command")
        if self.accept(":="):
            if self.accept("new"):
                return self.parse_instantiate(first)
            instance = self.match_kind("IDENT", "instance name")
            events, args = self.parse_schedule()
            self.match(";")
            return [Invoke(first.value, instance.value, events, args, first.span)]
        dst = self.parse_portref(first)
        self.match("=")
        src = self.parse_arg()
        self.match(";")
        return [Connect(dst, src, first.span)]

    def parse_instantiate(self, name: Token) -> list:
        component = self.match_kind("IDENT", "component name")
        params = ()
        if self.accept("["):
            params = tuple(self.parse_list(
                lambda: int(self.match_kind("INT", "integer").value), "]"))
        if not self.peek("<"):
            self.match(";")
            return [Instantiate(name.value, component.value, params, name.span)]
        # x := new C<T>(..) is sugar for an instance x_inst and an invocation x
        instance = name.value + FUSED_INSTANCE_SUFFIX
        events, args = self.parse_schedule()
        self.match(";")
        return [Instantiate(instance, component.value, params, name.span),
                Invoke(name.value, instance, events, args, name.span)]

    def parse_schedule(self):
        self.match("<")
        events = self.parse_list(self.parse_event, ">")
        self.match("(")
        args = self.parse_list(self.parse_arg, ")")
        return tuple(events), tuple(args)

    def parse_portref(self, first: Token) -> PortRef:
        if self.accept("."):
            port = self.match_kind("IDENT", "port name")
            return PortRef(first.value, port.value, first.span)
        return PortRef(None, first.value, first.span)

    def parse_arg(self):
        if self.peek_kind("INT"):
            token = self.advance()
            return Literal(int(token.value), token.span)
        first = self.match_kind("IDENT", "port or integer")
        return self.parse_portref(first)


def parse(text: str, filename: str = "<string>") -> Program:
    """Parse filament source text

    Parameters
    ----------
    text: str
        Source text
    filename: str, optional
        Name used in spans

    Returns
    -------
    Program:
        The components in source order

    Raises
    ------
    ParseError
        On malformed text; carries the span and the tokens that would have been accepted

    Examples
    --------
    >>> parse("").components
    ()
    """
    return Parser(text, filename).parse_program()


def parse_file(path) -> Program:
    path = Path(path)
    logger.info("Parsing {}".format(path))
    with open(path, "r") as stream:
        text = stream.read()
    return parse(text, str(path))
