"""
Abstract syntax of filament programs and the pretty printer.

All nodes are frozen dataclasses. Source spans are excluded from comparison so that a
program and the re-parse of its pretty printed form compare equal.
"""

import logging
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

from filament.diagnostics import Span
from filament.event_algebra import (Const, DelayExpr, DifferenceConstraint, EventExpr,
                                    Interval, substitute, unit_interval)
from filament.global_vars import ENTRY_NAME

logger = logging.getLogger(__name__)

NO_SPAN = Span()

Width = Union[int, str]


def _span():
    return field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Param:
    name: str
    default: Optional[int] = None
    span: Span = _span()


@dataclass(frozen=True)
class EventBinding:
    var: str
    delay: DelayExpr
    interface_port: Optional[str] = None
    span: Span = _span()

    @property
    def is_phantom(self) -> bool:
        return self.interface_port is None


@dataclass(frozen=True)
class PortDef:
    """A port of a signature

    ``interval`` is None only for pass-through ports (clk/reset of externs). Interface
    ports carry the implicit window ``[G, G+1)`` of their event.
    """
    name: str
    width: Width
    interval: Optional[Interval]
    direction: str
    interface_for: Optional[str] = None
    span: Span = _span()

    @property
    def is_interface(self) -> bool:
        return self.interface_for is not None

    @property
    def is_pass_through(self) -> bool:
        return self.interval is None

    @property
    def is_data(self) -> bool:
        return not self.is_interface and not self.is_pass_through


@dataclass(frozen=True)
class Signature:
    name: str
    events: Tuple[EventBinding, ...]
    inputs: Tuple[PortDef, ...] = ()
    outputs: Tuple[PortDef, ...] = ()
    where: Tuple[DifferenceConstraint, ...] = ()
    params: Tuple[Param, ...] = ()
    span: Span = _span()

    @property
    def event_names(self) -> Tuple[str, ...]:
        return tuple(binding.var for binding in self.events)

    def event(self, name: str) -> Optional[EventBinding]:
        for binding in self.events:
            if binding.var == name:
                return binding
        return None

    @property
    def data_inputs(self) -> Tuple[PortDef, ...]:
        return tuple(port for port in self.inputs if port.is_data)

    @property
    def interface_ports(self) -> Tuple[PortDef, ...]:
        return tuple(port for port in self.inputs if port.is_interface)

    @property
    def phantom_events(self) -> Tuple[str, ...]:
        return tuple(binding.var for binding in self.events if binding.is_phantom)

    @property
    def ports(self) -> Tuple[PortDef, ...]:
        return self.inputs + self.outputs

    def port(self, name: str) -> Optional[PortDef]:
        for port in self.ports:
            if port.name == name:
                return port
        return None

    def input(self, name: str) -> Optional[PortDef]:
        for port in self.inputs:
            if port.name == name:
                return port
        return None

    def output(self, name: str) -> Optional[PortDef]:
        for port in self.outputs:
            if port.name == name:
                return port
        return None

    def param_values(self, args: Sequence[int] = ()) -> Dict[str, int]:
        """Bind instantiation arguments to parameter names, filling in defaults"""
        values = {}
        for index, param in enumerate(self.params):
            if index < len(args):
                values[param.name] = args[index]
            elif param.default is not None:
                values[param.name] = param.default
        return values

    def width_of(self, port: PortDef, params: Dict[str, int]) -> Optional[int]:
        if isinstance(port.width, int):
            return port.width
        return params.get(port.width)


@dataclass(frozen=True)
class PortRef:
    """A port of the enclosing component (owner None) or an invocation output"""
    owner: Optional[str]
    port: str
    span: Span = _span()

    def __str__(self):
        if self.owner is None:
            return self.port
        return "{}.{}".format(self.owner, self.port)


@dataclass(frozen=True)
class Literal:
    value: int
    span: Span = _span()

    def __str__(self):
        return str(self.value)


Arg = Union[PortRef, Literal]


@dataclass(frozen=True)
class Instantiate:
    name: str
    component: str
    params: Tuple[int, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class Invoke:
    name: str
    instance: str
    events: Tuple[EventExpr, ...]
    ports: Tuple[Arg, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class Connect:
    dst: PortRef
    src: Arg
    span: Span = _span()


@dataclass(frozen=True)
class Compose:
    first: "Command"
    second: "Command"


Command = Union[Instantiate, Invoke, Connect, Compose]


@dataclass(frozen=True)
class ComponentDef:
    signature: Signature
    is_extern: bool = False
    body: Tuple[Command, ...] = ()
    has_body: bool = False
    span: Span = _span()

    @property
    def name(self) -> str:
        return self.signature.name

    @property
    def events(self) -> Tuple[EventBinding, ...]:
        return self.signature.events

    @property
    def inputs(self) -> Tuple[PortDef, ...]:
        return self.signature.inputs

    @property
    def outputs(self) -> Tuple[PortDef, ...]:
        return self.signature.outputs

    @property
    def where_constraints(self) -> Tuple[DifferenceConstraint, ...]:
        return self.signature.where

    @property
    def params(self) -> Tuple[Param, ...]:
        return self.signature.params

    def commands(self, kind) -> Tuple[Command, ...]:
        return tuple(command for command in self.body if isinstance(command, kind))


@dataclass(frozen=True)
class Program:
    components: Tuple[ComponentDef, ...] = ()
    entry: Optional[str] = None

    def component(self, name: str) -> Optional[ComponentDef]:
        for component in self.components:
            if component.name == name:
                return component
        return None

    @property
    def entry_name(self) -> Optional[str]:
        """``main`` when defined, else the last user-level component"""
        if self.entry is not None:
            return self.entry
        names = [c.name for c in self.components if not c.is_extern]
        if ENTRY_NAME in names:
            return ENTRY_NAME
        return names[-1] if names else None


def compose(commands: Iterable[Command]) -> Optional[Command]:
    """Fold a command sequence into a right nested Compose"""
    commands = list(commands)
    if not commands:
        return None
    result = commands[-1]
    for command in reversed(commands[:-1]):
        result = Compose(command, result)
    return result


def flatten(command: Optional[Command]) -> Tuple[Command, ...]:
    if command is None:
        return ()
    if isinstance(command, Compose):
        return flatten(command.first) + flatten(command.second)
    return command,


def interface_port(name: str, event: str, span: Span = NO_SPAN) -> PortDef:
    return PortDef(name, 1, unit_interval(EventExpr(event)), "in", interface_for=event,
                   span=span)


def substitute_signature(signature: Signature, binding) -> Signature:
    """Signature with every interval, delay and constraint rewritten under ``binding``"""

    def port(p):
        if p.interval is None:
            return p
        return PortDef(p.name, p.width, substitute(p.interval, binding), p.direction,
                       p.interface_for, p.span)

    events = tuple(EventBinding(b.var, substitute(b.delay, binding), b.interface_port, b.span)
                   for b in signature.events)
    return Signature(signature.name, events, tuple(port(p) for p in signature.inputs),
                     tuple(port(p) for p in signature.outputs),
                     tuple(substitute(c, binding) for c in signature.where),
                     signature.params, signature.span)


substitute.register(Signature, lambda x, binding, require_constant=False:
                    substitute_signature(x, binding))


@singledispatch
def pretty(node) -> str:
    """Render a syntax node as filament source text"""
    raise TypeError("cannot pretty print {!r}".format(node))


@pretty.register
def _(node: Program) -> str:
    return "\n\n".join(pretty(component) for component in node.components) + (
        "\n" if node.components else "")


@pretty.register
def _(node: ComponentDef) -> str:
    header = pretty(node.signature)
    if node.is_extern:
        header = "extern " + header
    if not node.has_body:
        return header + ";"
    lines = [header + " {"]
    lines.extend("  " + pretty(command) for command in node.body)
    lines.append("}")
    return "\n".join(lines)


@pretty.register
def _(node: Signature) -> str:
    text = "comp " + node.name
    if node.params:
        text += "[{}]".format(", ".join(pretty(p) for p in node.params))
    text += "<{}>".format(", ".join(pretty(b) for b in node.events))
    text += "({}) -> ({})".format(", ".join(pretty(p) for p in node.inputs),
                                  ", ".join(pretty(p) for p in node.outputs))
    if node.where:
        text += " where " + ", ".join(pretty(c) for c in node.where)
    return text


@pretty.register
def _(node: Param) -> str:
    if node.default is None:
        return node.name
    return "{}={}".format(node.name, node.default)


@pretty.register
def _(node: EventBinding) -> str:
    return "{}: {}".format(node.var, node.delay)


@pretty.register
def _(node: PortDef) -> str:
    if node.is_interface:
        return "@interface[{}] {}: {}".format(node.interface_for, node.name, node.width)
    if node.is_pass_through:
        return "{}: {}".format(node.name, node.width)
    return "@[{}, {}] {}: {}".format(node.interval.start, node.interval.end, node.name,
                                     node.width)


@pretty.register
def _(node: DifferenceConstraint) -> str:
    if node.c >= 0:
        right = node.y if node.c == 0 else "{}+{}".format(node.y, node.c)
        return "{} >= {}".format(node.x, right)
    return "{}+{} >= {}".format(node.x, -node.c, node.y)


@pretty.register
def _(node: Instantiate) -> str:
    params = ""
    if node.params:
        params = "[{}]".format(", ".join(str(p) for p in node.params))
    return "{} := new {}{};".format(node.name, node.component, params)


@pretty.register
def _(node: Invoke) -> str:
    return "{} := {}<{}>({});".format(node.name, node.instance,
                                      ", ".join(str(e) for e in node.events),
                                      ", ".join(str(p) for p in node.ports))


@pretty.register
def _(node: Connect) -> str:
    return "{} = {};".format(node.dst, node.src)


@pretty.register
def _(node: Compose) -> str:
    return pretty(node.first) + "\n" + pretty(node.second)


@pretty.register
def _(node: Const) -> str:
    return str(node)
