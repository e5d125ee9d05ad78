"""
Name resolution: binds every component, instance, invocation and port reference of a
parsed program and rejects malformed definitions before type checking.
"""

import graphlib
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from filament.diagnostics import Diagnostic, ErrorCode, ResolutionError, sort_diagnostics
from filament.event_algebra import Diff, EventExpr
from filament.global_vars import PASS_THROUGH_PORTS
from filament.primitives import library as primitive_library
from filament.string_measures import closest_match
from filament.syntax import (ComponentDef, Connect, Instantiate, Invoke, Literal, PortRef,
                             Program, Signature)

logger = logging.getLogger(__name__)


@dataclass
class ComponentScope:
    """Names bound in the body of one component"""
    component: ComponentDef
    instances: Dict[str, Instantiate] = field(default_factory=dict)
    invocations: Dict[str, Invoke] = field(default_factory=dict)
    callees: Dict[str, ComponentDef] = field(default_factory=dict)

    def instance_component(self, instance: str) -> ComponentDef:
        return self.callees[instance]

    def invocation_callee(self, invocation: str) -> ComponentDef:
        return self.callees[self.invocations[invocation].instance]

    def binding(self, invocation: str) -> Dict[str, EventExpr]:
        """Callee event variable -> event expression of the caller"""
        invoke = self.invocations[invocation]
        callee = self.invocation_callee(invocation)
        return dict(zip(callee.signature.event_names, invoke.events))

    def instance_params(self, instance: str) -> Dict[str, int]:
        return self.callees[instance].signature.param_values(self.instances[instance].params)

    def invocations_of(self, instance: str) -> Tuple[Invoke, ...]:
        return tuple(inv for inv in self.invocations.values() if inv.instance == instance)


@dataclass(frozen=True)
class ResolvedProgram:
    """A program whose names are all bound

    ``program`` holds the user components followed by the library externs they use;
    ``order`` lists every component callees first.
    """
    program: Program
    scopes: Dict[str, ComponentScope]
    order: Tuple[str, ...]
    entry: Optional[str] = None

    def component(self, name: str) -> ComponentDef:
        return self.scopes[name].component

    def signature(self, name: str) -> Signature:
        return self.component(name).signature

    def scope(self, name: str) -> ComponentScope:
        return self.scopes[name]

    @property
    def user_components(self) -> Tuple[str, ...]:
        return tuple(name for name in self.order if not self.component(name).is_extern)


class _Resolver(object):
    def __init__(self, program: Program, library: Optional[Program]):
        self.program = program
        self.library = library
        self.diagnostics: List[Diagnostic] = []
        self.table: Dict[str, ComponentDef] = {}

    def report(self, code, message, span=None, notes=(), label=""):
        self.diagnostics.append(Diagnostic(code, message, span, notes=tuple(notes), label=label))

    def unbound(self, kind, name, span, candidates):
        suggestion = closest_match(name, candidates)
        notes = ["did you mean `{}`?".format(suggestion)] if suggestion else []
        self.report(ErrorCode.UnboundName, "unknown {} `{}`".format(kind, name), span, notes)

    def build_table(self):
        for component in self.program.components:
            if component.name in self.table:
                self.report(ErrorCode.DuplicateName,
                            "component `{}` is defined twice".format(component.name),
                            component.signature.span)
                continue
            self.table[component.name] = component
        if self.library is None:
            return
        used = set()
        for component in self.program.components:
            used.update(command.component for command in component.commands(Instantiate))
        for extern in self.library.components:
            if extern.name in used and extern.name not in self.table:
                self.table[extern.name] = extern

    def known_components(self) -> List[str]:
        names = list(self.table)
        if self.library is not None:
            names.extend(extern.name for extern in self.library.components)
        return names

    def check_signature(self, component: ComponentDef):
        signature = component.signature
        events = signature.event_names
        params = [param.name for param in signature.params]
        self.check_unique("event", [(b.var, b.span) for b in signature.events])
        self.check_unique("port", [(p.name, p.span) for p in signature.ports])
        self.check_unique("parameter", [(p.name, p.span) for p in signature.params])

        if not component.is_extern:
            if signature.params:
                self.report(ErrorCode.ParamsOnUserComponent,
                            "component `{}` takes integer parameters; only extern components "
                            "may".format(component.name), signature.span)
            if signature.where:
                self.report(ErrorCode.OrderingConstraintInUserComponent,
                            "component `{}` has ordering constraints; only extern components "
                            "may".format(component.name), signature.span)
        if component.is_extern and component.has_body:
            self.report(ErrorCode.ExternWithBody,
                        "extern component `{}` has a body".format(component.name),
                        signature.span)
        if not component.is_extern and not component.has_body:
            self.report(ErrorCode.MissingBody,
                        "component `{}` has no body".format(component.name), signature.span)

        interfaces: Dict[str, str] = {}
        for port in signature.ports:
            if isinstance(port.width, str) and port.width not in params:
                self.unbound("width parameter", port.width, port.span, params)
            elif isinstance(port.width, int) and port.width < 1:
                self.report(ErrorCode.WidthMismatch,
                            "port `{}` has width {}".format(port.name, port.width), port.span)
            if port.is_pass_through:
                if not component.is_extern or port.name not in PASS_THROUGH_PORTS:
                    self.report(ErrorCode.BadPort,
                                "port `{}` has no availability interval; only `clk` and `reset`"
                                " of extern components may omit it".format(port.name), port.span)
                continue
            for event in port.interval.bases:
                if event not in events:
                    self.unbound("event", event, port.span, events)
            if not port.is_interface:
                continue
            if port.direction != "in":
                self.report(ErrorCode.BadPort,
                            "interface port `{}` must be an input".format(port.name), port.span)
            if port.width != 1:
                self.report(ErrorCode.BadPort,
                            "interface port `{}` must be 1 bit wide".format(port.name),
                            port.span)
            if port.interface_for in interfaces:
                self.report(ErrorCode.BadPort,
                            "event `{}` already has the interface port `{}`".format(
                                port.interface_for, interfaces[port.interface_for]), port.span)
            interfaces.setdefault(port.interface_for, port.name)

        for binding in signature.events:
            if not isinstance(binding.delay, Diff):
                continue
            for event in (binding.delay.a.base, binding.delay.b.base):
                if event not in events:
                    self.unbound("event", event, binding.span, events)
        for constraint in signature.where:
            for event in constraint.variables:
                if event not in events:
                    self.unbound("event", event, signature.span, events)

    def check_unique(self, kind, names_spans):
        seen = set()
        for name, span in names_spans:
            if name in seen:
                self.report(ErrorCode.DuplicateName, "{} `{}` is declared twice".format(kind, name),
                            span)
            seen.add(name)

    def resolve_body(self, component: ComponentDef) -> ComponentScope:
        scope = ComponentScope(component)
        signature = component.signature
        events = signature.event_names
        driven: Dict[str, Connect] = {}
        defined = set()

        for command in component.body:
            if isinstance(command, Instantiate):
                self.resolve_instantiate(scope, command, defined)
            elif isinstance(command, Invoke):
                self.resolve_invoke(scope, command, defined, events)
            elif isinstance(command, Connect):
                self.check_source(scope, command.src, defined)
                self.check_destination(scope, command.dst, driven, command)
        return scope

    def claim_name(self, scope, name, span, defined):
        if name in defined:
            self.report(ErrorCode.DuplicateName, "`{}` is bound twice".format(name), span)
            return False
        defined.add(name)
        return True

    def resolve_instantiate(self, scope, command: Instantiate, defined):
        if not self.claim_name(scope, command.name, command.span, defined):
            return
        callee = self.table.get(command.component)
        if callee is None:
            self.unbound("component", command.component, command.span, self.known_components())
            return
        scope.instances[command.name] = command
        scope.callees[command.name] = callee
        params = callee.signature.params
        if len(command.params) > len(params):
            self.report(ErrorCode.ArityMismatch,
                        "`{}` takes {} parameters but {} were given".format(
                            callee.name, len(params), len(command.params)), command.span)
            return
        missing = [p.name for p in params[len(command.params):] if p.default is None]
        if missing:
            self.report(ErrorCode.ArityMismatch,
                        "instance `{}` of `{}` misses the parameters {}".format(
                            command.name, callee.name, ", ".join(missing)), command.span)

    def resolve_invoke(self, scope, command: Invoke, defined, events):
        for event in command.events:
            if event.base not in events:
                self.unbound("event", event.base, command.span, events)
        for arg in command.ports:
            self.check_source(scope, arg, defined)
        if command.instance not in scope.instances:
            if command.instance in scope.invocations:
                self.report(ErrorCode.BadPort,
                            "`{}` is an invocation, only instances can be invoked".format(
                                command.instance), command.span)
            else:
                self.unbound("instance", command.instance, command.span, scope.instances)
            self.claim_name(scope, command.name, command.span, defined)
            return
        if not self.claim_name(scope, command.name, command.span, defined):
            return
        callee = scope.callees[command.instance]
        signature = callee.signature
        if len(command.events) != len(signature.events):
            self.report(ErrorCode.ArityMismatch,
                        "`{}` has {} events but {} were given".format(
                            callee.name, len(signature.events), len(command.events)),
                        command.span)
            return
        if len(command.ports) != len(signature.data_inputs):
            self.report(ErrorCode.ArityMismatch,
                        "`{}` has {} data inputs but {} arguments were given".format(
                            callee.name, len(signature.data_inputs), len(command.ports)),
                        command.span)
            return
        scope.invocations[command.name] = command

    def check_source(self, scope, src, defined):
        if isinstance(src, Literal):
            return
        signature = scope.component.signature
        if src.owner is None:
            if signature.input(src.port) is not None:
                return
            if signature.output(src.port) is not None:
                self.report(ErrorCode.BadPort,
                            "output port `{}` cannot be read".format(src.port), src.span)
                return
            self.unbound("port", src.port, src.span, [p.name for p in signature.inputs])
            return
        if src.owner in scope.instances:
            self.report(ErrorCode.BadPort,
                        "`{}` is an instance; read its outputs through an invocation".format(
                            src.owner), src.span)
            return
        if src.owner not in scope.invocations:
            if src.owner in defined:
                return
            notes = []
            if any(src.owner == command.name for command in scope.component.commands(Invoke)):
                notes.append("`{}` is defined later in the body".format(src.owner))
                self.report(ErrorCode.UnboundName,
                            "invocation `{}` is used before it is defined".format(src.owner),
                            src.span, notes)
                return
            self.unbound("invocation", src.owner, src.span, scope.invocations)
            return
        callee = scope.invocation_callee(src.owner).signature
        if callee.output(src.port) is None:
            if callee.input(src.port) is not None:
                self.report(ErrorCode.BadPort,
                            "`{}` is an input of `{}`; only outputs can be read".format(
                                src.port, callee.name), src.span)
                return
            self.unbound("port of `{}`".format(callee.name), src.port, src.span,
                         [p.name for p in callee.outputs])

    def check_destination(self, scope, dst: PortRef, driven, command):
        signature = scope.component.signature
        if dst.owner is not None:
            self.report(ErrorCode.BadPort,
                        "`{}` cannot be assigned; pass it as an invocation argument".format(dst),
                        dst.span)
            return
        if signature.output(dst.port) is None:
            if signature.input(dst.port) is not None:
                self.report(ErrorCode.BadPort,
                            "input port `{}` cannot be assigned".format(dst.port), dst.span)
            else:
                self.unbound("port", dst.port, dst.span, [p.name for p in signature.outputs])
            return
        if dst.port in driven:
            self.report(ErrorCode.MultipleDrivers,
                        "output `{}` is driven more than once".format(dst.port), dst.span,
                        notes=["first driven at {}".format(driven[dst.port].span)])
            return
        driven[dst.port] = command

    def dependency_order(self) -> Tuple[str, ...]:
        sorter = graphlib.TopologicalSorter()
        for name in sorted(self.table):
            component = self.table[name]
            callees = sorted({command.component for command in component.commands(Instantiate)
                              if command.component in self.table})
            sorter.add(name, *callees)
        try:
            return tuple(sorter.static_order())
        except graphlib.CycleError as err:
            cycle = err.args[1]
            component = self.table[cycle[0]]
            self.report(ErrorCode.RecursiveInstantiation,
                        "component `{}` instantiates itself through {}".format(
                            cycle[0], " -> ".join(cycle)), component.signature.span)
            return tuple(sorted(self.table))

    def run(self, entry: Optional[str]) -> ResolvedProgram:
        self.build_table()
        scopes = {}
        for name, component in self.table.items():
            self.check_signature(component)
        for name, component in self.table.items():
            scopes[name] = self.resolve_body(component)
        order = self.dependency_order()

        if entry is None:
            entry = self.program.entry_name
        elif entry not in self.table:
            self.unbound("component", entry, None, self.table)

        if self.diagnostics:
            raise ResolutionError(sort_diagnostics(self.diagnostics))

        user = self.program.components
        user_names = {c.name for c in user}
        externs = tuple(c for name, c in self.table.items() if name not in user_names)
        program = Program(user + externs, entry)
        logger.debug("Resolved {} components, order {}".format(len(order), ", ".join(order)))
        return ResolvedProgram(program, scopes, order, entry)


def resolve(program: Program, library: Optional[Program] = None,
            entry: Optional[str] = None) -> ResolvedProgram:
    """Bind all names of a program

    Parameters
    ----------
    program: Program
        The parsed program
    library: Program, optional
        Externs made available to the program. Defaults to the primitive library
    entry: str, optional
        Name of the entry component. Defaults to ``main`` or the last user component

    Returns
    -------
    ResolvedProgram

    Raises
    ------
    ResolutionError
        Carrying every diagnostic found, sorted by position
    """
    if library is None:
        library = primitive_library()
    return _Resolver(program, library).run(entry)
