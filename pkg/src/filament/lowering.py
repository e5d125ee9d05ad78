"""
Lowering of type checked components to Low filament.

Low filament has no events: each interfaced event becomes a pipeline FSM, a shift register
whose stage ``s`` is high ``s`` cycles after the interface port fired. Every invocation is
replaced by guarded assignments to the ports of its instance. Phantom events get neither
FSMs nor guards; their assignments are plain wires.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

from filament.diagnostics import Diagnostic, ErrorCode, InternalError, sort_diagnostics
from filament.event_algebra import substitute
from filament.resolve import ResolvedProgram
from filament.syntax import Connect, Instantiate, Invoke, Literal, Signature, pretty

logger = logging.getLogger(__name__)

Stage = Tuple[str, int]
Value = Union[str, int]


def fsm_name(event: str) -> str:
    return event + "f"


@dataclass(frozen=True)
class FsmDecl:
    """``fsm Gf[3](go);``: a shift register of ``states`` stages started by ``trigger``"""
    name: str
    states: int
    trigger: str
    event: str

    def __str__(self):
        return "fsm {}[{}]({});".format(self.name, self.states, self.trigger)


@dataclass(frozen=True)
class Guard:
    """Disjunction of FSM stages; the empty disjunction of an unguarded wire is always true"""
    stages: FrozenSet[Stage] = frozenset()

    @property
    def always(self) -> bool:
        return not self.stages

    def overlaps(self, other: "Guard") -> bool:
        return self.always or other.always or bool(self.stages & other.stages)

    def __or__(self, other: "Guard") -> "Guard":
        if self.always or other.always:
            return TRUE
        return Guard(self.stages | other.stages)

    def __str__(self):
        return " || ".join("{}._{}".format(fsm, stage) for fsm, stage in sorted(self.stages))


TRUE = Guard()


def stages(fsm: str, first: int, last: int) -> Guard:
    """Guard of the stages ``first`` up to but not including ``last``"""
    return Guard(frozenset((fsm, stage) for stage in range(first, last)))


@dataclass(frozen=True)
class Assignment:
    """``dst = guard ? src;``"""
    dst: str
    guard: Guard
    src: Value

    def __str__(self):
        if self.guard.always:
            return "{} = {};".format(self.dst, self.src)
        return "{} = {} ? {};".format(self.dst, self.guard, self.src)


@dataclass(frozen=True)
class LowComponent:
    name: str
    signature: Signature
    fsms: Tuple[FsmDecl, ...] = ()
    instances: Tuple[Instantiate, ...] = ()
    assignments: Tuple[Assignment, ...] = ()

    def fsm(self, name: str) -> Optional[FsmDecl]:
        return next((fsm for fsm in self.fsms if fsm.name == name), None)

    def assignments_to(self, dst: str) -> Tuple[Assignment, ...]:
        return tuple(a for a in self.assignments if a.dst == dst)

    def to_text(self) -> str:
        lines = [pretty(self.signature) + " {"]
        lines.extend("  " + str(fsm) for fsm in self.fsms)
        lines.extend("  " + pretty(instance) for instance in self.instances)
        lines.extend("  " + str(assignment) for assignment in self.assignments)
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LowProgram:
    """Lowered user components, callees first, and the externs they instantiate"""
    components: Tuple[LowComponent, ...]
    externs: Dict[str, Signature] = field(default_factory=dict)
    entry: Optional[str] = None

    def component(self, name: str) -> Optional[LowComponent]:
        return next((c for c in self.components if c.name == name), None)

    def to_text(self) -> str:
        return "\n".join(component.to_text() for component in self.components)


def compute_fsm_states(resolved: ResolvedProgram, name: str, event: str) -> int:
    """Number of FSM stages ``event`` needs: one more than the largest stage referenced by
    an invocation trigger or an argument requirement; 0 when nothing is referenced"""
    scope = resolved.scope(name)
    largest = -1
    for invoke in scope.component.commands(Invoke):
        callee = scope.instance_component(invoke.instance).signature
        binding = dict(zip(callee.event_names, invoke.events))
        for binding_event, start in zip(callee.events, invoke.events):
            if not binding_event.is_phantom and start.base == event:
                largest = max(largest, start.offset)
        signature = substitute(callee, binding)
        for port in signature.data_inputs:
            if port.interval.start.base == event:
                largest = max(largest, port.interval.end.offset - 1)
    return largest + 1


class _Lowerer(object):
    def __init__(self, resolved: ResolvedProgram, name: str):
        self.resolved = resolved
        self.scope = resolved.scope(name)
        self.component = self.scope.component
        self.signature = self.component.signature
        self.interfaced = {b.var: b.interface_port for b in self.signature.events
                           if not b.is_phantom}
        self.assignments: "OrderedDict[Tuple[str, Value], Guard]" = OrderedDict()

    def assign(self, dst: str, guard: Guard, src: Value):
        key = (dst, src)
        self.assignments[key] = self.assignments[key] | guard if key in self.assignments else guard

    def guard(self, event: str, first: int, last: int) -> Guard:
        if event not in self.interfaced:
            return TRUE
        return stages(fsm_name(event), first, last)

    def source(self, arg) -> Value:
        if isinstance(arg, Literal):
            return arg.value
        if arg.owner is None:
            return arg.port
        return "{}.{}".format(self.scope.invocations[arg.owner].instance, arg.port)

    def lower_invoke(self, invoke: Invoke):
        callee = self.scope.instance_component(invoke.instance).signature
        binding = dict(zip(callee.event_names, invoke.events))
        signature = substitute(callee, binding)
        for binding_event, start in zip(callee.events, invoke.events):
            if binding_event.is_phantom:
                continue
            if start.base not in self.interfaced:
                raise InternalError("phantom event {} triggers {}.{}".format(
                    start.base, invoke.instance, binding_event.interface_port))
            self.assign("{}.{}".format(invoke.instance, binding_event.interface_port),
                        self.guard(start.base, start.offset, start.offset + 1), 1)
        for port, arg in zip(signature.data_inputs, invoke.ports):
            interval = port.interval
            if not interval.same_base:
                raise InternalError("requirement {} of {}.{} spans two events".format(
                    interval, invoke.name, port.name))
            guard = self.guard(interval.start.base, interval.start.offset, interval.end.offset)
            self.assign("{}.{}".format(invoke.instance, port.name), guard, self.source(arg))

    def run(self) -> LowComponent:
        fsms = []
        for event, trigger in self.interfaced.items():
            states = compute_fsm_states(self.resolved, self.component.name, event)
            if states:
                fsms.append(FsmDecl(fsm_name(event), states, trigger, event))
                logger.debug("FSM {} of {} has {} states".format(fsm_name(event),
                                                                 self.component.name, states))
        for command in self.component.body:
            if isinstance(command, Invoke):
                self.lower_invoke(command)
        for connect in self.component.commands(Connect):
            self.assign(connect.dst.port, TRUE, self.source(connect.src))
        assignments = tuple(Assignment(dst, guard, src)
                            for (dst, src), guard in self.assignments.items())
        return LowComponent(self.component.name, self.signature, tuple(fsms),
                            self.component.commands(Instantiate), assignments)


def lower_component(resolved: ResolvedProgram, name: str) -> LowComponent:
    return _Lowerer(resolved, name).run()


def verify_low(program: Union[LowProgram, LowComponent]) -> List[Diagnostic]:
    """Guards of one destination never overlap and every stage exists

    Returns
    -------
    list of Diagnostic:
        OverlappingGuards and StageOutOfRange diagnostics; empty when the program is sound
    """
    components = program.components if isinstance(program, LowProgram) else (program,)
    diagnostics = []
    for component in components:
        by_dst: Dict[str, List[Assignment]] = OrderedDict()
        for assignment in component.assignments:
            by_dst.setdefault(assignment.dst, []).append(assignment)
            for fsm_ref, stage in sorted(assignment.guard.stages):
                fsm = component.fsm(fsm_ref)
                if fsm is None or not 0 <= stage < fsm.states:
                    diagnostics.append(Diagnostic(
                        ErrorCode.StageOutOfRange,
                        "`{}` in {}: stage {} of `{}` does not exist".format(
                            assignment, component.name, stage, fsm_ref)))
        for dst, assignments in by_dst.items():
            for index, first in enumerate(assignments):
                for second in assignments[index + 1:]:
                    if first.guard.overlaps(second.guard):
                        diagnostics.append(Diagnostic(
                            ErrorCode.OverlappingGuards,
                            "`{}` and `{}` in {} may drive `{}` in the same cycle".format(
                                first, second, component.name, dst)))
    return sort_diagnostics(diagnostics)


def lower(resolved: ResolvedProgram, names: Optional[Iterable[str]] = None) -> LowProgram:
    """Lower the user components of a type checked program

    Raises
    ------
    InternalError
        If the lowered program fails :func:`verify_low`
    """
    names = resolved.user_components if names is None else tuple(names)
    components = tuple(lower_component(resolved, name) for name in names)
    externs = {}
    for name in resolved.order:
        component = resolved.component(name)
        if component.is_extern:
            externs[name] = component.signature
    program = LowProgram(components, externs, resolved.entry)
    diagnostics = verify_low(program)
    if diagnostics:
        raise InternalError("lowering produced an unsound program", diagnostics)
    logger.info("Lowered {} components".format(len(components)))
    return program


def with_fsm_states(component: LowComponent, fsm: str, states: int) -> LowComponent:
    """Copy of a lowered component with a resized FSM"""
    fsms = tuple(replace(decl, states=states) if decl.name == fsm else decl
                 for decl in component.fsms)
    return replace(component, fsms=fsms)
