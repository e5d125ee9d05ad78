"""
Type checker of filament components.

Every rule is a difference constraint handed to :func:`filament.event_algebra.prove`; an
unprovable side condition is reported as a failed check. One pass collects all diagnostics
of a component.

Checks that can be switched off (``disabled_checks``), e.g. to measure what the oracle
catches without them:

* ``delay_wellformed``: every event delay covers the intervals starting at the event
* ``valid_reads``: every read source is available whenever the destination requires it
* ``conflicts``: invocations of one instance claim disjoint busy windows
* ``trigger``: a scheduling event retriggers no faster than the callee allows
* ``shared_reuse``: a shared instance finishes all its uses within one period of its event
* ``phantom``: phantom events share no instance and trigger no interface port
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from filament.diagnostics import (Diagnostic, ErrorCode, EventError, Span, TypeCheckError,
                                  sort_diagnostics)
from filament.event_algebra import (Const, ConstraintSet, DelayExpr, Diff, EventExpr, Interval,
                                    contains, delay_at_least, disjoint, nonempty, prove,
                                    span_length, substitute)
from filament.resolve import ComponentScope, ResolvedProgram
from filament.syntax import ComponentDef, Connect, Invoke, Literal, Signature

logger = logging.getLogger(__name__)

CHECKS = ("delay_wellformed", "valid_reads", "conflicts", "trigger", "shared_reuse", "phantom")

DelayEnv = Dict[str, DelayExpr]


@dataclass(frozen=True)
class Claim:
    """Busy window of one event of an instance, taken by an invocation"""
    instance: str
    event: str
    interval: Interval
    invocation: str
    span: Span = field(default=Span(), compare=False)


@dataclass
class ResourceLedger:
    """Claimed busy windows per (instance, callee event) and the availability of every
    readable port"""
    claims: Dict[Tuple[str, str], List[Claim]] = field(default_factory=dict)
    availability: Dict[str, Interval] = field(default_factory=dict)

    def claim(self, claim: Claim, cs: ConstraintSet) -> Optional[Claim]:
        """Record ``claim``; returns the first earlier claim it overlaps, if any"""
        previous = self.claims.setdefault((claim.instance, claim.event), [])
        overlap = next((other for other in previous
                        if not disjoint(other.interval, claim.interval, cs)), None)
        previous.append(claim)
        return overlap

    def claims_of(self, instance: str) -> List[Claim]:
        return [claim for (owner, _), claims in sorted(self.claims.items()) if owner == instance
                for claim in claims]

    def bind(self, name: str, interval: Interval):
        self.availability[name] = interval


def signature_constraints(signature: Signature) -> ConstraintSet:
    return ConstraintSet.for_events(signature.event_names, signature.where)


def width_of(signature: Signature, port_name: str, params: Dict[str, int]) -> Optional[int]:
    port = signature.port(port_name)
    if port is None:
        return None
    return signature.width_of(port, params)


def check_delay_wellformed(component: ComponentDef, cs: Optional[ConstraintSet] = None
                           ) -> List[Diagnostic]:
    """Each event delay is at least one cycle and at least as long as every interval that
    starts at the event; user components need constant delays"""
    signature = component.signature
    cs = cs or signature_constraints(signature)
    diagnostics = []
    for binding in signature.events:
        delay = binding.delay
        if isinstance(delay, Diff) and not component.is_extern:
            diagnostics.append(Diagnostic(
                ErrorCode.NonConstantDelay,
                "event `{}` of `{}` has the delay {}; user components need constant "
                "delays".format(binding.var, component.name, delay), binding.span))
            continue
        if not delay_at_least(delay, 1, cs):
            diagnostics.append(Diagnostic(
                ErrorCode.DelayTooShort,
                "event `{}` has the delay {}; delays must be at least 1 cycle".format(
                    binding.var, delay), binding.span))
            continue
        for port in signature.ports:
            if port.is_pass_through or port.interval.start.base != binding.var:
                continue
            length = span_length(port.interval, cs)
            if not delay_at_least(delay, length, cs):
                diagnostics.append(Diagnostic(
                    ErrorCode.DelayTooShort,
                    "event `{}` has the delay {} but `{}` is live during {} ({} cycles)".format(
                        binding.var, delay, port.name, port.interval, length), port.span,
                    related=((binding.span, "event `{}` declared here".format(binding.var)),),
                    notes=("a new {} may arrive while `{}` is still in use".format(
                        binding.var, port.name),)))
    return diagnostics


def check_intervals_nonempty(signature: Signature, cs: ConstraintSet) -> List[Diagnostic]:
    diagnostics = []
    for port in signature.ports:
        if port.is_pass_through:
            continue
        if not nonempty(port.interval, cs):
            diagnostics.append(Diagnostic(
                ErrorCode.EmptyInterval,
                "the interval {} of `{}` may be empty".format(port.interval, port.name),
                port.span))
    return diagnostics


def check_connect(dst: str, req: Interval, src, ledger: ResourceLedger, cs: ConstraintSet,
                  span: Optional[Span] = None) -> Optional[Diagnostic]:
    """The source of a connection is available whenever the destination requires it

    Parameters
    ----------
    dst: str
        Name of the destination, used in the message
    req: Interval
        Requirement of the destination
    src: PortRef or Literal
        The source. Literals are always available
    ledger: ResourceLedger
        Holds the availability of every readable port
    cs: ConstraintSet
        Facts of the enclosing component

    Returns
    -------
    Diagnostic or None
    """
    if isinstance(src, Literal):
        return None
    avail = ledger.availability.get(str(src))
    if avail is None:
        return None
    if contains(avail, req, cs):
        return None
    return Diagnostic(
        ErrorCode.InsufficientAvailability,
        "source `{}` is available during {} but `{}` requires it during {}".format(
            src, avail, dst, req),
        span or src.span, label="available during {}".format(avail),
        notes=("required during {}".format(req),))


class ComponentChecker(object):
    """Checks the body of one user component

    Parameters
    ----------
    resolved: ResolvedProgram
        The program the component belongs to
    name: str
        Component to check
    disabled_checks: iterable of str
        Names from :data:`CHECKS` to skip
    """

    def __init__(self, resolved: ResolvedProgram, name: str,
                 disabled_checks: Iterable[str] = frozenset()):
        self.resolved = resolved
        self.scope: ComponentScope = resolved.scope(name)
        self.component = self.scope.component
        self.signature = self.component.signature
        self.disabled: FrozenSet[str] = frozenset(disabled_checks)
        self.cs = signature_constraints(self.signature)
        self.delays: DelayEnv = {b.var: b.delay for b in self.signature.events}
        self.ledger = ResourceLedger()
        self.diagnostics: List[Diagnostic] = []

    def enabled(self, check: str) -> bool:
        return check not in self.disabled

    def report(self, diagnostic: Optional[Diagnostic]):
        if diagnostic is not None:
            self.diagnostics.append(diagnostic)

    def run(self) -> List[Diagnostic]:
        if not self.cs.consistent:
            self.report(Diagnostic(ErrorCode.InconsistentFacts,
                                   "the ordering constraints of `{}` are contradictory".format(
                                       self.component.name), self.signature.span))
            return self.diagnostics
        self.diagnostics.extend(check_intervals_nonempty(self.signature, self.cs))
        if self.enabled("delay_wellformed"):
            self.diagnostics.extend(check_delay_wellformed(self.component, self.cs))
        if self.component.is_extern:
            return self.diagnostics

        for port in self.signature.inputs:
            if not port.is_pass_through:
                self.ledger.bind(port.name, port.interval)
        for command in self.component.body:
            if isinstance(command, Invoke):
                self.check_invoke(command)
            elif isinstance(command, Connect):
                self.check_output_connect(command)
        self.check_outputs_driven()
        if self.enabled("shared_reuse"):
            self.check_shared_reuse()
        if self.enabled("phantom"):
            self.check_phantom()
        return self.diagnostics

    def source_width(self, src) -> Optional[int]:
        if isinstance(src, Literal):
            return None
        if src.owner is None:
            return width_of(self.signature, src.port, {})
        invoke = self.scope.invocations.get(src.owner)
        if invoke is None:
            return None
        callee = self.scope.instance_component(invoke.instance).signature
        return width_of(callee, src.port, self.scope.instance_params(invoke.instance))

    def check_width(self, dst: str, width: Optional[int], src, span):
        if width is None:
            return
        if isinstance(src, Literal):
            if src.value >= 2 ** width:
                self.report(Diagnostic(ErrorCode.WidthMismatch,
                                       "literal {} does not fit the {} bit port `{}`".format(
                                           src.value, width, dst), src.span or span))
            return
        source_width = self.source_width(src)
        if source_width is not None and source_width != width:
            self.report(Diagnostic(ErrorCode.WidthMismatch,
                                   "`{}` is {} bits wide but `{}` is {} bits wide".format(
                                       src, source_width, dst, width), src.span or span))

    def check_invoke(self, invoke: Invoke):
        callee = self.scope.instance_component(invoke.instance)
        params = self.scope.instance_params(invoke.instance)
        binding = self.scope.binding(invoke.name)
        try:
            signature = substitute(callee.signature, binding)
        except EventError as err:
            self.report(Diagnostic(err.code, str(err), invoke.span))
            return

        for constraint in signature.where:
            if not prove(self.cs, constraint):
                self.report(Diagnostic(
                    ErrorCode.UnsatisfiedConstraint,
                    "`{}` requires {} which does not hold for this invocation".format(
                        callee.name, constraint), invoke.span))

        # valid reads
        for port, arg in zip(signature.data_inputs, invoke.ports):
            dst = "{}.{}".format(invoke.name, port.name)
            self.check_width(dst, callee.signature.width_of(port, params), arg, invoke.span)
            if self.enabled("valid_reads"):
                self.report(check_connect(dst, port.interval, arg, self.ledger, self.cs))
        for port in signature.outputs:
            if not port.is_pass_through:
                self.ledger.bind("{}.{}".format(invoke.name, port.name), port.interval)

        for binding_event in signature.events:
            start = binding[binding_event.var]
            delay = binding_event.delay
            if isinstance(delay, Diff):
                self.report(Diagnostic(
                    ErrorCode.NonConstantDelay,
                    "event `{}` of `{}` has the delay {} under this invocation; it must be a "
                    "constant".format(binding_event.var, callee.name, delay), invoke.span))
                continue
            if delay.value < 1:
                continue
            try:
                busy = Interval(start, start + delay.value)
            except EventError as err:
                self.report(Diagnostic(err.code, str(err), invoke.span))
                continue
            claim = Claim(invoke.instance, binding_event.var, busy, invoke.name, invoke.span)
            overlap = self.ledger.claim(claim, self.cs)
            if overlap is not None and self.enabled("conflicts"):
                self.report(Diagnostic(
                    ErrorCode.InstanceConflict,
                    "instance `{}` is busy during {} for `{}` and is invoked again by `{}` "
                    "during {}".format(invoke.instance, overlap.interval, overlap.invocation,
                                       invoke.name, claim.interval), invoke.span,
                    related=((overlap.span, "`{}` claims {}".format(
                        overlap.invocation, overlap.interval)),)))
            if self.enabled("trigger"):
                self.check_trigger(invoke, callee, binding_event.var, start, delay)

    def check_trigger(self, invoke: Invoke, callee: ComponentDef, event: str, start: EventExpr,
                      delay: Const):
        caller_delay = self.delays.get(start.base)
        if caller_delay is None or isinstance(caller_delay, Diff):
            return
        if not delay_at_least(caller_delay, delay.value, self.cs):
            self.report(Diagnostic(
                ErrorCode.UnsafeTrigger,
                "event `{}` may retrigger every {} cycles but `{}` (event `{}`) accepts a new "
                "invocation only every {} cycles".format(start.base, caller_delay, callee.name,
                                                         event, delay), invoke.span,
                notes=("the delay of `{}` must be at least {}".format(start.base, delay),)))

    def check_output_connect(self, connect: Connect):
        port = self.signature.output(connect.dst.port)
        if port is None:
            return
        dst = connect.dst.port
        self.check_width(dst, self.signature.width_of(port, {}), connect.src, connect.span)
        if self.enabled("valid_reads"):
            self.report(check_connect(dst, port.interval, connect.src, self.ledger, self.cs))

    def check_outputs_driven(self):
        driven = {connect.dst.port for connect in self.component.commands(Connect)}
        for port in self.signature.outputs:
            if port.name not in driven:
                self.report(Diagnostic(ErrorCode.UnassignedOutput,
                                       "output `{}` of `{}` is never assigned".format(
                                           port.name, self.component.name), port.span))

    def check_shared_reuse(self):
        for instance in self.scope.instances:
            if len(self.scope.invocations_of(instance)) < 2:
                continue
            claims = self.ledger.claims_of(instance)
            if not claims:
                continue
            bases = sorted({claim.interval.start.base for claim in claims})
            first = min(claims, key=lambda c: c.span)
            if len(bases) > 1:
                self.report(Diagnostic(
                    ErrorCode.MixedEventSharing,
                    "instance `{}` is shared by invocations scheduled by different events "
                    "({})".format(instance, ", ".join(bases)), first.span,
                    notes=("all invocations of a shared instance must use the same event",)))
                continue
            base = bases[0]
            begin = min(claim.interval.start.offset for claim in claims)
            end = max(claim.interval.end.offset for claim in claims)
            caller_delay = self.delays.get(base)
            if caller_delay is None or isinstance(caller_delay, Diff):
                continue
            if not delay_at_least(caller_delay, end - begin, self.cs):
                self.report(Diagnostic(
                    ErrorCode.PipelineSpanExceedsDelay,
                    "instance `{}` is in use during {} ({} cycles) but event `{}` may "
                    "retrigger every {} cycles".format(
                        instance, Interval(EventExpr(base, begin), EventExpr(base, end)),
                        end - begin, base, caller_delay), first.span,
                    notes=("the delay of `{}` must be at least {}".format(base, end - begin),)))

    def check_phantom(self):
        phantoms = set(self.signature.phantom_events)
        if not phantoms:
            return
        for instance in self.scope.instances:
            invocations = self.scope.invocations_of(instance)
            for event in sorted(phantoms):
                users = [inv for inv in invocations
                         if any(e.base == event for e in inv.events)]
                if len(users) > 1:
                    self.report(Diagnostic(
                        ErrorCode.PhantomSharing,
                        "phantom event `{}` schedules instance `{}` more than once ({})".format(
                            event, instance, ", ".join(inv.name for inv in users)),
                        users[1].span))
        for invoke in self.scope.invocations.values():
            callee = self.scope.instance_component(invoke.instance).signature
            for binding, event in zip(callee.events, invoke.events):
                if event.base in phantoms and not binding.is_phantom:
                    self.report(Diagnostic(
                        ErrorCode.PhantomDrivesInterfaced,
                        "phantom event `{}` cannot trigger the interface port `{}` of "
                        "`{}`".format(event.base, binding.interface_port, callee.name),
                        invoke.span,
                        notes=("phantom events have no signal to drive `{}`".format(
                            binding.interface_port),)))


def check_component(resolved: ResolvedProgram, name: str,
                    disabled_checks: Iterable[str] = frozenset()) -> ComponentChecker:
    checker = ComponentChecker(resolved, name, disabled_checks)
    try:
        checker.run()
    except EventError as err:
        checker.report(Diagnostic(err.code, str(err), checker.signature.span))
    return checker


def typecheck(resolved: ResolvedProgram, disabled_checks: Iterable[str] = frozenset()
              ) -> List[Diagnostic]:
    """Check every component, callees before callers

    Parameters
    ----------
    resolved: ResolvedProgram
        Output of :func:`filament.resolve.resolve`
    disabled_checks: iterable of str, optional
        Names from :data:`CHECKS` to skip

    Returns
    -------
    list of Diagnostic:
        Empty when the program is well typed; otherwise sorted by source position
    """
    unknown = set(disabled_checks) - set(CHECKS)
    if unknown:
        raise ValueError("unknown checks: {}".format(", ".join(sorted(unknown))))
    diagnostics = []
    for name in resolved.order:
        checker = check_component(resolved, name, disabled_checks)
        logger.debug("Checked {:20s} : {} diagnostics".format(name, len(checker.diagnostics)))
        diagnostics.extend(checker.diagnostics)
    logger.info("Type checked {} components, {} diagnostics".format(len(resolved.order),
                                                                     len(diagnostics)))
    return sort_diagnostics(diagnostics)


def check_program(resolved: ResolvedProgram, disabled_checks: Iterable[str] = frozenset()
                  ) -> ResolvedProgram:
    """Return ``resolved`` when it is well typed

    Raises
    ------
    TypeCheckError
        Carrying the sorted diagnostics of :func:`typecheck`
    """
    diagnostics = typecheck(resolved, disabled_checks)
    if diagnostics:
        raise TypeCheckError(diagnostics)
    return resolved
