"""
Executable log semantics of filament programs.

A :class:`Log` records, for every clock cycle, the set of ports read and the multiset of
ports written. A log is well formed when no port is written twice in a cycle and every
read port is written in that cycle. Running a component twice, the second run shifted by
``n`` cycles, must give a well formed log for every ``n`` at least the delay of the
component; that is what safe pipelining means and what :func:`pipelined_well_formed`
decides by enumeration.

Port names in logs:

* ``p``: port ``p`` of the checked component, written by its environment (inputs and
  interface ports) or read by it (outputs)
* ``I.p``: physical port ``p`` of instance ``I``, written by every invocation of ``I``
* ``x.p``: placeholder of port ``p`` of invocation ``x``; inputs are read, outputs written
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from filament.event_algebra import Const, Interval, evaluate, substitute
from filament.resolve import ResolvedProgram
from filament.syntax import (Compose, Connect, Instantiate, Invoke, Literal, PortRef, Signature,
                             compose)

logger = logging.getLogger(__name__)


class Log(object):
    """Reads and writes per cycle

    Parameters
    ----------
    cycles: dict, optional
        cycle -> (iterable of read ports, iterable or Counter of written ports)

    Notes
    -----
    A log is a value: no method changes it in place
    """

    def __init__(self, cycles: Optional[Mapping[int, Tuple[Iterable[str], Iterable[str]]]] = None):
        self._cycles: Dict[int, Tuple[FrozenSet[str], Counter]] = {}
        for cycle, (reads, writes) in (cycles or {}).items():
            if cycle < 0:
                raise ValueError("cycle {} is negative".format(cycle))
            reads = frozenset(reads)
            writes = Counter(writes)
            if reads or writes:
                self._cycles[cycle] = (reads, writes)

    @classmethod
    def from_windows(cls, reads: Iterable[Tuple[str, range]] = (),
                     writes: Iterable[Tuple[str, range]] = ()) -> "Log":
        """Log of ports read or written over ranges of cycles"""
        cycles: Dict[int, Tuple[set, Counter]] = {}
        for port, window in reads:
            for cycle in window:
                cycles.setdefault(cycle, (set(), Counter()))[0].add(port)
        for port, window in writes:
            for cycle in window:
                cycles.setdefault(cycle, (set(), Counter()))[1][port] += 1
        return cls(cycles)

    @property
    def cycles(self) -> List[int]:
        return sorted(self._cycles)

    @property
    def horizon(self) -> int:
        """Last touched cycle, -1 for the empty log"""
        return max(self._cycles) if self._cycles else -1

    def reads(self, cycle: int) -> FrozenSet[str]:
        return self._cycles.get(cycle, (frozenset(), Counter()))[0]

    def writes(self, cycle: int) -> Counter:
        return Counter(self._cycles.get(cycle, (frozenset(), Counter()))[1])

    def items(self):
        for cycle in self.cycles:
            yield cycle, self._cycles[cycle][0], Counter(self._cycles[cycle][1])

    def union(self, *others: "Log") -> "Log":
        """Cycle wise union of the reads and multiset union of the writes"""
        cycles = {cycle: (set(reads), writes) for cycle, reads, writes in self.items()}
        for other in others:
            for cycle, reads, writes in other.items():
                entry = cycles.setdefault(cycle, (set(), Counter()))
                entry[0].update(reads)
                entry[1].update(writes)
        return Log(cycles)

    __or__ = union

    def shift(self, n: int) -> "Log":
        return Log({cycle + n: (reads, writes) for cycle, reads, writes in self.items()})

    def replace_read(self, dst: str, src: str) -> "Log":
        """Reads of ``dst`` become reads of ``src`` in every cycle that writes ``src``"""
        cycles = {}
        for cycle, reads, writes in self.items():
            if src in writes and dst in reads:
                reads = (reads - {dst}) | {src}
            cycles[cycle] = (reads, writes)
        return Log(cycles)

    def remove_read(self, port: str) -> "Log":
        return Log({cycle: (reads - {port}, writes) for cycle, reads, writes in self.items()})

    def well_formed(self) -> "Verdict":
        return well_formed(self)

    def dump(self, horizon: Optional[int] = None) -> str:
        """One line per cycle: ``t=<n> R={a, b} W={go, out×2}``"""
        horizon = self.horizon if horizon is None else horizon
        lines = []
        for cycle in range(horizon + 1):
            reads = ", ".join(sorted(self.reads(cycle)))
            writes = ", ".join(port if count == 1 else "{}×{}".format(port, count)
                               for port, count in sorted(self.writes(cycle).items()))
            lines.append("t={} R={{{}}} W={{{}}}".format(cycle, reads, writes))
        return "\n".join(lines) + ("\n" if lines else "")

    def __eq__(self, other):
        if not isinstance(other, Log):
            return NotImplemented
        return self._cycles == other._cycles

    def __repr__(self):
        return "Log({})".format({cycle: (sorted(reads), dict(writes))
                                 for cycle, reads, writes in self.items()})


@dataclass(frozen=True)
class Verdict:
    """Outcome of an oracle check; ``witness`` locates the first violation"""
    ok: bool
    witness: Optional[tuple] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def well_formed(log: Log) -> Verdict:
    """A log is well formed when no cycle writes a port twice and every read is written

    Returns
    -------
    Verdict:
        With witness ``(cycle, port)`` of the first violation

    Examples
    --------
    >>> bool(well_formed(Log({0: ({"l"}, {"l", "out"})})))
    True
    >>> well_formed(Log({0: ((), ["out", "out"])})).witness
    (0, 'out')
    """
    for cycle, reads, writes in log.items():
        duplicates = sorted(port for port, count in writes.items() if count > 1)
        if duplicates:
            return Verdict(False, (cycle, duplicates[0]),
                           "`{}` is written {} times in cycle {}".format(
                               duplicates[0], writes[duplicates[0]], cycle))
        unwritten = sorted(reads - set(writes))
        if unwritten:
            return Verdict(False, (cycle, unwritten[0]),
                           "`{}` is read in cycle {} but not written".format(unwritten[0], cycle))
    return Verdict(True)


def _window(interval: Interval, grounding: Mapping[str, int]) -> range:
    return range(interval.start.ground(grounding), interval.end.ground(grounding))


def _grounded_delay(delay, grounding: Mapping[str, int]) -> int:
    return max(evaluate(delay, grounding), 0)


def component_log(signature: Signature, grounding: Optional[Mapping[str, int]] = None) -> Log:
    """Partial log of a component signature: inputs read, outputs written and every
    interface port written for the delay of its event

    Parameters
    ----------
    signature: Signature
        The component signature
    grounding: dict, optional
        Cycle of every event. Events default to cycle 0
    """
    grounding = {event: 0 for event in signature.event_names} | dict(grounding or {})
    reads = [(p.name, _window(p.interval, grounding)) for p in signature.data_inputs]
    writes = [(p.name, _window(p.interval, grounding)) for p in signature.outputs
              if not p.is_pass_through]
    writes.extend(_interface_writes(signature, grounding, lambda port: port))
    return Log.from_windows(reads, writes)


def environment_log(signature: Signature, grounding: Mapping[str, int]) -> Log:
    """Mirror of :func:`component_log`: what the environment of a component does"""
    writes = [(p.name, _window(p.interval, grounding)) for p in signature.data_inputs]
    writes.extend(_interface_writes(signature, grounding, lambda port: port))
    reads = [(p.name, _window(p.interval, grounding)) for p in signature.outputs
             if not p.is_pass_through]
    return Log.from_windows(reads, writes)


def _interface_writes(signature: Signature, grounding, name):
    for binding in signature.events:
        if binding.is_phantom:
            continue
        start = grounding[binding.var]
        delay = _grounded_delay(binding.delay, grounding)
        yield name(binding.interface_port), range(start, start + delay)


class Semantics(object):
    """Log semantics of the body of one user component under a grounding of its events

    Parameters
    ----------
    resolved: ResolvedProgram
        The program
    name: str
        The component
    grounding: dict, optional
        Cycle of every event of the component; events default to cycle 0
    """

    def __init__(self, resolved: ResolvedProgram, name: str,
                 grounding: Optional[Mapping[str, int]] = None):
        self.scope = resolved.scope(name)
        self.signature = self.scope.component.signature
        self.grounding = {event: 0 for event in self.signature.event_names} | dict(grounding or {})

    def invocation_log(self, invoke: Invoke) -> Log:
        """Ports touched by an invocation before its arguments are connected"""
        callee = self.scope.instance_component(invoke.instance).signature
        binding = dict(zip(callee.event_names, invoke.events))
        signature = substitute(callee, binding)
        callee_grounding = {var: event.ground(self.grounding) for var, event in binding.items()}

        reads, writes = [], []
        for port in signature.data_inputs:
            window = _window(port.interval, self.grounding)
            writes.append(("{}.{}".format(invoke.instance, port.name), window))
            reads.append(("{}.{}".format(invoke.name, port.name), window))
        for port in signature.outputs:
            if not port.is_pass_through:
                writes.append(("{}.{}".format(invoke.name, port.name),
                               _window(port.interval, self.grounding)))
        for event in callee.events:
            if event.is_phantom:
                continue
            start = callee_grounding[event.var]
            delay = _grounded_delay(event.delay, callee_grounding)
            writes.append(("{}.{}".format(invoke.instance, event.interface_port),
                           range(start, start + delay)))
        return Log.from_windows(reads, writes)

    def argument_connects(self, invoke: Invoke) -> List[Connect]:
        callee = self.scope.instance_component(invoke.instance).signature
        return [Connect(PortRef(invoke.name, port.name), arg, invoke.span)
                for port, arg in zip(callee.data_inputs, invoke.ports)]

    def eval(self, command, log: Log) -> Log:
        return eval_command(command, log, self)

    def eval_invoke(self, invoke: Invoke, log: Log) -> Log:
        extended = log.union(self.invocation_log(invoke))
        return eval_command(compose(self.argument_connects(invoke)), extended, self)

    def body_log(self) -> Log:
        """Log of the environment and the body: all invocations first, then all connections"""
        log = environment_log(self.signature, self.grounding)
        invokes = self.scope.component.commands(Invoke)
        log = log.union(*(self.invocation_log(invoke) for invoke in invokes))
        connects = [connect for invoke in invokes for connect in self.argument_connects(invoke)]
        connects.extend(self.scope.component.commands(Connect))
        return self.eval(compose(connects), log)


def merge_effects(base: Log, first: Log, second: Log) -> Log:
    """Apply the changes that ``first`` and ``second`` each made to ``base`` together"""
    cycles = {}
    for cycle in set(base.cycles) | set(first.cycles) | set(second.cycles):
        reads = set(base.reads(cycle))
        writes = base.writes(cycle)
        for result in (first, second):
            reads -= base.reads(cycle) - result.reads(cycle)
        for result in (first, second):
            reads |= result.reads(cycle) - base.reads(cycle)
            writes.update(result.writes(cycle) - base.writes(cycle))
        cycles[cycle] = (reads, writes)
    return Log(cycles)


def eval_command(command, log: Log, semantics: Optional[Semantics] = None) -> Log:
    """Transform a log by one command

    Instantiation is the identity. A connection replaces the reads of its destination by
    its source in every cycle that writes the source; a literal source removes the reads.
    Composition applies both commands to the same log and merges their effects. An
    invocation adds its ports and connects its arguments, which needs the
    :class:`Semantics` of the enclosing component.

    Examples
    --------
    >>> log = Log({0: ({"in"}, {"out"})})
    >>> eval_command(Connect(PortRef(None, "in"), PortRef(None, "out")), log).reads(0)
    frozenset({'out'})
    """
    if command is None or isinstance(command, Instantiate):
        return log
    if isinstance(command, Connect):
        dst = str(command.dst)
        if isinstance(command.src, Literal):
            return log.remove_read(dst)
        return log.replace_read(dst, str(command.src))
    if isinstance(command, Compose):
        return merge_effects(log, eval_command(command.first, log, semantics),
                             eval_command(command.second, log, semantics))
    if isinstance(command, Invoke):
        if semantics is None:
            raise ValueError("evaluating an invocation needs the semantics of its component")
        return semantics.eval_invoke(command, log)
    raise TypeError("cannot evaluate {!r}".format(command))


def body_log(resolved: ResolvedProgram, name: str,
             grounding: Optional[Mapping[str, int]] = None) -> Log:
    return Semantics(resolved, name, grounding).body_log()


def pipelined_well_formed(resolved: ResolvedProgram, name: str, delay: Optional[int] = None,
                          bound: Optional[int] = None) -> Verdict:
    """Decide whether two runs of a component, ``n`` cycles apart, never clash

    Every ``n`` from the delay of an event up to the last cycle the log touches is tried;
    larger shifts give runs that share no cycle. Events other than the one being checked
    are moved beyond the reach of the first run.

    Parameters
    ----------
    resolved: ResolvedProgram
        The program
    name: str
        The component
    delay: int, optional
        Use this delay instead of the declared one for every event
    bound: int, optional
        Largest shift to try. Defaults to the horizon of the log

    Returns
    -------
    Verdict:
        With witness ``(n, cycle, port)``
    """
    signature = resolved.signature(name)
    base = body_log(resolved, name)
    horizon = base.horizon if bound is None else bound
    far = 2 * (max(base.horizon, horizon) + 1)
    for binding in signature.events:
        if delay is not None:
            first = delay
        elif isinstance(binding.delay, Const):
            first = binding.delay.value
        else:
            logger.debug("Skipping event {} with delay {}".format(binding.var, binding.delay))
            continue
        for n in range(max(first, 1), horizon + 1):
            grounding = {event: far for event in signature.event_names}
            grounding[binding.var] = n
            verdict = well_formed(base.union(body_log(resolved, name, grounding)))
            if not verdict:
                logger.debug("Pipelining {} with shift {} fails: {}".format(name, n,
                                                                           verdict.reason))
                return Verdict(False, (n,) + verdict.witness,
                               "shift {}: {}".format(n, verdict.reason))
    return Verdict(True)


def check_component(resolved: ResolvedProgram, name: str) -> Verdict:
    """Well formedness of a single run followed by safe pipelining"""
    verdict = well_formed(body_log(resolved, name))
    if not verdict:
        return verdict
    return pipelined_well_formed(resolved, name)
