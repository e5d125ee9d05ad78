"""
Cycle accurate simulation of lowered designs.

Both a Low filament program and the netlist emitted from it are flattened into a
:class:`Circuit`: nets, combinational assignments, FSM shift registers and primitive
instances driven by their behavioral models. Net names are those of the Low program
(``A.left``, ``Gf._2``); nets of nested user components are prefixed with the instance path
(``sub/A.left``). The evaluation order of the combinational nets is fixed once when the
circuit is built.

A Low circuit leaves undriven nets invalid (:data:`filament.primitives.INVALID`) so that
reads outside of an availability window are visible; a netlist circuit behaves like the
emitted Verilog and drives 0 instead.
"""

import graphlib
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import pandas as pd

from filament.diagnostics import (CombinationalLoop, Diagnostic, ErrorCode, InternalError,
                                  MissingPrimitive, WidthMismatch)
from filament.global_vars import PASS_THROUGH_PORTS
from filament.lowering import LowComponent, LowProgram
from filament.primitives import INVALID, PrimitiveModel, is_valid, lookup_primitive, mask
from filament.syntax import Signature
from filament.verilog_backend import NetlistModule

logger = logging.getLogger(__name__)

HIERARCHY_SEPARATOR = "/"


def stage_name(fsm: str, stage: int) -> str:
    return "{}._{}".format(fsm, stage)


@dataclass
class AssignNode:
    """``dst = c0 ? e0 : c1 ? e1 : default``; conditions are disjunctions of 1-bit nets"""
    dst: str
    width: int
    cases: Tuple[Tuple[Tuple[str, ...], object], ...]
    guarded: bool = True

    @property
    def deps(self) -> Tuple[str, ...]:
        names = []
        for condition, src in self.cases:
            names.extend(condition)
            if isinstance(src, str):
                names.append(src)
        return tuple(names)


@dataclass
class ShiftRegisterNode:
    name: str
    states: int
    trigger: str
    reset: Optional[str] = None
    state: List[int] = field(default_factory=list)

    def __post_init__(self):
        self.state = [0] * self.states

    @property
    def nets(self) -> Tuple[str, ...]:
        return tuple(stage_name(self.name, stage) for stage in range(self.states))


@dataclass
class PrimitiveNode:
    name: str
    model: PrimitiveModel
    inputs: Dict[str, str]
    outputs: Dict[str, str]


class Circuit(object):
    """Flat design: net widths, drivers and the static evaluation order

    Parameters
    ----------
    default: object
        Value of nets that nothing drives in the current cycle
    """

    def __init__(self, name: str, default=INVALID):
        self.name = name
        self.default = default
        self.widths: Dict[str, int] = {}
        self.inputs: List[str] = []
        self.outputs: List[str] = []
        self.assigns: Dict[str, AssignNode] = {}
        self.registers: List[ShiftRegisterNode] = []
        self.primitives: List[PrimitiveNode] = []
        self.order: Tuple[str, ...] = ()
        self._drivers: Dict[str, tuple] = {}

    def add_net(self, name: str, width: int):
        if self.widths.get(name, width) != width:
            raise WidthMismatch("net {} is {} and {} bits wide".format(
                name, self.widths[name], width))
        self.widths[name] = width

    def drive(self, net: str, driver: tuple):
        if net in self._drivers:
            raise InternalError("net {} has two drivers".format(net))
        self._drivers[net] = driver

    def finalize(self):
        """Check widths and compute the evaluation order

        Raises
        ------
        CombinationalLoop
            If the combinational nets form a cycle
        WidthMismatch
            If an assignment reads a net of another width
        """
        graph = graphlib.TopologicalSorter()
        for net in sorted(self.widths):
            graph.add(net)
        for net in self.inputs:
            self.drive(net, ("input",))
        for node in self.assigns.values():
            self.drive(node.dst, ("assign", node))
            for condition, src in node.cases:
                if isinstance(src, str) and self.widths.get(src, node.width) != node.width:
                    raise WidthMismatch("{} ({} bits) reads {} ({} bits)".format(
                        node.dst, node.width, src, self.widths[src]))
            graph.add(node.dst, *node.deps)
        for register in self.registers:
            for stage, net in enumerate(register.nets):
                self.drive(net, ("stage", register, stage))
            graph.add(register.nets[0], register.trigger)
        for node in self.primitives:
            for port, net in node.outputs.items():
                self.drive(net, ("primitive", node, port))
                deps = [node.inputs[p] for p in node.model.comb_deps.get(port, ())
                        if p in node.inputs]
                graph.add(net, *deps)
        for node in self.assigns.values():
            for dep in node.deps:
                if dep not in self.widths:
                    logger.warning("{} reads the undeclared net {}, it stays {!r}".format(
                        node.dst, dep, self.default))
        try:
            self.order = tuple(graph.static_order())
        except graphlib.CycleError as err:
            raise CombinationalLoop("combinational loop through {}".format(
                " -> ".join(err.args[1]))) from err
        logger.debug("Circuit {} has {} nets".format(self.name, len(self.order)))
        return self

    def evaluate(self, values: Dict[str, object], drive: Mapping[str, object], cycle: int,
                 flags: List[Tuple[int, str, str]], activity: set):
        for net in self.order:
            driver = self._drivers.get(net)
            if driver is None:
                values[net] = self.default
            elif driver[0] == "input":
                values[net] = mask(drive.get(net, self.default), self.widths[net])
            elif driver[0] == "assign":
                values[net] = self._assign(driver[1], values, cycle, flags, activity)
            elif driver[0] == "stage":
                register, stage = driver[1], driver[2]
                if stage == 0:
                    values[net] = 1 if values.get(register.trigger) == 1 else 0
                else:
                    values[net] = register.state[stage]
            else:
                node, port = driver[1], driver[2]
                inputs = {p: values.get(n, self.default) for p, n in node.inputs.items()}
                values[net] = node.model.outputs(inputs)[port]

    def _assign(self, node: AssignNode, values, cycle, flags, activity):
        for condition, src in node.cases:
            if condition and not any(values.get(c) == 1 for c in condition):
                continue
            value = src if isinstance(src, int) else values.get(src, self.default)
            if condition:
                activity.add((cycle, node.dst))
                if isinstance(src, str) and not is_valid(value):
                    flags.append((cycle, node.dst, src))
            return mask(value, node.width)
        return self.default

    def tick(self, values: Mapping[str, object]):
        for register in self.registers:
            if register.reset is not None and values.get(register.reset) == 1:
                register.state = [0] * register.states
                continue
            stages = [values[net] for net in register.nets]
            register.state = [0] + stages[:-1]
        for node in self.primitives:
            node.model.tick({p: values.get(n, self.default) for p, n in node.inputs.items()})


def _model(component: str, signature: Signature, params: Mapping[str, int]) -> PrimitiveModel:
    primitive = lookup_primitive(component)
    if primitive is None:
        raise MissingPrimitive([Diagnostic(ErrorCode.MissingPrimitive,
                                           "extern `{}` has no behavioral model".format(
                                               component))])
    width = params.get("WIDTH")
    if width is None:
        width = max((signature.width_of(p, params) for p in signature.outputs), default=1)
    return primitive.model(params, width)


def _add_primitive(circuit: Circuit, path: str, instance: str, component: str,
                   signature: Signature, params: Mapping[str, int],
                   net_of: Mapping[str, str]):
    model = _model(component, signature, params)
    inputs, outputs = {}, {}
    for port in signature.ports:
        if port.is_pass_through:
            continue
        net = net_of[port.name]
        circuit.add_net(net, signature.width_of(port, params))
        if port.direction == "in":
            inputs[port.name] = net
        else:
            outputs[port.name] = net
    circuit.primitives.append(PrimitiveNode(path + instance, model, inputs, outputs))


def _flatten_low(circuit: Circuit, program: LowProgram, component: LowComponent, path: str,
                 port_nets: Mapping[str, str]):

    def net(name: str) -> str:
        return port_nets.get(name, path + name)

    signature = component.signature
    for port in signature.ports:
        circuit.add_net(net(port.name), signature.width_of(port, {}))
    for fsm in component.fsms:
        node = ShiftRegisterNode(path + fsm.name, fsm.states, net(fsm.trigger))
        circuit.registers.append(node)
        for stage_net in node.nets:
            circuit.add_net(stage_net, 1)

    for instantiate in component.instances:
        user = program.component(instantiate.component)
        callee = user.signature if user else program.externs[instantiate.component]
        params = callee.param_values(instantiate.params)
        net_of = {p.name: net("{}.{}".format(instantiate.name, p.name)) for p in callee.ports}
        if user is not None:
            for port in callee.ports:
                circuit.add_net(net_of[port.name], callee.width_of(port, {}))
            _flatten_low(circuit, program, user, path + instantiate.name + HIERARCHY_SEPARATOR,
                         net_of)
        else:
            _add_primitive(circuit, path, instantiate.name, instantiate.component, callee,
                           params, net_of)

    cases: Dict[str, list] = {}
    for assignment in component.assignments:
        condition = tuple(path + stage_name(fsm, stage)
                          for fsm, stage in sorted(assignment.guard.stages))
        src = assignment.src if isinstance(assignment.src, int) else net(assignment.src)
        cases.setdefault(net(assignment.dst), []).append((condition, src))
    for dst, dst_cases in cases.items():
        guarded = any(condition for condition, _ in dst_cases)
        circuit.assigns[dst] = AssignNode(dst, circuit.widths[dst], tuple(dst_cases), guarded)


def load_low(program: LowProgram, top: Optional[str] = None) -> Circuit:
    """Flatten a lowered program rooted at ``top`` (the entry component by default)"""
    top = top or program.entry or program.components[-1].name
    component = program.component(top)
    if component is None:
        raise InternalError("{} is not a lowered component".format(top))
    circuit = Circuit(top, default=INVALID)
    _flatten_low(circuit, program, component, "", {})
    circuit.inputs = [p.name for p in component.signature.inputs]
    circuit.outputs = [p.name for p in component.signature.outputs]
    return circuit.finalize()


def _flatten_netlist(circuit: Circuit, modules: Mapping[str, NetlistModule],
                     signatures: Mapping[str, Signature], module: NetlistModule, path: str,
                     port_nets: Mapping[str, str]):
    # netlist names map back onto the Low names so that both traces line up
    alias = {port.name: port_nets.get(port.name, path + port.name) for port in module.ports}
    for register in module.registers:
        for stage, wire in enumerate(register.stage_nets):
            alias[wire] = path + stage_name(register.name, stage)
    for instance in module.instances:
        for port, wire in instance.connections:
            if port not in PASS_THROUGH_PORTS:
                alias[wire] = path + "{}.{}".format(instance.name, port)

    def net(name: str) -> str:
        return alias.get(name, path + name)

    for port in module.ports:
        circuit.add_net(net(port.name), port.width)
    for wire in module.wires:
        circuit.add_net(net(wire.name), wire.width)
    for register in module.registers:
        node = ShiftRegisterNode(path + register.name, register.states, net(register.trigger),
                                 reset=net("reset"))
        circuit.registers.append(node)
        for stage_net in node.nets:
            circuit.add_net(stage_net, 1)
    for instance in module.instances:
        connections = dict(instance.connections)
        net_of = {port: net(wire) for port, wire in connections.items()}
        if instance.module in modules:
            _flatten_netlist(circuit, modules, signatures, modules[instance.module],
                             path + instance.name + HIERARCHY_SEPARATOR, net_of)
        else:
            signature = signatures[instance.module]
            _add_primitive(circuit, path, instance.name, instance.module, signature,
                           dict(instance.params), net_of)
    for assign in module.assigns:
        cases = tuple((tuple(net(c) for c in condition),
                       src if isinstance(src, int) else net(src))
                      for condition, src in assign.cases)
        guarded = any(condition for condition, _ in cases)
        if not guarded and not cases:
            cases = (((), 0),)
        circuit.assigns[net(assign.dst)] = AssignNode(net(assign.dst), assign.width, cases,
                                                      guarded)


def load_netlist(modules: Mapping[str, NetlistModule], program: LowProgram,
                 top: Optional[str] = None) -> Circuit:
    """Flatten the netlist emitted for ``program``; unselected and undriven nets read 0"""
    top = top or program.entry or program.components[-1].name
    signatures = dict(program.externs)
    signatures.update((c.name, c.signature) for c in program.components)
    circuit = Circuit(top, default=0)
    module = modules[top]
    _flatten_netlist(circuit, modules, signatures, module, "", {})
    circuit.inputs = [p.name for p in module.ports if p.direction == "in"]
    circuit.outputs = [p.name for p in module.ports if p.direction == "out"]
    return circuit.finalize()


class Trace(object):
    """Values of every net in every simulated cycle

    ``flags`` lists the (cycle, destination, source) triples where an active guard selected
    an invalid value; ``activity`` holds the (cycle, destination) pairs of guarded
    assignments that were active.
    """

    def __init__(self, nets: Iterable[str], widths: Mapping[str, int]):
        self.nets = tuple(nets)
        self.widths = dict(widths)
        self.rows: List[Dict[str, object]] = []
        self.flags: List[Tuple[int, str, str]] = []
        self.activity = set()

    @property
    def cycles(self) -> int:
        return len(self.rows)

    def value(self, net: str, cycle: int):
        return self.rows[cycle].get(net, INVALID)

    def column(self, net: str) -> List[object]:
        return [row.get(net, INVALID) for row in self.rows]

    def active(self, net: str) -> List[int]:
        return sorted(cycle for cycle, dst in self.activity if dst == net)

    def to_dataframe(self, nets: Optional[Iterable[str]] = None) -> pd.DataFrame:
        """Cycles as rows and nets as columns; invalid values are None"""
        nets = list(self.nets if nets is None else nets)
        records = [[None if row.get(n, INVALID) is INVALID else row[n] for n in nets]
                   for row in self.rows]
        frame = pd.DataFrame.from_records(records, columns=nets)
        frame.index.name = "cycle"
        return frame

    def to_text(self, nets: Optional[Iterable[str]] = None) -> str:
        """``<cycle> net=value ...`` per cycle, invalid values printed as X"""
        nets = list(self.nets if nets is None else nets)
        lines = []
        for cycle, row in enumerate(self.rows):
            pairs = " ".join("{}={!r}".format(n, row.get(n, INVALID)) for n in nets)
            lines.append("{} {}".format(cycle, pairs))
        return "\n".join(lines) + "\n"

    def to_vcd(self, timescale: str = "1ns", module: str = "top") -> str:
        codes = {net: _vcd_code(index) for index, net in enumerate(self.nets)}
        lines = ["$timescale {} $end".format(timescale), "$scope module {} $end".format(module)]
        for net in self.nets:
            lines.append("$var wire {} {} {} $end".format(self.widths.get(net, 1), codes[net],
                                                         net.replace(HIERARCHY_SEPARATOR, ".")))
        lines.extend(["$upscope $end", "$enddefinitions $end"])
        previous: Dict[str, object] = {}
        for cycle, row in enumerate(self.rows):
            changes = []
            for net in self.nets:
                value = row.get(net, INVALID)
                if net in previous and previous[net] == value:
                    continue
                changes.append(_vcd_value(value, self.widths.get(net, 1), codes[net]))
                previous[net] = value
            if changes:
                lines.append("#{}".format(cycle))
                lines.extend(changes)
        lines.append("#{}".format(self.cycles))
        return "\n".join(lines) + "\n"

    def mismatches(self, other: "Trace", nets: Optional[Iterable[str]] = None):
        """(cycle, net, mine, theirs) wherever this trace is valid and the other differs"""
        nets = self.nets if nets is None else tuple(nets)
        result = []
        for cycle in range(min(self.cycles, other.cycles)):
            for net in nets:
                mine = self.value(net, cycle)
                if is_valid(mine) and other.value(net, cycle) != mine:
                    result.append((cycle, net, mine, other.value(net, cycle)))
        return result


def _vcd_code(index: int) -> str:
    code = ""
    index += 1
    while index:
        index, digit = divmod(index - 1, 94)
        code += chr(33 + digit)
    return code


def _vcd_value(value, width: int, code: str) -> str:
    if width == 1:
        return "{}{}".format("x" if value is INVALID else value & 1, code)
    bits = "x" if value is INVALID else format(value, "b")
    return "b{} {}".format(bits, code)


def simulate(circuit: Circuit, inputs: Mapping[int, Mapping[str, int]], cycles: int) -> Trace:
    """Run ``circuit`` for ``cycles`` clock cycles

    Parameters
    ----------
    circuit: Circuit
        A freshly loaded circuit; its primitive models carry state
    inputs: dict
        Cycle -> values of the top level inputs driven in that cycle. Inputs not listed
        take the circuit default
    cycles: int

    Returns
    -------
    Trace
    """
    trace = Trace(circuit.order, circuit.widths)
    for cycle in range(cycles):
        values: Dict[str, object] = {}
        circuit.evaluate(values, inputs.get(cycle, {}), cycle, trace.flags, trace.activity)
        trace.rows.append(values)
        circuit.tick(values)
    if trace.flags:
        logger.warning("{} guarded assignments selected an invalid value, first {}".format(
            len(trace.flags), trace.flags[0]))
    logger.info("Simulated {} for {} cycles".format(circuit.name, cycles))
    return trace
