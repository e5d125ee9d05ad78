"""
Verilog emission from Low filament.

A lowered component is first turned into a :class:`NetlistModule`, a structural description
(ports, wires, FSM shift registers, instances and continuous assignments) that the simulator
can execute directly. The module is audited for multiply driven and undriven nets and then
rendered as text.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

from filament.diagnostics import Diagnostic, ErrorCode, InternalError, MissingPrimitive
from filament.global_vars import PASS_THROUGH_PORTS
from filament.lowering import Guard, LowComponent, LowProgram
from filament.misc import make_directory
from filament.primitives import lookup_primitive, primitives_verilog
from filament.regular_expressions import VERILOG_IDENT_REGEXP
from filament.syntax import Signature

logger = logging.getLogger(__name__)

Expr = Union[str, int]

VERILOG_SUFFIX = ".v"
PRIMITIVES_FILE = "primitives.v"


def net_name(value: str) -> str:
    """``A.left`` -> ``A_left``; own ports keep their names"""
    return value.replace(".", "_")


def stage_net(fsm: str, stage: int) -> str:
    return "{}_{}".format(fsm, stage)


def guard_nets(guard: Guard) -> Tuple[str, ...]:
    return tuple(stage_net(fsm, stage) for fsm, stage in sorted(guard.stages))


def range_decl(width: int) -> str:
    return "" if width == 1 else "[{}:0] ".format(width - 1)


@dataclass(frozen=True)
class NetPort:
    name: str
    width: int
    direction: str

    def declaration(self) -> str:
        kind = "input" if self.direction == "in" else "output"
        return "{} wire {}{}".format(kind, range_decl(self.width), self.name)


@dataclass(frozen=True)
class Wire:
    name: str
    width: int


@dataclass(frozen=True)
class ShiftRegister:
    """FSM of ``states`` stages: stage 0 is the trigger, stage i the trigger delayed i cycles"""
    name: str
    states: int
    trigger: str

    @property
    def stage_nets(self) -> Tuple[str, ...]:
        return tuple(stage_net(self.name, stage) for stage in range(self.states))


@dataclass(frozen=True)
class NetInstance:
    name: str
    module: str
    params: Tuple[Tuple[str, int], ...]
    connections: Tuple[Tuple[str, str], ...]
    inputs: Tuple[str, ...] = ()


@dataclass(frozen=True)
class ContinuousAssign:
    """``assign dst = c0 ? e0 : c1 ? e1 : default;``

    Each case is the tuple of stage nets whose disjunction selects the expression; an empty
    tuple selects unconditionally.
    """
    dst: str
    width: int
    cases: Tuple[Tuple[Tuple[str, ...], Expr], ...]
    default: Optional[Expr] = 0

    @property
    def sources(self) -> Tuple[str, ...]:
        names = []
        for condition, expr in self.cases:
            names.extend(condition)
            if isinstance(expr, str):
                names.append(expr)
        if isinstance(self.default, str):
            names.append(self.default)
        return tuple(names)

    def literal(self, value: int) -> str:
        return "{}'d{}".format(self.width, value)

    def expression(self) -> str:
        def text(expr):
            return self.literal(expr) if isinstance(expr, int) else expr

        if len(self.cases) == 1 and not self.cases[0][0]:
            return text(self.cases[0][1])
        parts = []
        for condition, expr in self.cases:
            parts.append("{} ? {}".format(" | ".join(condition), text(expr)))
        parts.append(text(0 if self.default is None else self.default))
        return " : ".join(parts)


@dataclass(frozen=True)
class NetlistModule:
    name: str
    ports: Tuple[NetPort, ...]
    wires: Tuple[Wire, ...] = ()
    registers: Tuple[ShiftRegister, ...] = ()
    instances: Tuple[NetInstance, ...] = ()
    assigns: Tuple[ContinuousAssign, ...] = ()

    def port(self, name: str) -> Optional[NetPort]:
        return next((port for port in self.ports if port.name == name), None)

    def widths(self) -> Dict[str, int]:
        widths = {port.name: port.width for port in self.ports}
        widths.update((wire.name, wire.width) for wire in self.wires)
        for register in self.registers:
            widths.update((net, 1) for net in register.stage_nets)
        return widths

    def to_verilog(self) -> str:
        lines = ["module {} (".format(self.name)]
        lines.append(",\n".join("  " + port.declaration() for port in self.ports))
        lines.append(");")
        for register in self.registers:
            lines.append("  // {} stage fsm started by {}".format(register.states,
                                                                   register.trigger))
            lines.append("  wire {};".format(register.stage_nets[0]))
            lines.extend("  reg {};".format(net) for net in register.stage_nets[1:])
            lines.append("  assign {} = {};".format(register.stage_nets[0], register.trigger))
            if register.states > 1:
                lines.extend(self._shift(register))
        for wire in self.wires:
            lines.append("  wire {}{};".format(range_decl(wire.width), wire.name))
        for instance in self.instances:
            params = ""
            if instance.params:
                params = " #({})".format(", ".join(".{}({})".format(name, value)
                                                  for name, value in instance.params))
            connections = ",\n".join("    .{}({})".format(port, net)
                                     for port, net in instance.connections)
            lines.append("  {}{} {} (\n{}\n  );".format(instance.module, params, instance.name,
                                                      connections))
        for assign in self.assigns:
            lines.append("  assign {} = {};".format(assign.dst, assign.expression()))
        lines.append("endmodule")
        return "\n".join(lines) + "\n"

    @staticmethod
    def _shift(register: ShiftRegister) -> List[str]:
        nets = register.stage_nets
        lines = ["  always @(posedge clk) begin", "    if (reset) begin"]
        lines.extend("      {} <= 1'b0;".format(net) for net in nets[1:])
        lines.append("    end else begin")
        lines.extend("      {} <= {};".format(later, earlier)
                     for earlier, later in zip(nets, nets[1:]))
        lines.extend(["    end", "  end"])
        return lines


def _port_widths(signature: Signature, params: Mapping[str, int]) -> Dict[str, int]:
    widths = {}
    for port in signature.ports:
        width = signature.width_of(port, params)
        if width is None:
            raise InternalError("width of {}.{} is unbound".format(signature.name, port.name))
        widths[port.name] = width
    return widths


def build_module(component: LowComponent, signatures: Mapping[str, Signature]) -> NetlistModule:
    """Structural netlist of one lowered component

    Parameters
    ----------
    component: LowComponent
    signatures: dict
        Signature of every component the lowered one may instantiate
    """
    own = component.signature
    ports = [NetPort(name, 1, "in") for name in PASS_THROUGH_PORTS]
    ports.extend(NetPort(p.name, own.width_of(p, {}), "in") for p in own.inputs)
    ports.extend(NetPort(p.name, own.width_of(p, {}), "out") for p in own.outputs)
    widths = {port.name: port.width for port in ports}

    registers = tuple(ShiftRegister(fsm.name, fsm.states, fsm.trigger) for fsm in component.fsms)
    wires, instances, driven_inputs = [], [], []
    for instantiate in component.instances:
        signature = signatures[instantiate.component]
        params = signature.param_values(instantiate.params)
        port_widths = _port_widths(signature, params)
        connections = [(name, name) for name in PASS_THROUGH_PORTS]
        inputs = []
        for port in signature.ports:
            if port.is_pass_through:
                continue
            net = net_name("{}.{}".format(instantiate.name, port.name))
            wires.append(Wire(net, port_widths[port.name]))
            widths[net] = port_widths[port.name]
            connections.append((port.name, net))
            if port.direction == "in":
                inputs.append(port.name)
                driven_inputs.append(net)
        instances.append(NetInstance(instantiate.name, instantiate.component,
                                     tuple((p.name, params[p.name]) for p in signature.params),
                                     tuple(connections), tuple(inputs)))

    cases: Dict[str, List[Tuple[Tuple[str, ...], Expr]]] = {}
    for assignment in component.assignments:
        condition = guard_nets(assignment.guard)
        src = assignment.src if isinstance(assignment.src, int) else net_name(assignment.src)
        cases.setdefault(net_name(assignment.dst), []).append((condition, src))

    assigns = []
    # instance inputs in declaration order, then own outputs
    for dst in driven_inputs + [p.name for p in own.outputs]:
        assigns.append(ContinuousAssign(dst, widths[dst], tuple(cases.pop(dst, ()))))
    if cases:
        raise InternalError("{} assigns undeclared nets: {}".format(component.name,
                                                                     ", ".join(sorted(cases))))
    return NetlistModule(component.name, tuple(ports), tuple(wires), registers,
                         tuple(instances), tuple(assigns))


def audit(module: NetlistModule) -> List[str]:
    """Problems of a netlist: illegal names, duplicate declarations, multiply driven,
    undriven or undeclared nets and width mismatches"""
    problems = []
    declared = {}
    names = [p.name for p in module.ports] + [w.name for w in module.wires]
    for register in module.registers:
        names.extend(register.stage_nets)
    for name in names:
        if not VERILOG_IDENT_REGEXP.match(name):
            problems.append("`{}` is not a Verilog identifier".format(name))
        if name in declared:
            problems.append("`{}` is declared twice".format(name))
        declared[name] = True
    widths = module.widths()
    stage_nets = {net for register in module.registers for net in register.stage_nets}

    drivers: Dict[str, int] = {}
    for assign in module.assigns:
        drivers[assign.dst] = drivers.get(assign.dst, 0) + 1
        for name in assign.sources:
            if name not in widths:
                problems.append("`{}` reads the undeclared net `{}`".format(assign.dst, name))
            elif name not in stage_nets and widths[name] != assign.width:
                problems.append("`{}` ({} bits) reads `{}` ({} bits)".format(
                    assign.dst, assign.width, name, widths[name]))
    for instance in module.instances:
        for port, net in instance.connections:
            if net not in widths:
                problems.append("{}.{} is connected to the undeclared net `{}`".format(
                    instance.name, port, net))
            if port not in instance.inputs and port not in PASS_THROUGH_PORTS:
                drivers[net] = drivers.get(net, 0) + 1
    for register in module.registers:
        if register.trigger not in widths:
            problems.append("fsm {} is started by the undeclared `{}`".format(
                register.name, register.trigger))
        for net in register.stage_nets:
            drivers[net] = drivers.get(net, 0) + 1
    for port in module.ports:
        if port.direction == "in":
            drivers[port.name] = drivers.get(port.name, 0) + 1

    for name in declared:
        count = drivers.get(name, 0)
        if count > 1:
            problems.append("`{}` has {} drivers".format(name, count))
        elif count == 0:
            problems.append("`{}` is never driven".format(name))
    return problems


def build_netlist(program: LowProgram) -> Dict[str, NetlistModule]:
    """Netlist module of every lowered component, audited

    Raises
    ------
    MissingPrimitive
        If an instantiated extern has no Verilog module in the primitive library
    InternalError
        If a module fails the audit
    """
    missing = [Diagnostic(ErrorCode.MissingPrimitive,
                          "extern `{}` has no Verilog implementation".format(name))
               for name in sorted(program.externs) if lookup_primitive(name) is None]
    if missing:
        raise MissingPrimitive(missing)
    signatures = dict(program.externs)
    signatures.update((c.name, c.signature) for c in program.components)
    modules = {}
    for component in program.components:
        module = build_module(component, signatures)
        problems = audit(module)
        if problems:
            raise InternalError("netlist of {} is malformed: {}".format(component.name,
                                                                       "; ".join(problems)))
        modules[component.name] = module
    return modules


def emit(program: LowProgram) -> Dict[str, str]:
    """Verilog text keyed by file name: one file per component and ``primitives.v``"""
    modules = build_netlist(program)
    files = {name + VERILOG_SUFFIX: module.to_verilog() for name, module in modules.items()}
    files[PRIMITIVES_FILE] = primitives_verilog(program.externs)
    logger.info("Emitted {} Verilog modules".format(len(modules)))
    return files


def write_outputs(files: Mapping[str, str], directory) -> List[Path]:
    directory = Path(directory)
    make_directory(directory)
    paths = []
    for name in sorted(files):
        path = directory / name
        path.write_text(files[name])
        logger.debug("Wrote {}".format(path))
        paths.append(path)
    return paths
