"""
Test harness for lowered designs.

The harness reads nothing but the signature of the design under test: it provides every
input for exactly the cycles of its availability window, triggers the design as often as
the event delay allows and captures outputs only inside their windows.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from filament.event_algebra import Const
from filament.lowering import LowProgram
from filament.primitives import mask
from filament.simulator import Trace, load_low, load_netlist, simulate
from filament.syntax import Signature
from filament.verilog_backend import build_netlist

logger = logging.getLogger(__name__)

MODES = ("back-to-back", "random-gaps", "isolated")

RANDOM_GAP_FACTOR = 3
ISOLATED_PADDING = 2


def component_interface(signature: Signature) -> dict:
    """Machine readable events and ports of a signature

    Concrete windows are reported as ``[start, end]`` offsets from their event; windows that
    span two events are reported symbolically.
    """
    events = []
    for binding in signature.events:
        delay = binding.delay.value if isinstance(binding.delay, Const) else str(binding.delay)
        events.append({"name": binding.var, "delay": delay, "phantom": binding.is_phantom,
                       "interface_port": binding.interface_port})
    ports = []
    for port in signature.ports:
        entry = {"name": port.name, "direction": port.direction, "width": port.width}
        if port.is_interface:
            entry["interface_for"] = port.interface_for
        if port.interval is not None:
            interval = port.interval
            if interval.same_base:
                entry["event"] = interval.start.base
                entry["interval"] = [interval.start.offset, interval.end.offset]
            else:
                entry["interval"] = [str(interval.start), str(interval.end)]
        ports.append(entry)
    result = {"name": signature.name, "events": events, "ports": ports}
    if signature.params:
        result["params"] = [{"name": p.name, "default": p.default} for p in signature.params]
    return result


def interface_to_json(signature: Signature) -> str:
    return json.dumps(component_interface(signature), indent=2)


@dataclass
class Stimulus:
    """Trigger schedule, per cycle input values and output capture windows"""
    triggers: Tuple[int, ...]
    vectors: Tuple[Mapping[str, int], ...]
    inputs: Dict[int, Dict[str, int]] = field(default_factory=dict)
    captures: List[Tuple[int, str, int]] = field(default_factory=list)
    cycles: int = 0

    def drive(self, cycle: int, port: str, value: int):
        self.inputs.setdefault(cycle, {})[port] = value


@dataclass(frozen=True)
class Mismatch:
    vector: int
    port: str
    cycle: int
    expected: int
    got: object

    def __str__(self):
        return "vector {} port {} cycle {}: expected {} got {!r}".format(
            self.vector, self.port, self.cycle, self.expected, self.got)


def _timing(signature: Signature):
    if len(signature.events) != 1 or not isinstance(signature.events[0].delay, Const):
        raise ValueError("{}: stimulus generation needs a single event with a constant "
                         "delay".format(signature.name))
    binding = signature.events[0]
    return binding, binding.delay.value


def schedule(count: int, delay: int, span: int, mode: str = "back-to-back", seed: int = 0,
             gap_factor: int = RANDOM_GAP_FACTOR, padding: int = ISOLATED_PADDING) -> List[int]:
    """Trigger cycles of ``count`` transactions

    Examples
    --------
    >>> schedule(4, 1, 3)
    [0, 1, 2, 3]
    >>> schedule(2, 8, 8, "isolated")
    [0, 10]
    """
    if mode not in MODES:
        raise ValueError("unknown mode {}, expected one of {}".format(mode, ", ".join(MODES)))
    delay = max(delay, 1)
    if mode == "back-to-back":
        gaps = np.full(max(count - 1, 0), delay)
    elif mode == "random-gaps":
        rng = np.random.default_rng(seed)
        gaps = rng.integers(delay, gap_factor * delay, size=max(count - 1, 0), endpoint=True)
    else:
        gaps = np.full(max(count - 1, 0), max(delay, span) + padding)
    return [0] + [int(t) for t in np.cumsum(gaps)] if count else []


def gen_stimulus(signature: Signature, vectors: Sequence[Mapping[str, int]],
                 mode: str = "back-to-back", seed: int = 0,
                 gap_factor: int = RANDOM_GAP_FACTOR,
                 padding: int = ISOLATED_PADDING) -> Stimulus:
    """Stimulus for a single event component

    Parameters
    ----------
    signature: Signature
        The signature the harness trusts; it decides every window
    vectors: list of dict
        Input port -> value, one map per transaction
    mode: str
        ``back-to-back`` triggers every ``delay`` cycles, ``random-gaps`` waits between
        ``delay`` and ``gap_factor * delay`` cycles, ``isolated`` lets each transaction
        finish before the next one starts

    Raises
    ------
    ValueError
        For components with several events or a symbolic delay
    """
    binding, delay = _timing(signature)
    windows = [p.interval for p in signature.ports if p.interval is not None]
    first = min((w.start.offset for w in windows), default=0)
    last = max((w.end.offset for w in windows), default=1)
    triggers = schedule(len(vectors), delay, last - first, mode, seed, gap_factor, padding)
    stimulus = Stimulus(tuple(triggers), tuple(vectors))
    for index, (trigger, vector) in enumerate(zip(triggers, vectors)):
        if binding.interface_port is not None:
            stimulus.drive(trigger, binding.interface_port, 1)
        for port in signature.data_inputs:
            window = port.interval
            width = signature.width_of(port, {})
            for cycle in range(trigger + window.start.offset, trigger + window.end.offset):
                stimulus.drive(cycle, port.name, mask(int(vector[port.name]), width))
        for port in signature.outputs:
            for cycle in range(trigger + port.interval.start.offset,
                               trigger + port.interval.end.offset):
                stimulus.captures.append((index, port.name, cycle))
    stimulus.cycles = (triggers[-1] if triggers else 0) + last + 1
    logger.debug("Stimulus of {} transactions over {} cycles, triggers {}".format(
        len(vectors), stimulus.cycles, triggers))
    return stimulus


def run_stimulus(program: LowProgram, stimulus: Stimulus, top: Optional[str] = None,
                 netlist: bool = False, cycles: Optional[int] = None) -> Trace:
    """Simulate a fresh circuit of the Low program (or of its netlist) under a stimulus"""
    if netlist:
        circuit = load_netlist(build_netlist(program), program, top)
    else:
        circuit = load_low(program, top)
    return simulate(circuit, stimulus.inputs, cycles or stimulus.cycles)


def captured(trace: Trace, stimulus: Stimulus) -> Dict[Tuple[int, str], List[object]]:
    """Output values seen inside their windows, per (vector, port)"""
    values: Dict[Tuple[int, str], List[object]] = {}
    for vector, port, cycle in stimulus.captures:
        values.setdefault((vector, port), []).append(
            trace.value(port, cycle) if cycle < trace.cycles else None)
    return values


def compare(trace: Trace, stimulus: Stimulus, expected: Sequence[Mapping[str, int]],
            signature: Signature) -> List[Mismatch]:
    """Mismatches between the captured outputs and the expected output map of each vector"""
    widths = {p.name: signature.width_of(p, {}) for p in signature.outputs}
    mismatches = []
    for vector, port, cycle in stimulus.captures:
        if port not in expected[vector]:
            continue
        want = mask(int(expected[vector][port]), widths[port])
        got = trace.value(port, cycle) if cycle < trace.cycles else None
        if got != want:
            mismatches.append(Mismatch(vector, port, cycle, want, got))
    return mismatches


def run_and_check(program: LowProgram, golden: Callable[[Mapping[str, int]], Mapping[str, int]],
                  vectors: Sequence[Mapping[str, int]], mode: str = "back-to-back",
                  seed: int = 0, top: Optional[str] = None, netlist: bool = False,
                  signature: Optional[Signature] = None) -> List[Mismatch]:
    """Compare every captured output against ``golden``

    Parameters
    ----------
    signature: Signature, optional
        Signature to build the stimulus from; defaults to the one of the design

    Returns
    -------
    list of Mismatch:
        Empty when the design agrees with the golden model
    """
    top = top or program.entry or program.components[-1].name
    if signature is None:
        signature = program.component(top).signature
    stimulus = gen_stimulus(signature, vectors, mode, seed)
    trace = run_stimulus(program, stimulus, top, netlist)
    mismatches = compare(trace, stimulus, [golden(vector) for vector in vectors], signature)
    logger.info("{}: {} vectors {}, {} mismatches".format(top, len(vectors), mode,
                                                         len(mismatches)))
    return mismatches


def load_stimulus(path) -> dict:
    """Read a ``{"vectors": [...], "mode": ..., "seed": ...}`` document"""
    with open(path) as stream:
        document = json.load(stream)
    if "vectors" not in document:
        raise ValueError("{}: the stimulus has no `vectors`".format(path))
    document.setdefault("seed", 0)
    return document
