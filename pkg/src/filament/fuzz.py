"""
Differential soundness testing of the type checker.

Random small programs are generated from a seed. Every program the type checker accepts must
also be accepted by the log oracle (well formed and safely pipelined) and must lower to a
Low program with disjoint guards. A program that breaks either rule is a violation; it is
minimized by deleting body commands while the violation persists.
"""

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from filament.diagnostics import FilamentError, InternalError, TypeCheckError
from filament.log_oracle import check_component as oracle_check
from filament.lowering import lower
from filament.misc import MSG_FORMAT
from filament.parser import parse
from filament.resolve import resolve
from filament.typechecker import check_program

logger = logging.getLogger(__name__)

TOP = "main"


@dataclass(frozen=True)
class FuzzConfig:
    """Shape of the generated programs"""
    max_primitives: int = 3
    max_instances: int = 3
    max_invocations: int = 5
    max_offset: int = 8
    max_delay: int = 8
    sharing_bias: float = 0.6
    phantom_rate: float = 0.1
    literal_rate: float = 0.1

    @classmethod
    def from_settings(cls, settings) -> "FuzzConfig":
        known = {name: settings[name] for name in cls.__dataclass_fields__ if name in settings}
        return cls(**known)


@dataclass
class GeneratedProgram:
    """Source text split so that body commands can be deleted one by one"""
    header: List[str]
    signature: str
    commands: List[str]

    def text(self, commands: Optional[Sequence[str]] = None) -> str:
        commands = self.commands if commands is None else commands
        body = "".join("  {}\n".format(command) for command in commands)
        return "\n".join(self.header) + "\n" + self.signature + " {\n" + body + "}\n"


def _window(start: int, end: int) -> str:
    def event(offset):
        return "G" if offset == 0 else "G+{}".format(offset)

    return "@[{}, {}]".format(event(start), event(end))


def _primitive(rng: random.Random, index: int, config: FuzzConfig):
    delay = rng.randint(1, config.max_delay)
    phantom = rng.random() < config.phantom_rate
    ports = [] if phantom else ["@interface[G] go: 1"]
    windows = []
    for port in range(rng.randint(1, 2)):
        start = rng.randint(0, min(delay, 2))
        end = start + rng.randint(1, delay)
        windows.append((start, end))
        ports.append("{} in{}: 32".format(_window(start, end), port))
    latency = rng.randint(0, delay)
    out = (latency, latency + rng.randint(1, delay))
    text = "extern comp P{}<G: {}>({}) -> ({} out: 32);".format(
        index, delay, ", ".join(ports), _window(*out))
    return text, windows, out


def generate_program(rng: random.Random, config: FuzzConfig = FuzzConfig()) -> GeneratedProgram:
    """A random program: a few extern primitives and a ``main`` component using them"""
    primitives = [_primitive(rng, index, config)
                  for index in range(rng.randint(1, config.max_primitives))]
    delay = rng.randint(1, config.max_delay)
    phantom = rng.random() < config.phantom_rate
    inputs = [] if phantom else ["@interface[G] go: 1"]
    available = []
    for index in range(rng.randint(1, 2)):
        end = rng.randint(1, delay)
        inputs.append("{} x{}: 32".format(_window(0, end), index))
        available.append(("x{}".format(index), (0, end)))

    commands, instances = [], []
    for index in range(rng.randint(1, config.max_invocations)):
        if instances and (len(instances) >= config.max_instances or
                          rng.random() < config.sharing_bias):
            name, kind = rng.choice(instances)
        else:
            kind = rng.randrange(len(primitives))
            name = "I{}".format(len(instances))
            instances.append((name, kind))
            commands.append("{} := new P{};".format(name, kind))
        offset = rng.randint(0, config.max_offset)
        _, windows, out = primitives[kind]
        args = []
        for start, end in windows:
            if rng.random() < config.literal_rate or not available:
                args.append(str(rng.randint(0, 9)))
                continue
            # prefer sources that cover the requirement
            fitting = [src for src, (s, e) in available
                       if s <= offset + start and offset + end <= e]
            args.append(rng.choice(fitting or [src for src, _ in available]))
        invocation = "a{}".format(index)
        event = "G" if offset == 0 else "G+{}".format(offset)
        commands.append("{} := {}<{}>({});".format(invocation, name, event, ", ".join(args)))
        available.append(("{}.out".format(invocation), (offset + out[0], offset + out[1])))

    source, window = available[-1]
    commands.append("o = {};".format(source))
    signature = "comp {}<G: {}>({}) -> ({} o: 32)".format(TOP, delay, ", ".join(inputs),
                                                          _window(*window))
    return GeneratedProgram([text for text, _, _ in primitives], signature, commands)


@dataclass
class TrialResult:
    index: int
    accepted: bool = False
    violation: Optional[str] = None
    reason: str = ""
    codes: Tuple[str, ...] = ()
    source: str = ""
    minimized: str = ""


def classify(text: str, disabled_checks: Iterable[str] = ()) -> Tuple[bool, Optional[str], str,
                                                                          Tuple[str, ...]]:
    """(accepted, violation kind, reason, diagnostic codes) of one program"""
    try:
        resolved = resolve(parse(text, "<fuzz>"), entry=TOP)
    except FilamentError as err:
        return False, None, str(err), ()
    try:
        check_program(resolved, disabled_checks)
    except TypeCheckError as err:
        return False, None, "", tuple(sorted({d.code.name for d in err.diagnostics}))
    verdict = oracle_check(resolved, TOP)
    if not verdict:
        return True, "oracle", verdict.reason, ()
    try:
        lower(resolved)
    except InternalError as err:
        return True, "lowering", str(err), ()
    return True, None, "", ()


def minimize(program: GeneratedProgram, kind: str, disabled_checks: Iterable[str] = ()) -> str:
    """Greedily drop body commands while the same kind of violation persists"""
    commands = list(program.commands)
    shrinking = True
    while shrinking:
        shrinking = False
        for index in range(len(commands)):
            candidate = commands[:index] + commands[index + 1:]
            _, violation, _, _ = classify(program.text(candidate), disabled_checks)
            if violation == kind:
                logger.debug("Dropped `{}`".format(commands[index]))
                commands = candidate
                shrinking = True
                break
    return program.text(commands)


def run_trial(seed: int, index: int, config: FuzzConfig = FuzzConfig(),
              disabled_checks: Tuple[str, ...] = ()) -> TrialResult:
    rng = random.Random("{}-{}".format(seed, index))
    program = generate_program(rng, config)
    text = program.text()
    result = TrialResult(index, source=text)
    try:
        result.accepted, result.violation, result.reason, result.codes = classify(
            text, disabled_checks)
    except Exception as err:
        result.violation, result.reason = "crash", "{}: {}".format(type(err).__name__, err)
        return result
    if result.violation is not None:
        result.minimized = minimize(program, result.violation, disabled_checks)
    return result


def _run_chunk(arguments):
    seed, indices, config, disabled_checks = arguments
    return [run_trial(seed, index, config, disabled_checks) for index in indices]


@dataclass
class FuzzReport:
    seed: int
    results: List[TrialResult] = field(default_factory=list)

    @property
    def trials(self) -> int:
        return len(self.results)

    @property
    def accepted(self) -> int:
        return sum(result.accepted for result in self.results)

    @property
    def violations(self) -> List[TrialResult]:
        return [result for result in self.results if result.violation is not None]

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.trials if self.trials else 0.0

    def to_dataframe(self) -> pd.DataFrame:
        columns = list(TrialResult.__dataclass_fields__)
        frame = pd.DataFrame([asdict(result) for result in self.results], columns=columns)
        return frame.set_index("index")

    def summary(self) -> str:
        lines = [MSG_FORMAT.format("seed", self.seed),
                 MSG_FORMAT.format("trials", self.trials),
                 MSG_FORMAT.format("accepted", "{} ({:.1%})".format(self.accepted,
                                                                   self.acceptance_rate)),
                 MSG_FORMAT.format("violations", len(self.violations))]
        if self.trials:
            codes = self.to_dataframe()["codes"].explode().dropna()
            for code, count in codes.value_counts().sort_index().items():
                lines.append(MSG_FORMAT.format("rejected with " + code, count))
        return "\n".join(lines)


def fuzz(seed: int = 0, trials: int = 1000, workers: int = 1,
         disabled_checks: Iterable[str] = (), config: FuzzConfig = FuzzConfig()) -> FuzzReport:
    """Run ``trials`` random programs; trial ``i`` only depends on ``seed`` and ``i``

    Parameters
    ----------
    workers: int
        Number of processes. With 1 the trials run in this process
    disabled_checks: iterable of str
        Type checker checks to switch off, to confirm that the oracle catches what they
        guard against
    """
    disabled_checks = tuple(disabled_checks)
    report = FuzzReport(seed)
    if trials <= 0:
        return report
    if workers <= 1:
        report.results = _run_chunk((seed, range(trials), config, disabled_checks))
    else:
        size = -(-trials // (4 * workers))
        chunks = [(seed, range(start, min(start + size, trials)), config, disabled_checks)
                  for start in range(0, trials, size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for results in pool.map(_run_chunk, chunks):
                report.results.extend(results)
    for violation in report.violations:
        logger.error("Trial {} ({}): {}\n{}".format(violation.index, violation.violation,
                                                    violation.reason, violation.minimized))
    logger.info("Fuzzed {} programs, {} accepted, {} violations".format(
        report.trials, report.accepted, len(report.violations)))
    return report
