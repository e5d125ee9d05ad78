"""
Command line interface of the filament tool chain.

Then run `python setup.py install` which will install the command `fil` inside your current
environment. Examples::

    fil check data/corpus/alu.fil
    fil compile --emit verilog -o build data/corpus/div_pipe.fil
    fil sim --stim vectors.json --vcd alu.vcd data/corpus/alu.fil
    fil interface --json data/corpus/conv2d.fil Conv2d
    fil fuzz --seed 0 --trials 10000 --workers 4
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from filament import __version__
from filament.diagnostics import (Diagnostic, ErrorCode, MissingPrimitive, ParseError,
                                  ResolutionError, diagnostics_to_json, render_diagnostics,
                                  sort_diagnostics)
from filament.fuzz import FuzzConfig, fuzz
from filament.harness import (compare, gen_stimulus, interface_to_json, component_interface,
                              load_stimulus, run_stimulus)
from filament.log_oracle import body_log, component_log
from filament.lowering import lower
from filament.misc import (MSG_FORMAT, Timer, create_logger, load_settings, merge_loggers,
                           print_banner)
from filament.parser import parse
from filament.primitives import library
from filament.resolve import ResolvedProgram, resolve
from filament.typechecker import CHECKS, typecheck
from filament.verilog_backend import emit, write_outputs

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERRORS = 1
EXIT_IO = 2


class InputError(Exception):
    """A file that cannot be read or written"""


def read_source(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as err:
        raise InputError("cannot read {}: {}".format(path, err.strerror or err)) from err


def check_source(text: str, filename: str, top: Optional[str] = None
                 ) -> Tuple[Optional[ResolvedProgram], List[Diagnostic]]:
    """Parse, resolve and type check one file

    Returns
    -------
    tuple:
        The resolved program (None when it could not be resolved) and the sorted diagnostics
    """
    try:
        program = parse(text, filename)
    except ParseError as err:
        return None, [err.to_diagnostic()]
    try:
        resolved = resolve(program, entry=top)
    except ResolutionError as err:
        return None, list(err.diagnostics)
    with Timer(name="typecheck " + filename, verbose=True):
        diagnostics = typecheck(resolved)
    return resolved, sort_diagnostics(diagnostics)


def report(diagnostics: List[Diagnostic], sources: Dict[str, str], as_json: bool = False):
    if as_json:
        print(diagnostics_to_json(diagnostics))
    elif diagnostics:
        sys.stderr.write(render_diagnostics(diagnostics, sources) + "\n")


def compile_files(files: List[str], top: Optional[str] = None
                  ) -> Tuple[List[ResolvedProgram], List[Diagnostic], Dict[str, str]]:
    sources = {path: read_source(path) for path in files}
    resolved_programs, diagnostics = [], []
    for path, text in sources.items():
        resolved, found = check_source(text, path, top)
        diagnostics.extend(found)
        if resolved is not None and not found:
            resolved_programs.append(resolved)
    return resolved_programs, sort_diagnostics(diagnostics), sources


def cmd_check(args, settings) -> int:
    resolved_programs, diagnostics, sources = compile_files(args.files, args.top)
    report(diagnostics, sources, args.json)
    if args.dump_log:
        for resolved in resolved_programs:
            for component in resolved.program.components:
                if component.name not in resolved.scopes:
                    continue
                print("// {}".format(component.name))
                print(component_log(component.signature).dump(), end="")
                if not component.is_extern:
                    print("// {} body".format(component.name))
                    print(body_log(resolved, component.name).dump(), end="")
    _logger.info(MSG_FORMAT.format("diagnostics", len(diagnostics)))
    return EXIT_ERRORS if diagnostics else EXIT_OK


def cmd_compile(args, settings) -> int:
    resolved_programs, diagnostics, sources = compile_files(args.files, args.top)
    report(diagnostics, sources)
    if diagnostics:
        return EXIT_ERRORS
    suffix = settings.get("backend", {}).get("low_suffix", ".low")
    for resolved in resolved_programs:
        program = lower(resolved)
        if args.emit == "low":
            text = program.to_text()
            if args.output is None:
                print(text, end="")
            else:
                name = resolved.entry or program.components[-1].name
                write_outputs({name + suffix: text}, args.output)
            continue
        try:
            files = emit(program)
        except MissingPrimitive as err:
            report(list(err.diagnostics), sources)
            return EXIT_ERRORS
        if args.output is None:
            for name in sorted(files):
                print("// {}\n{}".format(name, files[name]), end="")
        else:
            for path in write_outputs(files, args.output):
                _logger.info(MSG_FORMAT.format("written", path))
    return EXIT_OK


def cmd_sim(args, settings) -> int:
    resolved_programs, diagnostics, sources = compile_files(args.files, args.top)
    report(diagnostics, sources)
    if diagnostics:
        return EXIT_ERRORS
    try:
        document = load_stimulus(args.stim)
    except (OSError, ValueError) as err:
        raise InputError("cannot load the stimulus: {}".format(err)) from err
    harness = settings.get("harness", {})
    simulation = settings.get("simulation", {})
    status = EXIT_OK
    for resolved in resolved_programs:
        program = lower(resolved)
        top = args.top or resolved.entry
        signature = program.component(top).signature
        try:
            stimulus = gen_stimulus(signature, document["vectors"],
                                    document.get("mode", harness.get("mode", "back-to-back")),
                                    document["seed"],
                                    harness.get("random_gap_factor", 3),
                                    harness.get("isolated_padding", 2))
        except KeyError as err:
            raise InputError("a stimulus vector has no value for {}".format(err)) from err
        except ValueError as err:
            raise InputError(str(err)) from err
        cycles = args.cycles or max(stimulus.cycles, simulation.get("cycles", 0))
        trace = run_stimulus(program, stimulus, top, args.netlist, cycles)
        ports = [p.name for p in signature.ports]
        print(trace.to_text(ports), end="")
        if args.vcd:
            Path(args.vcd).write_text(trace.to_vcd(simulation.get("vcd_timescale", "1ns"),
                                                   module=top))
        if "expected" in document:
            mismatches = compare(trace, stimulus, document["expected"], signature)
            for mismatch in mismatches:
                sys.stderr.write("mismatch: {}\n".format(mismatch))
            if mismatches:
                status = EXIT_ERRORS
        if trace.flags:
            status = EXIT_ERRORS
    return status


def cmd_interface(args, settings) -> int:
    text = read_source(args.file)
    resolved, diagnostics = check_source(text, args.file)
    report(diagnostics, {args.file: text})
    if diagnostics:
        return EXIT_ERRORS
    if args.component in resolved.scopes:
        signature = resolved.signature(args.component)
    elif library().component(args.component) is not None:
        signature = library().component(args.component).signature
    else:
        report([Diagnostic(ErrorCode.UnboundName,
                           "unknown component `{}`".format(args.component))], {})
        return EXIT_ERRORS
    if args.json:
        print(interface_to_json(signature))
        return EXIT_OK
    interface = component_interface(signature)
    for event in interface["events"]:
        print(MSG_FORMAT.format("event " + event["name"],
                                "delay {}{}".format(event["delay"],
                                                    ", phantom" if event["phantom"] else "")))
    for port in interface["ports"]:
        window = port.get("interval", "always")
        print(MSG_FORMAT.format("{} {}".format(port["direction"], port["name"]),
                                "{} bits, {}".format(port["width"], json.dumps(window))))
    return EXIT_OK


def cmd_fuzz(args, settings) -> int:
    defaults = settings.get("fuzz", {})
    seed = defaults.get("seed", 0) if args.seed is None else args.seed
    trials = defaults.get("trials", 1000) if args.trials is None else args.trials
    workers = defaults.get("workers", 1) if args.workers is None else args.workers
    with Timer(name="fuzz", verbose=True):
        result = fuzz(seed, trials, workers, args.disable_check,
                      FuzzConfig.from_settings(defaults))
    print_banner("fuzz report", to_stdout=True)
    print(result.summary())
    for violation in result.violations:
        print("\n// trial {} ({}): {}".format(violation.index, violation.violation,
                                             violation.reason))
        print(violation.minimized, end="")
    return EXIT_ERRORS if result.violations else EXIT_OK


def parse_args(args):
    """Parse command line parameters

    Args:
      args ([str]): command line parameters as list of strings

    Returns:
      :obj:`argparse.Namespace`: command line parameters namespace
    """
    parser = argparse.ArgumentParser(
        prog="fil",
        description="Check, compile and simulate filament hardware designs")
    parser.add_argument("--version", action="version",
                        version="filament {ver}".format(ver=__version__))
    parser.add_argument("-v", "--verbose", dest="loglevel", help="set loglevel to INFO",
                        action="store_const", const=logging.INFO, default=logging.WARNING)
    parser.add_argument("-d", "--debug", dest="loglevel", help="set loglevel to DEBUG",
                        action="store_const", const=logging.DEBUG)
    parser.add_argument("--settings", help="YAML file merged over the default settings")
    parser.add_argument("--log-file", help="also write the log to this file")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    check = commands.add_parser("check", help="type check programs")
    check.add_argument("files", nargs="+", metavar="FILE")
    check.add_argument("--json", action="store_true", help="diagnostics as JSON on stdout")
    check.add_argument("--dump-log", action="store_true",
                       help="print the signature log of every component and the body log "
                            "of every user component")
    check.add_argument("--top", help="entry component")
    check.set_defaults(handler=cmd_check)

    compile_ = commands.add_parser("compile", help="lower programs to Low filament or Verilog")
    compile_.add_argument("files", nargs="+", metavar="FILE")
    compile_.add_argument("--emit", choices=("low", "verilog"), default="verilog")
    compile_.add_argument("-o", "--output", help="output directory (default stdout)")
    compile_.add_argument("--top", help="entry component")
    compile_.set_defaults(handler=cmd_compile)

    sim = commands.add_parser("sim", help="simulate the entry component")
    sim.add_argument("files", nargs="+", metavar="FILE")
    sim.add_argument("--stim", required=True,
                     help='JSON document {"vectors": [...], "mode": ..., "seed": ...}')
    sim.add_argument("--cycles", type=int, help="number of cycles to simulate")
    sim.add_argument("--top", help="entry component")
    sim.add_argument("--vcd", help="write the trace as VCD to this file")
    sim.add_argument("--netlist", action="store_true",
                     help="simulate the emitted netlist instead of the Low program")
    sim.set_defaults(handler=cmd_sim)

    interface = commands.add_parser("interface", help="print the timing interface")
    interface.add_argument("file", metavar="FILE")
    interface.add_argument("component", metavar="COMPONENT")
    interface.add_argument("--json", action="store_true")
    interface.set_defaults(handler=cmd_interface)

    fuzz_ = commands.add_parser("fuzz", help="differential soundness testing")
    fuzz_.add_argument("--seed", type=int)
    fuzz_.add_argument("--trials", type=int)
    fuzz_.add_argument("--workers", type=int)
    fuzz_.add_argument("--disable-check", action="append", default=[], choices=CHECKS,
                       help="switch off a type checker check (repeatable)")
    fuzz_.set_defaults(handler=cmd_fuzz)
    return parser.parse_args(args)


def setup_logging(loglevel, log_file=None):
    """Attach console (and file) handlers to the package logger

    Args:
      loglevel (int): minimum loglevel for emitting messages
    """
    main_logger = create_logger(name="fil", log_file=log_file, console_log_level=loglevel)
    merge_loggers(main_logger, "filament", logger_level_to_merge=loglevel)
    return main_logger


def main(args) -> int:
    """Main entry point allowing external calls

    Args:
      args ([str]): command line parameter list
    """
    args = parse_args(args)
    setup_logging(args.loglevel, args.log_file)
    try:
        settings = load_settings(args.settings)
    except AssertionError as err:
        sys.stderr.write("error: {}\n".format(err))
        return EXIT_IO
    _logger.debug("Running {} with settings {}".format(args.command, dict(settings)))
    try:
        return args.handler(args, settings)
    except InputError as err:
        sys.stderr.write("error: {}\n".format(err))
        return EXIT_IO


def run():
    """Entry point for console_scripts"""
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
