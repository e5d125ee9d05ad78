import random

import pytest
from numpy.testing import assert_equal
from pandas.testing import assert_frame_equal

from filament.fuzz import (FuzzConfig, GeneratedProgram, classify, fuzz, generate_program,
                           minimize, run_trial)
from filament.parser import parse
from filament.resolve import resolve

SIGNATURE = ("comp main<G: 1>(@interface[G] go: 1, @[G, G+1] a: 32, @[G, G+1] b: 32)"
             " -> (@[G, G+1] o: 32)")

CONFLICTING = GeneratedProgram([], SIGNATURE, [
    "A := new Add;",
    "B := new Add;",
    "b0 := B<G>(a, b);",
    "x := A<G>(a, b);",
    "y := A<G>(a, b);",
    "o = y.out;",
])


@pytest.mark.parametrize("seed", range(20))
def test_generated_programs_resolve(seed):
    program = generate_program(random.Random(seed))
    assert program.commands[-1].startswith("o = ")
    resolve(parse(program.text(), "<fuzz>"), entry="main")


def test_program_text():
    program = GeneratedProgram(["extern comp P0<G: 1>(@[G, G+1] in0: 32) -> ();"],
                               "comp main<G: 1>() -> ()", ["a;", "b;"])
    assert_equal(program.text(), "extern comp P0<G: 1>(@[G, G+1] in0: 32) -> ();\n"
                                 "comp main<G: 1>() -> () {\n  a;\n  b;\n}\n")
    assert_equal(program.text([]), "extern comp P0<G: 1>(@[G, G+1] in0: 32) -> ();\n"
                                   "comp main<G: 1>() -> () {\n}\n")


def test_classify(corpus_text):
    assert_equal(classify(corpus_text("twice")), (True, None, "", ()))
    assert_equal(classify(corpus_text("conflict")), (False, None, "", ("InstanceConflict",)))
    accepted, violation, reason, codes = classify(corpus_text("conflict"), ["conflicts"])
    assert accepted
    assert_equal(violation, "oracle")
    assert reason
    accepted, violation, reason, _ = classify("comp")
    assert not accepted
    assert violation is None
    assert reason


@pytest.mark.parametrize("name, disabled", [
    ("conflict", ["conflicts"]),
    ("unsafe_trigger", ["trigger"]),
    ("shared_mult", ["shared_reuse"]),
    ("alu_sequential", ["valid_reads", "trigger"]),
])
def test_disabled_check_lets_the_oracle_catch_the_program(corpus_text, name, disabled):
    assert not classify(corpus_text(name))[0]
    accepted, violation, reason, codes = classify(corpus_text(name), disabled)
    assert accepted
    assert_equal(violation, "oracle")
    assert reason
    assert_equal(codes, ())


def test_minimize():
    assert_equal(classify(CONFLICTING.text(), ["conflicts"])[1], "oracle")
    expected = CONFLICTING.text(["A := new Add;", "x := A<G>(a, b);", "y := A<G>(a, b);",
                                 "o = y.out;"])
    assert_equal(minimize(CONFLICTING, "oracle", ["conflicts"]), expected)


def test_run_trial_is_deterministic():
    first = run_trial(7, 3)
    second = run_trial(7, 3)
    assert_equal(first.source, second.source)
    assert_equal(first.codes, second.codes)
    assert first.source != run_trial(7, 4).source


def test_type_checker_is_sound():
    report = fuzz(seed=0, trials=2000, workers=2)
    assert_equal(report.trials, 2000)
    assert report.accepted > 0
    assert_equal([(v.index, v.reason) for v in report.violations], [])
    assert 0 <= report.acceptance_rate <= 1


@pytest.mark.parametrize("check", ["conflicts", "trigger", "shared_reuse", "phantom"])
def test_fuzzing_finds_programs_a_disabled_check_guards_against(check):
    report = fuzz(seed=0, trials=2000, workers=2, disabled_checks=[check])
    assert report.violations, check
    assert {v.violation for v in report.violations} <= {"oracle", "lowering"}
    for violation in report.violations:
        assert_equal(classify(violation.minimized, [check])[1], violation.violation)


def test_workers_do_not_change_the_report():
    single = fuzz(seed=2, trials=8)
    pooled = fuzz(seed=2, trials=8, workers=2)
    assert_frame_equal(single.to_dataframe(), pooled.to_dataframe())


def test_report():
    report = fuzz(seed=0, trials=10)
    frame = report.to_dataframe()
    assert_equal(frame.index.name, "index")
    assert_equal(list(frame.index), list(range(10)))
    assert_equal(frame["accepted"].sum(), report.accepted)
    summary = report.summary().splitlines()
    assert_equal(summary[0], "{:30s} : {}".format("seed", 0))
    assert_equal(summary[1], "{:30s} : {}".format("trials", 10))
    assert_equal(fuzz(trials=0).summary().splitlines()[-1],
                 "{:30s} : {}".format("violations", 0))


def test_config_from_settings():
    config = FuzzConfig.from_settings({"max_delay": 4, "seed": 1, "trials": 5})
    assert_equal(config.max_delay, 4)
    assert_equal(config.max_primitives, FuzzConfig().max_primitives)
    program = generate_program(random.Random(0), FuzzConfig(max_primitives=1, max_delay=1))
    assert_equal(len(program.header), 1)
    assert "<G: 1>" in program.header[0]
