import json

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings
from numpy.testing import assert_equal, assert_raises

from filament.harness import (MODES, captured, compare, component_interface, gen_stimulus,
                              load_stimulus, run_and_check, run_stimulus, schedule)
from filament.lowering import lower
from filament.parser import parse
from filament.primitives import INVALID, library, restoring_divide

WORD = 2 ** 32


def words(count, ports, seed=0, high=WORD):
    rng = np.random.default_rng(seed)
    return [{port: int(rng.integers(0, high)) for port in ports} for _ in range(count)]


def divisions(count, seed=0):
    rng = np.random.default_rng(seed)
    return [{"left": int(rng.integers(0, 256)), "r": int(rng.integers(1, 256))}
            for _ in range(count)]


def test_schedule_modes():
    assert_equal(schedule(3, 2, 4), [0, 2, 4])
    assert_equal(schedule(3, 2, 4, "isolated"), [0, 6, 12])
    assert_equal(schedule(0, 2, 4), [])
    # a zero delay still leaves a cycle between triggers
    assert_equal(schedule(2, 0, 1), [0, 1])
    assert_raises(ValueError, schedule, 2, 1, 1, "bursty")


@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=1000))
@settings(max_examples=30)
def test_random_gaps_stay_in_range(delay, seed):
    triggers = schedule(10, delay, delay, "random-gaps", seed)
    gaps = np.diff(triggers)
    assert np.all(gaps >= delay)
    assert np.all(gaps <= 3 * delay)
    assert_equal(triggers, schedule(10, delay, delay, "random-gaps", seed))


def test_gen_stimulus_twice(load_corpus):
    signature = load_corpus("twice").signature("main")
    stimulus = gen_stimulus(signature, [{"l": 1, "r": 2}, {"l": 3, "r": 4}])
    assert_equal(stimulus.triggers, (0, 3))
    assert_equal(stimulus.inputs[0], {"go": 1, "l": 1, "r": 2})
    assert_equal(stimulus.inputs[3], {"go": 1, "l": 3, "r": 4})
    assert 1 not in stimulus.inputs
    assert_equal(stimulus.captures, [(0, "out", 2), (1, "out", 5)])
    assert_equal(stimulus.cycles, 7)


def test_gen_stimulus_masks_inputs(load_corpus):
    signature = load_corpus("div_comb").signature("main")
    stimulus = gen_stimulus(signature, [{"left": 0x1FF, "r": 3}])
    assert_equal(stimulus.inputs[0]["left"], 0xFF)


def test_gen_stimulus_needs_one_constant_event(load_corpus):
    assert_raises(ValueError, gen_stimulus, load_corpus("dyn").signature("main"), [{}])
    register = library().component("Register").signature
    assert_raises(ValueError, gen_stimulus, register, [{"in": 1}])


def test_component_interface(load_corpus):
    interface = component_interface(load_corpus("twice").signature("main"))
    assert_equal(interface["name"], "main")
    assert_equal(interface["events"],
                 [{"name": "G", "delay": 3, "phantom": False, "interface_port": "go"}])
    ports = {port["name"]: port for port in interface["ports"]}
    assert_equal(ports["go"]["interface_for"], "G")
    assert_equal(ports["l"]["interval"], [0, 1])
    assert_equal(ports["out"]["event"], "G")
    assert_equal(ports["out"]["interval"], [2, 3])
    assert "params" not in interface


def test_symbolic_interface():
    interface = component_interface(library().component("Register").signature)
    assert_equal([event["name"] for event in interface["events"]], ["G", "L"])
    assert isinstance(interface["events"][0]["delay"], str)
    ports = {port["name"]: port for port in interface["ports"]}
    assert_equal(ports["out"]["interval"], ["G+1", "L"])
    prev = component_interface(library().component("Prev").signature)
    assert_equal(prev["params"], [{"name": "WIDTH", "default": 32},
                                  {"name": "SAFE", "default": 1}])


def test_captured(load_corpus):
    program = lower(load_corpus("twice"))
    stimulus = gen_stimulus(program.component("main").signature,
                            [{"l": 3, "r": 4}, {"l": 5, "r": 6}])
    values = captured(run_stimulus(program, stimulus), stimulus)
    assert_equal(values, {(0, "out"): [14], (1, "out"): [22]})


GOLDENS = [
    ("twice", lambda v: {"out": 2 * (v["l"] + v["r"])}, ("l", "r")),
    ("alu", lambda v: {"out": v["l"] * v["r"] if v["op"] else v["l"] + v["r"]}, ("l", "r")),
    ("alu_naive", lambda v: {"out": v["l"] * v["r"] if v["op"] else v["l"] + v["r"]},
     ("l", "r")),
    ("hold", lambda v: {"out": v["l"]}, ("l",)),
    ("register", lambda v: {"out": v["x"]}, ("x",)),
    ("long_add", lambda v: {"out": v["a"] + v["b"]}, ("a", "b")),
]


def with_ops(vectors, seed=0):
    rng = np.random.default_rng(seed + 1)
    for vector in vectors:
        vector["op"] = int(rng.integers(0, 2))
    return vectors


@pytest.mark.parametrize("netlist", [False, True])
@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("name, golden, ports", GOLDENS)
def test_functional_goldens(load_corpus, name, golden, ports, mode, netlist):
    program = lower(load_corpus(name))
    vectors = with_ops(words(8, ports, seed=len(name)))
    assert_equal(run_and_check(program, golden, vectors, mode, seed=5, netlist=netlist), [])


@pytest.mark.parametrize("netlist", [False, True])
@pytest.mark.parametrize("name, modes", [
    ("div_comb", MODES),
    ("div_pipe", MODES),
    ("div_iter", ("back-to-back", "isolated")),
])
def test_dividers(load_corpus, name, modes, netlist):
    program = lower(load_corpus(name))
    for mode in modes:
        mismatches = run_and_check(program, lambda v: {"q": v["left"] // v["r"]},
                                   divisions(12, seed=7), mode, seed=11, netlist=netlist)
        assert_equal(mismatches, [], err_msg=mode)


@given(st.integers(min_value=0, max_value=255), st.integers(min_value=1, max_value=255))
def test_restoring_divide(dividend, divisor):
    assert_equal(restoring_divide(dividend, divisor), divmod(dividend, divisor))


def test_stencil(load_corpus):
    program = lower(load_corpus("stencil"))
    signature = program.component("main").signature
    xs = [int(x) for x in np.random.default_rng(2).integers(0, 1000, size=10)]
    stimulus = gen_stimulus(signature, [{"x": x} for x in xs])
    padded = [0, 0] + xs
    expected = [{"out": sum(padded[t:t + 3])} for t in range(len(xs))]
    trace = run_stimulus(program, stimulus)
    assert_equal(compare(trace, stimulus, expected, signature), [])


def test_systolic(load_corpus):
    program = lower(load_corpus("systolic"))
    signature = program.component("main").signature
    vectors = words(6, ("l0", "l1", "t0", "t1"), seed=4, high=100)
    stimulus = gen_stimulus(signature, vectors)
    previous = [{"l0": 0, "l1": 0, "t0": 0, "t1": 0}] + vectors[:-1]
    totals = {"out00": 0, "out01": 0, "out10": 0, "out11": 0}
    expected = []
    for now, before in zip(vectors, previous):
        totals["out00"] += now["l0"] * now["t0"]
        totals["out01"] += before["l0"] * now["t1"]
        totals["out10"] += now["l1"] * before["t0"]
        totals["out11"] += before["l1"] * before["t1"]
        expected.append(dict(totals))
    trace = run_stimulus(program, stimulus)
    assert_equal(compare(trace, stimulus, expected, signature), [])


def test_wrong_signature_is_caught(load_corpus):
    """Trusting a window the design does not honor shows up as a mismatch"""
    program = lower(load_corpus("hold"))
    narrow = parse("comp main<G: 2>(@interface[G] go: 1, @[G, G+1] l: 32)"
                   " -> (@[G+2, G+3] out: 32) {\n}\n").component("main").signature
    mismatches = run_and_check(program, lambda v: {"out": v["l"]}, [{"l": 5}], "isolated",
                               signature=narrow)
    assert_equal(len(mismatches), 1)
    mismatch = mismatches[0]
    assert_equal((mismatch.vector, mismatch.port, mismatch.cycle, mismatch.expected),
                 (0, "out", 2, 5))
    assert mismatch.got is INVALID
    assert_equal(str(mismatch), "vector 0 port out cycle 2: expected 5 got X")


def test_load_stimulus(tmp_path):
    path = tmp_path / "stim.json"
    path.write_text(json.dumps({"vectors": [{"l": 1, "r": 2}], "mode": "isolated"}))
    document = load_stimulus(path)
    assert_equal(document["seed"], 0)
    assert_equal(document["mode"], "isolated")
    path.write_text(json.dumps({"mode": "isolated"}))
    assert_raises(ValueError, load_stimulus, path)
