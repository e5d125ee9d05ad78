import json
import logging

import pytest
from numpy.testing import assert_equal

from filament.cli import EXIT_ERRORS, EXIT_IO, EXIT_OK, main
from filament.log_oracle import body_log


@pytest.fixture(autouse=True)
def detach_handlers():
    """Every run attaches console handlers; drop them so no test writes to a closed stream"""
    yield
    for name in ("fil", "filament"):
        logging.getLogger(name).handlers = []


@pytest.fixture
def corpus(corpus_dir):
    def path(name):
        return str(corpus_dir / "{}.fil".format(name))

    return path


def test_check(corpus, capsys):
    assert_equal(main(["check", corpus("twice"), corpus("alu")]), EXIT_OK)
    assert_equal(main(["check", corpus("conflict")]), EXIT_ERRORS)
    err = capsys.readouterr().err
    assert "error[E013]" in err
    assert "y := A<G>(x.out, c);" in err


def test_check_json(corpus, capsys):
    assert_equal(main(["check", "--json", corpus("twice")]), EXIT_OK)
    assert_equal(json.loads(capsys.readouterr().out), [])
    assert_equal(main(["check", "--json", corpus("unsafe_trigger")]), EXIT_ERRORS)
    document = json.loads(capsys.readouterr().out)
    assert_equal([d["code"] for d in document], ["E014"])


def test_check_dump_log(corpus, goldens_dir, capsys):
    assert_equal(main(["check", "--dump-log", corpus("log_examples")]), EXIT_OK)
    out = capsys.readouterr().out
    assert "// add\n" + (goldens_dir / "add.log").read_text() in out


def test_check_dump_body_log(corpus, load_corpus, capsys):
    assert_equal(main(["check", "--dump-log", corpus("twice")]), EXIT_OK)
    out = capsys.readouterr().out
    body = body_log(load_corpus("twice"), "main").dump()
    assert "// main body\n" + body in out
    assert "t=2 R={a1.out, r1.out}" in body


def test_check_reports_offset_overflow(tmp_path, capsys):
    source = tmp_path / "far.fil"
    source.write_text("extern comp E<G: 10>(@interface[G] go: 1, @[G, G+1] a: 32) -> ();\n"
                      "comp main<G: 1>(@interface[G] go: 1, @[G+65530, G+65531] a: 32) -> () {\n"
                      "  e := new E;\n  x := e<G+65530>(a);\n}\n")
    assert_equal(main(["check", str(source)]), EXIT_ERRORS)
    assert "error[E008]" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert_equal(main(["check", str(tmp_path / "nothing.fil")]), EXIT_IO)
    assert "cannot read" in capsys.readouterr().err


def test_compile_low(corpus, goldens_dir, capsys):
    assert_equal(main(["compile", "--emit", "low", corpus("twice")]), EXIT_OK)
    assert_equal(capsys.readouterr().out, (goldens_dir / "twice.low").read_text())


def test_compile_verilog(corpus, tmp_path, capsys):
    assert_equal(main(["compile", "-o", str(tmp_path), corpus("twice")]), EXIT_OK)
    assert_equal(sorted(p.name for p in tmp_path.iterdir()), ["main.v", "primitives.v"])
    assert (tmp_path / "main.v").read_text().startswith("module main (")
    assert "module Add" in (tmp_path / "primitives.v").read_text()
    assert_equal(main(["compile", corpus("twice")]), EXIT_OK)
    assert "// main.v\nmodule main (" in capsys.readouterr().out


def test_compile_without_primitive(corpus, capsys):
    assert_equal(main(["compile", corpus("tdot")]), EXIT_ERRORS)
    assert "Tdot" in capsys.readouterr().err


def test_compile_rejected(corpus):
    assert_equal(main(["compile", corpus("shared_mult")]), EXIT_ERRORS)


def test_interface(corpus, capsys):
    assert_equal(main(["interface", "--json", corpus("conv2d"), "Conv2d"]), EXIT_OK)
    interface = json.loads(capsys.readouterr().out)
    assert_equal(interface["events"][0]["delay"], 9)
    assert_equal(interface["ports"][0]["interval"], [0, 6])

    assert_equal(main(["interface", corpus("twice"), "main"]), EXIT_OK)
    out = capsys.readouterr().out
    assert "{:30s} : {}".format("event G", "delay 3") in out
    assert "{:30s} : {}".format("out out", "32 bits, [2, 3]") in out

    # library components are found even when the file does not use them
    assert_equal(main(["interface", "--json", corpus("twice"), "FastMult"]), EXIT_OK)
    assert_equal(json.loads(capsys.readouterr().out)["name"], "FastMult")
    assert_equal(main(["interface", corpus("twice"), "Nope"]), EXIT_ERRORS)


def test_sim(corpus, tmp_path, capsys):
    stim = tmp_path / "stim.json"
    stim.write_text(json.dumps({"vectors": [{"l": 3, "r": 4}, {"l": 1, "r": 1}],
                                "expected": [{"out": 14}, {"out": 4}]}))
    vcd = tmp_path / "twice.vcd"
    assert_equal(main(["sim", "--stim", str(stim), "--vcd", str(vcd), corpus("twice")]),
                 EXIT_OK)
    lines = capsys.readouterr().out.splitlines()
    assert_equal(len(lines), 32)
    assert_equal(lines[0], "0 go=1 l=3 r=4 out=7")
    assert_equal(lines[5], "5 go=X l=X r=X out=4")
    assert "$scope module main $end" in vcd.read_text()

    assert_equal(main(["sim", "--netlist", "--cycles", "6", "--stim", str(stim),
                       corpus("twice")]), EXIT_OK)
    assert_equal(capsys.readouterr().out.splitlines()[5], "5 go=0 l=0 r=0 out=4")


def test_sim_mismatch(corpus, tmp_path, capsys):
    stim = tmp_path / "stim.json"
    stim.write_text(json.dumps({"vectors": [{"l": 3, "r": 4}], "expected": [{"out": 15}]}))
    assert_equal(main(["sim", "--stim", str(stim), corpus("twice")]), EXIT_ERRORS)
    assert "mismatch: vector 0 port out cycle 2: expected 15 got 14" in capsys.readouterr().err


def test_sim_bad_stimulus(corpus, tmp_path):
    stim = tmp_path / "stim.json"
    stim.write_text(json.dumps({"vectors": [{"l": 3}]}))
    assert_equal(main(["sim", "--stim", str(stim), corpus("twice")]), EXIT_IO)
    assert_equal(main(["sim", "--stim", str(tmp_path / "none.json"), corpus("twice")]),
                 EXIT_IO)


def test_fuzz(capsys):
    assert_equal(main(["fuzz", "--seed", "3", "--trials", "4"]), EXIT_OK)
    out = capsys.readouterr().out
    assert "| fuzz report" in out
    assert "{:30s} : {}".format("trials", 4) in out
    assert_equal(main(["fuzz", "--trials", "0"]), EXIT_OK)


def test_settings(tmp_path, capsys):
    settings = tmp_path / "settings.yml"
    settings.write_text("fuzz:\n  trials: 2\n")
    assert_equal(main(["--settings", str(settings), "fuzz"]), EXIT_OK)
    assert "{:30s} : {}".format("trials", 2) in capsys.readouterr().out
    assert_equal(main(["--settings", str(tmp_path / "missing.yml"), "fuzz"]), EXIT_IO)
