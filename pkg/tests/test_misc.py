#!/usr/bin/env python
# -*- coding: utf-8 -*-

import io
import logging
import time
from collections import OrderedDict

from numpy.testing import assert_almost_equal, assert_equal, assert_raises, assert_string_equal

from filament.misc import (MSG_FORMAT, Timer, create_logger, load_settings, make_directory,
                           merge_loggers, merge_settings, print_banner, read_settings_file)

def test_timer():
    number_of_seconds = 0.2
    with Timer(name="sleep", verbose=False) as timer:
        time.sleep(number_of_seconds)
    assert_almost_equal([timer.secs], [number_of_seconds], decimal=1)
    assert_almost_equal([timer.duration], [1000 * timer.secs], decimal=3)

def test_make_directory(tmp_path):
    new_dir = tmp_path / "build" / "verilog"
    make_directory(new_dir)
    assert new_dir.is_dir()
    # a second call on an existing directory is silent
    make_directory(new_dir)
    some_file = tmp_path / "file.v"
    some_file.write_text("")
    assert_raises(OSError, make_directory, some_file)


def test_create_logger():
    stream = io.StringIO()
    logger = create_logger(name="test_create", console_log_format_clean=True, stream=stream)
    logger.info("hello")
    assert_string_equal(stream.getvalue(), "hello\n")
    assert_raises(AssertionError, create_logger, console_log_format_clean=True,
                  console_log_format_long=True)

def test_merge_loggers():
    stream = io.StringIO()
    main_logger = create_logger(name="test_main", console_log_format_clean=True, stream=stream)
    merged = merge_loggers(main_logger, "test_merged", logger_level_to_merge=logging.WARNING)
    merged.info("dropped")
    merged.warning("kept")
    assert_string_equal(stream.getvalue(), "kept\n")
    merged.handlers = []

def test_merge_settings():
    defaults = OrderedDict([("fuzz", OrderedDict([("seed", 0), ("trials", 10)])),
                            ("backend", OrderedDict([("low_suffix", ".low")]))])
    merged = merge_settings(defaults, {"fuzz": {"trials": 5}, "extra": 1})
    assert_equal(merged["fuzz"], OrderedDict([("seed", 0), ("trials", 5)]))
    assert_equal(merged["extra"], 1)
    assert_equal(defaults["fuzz"]["trials"], 10)
    assert_equal(merge_settings(defaults, None), defaults)

def test_default_settings():
    settings = read_settings_file()
    assert_equal(list(settings), ["simulation", "harness", "fuzz", "backend"])
    assert_equal(settings["harness"]["mode"], "back-to-back")
    assert_equal(settings["fuzz"]["sharing_bias"], 0.6)

def test_load_settings(tmp_path):
    user_file = tmp_path / "user.yml"
    user_file.write_text("fuzz:\n  trials: 20\nsimulation:\n  cycles: 4\n")
    settings = load_settings(str(user_file))
    assert_equal(settings["fuzz"]["trials"], 20)
    assert_equal(settings["fuzz"]["seed"], 0)
    assert_equal(settings["simulation"]["cycles"], 4)
    assert_equal(load_settings()["fuzz"]["trials"], 1000)
    assert_raises(AssertionError, load_settings, str(tmp_path / "missing.yml"))

def test_print_banner(capsys):
    print_banner("report", width=12, to_stdout=True)
    assert_equal(capsys.readouterr().out, "\n------------\n| report   |\n------------\n")

def test_msg_format():
    assert_equal(MSG_FORMAT.format("trials", 3), "trials" + " " * 24 + " : 3")
