#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Fixtures giving access to the corpus programs in data/corpus and the goldens in data/goldens
"""
from pathlib import Path

import pytest
import yaml
import yamlloader

from filament.parser import parse_file
from filament.resolve import resolve

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
CORPUS_DIR = DATA_DIR / "corpus"
GOLDENS_DIR = DATA_DIR / "goldens"

with open(CORPUS_DIR / "expected.yml") as _stream:
    EXPECTED = yaml.load(_stream, Loader=yamlloader.ordereddict.SafeLoader)

ACCEPTED = sorted(name for name, codes in EXPECTED.items() if not codes)
REJECTED = sorted(name for name, codes in EXPECTED.items() if codes)

# accepted programs whose externs all have behavioral models
SIMULABLE = sorted(set(ACCEPTED) - {"conv2d", "log_examples", "tdot"})


def corpus_path(name):
    return CORPUS_DIR / "{}.fil".format(name)


@pytest.fixture(scope="session")
def corpus_dir():
    return CORPUS_DIR


@pytest.fixture(scope="session")
def goldens_dir():
    return GOLDENS_DIR


@pytest.fixture(scope="session")
def expected_codes():
    return EXPECTED


@pytest.fixture(scope="session")
def load_corpus():
    """Parse and resolve a corpus program by name"""

    def load(name, entry=None):
        return resolve(parse_file(corpus_path(name)), entry=entry)

    return load


@pytest.fixture(scope="session")
def corpus_text():
    def read(name):
        return corpus_path(name).read_text()

    return read


@pytest.fixture(params=sorted(EXPECTED))
def corpus_name(request):
    return request.param


@pytest.fixture(params=ACCEPTED)
def accepted(request, load_corpus):
    return request.param, load_corpus(request.param)


@pytest.fixture(params=REJECTED)
def rejected(request, load_corpus):
    return request.param, load_corpus(request.param)


@pytest.fixture(params=SIMULABLE)
def simulable(request, load_corpus):
    return request.param, load_corpus(request.param)
