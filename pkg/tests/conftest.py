import json
import os
import sys

import pytest

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)

from flexdiag.task import load_task_file, task_from_dict  # noqa: E402

DATA = os.path.join(os.path.dirname(HERE), "src", "flexdiag", "data")
FIXTURES = os.path.join(HERE, "fixtures")


def data_path(name):
    return os.path.join(DATA, name)


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def ids(cs):
    return [c.id for c in cs]


def micro_corpus():
    with open(fixture_path("micro_oracle.json")) as fh:
        entries = json.load(fh)
    return [(e["seed"], task_from_dict(e["task"]), [frozenset(d) for d in e["min_diagnoses"]]) for e in entries]


@pytest.fixture
def container():
    return load_task_file(data_path("container.json"))


@pytest.fixture
def scheduling():
    return load_task_file(data_path("scheduling.json"))


@pytest.fixture
def abstract():
    return load_task_file(data_path("abstract_conflicts.json"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(results):
        passed, detail = results[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
