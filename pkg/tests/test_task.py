import json

import pytest

from flexdiag.task import (AssignmentConstraint, Domain, ReconfigurationTask, TaskError, Variable, dump_task,
                           load_task, load_task_file, parse_constraint, task_to_dict)
from conftest import data_path


def _doc(name):
    with open(data_path(name)) as fh:
        return json.load(fh)


def test_container_counts(container):
    assert (len(container.variables), len(container.kb), len(container.solution),
            len(container.requirements)) == (8, 5, 8, 2)
    assert container.ordering == [f"s{i}" for i in range(1, 9)]


def test_scheduling_counts(scheduling):
    assert (len(scheduling.variables), len(scheduling.kb), len(scheduling.solution),
            len(scheduling.requirements)) == (9, 15, 9, 1)
    assert scheduling.by_id()["c1"].source_text == "o1m1 < o1m2"


def test_abstract_fixture_loads(abstract):
    assert [s.id for s in abstract.solution] == [f"c{i}" for i in range(1, 9)]
    assert not abstract.requirements


def test_missing_variable_is_incomplete():
    doc = _doc("container.json")
    doc["solution"] = [s for s in doc["solution"] if s["var"] != "oil"]
    with pytest.raises(TaskError, match="incomplete solution"):
        load_task(json.dumps(doc))


def test_out_of_domain_value():
    doc = _doc("container.json")
    doc["solution"][0]["value"] = 9
    with pytest.raises(TaskError, match="out-of-domain"):
        load_task(json.dumps(doc).encode())


def test_duplicate_id():
    doc = _doc("container.json")
    doc["requirements"][0]["id"] = doc["kb"][0]["id"]
    with pytest.raises(TaskError, match="duplicate id"):
        load_task(json.dumps(doc))


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("variables"),
    lambda d: d["kb"][0].pop("expr"),
    lambda d: d["variables"][0].update(domain={"kind": "tree"}),
    lambda d: d["variables"][0].update(domain={"kind": "range", "min": 3, "max": 1}),
    lambda d: d["kb"][0].update(expr="nosuchvar == 1"),
    lambda d: d.update(ordering=["s1"]),
])
def test_schema_violations(mutate):
    doc = _doc("container.json")
    mutate(doc)
    with pytest.raises(TaskError):
        load_task(json.dumps(doc))


def test_not_json():
    with pytest.raises(TaskError, match="schema"):
        load_task(b"{nope")


def test_round_trip_through_json(scheduling):
    again = load_task(dump_task(scheduling))
    assert task_to_dict(again) == task_to_dict(scheduling)


def test_explicit_ordering_is_kept():
    doc = _doc("container.json")
    doc["ordering"] = [f"s{i}" for i in range(8, 0, -1)]
    assert load_task(json.dumps(doc)).ordering[0] == "s8"


def test_domains():
    assert Domain.boolean().values == (0, 1)
    assert Domain.range(2, 4).values == (2, 3, 4)
    assert Domain.of([3, 1, 3]).values == (1, 3)
    with pytest.raises(TaskError):
        Domain.of([])
    with pytest.raises(TaskError):
        Variable("1bad", Domain.boolean())


def test_assignment_constraint():
    s = AssignmentConstraint("s1", "pc", 3)
    assert s.source_text == "pc == 3" and s.scope == {"pc"}


def test_with_ordering_shares_model(container):
    model = container.model
    other = container.with_ordering(list(reversed(container.ordering)))
    assert other.model is model
    with pytest.raises(TaskError):
        container.with_ordering(["s1", "s2"])


def test_parse_constraint_checks_scope():
    variables = [Variable("a", Domain.boolean())]
    assert parse_constraint("k", "not a", variables).scope == {"a"}
    with pytest.raises(Exception):
        parse_constraint("k", "b", variables)


def test_reconfiguration_task_rejects_double_assignment():
    v = [Variable("a", Domain.boolean())]
    with pytest.raises(TaskError):
        ReconfigurationTask(v, [], [AssignmentConstraint("s1", "a", 0), AssignmentConstraint("s2", "a", 1)], [])


def test_load_task_file(tmp_path, container):
    p = tmp_path / "t.json"
    p.write_text(dump_task(container))
    assert len(load_task_file(str(p)).solution) == 8
