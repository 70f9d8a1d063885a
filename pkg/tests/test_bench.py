import csv
import io
import math

import numpy as np
import pytest

from flexdiag.bench import (AGGREGATE_COLUMNS, RESULT_COLUMNS, SuiteConfig, compare_with_evolutionary,
                            derive_seed, random_csp_task, run_scenario, run_suite)
from flexdiag.diagnosis import Status
from flexdiag.engine import BudgetExceeded, CheckSession
from flexdiag.evolution import EvolutionParams, evolutionary_diagnose
from conftest import fixture_path, ids


def test_scenario_container_m2(container):
    rows = run_scenario(container, 2, repeats=3)
    assert [r.repeat_index for r in rows] == [1, 2, 3]
    assert all(r.delta_size == 4 and r.minimality == 0.75 and r.accuracy == 1.0 for r in rows)
    assert len({r.checks for r in rows}) == 1


def test_scenario_m1_is_reference(scheduling):
    rows = run_scenario(scheduling, 1, repeats=2)
    assert all(r.minimality == 1.0 and r.accuracy == 1.0 for r in rows)


def test_scenario_single_repeat(container):
    assert len(run_scenario(container, 1, repeats=1)) == 1
    with pytest.raises(ValueError):
        run_scenario(container, 1, repeats=0)


def test_scenario_checks_include_guards(container):
    (row,) = run_scenario(container, 1, repeats=1)
    assert row.checks == 6 + 1


def test_suite_cardinality():
    cfg = {"models": [{"id": "g", "generate": {"num_features": 20, "ctc_fraction": 0.1}}],
           "m": [1, 2], "fractions": [0.3], "reorderings": 2, "repeats": 1, "seed": 1}
    res = run_suite(cfg)
    assert len(res.rows) == 4
    assert len(res.summary) == 2
    m1 = next(s for s in res.summary if s["m"] == 1)
    assert m1["mean_minimality"] == 1.0


def test_suite_csv_layout():
    res = run_suite(SuiteConfig.load(fixture_path("mini_suite.json")))
    text = res.to_csv()
    results, aggregate = text.split("\n\n")
    assert next(csv.reader(io.StringIO(results))) == list(RESULT_COLUMNS)
    assert next(csv.reader(io.StringIO(aggregate))) == list(AGGREGATE_COLUMNS)
    # models x fractions x reorderings x m x repeats; the task model has no fraction axis
    assert len(res.rows) == 2 * 2 * 2 * 3 * 2 + 1 * 2 * 3 * 2
    assert all(not r.error for r in res.rows)
    for r in res.rows:
        assert 1 <= r.repeat_index <= 2 and math.isfinite(r.minimality)


def test_suite_matches_frozen_csv():
    res = run_suite(SuiteConfig.load(fixture_path("mini_suite.json")))
    with open(fixture_path("mini_suite_expected.csv")) as fh:
        assert res.to_csv(include_timing=False) == fh.read()


def test_suite_parallel_order_is_config_order():
    cfg = SuiteConfig.load(fixture_path("mini_suite.json"))
    serial = run_suite(cfg).to_csv(include_timing=False)
    cfg.workers = 4
    assert run_suite(cfg).to_csv(include_timing=False) == serial


def test_suite_records_row_errors(tmp_path):
    (tmp_path / "bad.json").write_text('{"variables": []}')
    cfg = SuiteConfig.from_dict({"models": [{"task": "bad.json"}], "m": [1], "fractions": [0.1]},
                                str(tmp_path))
    with pytest.raises(Exception):
        run_suite(cfg)  # unreadable model source fails up front
    cfg = {"models": [{"id": "one", "generate": {"num_features": 2, "ctc_fraction": 0.0,
                                                 "p_mandatory": 1.0, "p_optional": 0.0, "p_or": 0.0,
                                                 "p_alternative": 0.0}}],
           "m": [1, 2], "fractions": [0.5], "reorderings": 1, "repeats": 2}
    res = run_suite(cfg)
    assert len(res.rows) == 4 and all("NoAlternativeSolution" in r.error for r in res.rows)
    assert res.summary == []
    res = run_suite({"models": [{"id": "void", "generate": {"num_features": 2, "ctc_fraction": 1.0}}],
                     "m": [1], "fractions": [0.5, 1.0], "reorderings": 1, "repeats": 1})
    assert [r.error.split(":")[0] for r in res.rows] == ["GenerationFailed"] * 2


def test_suite_rejects_unknown_keys():
    with pytest.raises(ValueError):
        SuiteConfig.from_dict({"models": [], "m": [1], "fractions": [0.1], "bogus": 1})
    with pytest.raises(ValueError):
        SuiteConfig.from_dict({"models": [], "m": [1], "fractions": [0.1], "reorder": "sideways"})


def test_reorder_requirements_mode():
    cfg = {"models": [{"id": "g", "generate": {"num_features": 20}}], "m": [1, 2], "fractions": [0.5],
           "reorderings": 2, "repeats": 1, "reorder": "requirements"}
    res = run_suite(cfg)
    assert len(res.rows) == 4 and all(not r.error for r in res.rows)


def test_derive_seed_stable():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)


@pytest.mark.parametrize("seed", range(5))
def test_random_csp_task_shape(seed):
    t = random_csp_task(seed, 6)
    assert len(t.variables) == len(t.solution) == 6
    assert 1 <= len(t.requirements) <= 3
    assert t.model.is_consistent(ids(t.kb))


# --- evolutionary baseline -------------------------------------------------------

def test_evolution_container_finds_valid_diagnosis(container):
    d = evolutionary_diagnose(container, EvolutionParams(population_size=30, generations=60, seed=3))
    assert d.status is Status.FOUND
    keep = [s for s in container.ordering if s not in d.ids]
    assert container.model.is_consistent(ids(container.kb + container.requirements) + keep)


def test_evolution_all_ones_one_generation(scheduling):
    d = evolutionary_diagnose(scheduling, EvolutionParams(population_size=4, generations=1, init="ones",
                                                          mutation_rate=0.0, crossover_rate=0.0))
    assert d.status is Status.FOUND and d.ids == set(scheduling.ordering)


def test_evolution_partial_status(scheduling):
    d = evolutionary_diagnose(scheduling, EvolutionParams(population_size=2, generations=1, init_density=0.0,
                                                          mutation_rate=0.0, seed=1))
    assert d.status is Status.PARTIAL


def test_evolution_deterministic(container):
    p = EvolutionParams(population_size=20, generations=30, seed=9)
    assert evolutionary_diagnose(container, p).elements == evolutionary_diagnose(container, p).elements


def test_evolution_budget(scheduling):
    with pytest.raises(BudgetExceeded):
        evolutionary_diagnose(scheduling, EvolutionParams(generations=500), CheckSession(time_budget=0.0))


@pytest.mark.parametrize("kwargs", [dict(generations=0), dict(crossover_rate=1.5), dict(mutation_rate=-0.1),
                                    dict(tournament_size=0), dict(init="zeros")])
def test_evolution_params_validated(kwargs):
    with pytest.raises(ValueError):
        EvolutionParams(**kwargs)


def test_comparison_rows(container):
    rows = compare_with_evolutionary(container, EvolutionParams(population_size=20, generations=40, seed=2))
    assert [r.approach for r in rows] == ["flexdiag", "evolutionary"]
    assert rows[0].minimality == 1.0 and rows[0].status == "found"
    assert rows[1].status in ("found", "partial")
