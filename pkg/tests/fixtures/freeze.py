"""Regenerate the frozen fixtures in this directory.

Expected values come from the reference oracles in tests/oracles.py or from
plain arithmetic, never from the code under test. Run from the repo root:

    python3 tests/fixtures/freeze.py
"""
from __future__ import annotations

import csv
import json
import os
import sys
from fractions import Fraction

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.dirname(HERE))

from oracles import min_diagnoses, satisfying_rows  # noqa: E402

from flexdiag.bench import random_csp_task  # noqa: E402
from flexdiag.featuremodel import fm_to_csp, generate_reconfig_requirements, parse_sxfm  # noqa: E402
from flexdiag.task import task_to_dict  # noqa: E402

MICRO_SEEDS = range(500, 700)


def micro_tasks():
    """Ten micro tasks (at most 8 variables): five with one minimal diagnosis, five with several."""
    single, multi = [], []
    for seed in MICRO_SEEDS:
        n = 3 + seed % 6
        task = random_csp_task(seed, n, 3, mixed=True)
        diags = min_diagnoses(task)
        if not diags:
            continue
        bucket = multi if len(diags) > 1 else single
        if len(bucket) < 5:
            bucket.append({"seed": seed, "num_vars": n, "task": task_to_dict(task),
                           "min_diagnoses": [sorted(d, key=lambda s: int(s[1:])) for d in diags]})
        if len(single) == len(multi) == 5:
            break
    return single + multi


def five_feature_requirements():
    with open(os.path.join(HERE, "five_feature.sxfm"), "rb") as fh:
        fm = parse_sxfm(fh.read())
    S = {"root": 1, "engine": 1, "radio": 0, "petrol": 1, "diesel": 0}
    reqs = generate_reconfig_requirements(fm, S, 0.6, 11)
    cfg = fm_to_csp(fm)
    _, ok = satisfying_rows(cfg.variables, cfg.kb + reqs)
    assert ok.any(), "frozen requirements must be consistent with the knowledge base"
    return {"solution": S, "fraction": 0.6, "seed": 11,
            "requirements": [{"id": r.id, "expr": r.source_text} for r in reqs]}


def aggregate_fixture():
    rng = np.random.default_rng(20)
    records = []
    for i in range(20):
        records.append({"num_vars": [50, 100][i % 2], "m": [1, 2][(i // 2) % 2],
                        "delta_size": int(rng.integers(1, 12)), "checks": int(rng.integers(5, 90)),
                        "elapsed_ms": round(float(rng.uniform(0.5, 40.0)), 3),
                        "minimality": round(float(rng.uniform(0.2, 1.0)), 4),
                        "accuracy": round(float(rng.uniform(0.0, 1.0)), 4)})
    # exact means with rationals, one group at a time
    groups = {}
    for r in records:
        groups.setdefault((r["num_vars"], r["m"]), []).append(r)
    expected = []
    for (nv, m) in sorted(groups):
        rows = groups[(nv, m)]
        mean = {k: float(sum(Fraction(str(r[k])) for r in rows) / len(rows))
                for k in ("delta_size", "checks", "elapsed_ms", "minimality", "accuracy")}
        expected.append({"num_vars": nv, "m": m, "n": len(rows), **mean})
    return records, expected


def main():
    with open(os.path.join(HERE, "micro_oracle.json"), "w") as fh:
        json.dump(micro_tasks(), fh, indent=1)
    with open(os.path.join(HERE, "five_feature_requirements.json"), "w") as fh:
        json.dump(five_feature_requirements(), fh, indent=1)
    records, expected = aggregate_fixture()
    with open(os.path.join(HERE, "aggregate_records.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(records[0]))
        w.writeheader()
        w.writerows(records)
    with open(os.path.join(HERE, "aggregate_expected.json"), "w") as fh:
        json.dump(expected, fh, indent=1)


if __name__ == "__main__":
    main()
