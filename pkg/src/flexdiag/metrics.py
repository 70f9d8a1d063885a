"""Diagnosis quality metrics and per-group averaging."""
from __future__ import annotations

from collections import OrderedDict
from statistics import fmean


def _as_set(x):
    return frozenset(getattr(x, "elements", x))


def minimality(delta, delta_min) -> float:
    """``|delta_min| / |delta|``; exceeds 1 when ``delta`` is the smaller set."""
    d, dm = _as_set(delta), _as_set(delta_min)
    if not d or not dm:
        raise ValueError("minimality needs two non-empty diagnoses")
    return len(dm) / len(d)


def accuracy(delta, delta_min) -> float:
    """Share of the reference diagnosis ``delta_min`` that ``delta`` reproduces."""
    d, dm = _as_set(delta), _as_set(delta_min)
    if not d or not dm:
        raise ValueError("accuracy needs two non-empty diagnoses")
    return len(d & dm) / len(dm)


AGGREGATE_FIELDS = (
    ("mean_delta_size", "delta_size"),
    ("mean_checks", "checks"),
    ("mean_time_ms", "elapsed_ms"),
    ("mean_minimality", "minimality"),
    ("mean_accuracy", "accuracy"),
)


def _get(record, key):
    return record[key] if isinstance(record, dict) else getattr(record, key)


def aggregate(records, group_keys=("num_vars", "m")) -> list:
    """Arithmetic means of the metric columns per group, in first-seen group order.

    Records carrying a non-empty ``error`` are skipped. Each output row holds
    the group key values, the means and the row count ``n``.
    """
    records = [r for r in records if not _get_error(r)]
    if not records:
        raise ValueError("aggregate needs at least one record")
    groups = OrderedDict()
    for r in records:
        groups.setdefault(tuple(_get(r, k) for k in group_keys), []).append(r)
    rows = []
    for key, members in groups.items():
        row = dict(zip(group_keys, key))
        for out, src in AGGREGATE_FIELDS:
            row[out] = fmean(float(_get(r, src)) for r in members)
        row["n"] = len(members)
        rows.append(row)
    return rows


def _get_error(record):
    try:
        return _get(record, "error")
    except (KeyError, AttributeError):
        return None
