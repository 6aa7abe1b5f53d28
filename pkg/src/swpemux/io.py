"""Readers and writers for the package's file formats.

All writers produce deterministic bytes for deterministic inputs: fixed
column order, sorted JSON keys, shortest-round-trip float formatting and a
plain \\n line terminator. Every emitted format parses back through the
matching reader in this module.
"""
from __future__ import annotations

import csv
import io
import json
import os
from typing import Any

from .engine import BatchResult, CoincidenceRow, CoincidenceTable, SettingPair
from .util import atomic_write_text

COINCIDENCE_COLUMNS = (
    "setting_s",
    "setting_a",
    "c_d1t1",
    "c_d1t2",
    "c_d2t1",
    "c_d2t2",
    "n_d1",
    "n_d2",
    "n_total",
)


def coincidence_table_to_csv(table: CoincidenceTable) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COINCIDENCE_COLUMNS)
    for row in table.rows:
        stokes, anti = row.pair.tokens()
        writer.writerow(
            [stokes, anti, row.c_d1t1, row.c_d1t2, row.c_d2t1, row.c_d2t2,
             row.n_d1, row.n_d2, row.n_total]
        )
    return buffer.getvalue()


def write_coincidence_csv(table: CoincidenceTable, path: str) -> None:
    atomic_write_text(path, coincidence_table_to_csv(table))


def parse_coincidence_csv(text: str) -> CoincidenceTable:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("coincidence CSV is empty") from None
    if tuple(header) != COINCIDENCE_COLUMNS:
        raise ValueError(
            f"unexpected coincidence CSV header {header!r}; expected {list(COINCIDENCE_COLUMNS)}"
        )
    table = CoincidenceTable()
    for line_number, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(COINCIDENCE_COLUMNS):
            raise ValueError(f"line {line_number}: expected {len(COINCIDENCE_COLUMNS)} fields")
        pair = SettingPair.from_tokens(fields[0], fields[1])
        try:
            numbers = [int(v) for v in fields[2:]]
        except ValueError as exc:
            raise ValueError(f"line {line_number}: counts must be integers") from exc
        row = CoincidenceRow(pair, *numbers)
        row.validate()
        table.rows.append(row)
    return table


def read_coincidence_csv(path: str) -> CoincidenceTable:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return parse_coincidence_csv(handle.read())


def json_dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(payload: Any, path: str) -> None:
    atomic_write_text(path, json_dumps(payload))


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def batch_result_to_dict(result: BatchResult) -> dict:
    rows = []
    for row in result.table.rows:
        stokes, anti = row.pair.tokens()
        rows.append(
            {
                "setting_s": stokes,
                "setting_a": anti,
                "c_d1t1": row.c_d1t1,
                "c_d1t2": row.c_d1t2,
                "c_d2t1": row.c_d2t1,
                "c_d2t2": row.c_d2t2,
                "n_d1": row.n_d1,
                "n_d2": row.n_d2,
                "n_total": row.n_total,
            }
        )
    return {
        "rows": rows,
        "herald_bin_histogram": [int(v) for v in result.herald_bin_histogram],
        "n_trials_total": result.n_trials_total,
        "n_heralds": result.n_heralds,
        "n_dark_heralds": result.n_dark_heralds,
        "n_coincidences": result.n_coincidences,
        "p_s_hat": result.p_s_hat,
        "p_sas_hat": result.p_sas_hat,
        "tau": result.tau,
        "seed": result.seed,
    }


def write_batch_json(result: BatchResult, path: str) -> None:
    write_json(batch_result_to_dict(result), path)


def read_decay_points(path: str) -> list:
    """Read (tau, S, error) points from a CSV with header tau,s[,s_err] or a
    JSON list of {"tau":..., "s":..., "s_err":...} objects."""
    extension = os.path.splitext(path)[1].lower()
    if extension == ".json":
        data = read_json(path)
        if not isinstance(data, list):
            raise ValueError("decay point JSON must be a list of objects")
        points = []
        for entry in data:
            if "tau" not in entry or "s" not in entry:
                raise ValueError("each decay point needs 'tau' and 's'")
            if "s_err" in entry and entry["s_err"] is not None:
                points.append((float(entry["tau"]), float(entry["s"]), float(entry["s_err"])))
            else:
                points.append((float(entry["tau"]), float(entry["s"])))
        return points
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise ValueError("decay point CSV is empty")
        header = [h.strip().lower() for h in header]
        if header[:2] != ["tau", "s"]:
            raise ValueError("decay point CSV header must start with tau,s")
        with_errors = len(header) > 2 and header[2] == "s_err"
        points = []
        for fields in reader:
            if not fields:
                continue
            if with_errors and len(fields) > 2 and fields[2].strip():
                points.append((float(fields[0]), float(fields[1]), float(fields[2])))
            else:
                points.append((float(fields[0]), float(fields[1])))
        return points
