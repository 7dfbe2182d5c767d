"""CSV readers with explicit schema validation.

Each reader checks the header row before touching any data and raises
SchemaError naming the file and the offending columns, so a mismatched
or truncated input fails loudly instead of producing an empty figure.
Readers never write anything; the CSV files are the only interface to
the simulator.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

METRICS_COLUMNS = ("epoch", "measure", "value")
SUMMARY_COLUMNS = ("epoch", "measure", "mean", "std")
SCORE_DIST_COLUMNS = ("epoch", "rank", "score")
COMPARISON_COLUMNS = ("policy", "seed", "final_coverage", "final_delay")
SWEEP_COLUMNS = ("delay_weight", "seed", "final_coverage", "final_delay")
ATTACK_COLUMNS = (
    "epoch",
    "victim_topic_coverage",
    "victim_topic_delay",
    "attacker_outgoing_fraction",
)


class SchemaError(ValueError):
    """Input file does not match the expected CSV schema."""

    def __init__(self, path: str | Path, problem: str) -> None:
        self.path = str(path)
        self.problem = problem
        super().__init__(f"{path}: {problem}")


def _read_table(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(path, "empty file, expected a header row")
    return rows[0], rows[1:]


def _check_columns(
    path: str | Path, header: list[str], expected: tuple[str, ...]
) -> None:
    if tuple(header) == expected:
        return
    missing = [name for name in expected if name not in header]
    extra = [name for name in header if name not in expected]
    parts = [f"expected columns {', '.join(expected)}"]
    if missing:
        parts.append(f"missing {', '.join(missing)}")
    if extra:
        parts.append(f"unexpected {', '.join(extra)}")
    raise SchemaError(path, "; ".join(parts))


def _parse_float(path: str | Path, text: str, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise SchemaError(path, f"non-numeric value {text!r} in column {column}")


def read_metric_series(path: str | Path) -> dict[str, list[tuple[int, float]]]:
    """Read a per-epoch metric table into {measure: [(epoch, value), ...]}.

    Accepts both the per-seed layout (epoch, measure, value) and the
    cross-seed layout (epoch, measure, mean, std); for the latter the
    mean column is used.  NaN values are kept so gaps stay visible.
    """
    header, rows = _read_table(path)
    if tuple(header) == METRICS_COLUMNS:
        value_index = 2
    elif tuple(header) == SUMMARY_COLUMNS:
        value_index = 2
    else:
        _check_columns(path, header, METRICS_COLUMNS)
    series: dict[str, list[tuple[int, float]]] = {}
    for row in rows:
        epoch = int(_parse_float(path, row[0], "epoch"))
        value = _parse_float(path, row[value_index], header[value_index])
        series.setdefault(row[1], []).append((epoch, value))
    for points in series.values():
        points.sort(key=lambda point: point[0])
    return series


def read_score_distribution(path: str | Path) -> dict[int, list[float]]:
    """Read per-epoch sorted score curves into {epoch: [score by rank]}."""
    header, rows = _read_table(path)
    _check_columns(path, header, SCORE_DIST_COLUMNS)
    ranked: dict[int, list[tuple[int, float]]] = {}
    for row in rows:
        epoch = int(_parse_float(path, row[0], "epoch"))
        rank = int(_parse_float(path, row[1], "rank"))
        score = _parse_float(path, row[2], "score")
        ranked.setdefault(epoch, []).append((rank, score))
    curves: dict[int, list[float]] = {}
    for epoch, pairs in ranked.items():
        pairs.sort(key=lambda pair: pair[0])
        curves[epoch] = [score for _, score in pairs]
    return curves


def read_policy_comparison(path: str | Path) -> list[tuple[str, int, float, float]]:
    """Read final-epoch results per policy and seed."""
    header, rows = _read_table(path)
    _check_columns(path, header, COMPARISON_COLUMNS)
    out: list[tuple[str, int, float, float]] = []
    for row in rows:
        out.append(
            (
                row[0],
                int(_parse_float(path, row[1], "seed")),
                _parse_float(path, row[2], "final_coverage"),
                _parse_float(path, row[3], "final_delay"),
            )
        )
    return out


def read_weight_sweep(path: str | Path) -> list[tuple[float, int, float, float]]:
    """Read final-epoch results per swept weight value and seed."""
    header, rows = _read_table(path)
    _check_columns(path, header, SWEEP_COLUMNS)
    out: list[tuple[float, int, float, float]] = []
    for row in rows:
        out.append(
            (
                _parse_float(path, row[0], "delay_weight"),
                int(_parse_float(path, row[1], "seed")),
                _parse_float(path, row[2], "final_coverage"),
                _parse_float(path, row[3], "final_delay"),
            )
        )
    return out


def read_attack_series(
    path: str | Path,
) -> list[tuple[int, float | None, float | None, float]]:
    """Read a per-epoch attack trace; NaN victim columns become None."""
    header, rows = _read_table(path)
    _check_columns(path, header, ATTACK_COLUMNS)
    out: list[tuple[int, float | None, float | None, float]] = []
    for row in rows:
        coverage = _parse_float(path, row[1], "victim_topic_coverage")
        delay = _parse_float(path, row[2], "victim_topic_delay")
        out.append(
            (
                int(_parse_float(path, row[0], "epoch")),
                None if math.isnan(coverage) else coverage,
                None if math.isnan(delay) else delay,
                _parse_float(path, row[3], "attacker_outgoing_fraction"),
            )
        )
    out.sort(key=lambda item: item[0])
    return out
