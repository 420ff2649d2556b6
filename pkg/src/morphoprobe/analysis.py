"""Cross-system aggregation: metric/accuracy correlation and report tables.

With only a handful of systems, each correlation is reported with its n;
cells whose correlation is undefined (constant metric, fewer than two
paired points) are marked NA, never imputed.  Fertility enters the matrix
raw (not sign-flipped); orientation is documented in the output metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError
from .metrics import AlignmentReport
from .probe import format_accuracy

TASK_NAMES = ("root_pattern_real", "root_pattern_nonce", "affix_build")

# (column name, AlignmentReport attribute)
METRIC_ATTRS = (
    ("fertility", "fertility"),
    ("morpheme_f1", "morpheme_f1"),
    ("boundary_p", "boundary_precision"),
    ("boundary_r", "boundary_recall"),
    ("boundary_f1", "boundary_f1"),
    ("mcr", "mcr"),
)
METRIC_NAMES = tuple(name for name, _ in METRIC_ATTRS)

MATRIX_CSV_HEADER = "metric,task,n,r"


@dataclass(frozen=True)
class SystemRow:
    """One system's alignment report plus its task accuracies."""

    system: str
    alignment: AlignmentReport
    accuracies: dict[str, float]

    def __post_init__(self):
        unknown = set(self.accuracies) - set(TASK_NAMES)
        if unknown:
            raise DataError(f"unknown task names {sorted(unknown)}")


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient.

    Raises DataError for length mismatch, fewer than two points, or a
    constant vector (undefined correlation).
    """
    if len(x) != len(y):
        raise DataError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise DataError("pearson needs at least two points")
    mean_x = math.fsum(x) / n
    mean_y = math.fsum(y) / n
    sxx = math.fsum((xi - mean_x) ** 2 for xi in x)
    syy = math.fsum((yi - mean_y) ** 2 for yi in y)
    if sxx == 0.0 or syy == 0.0:
        raise DataError("correlation undefined for a constant vector")
    sxy = math.fsum((xi - mean_x) * (yi - mean_y) for xi, yi in zip(x, y))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class CorrelationCell:
    r: float | None
    n: int


@dataclass(frozen=True)
class CorrelationMatrix:
    metrics: tuple[str, ...]
    tasks: tuple[str, ...]
    cells: dict[tuple[str, str], CorrelationCell]


def correlate(rows: Sequence[SystemRow]) -> CorrelationMatrix:
    """One r per (alignment metric, task); undefined cells are None."""
    if len(rows) < 2:
        raise DataError(f"need at least 2 systems, got {len(rows)}")
    cells: dict[tuple[str, str], CorrelationCell] = {}
    for metric_name, attr in METRIC_ATTRS:
        for task in TASK_NAMES:
            pairs = [
                (getattr(row.alignment, attr), row.accuracies[task])
                for row in rows
                if task in row.accuracies
            ]
            try:
                r = pearson([p[0] for p in pairs], [p[1] for p in pairs])
            except DataError:
                r = None
            cells[(metric_name, task)] = CorrelationCell(r=r, n=len(pairs))
    return CorrelationMatrix(metrics=METRIC_NAMES, tasks=TASK_NAMES, cells=cells)


def matrix_to_csv(matrix: CorrelationMatrix) -> str:
    """Long-format CSV; ``repr`` floats round-trip losslessly."""
    lines = [MATRIX_CSV_HEADER]
    for metric in matrix.metrics:
        for task in matrix.tasks:
            cell = matrix.cells[(metric, task)]
            r = "NA" if cell.r is None else repr(cell.r)
            lines.append(f"{metric},{task},{cell.n},{r}")
    return "\n".join(lines) + "\n"


def parse_matrix_csv(lines: Iterable[str]) -> CorrelationMatrix:
    cells: dict[tuple[str, str], CorrelationCell] = {}
    metrics: list[str] = []
    tasks: list[str] = []
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#") or line == MATRIX_CSV_HEADER:
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise DataError(f"bad matrix row: {line!r}")
        metric, task, n, r = fields
        if metric not in metrics:
            metrics.append(metric)
        if task not in tasks:
            tasks.append(task)
        cells[(metric, task)] = CorrelationCell(
            r=None if r == "NA" else float(r), n=int(n)
        )
    return CorrelationMatrix(metrics=tuple(metrics), tasks=tuple(tasks), cells=cells)


def format_matrix(matrix: CorrelationMatrix) -> str:
    """Wide plain-text view with NA for undefined cells."""
    headers = ["metric"] + [f"{t} (r, n)" for t in matrix.tasks]
    rows = []
    for metric in matrix.metrics:
        row = [metric]
        for task in matrix.tasks:
            cell = matrix.cells[(metric, task)]
            row.append("NA" if cell.r is None else f"{cell.r:+.2f} (n={cell.n})")
        rows.append(row)
    widths = [
        max(len(headers[i]), *(len(r[i]) for r in rows)) for i in range(len(headers))
    ]
    out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    out.append("-" * len(out[0]))
    for row in rows:
        out.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Scores files (written by `score`, consumed by `correlate`/`report`)

SCORES_CSV_HEADER = "system,task,accuracy,correct,total,failed"


def scores_to_csv(system: str, task_stats: dict[str, tuple[int, int, int]]) -> str:
    """``task_stats`` maps task name to (correct, total, failed)."""
    lines = [SCORES_CSV_HEADER]
    for task in TASK_NAMES:
        if task not in task_stats:
            continue
        correct, total, failed = task_stats[task]
        acc = format_accuracy(100 * correct / total)
        lines.append(f"{system},{task},{acc},{correct},{total},{failed}")
    return "\n".join(lines) + "\n"


def parse_scores_csv(lines: Iterable[str]) -> list[dict]:
    rows = []
    header = SCORES_CSV_HEADER.split(",")
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#") or line == SCORES_CSV_HEADER:
            continue
        fields = line.split(",")
        if len(fields) != len(header):
            raise DataError(f"bad scores row: {line!r}")
        row: dict = dict(zip(header, fields))
        if row["task"] not in TASK_NAMES:
            raise DataError(f"unknown task {row['task']!r} in scores file")
        row["accuracy"] = float(row["accuracy"])
        for key in ("correct", "total", "failed"):
            row[key] = int(row[key])
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Combined report emission

SYSTEMS_CSV_HEADER = (
    "system,fertility,tokens,morpheme_f1,boundary_p,boundary_r,boundary_f1,"
    "mcr,words,excluded," + ",".join(TASK_NAMES)
)


def _star_column_max(table: list[list[str]], column: int):
    """Append the bold marker ``*`` to the largest value in a column."""
    values = []
    for row in table:
        try:
            values.append(float(row[column]))
        except ValueError:
            values.append(None)
    defined = [v for v in values if v is not None]
    if not defined:
        return
    best = max(defined)
    for row, value in zip(table, values):
        if value is not None and value == best:
            row[column] += "*"


def format_system_tables(rows: Sequence[SystemRow]) -> str:
    """Plain-text alignment and accuracy tables, column maxima starred."""
    align_rows = []
    for row in rows:
        r = row.alignment
        align_rows.append(
            [
                row.system,
                f"{r.fertility:.2f}",
                str(r.total_tokens),
                f"{100 * r.morpheme_f1:.2f}",
                f"{100 * r.boundary_precision:.2f}",
                f"{100 * r.boundary_recall:.2f}",
                f"{100 * r.boundary_f1:.2f}",
                f"{100 * r.mcr:.2f}",
            ]
        )
    for column in range(1, 8):
        _star_column_max(align_rows, column)
    acc_rows = []
    for row in rows:
        acc_rows.append(
            [row.system]
            + [
                format_accuracy(row.accuracies[t]) if t in row.accuracies else "NA"
                for t in TASK_NAMES
            ]
        )
    for column in range(1, 1 + len(TASK_NAMES)):
        _star_column_max(acc_rows, column)

    def render(headers, table):
        widths = [
            max(len(headers[i]), *(len(r[i]) for r in table))
            for i in range(len(headers))
        ]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        lines.append("-" * len(lines[0]))
        for r in table:
            lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
        return "\n".join(lines)

    align_headers = [
        "Model", "Fertility", "# Tokens", "F1",
        "Boundary P", "Boundary R", "Boundary F1", "MCR",
    ]
    acc_headers = ["Model"] + list(TASK_NAMES)
    return (
        "Alignment metrics (* = column max)\n"
        + render(align_headers, align_rows)
        + "\n\nGeneration accuracy (* = column max)\n"
        + render(acc_headers, acc_rows)
    )


def emit_report(
    rows: Sequence[SystemRow],
    matrix: CorrelationMatrix | None,
    out_dir,
    metadata: str = "",
) -> list[Path]:
    """Write systems.csv, correlation_matrix.csv, and tables.txt."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def _write(name: str, body: str) -> Path:
        path = out / name
        header = f"{metadata}\n" if metadata else ""
        path.write_text(header + body, encoding="utf-8")
        written.append(path)
        return path

    system_lines = [SYSTEMS_CSV_HEADER]
    for row in rows:
        r = row.alignment
        system_lines.append(
            ",".join(
                [
                    row.system,
                    f"{r.fertility:.2f}",
                    str(r.total_tokens),
                    f"{100 * r.morpheme_f1:.2f}",
                    f"{100 * r.boundary_precision:.2f}",
                    f"{100 * r.boundary_recall:.2f}",
                    f"{100 * r.boundary_f1:.2f}",
                    f"{100 * r.mcr:.2f}",
                    str(r.word_count),
                    str(r.excluded_count),
                ]
                + [
                    format_accuracy(row.accuracies[t]) if t in row.accuracies else "NA"
                    for t in TASK_NAMES
                ]
            )
        )
    _write("systems.csv", "\n".join(system_lines) + "\n")
    tables = format_system_tables(rows)
    if matrix is not None:
        _write("correlation_matrix.csv", matrix_to_csv(matrix))
        tables += "\n\nCorrelation (alignment metric vs accuracy)\n" + format_matrix(
            matrix
        )
    _write("tables.txt", tables + "\n")
    return written
