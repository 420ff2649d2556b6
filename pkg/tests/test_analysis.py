import math

import pytest
from hypothesis import assume, given, strategies as st

from morphoprobe.analysis import (
    CorrelationCell,
    SystemRow,
    correlate,
    emit_report,
    format_matrix,
    format_system_tables,
    matrix_to_csv,
    parse_matrix_csv,
    parse_scores_csv,
    pearson,
    scores_to_csv,
)
from morphoprobe.errors import DataError
from morphoprobe.metrics import AlignmentReport


def report_with(**overrides) -> AlignmentReport:
    values = dict(
        fertility=1.5,
        total_tokens=150,
        boundary_precision=0.5,
        boundary_recall=0.5,
        boundary_f1=0.5,
        morpheme_f1=0.5,
        mcr=0.5,
        word_count=100,
        excluded_count=0,
    )
    values.update(overrides)
    return AlignmentReport(**values)


def rows_with(metric_values, accuracy_values, metric="mcr", task="affix_build"):
    rows = []
    for index, (m, a) in enumerate(zip(metric_values, accuracy_values)):
        rows.append(
            SystemRow(
                system=f"sys{index}",
                alignment=report_with(**{metric: m}),
                accuracies={task: a},
            )
        )
    return rows


class TestPearson:
    def test_perfect_correlation(self):
        assert abs(pearson([1, 2, 3], [1, 2, 3]) - 1.0) < 1e-9

    def test_perfect_anticorrelation(self):
        assert abs(pearson([1, 2, 3], [-1, -2, -3]) - (-1.0)) < 1e-9

    def test_closed_form_example(self):
        expected = 3 / math.sqrt(2 * 14 / 3)
        r = pearson([1, 2, 3], [1, 2, 4])
        assert abs(r - expected) < 1e-9
        assert f"{r:.5f}" == "0.98198"

    def test_constant_vector_is_an_error(self):
        with pytest.raises(DataError, match="constant"):
            pearson([1, 1, 1], [1, 2, 3])

    def test_too_few_points(self):
        with pytest.raises(DataError):
            pearson([1], [2])

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            pearson([1, 2], [1, 2, 3])

    def test_within_unit_interval(self):
        assert -1.0 <= pearson([1, 2, 3, 4], [1.0000001, 2, 3, 4.0000001]) <= 1.0

    @given(
        st.lists(st.floats(-100, 100), min_size=3, max_size=8),
        st.lists(st.floats(-100, 100), min_size=8, max_size=8),
    )
    def test_symmetry_and_affine_invariance(self, x, y):
        y = y[: len(x)]
        spread = lambda v: max(v) - min(v) > 1e-6
        assume(spread(x) and spread(y))
        r = pearson(x, y)
        assert abs(r - pearson(y, x)) < 1e-12
        scaled = [2.5 * xi + 7 for xi in x]
        assume(spread(scaled))
        assert abs(pearson(scaled, y) - r) < 1e-9


class TestCorrelate:
    def test_two_systems_give_unit_cells(self):
        rows = rows_with([0.1, 0.9], [10.0, 90.0])
        matrix = correlate(rows)
        cell = matrix.cells[("mcr", "affix_build")]
        assert cell.r == 1.0
        assert cell.n == 2

    def test_constant_metric_column_is_missing(self):
        rows = rows_with([0.5, 0.5, 0.5], [10.0, 50.0, 90.0], metric="fertility")
        matrix = correlate(rows)
        for task in matrix.tasks:
            assert matrix.cells[("fertility", task)].r is None

    def test_linear_relation_recovers_unit_correlation(self):
        mcr_values = [0.2, 0.4, 0.6, 0.8]
        rows = rows_with(mcr_values, [10 * v for v in mcr_values])
        matrix = correlate(rows)
        assert abs(matrix.cells[("mcr", "affix_build")].r - 1.0) < 1e-12

    def test_fewer_than_two_rows(self):
        with pytest.raises(DataError):
            correlate(rows_with([0.5], [50.0]))

    def test_permutation_invariance(self):
        rows = rows_with([0.2, 0.7, 0.5], [30.0, 80.0, 10.0])
        forward = correlate(rows)
        backward = correlate(list(reversed(rows)))
        assert forward == backward

    def test_missing_task_lowers_n(self):
        rows = rows_with([0.2, 0.7, 0.5], [30.0, 80.0, 10.0])
        rows[2] = SystemRow(system="sys2", alignment=rows[2].alignment, accuracies={})
        matrix = correlate(rows)
        assert matrix.cells[("mcr", "affix_build")].n == 2

    def test_unknown_task_name_rejected(self):
        with pytest.raises(DataError):
            SystemRow(system="s", alignment=report_with(), accuracies={"typo": 1.0})


class TestMatrixCSV:
    def test_roundtrip_is_lossless(self):
        rows = rows_with([0.21, 0.74, 0.53], [31.0, 87.0, 13.0])
        matrix = correlate(rows)
        parsed = parse_matrix_csv(matrix_to_csv(matrix).splitlines())
        assert parsed == matrix

    def test_na_cells(self):
        rows = rows_with([0.5, 0.5], [10.0, 20.0])
        matrix = correlate(rows)
        text = matrix_to_csv(matrix)
        assert ",NA" in text
        parsed = parse_matrix_csv(text.splitlines())
        assert parsed.cells[("mcr", "affix_build")] == CorrelationCell(None, 2)

    def test_text_table_renders_na(self):
        rows = rows_with([0.5, 0.5], [10.0, 20.0])
        assert "NA" in format_matrix(correlate(rows))


class TestScoresCSV:
    def test_roundtrip(self):
        text = scores_to_csv("sys0", {
            "root_pattern_real": (126, 130, 0),
            "root_pattern_nonce": (97, 100, 0),
            "affix_build": (239, 260, 1),
        })
        rows = parse_scores_csv(text.splitlines())
        assert [r["task"] for r in rows] == [
            "root_pattern_real", "root_pattern_nonce", "affix_build",
        ]
        assert rows[0]["accuracy"] == 96.92
        assert rows[1]["accuracy"] == 97.0
        assert rows[2]["failed"] == 1

    def test_unknown_task_rejected(self):
        with pytest.raises(DataError):
            parse_scores_csv(["sysx,bad_task,1.00,1,100,0"])


class TestEmitReport:
    def test_writes_three_files(self, tmp_path):
        rows = rows_with([0.2, 0.7], [30.0, 80.0])
        matrix = correlate(rows)
        written = emit_report(rows, matrix, tmp_path / "out", metadata="# meta")
        names = {p.name for p in written}
        assert names == {"systems.csv", "correlation_matrix.csv", "tables.txt"}
        for path in written:
            assert path.read_text(encoding="utf-8").startswith("# meta\n")

    def test_tables_mark_column_maxima(self):
        rows = rows_with([0.2, 0.7], [30.0, 80.0])
        tables = format_system_tables(rows)
        assert "70.00*" in tables  # mcr column best
        assert "80.00*" in tables  # accuracy column best

    def test_systems_csv_uses_na_for_missing_accuracies(self, tmp_path):
        rows = rows_with([0.2, 0.7], [30.0, 80.0])
        rows[0] = SystemRow(system="sys0", alignment=rows[0].alignment, accuracies={})
        written = emit_report(rows, None, tmp_path, metadata="# m")
        systems = next(p for p in written if p.name == "systems.csv")
        assert ",NA,NA,NA" in systems.read_text(encoding="utf-8")
