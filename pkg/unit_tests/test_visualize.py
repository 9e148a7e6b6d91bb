"""Unit tests for dtirs_bench.visualize table rendering."""

import numpy as np
import pandas as pd

from dtirs_bench.visualize import matrix_to_latex, matrix_to_markdown, pivot_metric


def _median():
    return pd.DataFrame(
        {
            "axis": ["n_irs"] * 4,
            "value": [8.0, 8.0, 4.0, 4.0],
            "scheme": ["ga", "proposed", "ga", "proposed"],
            "final_delay": [2.5, 2.0, 3.25, np.nan],
        }
    )


class TestPivotMetric:
    def test_scheme_order_and_sorted_values(self):
        table = pivot_metric(_median(), "final_delay")
        assert list(table.columns) == ["proposed", "ga"]
        assert list(table.index) == [4.0, 8.0]
        assert table.loc[8.0, "proposed"] == 2.0


class TestMatrixToLatex:
    def test_basic_output(self):
        table = pivot_metric(_median(), "final_delay")
        result = matrix_to_latex(table, "n_irs", "final_delay")
        assert "\\begin{tabular}{|c|c|c|}" in result
        assert "\\end{tabular}" in result
        assert "8 & 2.000 & 2.500 \\\\" in result
        assert "4 & -- & 3.250 \\\\" in result
        assert "Total delay (s) versus n_irs" in result

    def test_unknown_metric_title(self):
        median = _median().rename(columns={"final_delay": "custom"})
        result = matrix_to_latex(pivot_metric(median, "custom"), "n_irs", "custom")
        assert "\\caption{custom versus n_irs}" in result


class TestMatrixToMarkdown:
    def test_basic_output(self):
        table = pivot_metric(_median(), "final_delay")
        result = matrix_to_markdown(table, "n_irs", "final_delay")
        lines = result.splitlines()
        assert lines[0] == "## Total delay (s)"
        assert lines[1] == "| n_irs | proposed | ga |"
        assert lines[2] == "|-----|-----|-----|"
        assert lines[3] == "| 4 | -- | 3.25 |"
        assert lines[4] == "| 8 | 2 | 2.5 |"
