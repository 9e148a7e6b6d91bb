"""
Visualization module for DT-IRS-Bench.

Renders a median sweep file as LaTeX and Markdown tables with one row per axis
value and one column per scheme.
"""

import argparse
from pathlib import Path

import numpy as np
import pandas as pd

from dtirs_bench.src.utils import Scheme

metric_titles = {
    "final_delay": "Total delay (s)",
    "final_j": "Objective J",
    "mean_p_ap": "Average AP power (W)",
    "dt_fraction": "Fraction of UDs served by a twin",
    "loss_term": "Average surrogate loss",
}


def pivot_metric(median: pd.DataFrame, metric: str) -> pd.DataFrame:
    """Axis value x scheme table of one metric, schemes in their canonical order."""
    table = median.pivot(index="value", columns="scheme", values=metric)
    order = [s.cli_name for s in Scheme if s.cli_name in table.columns]
    return table[order].sort_index()


def matrix_to_latex(table: pd.DataFrame, axis: str, metric: str) -> str:
    """Convert a pivoted table into a LaTeX tabular environment."""
    n = len(table.columns)
    header = f"{axis} & " + " & ".join(table.columns) + " \\\\ \\hline"
    rows = []
    for value, row in table.iterrows():
        cells = ["--" if np.isnan(v) else f"{v:.3f}" for v in row.to_numpy()]
        rows.append(" & ".join([f"{value:g}"] + cells) + " \\\\")
    return (
        f"\\begin{{table}}[h]\n"
        f"\\centering\n"
        f"\\begin{{tabular}}{{|c|{'c|' * n}}}\n"
        f"\\hline\n"
        f"{header}\n" + "\n".join(rows) + "\n\\hline\n\\end{tabular}\n"
        f"\\caption{{{metric_titles.get(metric, metric)} versus {axis}}}\n"
        f"\\end{{table}}\n"
    )


def matrix_to_markdown(table: pd.DataFrame, axis: str, metric: str) -> str:
    """Convert a pivoted table into a Markdown table."""
    header = f"| {axis} | " + " | ".join(table.columns) + " |"
    separator = "|" + "-----|" * (len(table.columns) + 1)
    rows = []
    for value, row in table.iterrows():
        cells = ["--" if np.isnan(v) else f"{v:.6g}" for v in row.to_numpy()]
        rows.append("| " + " | ".join([f"{value:g}"] + cells) + " |")
    title = f"## {metric_titles.get(metric, metric)}\n"
    return title + "\n".join([header, separator] + rows) + "\n"


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Tabulate a median sweep file")
    parser.add_argument(
        "--median", type=str, required=True, help="path to sweep_median.csv"
    )
    parser.add_argument(
        "--metrics",
        type=str,
        default="final_delay,dt_fraction,mean_p_ap,loss_term",
        help="comma-separated metrics to tabulate",
    )
    args = parser.parse_args()
    median = pd.read_csv(Path(args.median))
    axis = str(median["axis"].iloc[0])
    for metric in args.metrics.split(","):
        table = pivot_metric(median, metric)
        print(matrix_to_latex(table, axis, metric))
        print(matrix_to_markdown(table, axis, metric))
