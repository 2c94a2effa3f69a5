"""Render heatmaps of average minimum dubious-chore counts per (n, m) cell.

Input is the experiment harness CSV (header
``n,m,trial,seed,algorithm,min_k,exact,nodes,runtime_ms``).  Cell means are
exact rationals; rounding to two decimals happens only when painting labels.
Cells with no samples are grey in the image and ``null`` in the debug grid,
which is the artifact tests compare (never pixels).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

EXPECTED_HEADER = ["n", "m", "trial", "seed", "algorithm", "min_k", "exact", "nodes", "runtime_ms"]


class PlotInputError(ValueError):
    pass


@dataclass(frozen=True)
class HeatmapGrid:
    """Exact per-cell means for one algorithm: rows indexed by n, columns by m."""

    algorithm: str
    n_values: tuple[int, ...]
    m_values: tuple[int, ...]
    cells: tuple[tuple[Optional[Fraction], ...], ...]

    def label(self, row: int, col: int) -> Optional[str]:
        mean = self.cells[row][col]
        if mean is None:
            return None
        hundredths = round(mean * 100)  # exact round-half-even on the rational
        return f"{hundredths // 100}.{hundredths % 100:02d}"

    def to_json_payload(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n_values": list(self.n_values),
            "m_values": list(self.m_values),
            "cells": [
                [
                    None if mean is None else [mean.numerator, mean.denominator]
                    for mean in row
                ]
                for row in self.cells
            ],
            "labels": [
                [self.label(r, c) for c in range(len(self.m_values))]
                for r in range(len(self.n_values))
            ],
        }


def load_records(csv_path: str) -> list[dict]:
    try:
        with open(csv_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != EXPECTED_HEADER:
                raise PlotInputError(
                    f"{csv_path}: unexpected header {reader.fieldnames}, want {EXPECTED_HEADER}"
                )
            records = []
            for lineno, row in enumerate(reader, start=2):
                try:
                    records.append(
                        {
                            "n": int(row["n"]),
                            "m": int(row["m"]),
                            "algorithm": row["algorithm"],
                            "min_k": int(row["min_k"]),
                        }
                    )
                except (TypeError, ValueError):
                    raise PlotInputError(f"{csv_path}: malformed row at line {lineno}")
    except OSError as exc:
        raise PlotInputError(f"{csv_path}: {exc}")
    if not records:
        raise PlotInputError(f"{csv_path}: no records")
    return records


def build_grid(records: list[dict], algorithm: str) -> HeatmapGrid:
    names = sorted({r["algorithm"] for r in records})
    if algorithm not in names:
        raise PlotInputError(f"unknown algorithm {algorithm!r}; CSV has {names}")
    n_values = tuple(sorted({r["n"] for r in records}))
    m_values = tuple(sorted({r["m"] for r in records}))
    sums: dict[tuple[int, int], list[int]] = {}
    for r in records:
        if r["algorithm"] == algorithm:
            sums.setdefault((r["n"], r["m"]), []).append(r["min_k"])
    cells = tuple(
        tuple(
            Fraction(sum(ks), len(ks)) if (ks := sums.get((n, m))) else None
            for m in m_values
        )
        for n in n_values
    )
    return HeatmapGrid(algorithm, n_values, m_values, cells)


def render_heatmap(
    csv_path: str,
    algorithm: str,
    out_image_path: str,
    dump_json_path: Optional[str] = None,
) -> HeatmapGrid:
    """One annotated heatmap (n on rows, m on columns) for one algorithm;
    optionally dumps the exact grid for comparison in tests."""
    grid = build_grid(load_records(csv_path), algorithm)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    data = np.ma.masked_invalid(
        [
            [float(mean) if mean is not None else np.nan for mean in row]
            for row in grid.cells
        ]
    )
    fig, ax = plt.subplots(
        figsize=(1.0 + 0.7 * len(grid.m_values), 1.0 + 0.6 * len(grid.n_values))
    )
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad(color="0.7")  # grey tiles for cells without samples
    image = ax.imshow(data, cmap=cmap, aspect="auto")
    ax.set_xticks(range(len(grid.m_values)), [str(m) for m in grid.m_values])
    ax.set_yticks(range(len(grid.n_values)), [str(n) for n in grid.n_values])
    ax.set_xlabel("chores (m)")
    ax.set_ylabel("agents (n)")
    ax.set_title(algorithm)
    span = float(data.max() - data.min()) if data.count() else 0.0
    midpoint = float(data.min()) + span / 2 if data.count() else 0.0
    for r in range(len(grid.n_values)):
        for c in range(len(grid.m_values)):
            label = grid.label(r, c)
            if label is not None:
                color = "white" if float(grid.cells[r][c]) < midpoint else "black"
                ax.text(c, r, label, ha="center", va="center", fontsize=8, color=color)
    fig.colorbar(image, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(out_image_path)
    plt.close(fig)

    if dump_json_path:
        with open(dump_json_path, "w", encoding="utf-8") as fh:
            json.dump(grid.to_json_payload(), fh, indent=1)
            fh.write("\n")
    return grid


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="chorefair-plots")
    parser.add_argument("--csv", required=True, help="experiment harness CSV")
    parser.add_argument("--algorithm", required=True)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--debug-grid", help="optional JSON dump of the exact grid")
    args = parser.parse_args(argv)
    try:
        render_heatmap(args.csv, args.algorithm, args.out, args.debug_grid)
    except PlotInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
