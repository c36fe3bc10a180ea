"""File outputs: trajectory CSV, certification report JSON, trajectory plot."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import InputError

CSV_COLUMNS = ("t", "p", "v", "u", "V", "W")


class CSVFormatError(InputError):
    pass


def _fmt(x: float) -> str:
    # +0.0 folds negative zero into "0"
    return format(float(x) + 0.0, ".17g")


def write_trajectory_csv(traj, path) -> None:
    cols = [np.asarray(getattr(traj, name), dtype=float) for name in CSV_COLUMNS]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def read_trajectory_csv(path) -> dict:
    """Parse a trajectory CSV into column arrays; errors name the line or column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVFormatError(f"{path}: line 1: empty file") from None
        header = [h.strip() for h in header]
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise CSVFormatError(f"{path}: line 1: missing column(s) {', '.join(missing)}")
        index = [header.index(c) for c in CSV_COLUMNS]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CSVFormatError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(row[i]) for i in index])
            except ValueError as exc:
                raise CSVFormatError(f"{path}: line {lineno}: {exc}") from None
    data = np.array(rows, dtype=float).reshape(-1, len(CSV_COLUMNS))
    return {name: data[:, i] for i, name in enumerate(CSV_COLUMNS)}


def write_report(report, path) -> None:
    text = report.to_json()
    Path(path).write_text(text)


def plot_trajectory(csv_path, out_path) -> None:
    """Two panels: p and v against t; V against t on a log axis (V > 0 only)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    d = read_trajectory_csv(csv_path)
    matplotlib.rcParams["svg.hashsalt"] = "satctl"
    style = "o" if d["t"].size <= 1 else "-"
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    ax1.plot(d["t"], d["p"], style, label="p")
    ax1.plot(d["t"], d["v"], style, label="v")
    ax1.set_ylabel("state")
    ax1.legend(loc="best")
    ax1.grid(True, alpha=0.3)
    pos = d["V"] > 0
    if pos.any():
        ax2.semilogy(d["t"][pos], d["V"][pos], style, color="C2")
    else:
        ax2.set_yscale("log")
    ax2.set_ylabel("V")
    ax2.set_xlabel("t [s]")
    ax2.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
