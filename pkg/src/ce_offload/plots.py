"""Figure rendering for sweep and comparison tables.

Each function takes the same Table the CSV writer receives and draws the
matching figure to a file. Rendering is a view of the CSV data, never a
second computation path, and the written files are byte-stable for
identical tables (fixed size, dpi, and metadata; Agg backend).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import Table

_FIGSIZE = (6.4, 4.2)
_DPI = 130
_PNG_METADATA = {"Software": "ce-offload"}


def _save(fig, path) -> None:
    fig.savefig(path, dpi=_DPI, metadata=_PNG_METADATA)
    plt.close(fig)


def _series(table: Table, key_cols: tuple[str, ...], x_col: str, y_col: str):
    """Group rows by the key columns; yields (key, xs, ys) sorted by key."""
    idx = {name: i for i, name in enumerate(table.header)}
    groups: dict[tuple, list] = {}
    for row in table.rows:
        key = tuple(row[idx[c]] for c in key_cols)
        groups.setdefault(key, []).append((row[idx[x_col]], row[idx[y_col]]))
    for key in sorted(groups):
        pts = groups[key]
        yield key, [p[0] for p in pts], [p[1] for p in pts]


def plot_convergence(table: Table, path) -> None:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for (samples, elites), xs, ys in _series(table, ("samples", "elites"),
                                             "iter", "mean_incumbent_best"):
        ax.plot(xs, ys, marker="", label=f"S={samples}, elites={elites}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("averaged incumbent objective")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_size_sweep(table: Table, path) -> None:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for (method,), xs, ys in _series(table, ("method",), "scale", "mean_objective"):
        ax.plot(xs, ys, marker="o", label=method)
    ax.set_xlabel("task-size scale factor")
    ax.set_ylabel("averaged objective")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_lambda_sweep(table: Table, path) -> None:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for (m,), xs, ys in _series(table, ("m",), "q", "mean_objective"):
        ax.plot(xs, ys, marker="o", label=f"M={m}")
    ax.set_xlabel("q  (energy/latency weight ratio = 10^q)")
    ax.set_ylabel("averaged objective")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_compare(table: Table, path) -> None:
    idx = {name: i for i, name in enumerate(table.header)}
    methods = [row[idx["method"]] for row in table.rows]
    objectives = [row[idx["mean_objective"]] for row in table.rows]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.bar(range(len(methods)), objectives, color="#4878a8")
    ax.set_xticks(range(len(methods)))
    ax.set_xticklabels(methods)
    ax.set_ylabel("averaged objective")
    ax.grid(True, axis="y", alpha=0.3)
    _save(fig, path)


PLOTTERS = {
    "convergence": plot_convergence,
    "size": plot_size_sweep,
    "lambda": plot_lambda_sweep,
    "compare": plot_compare,
}
