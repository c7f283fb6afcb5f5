"""Figures for the benchmark and embedding reports (written to files, never shown)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def bench_figure(report, path: str | Path) -> Path:
    """Measured mean times next to the reference laptop numbers, log scale."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.0))
        ops = [r.op for r in report.results]
        xs = range(len(ops))
        width = 0.38
        ax.bar([x - width / 2 for x in xs], [r.mean_ms for r in report.results],
               width, label="measured", color="#3b6ea5")
        ref = [r.reference_ms if r.reference_ms is not None else 0 for r in report.results]
        ax.bar([x + width / 2 for x in xs], ref, width, label="reference", color="#c9793a")
        ax.set_yscale("log")
        ax.set_xticks(list(xs))
        ax.set_xticklabels(ops)
        ax.set_ylabel("time (ms)")
        ax.set_title(f"N = {report.n ** report.m} (n={report.n}, m={report.m})")
        ax.legend(frameon=False)
        return _save(fig, path)


def embedding_figure(rows: list[dict], path: str | Path) -> Path:
    """Transactions needed per chain for both embedding modes."""
    chains = sorted({r["chain"] for r in rows}, key=["btc", "eth", "nem"].index)
    modes = ["case1", "case2"]
    counts = {(r["chain"], r["mode"]): r["tx_count"] for r in rows}
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        width = 0.38
        for k, mode in enumerate(modes):
            xs = [i + (k - 0.5) * width for i in range(len(chains))]
            vals = [counts.get((c, mode), 0) for c in chains]
            bars = ax.bar(xs, vals, width, label=mode)
            ax.bar_label(bars, fontsize=7)
        ax.set_xticks(range(len(chains)))
        ax.set_xticklabels([c.upper() for c in chains])
        ax.set_ylabel("transactions")
        ax.legend(frameon=False)
        return _save(fig, path)
