"""Figure rendering for benchmark reports.

Each helper takes a report produced by the bench module and writes a PNG
next to the delimited output. Rendering is best-effort presentation; the
numbers of record live in the JSON/CSV reports.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_crossover_figure(report: dict, path) -> str:
    points = report["points"]
    kernels = sorted({p["kernel"] for p in points})
    fig, ax = plt.subplots(figsize=(6, 4))
    for kernel in kernels:
        rows = [p for p in points if p["kernel"] == kernel]
        ax.plot([p["density"] for p in rows], [p["median_us"] for p in rows],
                marker="o", label=kernel)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("graph density")
    ax.set_ylabel("median time (us)")
    ax.set_title("aggregate-sum kernel crossover")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_density_figure(report: dict, path) -> str:
    density = report["density"]
    labels = ["full", "intra", "inter"]
    values = [density[k] for k in labels]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(labels, values, color=["#777777", "#2c7fb8", "#d95f0e"])
    ax.set_yscale("log")
    ax.set_ylabel("density")
    ax.set_title("subgraph density after reordering")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_ablation_figure(report: dict, path) -> str:
    rows = report["modes"]
    labels = [r["mode"] for r in rows]
    values = [r["steady_median_us"] or 0.0 for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(labels, values, color="#2c7fb8")
    ax.set_ylabel("steady-state median per-iteration time (us)")
    ax.set_title("optimization mode ablation")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_trace_figure(report: dict, path) -> str:
    rows = report["iterations"]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([r["i"] for r in rows], [r["us"] for r in rows], lw=1.0,
            color="#2c7fb8")
    profiling = [r for r in rows if r.get("is_profiling")]
    if profiling:
        last = max(r["i"] for r in profiling)
        ax.axvline(last + 0.5, color="#d95f0e", ls="--", lw=1.0,
                   label="selector locked")
        ax.legend()
    ax.set_xlabel("iteration")
    ax.set_ylabel("kernel time (us)")
    ax.set_title("per-iteration kernel time")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
