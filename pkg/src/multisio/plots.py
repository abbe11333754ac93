"""Optional SVG line plots (needs matplotlib, installed with the ``plot`` extra)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .report import Report

# experiment -> list of (table, x column, y columns, group column or None)
_LAYOUT = {
    "converge_truncation": [("truncation", "rho", ["D_N", "D_2N"], None)],
    "converge_lacunary": [("lacunary_fit", "nu", ["E_rel"], None), ("lacunary_tail", "nu", ["corrected_rel"], None)],
    "decay_study": [("decay", "lam", ["lp"], "mu"), ("decay", "mu", ["linf"], "lam")],
    "norm_scan_sio": [("scan", "trial", ["ratio", "ratio_2N"], None)],
    "norm_scan_lacunary": [("scan", "trial", ["ratio", "ratio_2N"], None)],
}


def write_plots(report: Report, out_dir) -> list[Path]:
    """One SVG per layout entry; log2 vertical axis. Returns the written paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    out = Path(out_dir)
    for i, (tname, x, ys, group) in enumerate(_LAYOUT.get(report.experiment, [])):
        if tname not in report.tables:
            continue
        t = report.tables[tname]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        groups = sorted(set(t.column(group))) if group else [None]
        for gv in groups:
            where = {group: gv} if group else None
            xs = t.column(x, where).astype(float)
            for y in ys:
                vals = t.column(y, where).astype(float)
                keep = vals > 0
                label = y if gv is None else f"{y} {group}={gv}"
                ax.plot(xs[keep], np.log2(vals[keep]), marker="o", label=label)
        ax.set_xlabel(x)
        ax.set_ylabel("log2 value")
        ax.legend(fontsize=7)
        fig.tight_layout()
        path = out / f"{tname}_{x}_{i}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written


__all__ = ["write_plots"]
