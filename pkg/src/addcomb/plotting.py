"""Static figure rendering for the report paths.

Charts are written straight to files (Agg backend, no display): the
sweep chart plots the sum-product exponent against set size per
family, and the spectrum chart shows eigenvalues by rank.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_GOLDEN = (math.sqrt(5) - 1) / 2
_FIG_SIZE = (6.4, 6.4 * _GOLDEN)

_STYLE = {
    "figure.figsize": _FIG_SIZE,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
}


def save_sweep_plot(rows, path: str) -> str:
    """Exponent vs |A| per family, with the 6/5 reference line."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        by_family: dict[str, list] = {}
        for r in rows:
            if r.exponent is None:
                continue
            label = r.family if r.p is None else f"{r.family} (p={r.p})"
            by_family.setdefault(label, []).append((r.size, r.exponent, bool(r.in_range)))
        for label, pts in sorted(by_family.items()):
            pts.sort()
            xs = [t[0] for t in pts]
            ys = [t[1] for t in pts]
            ax.plot(xs, ys, marker="o", ms=4, lw=1, label=label)
        ax.axhline(1.2, color="k", ls="--", lw=0.8, label="exponent 6/5")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("|A|")
        ax.set_ylabel("log(|A+A| + |AA|) / log |A|")
        ax.set_title("sum-product exponent sweep")
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return path


def save_spectrum_plot(eigenvalues, path: str, title: str = "operator spectrum") -> str:
    """Eigenvalues by rank (descending absolute value)."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        idx = list(range(1, len(eigenvalues) + 1))
        ax.plot(idx, list(eigenvalues), marker="o", ms=4, lw=0.8)
        ax.axhline(0.0, color="k", lw=0.6)
        ax.set_xlabel("rank")
        ax.set_ylabel("eigenvalue")
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return path
