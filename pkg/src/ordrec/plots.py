"""Matplotlib renderings of the report figures.

Figures are written as self-contained SVG next to the CSV plot data.
SVG metadata dates and hash salts are pinned so repeated runs produce
identical bytes.
"""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .features import FEATURE_NAMES
from .report import SCATTER_PAIRS, feature_matrix

COLOR_NEG = "tab:orange"  # not recoverable
COLOR_POS = "tab:blue"    # recoverable

FEATURE_LABELS = {
    "a_peak": "autocorrelation peak strength",
    "h_norm": "normalized entropy",
    "m1_frac": "dominant verified mass fraction",
    "margin_frac": "verified margin fraction",
}

_SAVE_OPTS = {"metadata": {"Date": None}}


def _new_figure(width: float, height: float):
    plt.rcParams["svg.hashsalt"] = "ordrec"
    return plt.figure(figsize=(width, height))


def render_scatter(records, path: str) -> str:
    """Two feature-pair scatter panels colored by recoverability."""
    X, y = feature_matrix(records)
    fig = _new_figure(9.0, 4.0)
    for panel, (xname, yname) in enumerate(SCATTER_PAIRS):
        ax = fig.add_subplot(1, 2, panel + 1)
        xi, yi = FEATURE_NAMES.index(xname), FEATURE_NAMES.index(yname)
        for cls, color, label in (
            (False, COLOR_NEG, "not recoverable"),
            (True, COLOR_POS, "recoverable"),
        ):
            m = y == cls
            ax.scatter(X[m, xi], X[m, yi], s=9, alpha=0.5, color=color, label=label,
                       edgecolors="none")
        ax.set_xlabel(FEATURE_LABELS[xname])
        ax.set_ylabel(FEATURE_LABELS[yname])
        ax.set_title(f"({'ab'[panel]})", loc="left")
        if panel == 0:
            ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return path


def render_histograms(records, path: str, bins: int = 30) -> str:
    """2x2 grid of per-class feature histograms with dashed median lines."""
    X, y = feature_matrix(records)
    fig = _new_figure(9.0, 7.0)
    for i, name in enumerate(FEATURE_NAMES):
        ax = fig.add_subplot(2, 2, i + 1)
        vals = X[:, i]
        lo, hi = float(vals.min()), float(vals.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, bins + 1)
        for cls, color, label in (
            (False, COLOR_NEG, "not recoverable"),
            (True, COLOR_POS, "recoverable"),
        ):
            subset = vals[y == cls]
            if subset.size:
                ax.hist(subset, bins=edges, density=True, alpha=0.55, color=color, label=label)
                ax.axvline(float(np.median(subset)), color=color, linestyle="--", linewidth=1.2)
        ax.set_xlabel(FEATURE_LABELS[name])
        ax.set_ylabel("density")
        if i == 0:
            ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return path


def render_importance(importances: dict, path: str) -> str:
    """Horizontal bars of mean held-out AUROC drop with std error bars."""
    names = [n for n in FEATURE_NAMES if n in importances]
    means = [importances[n]["mean"] for n in names]
    stds = [importances[n]["std"] for n in names]
    fig = _new_figure(7.0, 3.5)
    ax = fig.add_subplot(1, 1, 1)
    pos = np.arange(len(names))
    ax.barh(pos, means, xerr=stds, color=COLOR_POS, alpha=0.8, capsize=3)
    ax.set_yticks(pos)
    ax.set_yticklabels([FEATURE_LABELS[n] for n in names])
    ax.invert_yaxis()
    ax.set_xlabel("held-out AUROC drop after permutation")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return path


def render_all(records, report: dict, outdir: str) -> list[str]:
    """Render every figure the report has data for; returns paths written."""
    os.makedirs(outdir, exist_ok=True)
    written = [
        render_scatter(records, os.path.join(outdir, "scatter.svg")),
        render_histograms(records, os.path.join(outdir, "histograms.svg")),
    ]
    if "permutation_importance" in report:
        written.append(
            render_importance(report["permutation_importance"],
                              os.path.join(outdir, "perm_importance.svg"))
        )
    return written
