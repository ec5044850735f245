"""Analysis reports: single-feature AUROC table, cross-validated forest,
permutation importance, and an interpretable decision tree, plus the CSV
plot data that accompanies them.
"""

from __future__ import annotations

import csv
import json
import os
from typing import Sequence

import numpy as np

from .dataset import RunRecord, summarize
from .features import FEATURE_NAMES
from .mlkit import (
    auroc,
    cv_forest_analysis,
    export_text,
    fit_tree,
    orient_score,
    tree_graph,
)

REPORT_SCHEMA = "ordrec-report"
REPORT_VERSION = 1

ALL_SECTIONS = ("auroc", "tree", "forest", "perm")

HIST_BINS = 30


def feature_matrix(records: Sequence[RunRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Stack stored feature vectors into (X, y) in canonical feature order."""
    X = np.array([r.features.as_array() for r in records])
    y = np.array([r.recoverable for r in records], dtype=bool)
    return X, y


def build_report(
    records: Sequence[RunRecord],
    *,
    sections: Sequence[str] = ALL_SECTIONS,
    k: int = 5,
    seed: int = 0,
    n_trees: int = 200,
    max_features: int | None = None,
    tree_depth: int | None = 4,
    min_samples_leaf: int = 1,
    repeats: int = 10,
) -> dict:
    """Assemble the full analysis report for a labeled dataset.

    Permutation importance is computed per held-out fold and averaged, with
    the across-fold standard deviation reported.
    """
    for s in sections:
        if s not in ALL_SECTIONS:
            raise ValueError(f"unknown report section {s!r}; choose from {ALL_SECTIONS}")
    X, y = feature_matrix(records)
    report: dict = {
        "schema": REPORT_SCHEMA,
        "version": REPORT_VERSION,
        "seed": seed,
        "features": list(FEATURE_NAMES),
        "summary": summarize(records),
    }
    if "auroc" in sections:
        report["single_feature_auroc"] = {
            name: auroc(orient_score(i, X[:, i]), y) for i, name in enumerate(FEATURE_NAMES)
        }
    if "forest" in sections or "perm" in sections:
        res = cv_forest_analysis(
            X,
            y,
            k=k,
            seed=seed,
            repeats=repeats,
            compute_importance="perm" in sections,
            n_trees=n_trees,
            max_features=max_features,
        )
        if "forest" in sections:
            report["forest_cv"] = {
                "mean": res["mean_auroc"],
                "std": res["std_auroc"],
                "fold_aurocs": res["fold_aurocs"],
                "k": k,
                "n_trees": n_trees,
            }
        if "perm" in sections:
            report["permutation_importance"] = {
                name: {"mean": res["importance_mean"][i], "std": res["importance_std"][i]}
                for i, name in enumerate(FEATURE_NAMES)
            }
    if "tree" in sections:
        tree = fit_tree(X, y, max_depth=tree_depth, min_samples_leaf=min_samples_leaf)
        nodes, edges = tree_graph(tree)
        report["tree"] = {
            "max_depth": tree_depth,
            "rules": export_text(tree),
            "nodes": nodes,
            "edges": edges,
        }
    return report


def write_report(report: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report, indent=2) + "\n")


def format_report(report: dict) -> str:
    """Human-readable rendering (6 significant digits) of the report tables."""
    lines: list[str] = []
    if "single_feature_auroc" in report:
        lines.append("Single-feature AUROC (oriented):")
        for name in report["features"]:
            lines.append(f"  {name:<12} {report['single_feature_auroc'][name]:.6g}")
    if "forest_cv" in report:
        fc = report["forest_cv"]
        lines.append(
            f"Forest CV AUROC: {fc['mean']:.6g} +/- {fc['std']:.6g} "
            f"({fc['k']}-fold, {fc['n_trees']} trees)"
        )
    if "permutation_importance" in report:
        lines.append("Permutation importance (held-out AUROC drop):")
        for name in report["features"]:
            imp = report["permutation_importance"][name]
            lines.append(f"  {name:<12} {imp['mean']:.6g} +/- {imp['std']:.6g}")
    if "tree" in report:
        lines.append("Decision tree rules:")
        lines.extend("  " + ln for ln in report["tree"]["rules"].rstrip("\n").split("\n"))
    return "\n".join(lines) + "\n"


# --- plot data ------------------------------------------------------------------

SCATTER_PAIRS = (
    ("h_norm", "a_peak"),
    ("m1_frac", "margin_frac"),
)


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_plot_data(records: Sequence[RunRecord], report: dict, outdir: str) -> list[str]:
    """Emit the CSV files behind each figure; returns the paths written."""
    os.makedirs(outdir, exist_ok=True)
    X, y = feature_matrix(records)
    labels = y.astype(int)
    written: list[str] = []

    for xname, yname in SCATTER_PAIRS:
        xi, yi = FEATURE_NAMES.index(xname), FEATURE_NAMES.index(yname)
        path = os.path.join(outdir, f"scatter_{xname}_{yname}.csv")
        rows = list(zip(X[:, xi].tolist(), X[:, yi].tolist(), labels.tolist()))
        _write_csv(path, ["x", "y", "label"], rows)
        written.append(path)

    for i, name in enumerate(FEATURE_NAMES):
        path = os.path.join(outdir, f"hist_{name}.csv")
        written.append(path)
        _write_csv(path, ["bin_left", "bin_right", "density_neg", "density_pos"],
                   _class_histogram_rows(X[:, i], y))

    if "permutation_importance" in report:
        path = os.path.join(outdir, "perm_importance.csv")
        rows = [
            (name,
             report["permutation_importance"][name]["mean"],
             report["permutation_importance"][name]["std"])
            for name in FEATURE_NAMES
        ]
        _write_csv(path, ["feature", "mean_drop", "std"], rows)
        written.append(path)

    if "tree" in report:
        npath = os.path.join(outdir, "tree_nodes.csv")
        _write_csv(
            npath,
            ["id", "kind", "feature", "threshold", "count_not_recoverable",
             "count_recoverable", "p_recoverable", "predicted"],
            [
                (n["id"], n["kind"], n["feature"] or "",
                 "" if n["threshold"] is None else n["threshold"],
                 n["count_not_recoverable"], n["count_recoverable"],
                 n["p_recoverable"], n["predicted"])
                for n in report["tree"]["nodes"]
            ],
        )
        epath = os.path.join(outdir, "tree_edges.csv")
        _write_csv(
            epath,
            ["parent", "child", "branch"],
            [(e["parent"], e["child"], e["branch"]) for e in report["tree"]["edges"]],
        )
        rpath = os.path.join(outdir, "tree_rules.txt")
        with open(rpath, "w", encoding="utf-8") as fh:
            fh.write(report["tree"]["rules"])
        written.extend([npath, epath, rpath])
    return written


def _class_histogram_rows(values: np.ndarray, y: np.ndarray) -> list[tuple]:
    """Shared-bin per-class densities plus a trailing medians row."""
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, HIST_BINS + 1)
    rows: list[tuple] = []
    dens = {}
    for cls in (False, True):
        subset = values[y == cls]
        if subset.size:
            dens[cls], _ = np.histogram(subset, bins=edges, density=True)
        else:
            dens[cls] = np.zeros(HIST_BINS)
    for b in range(HIST_BINS):
        rows.append(
            (float(edges[b]), float(edges[b + 1]), float(dens[False][b]), float(dens[True][b]))
        )
    med_neg = float(np.median(values[~y])) if (~y).any() else ""
    med_pos = float(np.median(values[y])) if y.any() else ""
    rows.append(("median", "", med_neg, med_pos))
    return rows
