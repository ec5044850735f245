"""From-scratch statistical toolkit: AUROC, CART trees, random forests,
stratified cross-validation and permutation importance.

Everything is deterministic given its seed: per-tree and per-fold
generators are derived from seed sequences up front, so results do not
depend on evaluation order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .features import FEATURE_NAMES

# Features whose raw orientation opposes recoverability get their sign
# flipped for single-feature ranking; only normalized entropy qualifies.
NEGATED_FEATURES = frozenset({FEATURE_NAMES.index("h_norm")})


class LabeledSample(NamedTuple):
    features: tuple[float, ...]
    label: bool


def to_arrays(samples: Sequence[LabeledSample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([s.features for s in samples], dtype=np.float64)
    y = np.array([s.label for s in samples], dtype=bool)
    return X, y


# --- ranking ------------------------------------------------------------------

def auroc(scores, labels) -> float:
    """Mann-Whitney AUROC: fraction of (positive, negative) pairs ranked
    correctly, ties counting 0.5.  Computed from midranks, so it equals
    brute-force pair counting exactly.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    if s.ndim != 1 or s.shape != y.shape:
        raise ValueError("scores and labels must be 1-D and of equal length")
    n = s.size
    n_pos = int(y.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUROC undefined: labels contain a single class")
    order = np.argsort(s, kind="mergesort")
    sorted_s = s[order]
    new_run = np.empty(n, dtype=bool)
    new_run[0] = True
    new_run[1:] = sorted_s[1:] != sorted_s[:-1]
    run_id = np.cumsum(new_run) - 1
    run_starts = np.flatnonzero(new_run)
    run_lengths = np.diff(np.append(run_starts, n))
    midrank_per_run = run_starts + (run_lengths + 1) / 2.0  # 1-based midranks
    ranks = np.empty(n)
    ranks[order] = midrank_per_run[run_id]
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def orient_score(feature_index: int, values) -> np.ndarray:
    """Scores oriented so larger always means more recoverable."""
    v = np.asarray(values, dtype=np.float64)
    return -v if feature_index in NEGATED_FEATURES else v.copy()


# --- CART ---------------------------------------------------------------------

@dataclass
class TreeNode:
    counts: tuple[int, int]  # [not recoverable, recoverable] routed here
    proba: float             # recoverable fraction among training samples here
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class TreeModel:
    root: TreeNode
    n_features: int
    _flat: tuple | None = field(default=None, repr=False, compare=False)

    def _flatten(self) -> tuple:
        # preorder arrays (feature=-1 marks leaves) for vectorized routing
        if self._flat is None:
            feat, thr, left, right, proba = [], [], [], [], []

            def walk(node: TreeNode) -> int:
                nid = len(feat)
                feat.append(-1 if node.is_leaf else node.feature)
                thr.append(0.0 if node.is_leaf else node.threshold)
                left.append(0)
                right.append(0)
                proba.append(node.proba)
                if not node.is_leaf:
                    left[nid] = walk(node.left)
                    right[nid] = walk(node.right)
                return nid

            walk(self.root)
            self._flat = (
                np.array(feat, dtype=np.int32),
                np.array(thr),
                np.array(left, dtype=np.int32),
                np.array(right, dtype=np.int32),
                np.array(proba),
            )
        return self._flat

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        feat, thr, left, right, proba = self._flatten()
        cur = np.zeros(X.shape[0], dtype=np.int32)
        while True:
            active = np.flatnonzero(feat[cur] >= 0)
            if active.size == 0:
                return proba[cur]
            node = cur[active]
            go_left = X[active, feat[node]] <= thr[node]
            cur[active] = np.where(go_left, left[node], right[node])


def _gini_decrease(values: np.ndarray, y: np.ndarray, min_samples_leaf: int):
    """Best threshold on one feature by Gini impurity decrease.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values; returns (decrease, threshold) or None if no candidate leaves
    min_samples_leaf on both sides.  Ties take the lowest threshold.
    """
    n = values.size
    order = np.argsort(values, kind="mergesort")
    sv = values[order]
    sy = y[order]
    left_n = np.arange(1, n)
    valid = sv[:-1] < sv[1:]
    if min_samples_leaf > 1:
        valid &= (left_n >= min_samples_leaf) & (n - left_n >= min_samples_leaf)
    if not valid.any():
        return None
    left_pos = np.cumsum(sy)[:-1].astype(np.float64)
    right_n = (n - left_n).astype(np.float64)
    left_nf = left_n.astype(np.float64)
    total_pos = float(sy.sum())
    right_pos = total_pos - left_pos
    p = total_pos / n
    parent = 2.0 * p * (1.0 - p)
    gini_left = 2.0 * (left_pos / left_nf) * (1.0 - left_pos / left_nf)
    gini_right = 2.0 * (right_pos / right_n) * (1.0 - right_pos / right_n)
    decrease = parent - (left_nf * gini_left + right_n * gini_right) / n
    decrease[~valid] = -np.inf
    i = int(np.argmax(decrease))  # first max = lowest threshold
    return float(decrease[i]), float((sv[i] + sv[i + 1]) / 2.0)


def _grow(X, y, depth, max_depth, min_samples_leaf, rng, max_features) -> TreeNode:
    n = y.size
    n_pos = int(y.sum())
    node = TreeNode(counts=(n - n_pos, n_pos), proba=n_pos / n)
    if n_pos in (0, n) or (max_depth is not None and depth >= max_depth):
        return node
    if n < 2 * min_samples_leaf:
        return node
    d = X.shape[1]
    if rng is not None and max_features < d:
        feats = sorted(rng.choice(d, size=max_features, replace=False).tolist())
    else:
        feats = range(d)
    best = None  # (decrease, feature, threshold); strict > keeps lowest feature
    for f in feats:
        cand = _gini_decrease(X[:, f], y, min_samples_leaf)
        if cand is not None and (best is None or cand[0] > best[0]):
            best = (cand[0], f, cand[1])
    if best is None:
        return node
    _, f, thr = best
    go_left = X[:, f] <= thr
    node.feature = f
    node.threshold = thr
    node.left = _grow(X[go_left], y[go_left], depth + 1, max_depth, min_samples_leaf, rng, max_features)
    node.right = _grow(X[~go_left], y[~go_left], depth + 1, max_depth, min_samples_leaf, rng, max_features)
    return node


def fit_tree(X, y, max_depth: int | None = None, min_samples_leaf: int = 1) -> TreeModel:
    """CART with Gini impurity on binary labels.

    Splits are midpoints between consecutive distinct feature values; the
    best (feature, threshold) by impurity decrease wins, ties broken by
    lowest feature index then lowest threshold.  Growth stops at purity,
    max_depth, or when min_samples_leaf cannot be respected.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=bool)
    if X.ndim != 2 or X.shape[0] != y.size or y.size == 0:
        raise ValueError("X must be (n, d) with one label per row, n >= 1")
    root = _grow(X, y, 0, max_depth, min_samples_leaf, None, X.shape[1])
    return TreeModel(root, X.shape[1])


# --- random forest ------------------------------------------------------------

@dataclass
class ForestModel:
    trees: list[TreeModel]
    max_features: int

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.predict_proba(X)
        return acc / len(self.trees)


def fit_forest(
    X,
    y,
    n_trees: int = 200,
    max_features: int | None = None,
    max_depth: int | None = None,
    min_samples_leaf: int = 1,
    bootstrap: bool = True,
    seed: int = 0,
) -> ForestModel:
    """Bagged CART ensemble; max_features defaults to ceil(sqrt(d)).

    Per-tree randomness (bootstrap resample and per-split feature subsets)
    comes from generators spawned deterministically from `seed`, so the
    model is identical across runs and platforms for fixed inputs.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=bool)
    if X.ndim != 2 or X.shape[0] != y.size or y.size == 0:
        raise ValueError("X must be (n, d) with one label per row, n >= 1")
    n, d = X.shape
    if max_features is None:
        max_features = math.ceil(math.sqrt(d))
    max_features = min(max_features, d)
    trees = []
    for child in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.Generator(np.random.PCG64(child))
        if bootstrap:
            idx = rng.integers(0, n, size=n)
            Xb, yb = X[idx], y[idx]
        else:
            Xb, yb = X, y
        root = _grow(Xb, yb, 0, max_depth, min_samples_leaf, rng, max_features)
        trees.append(TreeModel(root, d))
    return ForestModel(trees, max_features)


# --- cross-validation and importance -------------------------------------------

def stratified_kfold(labels, k: int, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """k (train, test) index pairs with per-fold class counts within 1 of
    proportional; deterministic for a fixed seed."""
    y = np.asarray(labels, dtype=bool)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = np.random.Generator(np.random.PCG64(seed))
    fold_members: list[list[int]] = [[] for _ in range(k)]
    for cls in (False, True):
        idx = np.flatnonzero(y == cls)
        if idx.size < k:
            raise ValueError(f"class {cls} has {idx.size} members, fewer than k={k}")
        rng.shuffle(idx)
        for j in range(k):
            fold_members[j].extend(idx[j::k].tolist())
    all_idx = np.arange(y.size)
    folds = []
    for j in range(k):
        test = np.array(sorted(fold_members[j]), dtype=np.intp)
        train = np.setdiff1d(all_idx, test)
        folds.append((train, test))
    return folds


def permutation_importance(model, X, y, feature_index: int, repeats: int = 10, seed: int = 0) -> tuple[float, float]:
    """Mean and std of the held-out AUROC drop after shuffling one feature
    column; exactly 0 for features the model never consults."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=bool)
    if repeats < 1:
        raise ValueError(f"repeats must be positive, got {repeats}")
    baseline = auroc(model.predict_proba(X), y)
    rng = np.random.Generator(np.random.PCG64(seed))
    drops = np.empty(repeats)
    for rep in range(repeats):
        perm = rng.permutation(y.size)
        Xp = X.copy()
        Xp[:, feature_index] = X[perm, feature_index]
        drops[rep] = baseline - auroc(model.predict_proba(Xp), y)
    return float(drops.mean()), float(drops.std())


def _derived_seeds(seed: int, count: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count, np.uint64)]


def cv_forest_analysis(
    X,
    y,
    k: int = 5,
    seed: int = 0,
    repeats: int = 10,
    compute_importance: bool = True,
    **forest_params,
) -> dict:
    """Stratified k-fold forest evaluation.

    Trains one forest per fold on the remaining folds and records the
    held-out AUROC; optionally also the per-fold permutation importance of
    each feature, averaged across folds with the across-fold std.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=bool)
    seeds = _derived_seeds(seed, 1 + 2 * k)
    folds = stratified_kfold(y, k, seeds[0])
    d = X.shape[1]
    fold_aurocs = []
    fold_drops = np.empty((k, d))
    for i, (train, test) in enumerate(folds):
        forest = fit_forest(X[train], y[train], seed=seeds[1 + i], **forest_params)
        fold_aurocs.append(auroc(forest.predict_proba(X[test]), y[test]))
        if compute_importance:
            for f in range(d):
                mean_drop, _ = permutation_importance(
                    forest, X[test], y[test], f, repeats=repeats, seed=seeds[1 + k + i]
                )
                fold_drops[i, f] = mean_drop
    out = {
        "fold_aurocs": [float(a) for a in fold_aurocs],
        "mean_auroc": float(np.mean(fold_aurocs)),
        "std_auroc": float(np.std(fold_aurocs)),
    }
    if compute_importance:
        out["importance_mean"] = [float(v) for v in fold_drops.mean(axis=0)]
        out["importance_std"] = [float(v) for v in fold_drops.std(axis=0)]
    return out


def cv_auroc(X, y, k: int = 5, seed: int = 0, **forest_params) -> tuple[float, float]:
    """Mean and std of held-out forest AUROC across stratified folds."""
    res = cv_forest_analysis(X, y, k=k, seed=seed, compute_importance=False, **forest_params)
    return res["mean_auroc"], res["std_auroc"]


# --- tree export ----------------------------------------------------------------

def export_text(model: TreeModel, feature_names: Sequence[str] = FEATURE_NAMES) -> str:
    """Indented threshold rules with class counts [not recoverable, recoverable]."""
    lines: list[str] = []

    def walk(node: TreeNode, prefix: str) -> None:
        if node.is_leaf:
            pred = "recoverable" if node.proba >= 0.5 else "not recoverable"
            lines.append(f"{prefix}counts={list(node.counts)} -> {pred} (p_rec={node.proba:.6g})")
            return
        name = feature_names[node.feature]
        lines.append(f"{prefix}{name} <= {node.threshold:.6g}  counts={list(node.counts)}")
        walk(node.left, prefix + "|   ")
        lines.append(f"{prefix}{name} >  {node.threshold:.6g}")
        walk(node.right, prefix + "|   ")

    walk(model.root, "")
    return "\n".join(lines) + "\n"


def tree_graph(model: TreeModel, feature_names: Sequence[str] = FEATURE_NAMES) -> tuple[list[dict], list[dict]]:
    """Preorder node list and edge list mirroring the rendered tree content:
    split rule, class counts, predicted class."""
    nodes: list[dict] = []
    edges: list[dict] = []

    def walk(node: TreeNode) -> int:
        nid = len(nodes)
        pred = "recoverable" if node.proba >= 0.5 else "not recoverable"
        nodes.append(
            {
                "id": nid,
                "kind": "leaf" if node.is_leaf else "split",
                "feature": None if node.is_leaf else feature_names[node.feature],
                "threshold": None if node.is_leaf else node.threshold,
                "count_not_recoverable": node.counts[0],
                "count_recoverable": node.counts[1],
                "p_recoverable": node.proba,
                "predicted": pred,
            }
        )
        if not node.is_leaf:
            left_id = walk(node.left)
            edges.append({"parent": nid, "child": left_id, "branch": "le"})
            right_id = walk(node.right)
            edges.append({"parent": nid, "child": right_id, "branch": "gt"})
        return nid

    walk(model.root)
    return nodes, edges
