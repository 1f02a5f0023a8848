"""Gradient-boosted runtime regression and portable JSON export.

The export target is the prover's model schema: {version: 1,
feature_names, base_score, trees: [{nodes: [{f,t,l,r} | {v}]}]} with the
traversal rule "go left iff feature < threshold".  scikit-learn splits
on <=, so every exported threshold is nudged up by one ulp, which makes
the two rules decide identically on every double.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.ensemble import GradientBoostingRegressor
from sklearn.model_selection import ShuffleSplit

from .dataset import Dataset, InsufficientData, RUNTIME_CAP

MIN_SAMPLES = 50
LEARNING_RATE = 0.1
MAX_DEPTH = 6
N_TREES = 200
CV_SPLITS = 10
CV_TRAIN_FRACTION = 0.8


@dataclass(frozen=True)
class TrainReport:
    engine: str
    n_samples: int
    cv_mse: float
    cv_mse_sub_cap: float  # restricted to samples below the runtime cap
    baseline_mse: float  # constant (train-mean) predictor on the same splits
    parity_max_abs: float  # |exported - fitted| over the training set
    n_trees: int = N_TREES
    max_depth: int = MAX_DEPTH
    learning_rate: float = LEARNING_RATE


def _clamp(v: np.ndarray | float) -> np.ndarray | float:
    return np.clip(v, 0.0, RUNTIME_CAP)


def _fit(x: np.ndarray, y: np.ndarray, seed: int) -> GradientBoostingRegressor:
    model = GradientBoostingRegressor(
        learning_rate=LEARNING_RATE, max_depth=MAX_DEPTH,
        n_estimators=N_TREES, random_state=seed)
    model.fit(x, y)
    return model


def export_ensemble(model: GradientBoostingRegressor,
                    feature_names: tuple[str, ...]) -> dict:
    """Serialize a fitted model into the prover's JSON schema."""
    doc_trees = []
    for est in model.estimators_[:, 0]:
        t = est.tree_
        nodes = []
        for i in range(t.node_count):
            if t.children_left[i] == -1:
                nodes.append({"v": float(model.learning_rate * t.value[i][0][0])})
            else:
                nodes.append({
                    "f": int(t.feature[i]),
                    # one ulp up converts sklearn's <= rule into the schema's <
                    "t": float(np.nextafter(t.threshold[i], np.inf)),
                    "l": int(t.children_left[i]),
                    "r": int(t.children_right[i]),
                })
        doc_trees.append({"nodes": nodes})
    return {
        "version": 1,
        "feature_names": list(feature_names),
        "base_score": float(model.init_.constant_[0][0]),
        "trees": doc_trees,
    }


def predict_json(doc: dict, row) -> float:
    """Reference traversal of an exported document (one input row)."""
    total = float(doc["base_score"])
    for tree in doc["trees"]:
        nodes = tree["nodes"]
        i = 0
        while "v" not in nodes[i]:
            nd = nodes[i]
            i = nd["l"] if row[nd["f"]] < nd["t"] else nd["r"]
        total += nodes[i]["v"]
    return float(_clamp(total))


def _cross_validate(x: np.ndarray, y: np.ndarray, seed: int
                    ) -> tuple[float, float, float]:
    """Mean MSE over splits: overall, sub-cap view, constant baseline."""
    splitter = ShuffleSplit(n_splits=CV_SPLITS,
                            train_size=CV_TRAIN_FRACTION, random_state=seed)
    overall, sub_cap, baseline = [], [], []
    for train_idx, test_idx in splitter.split(x):
        model = _fit(x[train_idx], y[train_idx], seed)
        pred = _clamp(model.predict(x[test_idx]))
        err = (pred - y[test_idx]) ** 2
        overall.append(float(np.mean(err)))
        baseline.append(float(np.mean(
            (float(np.mean(y[train_idx])) - y[test_idx]) ** 2)))
        below = y[test_idx] < RUNTIME_CAP
        if below.any():
            sub_cap.append(float(np.mean(err[below])))
    return (float(np.mean(overall)),
            float(np.mean(sub_cap)) if sub_cap else float("nan"),
            float(np.mean(baseline)))


def train_and_export(dataset: Dataset, engine: str, out_json: str,
                     seed: int = 0) -> TrainReport:
    """Fit, cross-validate, export, and verify the export round-trips."""
    x, y = dataset.matrix(engine)
    if len(y) < MIN_SAMPLES:
        raise InsufficientData(
            f"{engine}: {len(y)} samples, need at least {MIN_SAMPLES}")
    cv_mse, cv_sub, base_mse = _cross_validate(x, y, seed)

    model = _fit(x, y, seed)
    doc = export_ensemble(model, dataset.feature_names)
    fitted = _clamp(model.predict(x))
    exported = np.array([predict_json(doc, row) for row in x])
    parity = float(np.max(np.abs(exported - fitted))) if len(y) else 0.0
    if parity > 1e-6:
        raise AssertionError(f"export drifted from the fitted model: {parity}")

    with open(out_json, "w", encoding="utf-8") as fh:
        json.dump({engine: doc}, fh)
    return TrainReport(engine=engine, n_samples=len(y), cv_mse=cv_mse,
                       cv_mse_sub_cap=cv_sub, baseline_mse=base_mse,
                       parity_max_abs=parity)
