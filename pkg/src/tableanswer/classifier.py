"""Boosted regression trees with logistic loss: the table answer score F(Q,T).

Stagewise gradient boosting from a zero margin, so an empty model scores
0.5 everywhere.  Each stage fits a depth-limited regression tree to the
residuals (label minus current probability) with exact SSE split search,
then takes a Newton step per leaf.  Fitting is fully deterministic: stable
sorts, midpoint thresholds, first-best tie-breaking.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .features import FeatureConfig, FeatureVector

__all__ = ["LabeledPair", "BoostedModel", "train", "predict",
           "model_to_dict", "model_from_dict", "config_fingerprint"]

DEFAULT_N_TREES = 200
DEFAULT_MAX_DEPTH = 4
DEFAULT_LEARNING_RATE = 0.1
DEFAULT_MIN_LEAF = 5

MODEL_SCHEMA_VERSION = 1
_NEWTON_FLOOR = 1e-12


@dataclass
class LabeledPair:
    """One (query, candidate table) training example."""

    query_id: str
    features: FeatureVector
    label: int

    @property
    def key(self):
        return self.features.key


def config_fingerprint(cfg: FeatureConfig, feature_names) -> str:
    payload = json.dumps(
        {"config": cfg.to_dict(), "feature_names": list(feature_names)},
        sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class BoostedModel:
    """Trained boosting ensemble plus the config it was trained against."""

    trees: list
    learning_rate: float
    feature_names: tuple
    config: FeatureConfig
    fingerprint: str
    hyper: dict = field(default_factory=dict)
    train_loss: list = field(default_factory=list)

    def decision_values(self, x):
        """Raw margins (learning rate applied) for a 2-D feature matrix."""
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape[0])
        index = {name: i for i, name in enumerate(self.feature_names)}
        for tree in self.trees:
            total += _tree_values(tree, x, index)
        return self.learning_rate * total

    def predict_rows(self, x):
        return _sigmoid(self.decision_values(x))


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def _tree_values(tree, x, index):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        node = tree
        while "value" not in node:
            j = index[node["feature"]]
            node = node["left"] if x[i, j] <= node["threshold"] else node["right"]
        out[i] = node["value"]
    return out


def _best_split(x_col, residuals, min_leaf, noise):
    """Best (threshold, score) for one feature, or None.

    Score is sum_children S^2/n, to be maximized; the parent's own S^2/n
    is the no-split baseline.  Only positions where the sorted value
    changes are candidates, thresholds are midpoints.  Ties are resolved
    to the first position within ``noise`` of the maximum: cumsum rounding
    can perturb genuinely equal scores by a few ulps, and a strict argmax
    would let that noise pick different winners on reordered or duplicated
    datasets.
    """
    n = x_col.size
    order = np.argsort(x_col, kind="stable")
    sorted_vals = x_col[order]
    prefix = np.cumsum(residuals[order])
    total = prefix[-1]

    pos = np.arange(1, n)  # left part has `pos` elements
    valid = (sorted_vals[1:] != sorted_vals[:-1]) & (pos >= min_leaf) & (pos <= n - min_leaf)
    if not valid.any():
        return None
    s_left = prefix[:-1]
    with np.errstate(invalid="ignore"):
        score = s_left * s_left / pos + (total - s_left) ** 2 / (n - pos)
    score[~valid] = -np.inf
    i = int(np.argmax(score > np.max(score) - noise))  # first within the floor
    a, b = sorted_vals[i], sorted_vals[i + 1]
    threshold = (a + b) / 2.0
    if threshold >= b:  # adjacent floats can round the midpoint up
        threshold = a
    return float(threshold), float(score[i])


def _build_tree(x, residuals, hessian, indices, depth, max_depth, min_leaf):
    sub_res = residuals[indices]
    n = indices.size
    # exact sums keep leaf values invariant under dataset duplication
    total = math.fsum(sub_res)

    def leaf():
        denom = max(math.fsum(hessian[indices]), _NEWTON_FLOOR)
        return {"value": float(total / denom)}

    if depth >= max_depth or n < 2 * min_leaf:
        return leaf()

    # score differences below the noise floor are rounding artifacts; the
    # floor scales with n so duplicated datasets make identical choices,
    # both against the parent and between competing features
    parent_score = total * total / n
    min_gain = 1e-9 * n
    best = None  # (feature, threshold, score)
    for j in range(x.shape[1]):
        found = _best_split(x[indices, j], sub_res, min_leaf, min_gain)
        if found is None:
            continue
        threshold, score = found
        if score > parent_score + min_gain and (best is None or score > best[2] + min_gain):
            best = (j, threshold, score)

    if best is None:
        return leaf()
    j, threshold, _ = best
    mask = x[indices, j] <= threshold
    left = indices[mask]
    right = indices[~mask]
    if left.size < min_leaf or right.size < min_leaf:
        return leaf()
    return {
        "feature": j,  # replaced by the feature name after building
        "threshold": float(threshold),
        "left": _build_tree(x, residuals, hessian, left, depth + 1, max_depth, min_leaf),
        "right": _build_tree(x, residuals, hessian, right, depth + 1, max_depth, min_leaf),
    }


def _name_tree(node, names):
    if "value" in node:
        return node
    return {
        "feature": names[node["feature"]],
        "threshold": node["threshold"],
        "left": _name_tree(node["left"], names),
        "right": _name_tree(node["right"], names),
    }


def _log_loss(y, p):
    eps = 1e-15
    p = np.clip(p, eps, 1.0 - eps)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def train(data, n_trees=DEFAULT_N_TREES, max_depth=DEFAULT_MAX_DEPTH,
          learning_rate=DEFAULT_LEARNING_RATE, min_leaf=DEFAULT_MIN_LEAF,
          seed=0, config: FeatureConfig = None) -> BoostedModel:
    """Fit the boosting ensemble on labeled pairs.

    Requires both labels present and a single shared feature layout.  The
    procedure has no random component; the seed is carried for provenance.
    """
    data = list(data)
    if len(data) < 2:
        raise ValueError("training requires at least two labeled pairs")
    if min_leaf < 1:
        raise ValueError("min_leaf must be at least 1")
    names = data[0].features.names
    for pair in data:
        if pair.features.names != names:
            raise ValueError("labeled pairs use mismatched feature configurations")
        if pair.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {pair.label!r}")
    if config is not None and tuple(config.feature_names()) != tuple(names):
        raise ValueError("feature config does not produce the training data's feature layout")
    y = np.array([p.label for p in data], dtype=float)
    if y.min() == y.max():
        raise ValueError("training data contains a single class")

    x = np.stack([p.features.values for p in data])
    cfg = config
    margin = np.zeros(len(data))
    trees = []
    losses = []
    all_idx = np.arange(len(data))
    for _ in range(n_trees):
        p = _sigmoid(margin)
        residuals = y - p
        hessian = p * (1.0 - p)
        tree = _build_tree(x, residuals, hessian, all_idx, 0, max_depth, min_leaf)
        named = _name_tree(tree, names)
        trees.append(named)
        margin += learning_rate * _tree_values(named, x, {n: i for i, n in enumerate(names)})
        losses.append(_log_loss(y, _sigmoid(margin)))

    hyper = {"n_trees": n_trees, "max_depth": max_depth,
             "learning_rate": learning_rate, "min_leaf": min_leaf, "seed": seed}
    return BoostedModel(
        trees=trees,
        learning_rate=learning_rate,
        feature_names=tuple(names),
        config=cfg,
        fingerprint=config_fingerprint(cfg, names) if cfg is not None else "",
        hyper=hyper,
        train_loss=losses,
    )


def predict(model: BoostedModel, fv: FeatureVector) -> float:
    """F(Q,T) in [0,1]; the vector must match the model's feature layout."""
    if tuple(fv.names) != tuple(model.feature_names):
        raise ValueError("feature vector does not match the model's feature layout")
    return float(model.predict_rows(fv.values.reshape(1, -1))[0])


def model_to_dict(model: BoostedModel) -> dict:
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "kind": "boosted_classifier",
        "learning_rate": model.learning_rate,
        "feature_names": list(model.feature_names),
        "config": model.config.to_dict() if model.config is not None else None,
        "fingerprint": model.fingerprint,
        "hyper": dict(model.hyper),
        "trees": model.trees,
        "train_loss": list(model.train_loss),
    }


def model_from_dict(data: dict) -> BoostedModel:
    """Rebuild a model, verifying the embedded config fingerprint."""
    if data.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise ValueError(f"unsupported model schema_version: {data.get('schema_version')!r}")
    cfg = FeatureConfig.from_dict(data["config"]) if data.get("config") else None
    names = tuple(data["feature_names"])
    if cfg is not None:
        expected = config_fingerprint(cfg, names)
        if data.get("fingerprint") != expected:
            raise ValueError("model fingerprint does not match its feature configuration")
    return BoostedModel(
        trees=list(data["trees"]),
        learning_rate=float(data["learning_rate"]),
        feature_names=names,
        config=cfg,
        fingerprint=data.get("fingerprint", ""),
        hyper=dict(data.get("hyper", {})),
        train_loss=[float(v) for v in data.get("train_loss", [])],
    )
