"""Forecast error metrics, error buckets, feature importance, and clustering.

MAPE follows the exclude-and-count policy for zero targets: cold-start data
can legitimately contain zero-view rows, so those rows are dropped from the
mean and reported in ``n_excluded_zero_target`` instead of raising.
SMAPE uses the factor-2 numerator with |y| + |yhat| in the denominator
(range 0..200) and defines the both-zero term as 0.
"""

from dataclasses import dataclass

import numpy as np

from .data import FeatureMatrix
from .errors import DataError
from .util import mix_seed

BUCKET_EDGES = (10.0, 20.0, 30.0, 40.0)


@dataclass
class MetricReport:
    mape: float
    smape: float
    r2: float
    n_scored: int
    n_excluded_zero_target: int

    def to_dict(self):
        return {
            "mape": self.mape,
            "smape": self.smape,
            "r2": self.r2,
            "n_scored": self.n_scored,
            "n_excluded_zero_target": self.n_excluded_zero_target,
        }


@dataclass
class ErrorBuckets:
    edges: tuple
    counts: list  # 5 ints: <10, 10-20, 20-30, 30-40, >40 percent

    def to_dict(self):
        return {"edges": list(self.edges), "counts": list(self.counts)}


@dataclass
class ImportanceReport:
    features: list  # list of (name, score, rank), rank 1 = most important
    degenerate: bool = False

    def rank_of(self, name):
        for fname, _, rank in self.features:
            if fname == name:
                return rank
        raise KeyError(name)

    def to_dict(self):
        return {
            "features": [
                {"name": n, "score": s, "rank": r} for n, s, r in self.features
            ],
            "degenerate": self.degenerate,
        }


def _aligned(y, yhat):
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1:
        raise DataError("metric inputs must be aligned 1-D vectors")
    return y, yhat


def mape(y, yhat):
    """Mean absolute percentage error over rows with nonzero target."""
    y, yhat = _aligned(y, yhat)
    mask = y != 0
    if not np.any(mask):
        raise DataError("MAPE undefined: all targets are zero")
    return 100.0 * float(np.mean(np.abs(y[mask] - yhat[mask]) / np.abs(y[mask])))


def mape_excluded_count(y):
    y = np.asarray(y, dtype=float)
    return int(np.sum(y == 0))


def smape(y, yhat):
    """Symmetric MAPE in [0, 200]; a term with both values zero counts as 0."""
    y, yhat = _aligned(y, yhat)
    denom = np.abs(y) + np.abs(yhat)
    terms = np.zeros_like(denom)
    nz = denom != 0
    terms[nz] = 2.0 * np.abs(y[nz] - yhat[nz]) / denom[nz]
    return 100.0 * float(np.mean(terms))


def r2(y, yhat):
    """Coefficient of determination, 1 - SS_res / SS_tot."""
    y, yhat = _aligned(y, yhat)
    if len(y) < 2:
        raise DataError("r2 needs at least 2 rows")
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0:
        raise DataError("r2 undefined for constant targets")
    ss_res = float(np.sum((y - yhat) ** 2))
    return 1.0 - ss_res / ss_tot


def pearson(a, b):
    """Sample Pearson correlation coefficient."""
    a, b = _aligned(a, b)
    if len(a) < 2:
        raise DataError("pearson needs at least 2 rows")
    ac = a - np.mean(a)
    bc = b - np.mean(b)
    va = float(np.sum(ac * ac))
    vb = float(np.sum(bc * bc))
    if va == 0 or vb == 0:
        raise DataError("pearson undefined: zero variance input")
    return float(np.sum(ac * bc)) / np.sqrt(va * vb)


def pearson_matrix(named_vectors):
    """Pairwise Pearson correlations for (name, vector) pairs.

    Pairs with a zero-variance side map to 0.0 (undefined) so heatmaps stay
    total; the diagonal is always exactly 1.0.
    """
    names = [n for n, _ in named_vectors]
    vectors = [np.asarray(v, dtype=float) for _, v in named_vectors]
    n = len(names)
    matrix = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            try:
                corr = pearson(vectors[i], vectors[j])
            except DataError:
                corr = 0.0
            matrix[i, j] = matrix[j, i] = corr
    return names, matrix


def metric_report(y, yhat):
    """MAPE + SMAPE + R2 in one record with the zero-target bookkeeping."""
    y, yhat = _aligned(y, yhat)
    return MetricReport(
        mape=mape(y, yhat),
        smape=smape(y, yhat),
        r2=r2(y, yhat),
        n_scored=int(np.sum(y != 0)),
        n_excluded_zero_target=mape_excluded_count(y),
    )


def error_buckets(y, yhat):
    """Bin per-row absolute percentage errors at 10/20/30/40 percent.

    Bins are lower-inclusive: an error of exactly 10% lands in the 10-20
    bucket. Zero-target rows are excluded (they have no percentage error).
    """
    y, yhat = _aligned(y, yhat)
    mask = y != 0
    if not np.any(mask):
        raise DataError("error buckets undefined: all targets are zero")
    pct = 100.0 * np.abs(y[mask] - yhat[mask]) / np.abs(y[mask])
    counts = [0, 0, 0, 0, 0]
    for e in pct:
        if e < BUCKET_EDGES[0]:
            counts[0] += 1
        elif e < BUCKET_EDGES[1]:
            counts[1] += 1
        elif e < BUCKET_EDGES[2]:
            counts[2] += 1
        elif e < BUCKET_EDGES[3]:
            counts[3] += 1
        else:
            counts[4] += 1
    return ErrorBuckets(edges=BUCKET_EDGES, counts=counts)


def _ranked(names, scores, degenerate=False):
    order = sorted(range(len(names)), key=lambda j: (-scores[j], j))
    ranks = [0] * len(names)
    for rank, j in enumerate(order, start=1):
        ranks[j] = rank
    feats = [(names[j], float(scores[j]), ranks[j]) for j in range(len(names))]
    return ImportanceReport(features=feats, degenerate=degenerate)


def permutation_importance(model, X, y, metric="mape", repeats=5, seed=0):
    """Score each feature by the metric degradation when it is shuffled.

    ``model`` is anything with a predict(values) method. Scores are oriented
    so that larger means more important regardless of whether the metric is
    an error (mape) or a score (r2).
    """
    if repeats < 1:
        raise DataError("repeats must be >= 1")
    if isinstance(X, FeatureMatrix):
        values, names = X.values, list(X.feature_names)
    else:
        values = np.asarray(X, dtype=float)
        names = [f"f{j}" for j in range(values.shape[1])]
    y = np.asarray(y, dtype=float)

    if metric == "mape":
        def score(yy, pp):
            return mape(yy, pp)
        sign = 1.0  # error metric: degradation = increase
    elif metric == "r2":
        def score(yy, pp):
            return r2(yy, pp)
        sign = -1.0  # score metric: degradation = decrease
    else:
        raise DataError(f"unsupported importance metric {metric!r}")

    baseline = score(y, model.predict(values))
    p = values.shape[1]
    scores = np.zeros(p)
    for j in range(p):
        deltas = []
        for rep in range(repeats):
            rng = np.random.default_rng(mix_seed(seed, j * 1000 + rep))
            shuffled = values.copy()
            shuffled[:, j] = rng.permutation(shuffled[:, j])
            deltas.append(sign * (score(y, model.predict(shuffled)) - baseline))
        scores[j] = float(np.mean(deltas))
    return _ranked(names, scores)


def impurity_importance(model, feature_names):
    """Variance-reduction importance summed over every split, normalized to 1.

    Regression analog of Gini importance: each internal node contributes
    n_samples * impurity_decrease to the feature it splits on; forests and
    boosted models sum across their trees.
    """
    from .trees import ForestModel, GbtModel, TreeNode, walk_nodes

    if isinstance(model, TreeNode):
        trees = [model]
    elif isinstance(model, ForestModel):
        trees = model.trees
    elif isinstance(model, GbtModel):
        trees = model.stages
    else:
        raise DataError(f"impurity importance needs a tree-family model, got {type(model).__name__}")

    scores = np.zeros(len(feature_names))
    for tree in trees:
        for node in walk_nodes(tree):
            if not node.is_leaf:
                scores[node.feature_index] += node.n_samples * node.impurity_decrease
    total = float(scores.sum())
    if total <= 0:
        return _ranked(list(feature_names), scores, degenerate=True)
    return _ranked(list(feature_names), scores / total)


def kmeans_cluster(points, k, seed, max_iter=100, tol=1e-6):
    """Lloyd's k-means with k-means++ seeding.

    Returns (assignments, centroids). An emptied cluster is reseeded to the
    point farthest from its current centroid.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    n = pts.shape[0]
    if k <= 0 or k > n:
        raise DataError(f"k must be in [1, n]={n}, got {k}")
    if not np.all(np.isfinite(pts)):
        raise DataError("k-means input contains non-finite values")

    rng = np.random.default_rng(seed)
    # k-means++ initialization
    centroids = np.empty((k, pts.shape[1]))
    first = rng.integers(n)
    centroids[0] = pts[first]
    closest_sq = np.sum((pts - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        total = float(closest_sq.sum())
        if total == 0:
            idx = rng.integers(n)
        else:
            probs = closest_sq / total
            idx = rng.choice(n, p=probs)
        centroids[c] = pts[idx]
        closest_sq = np.minimum(closest_sq, np.sum((pts - centroids[c]) ** 2, axis=1))

    assignments = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        dists = np.sum((pts[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        assignments = np.argmin(dists, axis=1)
        new_centroids = centroids.copy()
        for c in range(k):
            member = assignments == c
            if np.any(member):
                new_centroids[c] = pts[member].mean(axis=0)
            else:
                # reseed an emptied cluster to the globally farthest point
                far = int(np.argmax(np.min(dists, axis=1)))
                new_centroids[c] = pts[far]
        shift = float(np.max(np.sqrt(np.sum((new_centroids - centroids) ** 2, axis=1))))
        centroids = new_centroids
        if shift < tol:
            break
    dists = np.sum((pts[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    assignments = np.argmin(dists, axis=1)
    return assignments, centroids


def kmeans_inertia(points, assignments, centroids):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    return float(np.sum((pts - centroids[assignments]) ** 2))
