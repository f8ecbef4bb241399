"""Classifiers, leave-one-out evaluation, the exhaustive feature-relevance
index, PCA projection, and the traditional baselines.

All classifiers are deterministic. Features are z-scored inside each
leave-one-out fold from the training rows only; a zero-variance feature keeps
scale 1. KNN distance ties keep every neighbor at the K-th radius and label
ties resolve toward the lexicographically smaller class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import CostGuardError
from .corpus import Document, tokenize
from .features import (
    FeatureMatrix,
    mutual_information_bits,
    rank_features,
    select_top_k,
)
from .linalg import top_eigenpairs_sym

RELEVANCE_MAX_FEATURES = 15


@dataclass
class ClassifierSpec:
    """Which classifier to run and with what parameters."""

    name: str = "knn"  # knn | cart | nb
    knn_k: int = 1
    cart_min_split: int = 2
    nb_var_smoothing: float = 1e-9


@dataclass
class ClassificationReport:
    classifier: str
    accuracy: float
    confusion: dict[str, dict[str, int]]
    p_value: float
    feature_names: list[str]
    n: int
    config: dict = field(default_factory=dict)


@dataclass
class RelevanceReport:
    """Exhaustive subset sweep: every nonempty feature subset's LOO accuracy.

    ``ledger`` holds (bitmask, accuracy) sorted best-first (ties: smaller
    subset, then smaller bitmask). ``omega[i, k-1]`` counts appearances of
    feature i among the k best subsets, for k up to 2**(phi-1); ``r_index``
    is its sum per feature.
    """

    phi: int
    feature_names: list[str]
    ledger: list[tuple[int, float]]
    omega: np.ndarray
    r_index: dict[str, int]


@dataclass
class PcaProjection:
    coords: np.ndarray
    explained_variance: np.ndarray
    components: np.ndarray


# ---------------------------------------------------------------------------
# classifiers
# ---------------------------------------------------------------------------

def _zscore_stats(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean, std


def knn_classify(
    train_x: np.ndarray, train_y: list[str], row: np.ndarray, k: int = 1
) -> str:
    """Majority label among the K nearest training rows (Euclidean).

    Rows tied with the K-th distance all vote; label ties go to the
    lexicographically smaller label. Inputs are assumed already normalized.
    """
    if len(train_x) == 0:
        raise ValueError("empty training set")
    d2 = ((train_x - row) ** 2).sum(axis=1)
    kth = np.partition(d2, min(k, len(d2)) - 1)[min(k, len(d2)) - 1]
    voters = d2 <= kth
    labels = sorted(set(train_y))
    counts = {lab: 0 for lab in labels}
    for lab, v in zip(train_y, voters):
        if v:
            counts[lab] += 1
    return sorted(labels, key=lambda lab: (-counts[lab], lab))[0]


@dataclass
class _CartNode:
    feature: int = -1
    threshold: float = 0.0
    left: "_CartNode | None" = None
    right: "_CartNode | None" = None
    label: str | None = None


def _gini(y: np.ndarray) -> float:
    _, counts = np.unique(y, return_counts=True)
    p = counts / counts.sum()
    return 1.0 - float((p * p).sum())


def cart_train(train_x: np.ndarray, train_y: list[str], min_split: int = 2) -> _CartNode:
    """Binary Gini tree; thresholds at midpoints of sorted unique values.

    Tie-break across equal-impurity splits: lowest feature index, then lowest
    threshold. No pruning.
    """
    y = np.asarray(train_y, dtype=object)

    def majority(labels: np.ndarray) -> str:
        vals, counts = np.unique(labels, return_counts=True)
        order = sorted(range(len(vals)), key=lambda i: (-counts[i], vals[i]))
        return str(vals[order[0]])

    def build(x: np.ndarray, labels: np.ndarray) -> _CartNode:
        if len(set(labels)) == 1 or len(labels) < min_split:
            return _CartNode(label=majority(labels))
        best = None  # (weighted_gini, feature, threshold)
        for f in range(x.shape[1]):
            col = x[:, f]
            uniq = np.unique(col)
            for a, b in zip(uniq[:-1], uniq[1:]):
                thr = (a + b) / 2.0
                mask = col <= thr
                n_l = int(mask.sum())
                impurity = (
                    n_l * _gini(labels[mask]) + (len(labels) - n_l) * _gini(labels[~mask])
                ) / len(labels)
                cand = (impurity, f, float(thr))
                if best is None or cand < best:
                    best = cand
        if best is None:
            return _CartNode(label=majority(labels))
        _, f, thr = best
        mask = x[:, f] <= thr
        node = _CartNode(feature=f, threshold=thr)
        node.left = build(x[mask], labels[mask])
        node.right = build(x[~mask], labels[~mask])
        return node

    return build(np.asarray(train_x, dtype=np.float64), y)


def cart_classify(tree: _CartNode, row: np.ndarray) -> str:
    node = tree
    while node.label is None:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node.label


@dataclass
class _NbModel:
    labels: list[str]
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray


def nb_train(
    train_x: np.ndarray,
    train_y: list[str],
    var_smoothing: float = 1e-9,
    expected_labels: list[str] | None = None,
) -> _NbModel:
    """Per-class per-feature Gaussians with additive variance smoothing."""
    labels = sorted(expected_labels) if expected_labels else sorted(set(train_y))
    y = np.asarray(train_y, dtype=object)
    x = np.asarray(train_x, dtype=np.float64)
    eps = var_smoothing * float(x.var(axis=0).max()) if x.size else var_smoothing
    means, variances, priors = [], [], []
    for lab in labels:
        rows = x[y == lab]
        if len(rows) < 1:
            raise ValueError(f"class {lab!r} absent from training data")
        means.append(rows.mean(axis=0))
        variances.append(rows.var(axis=0) + max(eps, 1e-300))
        priors.append(len(rows) / len(x))
    return _NbModel(labels, np.array(priors), np.array(means), np.array(variances))


def nb_classify(model: _NbModel, row: np.ndarray) -> str:
    log_post = np.log(model.priors) + (
        -0.5 * np.log(2.0 * math.pi * model.variances)
        - (row - model.means) ** 2 / (2.0 * model.variances)
    ).sum(axis=1)
    return model.labels[int(np.argmax(log_post))]  # argmax tie -> smaller label


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def significance(accuracy: float, n: int) -> float:
    """Exact one-sided binomial tail P(X >= round(accuracy*n)) at p = 1/2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    hits = round(accuracy * n)
    numer = sum(math.comb(n, k) for k in range(hits, n + 1))
    return float(Fraction(numer, 2**n))


def _loo_knn_predictions(x: np.ndarray, y01: np.ndarray, k: int) -> np.ndarray:
    """Vectorized leave-one-out KNN with per-fold z-scoring.

    Mean-centering cancels in Euclidean distances, so each fold only needs
    its per-feature inverse variances, computed from leave-one-out sums.
    """
    n, f = x.shape
    s = x.sum(axis=0)
    ss = (x * x).sum(axis=0)
    mean_i = (s - x) / (n - 1)
    var_i = (ss - x * x) / (n - 1) - mean_i**2
    w = np.ones_like(var_i)
    np.divide(1.0, var_i, out=w, where=var_i > 1e-300)

    preds = np.empty(n, dtype=np.int64)
    for i in range(n):
        d2 = ((x - x[i]) ** 2 * w[i]).sum(axis=1)
        d2[i] = np.inf
        kk = min(k, n - 1)
        kth = np.partition(d2, kk - 1)[kk - 1]
        voters = d2 <= kth
        ones = int(y01[voters].sum())
        zeros = int(voters.sum()) - ones
        preds[i] = 1 if ones > zeros else 0  # tie -> smaller (index 0) label
    return preds


def loo_evaluate(fm: FeatureMatrix, spec: ClassifierSpec) -> ClassificationReport:
    """n-fold leave-one-out with per-fold normalization from training rows."""
    n = fm.n_documents
    if n < 2:
        raise ValueError("leave-one-out needs at least two documents")
    labels_sorted = sorted(set(fm.labels))
    x = fm.values
    y = list(fm.labels)

    predictions: list[str] = []
    if spec.name == "knn":
        y01 = np.array([labels_sorted.index(lab) for lab in y])
        preds = _loo_knn_predictions(x, y01, spec.knn_k)
        predictions = [labels_sorted[p] for p in preds]
    else:
        for i in range(n):
            mask = np.ones(n, dtype=bool)
            mask[i] = False
            mean, std = _zscore_stats(x[mask])
            train = (x[mask] - mean) / std
            test = (x[i] - mean) / std
            train_y = [y[j] for j in range(n) if mask[j]]
            if spec.name == "cart":
                predictions.append(cart_classify(cart_train(train, train_y, spec.cart_min_split), test))
            elif spec.name == "nb":
                model = nb_train(train, train_y, spec.nb_var_smoothing, labels_sorted)
                predictions.append(nb_classify(model, test))
            else:
                raise ValueError(f"unknown classifier {spec.name!r}")

    confusion = {t: {p: 0 for p in labels_sorted} for t in labels_sorted}
    hits = 0
    for truth, pred in zip(y, predictions):
        confusion[truth][pred] += 1
        hits += truth == pred
    accuracy = hits / n
    return ClassificationReport(
        classifier=spec.name,
        accuracy=accuracy,
        confusion=confusion,
        p_value=significance(accuracy, n),
        feature_names=list(fm.feature_names),
        n=n,
    )


def relevance_index(fm: FeatureMatrix, spec: ClassifierSpec | None = None) -> RelevanceReport:
    """LOO accuracy for every nonempty feature subset, then the relevance index.

    The ledger sorts subsets by accuracy (descending), then subset size, then
    bitmask. omega accumulates feature appearances down the ledger and the
    index sums omega over the first 2**(phi-1) ranks.
    """
    spec = spec or ClassifierSpec()
    phi = len(fm.feature_names)
    if phi > RELEVANCE_MAX_FEATURES:
        raise CostGuardError(
            f"relevance sweep over {phi} features needs 2^{phi} evaluations; "
            f"the guard allows at most {RELEVANCE_MAX_FEATURES}"
        )
    n = fm.n_documents
    labels_sorted = sorted(set(fm.labels))
    y01 = np.array([labels_sorted.index(lab) for lab in fm.labels])
    x = fm.values

    accuracies = np.zeros(2**phi - 1, dtype=np.float64)
    if spec.name == "knn":
        # deltas[f] and per-fold weights are subset-independent; each subset
        # evaluation reduces to one weighted sum over its features
        deltas = np.empty((phi, n, n), dtype=np.float64)
        for f in range(phi):
            col = x[:, f]
            deltas[f] = (col[:, None] - col[None, :]) ** 2
        s = x.sum(axis=0)
        ss = (x * x).sum(axis=0)
        mean_i = (s - x) / (n - 1)
        var_i = (ss - x * x) / (n - 1) - mean_i**2
        w = np.ones_like(var_i)
        np.divide(1.0, var_i, out=w, where=var_i > 1e-300)
        kk = min(spec.knn_k, n - 1)
        diag = np.arange(n)
        for mask in range(1, 2**phi):
            feats = [f for f in range(phi) if mask >> f & 1]
            d2 = np.einsum("if,fij->ij", w[:, feats], deltas[feats])
            d2[diag, diag] = np.inf
            kth = np.partition(d2, kk - 1, axis=1)[:, kk - 1]
            voters = d2 <= kth[:, None]
            ones = voters @ y01
            zeros = voters.sum(axis=1) - ones
            preds = (ones > zeros).astype(np.int64)
            accuracies[mask - 1] = float((preds == y01).mean())
    else:
        for mask in range(1, 2**phi):
            names = [fm.feature_names[f] for f in range(phi) if mask >> f & 1]
            accuracies[mask - 1] = loo_evaluate(fm.subset(names), spec).accuracy

    order = sorted(
        range(1, 2**phi),
        key=lambda m: (-accuracies[m - 1], bin(m).count("1"), m),
    )
    ledger = [(m, float(accuracies[m - 1])) for m in order]

    top = 2 ** (phi - 1)
    omega = np.zeros((phi, top), dtype=np.int64)
    running = np.zeros(phi, dtype=np.int64)
    for rank, (m, _) in enumerate(ledger[:top], start=1):
        for f in range(phi):
            if m >> f & 1:
                running[f] += 1
        omega[:, rank - 1] = running
    r_index = {
        fm.feature_names[f]: int(omega[f].sum()) for f in range(phi)
    }
    return RelevanceReport(phi, list(fm.feature_names), ledger, omega, r_index)


def pca_project(fm: FeatureMatrix, dims: int = 2) -> PcaProjection:
    """Project documents onto the top principal components of the columns."""
    if len(fm.feature_names) < dims:
        raise ValueError("need at least as many features as projection dims")
    centered = fm.values - fm.values.mean(axis=0)
    cov = centered.T @ centered / len(centered)
    values, vectors = top_eigenpairs_sym(cov, dims)
    return PcaProjection(centered @ vectors, values, vectors)


# ---------------------------------------------------------------------------
# traditional baselines
# ---------------------------------------------------------------------------

def _relative_frequency_matrix(
    docs: list[Document], vocabulary: list[str], relative: bool = True
) -> np.ndarray:
    rows = np.zeros((len(docs), len(vocabulary)), dtype=np.float64)
    index = {w: j for j, w in enumerate(vocabulary)}
    for i, doc in enumerate(docs):
        for tok in doc.tokens:
            j = index.get(tok)
            if j is not None:
                rows[i, j] += 1.0
        if relative and doc.tokens:
            rows[i] /= len(doc.tokens)
    return rows


def baseline_word_lsa(
    docs: list[Document], n_words: int = 10, relative: bool = True
) -> tuple[FeatureMatrix, np.ndarray]:
    """Relative frequencies of the most frequent words, with a rank-2 SVD map.

    ``docs`` should be stopword-free so the vocabulary is content words.
    Returns the feature matrix and the documents' rank-2 coordinates.
    """
    totals: dict[str, int] = {}
    for doc in docs:
        for tok in doc.tokens:
            totals[tok] = totals.get(tok, 0) + 1
    vocab = sorted(totals, key=lambda w: (-totals[w], w))[:n_words]
    rows = _relative_frequency_matrix(docs, vocab, relative)
    fm = FeatureMatrix([d.id for d in docs], [d.label for d in docs], list(vocab), rows)
    gram = rows.T @ rows
    _, vectors = top_eigenpairs_sym(gram, 2)
    return fm, rows @ vectors


def baseline_stopword_frequency(
    docs: list[Document],
    stoplist: set[str],
    top_k: int = 15,
    spec: ClassifierSpec | None = None,
    relative: bool = True,
) -> ClassificationReport:
    """Classify on the most informative stopword frequencies.

    ``docs`` must retain stopwords. Stopword columns are ranked by
    information gain and the top_k survive into a leave-one-out run.
    """
    present = sorted({tok for doc in docs for tok in doc.tokens if tok in stoplist})
    if not present:
        raise ValueError("no stopwords present in the corpus")
    rows = _relative_frequency_matrix(docs, present, relative)
    fm = FeatureMatrix([d.id for d in docs], [d.label for d in docs], present, rows)
    fm = select_top_k(fm, min(top_k, len(present)))
    report = loo_evaluate(fm, spec or ClassifierSpec())
    report.config["baseline"] = "stopword-frequency"
    return report


def char_bigram_counts(raw_text: str) -> dict[str, int]:
    """Word-internal character bigram counts over lowercased alphabetic runs."""
    counts: dict[str, int] = {}
    for word in tokenize(raw_text):
        for a, b in zip(word[:-1], word[1:]):
            bg = a + b
            counts[bg] = counts.get(bg, 0) + 1
    return counts


def baseline_char_bigrams(
    raw_docs: list[tuple[str, str, str]],
    top_k: int = 15,
    spec: ClassifierSpec | None = None,
    relative: bool = True,
) -> ClassificationReport:
    """Classify on the most informative character-bigram frequencies.

    ``raw_docs`` holds (doc_id, label, raw_text) triples; bigrams never cross
    word boundaries.
    """
    per_doc = [char_bigram_counts(text) for _, _, text in raw_docs]
    vocab = sorted({bg for counts in per_doc for bg in counts})
    rows = np.zeros((len(raw_docs), len(vocab)), dtype=np.float64)
    index = {bg: j for j, bg in enumerate(vocab)}
    for i, counts in enumerate(per_doc):
        for bg, c in counts.items():
            rows[i, index[bg]] = c
        total = rows[i].sum()
        if relative and total > 0:
            rows[i] /= total
    fm = FeatureMatrix(
        [d[0] for d in raw_docs], [d[1] for d in raw_docs], vocab, rows
    )
    fm = select_top_k(fm, min(top_k, len(vocab)))
    report = loo_evaluate(fm, spec or ClassifierSpec())
    report.config["baseline"] = "char-bigrams"
    return report
