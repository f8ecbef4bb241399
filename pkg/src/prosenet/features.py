"""Feature assembly and selection.

Turns per-document measurement sets into a documents x features matrix under
the global (summary statistics of each measure) or local (one column per
measure/word pair) strategies, filters local columns that track raw word
frequency, and ranks columns by information gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import Document
from .metrics import NodeMeasures

# canonical column ordering for reproducible feature matrices
MEASURE_ORDER = [
    "k", "N2", "N3", "cc", "B", "C", "E", "Ec", "Pr",
    "A2", "A3", "A4", "Ag",
    "Sb2", "Sb3", "Sb4", "Sm2", "Sm3", "Sm4",
]
GLOBAL_STATS = ["mean", "std", "median", "max", "min"]


@dataclass
class DocumentMeasures:
    """Everything measured on one document's network, keyed by measure name."""

    doc_id: str
    label: str
    node_labels: list[str]
    measures: dict[str, NodeMeasures]
    vocabulary_size: int
    modularity_q: float
    word_frequencies: dict[str, int] = field(default_factory=dict)

    def node_of(self, word: str) -> int | None:
        if not hasattr(self, "_index"):
            self._index = {w: i for i, w in enumerate(self.node_labels)}
        return self._index.get(word)


@dataclass
class FeatureMatrix:
    """Documents x named features with class labels; missing cells imputed."""

    doc_ids: list[str]
    labels: list[str]
    feature_names: list[str]
    values: np.ndarray
    missing: np.ndarray = None

    def __post_init__(self):
        if self.missing is None:
            self.missing = np.zeros(self.values.shape, dtype=bool)

    @property
    def n_documents(self) -> int:
        return len(self.doc_ids)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.feature_names.index(name)]

    def subset(self, names: list[str]) -> "FeatureMatrix":
        idx = [self.feature_names.index(n) for n in names]
        return FeatureMatrix(
            self.doc_ids, self.labels, list(names),
            self.values[:, idx].copy(), self.missing[:, idx].copy(),
        )

    def to_csv(self) -> str:
        lines = ["doc_id,label," + ",".join(self.feature_names)]
        for i, doc_id in enumerate(self.doc_ids):
            cells = [repr(float(v)) for v in self.values[i]]
            lines.append(f"{doc_id},{self.labels[i]}," + ",".join(cells))
        return "\n".join(lines) + "\n"


@dataclass
class FeatureRanking:
    """(feature, information gain) pairs, best first."""

    ranked: list[tuple[str, float]]


def _ordered_measures(measure_names) -> list[str]:
    known = [m for m in MEASURE_ORDER if m in measure_names]
    extra = sorted(set(measure_names) - set(MEASURE_ORDER))
    return known + extra


def _impute_column_means(values: np.ndarray, missing: np.ndarray) -> np.ndarray:
    out = values.copy()
    for j in range(values.shape[1]):
        gap = missing[:, j]
        if gap.any():
            present = values[~gap, j]
            out[gap, j] = present.mean() if len(present) else 0.0
    return out


def global_features(doc_measures: list[DocumentMeasures]) -> FeatureMatrix:
    """Summary statistics of each measure plus vocabulary size and modularity.

    Per measure X the columns are mean(X), std(X) (population), median(X),
    max(X), min(X), computed over nodes carrying a value. V and Q are appended
    as their own columns.
    """
    measure_names = _ordered_measures(doc_measures[0].measures.keys())
    names = [f"{s}({m})" for m in measure_names for s in GLOBAL_STATS] + ["V", "Q"]
    rows = np.zeros((len(doc_measures), len(names)), dtype=np.float64)
    for i, dm in enumerate(doc_measures):
        col = 0
        for m in measure_names:
            vals = dm.measures[m].present_values()
            if vals.size == 0:
                raise ValueError(
                    f"measure {m!r} has no values on document {dm.doc_id!r}; "
                    "global statistics need at least one measured node"
                )
            rows[i, col : col + 5] = (
                vals.mean(), vals.std(), np.median(vals), vals.max(), vals.min(),
            )
            col += 5
        rows[i, col] = dm.vocabulary_size
        rows[i, col + 1] = dm.modularity_q
    return FeatureMatrix(
        [dm.doc_id for dm in doc_measures],
        [dm.label for dm in doc_measures],
        names,
        rows,
    )


def select_word_list(
    docs: list[Document],
    size: int = 50,
    min_doc_fraction: float = 0.9,
) -> list[str]:
    """The most frequent lemmas appearing in at least min_doc_fraction of docs."""
    totals: dict[str, int] = {}
    coverage: dict[str, int] = {}
    for doc in docs:
        seen = set()
        for tok in doc.tokens:
            totals[tok] = totals.get(tok, 0) + 1
            seen.add(tok)
        for tok in seen:
            coverage[tok] = coverage.get(tok, 0) + 1
    threshold = min_doc_fraction * len(docs)
    eligible = [w for w, c in coverage.items() if c >= threshold]
    eligible.sort(key=lambda w: (-totals[w], w))
    return eligible[:size]


def local_features(
    doc_measures: list[DocumentMeasures],
    word_list: list[str],
    include_stopwords: bool = True,
    stoplist: set[str] | None = None,
) -> FeatureMatrix:
    """One column per (measure, word): the word's node value in each document.

    A cell is missing when the word is absent from the document (or carries a
    missing marker there); missing cells are imputed with the column mean.
    """
    if not word_list:
        raise ValueError("word list is empty")
    if not include_stopwords and stoplist:
        word_list = [w for w in word_list if w not in stoplist]
        if not word_list:
            raise ValueError("word list is empty after stopword removal")

    measure_names = _ordered_measures(doc_measures[0].measures.keys())
    names = [f"{m}@{w}" for m in measure_names for w in word_list]
    n, f = len(doc_measures), len(names)
    values = np.zeros((n, f), dtype=np.float64)
    missing = np.ones((n, f), dtype=bool)
    for i, dm in enumerate(doc_measures):
        col = 0
        for m in measure_names:
            nm = dm.measures[m]
            for w in word_list:
                node = dm.node_of(w)
                if node is not None and not nm.missing[node]:
                    values[i, col] = nm.values[node]
                    missing[i, col] = False
                col += 1
    return FeatureMatrix(
        [dm.doc_id for dm in doc_measures],
        [dm.label for dm in doc_measures],
        names,
        _impute_column_means(values, missing),
        missing,
    )


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    sx, sy = x.std(), y.std()
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))


def frequency_decorrelation_filter(
    fm: FeatureMatrix,
    frequencies: dict[str, dict[str, int]],
    rho_max: float = 0.5,
) -> FeatureMatrix:
    """Drop local columns whose |Pearson r| with the word's per-document
    frequency exceeds rho_max. Non-local columns pass through."""
    keep = []
    for j, name in enumerate(fm.feature_names):
        if "@" not in name:
            keep.append(name)
            continue
        word = name.split("@", 1)[1]
        freq = np.array(
            [frequencies.get(d, {}).get(word, 0) for d in fm.doc_ids], dtype=np.float64
        )
        if abs(_pearson(fm.values[:, j], freq)) <= rho_max:
            keep.append(name)
    return fm.subset(keep)


def _equal_frequency_bins(x: np.ndarray, bins: int = 10) -> np.ndarray:
    """Discretize into equal-frequency bins; tied values share a bin.

    Cut points are order statistics (inverted-CDF quantiles), so the binning
    is invariant under strictly monotone transformations of x.
    """
    qs = np.quantile(x, [i / bins for i in range(1, bins)], method="inverted_cdf")
    return np.searchsorted(qs, x, side="right")


def information_gain(fm: FeatureMatrix, feature: str | int, bins: int = 10) -> float:
    """Mutual information (bits) between the discretized feature and the label."""
    j = fm.feature_names.index(feature) if isinstance(feature, str) else feature
    x = _equal_frequency_bins(fm.values[:, j], bins)
    label_names = sorted(set(fm.labels))
    y = np.array([label_names.index(l) for l in fm.labels])
    return mutual_information_bits(x, y)


def mutual_information_bits(x: np.ndarray, y: np.ndarray) -> float:
    """Plug-in mutual information of two discrete sequences, in bits."""
    n = len(x)
    xs = np.unique(x)
    ys = np.unique(y)
    total = 0.0
    for xv in xs:
        px = (x == xv).mean()
        for yv in ys:
            pxy = ((x == xv) & (y == yv)).mean()
            if pxy > 0:
                py = (y == yv).mean()
                total += pxy * math.log2(pxy / (px * py))
    return max(total, 0.0)


def rank_features(fm: FeatureMatrix, bins: int = 10) -> FeatureRanking:
    """All columns ranked by information gain, descending; ties by name."""
    gains = [(name, information_gain(fm, j, bins)) for j, name in enumerate(fm.feature_names)]
    gains.sort(key=lambda t: (-t[1], t[0]))
    return FeatureRanking(gains)


def select_top_k(fm: FeatureMatrix, k: int, bins: int = 10) -> FeatureMatrix:
    """Keep the k highest-gain columns, in ranking order."""
    if k > len(fm.feature_names):
        raise ValueError(f"k={k} exceeds the {len(fm.feature_names)} available columns")
    ranking = rank_features(fm, bins)
    return fm.subset([name for name, _ in ranking.ranked[:k]])
