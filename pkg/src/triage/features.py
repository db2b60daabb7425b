"""TF-IDF featurization with stop-word removal and document-frequency pruning.

Raw term counts are scaled by a smoothed inverse document frequency,
idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1, then each vector is
L2-normalized. Vocabulary indices are assigned lexicographically so fitting
is reproducible across runs and platforms.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from .errors import DataError
from .textprep import TokenSequence

DEFAULT_MIN_DF = 10


def load_stop_words(path: Union[str, Path, None] = None) -> frozenset[str]:
    """Load the stop-word list (one term per line, `#` comments).

    The packaged default is a fixed English list of 318 terms.
    """
    if path is None:
        text = resources.files("triage.data").joinpath("stop_words.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines()
                     if w.strip() and not w.startswith("#"))


@dataclass(frozen=True)
class Vocabulary:
    index: dict[str, int]           # term -> contiguous 0..V-1, lexicographic
    document_frequency: dict[str, int]
    n_docs_fit: int

    def __len__(self) -> int:
        return len(self.index)


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: Vocabulary
    idf: np.ndarray                 # aligned with vocabulary indices
    min_df: int
    stop_words: frozenset[str]

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def terms(self) -> list[str]:
        """Terms in index order."""
        return sorted(self.vocabulary.index, key=self.vocabulary.index.__getitem__)


@dataclass(frozen=True)
class FeatureVector:
    """Sparse vector: parallel (index, value) arrays plus the full dimension."""
    indices: np.ndarray
    values: np.ndarray
    dim: int

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        dense[self.indices] = self.values
        return dense

    def dot(self, other: "FeatureVector") -> float:
        if self.dim != other.dim:
            raise DataError(f"dimension mismatch: {self.dim} vs {other.dim}")
        common, ia, ib = np.intersect1d(self.indices, other.indices,
                                        assume_unique=True, return_indices=True)
        return float(np.dot(self.values[ia], other.values[ib]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def fit_tfidf(docs: Sequence[TokenSequence], min_df: int = DEFAULT_MIN_DF,
              stop_words: Optional[Iterable[str]] = None) -> TfidfModel:
    """Build the vocabulary and IDF weights from tokenized documents.

    Retains terms that appear in at least min_df documents and are not stop
    words. Raises when no documents are given or pruning empties the
    vocabulary.
    """
    if not docs:
        raise DataError("cannot fit TF-IDF on an empty document list")
    if min_df < 1:
        raise DataError(f"min_df must be >= 1, got {min_df}")
    stop = frozenset(stop_words) if stop_words is not None else frozenset()
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc.tokens))
    kept = sorted(t for t, c in df.items() if c >= min_df and t not in stop)
    if not kept:
        raise DataError(
            f"vocabulary is empty after pruning (min_df={min_df}, "
            f"{len(stop)} stop words)")
    n = len(docs)
    index = {t: i for i, t in enumerate(kept)}
    idf = np.array([math.log((1 + n) / (1 + df[t])) + 1.0 for t in kept])
    vocab = Vocabulary(index=index, document_frequency={t: df[t] for t in kept},
                       n_docs_fit=n)
    return TfidfModel(vocabulary=vocab, idf=idf, min_df=min_df, stop_words=stop)


def transform_tfidf(model: TfidfModel, doc: TokenSequence) -> FeatureVector:
    """Count in-vocabulary terms, weight by IDF, L2-normalize.

    Documents with no in-vocabulary term map to the zero vector; everything
    else has unit norm.
    """
    counts: Counter[int] = Counter()
    index = model.vocabulary.index
    for token in doc.tokens:
        idx = index.get(token)
        if idx is not None:
            counts[idx] += 1
    if not counts:
        return FeatureVector(np.array([], dtype=np.intp), np.array([]), model.dim)
    indices = np.array(sorted(counts), dtype=np.intp)
    values = np.array([counts[i] for i in indices], dtype=float) * model.idf[indices]
    values /= np.linalg.norm(values)
    return FeatureVector(indices, values, model.dim)


def transform_corpus(model: TfidfModel, docs: Sequence[TokenSequence]) -> list[FeatureVector]:
    return [transform_tfidf(model, d) for d in docs]


def to_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    """Stack sparse vectors into a dense (n, dim) matrix."""
    if not vectors:
        raise DataError("no feature vectors to stack")
    dim = vectors[0].dim
    out = np.zeros((len(vectors), dim))
    for i, v in enumerate(vectors):
        if v.dim != dim:
            raise DataError(f"dimension mismatch: {v.dim} vs {dim}")
        out[i, v.indices] = v.values
    return out


# --- persistence -----------------------------------------------------------
# Textual schema; floats carry 17 significant digits so round-trips are exact.

def write_tfidf(model: TfidfModel, fh: TextIO) -> None:
    fh.write("tfidfv1\n")
    fh.write(f"min_df {model.min_df}\n")
    fh.write(f"n_docs_fit {model.vocabulary.n_docs_fit}\n")
    fh.write(f"n_stop_words {len(model.stop_words)}\n")
    for w in sorted(model.stop_words):
        fh.write(f"stop {w}\n")
    fh.write(f"n_terms {model.dim}\n")
    for term in model.terms():
        i = model.vocabulary.index[term]
        df = model.vocabulary.document_frequency[term]
        fh.write(f"term {term} {df} {model.idf[i]:.17g}\n")


def read_tfidf(fh: TextIO) -> TfidfModel:
    def next_line():
        line = fh.readline()
        if not line:
            raise DataError("truncated TF-IDF model file")
        return line.rstrip("\n")

    def field(line: str, key: str) -> str:
        parts = line.split(" ", 1)
        if len(parts) != 2 or parts[0] != key:
            raise DataError(f"TF-IDF model: expected '{key} ...', got {line!r}")
        return parts[1]

    if next_line() != "tfidfv1":
        raise DataError("not a TF-IDF model file (bad magic)")
    min_df = int(field(next_line(), "min_df"))
    n_docs = int(field(next_line(), "n_docs_fit"))
    n_stop = int(field(next_line(), "n_stop_words"))
    stop = frozenset(field(next_line(), "stop") for _ in range(n_stop))
    n_terms = int(field(next_line(), "n_terms"))
    index: dict[str, int] = {}
    dfs: dict[str, int] = {}
    idf = np.zeros(n_terms)
    for i in range(n_terms):
        parts = field(next_line(), "term").rsplit(" ", 2)
        if len(parts) != 3:
            raise DataError(f"TF-IDF model: malformed term line {i}")
        term, df_s, idf_s = parts
        index[term] = i
        dfs[term] = int(df_s)
        idf[i] = float(idf_s)
    vocab = Vocabulary(index=index, document_frequency=dfs, n_docs_fit=n_docs)
    return TfidfModel(vocabulary=vocab, idf=idf, min_df=min_df, stop_words=stop)
