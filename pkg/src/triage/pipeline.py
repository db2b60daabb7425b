"""End-to-end scoring pipelines and their single-file persistence.

An SVM pipeline bundles the token cap, the fitted TF-IDF model, and the
trained SVM into one text file, so `evaluate` and `triage` can score raw
report text. Head models score precomputed embedding rows instead and are
stored in their own format; `sniff_model` distinguishes the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .corpus import Report
from .embed import EmbeddingMatrix
from .errors import DataError
from .features import TfidfModel, read_tfidf, transform_tfidf, write_tfidf
from .head import HeadModel, head_forward, read_head, write_head
from .svm import SvmModel, decision_scores, read_svm, write_svm
from .textprep import AcronymDictionary, preprocess

SVM_PIPELINE_MAGIC = "svmpipelinev1"
HEAD_MAGIC = "headv1"


@dataclass(frozen=True)
class SvmPipeline:
    token_cap: int
    tfidf: TfidfModel
    svm: SvmModel

    def score_reports(self, reports: Sequence[Report],
                      dictionary: AcronymDictionary) -> np.ndarray:
        feats = [transform_tfidf(self.tfidf, preprocess(r, dictionary, self.token_cap))
                 for r in reports]
        return decision_scores(self.svm, feats)


def save_svm_pipeline(p: SvmPipeline, path: Union[str, Path]) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{SVM_PIPELINE_MAGIC}\n")
        fh.write(f"cap {p.token_cap}\n")
        write_tfidf(p.tfidf, fh)
        write_svm(p.svm, fh)
    tmp.replace(path)


def load_svm_pipeline(path: Union[str, Path]) -> SvmPipeline:
    with Path(path).open(encoding="utf-8") as fh:
        if fh.readline().rstrip("\n") != SVM_PIPELINE_MAGIC:
            raise DataError(f"{path}: not an SVM pipeline file")
        cap_line = fh.readline().rstrip("\n")
        key, _, value = cap_line.partition(" ")
        if key != "cap":
            raise DataError(f"{path}: expected 'cap <n>', got {cap_line!r}")
        cap = int(value)
        tfidf = read_tfidf(fh)
        svm = read_svm(fh)
    return SvmPipeline(token_cap=cap, tfidf=tfidf, svm=svm)


def save_head_model(m: HeadModel, path: Union[str, Path]) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="\n") as fh:
        write_head(m, fh)
    tmp.replace(path)


def load_head_model(path: Union[str, Path]) -> HeadModel:
    with Path(path).open(encoding="utf-8") as fh:
        return read_head(fh)


def sniff_model(path: Union[str, Path]) -> str:
    """Return 'svm' or 'head' from the file magic."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"model file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        magic = fh.readline().rstrip("\n")
    if magic == SVM_PIPELINE_MAGIC:
        return "svm"
    if magic == HEAD_MAGIC:
        return "head"
    raise DataError(f"{path}: unrecognized model file (magic {magic!r})")


def head_scores_for_reports(model: HeadModel, matrix: EmbeddingMatrix,
                            reports: Sequence[Report]) -> np.ndarray:
    X = matrix.subset([r.id for r in reports])
    return np.array([head_forward(model, row) for row in X]) if len(X) else np.zeros(0)
