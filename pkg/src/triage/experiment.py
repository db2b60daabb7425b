"""Desk-scale two-institution comparison on synthetic corpora.

Institution A stands in for a large source repository, institution B for a
smaller external one whose lexicon is partially shifted. Four arms are
compared by AUROC on both test sets, averaged over seeds:

  svm-source     TF-IDF + SVM trained on the source train split
  head-source    embedding head trained on the source only
  head-target    embedding head trained on the small target split only
  head-transfer  source-trained head continued on the target at a lower
                 learning rate

Embeddings come from the fallback random projection of TF-IDF fitted on
the source train split, shared across institutions like a frozen encoder.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import head as head_mod
from . import svm as svm_mod
from .corpus import (LabeledReport, Severity, SplitSpec, SyntheticSpec,
                     generate_synthetic_corpus, split_corpus)
from .embed import EmbeddingMatrix, project_fallback_embeddings
from .features import fit_tfidf, load_stop_words, transform_corpus
from .metrics import auroc_rank
from .textprep import load_acronym_dictionary, preprocess

ARMS = ("svm-source", "head-source", "head-target", "head-transfer")
TEST_SETS = ("source-test", "target-test")


@dataclass(frozen=True)
class ExperimentConfig:
    seeds: tuple[int, ...] = tuple(range(10))
    n_source: int = 800
    n_target: int = 200
    prevalence: float = 0.25
    vocab_shift: float = 0.5
    label_noise: float = 0.08
    length_median: int = 30
    min_df: int = 10
    embed_dim: int = 256
    svm_c: float = 1.0
    head_lr: float = 0.05
    transfer_lr: float = 0.005
    restarts: int = 3
    batch_size: int = 32
    max_epochs: int = 60
    patience: int = 10


@dataclass(frozen=True)
class ExperimentResult:
    # (arm, test_set, seed) -> auroc
    per_seed: dict[tuple[str, str, int], float]
    seeds: tuple[int, ...]

    def mean(self, arm: str, test_set: str) -> float:
        vals = [self.per_seed[(arm, test_set, s)] for s in self.seeds]
        return float(np.mean(vals))

    def std(self, arm: str, test_set: str) -> float:
        vals = [self.per_seed[(arm, test_set, s)] for s in self.seeds]
        return float(np.std(vals))

    def rows(self) -> list[tuple[str, str, float, float, int]]:
        return [(arm, ts, self.mean(arm, ts), self.std(arm, ts), len(self.seeds))
                for arm in ARMS for ts in TEST_SETS]


def _labeled_embeddings(matrix: EmbeddingMatrix, split: Sequence[LabeledReport],
                        ) -> list[tuple[np.ndarray, Severity]]:
    return [(matrix.rows[r.report.id], r.label.binary) for r in split]


def _auroc_of_head(model, matrix: EmbeddingMatrix,
                   split: Sequence[LabeledReport]) -> float:
    X = matrix.subset([r.report.id for r in split])
    scores = head_mod.head_scores(model, X)
    return auroc_rank(scores, [r.label.binary for r in split])


def run_seed(cfg: ExperimentConfig, seed: int) -> dict[tuple[str, str], float]:
    """One full paired comparison; every arm sees the same corpora."""
    source = generate_synthetic_corpus(
        SyntheticSpec(cfg.n_source, cfg.prevalence, 0.0, cfg.label_noise,
                      cfg.length_median, seed=seed), "A")
    target = generate_synthetic_corpus(
        SyntheticSpec(cfg.n_target, cfg.prevalence, cfg.vocab_shift,
                      cfg.label_noise, cfg.length_median, seed=seed), "B")
    s_train, s_val, s_test = split_corpus(
        source, SplitSpec(0.70, 0.15, 0.15, seed=seed, stratified=True))
    # target split sized so the train part stays small (transfer regime)
    t_train, t_val, t_test = split_corpus(
        target, SplitSpec(0.25, 0.25, 0.50, seed=seed, stratified=True))

    dictionary = load_acronym_dictionary()
    tokens = {r.report.id: preprocess(r.report, dictionary)
              for r in source + target}
    tfidf = fit_tfidf([tokens[r.report.id] for r in s_train],
                      min_df=cfg.min_df, stop_words=load_stop_words())

    aur: dict[tuple[str, str], float] = {}

    # SVM arm: linear kernel on the sparse TF-IDF features
    svm_cfg = svm_mod.SvmConfig(
        C=cfg.svm_c, kernel=svm_mod.KernelSpec(svm_mod.KernelKind.LINEAR),
        seed=seed)
    feats = {rid: fv for rid, fv in zip(
        tokens, transform_corpus(tfidf, list(tokens.values())))}
    svm_train = [(feats[r.report.id], r.label.binary) for r in s_train]
    svm_model = svm_mod.train_svm(svm_train, svm_cfg)
    for name, split in (("source-test", s_test), ("target-test", t_test)):
        scores = svm_mod.decision_scores(svm_model, [feats[r.report.id] for r in split])
        aur[("svm-source", name)] = auroc_rank(scores, [r.label.binary for r in split])

    # shared embedding space for every report of both institutions
    matrix = project_fallback_embeddings(
        tfidf, list(tokens.values()), dim=cfg.embed_dim, seed=seed)

    head_cfg = head_mod.TrainConfig(
        learning_rate=cfg.head_lr, batch_size=cfg.batch_size,
        max_epochs=cfg.max_epochs, patience=cfg.patience,
        restarts=cfg.restarts, seed=seed)
    source_head, _ = head_mod.train_head_restarts(
        _labeled_embeddings(matrix, s_train), _labeled_embeddings(matrix, s_val),
        head_cfg)
    target_head, _ = head_mod.train_head_restarts(
        _labeled_embeddings(matrix, t_train), _labeled_embeddings(matrix, t_val),
        head_cfg)
    transfer_cfg = replace(head_cfg, learning_rate=cfg.transfer_lr)
    transfer_head, _ = head_mod.train_head(
        _labeled_embeddings(matrix, t_train), _labeled_embeddings(matrix, t_val),
        transfer_cfg, init=source_head)

    for arm, model in (("head-source", source_head), ("head-target", target_head),
                       ("head-transfer", transfer_head)):
        aur[(arm, "source-test")] = _auroc_of_head(model, matrix, s_test)
        aur[(arm, "target-test")] = _auroc_of_head(model, matrix, t_test)
    return aur


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    per_seed: dict[tuple[str, str, int], float] = {}
    for seed in cfg.seeds:
        for (arm, ts), v in run_seed(cfg, seed).items():
            per_seed[(arm, ts, seed)] = v
    return ExperimentResult(per_seed=per_seed, seeds=tuple(cfg.seeds))


def format_table(result: ExperimentResult) -> str:
    """Human-readable mean AUROC per arm per test set."""
    lines = [f"{'model':<14} {'test set':<12} {'AUROC':>7} {'std':>7} {'seeds':>5}"]
    for arm, ts, mean, std, n in result.rows():
        lines.append(f"{arm:<14} {ts:<12} {mean:7.3f} {std:7.3f} {n:5d}")
    return "\n".join(lines)


def write_experiment_csv(result: ExperimentResult, fh) -> None:
    fh.write("model,test_set,auroc_mean,auroc_std,n_seeds\n")
    for arm, ts, mean, std, n in result.rows():
        fh.write(f"{arm},{ts},{mean:.17g},{std:.17g},{n}\n")
