"""Command-line interface.

Subcommands cover the full workflow: ingest -> split -> stats ->
preprocess/embed -> train (SVM, head, transfer) -> evaluate/triage, plus a
self-contained synthetic replay of the two-institution comparison.

Option precedence is flags > config file > TRIAGE_SEED (for seeds) >
built-in defaults. The config file is flat `key = value` text with `#`
comments; keys are option names with dashes or underscores.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric or
convergence error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import embed as embed_mod
from . import head as head_mod
from . import svm as svm_mod
from .corpus import (Format, LabeledReport, Report, Scale, SeverityLabel,
                     SplitSpec, corpus_stats, ingest_reports, load_corpus,
                     split_corpus, write_corpus)
from .errors import ConvergenceError, DataError, TriageError
from .experiment import (ExperimentConfig, format_table, run_experiment,
                         write_experiment_csv)
from .features import fit_tfidf, load_stop_words, transform_corpus, transform_tfidf
from .metrics import (MetricReport, evaluate_scores, roc_curve,
                      threshold_for_alert_rate, write_metric_report, write_roc_csv)
from .pipeline import (SvmPipeline, head_scores_for_reports, load_head_model,
                       load_svm_pipeline, save_head_model, save_svm_pipeline,
                       sniff_model)
from .plots import render_auroc_bars, render_roc_figure
from .textprep import (DEFAULT_TOKEN_CAP, export_text, load_acronym_dictionary,
                       preprocess)


class UsageError(TriageError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise UsageError(message)


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {s!r}")


def _parse_floats(s: str) -> list[float]:
    return [float(p) for p in s.replace(",", " ").split()]


def parse_config_file(path: str) -> dict[str, str]:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"config file not found: {path}")
    out: dict[str, str] = {}
    for lineno, raw in enumerate(p.read_text("utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, value = line.partition("=")
        else:
            key, _, value = line.partition(" ")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if not key or not value:
            raise UsageError(f"{path} line {lineno}: expected 'key = value'")
        out[key] = value
    return out


@dataclass(frozen=True)
class Opt:
    """One resolvable option: flag value > config value > env > default."""
    dest: str
    typ: Callable[[str], Any]
    default: Any = None
    required: bool = False


def resolve_options(args: argparse.Namespace, opts: Sequence[Opt]) -> dict[str, Any]:
    cfg = parse_config_file(args.config) if getattr(args, "config", None) else {}
    out: dict[str, Any] = {}
    for opt in opts:
        value = getattr(args, opt.dest, None)
        if value is None and opt.dest in cfg:
            value = opt.typ(cfg[opt.dest])
        if value is None and opt.dest.endswith("seed") and "TRIAGE_SEED" in os.environ:
            value = int(os.environ["TRIAGE_SEED"])
        if value is None:
            value = opt.default
        if value is None and opt.required:
            raise UsageError(f"missing required option --{opt.dest.replace('_', '-')}")
        out[opt.dest] = value
    return out


def _load_dictionary(path: Optional[str]):
    return load_acronym_dictionary(path)


def _labeled_only(path: str) -> list[LabeledReport]:
    labeled, _ = load_corpus(path)
    if not labeled:
        raise DataError(f"{path}: no labeled reports")
    return labeled


def _featurize(reports, dictionary, cap, tfidf):
    docs = [preprocess(r.report, dictionary, cap) for r in reports]
    return transform_corpus(tfidf, docs)


def _score_with_model(model_path: str, reports: list[Report],
                      embeddings_path: Optional[str], dictionary) -> np.ndarray:
    kind = sniff_model(model_path)
    if kind == "svm":
        pipe = load_svm_pipeline(model_path)
        return pipe.score_reports(reports, dictionary)
    if embeddings_path is None:
        raise UsageError("head models need --embeddings")
    matrix = embed_mod.read_embeddings(embeddings_path)
    model = load_head_model(model_path)
    return head_scores_for_reports(model, matrix, reports)


def _write_train_log(logs: list[head_mod.TrainLog], path: str) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("trainlogv1\n")
        for log in logs:
            fh.write(f"restart {log.restart_index} selected_epoch {log.selected_epoch} "
                     f"epochs {log.epochs_run()}\n")
            for e in range(log.epochs_run()):
                fh.write(f"epoch {e} train_loss {log.train_loss[e]:.17g} "
                         f"val_loss {log.val_loss[e]:.17g} "
                         f"val_f1 {log.val_f1[e]:.17g}\n")


# --- subcommands -------------------------------------------------------------

def cmd_ingest(args) -> int:
    v = resolve_options(args, [
        Opt("input", str, required=True),
        Opt("format", str, "jsonl"),
        Opt("scale", str, required=True),
        Opt("out", str, required=True),
        Opt("unlabeled_out", str),
    ])
    fmt = Format(v["format"].upper())
    scale = Scale(v["scale"].upper())
    labeled, unlabeled = ingest_reports(v["input"], fmt, scale)
    write_corpus(labeled, v["out"])
    if v["unlabeled_out"]:
        write_corpus(unlabeled, v["unlabeled_out"])
    print(f"ingested {len(labeled)} labeled, {len(unlabeled)} unlabeled")
    return 0


def cmd_split(args) -> int:
    v = resolve_options(args, [
        Opt("corpus", str, required=True),
        Opt("train", float, 0.70), Opt("val", float, 0.15), Opt("test", float, 0.15),
        Opt("seed", int, 0), Opt("stratified", _parse_bool, False),
        Opt("out_dir", str, "."),
    ])
    corpus = _labeled_only(v["corpus"])
    spec = SplitSpec(v["train"], v["val"], v["test"], seed=v["seed"],
                     stratified=v["stratified"])
    train, val, test = split_corpus(corpus, spec)
    out = Path(v["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", train), ("val", val), ("test", test)):
        write_corpus(part, out / f"{name}.jsonl")
    print(f"split {len(corpus)} -> train {len(train)}, val {len(val)}, test {len(test)}")
    return 0


def cmd_stats(args) -> int:
    v = resolve_options(args, [Opt("corpus", str, required=True)])
    stats = corpus_stats(_labeled_only(v["corpus"]))
    print(f"reports            {stats.n_reports}")
    print(f"words median +- std (population)  {stats.median_words:g} +- {stats.std_words:.1f}")
    print(f"high-severity      {100.0 * stats.high_severity_frac:.1f}%")
    return 0


def cmd_preprocess(args) -> int:
    v = resolve_options(args, [
        Opt("corpus", str, required=True),
        Opt("export_text", str, required=True),
        Opt("dictionary", str),
    ])
    labeled, unlabeled = load_corpus(v["corpus"])
    dictionary = _load_dictionary(v["dictionary"])
    reports = [r.report for r in labeled] + unlabeled
    with Path(v["export_text"]).open("w", encoding="utf-8", newline="\n") as fh:
        for r in reports:
            fh.write(f"{r.id}\t{export_text(r, dictionary)}\n")
    print(f"exported {len(reports)} preprocessed texts")
    return 0


def cmd_embed_fallback(args) -> int:
    v = resolve_options(args, [
        Opt("corpus", str, required=True),
        Opt("fit_corpus", str),
        Opt("out", str, required=True),
        Opt("dim", int, 256), Opt("seed", int, 0),
        Opt("min_df", int, 10), Opt("cap", int, DEFAULT_TOKEN_CAP),
        Opt("dictionary", str),
    ])
    dictionary = _load_dictionary(v["dictionary"])
    labeled, unlabeled = load_corpus(v["corpus"])
    reports = [r.report for r in labeled] + unlabeled
    fit_path = v["fit_corpus"] or v["corpus"]
    fit_reports = _labeled_only(fit_path)
    fit_docs = [preprocess(r.report, dictionary, v["cap"]) for r in fit_reports]
    tfidf = fit_tfidf(fit_docs, min_df=v["min_df"], stop_words=load_stop_words())
    docs = [preprocess(r, dictionary, v["cap"]) for r in reports]
    matrix = embed_mod.project_fallback_embeddings(tfidf, docs, dim=v["dim"],
                                                   seed=v["seed"])
    embed_mod.write_embeddings(matrix, v["out"])
    print(f"wrote {len(matrix)} embeddings of dim {matrix.dim} to {v['out']}")
    return 0


def cmd_train_svm(args) -> int:
    v = resolve_options(args, [
        Opt("train", str, required=True), Opt("val", str),
        Opt("out", str, required=True), Opt("log", str),
        Opt("kernel", str, "rbf"), Opt("gamma", float),
        Opt("C", float), Opt("c_grid", _parse_floats, list(svm_mod.DEFAULT_C_GRID)),
        Opt("min_df", int, 10), Opt("cap", int, DEFAULT_TOKEN_CAP),
        Opt("tol", float, 1e-3), Opt("max_passes", int, 10_000),
        Opt("seed", int, 0), Opt("dictionary", str),
    ])
    dictionary = _load_dictionary(v["dictionary"])
    kernel = svm_mod.KernelSpec(svm_mod.KernelKind(v["kernel"].lower()), v["gamma"])
    train = _labeled_only(v["train"])
    tfidf = fit_tfidf([preprocess(r.report, dictionary, v["cap"]) for r in train],
                      min_df=v["min_df"], stop_words=load_stop_words())
    feats = _featurize(train, dictionary, v["cap"], tfidf)
    pairs = [(fv, r.label.binary) for fv, r in zip(feats, train)]
    log_lines = []
    if v["C"] is None:
        if not v["val"]:
            raise UsageError("--val is required when tuning C (or pass --C)")
        val = _labeled_only(v["val"])
        val_pairs = [(fv, r.label.binary)
                     for fv, r in zip(_featurize(val, dictionary, v["cap"], tfidf), val)]
        best_c, table = svm_mod.tune_c(pairs, val_pairs, v["c_grid"], kernel,
                                       tol=v["tol"], max_passes=v["max_passes"],
                                       seed=v["seed"])
        for p in table:
            f1 = "failed" if p.f1 is None else f"{p.f1:.17g}"
            log_lines.append(f"C {p.C:.17g} f1 {f1}" + (f" # {p.error}" if p.error else ""))
        log_lines.append(f"selected_C {best_c:.17g}")
        print(f"tuned C = {best_c:g} over {len(table)} grid points")
    else:
        best_c = v["C"]
    cfg = svm_mod.SvmConfig(C=best_c, kernel=kernel, tol=v["tol"],
                            max_passes=v["max_passes"], seed=v["seed"])
    model = svm_mod.train_svm(pairs, cfg)
    save_svm_pipeline(SvmPipeline(v["cap"], tfidf, model), v["out"])
    if v["log"]:
        with Path(v["log"]).open("w", encoding="utf-8", newline="\n") as fh:
            fh.write("svmtunelogv1\n")
            for line in log_lines:
                fh.write(line + "\n")
    print(f"trained SVM ({len(model.support_vectors)} support vectors) -> {v['out']}")
    return 0


def _head_train_data(corpus_path: str, matrix) -> list[tuple[np.ndarray, Any]]:
    split = _labeled_only(corpus_path)
    X = matrix.subset([r.report.id for r in split])
    return [(X[i], split[i].label.binary) for i in range(len(split))]


def cmd_train_head(args) -> int:
    v = resolve_options(args, [
        Opt("train", str, required=True), Opt("val", str, required=True),
        Opt("embeddings", str, required=True),
        Opt("out", str, required=True), Opt("log", str),
        Opt("lr", float, head_mod.DEFAULT_SOURCE_LR),
        Opt("batch", int, 32), Opt("restarts", int, 5),
        Opt("epochs", int, 200), Opt("patience", int, 10),
        Opt("seed", int, 0),
    ])
    matrix = embed_mod.read_embeddings(v["embeddings"])
    train = _head_train_data(v["train"], matrix)
    val = _head_train_data(v["val"], matrix)
    cfg = head_mod.TrainConfig(learning_rate=v["lr"], batch_size=v["batch"],
                               max_epochs=v["epochs"], patience=v["patience"],
                               restarts=v["restarts"], seed=v["seed"])
    results = []
    for r in range(cfg.restarts):
        run_cfg = replace(cfg, seed=cfg.seed + r)
        results.append(head_mod.train_head(train, val, run_cfg, restart_index=r))
    best = head_mod.select_best_restart(results, val)
    best = head_mod.HeadModel(best.weights, best.bias,
                              provenance=f"head(train={Path(v['train']).name})",
                              seed=v["seed"])
    save_head_model(best, v["out"])
    if v["log"]:
        _write_train_log([log for _, log in results], v["log"])
    print(f"trained head over {cfg.restarts} restarts -> {v['out']}")
    return 0


def cmd_transfer(args) -> int:
    v = resolve_options(args, [
        Opt("source_train", str, required=True), Opt("source_val", str, required=True),
        Opt("target_train", str, required=True), Opt("target_val", str, required=True),
        Opt("embeddings", str, required=True),
        Opt("out", str, required=True), Opt("log", str),
        Opt("source_lr", float, head_mod.DEFAULT_SOURCE_LR),
        Opt("target_lr", float, head_mod.DEFAULT_TARGET_LR),
        Opt("batch", int, 32), Opt("restarts", int, 5),
        Opt("epochs", int, 200), Opt("patience", int, 10),
        Opt("seed", int, 0),
    ])
    matrix = embed_mod.read_embeddings(v["embeddings"])
    s_train = _head_train_data(v["source_train"], matrix)
    s_val = _head_train_data(v["source_val"], matrix)
    t_train = _head_train_data(v["target_train"], matrix)
    t_val = _head_train_data(v["target_val"], matrix)
    base_source = head_mod.TrainConfig(
        learning_rate=v["source_lr"], batch_size=v["batch"], max_epochs=v["epochs"],
        patience=v["patience"], restarts=1, seed=v["seed"])
    base_target = replace(base_source, learning_rate=v["target_lr"])
    results = []
    logs: list[head_mod.TrainLog] = []
    for r in range(v["restarts"]):
        cfg_s = replace(base_source, seed=v["seed"] + r)
        cfg_t = replace(base_target, seed=v["seed"] + r)
        model, stage_logs = head_mod.transfer_train(s_train, s_val, t_train, t_val,
                                                    cfg_s, cfg_t)
        results.append((model, replace(stage_logs[1], restart_index=r)))
        logs.extend(replace(sl, restart_index=r) for sl in stage_logs)
    best = head_mod.select_best_restart(results, t_val)
    best = head_mod.HeadModel(best.weights, best.bias, provenance="head(transfer)",
                              seed=v["seed"])
    save_head_model(best, v["out"])
    if v["log"]:
        _write_train_log(logs, v["log"])
    print(f"transfer-trained head over {v['restarts']} restarts -> {v['out']}")
    return 0


def cmd_evaluate(args) -> int:
    v = resolve_options(args, [
        Opt("model", str, required=True),
        Opt("test", str, required=True),
        Opt("report", str, required=True),
        Opt("embeddings", str), Opt("roc_csv", str),
        Opt("alert_rates", _parse_floats, [0.20, 0.50]),
        Opt("figure", _parse_bool, True),
        Opt("dictionary", str),
    ])
    test = _labeled_only(v["test"])
    dictionary = _load_dictionary(v["dictionary"])
    reports = [r.report for r in test]
    scores = _score_with_model(v["model"], reports, v["embeddings"], dictionary)
    ids = [r.id for r in reports]
    labels = [r.label.binary for r in test]
    metric_report = evaluate_scores(ids, scores, labels, v["alert_rates"])
    report_path = Path(v["report"])
    report_path.parent.mkdir(parents=True, exist_ok=True)
    with report_path.open("w", encoding="utf-8", newline="\n") as fh:
        write_metric_report(metric_report, fh)
    curve = roc_curve(scores, labels)
    if v["roc_csv"]:
        write_roc_csv(curve, v["roc_csv"])
    if v["figure"]:
        render_roc_figure({Path(v["model"]).stem: curve},
                          report_path.with_suffix(".png"))
    print(f"auroc {metric_report.auroc:.4f}")
    for p in metric_report.operating_points:
        sn = "undef" if p.sensitivity is None else f"{p.sensitivity:.2f}"
        sp = "undef" if p.specificity is None else f"{p.specificity:.2f}"
        print(f"alert_rate {p.alert_rate:g}: flagged {p.counts.tp + p.counts.fp}, "
              f"Sn {sn}, Sp {sp}")
    return 0


def cmd_triage(args) -> int:
    v = resolve_options(args, [
        Opt("model", str, required=True),
        Opt("reports", str, required=True),
        Opt("out", str, required=True),
        Opt("embeddings", str),
        Opt("alert_rate", float, 0.20),
        Opt("dictionary", str),
    ])
    labeled, unlabeled = load_corpus(v["reports"])
    reports = [r.report for r in labeled] + unlabeled
    dictionary = _load_dictionary(v["dictionary"])
    out = Path(v["out"])
    if not reports:
        out.write_text("id,score,flag\n", encoding="utf-8")
        print("no reports to triage")
        return 0
    scores = _score_with_model(v["model"], reports, v["embeddings"], dictionary)
    ids = [r.id for r in reports]
    _, flagged = threshold_for_alert_rate(scores, v["alert_rate"], ids)
    ranked = sorted(zip(ids, scores), key=lambda t: (-t[1], t[0]))
    with out.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("id,score,flag\n")
        for rid, score in ranked:
            fh.write(f"{rid},{score:.17g},{1 if rid in flagged else 0}\n")
    print(f"ranked {len(ranked)} reports, flagged {len(flagged)} "
          f"at alert rate {v['alert_rate']:g}")
    return 0


def cmd_repro_synthetic(args) -> int:
    v = resolve_options(args, [
        Opt("out_dir", str, "repro"),
        Opt("seeds", int, 10),
        Opt("n_source", int, 800), Opt("n_target", int, 200),
        Opt("prevalence", float, 0.25), Opt("vocab_shift", float, 0.5),
        Opt("label_noise", float, 0.08),
        Opt("embed_dim", int, 256),
        Opt("head_lr", float, 0.05), Opt("transfer_lr", float, 0.005),
        Opt("restarts", int, 3),
        Opt("figure", _parse_bool, True),
    ])
    cfg = ExperimentConfig(
        seeds=tuple(range(v["seeds"])), n_source=v["n_source"],
        n_target=v["n_target"], prevalence=v["prevalence"],
        vocab_shift=v["vocab_shift"], label_noise=v["label_noise"],
        embed_dim=v["embed_dim"], head_lr=v["head_lr"],
        transfer_lr=v["transfer_lr"], restarts=v["restarts"])
    result = run_experiment(cfg)
    out = Path(v["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    with (out / "comparison.csv").open("w", encoding="utf-8", newline="\n") as fh:
        write_experiment_csv(result, fh)
    if v["figure"]:
        render_auroc_bars([(arm, ts, mean) for arm, ts, mean, _, _ in result.rows()],
                          out / "comparison.png",
                          title="Synthetic two-institution comparison")
    print(format_table(result))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="triage", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, helptext):
        p = sub.add_parser(name, help=helptext)
        p.set_defaults(func=func)
        p.add_argument("--config", help="flat key=value config file")
        return p

    p = add("ingest", cmd_ingest, "read a JSONL/CSV report file into a corpus")
    p.add_argument("input", nargs="?")
    p.add_argument("--format", choices=["jsonl", "csv"])
    p.add_argument("--scale", choices=["inst", "safron"])
    p.add_argument("--out")
    p.add_argument("--unlabeled-out", dest="unlabeled_out")

    p = add("split", cmd_split, "partition a corpus into train/val/test files")
    p.add_argument("--corpus")
    p.add_argument("--train", type=float)
    p.add_argument("--val", type=float)
    p.add_argument("--test", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--stratified", action="store_const", const=True)
    p.add_argument("--out-dir", dest="out_dir")

    p = add("stats", cmd_stats, "corpus summary: size, word counts, prevalence")
    p.add_argument("--corpus")

    p = add("preprocess", cmd_preprocess,
            "export expanded+lowercased text as id<TAB>text for external encoders")
    p.add_argument("--corpus")
    p.add_argument("--export-text", dest="export_text", metavar="OUT_TSV")
    p.add_argument("--dict", dest="dictionary")

    p = add("embed-fallback", cmd_embed_fallback,
            "random-projection embeddings from TF-IDF (no external encoder)")
    p.add_argument("--corpus")
    p.add_argument("--fit-corpus", dest="fit_corpus")
    p.add_argument("--out")
    p.add_argument("--dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--min-df", dest="min_df", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--dict", dest="dictionary")

    p = add("train-svm", cmd_train_svm, "fit TF-IDF + SVM, tuning C on validation F1")
    p.add_argument("--train")
    p.add_argument("--val")
    p.add_argument("--out")
    p.add_argument("--log")
    p.add_argument("--kernel", choices=["rbf", "linear"])
    p.add_argument("--gamma", type=float)
    p.add_argument("--C", type=float)
    p.add_argument("--c-grid", dest="c_grid", type=_parse_floats)
    p.add_argument("--min-df", dest="min_df", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-passes", dest="max_passes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dict", dest="dictionary")

    p = add("train-head", cmd_train_head,
            "train the sigmoid head on an embedding file, best of N restarts")
    p.add_argument("--train")
    p.add_argument("--val")
    p.add_argument("--embeddings")
    p.add_argument("--out")
    p.add_argument("--log")
    p.add_argument("--lr", type=float)
    p.add_argument("--batch", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--seed", type=int)

    p = add("transfer", cmd_transfer,
            "two-stage transfer: source institution then target at lower lr")
    p.add_argument("--source-train", dest="source_train")
    p.add_argument("--source-val", dest="source_val")
    p.add_argument("--target-train", dest="target_train")
    p.add_argument("--target-val", dest="target_val")
    p.add_argument("--embeddings")
    p.add_argument("--out")
    p.add_argument("--log")
    p.add_argument("--source-lr", dest="source_lr", type=float)
    p.add_argument("--target-lr", dest="target_lr", type=float)
    p.add_argument("--batch", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--seed", type=int)

    p = add("evaluate", cmd_evaluate,
            "score a labeled test set; write metric report, ROC CSV, and figure")
    p.add_argument("--model")
    p.add_argument("--test")
    p.add_argument("--report")
    p.add_argument("--embeddings")
    p.add_argument("--roc-csv", dest="roc_csv")
    p.add_argument("--alert-rate", dest="alert_rates", type=float, action="append")
    p.add_argument("--no-figure", dest="figure", action="store_const", const=False)
    p.add_argument("--dict", dest="dictionary")

    p = add("triage", cmd_triage, "rank unlabeled reports by severity score")
    p.add_argument("--model")
    p.add_argument("--reports")
    p.add_argument("--out")
    p.add_argument("--embeddings")
    p.add_argument("--alert-rate", dest="alert_rate", type=float)
    p.add_argument("--dict", dest="dictionary")

    p = add("repro-synthetic", cmd_repro_synthetic,
            "self-contained synthetic two-institution transfer comparison")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--seeds", type=int)
    p.add_argument("--n-source", dest="n_source", type=int)
    p.add_argument("--n-target", dest="n_target", type=int)
    p.add_argument("--prevalence", type=float)
    p.add_argument("--vocab-shift", dest="vocab_shift", type=float)
    p.add_argument("--label-noise", dest="label_noise", type=float)
    p.add_argument("--embed-dim", dest="embed_dim", type=int)
    p.add_argument("--head-lr", dest="head_lr", type=float)
    p.add_argument("--transfer-lr", dest="transfer_lr", type=float)
    p.add_argument("--restarts", type=int)
    p.add_argument("--no-figure", dest="figure", action="store_const", const=False)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
