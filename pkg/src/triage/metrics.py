"""ROC/AUROC, alert-rate operating points, confusion metrics, F1 variants,
Krippendorff's alpha, and pooled human-rater AUROC.

AUROC uses the tie-aware Mann-Whitney convention: the probability that a
random positive outranks a random negative, with ties counting one half.
An alert rate is the fraction of cases flagged high-severity; the flagged
count at rate a over N cases is floor(a*N + 0.5), which reproduces the
usual published operating points (23 of 115 at 20%, 58 of 115 at 50%).

Metrics with a zero denominator are reported as None ("undefined"), never
silently 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, TextIO, Union

import numpy as np

from .corpus import Severity
from .errors import DataError


@dataclass(frozen=True)
class RocCurve:
    points: list[tuple[float, float]]   # (fpr, tpr), (0,0) .. (1,1)
    auroc: float


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class OperatingPoint:
    alert_rate: float
    threshold: float
    counts: ConfusionCounts
    sensitivity: Optional[float]
    specificity: Optional[float]
    ppv: Optional[float]
    npv: Optional[float]


@dataclass(frozen=True)
class MetricReport:
    auroc: float
    operating_points: list[OperatingPoint]
    f1_binary: Optional[float]
    f1_micro: Optional[float]
    f1_macro: Optional[float]


class AlphaMetric(str, Enum):
    NOMINAL = "NOMINAL"
    ORDINAL = "ORDINAL"


@dataclass(frozen=True)
class RaterTable:
    """report_id -> (consensus binary label, individual rater scores)."""
    rows: dict[str, tuple[Severity, list[int]]]

    def __post_init__(self):
        for rid, (consensus, scores) in self.rows.items():
            if not scores:
                raise DataError(f"report {rid!r} has no rater scores")


def _check_scores_labels(scores: Sequence[float], labels: Sequence[Severity]) -> None:
    if len(scores) != len(labels):
        raise DataError(f"{len(scores)} scores vs {len(labels)} labels")
    kinds = set(labels)
    if kinds != {Severity.LOW, Severity.HIGH}:
        raise DataError("labels must contain both classes")


def auroc_rank(scores: Sequence[float], labels: Sequence[Severity]) -> float:
    """Tie-aware AUROC via midranks: (R_pos - n_pos(n_pos+1)/2) / (n_pos*n_neg)."""
    _check_scores_labels(scores, labels)
    s = np.asarray(scores, dtype=float)
    pos = np.array([lab == Severity.HIGH for lab in labels])
    order = np.argsort(s, kind="stable")
    ranks = np.empty(len(s))
    sorted_s = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0   # midrank, 1-based
        i = j + 1
    n_pos = int(pos.sum())
    n_neg = len(s) - n_pos
    r_pos = float(ranks[pos].sum())
    return (r_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_curve(scores: Sequence[float], labels: Sequence[Severity]) -> RocCurve:
    """ROC points from descending unique score thresholds, plus AUROC.

    The trapezoidal area under the returned points equals the rank-based
    AUROC (ties become diagonal segments).
    """
    auroc = auroc_rank(scores, labels)
    s = np.asarray(scores, dtype=float)
    pos = np.array([lab == Severity.HIGH for lab in labels])
    n_pos = int(pos.sum())
    n_neg = len(s) - n_pos
    order = np.argsort(-s, kind="stable")
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(s):
        j = i
        thr = s[order[i]]
        while j < len(s) and s[order[j]] == thr:
            if pos[order[j]]:
                tp += 1
            else:
                fp += 1
            j += 1
        points.append((fp / n_neg, tp / n_pos))
        i = j
    return RocCurve(points=points, auroc=auroc)


def trapezoid_area(points: Sequence[tuple[float, float]]) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def flag_count(n: int, alert_rate: float) -> int:
    return int(math.floor(alert_rate * n + 0.5))


def threshold_for_alert_rate(scores: Sequence[float], alert_rate: float,
                             ids: Optional[Sequence] = None,
                             ) -> tuple[float, set]:
    """Flag the top floor(alert_rate*N + 0.5) reports by score.

    Ties at the boundary break by ascending report id. The threshold is the
    k-th highest score (+inf when k = 0). ids default to 0..N-1.
    """
    if len(scores) == 0:
        raise DataError("empty score list")
    if not 0.0 <= alert_rate <= 1.0:
        raise DataError(f"alert_rate {alert_rate} outside [0, 1]")
    if ids is None:
        ids = list(range(len(scores)))
    if len(ids) != len(scores):
        raise DataError(f"{len(ids)} ids vs {len(scores)} scores")
    if len(set(ids)) != len(ids):
        raise DataError("report ids must be unique")
    k = flag_count(len(scores), alert_rate)
    if k == 0:
        return math.inf, set()
    ranked = sorted(zip(scores, ids), key=lambda t: (-t[0], t[1]))
    flagged = {rid for _, rid in ranked[:k]}
    return ranked[k - 1][0], flagged


def confusion_at_threshold(ids: Sequence, labels: Sequence[Severity],
                           flagged: set) -> ConfusionCounts:
    """Count tp/fp/fn/tn given the flagged id set."""
    if len(ids) != len(labels):
        raise DataError(f"{len(ids)} ids vs {len(labels)} labels")
    unknown = flagged - set(ids)
    if unknown:
        raise DataError(f"flagged ids not in corpus: {sorted(unknown)[:5]}")
    tp = fp = fn = tn = 0
    for rid, lab in zip(ids, labels):
        if rid in flagged:
            if lab == Severity.HIGH:
                tp += 1
            else:
                fp += 1
        else:
            if lab == Severity.HIGH:
                fn += 1
            else:
                tn += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def _ratio(num: int, denom: int) -> Optional[float]:
    return num / denom if denom > 0 else None


def confusion_metrics(c: ConfusionCounts,
                      ) -> tuple[Optional[float], Optional[float],
                                 Optional[float], Optional[float]]:
    """(sensitivity, specificity, ppv, npv); None where the denominator is 0."""
    return (_ratio(c.tp, c.tp + c.fn), _ratio(c.tn, c.tn + c.fp),
            _ratio(c.tp, c.tp + c.fp), _ratio(c.tn, c.tn + c.fn))


def f1_scores(c: ConfusionCounts,
              ) -> tuple[Optional[float], Optional[float], Optional[float]]:
    """(f1_binary, f1_micro, f1_macro).

    f1_binary is the positive-class F1 = 2tp/(2tp+fp+fn). Micro-averaged F1
    over both classes equals accuracy for single-label binary data. Macro
    is the mean of the per-class F1s, with an undefined class F1 dropping
    the macro to None.
    """
    f1_pos = _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)
    f1_neg = _ratio(2 * c.tn, 2 * c.tn + c.fn + c.fp)
    f1_micro = _ratio(c.tp + c.tn, c.total)
    f1_macro = (f1_pos + f1_neg) / 2.0 if f1_pos is not None and f1_neg is not None else None
    return f1_pos, f1_micro, f1_macro


def evaluate_scores(ids: Sequence, scores: Sequence[float],
                    labels: Sequence[Severity],
                    alert_rates: Sequence[float] = (0.20, 0.50)) -> MetricReport:
    """Full report: AUROC plus one operating point per requested alert rate.

    The F1 family is reported at the first alert rate's operating point.
    """
    _check_scores_labels(scores, labels)
    points = []
    first_counts: Optional[ConfusionCounts] = None
    for rate in alert_rates:
        thr, flagged = threshold_for_alert_rate(scores, rate, ids)
        counts = confusion_at_threshold(ids, labels, flagged)
        sn, sp, ppv, npv = confusion_metrics(counts)
        points.append(OperatingPoint(alert_rate=rate, threshold=thr, counts=counts,
                                     sensitivity=sn, specificity=sp, ppv=ppv, npv=npv))
        if first_counts is None:
            first_counts = counts
    if first_counts is None:
        thr, flagged = threshold_for_alert_rate(scores, 0.5, ids)
        first_counts = confusion_at_threshold(ids, labels, flagged)
    f1b, f1mi, f1ma = f1_scores(first_counts)
    return MetricReport(auroc=auroc_rank(scores, labels), operating_points=points,
                        f1_binary=f1b, f1_micro=f1mi, f1_macro=f1ma)


def krippendorff_alpha(table: RaterTable, metric: AlphaMetric) -> float:
    """Chance-corrected agreement from the coincidence matrix.

    alpha = 1 - D_observed / D_expected over all pairable rater values
    (reports with a single rating contribute nothing). The ordinal
    difference is the squared rank distance between the sorted distinct
    observed values; nominal is 0/1.
    """
    units = [scores for _, scores in table.rows.values() if len(scores) >= 2]
    n_pairable = sum(len(u) for u in units)
    if n_pairable < 2:
        raise DataError("no pairable rater values (every report has < 2 ratings)")
    values = sorted({v for u in units for v in u})
    rank = {v: i for i, v in enumerate(values)}
    V = len(values)
    if metric == AlphaMetric.NOMINAL:
        delta = np.ones((V, V)) - np.eye(V)
    else:
        r = np.arange(V, dtype=float)
        delta = (r[:, None] - r[None, :]) ** 2
    o = np.zeros((V, V))
    for u in units:
        m_u = len(u)
        for i, a in enumerate(u):
            for j, b in enumerate(u):
                if i != j:
                    o[rank[a], rank[b]] += 1.0 / (m_u - 1)
    n_v = o.sum(axis=1)
    n = float(n_v.sum())
    d_obs = float((o * delta).sum()) / n
    d_exp = float(n_v @ delta @ n_v) / (n * (n - 1))  # delta diagonal is 0
    if d_exp == 0.0:
        return 1.0
    return 1.0 - d_obs / d_exp


def pooled_rater_auroc(table: RaterTable) -> float:
    """Flatten every individual rater score into one (score, consensus)
    prediction and compute AUROC over the pooled list."""
    scores: list[float] = []
    labels: list[Severity] = []
    for consensus, rater_scores in table.rows.values():
        for s in rater_scores:
            scores.append(float(s))
            labels.append(consensus)
    if not scores:
        raise DataError("empty rater table")
    if len(set(labels)) < 2:
        raise DataError("rater table has a single consensus class")
    return auroc_rank(scores, labels)


# --- report serialization ----------------------------------------------------

def _fmt(x: Optional[float]) -> str:
    return "undefined" if x is None else f"{x:.17g}"


def write_metric_report(report: MetricReport, fh: TextIO) -> None:
    """Key/value header plus one table row per operating point."""
    fh.write("metricsv1\n")
    fh.write(f"auroc {report.auroc:.17g}\n")
    fh.write(f"f1_binary {_fmt(report.f1_binary)}\n")
    fh.write(f"f1_micro {_fmt(report.f1_micro)}\n")
    fh.write(f"f1_macro {_fmt(report.f1_macro)}\n")
    fh.write("operating_points alert_rate threshold tp fp fn tn "
             "sensitivity specificity ppv npv\n")
    for p in report.operating_points:
        c = p.counts
        fh.write(f"op {p.alert_rate:.17g} {p.threshold:.17g} "
                 f"{c.tp} {c.fp} {c.fn} {c.tn} "
                 f"{_fmt(p.sensitivity)} {_fmt(p.specificity)} "
                 f"{_fmt(p.ppv)} {_fmt(p.npv)}\n")


def write_roc_csv(curve: RocCurve, path: Union[str, Path]) -> None:
    """Two-column CSV of ROC points for external plotting."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fpr", "tpr"])
        for fpr, tpr in curve.points:
            writer.writerow([f"{fpr:.17g}", f"{tpr:.17g}"])
