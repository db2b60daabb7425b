"""Report data model, ingestion, severity binarization, splitting, and
synthetic two-institution corpora.

Two labeling scales are supported. The institutional scale is an integer
near-miss risk index from 0 to 4, where 3 and 4 are high-severity. The
SAFRON scale is six ordered categories, where "minor" is low-severity and
every other category is high-severity.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)

RawSeverity = Union[int, str]


class Source(str, Enum):
    INST = "INST"
    SAFRON = "SAFRON"
    SYNTHETIC = "SYNTHETIC"
    OTHER = "OTHER"


class Scale(str, Enum):
    INST = "INST"
    SAFRON = "SAFRON"


class Severity(str, Enum):
    LOW = "LOW"
    HIGH = "HIGH"


#: Ordered SAFRON categories, least to most severe. Only the first is
#: low-severity.
SAFRON_CATEGORIES = (
    "minor",
    "potential-serious",
    "serious",
    "potential-major",
    "major",
    "critical",
)


@dataclass(frozen=True)
class Report:
    id: str
    text: str
    source: Source = Source.OTHER


@dataclass(frozen=True)
class SeverityLabel:
    raw: RawSeverity
    binary: Severity


@dataclass(frozen=True)
class LabeledReport:
    report: Report
    label: SeverityLabel


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float
    val_frac: float
    test_frac: float
    seed: int = 0
    stratified: bool = False

    def validate(self) -> None:
        for name, f in (("train_frac", self.train_frac),
                        ("val_frac", self.val_frac),
                        ("test_frac", self.test_frac)):
            if not 0.0 <= f <= 1.0:
                raise DataError(f"{name}={f} outside [0, 1]")
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"split fractions sum to {total!r}, expected 1.0")


@dataclass(frozen=True)
class CorpusStats:
    n_reports: int
    median_words: float
    std_words: float  # population standard deviation
    high_severity_frac: float


@dataclass(frozen=True)
class SyntheticSpec:
    n_reports: int
    prevalence: float = 0.2
    vocab_shift: float = 0.0
    label_noise: float = 0.0
    length_median: int = 40
    seed: int = 0

    def validate(self) -> None:
        if self.n_reports < 1:
            raise DataError("n_reports must be >= 1")
        for name, f in (("prevalence", self.prevalence),
                        ("vocab_shift", self.vocab_shift),
                        ("label_noise", self.label_noise)):
            if not 0.0 <= f <= 1.0:
                raise DataError(f"{name}={f} outside [0, 1]")
        if self.length_median < 1:
            raise DataError("length_median must be >= 1")


def normalize_safron_category(raw: str) -> str:
    """Lowercase and collapse internal whitespace to hyphens, so
    "Potential Serious" and "potential-serious" read as the same category."""
    return "-".join(raw.strip().lower().split())


def binarize_severity(raw: RawSeverity, scale: Scale) -> Severity:
    """Map a raw severity value to the binary LOW/HIGH class.

    Institutional scale: 0-2 are LOW, 3-4 are HIGH. SAFRON scale: "minor"
    is LOW, the other five categories are HIGH.
    """
    if scale == Scale.INST:
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise DataError(f"institutional severity must be an integer, got {raw!r}")
        if not 0 <= raw <= 4:
            raise DataError(f"institutional severity {raw} outside 0..4")
        return Severity.HIGH if raw >= 3 else Severity.LOW
    category = normalize_safron_category(str(raw))
    if category not in SAFRON_CATEGORIES:
        raise DataError(f"unknown SAFRON severity category {raw!r}")
    return Severity.LOW if category == "minor" else Severity.HIGH


def _parse_raw_severity(value, scale: Scale, where: str) -> RawSeverity:
    """Validate a raw severity field from an input record."""
    if scale == Scale.INST:
        if isinstance(value, bool):
            raise DataError(f"{where}: severity must be an integer 0..4, got {value!r}")
        if isinstance(value, int):
            raw: RawSeverity = value
        elif isinstance(value, float) and value.is_integer():
            raw = int(value)
        elif isinstance(value, str):
            try:
                raw = int(value.strip())
            except ValueError:
                raise DataError(f"{where}: severity must be an integer 0..4, got {value!r}")
        else:
            raise DataError(f"{where}: severity must be an integer 0..4, got {value!r}")
    else:
        raw = normalize_safron_category(str(value))
    binarize_severity(raw, scale)  # raises DataError on out-of-range values
    return raw


def _is_missing(value) -> bool:
    return value is None or (isinstance(value, str) and value.strip() == "")


def _make_record(rec: dict, scale: Scale, where: str,
                 labeled: list[LabeledReport], unlabeled: list[Report],
                 seen_ids: set[str]) -> None:
    if "id" not in rec or _is_missing(rec.get("id")):
        raise DataError(f"{where}: missing report id")
    rid = str(rec["id"])
    if rid in seen_ids:
        raise DataError(f"{where}: duplicate report id {rid!r}")
    seen_ids.add(rid)
    text = rec.get("text")
    if text is None:
        text = ""
    text = str(text)
    if text.strip() == "":
        log.warning("report %s has empty text", rid)
    source = Source(str(rec["source"])) if not _is_missing(rec.get("source")) else Source.OTHER
    report = Report(id=rid, text=text, source=source)
    severity = rec.get("severity")
    if _is_missing(severity):
        unlabeled.append(report)
        return
    raw = _parse_raw_severity(severity, scale, where)
    labeled.append(LabeledReport(report, SeverityLabel(raw, binarize_severity(raw, scale))))


class Format(str, Enum):
    JSONL = "JSONL"
    CSV = "CSV"


def ingest_reports(path: Union[str, Path], format: Format, scale: Scale,
                   ) -> tuple[list[LabeledReport], list[Report]]:
    """Read reports from a JSONL or CSV file.

    Returns (labeled, unlabeled): records carrying a severity value become
    LabeledReports, records with a missing severity field are returned
    separately as bare Reports. Malformed records and unknown severity
    values raise DataError naming the offending line.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    labeled: list[LabeledReport] = []
    unlabeled: list[Report] = []
    seen: set[str] = set()
    if format == Format.JSONL:
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if line.strip() == "":
                    continue
                where = f"{path.name} line {lineno}"
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{where}: invalid JSON ({exc.msg})") from exc
                if not isinstance(rec, dict):
                    raise DataError(f"{where}: expected a JSON object")
                _make_record(rec, scale, where, labeled, unlabeled, seen)
    else:
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return [], []
            required = {"id", "text", "severity"}
            missing = required - set(reader.fieldnames)
            if missing:
                raise DataError(
                    f"{path.name}: CSV header missing column(s) {sorted(missing)}")
            for rec in reader:
                where = f"{path.name} line {reader.line_num}"
                if None in rec.values() or rec.get(None) is not None:
                    raise DataError(f"{where}: wrong number of CSV fields")
                _make_record(rec, scale, where, labeled, unlabeled, seen)
    return labeled, unlabeled


def write_corpus(reports: Iterable[Union[LabeledReport, Report]],
                 path: Union[str, Path]) -> int:
    """Persist a corpus as JSONL (the same schema ingest_reports accepts)."""
    n = 0
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        for item in reports:
            if isinstance(item, LabeledReport):
                rec = {"id": item.report.id, "text": item.report.text,
                       "severity": item.label.raw, "source": item.report.source.value}
            else:
                rec = {"id": item.id, "text": item.text,
                       "severity": None, "source": item.source.value}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            n += 1
    tmp.replace(path)
    return n


def corpus_scale(corpus: Sequence[LabeledReport]) -> Scale:
    """Infer the labeling scale from raw label types (int = INST scale)."""
    if not corpus:
        raise DataError("cannot infer scale of an empty corpus")
    return Scale.INST if isinstance(corpus[0].label.raw, int) else Scale.SAFRON


def load_corpus(path: Union[str, Path], scale: Optional[Scale] = None,
                ) -> tuple[list[LabeledReport], list[Report]]:
    """Read back a JSONL corpus written by write_corpus.

    When scale is not given it is inferred from the first labeled record
    (integer severity = institutional scale, string = SAFRON).
    """
    path = Path(path)
    if scale is None:
        scale = Scale.SAFRON
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                if line.strip() == "":
                    continue
                rec = json.loads(line)
                sev = rec.get("severity")
                if not _is_missing(sev):
                    scale = Scale.INST if isinstance(sev, (int, float)) else Scale.SAFRON
                    break
    return ingest_reports(path, Format.JSONL, scale)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _partition_sizes(n: int, spec: SplitSpec) -> tuple[int, int, int]:
    n_val = _round_half_up(spec.val_frac * n)
    n_test = _round_half_up(spec.test_frac * n)
    n_train = n - n_val - n_test
    if n_train < 0:  # rounding pushed val+test past n
        n_test += n_train
        n_train = 0
    return n_train, n_val, n_test


def split_corpus(corpus: Sequence[LabeledReport], spec: SplitSpec,
                 ) -> tuple[list[LabeledReport], list[LabeledReport], list[LabeledReport]]:
    """Randomly partition a corpus into train/val/test.

    Part sizes are round(frac * N) for val and test, with the rounding
    remainder assigned to train. The same (corpus, spec) always yields the
    identical partition. Stratified mode keeps the HIGH prevalence of each
    part within 1/part-size of the overall prevalence by allocating the
    HIGH class proportionally and absorbing rounding in the LOW class.
    """
    spec.validate()
    if not corpus:
        raise DataError("cannot split an empty corpus")
    n = len(corpus)
    rng = np.random.default_rng(spec.seed)

    if not spec.stratified:
        n_train, n_val, n_test = _partition_sizes(n, spec)
        order = rng.permutation(n)
        train_idx = order[:n_train]
        val_idx = order[n_train:n_train + n_val]
        test_idx = order[n_train + n_val:]
    else:
        high = [i for i, r in enumerate(corpus) if r.label.binary == Severity.HIGH]
        low = [i for i, r in enumerate(corpus) if r.label.binary == Severity.LOW]
        if not high:
            raise DataError("stratified split requires at least one HIGH example")
        n_train, n_val, n_test = _partition_sizes(n, spec)
        nh = len(high)
        h_val = min(_round_half_up(spec.val_frac * nh), n_val, nh)
        h_test = min(_round_half_up(spec.test_frac * nh), n_test, nh - h_val)
        h_train = nh - h_val - h_test
        l_val = n_val - h_val
        l_test = n_test - h_test
        if h_train > n_train or l_val < 0 or l_test < 0 or l_val + l_test > len(low):
            raise DataError("corpus too small for a stratified split with these fractions")
        high_order = [high[i] for i in rng.permutation(nh)]
        low_order = [low[i] for i in rng.permutation(len(low))]
        val_idx = high_order[:h_val] + low_order[:l_val]
        test_idx = high_order[h_val:h_val + h_test] + low_order[l_val:l_val + l_test]
        train_idx = high_order[h_val + h_test:] + low_order[l_val + l_test:]

    def take(idx):
        return [corpus[i] for i in sorted(idx)]

    return take(train_idx), take(val_idx), take(test_idx)


def corpus_stats(corpus: Sequence[LabeledReport]) -> CorpusStats:
    """Word-count median/std (population) and the HIGH-label fraction.

    Word counts are whitespace-delimited. The median/std pairing mirrors
    the usual corpus summary table for this kind of dataset.
    """
    if not corpus:
        raise DataError("cannot compute stats of an empty corpus")
    counts = np.array([len(r.report.text.split()) for r in corpus], dtype=float)
    n_high = sum(1 for r in corpus if r.label.binary == Severity.HIGH)
    return CorpusStats(
        n_reports=len(corpus),
        median_words=float(np.median(counts)),
        std_words=float(counts.std()),  # ddof=0: population std
        high_severity_frac=n_high / len(corpus),
    )


# Fixture lexicons for the synthetic generator. These are stand-ins that make
# desk-scale experiments runnable; they are not claims about any real corpus.
_HAZARD_A = (
    "overdose wrong mismatch collision incorrect missed untreated overdue "
    "misaligned unverified unapproved escalation deviation contamination "
    "failure emergency critical breach interlock fault oversight unplanned "
    "severe recall mislabeled erroneous conflict hazard lapse misidentified "
    "unflagged undetected omission excess radiation burn"
).split()
_HAZARD_B = (
    "overexposure faulty discrepancy crash inaccurate skipped unmanaged delayed "
    "displaced unchecked unauthorized aggravation drift pollution breakdown "
    "urgency grave rupture lockout defect blindspot unscheduled serious retraction "
    "mistagged flawed clash danger slip misread unmarked unseen gap surplus "
    "exposure scald"
).split()
_ROUTINE_A = (
    "schedule review meeting note chart plan scan image dose setup table couch "
    "machine console therapist physicist nurse clinic morning afternoon record "
    "form signature approval checklist calendar room hallway printer badge phone "
    "pager email update reminder followup routine standard weekly daily monthly "
    "session appointment document folder billing order supply inventory training "
    "log calibration maintenance vendor software screen keyboard network archive "
    "census rounding huddle whiteboard transport gown mask thermometer wheelchair "
    "elevator parking cafeteria reception waiting survey audit minutes agenda"
).split()
_ROUTINE_B = (
    "timetable inspection conference memo dossier blueprint sweep picture amount "
    "arrangement bench bed device terminal clinician scientist caretaker ward dawn "
    "dusk entry sheet autograph consent roster planner suite corridor copier badgecard "
    "handset beeper letter refresh notice checkin customary normal fortnightly nightly "
    "quarterly sitting booking paper binder invoicing request stock storeroom coaching "
    "journal tuning upkeep supplier firmware display keypad intranet repository "
    "headcount walkthrough standup corkboard shuttle robe visor gauge stretcher "
    "lift garage canteen lobby lounge poll check transcript brief"
).split()


def _institution_lexicons(spec: SyntheticSpec, institution: str,
                          ) -> tuple[list[str], list[str]]:
    """Institution A uses the shared lexicons; institution B swaps a
    vocab_shift fraction of each lexicon for its parallel synonyms. The
    replaced indices depend only on the spec seed, so A and B corpora from
    the same spec stay comparable."""
    hazard = list(_HAZARD_A)
    routine = list(_ROUTINE_A)
    if institution == "B" and spec.vocab_shift > 0:
        rng = np.random.default_rng([spec.seed, 0xB])
        k_h = _round_half_up(spec.vocab_shift * len(hazard))
        k_r = _round_half_up(spec.vocab_shift * len(routine))
        for i in rng.choice(len(hazard), size=k_h, replace=False):
            hazard[i] = _HAZARD_B[i]
        for i in rng.choice(len(routine), size=k_r, replace=False):
            routine[i] = _ROUTINE_B[i]
    return hazard, routine


def generate_synthetic_corpus(spec: SyntheticSpec, institution: str = "A",
                              ) -> list[LabeledReport]:
    """Generate a deterministic synthetic labeled corpus for one institution.

    HIGH reports draw a larger share of their words from the hazard lexicon
    than LOW reports do, so severity is learnable from text. Word counts
    follow a log-normal with the requested median. label_noise flips the
    observed binary label after the text is generated, and the raw 0-4
    severity is then drawn consistent with the observed label.
    """
    spec.validate()
    if institution not in ("A", "B"):
        raise DataError(f"institution must be 'A' or 'B', got {institution!r}")
    if spec.prevalence in (0.0, 1.0):
        log.warning("prevalence %s yields a single-class corpus; stratified "
                    "splitting and supervised training will fail on it", spec.prevalence)
    hazard, routine = _institution_lexicons(spec, institution)
    rng = np.random.default_rng([spec.seed, 0xA if institution == "A" else 0xB, 1])
    mu = math.log(spec.length_median)
    sigma = 0.6  # fixture shape: std comparable to the median
    # moderate contrast keeps the task learnable from hundreds of reports
    # but genuinely hard from dozens, which is the transfer regime
    hazard_share = {Severity.HIGH: 0.22, Severity.LOW: 0.08}
    out: list[LabeledReport] = []
    for i in range(spec.n_reports):
        true_label = Severity.HIGH if rng.random() < spec.prevalence else Severity.LOW
        n_words = max(3, int(round(rng.lognormal(mu, sigma))))
        share = hazard_share[true_label]
        words = []
        for _ in range(n_words):
            pool = hazard if rng.random() < share else routine
            words.append(pool[rng.integers(len(pool))])
        observed = true_label
        if spec.label_noise > 0 and rng.random() < spec.label_noise:
            observed = Severity.LOW if observed == Severity.HIGH else Severity.HIGH
        raw = int(rng.integers(3, 5)) if observed == Severity.HIGH else int(rng.integers(0, 3))
        report = Report(id=f"{institution}-{i:05d}", text=" ".join(words),
                        source=Source.SYNTHETIC)
        out.append(LabeledReport(report, SeverityLabel(raw, observed)))
    return out
