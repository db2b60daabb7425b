import json

import numpy as np
import pytest

from triage.corpus import LabeledReport, Report, Severity, SeverityLabel, Source
from triage.features import FeatureVector


def dense_fv(values) -> FeatureVector:
    """Build a sparse FeatureVector from a dense list."""
    values = np.asarray(values, dtype=float)
    idx = np.flatnonzero(values)
    return FeatureVector(idx.astype(np.intp), values[idx], len(values))


def labeled(rid: str, text: str, raw, binary: Severity,
            source: Source = Source.OTHER) -> LabeledReport:
    return LabeledReport(Report(id=rid, text=text, source=source),
                         SeverityLabel(raw, binary))


def write_jsonl(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


@pytest.fixture
def tmp_jsonl(tmp_path):
    def make(rows, name="corpus.jsonl"):
        p = tmp_path / name
        write_jsonl(p, rows)
        return p
    return make
