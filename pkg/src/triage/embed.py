"""Portable embedding-matrix interchange plus a deterministic fallback
embedder.

The `embedv1` text format is the contract between this package and any
external encoder that produces report embeddings:

    line 1:  embedv1 <dim> <n_rows>
    line k:  <report_id><TAB><v1> <v2> ... <vdim>

UTF-8, LF line endings, decimals with 17 significant digits so write/read
round-trips are exact. The fallback embedder projects TF-IDF vectors
through a seeded random sign matrix, so head training runs with no
external encoder at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import DataError
from .features import TfidfModel, transform_tfidf
from .textprep import TokenSequence

MAGIC = "embedv1"


@dataclass(frozen=True)
class EmbeddingMatrix:
    dim: int
    rows: dict[str, np.ndarray]     # report_id -> vector, insertion-ordered
    provenance: str = ""

    def __post_init__(self):
        for rid, vec in self.rows.items():
            if vec.shape != (self.dim,):
                raise DataError(
                    f"row {rid!r} has dimension {vec.shape}, expected ({self.dim},)")
            if not np.isfinite(vec).all():
                raise DataError(f"row {rid!r} contains non-finite values")

    def __len__(self) -> int:
        return len(self.rows)

    def subset(self, ids: Sequence[str]) -> np.ndarray:
        """Stack the given ids into an (n, dim) matrix, erroring on gaps."""
        missing = [i for i in ids if i not in self.rows]
        if missing:
            raise DataError(f"embeddings missing for report id(s) {missing[:5]}"
                            + ("..." if len(missing) > 5 else ""))
        return np.stack([self.rows[i] for i in ids]) if ids else np.zeros((0, self.dim))


def write_embeddings(m: EmbeddingMatrix, path: Union[str, Path]) -> None:
    """Write the matrix atomically (temp file, rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{MAGIC} {m.dim} {len(m.rows)}\n")
        for rid, vec in m.rows.items():
            cells = " ".join(f"{v:.17g}" for v in vec)
            fh.write(f"{rid}\t{cells}\n")
    tmp.replace(path)


def read_embeddings(path: Union[str, Path], provenance: str = "") -> EmbeddingMatrix:
    """Parse and validate an embedv1 file."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"embedding file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split(" ")
        if len(parts) != 3 or parts[0] != MAGIC:
            raise DataError(f"{path.name} line 1: bad magic, expected "
                            f"'{MAGIC} <dim> <n_rows>'")
        try:
            dim, n_rows = int(parts[1]), int(parts[2])
        except ValueError:
            raise DataError(f"{path.name} line 1: dim/n_rows must be integers")
        if dim < 1:
            raise DataError(f"{path.name} line 1: dim must be >= 1")
        rows: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if line == "":
                continue
            rid, tab, cells = line.partition("\t")
            if not tab:
                raise DataError(f"{path.name} line {lineno}: missing TAB after id")
            if rid in rows:
                raise DataError(f"{path.name} line {lineno}: duplicate report id {rid!r}")
            try:
                vec = np.array([float(c) for c in cells.split()], dtype=float)
            except ValueError:
                raise DataError(f"{path.name} line {lineno}: non-numeric value")
            if vec.shape != (dim,):
                raise DataError(f"{path.name} line {lineno}: {len(vec)} values, "
                                f"expected {dim}")
            if not np.isfinite(vec).all():
                raise DataError(f"{path.name} line {lineno}: non-finite value")
            rows[rid] = vec
    if len(rows) != n_rows:
        raise DataError(f"{path.name}: header says {n_rows} rows, found {len(rows)}")
    return EmbeddingMatrix(dim=dim, rows=rows, provenance=provenance or str(path))


def _projection(dim: int, n_features: int, seed: int) -> np.ndarray:
    """Seeded random sign matrix with entries +-1/sqrt(dim)."""
    rng = np.random.default_rng([seed, dim, n_features])
    signs = rng.integers(0, 2, size=(dim, n_features)) * 2 - 1
    return signs / np.sqrt(dim)


def project_fallback_embeddings(model: TfidfModel, docs: Sequence[TokenSequence],
                                dim: int = 256, seed: int = 0) -> EmbeddingMatrix:
    """Random projection of TF-IDF vectors into `dim` dimensions.

    A stand-in for a learned encoder: inner products are approximately
    preserved, so a linear head trained on these rows has signal to find.
    Deterministic for a fixed (seed, vocabulary).
    """
    if dim < 1:
        raise DataError(f"embedding dim must be >= 1, got {dim}")
    R = _projection(dim, model.dim, seed)
    rows: dict[str, np.ndarray] = {}
    for i, doc in enumerate(docs):
        rid = doc.source_id or str(i)
        if rid in rows:
            raise DataError(f"duplicate report id {rid!r} in fallback projection")
        fv = transform_tfidf(model, doc)
        vec = np.zeros(dim) if len(fv.indices) == 0 else R[:, fv.indices] @ fv.values
        rows[rid] = vec
    return EmbeddingMatrix(dim=dim, rows=rows, provenance=f"fallback(seed={seed})")
