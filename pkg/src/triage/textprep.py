"""Deterministic text preprocessing: abbreviation expansion, lowercasing,
tokenization, and truncation.

The pipeline order is expand -> lowercase -> tokenize -> truncate. Because
abbreviation matching is case-insensitive, swapping the first two steps is
observably equivalent; the composition is exposed as preprocess().
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

from .corpus import Report
from .errors import DataError

log = logging.getLogger(__name__)

# Maximal runs of >=2 word characters; single-character runs and punctuation
# are dropped. Runs are \w+ so the greedy match always takes the whole run.
_TOKEN_RE = re.compile(r"\w{2,}")
# Word runs and the separators between them, for expansion scanning.
_SEGMENT_RE = re.compile(r"\w+|\W+")

DEFAULT_TOKEN_CAP = 150


@dataclass(frozen=True)
class AcronymDictionary:
    """Ordered abbreviation -> expansion map.

    Keys are lowercase tokens; a key may be a space-separated token bigram
    ("h p"), matched before any single-token key at the same position.
    """
    entries: dict[str, str]
    bigrams: dict[tuple[str, str], str] = field(init=False)

    def __post_init__(self):
        bigrams = {}
        for key, expansion in self.entries.items():
            if key != key.lower() or expansion != expansion.lower():
                raise DataError(f"dictionary entry {key!r} must be lowercase")
            if not expansion.strip():
                raise DataError(f"dictionary key {key!r} has an empty expansion")
            parts = key.split(" ")
            if len(parts) == 2:
                bigrams[(parts[0], parts[1])] = expansion
            elif len(parts) != 1:
                raise DataError(f"dictionary key {key!r} has more than two tokens")
        object.__setattr__(self, "bigrams", bigrams)

    @property
    def single(self) -> dict[str, str]:
        return {k: v for k, v in self.entries.items() if " " not in k}

    def reexpandable_entries(self) -> list[tuple[str, str]]:
        """Entries whose expansion itself contains a dictionary key.

        When this list is empty, expand_acronyms is idempotent.
        """
        out = []
        for key, expansion in self.entries.items():
            tokens = expansion.split()
            hits = any(t in self.single for t in tokens)
            hits = hits or any((a, b) in self.bigrams for a, b in zip(tokens, tokens[1:]))
            if hits:
                out.append((key, expansion))
        return out


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.tokens)


def load_acronym_dictionary(path: Union[str, Path, None] = None) -> AcronymDictionary:
    """Load a two-column TSV abbreviation glossary.

    Lines are `abbreviation<TAB>expansion`, lowercase; `#` starts a comment.
    With no path the packaged default glossary is used. Warns when any
    expansion contains a dictionary key, since expansion is then not
    idempotent.
    """
    if path is None:
        text = resources.files("triage.data").joinpath("acronyms.tsv").read_text("utf-8")
        name = "<default>"
    else:
        path = Path(path)
        if not path.exists():
            raise DataError(f"acronym dictionary not found: {path}")
        text = path.read_text("utf-8")
        name = path.name
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{name} line {lineno}: expected abbreviation<TAB>expansion")
        key, expansion = parts[0].strip(), parts[1].strip()
        if key in entries:
            raise DataError(f"{name} line {lineno}: duplicate key {key!r}")
        entries[key] = expansion
    d = AcronymDictionary(entries)
    bad = d.reexpandable_entries()
    if bad:
        log.warning("acronym dictionary %s is not idempotent: expansions of %s "
                    "contain dictionary keys", name, [k for k, _ in bad])
    return d


def _expand_with_count(text: str, dictionary: AcronymDictionary) -> tuple[str, int]:
    """Single left-to-right pass replacing whole-token key occurrences.

    Matching is case-insensitive; keys must be delimited by non-word
    characters or string boundaries (guaranteed by scanning word runs).
    Bigram keys take precedence over single-token keys and require the two
    tokens to be separated by whitespace only. Inserted expansions are never
    rescanned.
    """
    segments = _SEGMENT_RE.findall(text)
    out: list[str] = []
    count = 0
    i = 0
    while i < len(segments):
        seg = segments[i]
        if not seg or not seg[0].isalnum() and seg[0] != "_":
            out.append(seg)
            i += 1
            continue
        low = seg.lower()
        # bigram: word, whitespace separator, word
        if (i + 2 < len(segments) and segments[i + 1].isspace()
                and (low, segments[i + 2].lower()) in dictionary.bigrams):
            out.append(dictionary.bigrams[(low, segments[i + 2].lower())])
            count += 1
            i += 3
            continue
        single = dictionary.single.get(low)
        if single is not None:
            out.append(single)
            count += 1
        else:
            out.append(seg)
        i += 1
    return "".join(out), count


def expand_acronyms(text: str, dictionary: AcronymDictionary) -> str:
    """Replace each whole-token occurrence of a dictionary key by its
    expansion (case-insensitive, one pass, no re-expansion)."""
    return _expand_with_count(text, dictionary)[0]


def count_expansions(text: str, dictionary: AcronymDictionary) -> int:
    """Number of expansions expand_acronyms would perform on this text."""
    return _expand_with_count(text, dictionary)[1]


def normalize(text: str) -> str:
    """Unicode-aware lowercasing; nothing else is touched."""
    return text.lower()


def tokenize(text: str, source_id: str = "") -> TokenSequence:
    """Split text into maximal runs of >=2 word characters."""
    return TokenSequence(tuple(_TOKEN_RE.findall(text)), source_id)


def truncate_tokens(seq: TokenSequence, cap: int = DEFAULT_TOKEN_CAP) -> TokenSequence:
    """Keep the first cap tokens."""
    if cap < 1:
        raise DataError(f"token cap must be >= 1, got {cap}")
    if len(seq.tokens) <= cap:
        return seq
    return TokenSequence(seq.tokens[:cap], seq.source_id)


def preprocess(report: Report, dictionary: AcronymDictionary,
               cap: int = DEFAULT_TOKEN_CAP) -> TokenSequence:
    """expand -> lowercase -> tokenize -> truncate, tagged with the report id."""
    expanded = expand_acronyms(report.text, dictionary)
    return truncate_tokens(tokenize(normalize(expanded), report.id), cap)


def export_text(report: Report, dictionary: AcronymDictionary) -> str:
    """Expanded, lowercased text for external encoders.

    Internal tabs and newlines are collapsed to single spaces so the result
    is safe to carry in one TSV field.
    """
    expanded = normalize(expand_acronyms(report.text, dictionary))
    return " ".join(expanded.split())
