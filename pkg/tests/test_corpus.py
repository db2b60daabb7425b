import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triage.corpus import (Format, Scale, Severity, SplitSpec, SyntheticSpec,
                           binarize_severity, corpus_stats,
                           generate_synthetic_corpus, ingest_reports,
                           load_corpus, normalize_safron_category, split_corpus,
                           write_corpus)
from triage.errors import DataError

from conftest import labeled, write_jsonl


class TestBinarize:
    def test_inst_high_cutoff(self):
        assert binarize_severity(3, Scale.INST) == Severity.HIGH
        assert binarize_severity(4, Scale.INST) == Severity.HIGH

    def test_inst_low(self):
        assert binarize_severity(0, Scale.INST) == Severity.LOW
        assert binarize_severity(1, Scale.INST) == Severity.LOW
        assert binarize_severity(2, Scale.INST) == Severity.LOW

    def test_safron_minor_is_low_everything_else_high(self):
        assert binarize_severity("minor", Scale.SAFRON) == Severity.LOW
        for cat in ("potential-serious", "serious", "potential-major",
                    "major", "critical"):
            assert binarize_severity(cat, Scale.SAFRON) == Severity.HIGH

    def test_safron_case_and_space_insensitive(self):
        assert binarize_severity("Potential Serious", Scale.SAFRON) == Severity.HIGH
        assert binarize_severity("MINOR", Scale.SAFRON) == Severity.LOW

    def test_out_of_range(self):
        with pytest.raises(DataError):
            binarize_severity(5, Scale.INST)
        with pytest.raises(DataError):
            binarize_severity(-1, Scale.INST)
        with pytest.raises(DataError):
            binarize_severity("catastrophic", Scale.SAFRON)
        with pytest.raises(DataError):
            binarize_severity("3", Scale.INST)

    @given(st.integers(0, 4))
    def test_total_on_inst_range(self, raw):
        assert binarize_severity(raw, Scale.INST) in (Severity.LOW, Severity.HIGH)

    def test_normalize_category(self):
        assert normalize_safron_category("  Potential   Major ") == "potential-major"


class TestIngest:
    def test_jsonl_inst(self, tmp_jsonl):
        p = tmp_jsonl([{"id": "r1", "text": "pt sim error", "severity": 3}])
        labeled_rs, unlabeled = ingest_reports(p, Format.JSONL, Scale.INST)
        assert len(labeled_rs) == 1 and not unlabeled
        rec = labeled_rs[0]
        assert rec.label.raw == 3
        assert rec.label.binary == Severity.HIGH

    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.jsonl"
        p.write_text("")
        labeled_rs, unlabeled = ingest_reports(p, Format.JSONL, Scale.INST)
        assert labeled_rs == [] and unlabeled == []

    def test_partially_labeled_counts(self, tmp_jsonl):
        # 1,684 rows of which 571 carry a label
        rows = []
        for i in range(1684):
            sev = "serious" if i < 571 else None
            rows.append({"id": f"s{i}", "text": "x y", "severity": sev})
        p = tmp_jsonl(rows)
        labeled_rs, unlabeled = ingest_reports(p, Format.JSONL, Scale.SAFRON)
        assert len(labeled_rs) == 571
        assert len(unlabeled) == 1113

    def test_malformed_line_names_line_number(self, tmp_path):
        p = tmp_path / "bad.jsonl"
        p.write_text('{"id": "a", "text": "t", "severity": 1}\n{nope\n')
        with pytest.raises(DataError, match="line 2"):
            ingest_reports(p, Format.JSONL, Scale.INST)

    def test_unknown_label_names_value(self, tmp_jsonl):
        p = tmp_jsonl([{"id": "a", "text": "t", "severity": "weird"}])
        with pytest.raises(DataError, match="weird"):
            ingest_reports(p, Format.JSONL, Scale.SAFRON)

    def test_duplicate_id_rejected(self, tmp_jsonl):
        p = tmp_jsonl([{"id": "a", "text": "t", "severity": 1},
                       {"id": "a", "text": "u", "severity": 2}])
        with pytest.raises(DataError, match="duplicate"):
            ingest_reports(p, Format.JSONL, Scale.INST)

    def test_csv_round(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text('id,text,severity\nr1,"quoted, text",minor\nr2,plain,critical\n')
        labeled_rs, _ = ingest_reports(p, Format.CSV, Scale.SAFRON)
        assert [r.label.binary for r in labeled_rs] == [Severity.LOW, Severity.HIGH]
        assert labeled_rs[0].report.text == "quoted, text"

    def test_csv_missing_column(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("id,text\nr1,hello\n")
        with pytest.raises(DataError, match="severity"):
            ingest_reports(p, Format.CSV, Scale.INST)

    def test_corpus_round_trip(self, tmp_path):
        rows = [labeled("a", "one two", 3, Severity.HIGH),
                labeled("b", "three", 0, Severity.LOW)]
        p = tmp_path / "c.jsonl"
        write_corpus(rows, p)
        back, unlabeled = load_corpus(p)
        assert not unlabeled
        assert [(r.report.id, r.report.text, r.label.raw, r.label.binary)
                for r in back] == [("a", "one two", 3, Severity.HIGH),
                                   ("b", "three", 0, Severity.LOW)]


class TestSplit:
    def _corpus(self, n, n_high=None):
        n_high = n // 3 if n_high is None else n_high
        return [labeled(f"r{i}", f"text {i}",
                        3 if i < n_high else 0,
                        Severity.HIGH if i < n_high else Severity.LOW)
                for i in range(n)]

    def test_sizes_100(self):
        train, val, test = split_corpus(self._corpus(100),
                                        SplitSpec(0.70, 0.15, 0.15, seed=7))
        assert (len(train), len(val), len(test)) == (70, 15, 15)

    def test_sizes_571_remainder_to_train(self):
        # round(0.6*571) would be 343 only via the remainder rule:
        # val = round(.2*571) = 114, test = 114, train = 571-228 = 343
        train, val, test = split_corpus(self._corpus(571),
                                        SplitSpec(0.60, 0.20, 0.20, seed=1))
        assert (len(train), len(val), len(test)) == (343, 114, 114)

    def test_partition(self):
        corpus = self._corpus(100)
        train, val, test = split_corpus(corpus, SplitSpec(0.70, 0.15, 0.15, seed=7))
        ids = [r.report.id for part in (train, val, test) for r in part]
        assert sorted(ids) == sorted(r.report.id for r in corpus)
        assert len(set(ids)) == len(ids)

    def test_deterministic(self):
        corpus = self._corpus(57)
        a = split_corpus(corpus, SplitSpec(0.70, 0.15, 0.15, seed=9))
        b = split_corpus(corpus, SplitSpec(0.70, 0.15, 0.15, seed=9))
        assert a == b

    def test_seed_changes_split(self):
        corpus = self._corpus(57)
        a = split_corpus(corpus, SplitSpec(0.70, 0.15, 0.15, seed=9))
        b = split_corpus(corpus, SplitSpec(0.70, 0.15, 0.15, seed=10))
        assert a != b

    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(3, 240), seed=st.integers(0, 2**31),
           fracs=st.sampled_from([(0.7, 0.15, 0.15), (0.6, 0.2, 0.2),
                                  (1.0, 0.0, 0.0), (0.34, 0.33, 0.33)]),
           stratified=st.booleans())
    def test_partition_property(self, n, seed, fracs, stratified):
        corpus = self._corpus(n, n_high=max(1, n // 4))
        spec = SplitSpec(*fracs, seed=seed, stratified=stratified)
        train, val, test = split_corpus(corpus, spec)
        assert len(train) + len(val) + len(test) == n
        ids = {r.report.id for r in train} | {r.report.id for r in val} \
            | {r.report.id for r in test}
        assert len(ids) == n

    def test_stratified_prevalence_bound(self):
        corpus = self._corpus(200, n_high=31)
        overall = 31 / 200
        train, val, test = split_corpus(
            corpus, SplitSpec(0.70, 0.15, 0.15, seed=3, stratified=True))
        for part in (train, val, test):
            frac = sum(r.label.binary == Severity.HIGH for r in part) / len(part)
            assert abs(frac - overall) <= 1.0 / len(part) + 1e-12

    def test_empty_corpus(self):
        with pytest.raises(DataError):
            split_corpus([], SplitSpec(0.7, 0.15, 0.15))

    def test_stratified_needs_high(self):
        corpus = [labeled(f"r{i}", "t", 0, Severity.LOW) for i in range(10)]
        with pytest.raises(DataError):
            split_corpus(corpus, SplitSpec(0.7, 0.15, 0.15, stratified=True))

    def test_bad_fractions(self):
        with pytest.raises(DataError):
            split_corpus(self._corpus(10), SplitSpec(0.5, 0.2, 0.2))


class TestStats:
    def test_hand_computed(self):
        corpus = [
            labeled("a", " ".join(["w"] * 10), 0, Severity.LOW),
            labeled("b", " ".join(["w"] * 44), 3, Severity.HIGH),
            labeled("c", " ".join(["w"] * 90), 0, Severity.LOW),
        ]
        stats = corpus_stats(corpus)
        assert stats.median_words == 44
        assert stats.high_severity_frac == pytest.approx(1 / 3)
        # population std of [10, 44, 90]
        assert stats.std_words == pytest.approx(np.std([10, 44, 90]))

    def test_single_report(self):
        stats = corpus_stats([labeled("a", "one two three", 0, Severity.LOW)])
        assert stats.median_words == 3
        assert stats.std_words == 0.0
        assert stats.high_severity_frac == 0.0

    def test_std_zero_iff_equal_counts(self):
        equal = [labeled(f"r{i}", "a b c", 0, Severity.LOW) for i in range(5)]
        assert corpus_stats(equal).std_words == 0.0
        unequal = equal + [labeled("x", "a b", 0, Severity.LOW)]
        assert corpus_stats(unequal).std_words > 0.0

    def test_empty(self):
        with pytest.raises(DataError):
            corpus_stats([])


class TestSynthetic:
    def test_prevalence_within_binomial_bound(self):
        spec = SyntheticSpec(n_reports=1000, prevalence=0.2, label_noise=0.0, seed=1)
        corpus = generate_synthetic_corpus(spec, "A")
        frac = sum(r.label.binary == Severity.HIGH for r in corpus) / len(corpus)
        bound = 3 * math.sqrt(0.2 * 0.8 / 1000)
        assert abs(frac - 0.2) <= bound

    def test_no_shift_shares_lexicons(self):
        spec = SyntheticSpec(n_reports=300, prevalence=0.3, vocab_shift=0.0, seed=5)
        words_a = {w for r in generate_synthetic_corpus(spec, "A")
                   for w in r.report.text.split()}
        words_b = {w for r in generate_synthetic_corpus(spec, "B")
                   for w in r.report.text.split()}
        assert words_b <= words_a

    def test_shift_introduces_new_words(self):
        spec = SyntheticSpec(n_reports=300, prevalence=0.3, vocab_shift=0.5, seed=5)
        words_a = {w for r in generate_synthetic_corpus(spec, "A")
                   for w in r.report.text.split()}
        words_b = {w for r in generate_synthetic_corpus(spec, "B")
                   for w in r.report.text.split()}
        assert words_b - words_a

    def test_deterministic(self):
        spec = SyntheticSpec(n_reports=100, prevalence=0.25, vocab_shift=0.4,
                             label_noise=0.1, seed=11)
        a = generate_synthetic_corpus(spec, "B")
        b = generate_synthetic_corpus(spec, "B")
        assert a == b

    def test_raw_label_consistent_with_binary(self):
        spec = SyntheticSpec(n_reports=200, prevalence=0.3, label_noise=0.2, seed=2)
        for r in generate_synthetic_corpus(spec, "A"):
            assert binarize_severity(r.label.raw, Scale.INST) == r.label.binary

    def test_word_count_median_close_to_request(self):
        spec = SyntheticSpec(n_reports=2000, prevalence=0.2, length_median=40, seed=3)
        counts = [len(r.report.text.split())
                  for r in generate_synthetic_corpus(spec, "A")]
        assert 30 <= np.median(counts) <= 50
