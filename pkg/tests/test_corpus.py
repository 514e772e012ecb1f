from __future__ import annotations

import json
import shutil

import pytest

from movescanner.corpus import CorpusError, LabelManifest, evaluate_corpus
from movescanner.corpus.harness import main


def test_shipped_manifest_category_sizes(corpus_dir):
    manifest = LabelManifest.load(corpus_dir / "manifest.json")
    counts: dict[str, int] = {}
    for fx in manifest.fixtures:
        for lb in fx.labels:
            counts[lb.check] = counts.get(lb.check, 0) + 1
    assert counts == {
        "resource-leak": 8,
        "arith-overflow": 5,
        "unchecked-return": 7,
        "cross-module": 4,
        "capability-leak": 10,
    }
    manifest.validate(corpus_dir)


def test_shipped_corpus_scores_perfectly(corpus_dir):
    table = evaluate_corpus(corpus_dir)
    total = table.total
    assert (total.test_cases, total.detected, total.false_positives) == (34, 34, 0)
    assert table.row("arith-overflow").detection_rate == 100.0
    assert table.missed == [] and table.false_positive_findings == []


def _copy(corpus_dir, tmp_path, edit):
    dst = tmp_path / "corpus"
    shutil.copytree(corpus_dir, dst)
    raw = json.loads((dst / "manifest.json").read_text())
    edit(raw)
    (dst / "manifest.json").write_text(json.dumps(raw))
    return dst


def test_offset_label_is_missed(corpus_dir, tmp_path):
    def shift(raw):
        raw["fixtures"] = [fx for fx in raw["fixtures"] if fx["file"] == "vulnerable/arith_partial_guard.mvas"]
        raw["fixtures"][0]["labels"][0]["instruction_index"] -= 5

    table = evaluate_corpus(_copy(corpus_dir, tmp_path, shift))
    row = table.row("arith-overflow")
    assert (row.test_cases, row.detected) == (1, 0)
    assert len(table.missed) == 1


def test_index_tolerance_of_one(corpus_dir, tmp_path):
    def nudge(raw):
        raw["fixtures"] = [fx for fx in raw["fixtures"] if fx["file"] == "vulnerable/arith_partial_guard.mvas"]
        raw["fixtures"][0]["labels"][0]["instruction_index"] += 1

    assert evaluate_corpus(_copy(corpus_dir, tmp_path, nudge)).total.detected == 1


def test_all_clean_corpus_suppresses_rate_rows(corpus_dir, tmp_path):
    def strip(raw):
        for fx in raw["fixtures"]:
            fx["file"] = fx["clean"]
            fx["labels"] = []

    table = evaluate_corpus(_copy(corpus_dir, tmp_path, strip))
    assert table.total.false_positives == 0
    assert all(r.detection_rate is None for r in table.rows)
    assert table.to_dict()["rows"] == []
    assert table.to_dict()["total"]["detection_rate"] is None


def test_false_positive_counted(corpus_dir, tmp_path):
    def swap(raw):
        fx = next(f for f in raw["fixtures"] if f["file"] == "vulnerable/arith_add.mvas")
        fx["clean"] = fx["file"]
        raw["fixtures"] = [fx]

    table = evaluate_corpus(_copy(corpus_dir, tmp_path, swap))
    row = table.row("arith-overflow")
    assert row.false_positives == 1 and row.fp_rate == 50.0


def test_manifest_mismatches_raise(corpus_dir, tmp_path):
    def missing(raw):
        raw["fixtures"][0]["clean"] = "clean/nowhere.mvas"

    def bad_index(raw):
        raw["fixtures"][0]["labels"][0]["instruction_index"] = 999

    def bad_check(raw):
        raw["fixtures"][0]["labels"][0]["check"] = "reentrancy"

    for k, edit in enumerate((missing, bad_index, bad_check)):
        with pytest.raises(CorpusError):
            evaluate_corpus(_copy(corpus_dir, tmp_path / str(k), edit))


def test_bench_cli(capsys, corpus_dir):
    assert main([str(corpus_dir)]) == 0
    out = capsys.readouterr().out
    assert "total" in out and "34" in out
    assert main([str(corpus_dir), "--format", "json"]) == 0
