"""Labeled benchmark corpus evaluation.

A corpus directory holds ``.mvas`` fixtures and a ``manifest.json``::

    {"fixtures": [
        {"file": "leak_basic.mvas",
         "clean": "leak_basic.clean.mvas",
         "support": ["vault.mvas"],
         "labels": [{"check": "resource-leak", "function": "mint", "instruction_index": 3}]}
    ]}

Each fixture is scanned together with its support modules, then the clean
variant is scanned the same way. A label is detected when a finding in the
fixture's module has the same check and function and an instruction index
within one of the label's. Every non-diagnostic finding on a clean run is a
false positive.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from ..bytecode.model import ModuleId
from ..detectors import DETECTOR_CHECKS, Check, Finding
from ..errors import MoveScannerError, ParseError
from ..report import dump_json
from ..scanner import CHECK_NAMES, ScannerConfig, load_module, scan

BENCHMARK_DIR = Path(__file__).parent / "benchmark"
INDEX_TOLERANCE = 1


class CorpusError(MoveScannerError):
    """Manifest and corpus disagree."""


@dataclass(frozen=True)
class Label:
    check: str
    function: str
    instruction_index: int


@dataclass
class FixtureEntry:
    file: str
    clean: str
    labels: list[Label]
    support: list[str] = field(default_factory=list)


@dataclass
class LabelManifest:
    fixtures: list[FixtureEntry]

    @classmethod
    def load(cls, path: Path) -> LabelManifest:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
            return cls(
                [
                    FixtureEntry(
                        file=fx["file"],
                        clean=fx["clean"],
                        support=list(fx.get("support", [])),
                        labels=[
                            Label(lb["check"], lb["function"], int(lb["instruction_index"]))
                            for lb in fx.get("labels", [])
                        ],
                    )
                    for fx in raw["fixtures"]
                ]
            )
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CorpusError(f"bad manifest {path}: {exc}") from exc

    def validate(self, corpus_dir: Path) -> None:
        for fx in self.fixtures:
            for name in [fx.file, fx.clean, *fx.support]:
                if not (corpus_dir / name).is_file():
                    raise CorpusError(f"{name}: listed in manifest but missing from {corpus_dir}")
            try:
                module = load_module(corpus_dir / fx.file)
                load_module(corpus_dir / fx.clean)
            except ParseError as exc:
                raise CorpusError(f"{fx.file}: fixture does not parse: {exc}") from exc
            for lb in fx.labels:
                if lb.check not in CHECK_NAMES:
                    raise CorpusError(f"{fx.file}: unknown check {lb.check!r}")
                f = module.function(lb.function)
                if f is None or not 0 <= lb.instruction_index < len(f.body):
                    raise CorpusError(
                        f"{fx.file}: label {lb.check}@{lb.function}:{lb.instruction_index} names no instruction"
                    )


@dataclass
class ScoreRow:
    check: str
    test_cases: int
    detected: int
    false_positives: int

    @property
    def detection_rate(self) -> float | None:
        if not self.test_cases:
            return None
        return round(100 * self.detected / self.test_cases, 1)

    @property
    def fp_rate(self) -> float:
        reported = self.detected + self.false_positives
        return round(100 * self.false_positives / reported, 1) if reported else 0.0


@dataclass
class ScoreTable:
    rows: list[ScoreRow]
    missed: list[str] = field(default_factory=list)
    false_positive_findings: list[str] = field(default_factory=list)

    @property
    def total(self) -> ScoreRow:
        return ScoreRow(
            "total",
            sum(r.test_cases for r in self.rows),
            sum(r.detected for r in self.rows),
            sum(r.false_positives for r in self.rows),
        )

    def row(self, check: str) -> ScoreRow:
        for r in self.rows:
            if r.check == check:
                return r
        raise KeyError(check)

    def to_dict(self) -> dict:
        def one(r: ScoreRow) -> dict:
            return {
                "check": r.check,
                "test_cases": r.test_cases,
                "detected": r.detected,
                "detection_rate": r.detection_rate,
                "false_positives": r.false_positives,
                "fp_rate": r.fp_rate,
            }

        return {
            "rows": [one(r) for r in self.rows if r.test_cases or r.false_positives],
            "total": one(self.total),
            "missed": list(self.missed),
            "false_positive_findings": list(self.false_positive_findings),
        }

    def render_text(self) -> str:
        head = f"{'check':<18}{'cases':>7}{'detected':>10}{'rate %':>9}{'FP':>5}{'FP %':>7}"
        lines = [head, "-" * len(head)]
        shown = [r for r in self.rows if r.test_cases or r.false_positives] + [self.total]
        for r in shown:
            rate = "-" if r.detection_rate is None else f"{r.detection_rate:.1f}"
            lines.append(
                f"{r.check:<18}{r.test_cases:>7}{r.detected:>10}{rate:>9}{r.false_positives:>5}{r.fp_rate:>7.1f}"
            )
        for m in self.missed:
            lines.append(f"missed: {m}")
        for fp in self.false_positive_findings:
            lines.append(f"false positive: {fp}")
        return "\n".join(lines) + "\n"


def match_labels(labels: Sequence[Label], findings: Sequence[Finding], module: ModuleId) -> list[bool]:
    """One-to-one greedy matching; returns a detected flag per label."""
    pool = [f for f in findings if f.module == module]
    used: set[int] = set()
    out = []
    for lb in labels:
        hit = False
        for k, f in enumerate(pool):
            if k in used or f.check.value != lb.check or f.function != lb.function:
                continue
            if abs(f.instruction_index - lb.instruction_index) <= INDEX_TOLERANCE:
                used.add(k)
                hit = True
                break
        out.append(hit)
    return out


def evaluate_corpus(
    corpus_dir: str | Path = BENCHMARK_DIR,
    manifest: LabelManifest | None = None,
    cfg: ScannerConfig | None = None,
) -> ScoreTable:
    corpus_dir = Path(corpus_dir)
    if manifest is None:
        manifest = LabelManifest.load(corpus_dir / "manifest.json")
    manifest.validate(corpus_dir)
    cases = {c.value: 0 for c in DETECTOR_CHECKS}
    detected = dict.fromkeys(cases, 0)
    fps = dict.fromkeys(cases, 0)
    missed: list[str] = []
    fp_list: list[str] = []
    for fx in manifest.fixtures:
        support = [corpus_dir / s for s in fx.support]
        vuln = scan([corpus_dir / fx.file, *support], cfg)
        clean = scan([corpus_dir / fx.clean, *support], cfg)
        for run in (vuln, clean):
            if run.load_errors:
                raise CorpusError(f"{fx.file}: load failed: {run.load_errors}")
        module = load_module(corpus_dir / fx.file).id
        for lb, hit in zip(fx.labels, match_labels(fx.labels, vuln.findings, module)):
            cases[lb.check] += 1
            if hit:
                detected[lb.check] += 1
            else:
                missed.append(f"{fx.file}: {lb.check} {lb.function}@{lb.instruction_index}")
        for f in clean.findings:
            if f.check is Check.DIAGNOSTIC:
                continue
            fps[f.check.value] += 1
            fp_list.append(f"{fx.clean}: {f.check.value} {f.module}::{f.function}@{f.instruction_index}")
    rows = [ScoreRow(c, cases[c], detected[c], fps[c]) for c in cases]
    return ScoreTable(rows, missed, fp_list)


def main(argv: Sequence[str] | None = None) -> int:
    p = argparse.ArgumentParser(prog="movescanner-bench", description="Score the detectors on a labeled corpus.")
    p.add_argument("corpus", nargs="?", default=str(BENCHMARK_DIR), help="corpus directory with manifest.json")
    p.add_argument("--format", choices=("text", "json"), default="text")
    args = p.parse_args(argv)
    try:
        table = evaluate_corpus(args.corpus)
    except MoveScannerError as exc:
        print(f"movescanner-bench: {exc}", file=sys.stderr)
        return 2
    if args.format == "json":
        sys.stdout.buffer.write(dump_json(table.to_dict()))
    else:
        sys.stdout.write(table.render_text())
    total = table.total
    return 0 if total.detected == total.test_cases and total.false_positives == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
