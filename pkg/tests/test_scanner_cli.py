from __future__ import annotations

import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from movescanner import __version__
from movescanner.bytecode import parse_text, serialize_binary
from movescanner.cli import main
from movescanner.detectors import Check, Severity
from movescanner.report import render_json, render_text
from movescanner.scanner import Report, ScannerConfig, scan

CLEAN = "module 0x1::ok\npublic fun f(x: u64): u64 { copy_loc x; ret }\n"
OVERFLOW = "module 0x1::ov\npublic fun f(a: u64, b: u64): u64 { copy_loc a; copy_loc b; add; ret }\n"


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, src in {"clean": CLEAN, "overflow": OVERFLOW}.items():
        p = tmp_path / f"{name}.mvas"
        p.write_text(src)
        paths[name] = p
    return paths


def test_scan_clean_module(files):
    r = scan([files["clean"]])
    assert r.findings == [] and r.modules_analyzed == 1
    assert set(r.elapsed_ms) == {"0x1::ok"}


def test_disabled_check_gives_nothing(files):
    r = scan([files["overflow"]], ScannerConfig(enabled_checks={"resource-leak"}))
    assert r.findings == []


def test_config_validation():
    with pytest.raises(ValueError):
        ScannerConfig(enabled_checks={"nonsense"})
    with pytest.raises(ValueError):
        ScannerConfig(max_paths=0)
    with pytest.raises(ValueError):
        ScannerConfig(back_edge_budget=-1)
    assert ScannerConfig().capability_name_suffixes == ("Cap", "Capability")


def test_binary_input_and_directory_expansion(tmp_path):
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "m.mvbc").write_bytes(serialize_binary(parse_text(OVERFLOW)))
    (tmp_path / "notes.txt").write_text("ignored")
    r = scan([tmp_path])
    assert r.modules_analyzed == 1
    assert [f.check for f in r.findings] == [Check.ARITH_OVERFLOW]


def test_parse_failures_are_collected(files, tmp_path):
    bad = tmp_path / "bad.mvas"
    bad.write_text("module 0x1::bad\nfun f() { nope }\n")
    r = scan([bad, files["overflow"], tmp_path / "missing.mvas"])
    assert r.modules_analyzed == 1
    assert len(r.load_errors) == 2
    assert r.exit_code() == 2
    assert any(w.startswith("error: ") for w in r.warnings)


def test_duplicate_module_is_a_load_error(files, tmp_path):
    dup = tmp_path / "dup.mvas"
    dup.write_text(CLEAN)
    r = scan([files["clean"], dup])
    assert r.modules_analyzed == 1 and "duplicate module" in r.load_errors[0]


def test_counts_sum_to_findings(corpus_dir):
    r = scan([corpus_dir / "vulnerable", corpus_dir / "support"])
    assert sum(r.counts.values()) == len(r.findings)
    assert r.counts == {
        "resource-leak": 8,
        "unchecked-return": 7,
        "arith-overflow": 5,
        "cross-module": 4,
        "capability-leak": 10,
        "diagnostic": 0,
    }


def test_render_text_empty_and_single():
    empty = Report(0, [], {})
    text = render_text(empty)
    assert text.splitlines()[0] == f"movescanner {__version__}: 0 module(s) analyzed"
    assert "0 findings" in text


def test_render_text_one_line_per_finding(files):
    r = scan([files["overflow"]])
    lines = [ln for ln in render_text(r).splitlines() if ln.startswith("MEDIUM ")]
    assert lines == [f"MEDIUM arith-overflow 0x1::ov::f @2 — {r.findings[0].message}"]


def test_render_json_shape(files):
    r = scan([files["overflow"]], deterministic=True)
    raw = render_json(r)
    data = json.loads(raw)
    assert list(data) == ["tool", "version", "modules_analyzed", "findings", "stats", "warnings"]
    f = data["findings"][0]
    assert list(f) == ["id", "check", "severity", "confidence", "module", "function", "instruction_index", "message"]
    assert len(f["id"]) == 16 and int(f["id"], 16) >= 0
    assert json.dumps(data, indent=2, ensure_ascii=False).encode() + b"\n" == raw
    assert data["stats"]["module_elapsed_ms"] == {"0x1::ov": 0.0}


def test_render_json_empty_findings():
    assert json.loads(render_json(Report(0, [], {})))["findings"] == []


def test_resource_leak_json_has_path_blocks(tmp_path):
    p = tmp_path / "l.mvas"
    p.write_text("module 0x1::l\nstruct T has key {}\nfun f() {\n local t: T\n pack T; st_loc t; ret\n}\n")
    data = json.loads(render_json(scan([p])))
    assert data["findings"][0]["path_blocks"] == [0]


def test_exit_code_law():
    from movescanner.bytecode.model import ModuleId
    from movescanner.detectors import Finding

    low = Finding(Check.UNCHECKED_RETURN, Severity.LOW, ModuleId("0x1", "a"), "f", 0, "m")
    r = Report(1, [low], {})
    assert r.exit_code(Severity.LOW) == 1
    assert r.exit_code(Severity.MEDIUM) == 0
    r.load_errors = ["x"]
    assert r.exit_code(Severity.LOW) == 2


# ---------------------------------------------------------------- CLI


def test_cli_no_arguments_is_usage_error(capsys):
    assert main([]) == 3
    assert "usage:" in capsys.readouterr().err


def test_cli_bad_flags_are_usage_errors(files):
    assert main([str(files["clean"]), "--format", "xml"]) == 3
    assert main([str(files["clean"]), "--checks", "resource-leak,bogus"]) == 3
    assert main([str(files["clean"]), "--max-paths", "0"]) == 3
    assert main([str(files["clean"]), "--fail-on", "urgent"]) == 3


def test_cli_clean_json(files, capsysbinary):
    assert main([str(files["clean"]), "--format", "json"]) == 0
    data = json.loads(capsysbinary.readouterr().out)
    assert data["findings"] == [] and data["tool"] == "movescanner"


def test_cli_seeded_module_exits_one(files):
    assert main([str(files["overflow"])]) == 1
    assert main([str(files["overflow"]), "--fail-on", "high"]) == 0
    assert main([str(files["overflow"]), "--no-check", "arith-overflow"]) == 0
    assert main([str(files["overflow"]), "--checks", "resource-leak"]) == 0


def test_cli_output_file(files, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main([str(files["overflow"]), "--format", "json", "--output", str(out), "--deterministic"]) == 1
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["stats"]["by_check"]["arith-overflow"] == 1


def test_cli_load_error_dominates_findings(files, tmp_path, capsys):
    chain = tmp_path / "chain.mvbc"
    chain.write_bytes(bytes.fromhex("A11CEB0B"))
    assert main([str(files["overflow"]), str(chain)]) == 2
    assert "unsupported chain bytecode" in capsys.readouterr().err


def test_cli_entry_point_runs(files):
    proc = subprocess.run(
        [sys.executable, "-m", "movescanner.cli", str(files["clean"]), "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and __version__ in proc.stdout


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_scanner_total_on_random_modules(rng):
    from randfuncs import random_module_text

    from movescanner.scanner import scan_modules

    m = parse_text(random_module_text(rng, n_functions=3, loops=True))
    r = scan_modules([m])
    assert sum(r.counts.values()) == len(r.findings)
    assert r.findings == sorted(r.findings, key=lambda f: f.sort_key)
