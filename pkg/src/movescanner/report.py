from __future__ import annotations

import json

from .detectors import Check
from .scanner import Report


def finding_dict(f) -> dict:
    d = {
        "id": f.id,
        "check": f.check.value,
        "severity": f.severity.value,
        "confidence": f.confidence.value,
        "module": str(f.module),
        "function": f.function,
        "instruction_index": f.instruction_index,
        "message": f.message,
    }
    if f.witness_path is not None:
        d["path_blocks"] = list(f.witness_path)
    return d


def report_dict(r: Report) -> dict:
    """Plain-data form of a report, keys in the order they are emitted."""
    return {
        "tool": r.tool,
        "version": r.version,
        "modules_analyzed": r.modules_analyzed,
        "findings": [finding_dict(f) for f in r.findings],
        "stats": {
            "by_check": r.counts,
            "module_elapsed_ms": {k: round(v, 3) for k, v in sorted(r.elapsed_ms.items())},
            "mean_elapsed_ms": round(r.mean_elapsed_ms, 3),
        },
        "warnings": list(r.warnings),
    }


def render_json(r: Report) -> bytes:
    return dump_json(report_dict(r))


def dump_json(data) -> bytes:
    return (json.dumps(data, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def render_text(r: Report) -> str:
    lines = [f"{r.tool} {r.version}: {r.modules_analyzed} module(s) analyzed"]
    for f in r.findings:
        lines.append(
            f"{f.severity.value.upper()} {f.check.value} {f.module}::{f.function} "
            f"@{f.instruction_index} — {f.message}"
        )
    lines.append(f"{len(r.findings)} findings")
    counts = r.counts
    width = max(len(c.value) for c in Check)
    lines.append("")
    lines.append(f"{'check':<{width}}  count")
    for c in Check:
        lines.append(f"{c.value:<{width}}  {counts[c.value]}")
    if r.warnings:
        lines.append("")
        lines.append("warnings:")
        lines += [f"  {w}" for w in r.warnings]
    return "\n".join(lines) + "\n"
