"""Config-driven orchestration: load, build shared graphs, run detectors, collect a Report."""

from __future__ import annotations

import logging
import time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from . import TOOL_NAME, __version__
from .bytecode.binary import parse_binary
from .bytecode.model import ModuleDef, ModuleId
from .cfg import DEFAULT_BACK_EDGE_BUDGET, DEFAULT_MAX_PATHS
from .crossmodule import build_call_graph, build_resource_flow
from .detectors import (
    DEFAULT_SUFFIXES,
    DETECTOR_CHECKS,
    Check,
    Finding,
    Severity,
    detect_arith_overflow,
    detect_capability_leak,
    detect_cross_module,
    detect_resource_leak,
    detect_unchecked_return,
    function_diagnostics,
)
from .errors import ParseError
from .package import Package

log = logging.getLogger(__name__)

CHECK_NAMES = tuple(c.value for c in DETECTOR_CHECKS)
MODULE_SUFFIXES = (".mvas", ".mvbc")


@dataclass
class ScannerConfig:
    enabled_checks: frozenset[str] = frozenset(CHECK_NAMES)
    back_edge_budget: int = DEFAULT_BACK_EDGE_BUDGET
    max_paths: int = DEFAULT_MAX_PATHS
    capability_name_suffixes: tuple[str, ...] = DEFAULT_SUFFIXES
    fail_on: Severity = Severity.LOW

    def __post_init__(self) -> None:
        self.enabled_checks = frozenset(self.enabled_checks)
        unknown = self.enabled_checks - set(CHECK_NAMES)
        if unknown:
            raise ValueError(f"unknown check(s): {', '.join(sorted(unknown))}")
        if self.back_edge_budget < 0:
            raise ValueError("back_edge_budget must be >= 0")
        if self.max_paths < 1:
            raise ValueError("max_paths must be >= 1")
        if isinstance(self.fail_on, str):
            self.fail_on = Severity(self.fail_on)

    def enabled(self, check: Check) -> bool:
        return check.value in self.enabled_checks


@dataclass
class Report:
    modules_analyzed: int
    findings: list[Finding]
    elapsed_ms: dict[str, float]
    warnings: list[str] = field(default_factory=list)
    load_errors: list[str] = field(default_factory=list)
    tool: str = TOOL_NAME
    version: str = __version__

    @property
    def counts(self) -> dict[str, int]:
        counts = {c.value: 0 for c in Check}
        for f in self.findings:
            counts[f.check.value] += 1
        return counts

    @property
    def mean_elapsed_ms(self) -> float:
        if not self.elapsed_ms:
            return 0.0
        return sum(self.elapsed_ms.values()) / len(self.elapsed_ms)

    def exit_code(self, fail_on: Severity = Severity.LOW) -> int:
        if self.load_errors:
            return 2
        if any(f.severity.rank >= fail_on.rank for f in self.findings):
            return 1
        return 0


def expand_inputs(inputs: Iterable[str | Path]) -> list[Path]:
    out: list[Path] = []
    for p in map(Path, inputs):
        if p.is_dir():
            out += sorted(q for q in p.rglob("*") if q.suffix in MODULE_SUFFIXES and q.is_file())
        else:
            out.append(p)
    return out


def load_module(path: Path) -> ModuleDef:
    return parse_binary(path.read_bytes())


def scan(
    inputs: Sequence[str | Path], cfg: ScannerConfig | None = None, deterministic: bool = False
) -> Report:
    cfg = cfg or ScannerConfig()
    modules: list[ModuleDef] = []
    load_ms: dict[ModuleId, float] = {}
    errors: list[str] = []
    warnings: list[str] = []
    seen: dict[ModuleId, Path] = {}
    for path in expand_inputs(inputs):
        t0 = time.perf_counter()
        try:
            m = load_module(path)
        except OSError as exc:
            errors.append(f"{path}: cannot read: {exc.strerror or exc}")
            continue
        except ParseError as exc:
            errors.append(f"{path}: {exc}")
            continue
        if m.id in seen:
            errors.append(f"{path}: duplicate module {m.id} (already loaded from {seen[m.id]})")
            continue
        seen[m.id] = path
        load_ms[m.id] = (time.perf_counter() - t0) * 1000
        warnings += [f"{path}: {w}" for w in m.load_warnings]
        modules.append(m)
    report = scan_modules(modules, cfg, load_ms)
    report.load_errors = errors
    report.warnings = warnings + report.warnings + [f"error: {e}" for e in errors]
    if deterministic:
        report.elapsed_ms = {k: 0.0 for k in report.elapsed_ms}
    return report


def scan_modules(
    modules: Sequence[ModuleDef],
    cfg: ScannerConfig | None = None,
    base_ms: dict[ModuleId, float] | None = None,
) -> Report:
    """Analyze already-loaded modules as one package."""
    cfg = cfg or ScannerConfig()
    package = Package(modules)
    elapsed = {mid: (base_ms or {}).get(mid, 0.0) for mid in package.modules}
    findings: list[Finding] = []

    for mid, m in package.modules.items():
        t0 = time.perf_counter()
        for f in m.functions:
            ctx = package.context(mid, f.name)
            findings += function_diagnostics(ctx)
            if cfg.enabled(Check.RESOURCE_LEAK):
                findings += detect_resource_leak(ctx, cfg.back_edge_budget, cfg.max_paths)
            if cfg.enabled(Check.UNCHECKED_RETURN):
                findings += detect_unchecked_return(ctx)
            if cfg.enabled(Check.ARITH_OVERFLOW):
                findings += detect_arith_overflow(ctx)
        elapsed[mid] += (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    cg = build_call_graph(package)
    if cfg.enabled(Check.CROSS_MODULE):
        findings += detect_cross_module(package, cg)
    if cfg.enabled(Check.CAPABILITY_LEAK):
        rfg = build_resource_flow(package, cg)
        findings += detect_capability_leak(package, rfg, cfg.capability_name_suffixes)
    if package.modules:
        shared = (time.perf_counter() - t0) * 1000 / len(package.modules)
        for mid in elapsed:
            elapsed[mid] += shared

    findings.sort(key=lambda f: f.sort_key)
    return Report(
        modules_analyzed=len(package.modules),
        findings=findings,
        elapsed_ms={str(mid): ms for mid, ms in elapsed.items()},
        warnings=list(package.warnings),
    )
