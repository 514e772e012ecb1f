from __future__ import annotations

import textwrap
from pathlib import Path

import pytest

from movescanner.bytecode import parse_text
from movescanner.corpus import BENCHMARK_DIR
from movescanner.package import Package


def mod(src: str, **kw):
    return parse_text(textwrap.dedent(src), **kw)


def fn(body: str, sig: str = "fun f()", pre: str = ""):
    """Parse a single function wrapped in a throwaway module."""
    src = f"module 0x7::t\n{textwrap.dedent(pre)}\n{sig} {{\n{textwrap.dedent(body)}\n}}\n"
    return parse_text(src).functions[-1]


def ctx_of(src: str, function: str, *others: str):
    modules = [mod(src)] + [mod(o) for o in others]
    pkg = Package(modules)
    return pkg.context(modules[0].id, function)


@pytest.fixture
def corpus_dir() -> Path:
    return BENCHMARK_DIR
