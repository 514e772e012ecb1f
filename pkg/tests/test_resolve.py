from __future__ import annotations

from conftest import mod

from movescanner.bytecode import resolve_types
from movescanner.bytecode.model import ModuleId, StructType

SRC = """
module 0x1::m
struct Flag has copy, drop {}
struct AdminCap has store {}
struct Record has key {}
fun f(a: address) { copy_loc a; exists 0x2::other::Thing; pop; ret }
"""


def test_classification_examples():
    t = resolve_types(mod(SRC))
    assert "Flag" not in t.resource_structs
    assert "AdminCap" in t.capability_structs
    assert "Record" in t.resource_structs and "Record" not in t.capability_structs


def test_unresolved_structs_are_external():
    t = resolve_types(mod(SRC))
    assert StructType(ModuleId("0x2", "other"), "Thing") in t.external_structs


def test_structs_resolved_against_package():
    other = mod("module 0x2::other\nstruct Thing has key {}\n")
    t = resolve_types(mod(SRC), [other])
    assert not t.external_structs


def test_capability_implies_resource_over_corpus(corpus_dir):
    for path in corpus_dir.rglob("*.mvas"):
        for s in mod(path.read_text()).structs:
            assert s.is_resource == (not ({a.value for a in s.abilities} & {"copy", "drop"}))
            assert not s.is_capability or s.is_resource
