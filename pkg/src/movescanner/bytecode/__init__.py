from .model import (
    Ability,
    FunctionDef,
    FunctionRef,
    Instruction,
    ModuleDef,
    ModuleId,
    Op,
    PrimType,
    RefType,
    StructDef,
    StructType,
    TypeTag,
    Visibility,
    stack_effect,
)
from .asm import format_text, parse_text
from .binary import parse_binary, serialize_binary
from .resolve import TypedModule, resolve_types
from .validate import validate_module

__all__ = [
    "Ability",
    "FunctionDef",
    "FunctionRef",
    "Instruction",
    "ModuleDef",
    "ModuleId",
    "Op",
    "PrimType",
    "RefType",
    "StructDef",
    "StructType",
    "TypeTag",
    "TypedModule",
    "Visibility",
    "format_text",
    "parse_binary",
    "parse_text",
    "resolve_types",
    "serialize_binary",
    "stack_effect",
    "validate_module",
]
