"""Type resolution: resource and capability classification per struct."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

from .model import STRUCT_OPS, ModuleDef, ModuleId, StructDef, StructType


@dataclass(frozen=True)
class TypedModule:
    base: ModuleDef
    resource_structs: frozenset[str]
    capability_structs: frozenset[str]
    friend_list: frozenset[ModuleId]
    # struct operands naming modules outside the package, or missing structs
    external_structs: frozenset[StructType] = field(default=frozenset())

    @property
    def id(self) -> ModuleId:
        return self.base.id


def resolve_types(m: ModuleDef, package: Iterable[ModuleDef] = ()) -> TypedModule:
    """Classify ``m``'s structs and resolve its struct operands against ``package``.

    ``m`` itself is always part of the lookup. Operands that cannot be
    resolved are collected in ``external_structs``; they are not errors.
    """
    known: dict[ModuleId, ModuleDef] = {other.id: other for other in package}
    known[m.id] = m
    resources = frozenset(s.name for s in m.structs if s.is_resource)
    capabilities = frozenset(s.name for s in m.structs if s.is_capability)
    external = set()
    for f in m.functions:
        for instr in f.body:
            if instr.op in STRUCT_OPS and lookup_struct(known, instr.arg) is None:
                external.add(instr.arg)
    return TypedModule(
        base=m,
        resource_structs=resources,
        capability_structs=capabilities,
        friend_list=frozenset(m.friends),
        external_structs=frozenset(external),
    )


def lookup_struct(modules: dict[ModuleId, ModuleDef], ref: StructType) -> StructDef | None:
    owner = modules.get(ref.module)
    return owner.struct(ref.name) if owner is not None else None
