"""Package-wide call graph, inter-module access matrix and resource flow."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .bytecode.model import (
    GLOBAL_READ_OPS,
    GLOBAL_WRITE_OPS,
    FunctionRef,
    ModuleId,
    Op,
    StructType,
    TypeTag,
)
from .package import Package


@dataclass(frozen=True)
class CallEdge:
    caller: FunctionRef
    callee: FunctionRef
    site: int


@dataclass
class CallGraph:
    nodes: dict[FunctionRef, bool]  # node -> external flag
    edges: list[CallEdge]

    def is_external(self, ref: FunctionRef) -> bool:
        return self.nodes.get(ref, True)

    def calls_from(self, caller: FunctionRef) -> list[CallEdge]:
        return [e for e in self.edges if e.caller == caller]


def build_call_graph(package: Package) -> CallGraph:
    nodes: dict[FunctionRef, bool] = {}
    edges: list[CallEdge] = []
    for m, f in package.functions():
        nodes[FunctionRef(m.id, f.name)] = False
    for m, f in package.functions():
        caller = FunctionRef(m.id, f.name)
        for i, instr in enumerate(f.body):
            if instr.op is Op.CALL:
                nodes.setdefault(instr.arg, True)
                edges.append(CallEdge(caller, instr.arg, i))
    return CallGraph(nodes, edges)


class Access(Enum):
    CALL = "Call"
    GLOBAL_READ = "GlobalRead"
    GLOBAL_WRITE = "GlobalWrite"
    RESOURCE_TRANSFER = "ResourceTransfer"


@dataclass(frozen=True)
class Witness:
    function: FunctionRef
    site: int


@dataclass
class CapabilityMatrix:
    entries: dict[tuple[ModuleId, ModuleId], set[Access]] = field(default_factory=dict)
    witnesses: dict[tuple[ModuleId, ModuleId, Access], list[Witness]] = field(default_factory=dict)

    def add(self, src: ModuleId, dst: ModuleId, kind: Access, witness: Witness) -> None:
        self.entries.setdefault((src, dst), set()).add(kind)
        self.witnesses.setdefault((src, dst, kind), []).append(witness)

    def get(self, src: ModuleId, dst: ModuleId) -> set[Access]:
        return self.entries.get((src, dst), set())


@dataclass(frozen=True)
class ResourceFlowEdge:
    src: ModuleId
    dst: ModuleId
    resource: StructType
    site: Witness  # the call instruction in the calling function
    kind: str  # "arg" or "ret"
    position: int
    external: bool = False  # callee signature unknown; lowers confidence downstream


@dataclass
class ResourceFlowGraph:
    edges: list[ResourceFlowEdge]


def build_resource_flow(package: Package, cg: CallGraph) -> ResourceFlowGraph:
    """Resource values crossing a module boundary as call arguments or results.

    Known callees are judged by their declared signature (by-value types only).
    For external callees only arguments are considered, typed by what the
    call site pushed.
    """
    edges: list[ResourceFlowEdge] = []
    for e in cg.edges:
        if e.caller.module == e.callee.module:
            continue
        callee = package.function(e.callee)
        here = Witness(e.caller, e.site)
        if callee is not None:
            for k, (_, ty) in enumerate(callee.params):
                if package.is_resource(ty):
                    edges.append(ResourceFlowEdge(e.caller.module, e.callee.module, ty, here, "arg", k))
            for k, ty in enumerate(callee.returns):
                if package.is_resource(ty):
                    edges.append(ResourceFlowEdge(e.callee.module, e.caller.module, ty, here, "ret", k))
            continue
        ctx = package.context(e.caller.module, e.caller.name)
        if ctx.defuse is None:
            continue
        for k, v in enumerate(ctx.operands(e.site)):
            ty: TypeTag | None = ctx.value_types.get(v)
            if package.is_resource(ty):
                edges.append(
                    ResourceFlowEdge(e.caller.module, e.callee.module, ty, here, "arg", k, external=True)
                )
    return ResourceFlowGraph(edges)


def build_capability_matrix(
    package: Package, cg: CallGraph, rfg: ResourceFlowGraph | None = None
) -> CapabilityMatrix:
    cm = CapabilityMatrix()
    for e in cg.edges:
        cm.add(e.caller.module, e.callee.module, Access.CALL, Witness(e.caller, e.site))
    for m, f in package.functions():
        ref = FunctionRef(m.id, f.name)
        for i, instr in enumerate(f.body):
            if instr.op in GLOBAL_WRITE_OPS:
                cm.add(m.id, instr.arg.module, Access.GLOBAL_WRITE, Witness(ref, i))
            elif instr.op in GLOBAL_READ_OPS:
                cm.add(m.id, instr.arg.module, Access.GLOBAL_READ, Witness(ref, i))
    if rfg is None:
        rfg = build_resource_flow(package, cg)
    for edge in rfg.edges:
        cm.add(edge.src, edge.dst, Access.RESOURCE_TRANSFER, edge.site)
    return cm


__all__ = [
    "Access",
    "CallEdge",
    "CallGraph",
    "CapabilityMatrix",
    "ResourceFlowEdge",
    "ResourceFlowGraph",
    "Witness",
    "build_call_graph",
    "build_capability_matrix",
    "build_resource_flow",
]
