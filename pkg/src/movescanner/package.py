"""A scanned set of modules plus lazily computed per-function analyses.

Detectors never rebuild a CFG or rerun a dataflow pass: they ask the package
for a :class:`FunctionContext`, which computes each fact once.
"""

from __future__ import annotations

from collections.abc import Iterable
from functools import cached_property

from .bytecode.model import (
    ARITH_OPS,
    COMPARE_OPS,
    FunctionDef,
    FunctionRef,
    ModuleDef,
    ModuleId,
    Op,
    PrimType,
    RefType,
    StructDef,
    StructType,
    TypeTag,
    is_signer_like,
    strip_ref,
)
from .bytecode.resolve import TypedModule, lookup_struct, resolve_types
from .cfg import ControlFlowGraph, PathSet, build_cfg, enumerate_paths
from .dataflow import (
    DataflowResult,
    Definition,
    DefUseMap,
    StackValue,
    link_stack_defs,
    live_after,
    live_variables,
    reaching_before,
    reaching_definitions,
)
from .errors import PackageError, StackDisciplineError

_LITERAL_TYPES = {
    Op.LD_U8: PrimType.U8,
    Op.LD_U64: PrimType.U64,
    Op.LD_U128: PrimType.U128,
    Op.LD_TRUE: PrimType.BOOL,
    Op.LD_FALSE: PrimType.BOOL,
    Op.LD_ADDR: PrimType.ADDRESS,
    Op.EXISTS: PrimType.BOOL,
    Op.SIGNER_ADDR: PrimType.ADDRESS,
    Op.NOT: PrimType.BOOL,
    Op.AND: PrimType.BOOL,
    Op.OR: PrimType.BOOL,
}


class Package:
    def __init__(self, modules: Iterable[ModuleDef]) -> None:
        self.modules: dict[ModuleId, ModuleDef] = {}
        for m in sorted(modules, key=lambda m: m.id):
            if m.id in self.modules:
                raise PackageError(f"duplicate module {m.id}")
            self.modules[m.id] = m
        self.typed: dict[ModuleId, TypedModule] = {
            mid: resolve_types(m, self.modules.values()) for mid, m in self.modules.items()
        }
        self._contexts: dict[tuple[ModuleId, str], FunctionContext] = {}
        self.warnings = list(self._arity_warnings())

    def struct(self, ref: StructType) -> StructDef | None:
        return lookup_struct(self.modules, ref)

    def is_resource(self, ty: TypeTag | None) -> bool:
        s = self.struct(ty) if isinstance(ty, StructType) else None
        return s is not None and s.is_resource

    def is_capability(self, ty: TypeTag | None) -> bool:
        s = self.struct(ty) if isinstance(ty, StructType) else None
        return s is not None and s.is_capability

    def function(self, ref: FunctionRef) -> FunctionDef | None:
        m = self.modules.get(ref.module)
        return m.function(ref.name) if m is not None else None

    def is_external(self, ref: FunctionRef) -> bool:
        return self.function(ref) is None

    def functions(self) -> Iterable[tuple[ModuleDef, FunctionDef]]:
        for m in self.modules.values():
            for f in m.functions:
                yield m, f

    def context(self, module: ModuleId, function: str) -> FunctionContext:
        key = (module, function)
        ctx = self._contexts.get(key)
        if ctx is None:
            m = self.modules[module]
            ctx = FunctionContext(self, m, m.function(function))
            self._contexts[key] = ctx
        return ctx

    def _arity_warnings(self) -> Iterable[str]:
        for m, f in self.functions():
            for i, instr in enumerate(f.body):
                if instr.op is not Op.CALL or instr.arg.module == m.id:
                    continue
                callee = self.function(instr.arg)
                if callee is None:
                    continue
                sig = (callee.num_params, len(callee.returns))
                if instr.arity != sig:
                    yield (
                        f"{m.id}::{f.name}@{i}: call site arity {instr.arity} does not match "
                        f"{instr.arg} signature {sig}"
                    )


class FunctionContext:
    """Shared analyses for one function, computed on first use."""

    def __init__(self, package: Package, module: ModuleDef, function: FunctionDef) -> None:
        self.package = package
        self.module = module
        self.function = function
        self._paths: dict[tuple[int, int], PathSet] = {}
        self._reaching_at: dict[int, frozenset[Definition]] = {}

    @property
    def typed(self) -> TypedModule:
        return self.package.typed[self.module.id]

    @cached_property
    def cfg(self) -> ControlFlowGraph:
        return build_cfg(self.function)

    @cached_property
    def _stack(self) -> tuple[DefUseMap | None, StackDisciplineError | None]:
        try:
            return link_stack_defs(self.function, self.cfg), None
        except StackDisciplineError as exc:
            return None, exc

    @property
    def defuse(self) -> DefUseMap | None:
        """None when the function breaks the stack discipline."""
        return self._stack[0]

    @property
    def stack_error(self) -> StackDisciplineError | None:
        return self._stack[1]

    @cached_property
    def reaching(self) -> DataflowResult:
        return reaching_definitions(self.function, self.cfg)

    @cached_property
    def liveness(self) -> DataflowResult:
        return live_variables(self.function, self.cfg)

    def paths(self, back_edge_budget: int, max_paths: int) -> PathSet:
        key = (back_edge_budget, max_paths)
        if key not in self._paths:
            self._paths[key] = enumerate_paths(self.cfg, back_edge_budget, max_paths)
        return self._paths[key]

    def reaching_before(self, index: int) -> frozenset[Definition]:
        cached = self._reaching_at.get(index)
        if cached is None:
            cached = reaching_before(self.reaching, self.function, self.cfg, index)
            self._reaching_at[index] = cached
        return cached

    def live_after(self, index: int) -> frozenset[int]:
        return live_after(self.liveness, self.function, self.cfg, index)

    def operands(self, index: int) -> tuple[StackValue, ...]:
        return self.defuse.operands.get(index, ())

    def defs_of(self, local: int, index: int) -> list[Definition]:
        return [d for d in self.reaching_before(index) if d.local == local]

    @cached_property
    def value_types(self) -> dict[StackValue, TypeTag | None]:
        """Best-effort static type of every stack value; None where unknown."""
        f, body = self.function, self.function.body
        types: dict[StackValue, TypeTag | None] = {}
        for i, instr in enumerate(body):
            op, arg = instr.op, instr.arg
            ins = [types.get(v) for v in self.operands(i)]
            outs: list[TypeTag | None]
            if op in _LITERAL_TYPES:
                outs = [_LITERAL_TYPES[op]]
            elif op in (Op.COPY_LOC, Op.MOVE_LOC):
                outs = [f.local_type(arg)]
            elif op is Op.BORROW_LOC:
                lt = f.local_type(arg)
                outs = [lt if isinstance(lt, RefType) else RefType(lt, True)]
            elif op is Op.READ_REF:
                outs = [strip_ref(ins[0]) if ins else None]
            elif op in ARITH_OPS:
                outs = [ins[0] if ins and ins[0] is not None else (ins[1] if len(ins) > 1 else None)]
            elif op in COMPARE_OPS:
                outs = [PrimType.BOOL]
            elif op is Op.CALL:
                callee = self.package.function(arg)
                nrets = instr.arity[1]
                outs = list(callee.returns) if callee is not None else [None] * nrets
            elif op is Op.PACK or op is Op.MOVE_FROM:
                outs = [arg]
            elif op is Op.UNPACK:
                s = self.package.struct(arg)
                outs = [t for _, t in s.fields] if s is not None else [None] * instr.arity[1]
            elif op is Op.BORROW_GLOBAL:
                outs = [RefType(arg, False)]
            elif op is Op.BORROW_GLOBAL_MUT:
                outs = [RefType(arg, True)]
            else:
                outs = []
            for k, t in enumerate(outs):
                types[StackValue(i, k)] = t
        return types

    def local_ancestors(self, value: StackValue) -> frozenset[int]:
        """Locals whose values flow, through the stack or stores, into ``value``."""
        found: set[int] = set()
        seen_sites: set[int] = set()
        work = [value.site]
        body = self.function.body
        while work:
            i = work.pop()
            if i in seen_sites or i < 0:
                continue
            seen_sites.add(i)
            instr = body[i]
            if instr.op in (Op.COPY_LOC, Op.MOVE_LOC, Op.BORROW_LOC):
                found.add(instr.arg)
                for d in self.defs_of(instr.arg, i):
                    if not d.is_param:
                        work.append(d.site)
            else:
                work.extend(v.site for v in self.operands(i))
        return frozenset(found)

    def derives_from_signer(self, value: StackValue, _seen: frozenset[int] = frozenset()) -> bool:
        """True iff every producer chain of ``value`` is ``signer_addr`` of a signer parameter."""
        i = value.site
        if i in _seen:
            return False
        seen = _seen | {i}
        instr = self.function.body[i]
        if instr.op is Op.SIGNER_ADDR:
            return self._is_signer_param(self.operands(i)[0], seen)
        if instr.op in (Op.COPY_LOC, Op.MOVE_LOC):
            defs = self.defs_of(instr.arg, i)
            return bool(defs) and all(
                not d.is_param and self.derives_from_signer(self.operands(d.site)[0], seen) for d in defs
            )
        return False

    def _is_signer_param(self, value: StackValue, seen: frozenset[int]) -> bool:
        i = value.site
        if i in seen:
            return False
        seen = seen | {i}
        instr = self.function.body[i]
        if instr.op not in (Op.COPY_LOC, Op.MOVE_LOC, Op.BORROW_LOC):
            return False
        defs = self.defs_of(instr.arg, i)
        if not defs:
            return False
        f = self.function
        for d in defs:
            if d.is_param:
                if not is_signer_like(f.local_type(d.local)):
                    return False
            elif not self._is_signer_param(self.operands(d.site)[0], seen):
                return False
        return True
