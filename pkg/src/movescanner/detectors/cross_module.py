from __future__ import annotations

from ..bytecode.model import (
    COND_BRANCH_OPS,
    GLOBAL_WRITE_OPS,
    FunctionDef,
    Op,
    PrimType,
    Visibility,
    is_signer_like,
    strip_ref,
)
from ..crossmodule import CallGraph
from ..dataflow import StackValue
from ..package import FunctionContext, Package
from .findings import Check, Confidence, Finding, Severity


def modifies_global_state(g: FunctionDef) -> bool:
    return any(instr.op in GLOBAL_WRITE_OPS for instr in g.body)


def _address_guard_blocks(ctx: FunctionContext) -> set[int]:
    """Blocks ending in a branch on an address (in)equality with an aborting successor."""
    body, g = ctx.function.body, ctx.cfg
    blocks = set()
    for c, instr in enumerate(body):
        if instr.op not in (Op.EQ, Op.NEQ):
            continue
        ops = ctx.operands(c)
        if not all(strip_ref(ctx.value_types.get(v)) is PrimType.ADDRESS for v in ops):
            continue
        use = ctx.defuse.consumer(StackValue(c, 0))
        if use is None or body[use].op not in COND_BRANCH_OPS:
            continue
        bb = g.block_of(use)
        if any(g.contains_op(s, Op.ABORT) for s in g.succs(bb)):
            blocks.add(bb)
    return blocks


def has_access_control(ctx: FunctionContext, site: int) -> bool:
    for _, ty in ctx.function.params:
        if is_signer_like(ty) or ctx.package.is_capability(strip_ref(ty)):
            return True
    if ctx.defuse is None:
        return False
    block = ctx.cfg.block_of(site)
    return any(ctx.cfg.dom.strictly_dominates(bb, block) for bb in _address_guard_blocks(ctx))


def detect_cross_module(package: Package, cg: CallGraph) -> list[Finding]:
    """Public functions calling into another module's global-state writers unguarded.

    Access control means a signer or capability parameter, or an address
    equality check that aborts on failure and dominates the call.
    """
    out = []
    for e in cg.edges:
        caller = package.function(e.caller)
        if caller is None or caller.visibility is not Visibility.PUBLIC:
            continue
        if e.callee.module == e.caller.module:
            continue
        callee = package.function(e.callee)
        if callee is None or not modifies_global_state(callee):
            continue
        ctx = package.context(e.caller.module, e.caller.name)
        if has_access_control(ctx, e.site):
            continue
        out.append(
            Finding(
                check=Check.CROSS_MODULE,
                severity=Severity.HIGH,
                module=e.caller.module,
                function=e.caller.name,
                instruction_index=e.site,
                message=f"public function calls {e.callee}, which writes global state, without access control",
                confidence=Confidence.HIGH,
            )
        )
    return out
