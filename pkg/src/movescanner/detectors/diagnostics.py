"""Informational findings that are not vulnerabilities.

They are produced whatever checks are enabled, always with severity info.
"""

from __future__ import annotations

from ..bytecode.model import Op, Visibility
from ..dataflow import uninitialized_uses
from ..package import FunctionContext
from .findings import Check, Confidence, Finding, Severity


def _info(ctx: FunctionContext, index: int, message: str) -> Finding:
    return Finding(
        check=Check.DIAGNOSTIC,
        severity=Severity.INFO,
        module=ctx.module.id,
        function=ctx.function.name,
        instruction_index=index,
        message=message,
        confidence=Confidence.HIGH,
    )


def function_diagnostics(ctx: FunctionContext) -> list[Finding]:
    out = []
    if ctx.stack_error is not None:
        idx = ctx.stack_error.index if ctx.stack_error.index is not None else 0
        out.append(_info(ctx, idx, f"stack discipline violated, stack-based checks skipped: {ctx.stack_error.message}"))
    for b in ctx.cfg.unreachable:
        blk = ctx.cfg.blocks[b]
        out.append(_info(ctx, blk.start, f"unreachable block {b} (instructions {blk.start}..{blk.end - 1})"))
    for i in uninitialized_uses(ctx.reaching, ctx.function, ctx.cfg):
        name = ctx.function.locals[ctx.function.body[i].arg][0]
        out.append(_info(ctx, i, f"local {name} may be read before it is assigned"))
    if ctx.function.visibility is Visibility.PUBLIC:
        for i, instr in enumerate(ctx.function.body):
            if instr.op is Op.CALL and ctx.package.is_external(instr.arg):
                out.append(_info(ctx, i, f"call to {instr.arg} outside the package; its body is not analyzed"))
    return out
