"""Unguarded integer arithmetic.

``add``/``sub``/``mul`` may overflow and ``div``/``mod`` may divide by zero.
An operation counts as guarded when a comparison sharing a local ancestor with
one of its operands feeds a conditional branch, one successor of that branch
aborts, and the branch's block strictly dominates the operation's block.
"""

from __future__ import annotations

from ..bytecode.model import COMPARE_OPS, COND_BRANCH_OPS, IMM_OPS, Op
from ..dataflow import StackValue
from ..package import FunctionContext
from .findings import Check, Confidence, Finding, Severity

_SEVERITY = {
    Op.ADD: Severity.MEDIUM,
    Op.SUB: Severity.MEDIUM,
    Op.MUL: Severity.HIGH,
    Op.DIV: Severity.HIGH,
    Op.MOD: Severity.HIGH,
}


def guarding_branches(ctx: FunctionContext) -> list[tuple[int, int]]:
    """(comparison index, branch block) pairs whose branch has an aborting successor."""
    body, g = ctx.function.body, ctx.cfg
    out = []
    for c, instr in enumerate(body):
        if instr.op not in COMPARE_OPS:
            continue
        use = ctx.defuse.consumer(StackValue(c, 0))
        if use is None or body[use].op not in COND_BRANCH_OPS:
            continue
        bb = g.block_of(use)
        if any(g.contains_op(s, Op.ABORT) for s in g.succs(bb)):
            out.append((c, bb))
    return out


def has_bound_check(ctx: FunctionContext, index: int, guards: list[tuple[int, int]] | None = None) -> bool:
    if guards is None:
        guards = guarding_branches(ctx)
    ancestors: set[int] = set()
    for v in ctx.operands(index):
        ancestors |= ctx.local_ancestors(v)
    if not ancestors:
        return False
    block = ctx.cfg.block_of(index)
    for c, bb in guards:
        if not ctx.cfg.dom.strictly_dominates(bb, block):
            continue
        for v in ctx.operands(c):
            if ancestors & ctx.local_ancestors(v):
                return True
    return False


def detect_arith_overflow(ctx: FunctionContext) -> list[Finding]:
    if ctx.defuse is None:
        return []
    body = ctx.function.body
    guards = guarding_branches(ctx)
    out = []
    for i, instr in enumerate(body):
        if instr.op not in _SEVERITY:
            continue
        division = instr.op in (Op.DIV, Op.MOD)
        if division:
            divisor = body[ctx.operands(i)[1].site]
            if divisor.op in IMM_OPS and divisor.arg != 0:
                continue
        if has_bound_check(ctx, i, guards):
            continue
        risk = "division by zero" if division else "overflow"
        out.append(
            Finding(
                check=Check.ARITH_OVERFLOW,
                severity=_SEVERITY[instr.op],
                module=ctx.module.id,
                function=ctx.function.name,
                instruction_index=i,
                message=f"{instr.op.value} without a dominating bound check (possible {risk})",
                confidence=Confidence.HIGH,
            )
        )
    return out
