"""Resources created on some path and never consumed before ``ret``.

A resource instance comes into existence at a ``pack`` or ``move_from`` of a
struct lacking both copy and drop. It is followed through the stack and
through locals (``st_loc`` / ``move_loc``). It is consumed when it becomes an
operand of ``move_to``, ``unpack``, ``ret`` or any ``call``. Anything else that
swallows it, or overwriting the local that holds it, loses it.

Paths ending in ``abort`` roll the transaction back and are never reported.
"""

from __future__ import annotations

from ..bytecode.model import Op
from ..dataflow import StackValue
from ..package import FunctionContext
from .findings import Check, Confidence, Finding, Severity

_CONSUMERS = frozenset({Op.MOVE_TO, Op.UNPACK, Op.RET, Op.CALL})


def creation_sites(ctx: FunctionContext) -> list[int]:
    return [
        i
        for i, instr in enumerate(ctx.function.body)
        if instr.op in (Op.PACK, Op.MOVE_FROM) and ctx.package.is_resource(instr.arg)
    ]


def leaked_on_path(ctx: FunctionContext, path: tuple[int, ...], sites: set[int]) -> set[int]:
    """Creation sites whose instance is still unconsumed when ``path`` returns."""
    body = ctx.function.body
    carried: dict[StackValue, int] = {}
    held: dict[int, int] = {}
    pending: set[int] = set()
    for b in path:
        for i in ctx.cfg.blocks[b].range:
            instr = body[i]
            moving = [carried.pop(v) for v in ctx.operands(i) if v in carried]
            if instr.op is Op.ST_LOC:
                held.pop(instr.arg, None)
                if moving:
                    held[instr.arg] = moving[0]
            elif instr.op in _CONSUMERS:
                pending.difference_update(moving)
            if instr.op is Op.MOVE_LOC and instr.arg in held:
                carried[StackValue(i, 0)] = held.pop(instr.arg)
            if i in sites:
                carried[StackValue(i, 0)] = i
                pending.add(i)
    return pending


def detect_resource_leak(
    ctx: FunctionContext, back_edge_budget: int = 1, max_paths: int = 4096
) -> list[Finding]:
    if ctx.defuse is None:
        return []
    sites = creation_sites(ctx)
    if not sites:
        return []
    paths = ctx.paths(back_edge_budget, max_paths)
    witness: dict[int, tuple[int, ...]] = {}
    site_set = set(sites)
    for path in paths.paths:
        if ctx.cfg.last_op(path[-1]) is not Op.RET:
            continue
        for site in leaked_on_path(ctx, path, site_set):
            witness.setdefault(site, path)
    confidence = Confidence.MEDIUM if paths.truncated else Confidence.HIGH
    body = ctx.function.body
    return [
        Finding(
            check=Check.RESOURCE_LEAK,
            severity=Severity.HIGH,
            module=ctx.module.id,
            function=ctx.function.name,
            instruction_index=site,
            message=(
                f"resource {body[site].arg.name} created by {body[site].op.value} is not moved, "
                f"stored or destroyed on path {'->'.join(map(str, path))}"
            ),
            confidence=confidence,
            witness_path=path,
        )
        for site, path in sorted(witness.items())
    ]
