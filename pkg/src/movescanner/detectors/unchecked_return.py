from __future__ import annotations

from ..bytecode.model import Op
from ..dataflow import StackValue
from ..package import FunctionContext
from .findings import Check, Confidence, Finding, Severity


def detect_unchecked_return(ctx: FunctionContext) -> list[Finding]:
    """Calls whose results are popped straight away or stored into a dead local.

    Callees outside the package are skipped: their signature is unknown.
    """
    if ctx.defuse is None:
        return []
    f = ctx.function
    out = []
    for i, instr in enumerate(f.body):
        if instr.op is not Op.CALL or instr.arity[1] == 0:
            continue
        if ctx.package.is_external(instr.arg):
            continue
        popped = dead_store = False
        for k in range(instr.arity[1]):
            c = ctx.defuse.consumer(StackValue(i, k))
            consumer = f.body[c]
            if consumer.op is Op.POP:
                popped = True
            elif consumer.op is Op.ST_LOC and consumer.arg not in ctx.live_after(c):
                dead_store = True
        if popped:
            severity, confidence = Severity.MEDIUM, Confidence.HIGH
            why = "is discarded with pop"
        elif dead_store:
            severity, confidence = Severity.LOW, Confidence.MEDIUM
            why = "is stored into a local that is never read"
        else:
            continue
        out.append(
            Finding(
                check=Check.UNCHECKED_RETURN,
                severity=severity,
                module=ctx.module.id,
                function=f.name,
                instruction_index=i,
                message=f"return value of {instr.arg} {why}",
                confidence=confidence,
            )
        )
    return out
