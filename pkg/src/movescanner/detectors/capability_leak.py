"""Capabilities moving to recipients that are not provably trusted.

Three transfer shapes are examined:

* ``move_to`` of a capability whose address does not come from
  ``signer_addr`` of one of the function's signer parameters;
* a public function returning a capability by value;
* a capability passed by value into another module, unless that module is
  the capability's own or one of its friends.
"""

from __future__ import annotations

from collections.abc import Sequence

from ..bytecode.model import Op, StructType, Visibility
from ..crossmodule import ResourceFlowGraph
from ..package import Package
from .findings import Check, Confidence, Finding, Severity

DEFAULT_SUFFIXES = ("Cap", "Capability")

_LOWER = {Confidence.HIGH: Confidence.MEDIUM, Confidence.MEDIUM: Confidence.LOW, Confidence.LOW: Confidence.LOW}


def _confidence(cap: StructType, suffixes: Sequence[str]) -> Confidence:
    return Confidence.HIGH if any(cap.name.endswith(s) for s in suffixes) else Confidence.MEDIUM


def detect_capability_leak(
    package: Package, rfg: ResourceFlowGraph, suffixes: Sequence[str] = DEFAULT_SUFFIXES
) -> list[Finding]:
    found: dict[str, Finding] = {}

    def report(module, function, index, cap, message, confidence=None):
        fnd = Finding(
            check=Check.CAPABILITY_LEAK,
            severity=Severity.HIGH,
            module=module,
            function=function,
            instruction_index=index,
            message=message,
            confidence=confidence or _confidence(cap, suffixes),
        )
        found.setdefault(fnd.id, fnd)

    for m, f in package.functions():
        ctx = package.context(m.id, f.name)
        if ctx.defuse is not None:
            for i, instr in enumerate(f.body):
                if instr.op is Op.MOVE_TO and package.is_capability(instr.arg):
                    if not ctx.derives_from_signer(ctx.operands(i)[0]):
                        msg = f"capability {instr.arg.name} is published to an address not derived from a signer"
                        report(m.id, f.name, i, instr.arg, msg)
        if f.visibility is Visibility.PUBLIC:
            caps = [t for t in f.returns if package.is_capability(t)]
            if caps:
                for i, instr in enumerate(f.body):
                    if instr.op is Op.RET:
                        msg = f"public function returns capability {caps[0].name} to an arbitrary caller"
                        report(m.id, f.name, i, caps[0], msg)

    for edge in rfg.edges:
        if edge.kind != "arg" or not package.is_capability(edge.resource):
            continue
        owner = edge.resource.module
        if edge.dst == owner or edge.dst in package.typed[owner].friend_list:
            continue
        conf = _confidence(edge.resource, suffixes)
        if edge.external:
            conf = _LOWER[conf]
        caller = edge.site.function
        msg = f"capability {edge.resource.name} passed to {edge.dst}, which is not a friend of {owner}"
        report(caller.module, caller.name, edge.site.site, edge.resource, msg, conf)
    return list(found.values())
