"""Worklist dataflow over a function's CFG, and stack-level def-use links.

Two bit-vector style analyses share one round-based worklist solver:
reaching definitions (forward, facts are :class:`Definition`) and live
variables (backward, facts are local indices). Within a round blocks are
visited in reverse post-order for the forward problem and in post-order for
the backward one; unreachable blocks are appended after the reachable ones.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable
from dataclasses import dataclass
from typing import NamedTuple

from .bytecode.model import READ_LOCAL_OPS, FunctionDef, Op, stack_effect
from .cfg import ControlFlowGraph
from .errors import StackDisciplineError


class StackValue(NamedTuple):
    """A value pushed on the evaluation stack: pushing instruction and result slot."""

    site: int
    slot: int = 0


class Definition(NamedTuple):
    """Assignment of ``local`` at ``site``; parameter ``p`` enters at site ``-1 - p``."""

    local: int
    site: int

    @property
    def is_param(self) -> bool:
        return self.site < 0


@dataclass
class DefUseMap:
    # popped operands per instruction, bottom of stack first
    operands: dict[int, tuple[StackValue, ...]]
    consumers: dict[StackValue, int]

    def producers(self, index: int) -> tuple[int, ...]:
        return tuple(v.site for v in self.operands.get(index, ()))

    def consumer(self, value: StackValue) -> int | None:
        return self.consumers.get(value)


def link_stack_defs(f: FunctionDef, g: ControlFlowGraph) -> DefUseMap:
    """Simulate the stack through each block, pairing every pop with its push.

    Raises StackDisciplineError on underflow or when a block ends with values
    still on the stack.
    """
    nrets = len(f.returns)
    operands: dict[int, tuple[StackValue, ...]] = {}
    consumers: dict[StackValue, int] = {}
    for block in g.blocks:
        stack: list[StackValue] = []
        for i in block.range:
            instr = f.body[i]
            pops, pushes = stack_effect(instr, nrets)
            if len(stack) < pops:
                raise StackDisciplineError(
                    f"{f.name}@{i}: stack underflow at {instr.op.value} "
                    f"(needs {pops}, has {len(stack)})",
                    function=f.name,
                    index=i,
                )
            taken = tuple(stack[len(stack) - pops :]) if pops else ()
            if pops:
                del stack[-pops:]
            operands[i] = taken
            for v in taken:
                consumers[v] = i
            stack.extend(StackValue(i, k) for k in range(pushes))
        if stack:
            last = block.end - 1
            raise StackDisciplineError(
                f"{f.name}@{last}: {len(stack)} value(s) left on the stack at the end of block {block.id}",
                function=f.name,
                index=last,
            )
    return DefUseMap(operands=operands, consumers=consumers)


@dataclass
class DataflowResult:
    direction: str  # "forward" | "backward"
    in_facts: list[frozenset]
    out_facts: list[frozenset]
    iterations: int


def _solve(
    g: ControlFlowGraph,
    forward: bool,
    transfer: Callable[[int, frozenset], frozenset],
    boundary: dict[int, frozenset],
) -> DataflowResult:
    n = len(g.blocks)
    rpo = g.reverse_postorder() if n else []
    rest = [b for b in range(n) if b not in set(rpo)]
    order = (rpo if forward else rpo[::-1]) + rest
    meet_from = g.preds if forward else g.succs
    notify = g.succs if forward else g.preds

    before = [frozenset()] * n  # IN for forward, OUT for backward
    after = [frozenset()] * n
    pending = set(range(n))
    rounds = 0
    while pending:
        rounds += 1
        batch = [b for b in order if b in pending]
        pending = set()
        for b in batch:
            acc = set(boundary.get(b, ()))
            for p in meet_from(b):
                # facts from dead predecessors never reach live blocks
                if forward and g.blocks[b].reachable and not g.blocks[p].reachable:
                    continue
                acc |= after[p]
            before[b] = frozenset(acc)
            new = transfer(b, before[b])
            if new != after[b]:
                after[b] = new
                pending.update(notify(b))
    if forward:
        return DataflowResult("forward", before, after, rounds)
    return DataflowResult("backward", after, before, rounds)


def block_definitions(f: FunctionDef, g: ControlFlowGraph) -> list[list[Definition]]:
    return [
        [Definition(f.body[i].arg, i) for i in b.range if f.body[i].op is Op.ST_LOC]
        for b in g.blocks
    ]


def param_definitions(f: FunctionDef) -> frozenset[Definition]:
    return frozenset(Definition(p, -1 - p) for p in range(f.num_params))


def reaching_definitions(f: FunctionDef, g: ControlFlowGraph) -> DataflowResult:
    per_block = block_definitions(f, g)
    by_local: dict[int, set[Definition]] = {}
    for d in param_definitions(f):
        by_local.setdefault(d.local, set()).add(d)
    for defs in per_block:
        for d in defs:
            by_local.setdefault(d.local, set()).add(d)

    gen: list[frozenset[Definition]] = []
    kill: list[frozenset[Definition]] = []
    for defs in per_block:
        last: dict[int, Definition] = {}
        for d in defs:
            last[d.local] = d
        gen.append(frozenset(last.values()))
        killed: set[Definition] = set()
        for local in last:
            killed |= by_local[local]
        kill.append(frozenset(killed - set(last.values())))

    def transfer(b: int, facts: frozenset) -> frozenset:
        return gen[b] | (facts - kill[b])

    boundary = {g.entry: param_definitions(f)} if g.blocks else {}
    return _solve(g, True, transfer, boundary)


def use_def_sets(f: FunctionDef, g: ControlFlowGraph) -> tuple[list[frozenset[int]], list[frozenset[int]]]:
    uses, defs = [], []
    for b in g.blocks:
        u: set[int] = set()
        d: set[int] = set()
        for i in b.range:
            instr = f.body[i]
            if instr.op in READ_LOCAL_OPS and instr.arg not in d:
                u.add(instr.arg)
            elif instr.op is Op.ST_LOC:
                d.add(instr.arg)
        uses.append(frozenset(u))
        defs.append(frozenset(d))
    return uses, defs


def live_variables(f: FunctionDef, g: ControlFlowGraph) -> DataflowResult:
    uses, defs = use_def_sets(f, g)

    def transfer(b: int, facts: frozenset) -> frozenset:
        return uses[b] | (facts - defs[b])

    return _solve(g, False, transfer, {})


def reaching_before(
    result: DataflowResult, f: FunctionDef, g: ControlFlowGraph, index: int
) -> frozenset[Definition]:
    """Definitions reaching the point just before instruction ``index``."""
    b = g.blocks[g.block_of(index)]
    facts = set(result.in_facts[b.id])
    for i in range(b.start, index):
        instr = f.body[i]
        if instr.op is Op.ST_LOC:
            facts = {d for d in facts if d.local != instr.arg}
            facts.add(Definition(instr.arg, i))
    return frozenset(facts)


def live_after(result: DataflowResult, f: FunctionDef, g: ControlFlowGraph, index: int) -> frozenset[int]:
    """Locals live immediately after instruction ``index`` executes."""
    b = g.blocks[g.block_of(index)]
    live = set(result.out_facts[b.id])
    for i in range(b.end - 1, index, -1):
        instr = f.body[i]
        if instr.op is Op.ST_LOC:
            live.discard(instr.arg)
        elif instr.op in READ_LOCAL_OPS:
            live.add(instr.arg)
    return frozenset(live)


def uninitialized_uses(
    result: DataflowResult, f: FunctionDef, g: ControlFlowGraph
) -> Iterable[int]:
    """Indices of reads of a local that no definition reaches, on reachable code."""
    for b in g.blocks:
        if not b.reachable:
            continue
        defined = {d.local for d in result.in_facts[b.id]}
        for i in b.range:
            instr = f.body[i]
            if instr.op in READ_LOCAL_OPS and instr.arg not in defined:
                yield i
            elif instr.op is Op.ST_LOC:
                defined.add(instr.arg)
