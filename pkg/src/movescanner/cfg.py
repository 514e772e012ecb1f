"""Basic blocks, dominators and bounded path enumeration for one function."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .bytecode.model import BLOCK_ENDERS, BRANCH_OPS, COND_BRANCH_OPS, FunctionDef, Op

DEFAULT_BACK_EDGE_BUDGET = 1
DEFAULT_MAX_PATHS = 4096


@dataclass
class BasicBlock:
    id: int
    start: int
    end: int  # exclusive
    successors: list[int] = field(default_factory=list)
    predecessors: list[int] = field(default_factory=list)
    reachable: bool = True

    @property
    def range(self) -> range:
        return range(self.start, self.end)

    def __len__(self) -> int:
        return self.end - self.start


@dataclass
class ControlFlowGraph:
    function: FunctionDef
    blocks: list[BasicBlock]
    back_edges: frozenset[tuple[int, int]] = frozenset()
    dom: DomTree | None = None
    block_of_index: list[int] = field(default_factory=list, repr=False)

    entry = 0

    def block_of(self, index: int) -> int:
        return self.block_of_index[index]

    def succs(self, b: int) -> list[int]:
        return self.blocks[b].successors

    def preds(self, b: int) -> list[int]:
        return self.blocks[b].predecessors

    def edges(self) -> list[tuple[int, int]]:
        return [(b.id, s) for b in self.blocks for s in b.successors]

    def last_op(self, b: int) -> Op:
        return self.function.body[self.blocks[b].end - 1].op

    def is_exit(self, b: int) -> bool:
        return self.last_op(b) in (Op.RET, Op.ABORT)

    def contains_op(self, b: int, op: Op) -> bool:
        body = self.function.body
        return any(body[i].op is op for i in self.blocks[b].range)

    @property
    def unreachable(self) -> list[int]:
        return [b.id for b in self.blocks if not b.reachable]

    def reverse_postorder(self) -> list[int]:
        """Reachable blocks in reverse post-order, successors visited in edge order."""
        seen = {self.entry}
        order: list[int] = []
        stack = [(self.entry, iter(self.succs(self.entry)))]
        while stack:
            b, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                order.append(b)
            elif nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, iter(self.succs(nxt))))
        order.reverse()
        return order


def build_cfg(f: FunctionDef) -> ControlFlowGraph:
    body = f.body
    n = len(body)
    leaders = {0} if n else set()
    for i, instr in enumerate(body):
        if instr.op in BLOCK_ENDERS:
            if instr.op in BRANCH_OPS:
                leaders.add(f.labels[instr.arg])
            if i + 1 < n:
                leaders.add(i + 1)
    starts = sorted(leaders)
    blocks = [
        BasicBlock(id=k, start=s, end=starts[k + 1] if k + 1 < len(starts) else n)
        for k, s in enumerate(starts)
    ]
    block_of_index = [0] * n
    start_to_block = {}
    for b in blocks:
        start_to_block[b.start] = b.id
        for i in b.range:
            block_of_index[i] = b.id

    for b in blocks:
        last = body[b.end - 1]
        fall = b.id + 1 if b.id + 1 < len(blocks) else None
        if last.op is Op.BR:
            targets = [start_to_block[f.labels[last.arg]]]
        elif last.op in COND_BRANCH_OPS:
            targets = [start_to_block[f.labels[last.arg]]]
            if fall is not None:
                targets.append(fall)
        elif last.op in (Op.RET, Op.ABORT):
            targets = []
        else:
            targets = [fall] if fall is not None else []
        for t in targets:
            if t not in b.successors:
                b.successors.append(t)
                blocks[t].predecessors.append(b.id)

    g = ControlFlowGraph(function=f, blocks=blocks, block_of_index=block_of_index)
    if not blocks:
        return g
    reach = set(g.reverse_postorder())
    for b in blocks:
        b.reachable = b.id in reach
    g.dom = dominators(g)
    g.back_edges = frozenset(
        (u, v) for (u, v) in g.edges() if blocks[u].reachable and g.dom.dominates(v, u)
    )
    return g


@dataclass
class DomTree:
    """Immediate dominators; ``idom[entry] == entry`` and unreachable blocks map to None."""

    idom: list[int | None]
    entry: int = 0

    def dominates(self, a: int, b: int) -> bool:
        if self.idom[b] is None:
            return a == b
        while True:
            if a == b:
                return True
            if b == self.entry:
                return False
            b = self.idom[b]

    def strictly_dominates(self, a: int, b: int) -> bool:
        return a != b and self.dominates(a, b)

    def dominators_of(self, b: int) -> set[int]:
        if self.idom[b] is None:
            return {b}
        out = {b}
        while b != self.entry:
            b = self.idom[b]
            out.add(b)
        return out


def dominators(g: ControlFlowGraph) -> DomTree:
    """Iterative dominator fixpoint in reverse post-order (Cooper, Harvey, Kennedy)."""
    rpo = g.reverse_postorder()
    order = {b: i for i, b in enumerate(rpo)}
    idom: list[int | None] = [None] * len(g.blocks)
    idom[g.entry] = g.entry

    def intersect(a: int, b: int) -> int:
        while a != b:
            while order[a] > order[b]:
                a = idom[a]
            while order[b] > order[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for b in rpo[1:]:
            new = None
            for p in g.preds(b):
                if idom[p] is None:
                    continue
                new = p if new is None else intersect(p, new)
            if new is not None and idom[b] != new:
                idom[b] = new
                changed = True
    return DomTree(idom=idom, entry=g.entry)


@dataclass
class PathSet:
    paths: list[tuple[int, ...]]
    truncated: bool = False
    budget_used: int = 0  # DFS edge extensions performed


def enumerate_paths(
    g: ControlFlowGraph,
    back_edge_budget: int = DEFAULT_BACK_EDGE_BUDGET,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> PathSet:
    """Depth-first entry-to-exit paths in successor order.

    Each back edge may be taken at most ``back_edge_budget`` times per path.
    An edge into a block already on the current path is charged the same way
    even if it is not a back edge, so irreducible loops terminate too.
    Enumeration stops, with ``truncated`` set, once ``max_paths`` paths exist.
    """
    if back_edge_budget < 0 or max_paths < 1:
        raise ValueError("back_edge_budget must be >= 0 and max_paths >= 1")
    result = PathSet(paths=[])
    if not g.blocks:
        return result
    path = [g.entry]
    charged = [False]
    on_path = Counter({g.entry: 1})
    used: Counter[tuple[int, int]] = Counter()
    if g.is_exit(g.entry):
        result.paths.append(tuple(path))
        if len(result.paths) >= max_paths:
            result.truncated = True
            return result
    stack = [iter(g.succs(g.entry))]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            b = path.pop()
            on_path[b] -= 1
            if charged.pop():
                used[(path[-1], b)] -= 1
            continue
        edge = (path[-1], nxt)
        budgeted = edge in g.back_edges or on_path[nxt] > 0
        if budgeted and used[edge] >= back_edge_budget:
            continue
        result.budget_used += 1
        path.append(nxt)
        charged.append(budgeted)
        on_path[nxt] += 1
        if budgeted:
            used[edge] += 1
        if g.is_exit(nxt):
            result.paths.append(tuple(path))
            if len(result.paths) >= max_paths:
                result.truncated = True
                break
        stack.append(iter(g.succs(nxt)))
    return result
