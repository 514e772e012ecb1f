"""Independent reference implementations used to check the analyses.

These work on an instruction-level graph built here from scratch and
enumerate paths explicitly with networkx, so they share no code with the
block-level fixpoint solvers they check.
"""

from __future__ import annotations

import networkx as nx

from movescanner.bytecode.model import FunctionDef, Op
from movescanner.dataflow import Definition

READS = {Op.COPY_LOC, Op.MOVE_LOC, Op.BORROW_LOC}


def instruction_graph(f: FunctionDef) -> nx.DiGraph:
    g = nx.DiGraph()
    n = len(f.body)
    g.add_nodes_from(range(n))
    for i, instr in enumerate(f.body):
        if instr.op in (Op.RET, Op.ABORT):
            continue
        if instr.op is Op.BR:
            g.add_edge(i, f.labels[instr.arg])
            continue
        if instr.op in (Op.BR_TRUE, Op.BR_FALSE):
            g.add_edge(i, f.labels[instr.arg])
        if i + 1 < n:
            g.add_edge(i, i + 1)
    return g


def _exits(g: nx.DiGraph) -> list[int]:
    return [v for v in g.nodes if g.out_degree(v) == 0]


def _paths(g: nx.DiGraph, src: int, dst: int) -> list[list[int]]:
    if src == dst:
        return [[src]]
    return [list(p) for p in nx.all_simple_paths(g, src, dst)]


def mop_reaching_before(f: FunctionDef) -> dict[int, set[Definition]]:
    """Union over entry paths of the last definition of each local before each instruction.

    Only instructions reachable from the entry are present in the result.
    """
    g = instruction_graph(f)
    out: dict[int, set[Definition]] = {}
    reachable = nx.descendants(g, 0) | {0}
    for target in reachable:
        facts: set[Definition] = set()
        for path in _paths(g, 0, target):
            last = {p: Definition(p, -1 - p) for p in range(f.num_params)}
            for i in path[:-1]:
                instr = f.body[i]
                if instr.op is Op.ST_LOC:
                    last[instr.arg] = Definition(instr.arg, i)
            facts |= set(last.values())
        out[target] = facts
    return out


def mop_live_after(f: FunctionDef) -> dict[int, set[int]]:
    """Locals read before being written on some path leaving each instruction."""
    g = instruction_graph(f)
    exits = _exits(g)
    out: dict[int, set[int]] = {}
    for start in g.nodes:
        live: set[int] = set()
        succs = list(g.successors(start))
        for s in succs:
            for e in exits:
                if e != s and not nx.has_path(g, s, e):
                    continue
                for path in _paths(g, s, e):
                    written: set[int] = set()
                    for i in path:
                        instr = f.body[i]
                        if instr.op in READS and instr.arg not in written:
                            live.add(instr.arg)
                        elif instr.op is Op.ST_LOC:
                            written.add(instr.arg)
        out[start] = live
    return out


def brute_force_dominators(edges: list[tuple[int, int]], nodes: list[int], entry: int = 0) -> dict[int, set[int]]:
    """dom(b) = intersection of node sets over all simple entry->b paths."""
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    out: dict[int, set[int]] = {}
    for b in nodes:
        paths = _paths(g, entry, b)
        if not paths:
            continue
        common = set(paths[0])
        for p in paths[1:]:
            common &= set(p)
        out[b] = common
    return out


def dag_path_count(edges: list[tuple[int, int]], nodes: list[int], entry: int = 0) -> int:
    """Number of entry-to-exit paths in a DAG, by dynamic programming."""
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    count = {v: 0 for v in nodes}
    count[entry] = 1
    for v in nx.topological_sort(g):
        for w in g.successors(v):
            count[w] += count[v]
    return sum(count[v] for v in nodes if g.out_degree(v) == 0)
