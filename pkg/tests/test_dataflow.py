from __future__ import annotations

import random

import pytest
from conftest import fn
from hypothesis import given, settings
from hypothesis import strategies as st
from randfuncs import random_function

from movescanner.bytecode.model import Instruction, Op
from movescanner.cfg import build_cfg
from movescanner.dataflow import (
    Definition,
    StackValue,
    block_definitions,
    link_stack_defs,
    live_after,
    live_variables,
    reaching_before,
    reaching_definitions,
    uninitialized_uses,
    use_def_sets,
)
from movescanner.errors import StackDisciplineError


def analyses(f):
    g = build_cfg(f)
    return g, reaching_definitions(f, g), live_variables(f, g)


def test_def_use_single_push_pop():
    f = fn("local x: u64\nld_u64 5\nst_loc x\nret")
    du = link_stack_defs(f, build_cfg(f))
    assert du.producers(1) == (0,)
    assert du.consumer(StackValue(0, 0)) == 1


def test_def_use_binary_op():
    f = fn("local c: u64\ncopy_loc a\ncopy_loc b\nadd\nst_loc c\nret", sig="fun f(a: u64, b: u64)")
    du = link_stack_defs(f, build_cfg(f))
    assert du.producers(2) == (0, 1)
    assert du.operands[2] == (StackValue(0, 0), StackValue(1, 0))
    assert du.producers(3) == (2,)


def test_def_use_multi_value_producer():
    f = fn(
        "call two\npop\npop\nret",
        pre="fun two(): (u64, bool) { ld_u64 1; ld_true; ret }",
    )
    du = link_stack_defs(f, build_cfg(f))
    assert du.operands[1] == (StackValue(0, 1),)
    assert du.operands[2] == (StackValue(0, 0),)


def test_value_left_at_block_end_is_rejected():
    # bypass parse-time validation to exercise the linker directly
    f = fn("ld_u64 1\npop\nret")
    bad = f.__class__(
        f.name, f.visibility, f.num_params, f.locals, f.returns,
        (Instruction(Op.LD_U64, 1), Instruction(Op.LD_TRUE), Instruction(Op.BR_TRUE, "end"), Instruction(Op.RET)),
        {"end": 3},
    )
    with pytest.raises(StackDisciplineError) as err:
        link_stack_defs(bad, build_cfg(bad))
    assert err.value.index is not None


def test_straight_line_kill():
    f = fn("local x: u64\nld_u64 1\nst_loc x\nld_u64 2\nst_loc x\ncopy_loc x\npop\nret")
    g, rd, _ = analyses(f)
    assert reaching_before(rd, f, g, 4) == {Definition(0, 3)}


def test_diamond_join_sees_both_arms():
    f = fn(
        """
        local x: u64
        ld_u64 0
        st_loc x
        copy_loc c
        br_false other
        ld_u64 1
        st_loc x
        br join
    other:
        ld_u64 2
        st_loc x
    join:
        copy_loc x
        pop
        ret
        """,
        sig="fun f(c: bool)",
    )
    g, rd, _ = analyses(f)
    join = g.block_of(f.labels["join"])
    facts = rd.in_facts[join]
    assert {Definition(1, 5), Definition(1, 8)} <= facts
    assert Definition(1, 1) not in facts
    assert Definition(0, -1) in facts


def test_loop_head_sees_outer_and_body_defs():
    f = fn(
        """
        local x: u64
        ld_u64 0
        st_loc x
    head:
        copy_loc c
        br_false done
        ld_u64 1
        st_loc x
        br head
    done:
        ret
        """,
        sig="fun f(c: bool)",
    )
    g, rd, _ = analyses(f)
    head = g.block_of(f.labels["head"])
    assert {d for d in rd.in_facts[head] if d.local == 1} == {Definition(1, 1), Definition(1, 5)}


def test_write_only_local_is_never_live():
    f = fn("local x: u64\nld_u64 1\nst_loc x\nret")
    g, _, lv = analyses(f)
    assert all(0 not in facts for facts in lv.in_facts + lv.out_facts)


def test_read_in_both_arms_is_live_out_of_entry():
    f = fn(
        """
        copy_loc c
        br_false other
        copy_loc x
        pop
        ret
    other:
        copy_loc x
        pop
        ret
        """,
        sig="fun f(c: bool, x: u64)",
    )
    g, _, lv = analyses(f)
    assert 1 in lv.out_facts[0]


def test_redefinition_before_use_is_not_live_in():
    f = fn(
        """
        local x: u64
        copy_loc c
        br_false next
        ret
    next:
        ld_u64 1
        st_loc x
        copy_loc x
        pop
        ret
        """,
        sig="fun f(c: bool)",
    )
    g, _, lv = analyses(f)
    b = g.block_of(f.labels["next"])
    assert 1 not in lv.in_facts[b]
    assert 1 not in lv.out_facts[0]


def test_borrow_is_a_use_not_a_definition():
    f = fn("borrow_loc x\npop\nret", sig="fun f(x: u64)")
    g = build_cfg(f)
    uses, defs = use_def_sets(f, g)
    assert uses[0] == {0} and defs[0] == frozenset()
    assert block_definitions(f, g) == [[]]


def test_live_after_accounts_for_later_reads():
    f = fn("local y: u64\ncopy_loc x\nst_loc y\ncopy_loc y\npop\nret", sig="fun f(x: u64)")
    g, _, lv = analyses(f)
    assert live_after(lv, f, g, 1) == {1}
    assert live_after(lv, f, g, 2) == frozenset()


def test_uninitialized_read_detected():
    f = fn("local x: u64\ncopy_loc x\npop\nret")
    g, rd, _ = analyses(f)
    assert list(uninitialized_uses(rd, f, g)) == [0]


def _assert_fixpoint(f, g, rd, lv):
    du_gen = block_definitions(f, g)
    uses, defs = use_def_sets(f, g)
    for b in g.blocks:
        # liveness equations, exactly
        out = set().union(*(lv.in_facts[s] for s in b.successors)) if b.successors else set()
        assert lv.out_facts[b.id] == out
        assert lv.in_facts[b.id] == uses[b.id] | (lv.out_facts[b.id] - defs[b.id])
        # reaching: OUT = gen ∪ (IN − kill)
        last = {}
        for d in du_gen[b.id]:
            last[d.local] = d
        expected = set(last.values()) | {d for d in rd.in_facts[b.id] if d.local not in last}
        assert rd.out_facts[b.id] == expected


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False), st.booleans())
def test_solutions_satisfy_equations(rng: random.Random, loops: bool):
    f = random_function(rng, loops=loops)
    g, rd, lv = analyses(f)
    _assert_fixpoint(f, g, rd, lv)


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False), st.booleans())
def test_iteration_bound(rng: random.Random, loops: bool):
    f = random_function(rng, loops=loops)
    g, rd, lv = analyses(f)
    bound = len(g.blocks) * len(f.locals) + 1
    assert rd.iterations <= bound and lv.iterations <= bound


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False), st.booleans())
def test_producers_precede_consumers(rng: random.Random, loops: bool):
    f = random_function(rng, loops=loops)
    g = build_cfg(f)
    du = link_stack_defs(f, g)
    for consumer, values in du.operands.items():
        for v in values:
            assert v.site < consumer
            assert g.block_of(v.site) == g.block_of(consumer)
