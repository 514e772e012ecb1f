"""Random well-formed functions for property tests and oracles.

Functions are built as a chain of labeled segments. Every branch jumps
forward, so the control flow is acyclic unless ``loops`` is set, in which case
some segments may also jump back to an earlier label.
"""

from __future__ import annotations

import random

from movescanner.bytecode import parse_text

LOCAL_NAMES = ("a", "b", "c", "d")


def _snippet(rng: random.Random, names: list[str]) -> list[str]:
    x, y, z = rng.choice(names), rng.choice(names), rng.choice(names)
    return rng.choice(
        [
            [f"ld_u64 {rng.randrange(100)}", f"st_loc {x}"],
            [f"copy_loc {y}", f"st_loc {x}"],
            [f"copy_loc {y}", "pop"],
            [f"borrow_loc {y}", "pop"],
            [f"move_loc {y}", f"st_loc {x}"],
            [f"copy_loc {y}", f"copy_loc {z}", rng.choice(["add", "lt", "eq"]), "pop"],
            [f"copy_loc {y}", f"copy_loc {z}", "mul", f"st_loc {x}"],
        ]
    )


def random_function_text(
    rng: random.Random,
    max_blocks: int = 6,
    max_locals: int = 4,
    loops: bool = False,
    name: str = "f",
) -> str:
    n_locals = rng.randint(1, max_locals)
    n_params = rng.randint(0, n_locals)
    names = list(LOCAL_NAMES[:n_locals])
    n_blocks = rng.randint(1, max_blocks)
    lines: list[str] = []
    for b in range(n_blocks):
        lines.append(f"L{b}:")
        for _ in range(rng.randint(0, 3)):
            lines += _snippet(rng, names)
        last = b == n_blocks - 1
        later = list(range(b + 1, n_blocks))
        earlier = list(range(0, b + 1)) if loops else []
        kind = rng.random()
        if last:
            lines += ["ret"] if kind < 0.75 else ["ld_u64 1", "abort"]
        elif kind < 0.2:
            pass  # fall through
        elif kind < 0.35:
            lines.append(f"br L{rng.choice(later + earlier)}")
        elif kind < 0.45:
            lines += ["ret"]
        elif kind < 0.5:
            lines += ["ld_u64 2", "abort"]
        else:
            cond = rng.choice(["br_true", "br_false"])
            lines += [f"copy_loc {rng.choice(names)}", "ld_u64 0", "eq", f"{cond} L{rng.choice(later + earlier)}"]
    params = ", ".join(f"{n}: u64" for n in names[:n_params])
    local_decls = [f"    local {n}: u64" for n in names[n_params:]]
    body = [f"    {ln}" if not ln.endswith(":") else ln for ln in lines]
    return "\n".join([f"fun {name}({params}) {{", *local_decls, *body, "}"])


def random_module_text(rng: random.Random, n_functions: int = 1, **kw) -> str:
    parts = ["module 0x7::gen", ""]
    if rng.random() < 0.5:
        parts += ["struct Coin has key, store { value: u64 }", "struct Flag has copy, drop {}", ""]
    for k in range(n_functions):
        parts.append(random_function_text(rng, name=f"f{k}", **kw))
    return "\n".join(parts) + "\n"


def random_function(rng: random.Random, **kw):
    module = parse_text(random_module_text(rng, **kw))
    return module.functions[0]
