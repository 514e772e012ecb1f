"""In-memory form of a Move-style module.

Everything here is immutable. Equality is structural and ignores source
positions and loader warnings, so a module read from text compares equal to
the same module read back from its binary encoding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_HEX_RE = re.compile(r"0x([0-9a-fA-F]{1,64})\Z")


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.match(text))


def normalize_address(text: str) -> str:
    """Canonical lowercase form with leading zeros stripped: ``0x00A`` -> ``0xa``."""
    m = _HEX_RE.match(text)
    if not m:
        raise ValueError(f"invalid address {text!r}")
    digits = m.group(1).lower().lstrip("0") or "0"
    return "0x" + digits


@dataclass(frozen=True, order=True)
class ModuleId:
    address: str
    name: str

    @classmethod
    def parse(cls, text: str) -> ModuleId:
        addr, sep, name = text.partition("::")
        if not sep or not is_identifier(name):
            raise ValueError(f"invalid module id {text!r}")
        return cls(normalize_address(addr), name)

    def __str__(self) -> str:
        return f"{self.address}::{self.name}"


class Ability(Enum):
    COPY = "copy"
    DROP = "drop"
    STORE = "store"
    KEY = "key"

    @property
    def bit(self) -> int:
        return _ABILITY_BITS[self]


_ABILITY_BITS = {Ability.COPY: 1, Ability.DROP: 2, Ability.STORE: 4, Ability.KEY: 8}


class PrimType(Enum):
    U8 = "u8"
    U64 = "u64"
    U128 = "u128"
    BOOL = "bool"
    ADDRESS = "address"
    SIGNER = "signer"

    def __str__(self) -> str:
        return self.value


INTEGER_TYPES = frozenset({PrimType.U8, PrimType.U64, PrimType.U128})


@dataclass(frozen=True)
class RefType:
    inner: TypeTag
    mutable: bool = False

    def __str__(self) -> str:
        return ("&mut " if self.mutable else "&") + str(self.inner)


@dataclass(frozen=True, order=True)
class StructType:
    """Reference to a struct by defining module and name."""

    module: ModuleId
    name: str

    def __str__(self) -> str:
        return f"{self.module}::{self.name}"


TypeTag = Union[PrimType, RefType, StructType]


def strip_ref(ty: TypeTag | None) -> TypeTag | None:
    return ty.inner if isinstance(ty, RefType) else ty


def is_signer_like(ty: TypeTag | None) -> bool:
    return strip_ref(ty) is PrimType.SIGNER


@dataclass(frozen=True)
class FunctionRef:
    module: ModuleId
    name: str

    def __str__(self) -> str:
        return f"{self.module}::{self.name}"


class Op(Enum):
    """Opcodes, declared in binary-encoding order (first member is 0x01)."""

    LD_U8 = "ld_u8"
    LD_U64 = "ld_u64"
    LD_U128 = "ld_u128"
    LD_TRUE = "ld_true"
    LD_FALSE = "ld_false"
    LD_ADDR = "ld_addr"
    COPY_LOC = "copy_loc"
    MOVE_LOC = "move_loc"
    ST_LOC = "st_loc"
    BORROW_LOC = "borrow_loc"
    READ_REF = "read_ref"
    WRITE_REF = "write_ref"
    POP = "pop"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    MOD = "mod"
    LT = "lt"
    LE = "le"
    GT = "gt"
    GE = "ge"
    EQ = "eq"
    NEQ = "neq"
    NOT = "not"
    AND = "and"
    OR = "or"
    BR = "br"
    BR_TRUE = "br_true"
    BR_FALSE = "br_false"
    RET = "ret"
    ABORT = "abort"
    CALL = "call"
    PACK = "pack"
    UNPACK = "unpack"
    MOVE_TO = "move_to"
    MOVE_FROM = "move_from"
    BORROW_GLOBAL = "borrow_global"
    BORROW_GLOBAL_MUT = "borrow_global_mut"
    EXISTS = "exists"
    SIGNER_ADDR = "signer_addr"

    @property
    def code(self) -> int:
        return _OPCODES[self]

    @classmethod
    def from_code(cls, code: int) -> Op:
        return _BY_CODE[code]


_OPCODES = {op: i + 1 for i, op in enumerate(Op)}
_BY_CODE = {v: k for k, v in _OPCODES.items()}

IMM_OPS = {Op.LD_U8: 0xFF, Op.LD_U64: 2**64 - 1, Op.LD_U128: 2**128 - 1}
LOCAL_OPS = frozenset({Op.COPY_LOC, Op.MOVE_LOC, Op.ST_LOC, Op.BORROW_LOC})
BRANCH_OPS = frozenset({Op.BR, Op.BR_TRUE, Op.BR_FALSE})
COND_BRANCH_OPS = frozenset({Op.BR_TRUE, Op.BR_FALSE})
TERMINATORS = frozenset({Op.RET, Op.ABORT, Op.BR})
BLOCK_ENDERS = BRANCH_OPS | TERMINATORS
STRUCT_OPS = frozenset(
    {
        Op.PACK,
        Op.UNPACK,
        Op.MOVE_TO,
        Op.MOVE_FROM,
        Op.BORROW_GLOBAL,
        Op.BORROW_GLOBAL_MUT,
        Op.EXISTS,
    }
)
GLOBAL_WRITE_OPS = frozenset({Op.MOVE_TO, Op.MOVE_FROM, Op.BORROW_GLOBAL_MUT})
GLOBAL_READ_OPS = frozenset({Op.BORROW_GLOBAL, Op.EXISTS})
ARITH_OPS = frozenset({Op.ADD, Op.SUB, Op.MUL, Op.DIV, Op.MOD})
COMPARE_OPS = frozenset({Op.LT, Op.LE, Op.GT, Op.GE, Op.EQ, Op.NEQ})
READ_LOCAL_OPS = frozenset({Op.COPY_LOC, Op.MOVE_LOC, Op.BORROW_LOC})

# (pops, pushes); call/pack/unpack carry their own arity and ret depends on the signature
_FIXED_EFFECTS = {
    Op.LD_U8: (0, 1),
    Op.LD_U64: (0, 1),
    Op.LD_U128: (0, 1),
    Op.LD_TRUE: (0, 1),
    Op.LD_FALSE: (0, 1),
    Op.LD_ADDR: (0, 1),
    Op.COPY_LOC: (0, 1),
    Op.MOVE_LOC: (0, 1),
    Op.ST_LOC: (1, 0),
    Op.BORROW_LOC: (0, 1),
    Op.READ_REF: (1, 1),
    Op.WRITE_REF: (2, 0),
    Op.POP: (1, 0),
    **{op: (2, 1) for op in ARITH_OPS | COMPARE_OPS | {Op.AND, Op.OR}},
    Op.NOT: (1, 1),
    Op.BR: (0, 0),
    Op.BR_TRUE: (1, 0),
    Op.BR_FALSE: (1, 0),
    Op.ABORT: (1, 0),
    Op.MOVE_TO: (2, 0),
    Op.MOVE_FROM: (1, 1),
    Op.BORROW_GLOBAL: (1, 1),
    Op.BORROW_GLOBAL_MUT: (1, 1),
    Op.EXISTS: (1, 1),
    Op.SIGNER_ADDR: (1, 1),
}


@dataclass(frozen=True)
class Instruction:
    """One stack-machine operation.

    ``arg`` depends on the opcode: an int immediate for ``ld_u*``, an address
    string for ``ld_addr``, a local index for the ``*_loc`` ops, a label name
    for branches, a :class:`FunctionRef` for ``call`` and a
    :class:`StructType` for the struct ops. ``arity`` is ``(pops, pushes)``
    and is only set for ``call``, ``pack`` and ``unpack``.
    """

    op: Op
    arg: object = None
    arity: tuple[int, int] | None = None

    def __str__(self) -> str:
        if self.arg is None:
            return self.op.value
        return f"{self.op.value} {self.arg}"


def stack_effect(instr: Instruction, num_returns: int) -> tuple[int, int]:
    """(pops, pushes) of ``instr`` inside a function returning ``num_returns`` values."""
    if instr.op is Op.RET:
        return (num_returns, 0)
    if instr.arity is not None:
        return instr.arity
    return _FIXED_EFFECTS[instr.op]


@dataclass(frozen=True)
class StructDef:
    name: str
    abilities: frozenset[Ability]
    fields: tuple[tuple[str, TypeTag], ...] = ()

    @property
    def is_resource(self) -> bool:
        return Ability.COPY not in self.abilities and Ability.DROP not in self.abilities

    @property
    def is_capability(self) -> bool:
        return self.is_resource and Ability.STORE in self.abilities


class Visibility(Enum):
    PRIVATE = "private"
    PUBLIC = "public"
    FRIEND = "friend"


@dataclass(frozen=True)
class FunctionDef:
    """A function; the first ``num_params`` entries of ``locals`` are its parameters."""

    name: str
    visibility: Visibility
    num_params: int
    locals: tuple[tuple[str, TypeTag], ...]
    returns: tuple[TypeTag, ...]
    body: tuple[Instruction, ...]
    labels: dict[str, int] = field(default_factory=dict)
    positions: tuple[tuple[int, int], ...] = field(default=(), compare=False, repr=False)

    @property
    def params(self) -> tuple[tuple[str, TypeTag], ...]:
        return self.locals[: self.num_params]

    def local_index(self, name: str) -> int | None:
        for i, (n, _) in enumerate(self.locals):
            if n == name:
                return i
        return None

    def local_type(self, index: int) -> TypeTag:
        return self.locals[index][1]

    def position(self, index: int) -> tuple[int, int] | None:
        if 0 <= index < len(self.positions):
            return self.positions[index]
        return None


@dataclass(frozen=True)
class ModuleDef:
    id: ModuleId
    friends: tuple[ModuleId, ...] = ()
    structs: tuple[StructDef, ...] = ()
    functions: tuple[FunctionDef, ...] = ()
    load_warnings: tuple[str, ...] = field(default=(), compare=False, repr=False)

    def struct(self, name: str) -> StructDef | None:
        for s in self.structs:
            if s.name == name:
                return s
        return None

    def function(self, name: str) -> FunctionDef | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None
