"""Binary container (``.mvbc``) and the loader's fallback ladder.

Layout, all counts and integers ULEB128, strings as ULEB128 length + UTF-8::

    "MVSC" 0x01
    module address, module name
    friends    : count, (address, name)*
    structs    : count, (name, ability-mask u8, fields: count, (name, type)*)*
    functions  : count, (name, visibility u8, num_params,
                         locals: count, (name, type)*,
                         returns: count, type*,
                         labels: count, (name, index)*,
                         body: count, instruction*)*

Types are a tag byte (1..6 = u8 u64 u128 bool address signer, 7 = reference
followed by a mutability byte and the inner type, 8 = struct followed by
address, module and name). An instruction is its opcode byte followed by the
operand the opcode requires.
"""

from __future__ import annotations

import dataclasses
import logging

from ..errors import BinaryFormatError, ParseError, UnsupportedChainError
from .asm import parse_text
from .model import (
    BRANCH_OPS,
    IMM_OPS,
    LOCAL_OPS,
    STRUCT_OPS,
    Ability,
    FunctionDef,
    FunctionRef,
    Instruction,
    ModuleDef,
    ModuleId,
    Op,
    PrimType,
    RefType,
    StructDef,
    StructType,
    TypeTag,
    Visibility,
)
from .validate import validate_module

log = logging.getLogger(__name__)

MAGIC = b"MVSC"
VERSION = 1
MOVE_MAGIC = bytes.fromhex("a11ceb0b")

_PRIM_TAGS = {p: i + 1 for i, p in enumerate(PrimType)}
_TAG_PRIMS = {v: k for k, v in _PRIM_TAGS.items()}
_REF_TAG = 7
_STRUCT_TAG = 8
_VIS_CODES = {Visibility.PRIVATE: 0, Visibility.PUBLIC: 1, Visibility.FRIEND: 2}
_CODE_VIS = {v: k for k, v in _VIS_CODES.items()}
_MAX_ULEB_BYTES = 19  # enough for u128


def write_uleb(out: bytearray, value: int) -> None:
    if value < 0:
        raise ValueError("ULEB128 cannot encode negative values")
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


class _Writer:
    def __init__(self) -> None:
        self.buf = bytearray()

    def uleb(self, v: int) -> None:
        write_uleb(self.buf, v)

    def u8(self, v: int) -> None:
        self.buf.append(v)

    def string(self, s: str) -> None:
        data = s.encode("utf-8")
        self.uleb(len(data))
        self.buf += data

    def module_id(self, mid: ModuleId) -> None:
        self.string(mid.address)
        self.string(mid.name)

    def type_tag(self, ty: TypeTag) -> None:
        if isinstance(ty, PrimType):
            self.u8(_PRIM_TAGS[ty])
        elif isinstance(ty, RefType):
            self.u8(_REF_TAG)
            self.u8(1 if ty.mutable else 0)
            self.type_tag(ty.inner)
        else:
            self.u8(_STRUCT_TAG)
            self.module_id(ty.module)
            self.string(ty.name)

    def instruction(self, instr: Instruction) -> None:
        op, arg = instr.op, instr.arg
        self.u8(op.code)
        if op in IMM_OPS or op in LOCAL_OPS:
            self.uleb(arg)
        elif op is Op.LD_ADDR or op in BRANCH_OPS:
            self.string(arg)
        elif op is Op.CALL:
            self.module_id(arg.module)
            self.string(arg.name)
            self.uleb(instr.arity[0])
            self.uleb(instr.arity[1])
        elif op in STRUCT_OPS:
            self.module_id(arg.module)
            self.string(arg.name)
            if op is Op.PACK:
                self.uleb(instr.arity[0])
            elif op is Op.UNPACK:
                self.uleb(instr.arity[1])


def serialize_binary(m: ModuleDef) -> bytes:
    w = _Writer()
    w.buf += MAGIC
    w.u8(VERSION)
    w.module_id(m.id)
    w.uleb(len(m.friends))
    for fr in m.friends:
        w.module_id(fr)
    w.uleb(len(m.structs))
    for s in m.structs:
        w.string(s.name)
        w.u8(sum(a.bit for a in s.abilities))
        w.uleb(len(s.fields))
        for name, ty in s.fields:
            w.string(name)
            w.type_tag(ty)
    w.uleb(len(m.functions))
    for f in m.functions:
        w.string(f.name)
        w.u8(_VIS_CODES[f.visibility])
        w.uleb(f.num_params)
        w.uleb(len(f.locals))
        for name, ty in f.locals:
            w.string(name)
            w.type_tag(ty)
        w.uleb(len(f.returns))
        for ty in f.returns:
            w.type_tag(ty)
        w.uleb(len(f.labels))
        for name, idx in sorted(f.labels.items()):
            w.string(name)
            w.uleb(idx)
        w.uleb(len(f.body))
        for instr in f.body:
            w.instruction(instr)
    return bytes(w.buf)


class _Reader:
    def __init__(self, data: bytes, pos: int = 0) -> None:
        self.data = data
        self.pos = pos

    def fail(self, msg: str) -> BinaryFormatError:
        return BinaryFormatError(f"offset {self.pos}: {msg}")

    @property
    def remaining(self) -> int:
        return len(self.data) - self.pos

    def u8(self) -> int:
        if self.pos >= len(self.data):
            raise self.fail("unexpected end of data")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def uleb(self) -> int:
        value = shift = 0
        for _ in range(_MAX_ULEB_BYTES):
            b = self.u8()
            value |= (b & 0x7F) << shift
            if not b & 0x80:
                return value
            shift += 7
        raise self.fail("ULEB128 value too long")

    def count(self) -> int:
        n = self.uleb()
        if n > self.remaining:
            raise self.fail(f"count {n} exceeds remaining {self.remaining} bytes")
        return n

    def string(self) -> str:
        n = self.count()
        raw = self.data[self.pos : self.pos + n]
        self.pos += n
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise self.fail("invalid UTF-8 in string") from None

    def module_id(self) -> ModuleId:
        return ModuleId(self.string(), self.string())

    def type_tag(self, nested: bool = False) -> TypeTag:
        tag = self.u8()
        if tag in _TAG_PRIMS:
            return _TAG_PRIMS[tag]
        if tag == _REF_TAG and not nested:
            mut = self.u8()
            if mut not in (0, 1):
                raise self.fail("bad mutability flag")
            return RefType(self.type_tag(nested=True), bool(mut))
        if tag == _STRUCT_TAG:
            mid = self.module_id()
            return StructType(mid, self.string())
        raise self.fail(f"bad type tag {tag}")

    def instruction(self) -> Instruction:
        code = self.u8()
        try:
            op = Op.from_code(code)
        except KeyError:
            raise self.fail(f"unknown opcode 0x{code:02x}") from None
        if op in IMM_OPS or op in LOCAL_OPS:
            return Instruction(op, self.uleb())
        if op is Op.LD_ADDR or op in BRANCH_OPS:
            return Instruction(op, self.string())
        if op is Op.CALL:
            mid = self.module_id()
            target = FunctionRef(mid, self.string())
            return Instruction(op, target, (self.uleb(), self.uleb()))
        if op in STRUCT_OPS:
            mid = self.module_id()
            st = StructType(mid, self.string())
            if op is Op.PACK:
                return Instruction(op, st, (self.uleb(), 1))
            if op is Op.UNPACK:
                return Instruction(op, st, (1, self.uleb()))
            return Instruction(op, st)
        return Instruction(op)

    def module(self) -> ModuleDef:
        mid = self.module_id()
        friends = tuple(self.module_id() for _ in range(self.count()))
        structs = []
        for _ in range(self.count()):
            name = self.string()
            mask = self.u8()
            if mask > 0x0F:
                raise self.fail("bad ability mask")
            abilities = frozenset(a for a in Ability if mask & a.bit)
            fields = tuple((self.string(), self.type_tag()) for _ in range(self.count()))
            structs.append(StructDef(name, abilities, fields))
        functions = []
        for _ in range(self.count()):
            name = self.string()
            vis = _CODE_VIS.get(self.u8())
            if vis is None:
                raise self.fail("bad visibility")
            num_params = self.uleb()
            locals_ = tuple((self.string(), self.type_tag()) for _ in range(self.count()))
            returns = tuple(self.type_tag() for _ in range(self.count()))
            labels = {}
            for _ in range(self.count()):
                label = self.string()
                labels[label] = self.uleb()
            body = tuple(self.instruction() for _ in range(self.count()))
            functions.append(FunctionDef(name, vis, num_params, locals_, returns, body, labels))
        return ModuleDef(mid, friends, tuple(structs), tuple(functions))


def _decode_container(data: bytes, version: int, trace: list[str]) -> ModuleDef:
    r = _Reader(data, len(MAGIC) + 1)
    warnings: list[str] = []
    try:
        m = r.module()
        if r.remaining:
            if version == VERSION:
                raise r.fail(f"{r.remaining} trailing byte(s) after module")
            warnings.append(
                f"container version {version}: skipped {r.remaining} byte(s) of unknown trailing data"
            )
        validate_module(m)
    except ParseError as exc:
        exc.trace = list(trace)
        raise
    except Exception as exc:  # defensive: corrupt input must never escape as a crash
        raise BinaryFormatError(f"corrupt module: {exc!r}", trace=trace) from exc
    if warnings:
        for w in warnings:
            log.warning(w)
        m = dataclasses.replace(m, load_warnings=tuple(warnings))
    return m


def parse_binary(data: bytes) -> ModuleDef:
    """Load a module from bytes, trying each supported encoding in turn.

    1. ``MVSC`` + version 1: strict decode, trailing bytes rejected.
    2. ``MVSC`` + newer version: lenient decode, unknown trailing data skipped
       with a warning attached to the module.
    3. Real Move bytecode magic: :class:`UnsupportedChainError`.
    4. Valid UTF-8: parsed as text assembly.
    5. Anything else: :class:`ParseError` carrying the attempted stages.
    """
    trace: list[str] = []
    if not data:
        raise ParseError("empty input", trace=["empty"])
    if data[:4] == MAGIC:
        if len(data) < 5:
            raise BinaryFormatError("truncated header", trace=["mvsc-header"])
        version = data[4]
        if version == VERSION:
            trace.append("mvsc-strict")
            return _decode_container(data, version, trace)
        if version > VERSION:
            trace.append(f"mvsc-v{version}-lenient")
            return _decode_container(data, version, trace)
        raise BinaryFormatError(f"unsupported container version {version}", trace=["mvsc-header"])
    trace.append("mvsc-magic")
    if data[:4] == MOVE_MAGIC:
        trace.append("chain-magic")
        detected = "Move bytecode (A11CEB0B)"
        if len(data) >= 8:
            detected = f"Move bytecode (A11CEB0B) version {int.from_bytes(data[4:8], 'little')}"
        raise UnsupportedChainError(detected, trace=trace)
    trace.append("chain-magic")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        trace.append("utf8-text")
        raise ParseError("unrecognized input: not a known binary format and not UTF-8 text", trace=trace) from None
    trace.append("utf8-text")
    try:
        return parse_text(text)
    except ParseError as exc:
        exc.trace = list(trace)
        raise
