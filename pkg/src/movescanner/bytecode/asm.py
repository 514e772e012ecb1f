"""Text assembly front-end (``.mvas``) and its canonical printer.

The grammar is documented in docs/FORMAT.md. In short::

    module 0x1::coin
    friend 0x1::bank

    struct Coin has key, store { value: u64 }

    public fun mint(s: &signer, amount: u64): Coin {
        local c: Coin
        copy_loc amount
        pack Coin
        ret
    }

Instructions sit one per line or are separated by ``;``. A line of the form
``name:`` labels the next instruction. ``//`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import AsmSyntaxError, ValidationError
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
    normalize_address,
)
from .validate import validate_module

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<comment>//[^\n]*)
  | (?P<nl>\n|;)
  | (?P<hex>0x[0-9A-Za-z_]*)
  | (?P<int>[0-9][0-9A-Za-z_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>::|->|[:,(){}&])
    """,
    re.VERBOSE,
)

_MNEMONICS = {op.value: op for op in Op}
_PRIMS = {p.value: p for p in PrimType}
_ABILITIES = {a.value: a for a in Ability}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(source: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise AsmSyntaxError(
                f"unexpected character {source[pos]!r}", line=line, column=pos - line_start + 1
            )
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            toks.append(_Tok("nl", text, line, pos - line_start + 1))
            if text == "\n":
                line += 1
                line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, text, line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


@dataclass
class _RawInstr:
    op: Op
    operand: object
    arity: tuple[int, int] | None
    tok: _Tok


@dataclass
class _RawFunction:
    name: str
    visibility: Visibility
    params: list[tuple[str, TypeTag]]
    returns: list[TypeTag]
    locals: list[tuple[str, TypeTag]]
    body: list[_RawInstr]
    labels: dict[str, int]
    tok: _Tok


class _Parser:
    def __init__(self, source: str) -> None:
        self.toks = _tokenize(source)
        self.pos = 0
        self.module: ModuleId | None = None

    # token helpers

    @property
    def tok(self) -> _Tok:
        return self.toks[self.pos]

    def peek(self, offset: int = 1) -> _Tok:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def error(self, msg: str, tok: _Tok | None = None) -> AsmSyntaxError:
        tok = tok or self.tok
        return AsmSyntaxError(msg, line=tok.line, column=tok.col)

    def advance(self) -> _Tok:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("punct", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.advance().text

    def skip_newlines(self) -> None:
        while self.tok.kind == "nl":
            self.pos += 1

    def end_of_line(self) -> None:
        if self.tok.kind == "nl":
            self.skip_newlines()
        elif not self.at("}") and self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")

    def integer(self) -> int:
        t = self.tok
        if t.kind not in ("int", "hex"):
            raise self.error(f"expected integer, found {t.text or 'end of input'!r}")
        self.advance()
        try:
            if t.kind == "hex":
                return int(t.text[2:], 16)
            return int(t.text, 10)
        except ValueError:
            raise self.error(f"malformed integer {t.text!r}", t) from None

    def address(self) -> str:
        t = self.tok
        if t.kind != "hex":
            raise self.error(f"expected address, found {t.text or 'end of input'!r}")
        self.advance()
        try:
            return normalize_address(t.text)
        except ValueError:
            raise self.error(f"malformed address {t.text!r}", t) from None

    def module_id(self) -> ModuleId:
        addr = self.address()
        self.expect("::")
        return ModuleId(addr, self.ident("module name"))

    def qualified(self, what: str) -> tuple[ModuleId, str]:
        """``name`` (this module) or ``0xA::module::name``."""
        if self.tok.kind == "hex":
            mid = self.module_id()
            self.expect("::")
            return mid, self.ident(what)
        return self.module, self.ident(what)

    # grammar

    def parse(self) -> ModuleDef:
        self.skip_newlines()
        if not self.accept("module"):
            raise self.error("expected 'module' declaration")
        self.module = self.module_id()
        self.end_of_line()
        friends: list[ModuleId] = []
        structs: list[StructDef] = []
        raw_functions: list[_RawFunction] = []
        while self.tok.kind != "eof":
            if self.at("fun") or self.at("public") or (self.at("friend") and self.peek().text == "fun"):
                raw_functions.append(self.function_decl())
            elif self.accept("friend"):
                friends.append(self.module_id())
                self.end_of_line()
            elif self.at("struct"):
                structs.append(self.struct_decl())
            else:
                raise self.error(f"unexpected {self.tok.text!r} at module level")
            self.skip_newlines()
        partial = ModuleDef(self.module, tuple(friends), tuple(structs), ())
        functions = tuple(self.lower(partial, rf, raw_functions) for rf in raw_functions)
        return ModuleDef(self.module, tuple(friends), tuple(structs), functions)

    def struct_decl(self) -> StructDef:
        self.expect("struct")
        name = self.ident("struct name")
        abilities: set[Ability] = set()
        if self.accept("has"):
            while True:
                t = self.tok
                word = self.ident("ability")
                if word not in _ABILITIES:
                    raise self.error(f"unknown ability {word!r}", t)
                if _ABILITIES[word] in abilities:
                    raise self.error(f"duplicate ability {word!r}", t)
                abilities.add(_ABILITIES[word])
                if not self.accept(","):
                    break
        self.expect("{")
        fields: list[tuple[str, TypeTag]] = []
        self.skip_newlines()
        while not self.at("}"):
            fname = self.ident("field name")
            self.expect(":")
            fields.append((fname, self.type_tag()))
            self.accept(",")
            self.skip_newlines()
        self.expect("}")
        self.end_of_line()
        return StructDef(name, frozenset(abilities), tuple(fields))

    def type_tag(self) -> TypeTag:
        if self.accept("&"):
            mutable = self.accept("mut")
            if self.at("&"):
                raise self.error("reference to reference is not allowed")
            return RefType(self.type_tag(), mutable)
        if self.tok.kind == "ident" and self.tok.text in _PRIMS:
            return _PRIMS[self.advance().text]
        mid, name = self.qualified("type")
        return StructType(mid, name)

    def function_decl(self) -> _RawFunction:
        vis = Visibility.PRIVATE
        if self.accept("public"):
            vis = Visibility.PUBLIC
        elif self.accept("friend"):
            vis = Visibility.FRIEND
        tok = self.expect("fun")
        name = self.ident("function name")
        self.expect("(")
        params: list[tuple[str, TypeTag]] = []
        while not self.at(")"):
            pname = self.ident("parameter name")
            self.expect(":")
            params.append((pname, self.type_tag()))
            if not self.accept(","):
                break
        self.expect(")")
        returns: list[TypeTag] = []
        if self.accept(":"):
            if self.accept("("):
                while not self.at(")"):
                    returns.append(self.type_tag())
                    if not self.accept(","):
                        break
                self.expect(")")
            else:
                returns.append(self.type_tag())
        self.expect("{")
        self.skip_newlines()
        fn = _RawFunction(name, vis, params, returns, [], [], {}, tok)
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error(f"unterminated body of {name}")
            self.body_item(fn)
        self.expect("}")
        self.end_of_line()
        return fn

    def body_item(self, fn: _RawFunction) -> None:
        t = self.tok
        if t.kind == "ident" and t.text == "local" and self.peek().kind == "ident":
            self.advance()
            lname = self.ident("local name")
            self.expect(":")
            fn.locals.append((lname, self.type_tag()))
            self.end_of_line()
            return
        if t.kind == "ident" and self.peek().text == ":" and self.peek().kind == "punct":
            self.advance()
            self.advance()
            if t.text in fn.labels:
                raise self.error(f"duplicate label {t.text!r}", t)
            fn.labels[t.text] = len(fn.body)
            self.end_of_line()
            return
        word = self.ident("instruction")
        op = _MNEMONICS.get(word)
        if op is None:
            raise self.error(f"unknown mnemonic {word!r}", t)
        operand: object = None
        arity = None
        if op in IMM_OPS:
            operand = self.integer()
        elif op is Op.LD_ADDR:
            operand = self.address()
        elif op in LOCAL_OPS:
            operand = self.ident("local name")
        elif op in BRANCH_OPS:
            operand = self.ident("label")
        elif op is Op.CALL:
            operand = FunctionRef(*self.qualified("function name"))
            if self.accept("("):
                nargs = self.integer()
                self.expect(")")
                nrets = self.integer() if self.accept("->") else 0
                arity = (nargs, nrets)
        elif op in STRUCT_OPS:
            operand = StructType(*self.qualified("struct name"))
        fn.body.append(_RawInstr(op, operand, arity, t))
        self.end_of_line()

    def lower(self, partial: ModuleDef, fn: _RawFunction, all_fns: list[_RawFunction]) -> FunctionDef:
        locals_ = list(fn.params) + fn.locals
        index = {}
        for i, (n, _) in enumerate(locals_):
            if n in index:
                raise self.error(f"duplicate local {n!r} in {fn.name}", fn.tok)
            index[n] = i
        sigs = {f.name: (len(f.params), len(f.returns)) for f in all_fns}
        body: list[Instruction] = []
        for ri in fn.body:
            operand, arity = ri.operand, ri.arity
            if ri.op in LOCAL_OPS:
                if operand not in index:
                    raise self.error(f"unknown local {operand!r}", ri.tok)
                operand = index[operand]
            elif ri.op in BRANCH_OPS:
                if operand not in fn.labels:
                    raise ValidationError(
                        f"branch to missing label {operand!r}", line=ri.tok.line, column=ri.tok.col
                    )
            elif ri.op is Op.CALL:
                if operand.module == self.module:
                    if operand.name not in sigs:
                        raise ValidationError(
                            f"call to undefined function {operand.name!r}",
                            line=ri.tok.line,
                            column=ri.tok.col,
                        )
                    if arity is None:
                        arity = sigs[operand.name]
                elif arity is None:
                    raise self.error(f"call to another module needs an arity: call {operand}(N) -> M", ri.tok)
            elif ri.op in (Op.PACK, Op.UNPACK) and operand.module == self.module:
                sdef = partial.struct(operand.name)
                if sdef is None:
                    raise ValidationError(
                        f"unknown struct {operand.name!r}", line=ri.tok.line, column=ri.tok.col
                    )
                nf = len(sdef.fields)
                arity = (nf, 1) if ri.op is Op.PACK else (1, nf)
            body.append(Instruction(ri.op, operand, arity))
        return FunctionDef(
            name=fn.name,
            visibility=fn.visibility,
            num_params=len(fn.params),
            locals=tuple(locals_),
            returns=tuple(fn.returns),
            body=tuple(body),
            labels=dict(fn.labels),
            positions=tuple((ri.tok.line, ri.tok.col) for ri in fn.body),
        )


def parse_text(source: str, check_stack: bool = True) -> ModuleDef:
    """Parse and validate one text-assembly module."""
    module = _Parser(source).parse()
    validate_module(module, check_stack=check_stack)
    return module


def _type_text(ty: TypeTag, home: ModuleId) -> str:
    if isinstance(ty, RefType):
        return ("&mut " if ty.mutable else "&") + _type_text(ty.inner, home)
    if isinstance(ty, StructType):
        return ty.name if ty.module == home else str(ty)
    return ty.value


def format_text(m: ModuleDef) -> str:
    """Canonical text for ``m``; ``parse_text(format_text(m)) == m``."""
    out = [f"module {m.id}"]
    out += [f"friend {fr}" for fr in m.friends]
    for s in m.structs:
        abilities = [a.value for a in Ability if a in s.abilities]
        has = f" has {', '.join(abilities)}" if abilities else ""
        fields = ", ".join(f"{n}: {_type_text(t, m.id)}" for n, t in s.fields)
        out.append("")
        out.append(f"struct {s.name}{has} {{ {fields} }}" if fields else f"struct {s.name}{has} {{}}")
    for f in m.functions:
        vis = "" if f.visibility is Visibility.PRIVATE else f.visibility.value + " "
        params = ", ".join(f"{n}: {_type_text(t, m.id)}" for n, t in f.params)
        if len(f.returns) == 1:
            ret = ": " + _type_text(f.returns[0], m.id)
        elif f.returns:
            ret = ": (" + ", ".join(_type_text(t, m.id) for t in f.returns) + ")"
        else:
            ret = ""
        out.append("")
        out.append(f"{vis}fun {f.name}({params}){ret} {{")
        for n, t in f.locals[f.num_params :]:
            out.append(f"    local {n}: {_type_text(t, m.id)}")
        by_index: dict[int, list[str]] = {}
        for label, idx in f.labels.items():
            by_index.setdefault(idx, []).append(label)
        for i, instr in enumerate(f.body):
            for label in by_index.get(i, ()):
                out.append(f"  {label}:")
            out.append("    " + _instr_text(instr, f, m.id))
        out.append("}")
    return "\n".join(out) + "\n"


def _instr_text(instr: Instruction, f: FunctionDef, home: ModuleId) -> str:
    op, arg = instr.op, instr.arg
    if arg is None:
        return op.value
    if op in LOCAL_OPS:
        return f"{op.value} {f.locals[arg][0]}"
    if op is Op.CALL:
        if arg.module == home:
            return f"call {arg.name}"
        nargs, nrets = instr.arity
        return f"call {arg}({nargs}) -> {nrets}"
    if op in STRUCT_OPS:
        return f"{op.value} {_type_text(arg, home)}"
    return f"{op.value} {arg}"
