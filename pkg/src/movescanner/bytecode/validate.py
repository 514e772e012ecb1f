"""Structural checks applied to every module, whichever loader produced it."""

from __future__ import annotations

from ..errors import StackDisciplineError, ValidationError
from .model import (
    BRANCH_OPS,
    IMM_OPS,
    LOCAL_OPS,
    STRUCT_OPS,
    TERMINATORS,
    FunctionDef,
    FunctionRef,
    ModuleDef,
    ModuleId,
    Op,
    PrimType,
    RefType,
    StructType,
    TypeTag,
    is_identifier,
    normalize_address,
)


def _fail(msg: str, f: FunctionDef | None = None, index: int | None = None) -> ValidationError:
    line = col = None
    if f is not None and index is not None:
        pos = f.position(index)
        if pos:
            line, col = pos
    return ValidationError(msg, line=line, column=col)


def _check_module_id(mid: ModuleId) -> None:
    try:
        ok = normalize_address(mid.address) == mid.address
    except ValueError:
        ok = False
    if not ok or not is_identifier(mid.name):
        raise _fail(f"invalid module id {mid}")


def check_type(ty: TypeTag, where: str, allow_signer: bool = False) -> None:
    if isinstance(ty, RefType):
        if isinstance(ty.inner, RefType):
            raise _fail(f"{where}: reference to reference is not allowed")
        check_type(ty.inner, where, allow_signer=True)
    elif isinstance(ty, StructType):
        _check_module_id(ty.module)
        if not is_identifier(ty.name):
            raise _fail(f"{where}: invalid struct name {ty.name!r}")
    elif isinstance(ty, PrimType):
        if ty is PrimType.SIGNER and not allow_signer:
            raise _fail(f"{where}: signer is only allowed as a parameter or behind a reference")
    else:
        raise _fail(f"{where}: unknown type {ty!r}")


def validate_module(m: ModuleDef, check_stack: bool = True) -> None:
    """Raise ValidationError if ``m`` breaks a format invariant."""
    _check_module_id(m.id)
    for fr in m.friends:
        _check_module_id(fr)

    seen: set[str] = set()
    for s in m.structs:
        if not is_identifier(s.name):
            raise _fail(f"invalid struct name {s.name!r}")
        if s.name in seen:
            raise _fail(f"duplicate struct {s.name}")
        seen.add(s.name)
        names: set[str] = set()
        for fname, fty in s.fields:
            if not is_identifier(fname) or fname in names:
                raise _fail(f"struct {s.name}: bad or duplicate field {fname!r}")
            names.add(fname)
            check_type(fty, f"struct {s.name}.{fname}")

    seen = set()
    for f in m.functions:
        if not is_identifier(f.name):
            raise _fail(f"invalid function name {f.name!r}")
        if f.name in seen:
            raise _fail(f"duplicate function {f.name}")
        seen.add(f.name)
        _validate_function(m, f, check_stack)


def _validate_function(m: ModuleDef, f: FunctionDef, check_stack: bool) -> None:
    if not 0 <= f.num_params <= len(f.locals):
        raise _fail(f"{f.name}: parameter count out of range")
    names: set[str] = set()
    for i, (name, ty) in enumerate(f.locals):
        if not is_identifier(name) or name in names:
            raise _fail(f"{f.name}: bad or duplicate local {name!r}")
        names.add(name)
        check_type(ty, f"{f.name}.{name}", allow_signer=i < f.num_params)
    for ty in f.returns:
        check_type(ty, f"{f.name} return type")
    if not f.body:
        raise _fail(f"{f.name}: empty body")
    n = len(f.body)
    for label, target in f.labels.items():
        if not is_identifier(label):
            raise _fail(f"{f.name}: invalid label {label!r}")
        if not isinstance(target, int) or not 0 <= target < n:
            raise _fail(f"{f.name}: label {label} points outside the body")

    for i, instr in enumerate(f.body):
        _validate_instruction(m, f, i, instr)
    if f.body[-1].op not in TERMINATORS:
        raise _fail(f"{f.name}: body must end with ret, abort or br", f, n - 1)

    if check_stack:
        from ..cfg import build_cfg
        from ..dataflow import link_stack_defs

        try:
            link_stack_defs(f, build_cfg(f))
        except StackDisciplineError as exc:
            pos = f.position(exc.index) if exc.index is not None else None
            if pos:
                exc.line, exc.column = pos
            raise


def _validate_instruction(m: ModuleDef, f: FunctionDef, i: int, instr) -> None:
    op, arg = instr.op, instr.arg
    where = f"{f.name}@{i} {op.value}"
    if op in IMM_OPS:
        if not isinstance(arg, int) or isinstance(arg, bool) or not 0 <= arg <= IMM_OPS[op]:
            raise _fail(f"{where}: immediate out of range", f, i)
    elif op is Op.LD_ADDR:
        try:
            ok = isinstance(arg, str) and normalize_address(arg) == arg
        except ValueError:
            ok = False
        if not ok:
            raise _fail(f"{where}: invalid address operand", f, i)
    elif op in LOCAL_OPS:
        if not isinstance(arg, int) or not 0 <= arg < len(f.locals):
            raise _fail(f"{where}: local index out of range", f, i)
    elif op in BRANCH_OPS:
        if arg not in f.labels:
            raise _fail(f"{where}: branch to missing label {arg!r}", f, i)
    elif op is Op.CALL:
        if not isinstance(arg, FunctionRef) or instr.arity is None:
            raise _fail(f"{where}: call needs a target and an arity", f, i)
        if min(instr.arity) < 0:
            raise _fail(f"{where}: negative arity", f, i)
        if arg.module == m.id:
            callee = m.function(arg.name)
            if callee is None:
                raise _fail(f"{where}: call to undefined function {arg.name}", f, i)
            if instr.arity != (callee.num_params, len(callee.returns)):
                raise _fail(f"{where}: arity does not match the signature of {arg.name}", f, i)
        return
    elif op in STRUCT_OPS:
        if not isinstance(arg, StructType):
            raise _fail(f"{where}: struct operand expected", f, i)
        local = arg.module == m.id
        sdef = m.struct(arg.name) if local else None
        if local and sdef is None:
            raise _fail(f"{where}: unknown struct {arg.name}", f, i)
        if op in (Op.PACK, Op.UNPACK):
            if not local:
                raise _fail(f"{where}: cannot {op.value} a struct of another module", f, i)
            nf = len(sdef.fields)
            want = (nf, 1) if op is Op.PACK else (1, nf)
            if instr.arity != want:
                raise _fail(f"{where}: arity does not match the fields of {arg.name}", f, i)
            return
    elif arg is not None:
        raise _fail(f"{where}: unexpected operand", f, i)
    if instr.arity is not None:
        raise _fail(f"{where}: unexpected arity", f, i)
