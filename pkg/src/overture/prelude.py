"""Metalanguage for generating protocols (.pre files).

A metaprogram is a set of function declarations plus a main expression.
Evaluation is substitution-based, small-step, left-to-right and
deterministic; whenever a command form has reduced all of its parts, the
concrete command is appended to the residual protocol and the form reduces
to unit.  Values are client numbers, strings, field expressions (message
and flip handles are field expressions), unit, and records.

Syntax summary:

    f(a, b) { e }                 function declaration
    let x = e in e                binding; the body extends right across ';'
    e ; e                         sequencing, value of the last expression
    { f1 = e; f2 = e }            record, projection e.f1
    "lit"  e1 ++ e2               strings and concatenation
    m[e]@e := e @ e;              message send (the '@ e' computing client
                                  is optional when the right side is OT4)
    p[e] := e @ e;                reveal
    out@e := e @ e;               output
    assert(PRED)@e;               assertion
    OT4(c1, c2, table, recv, snd) 1-of-4 transfer; table has rows row1..row4
    s[e] r[e] m[e] p[e]           storage references inside field expressions
    true false                    field constants 1 and 0

Field operators follow the protocol syntax: or < xor + - < and * < ++ < not.
"""

from dataclasses import dataclass

from .errors import MetaEvalError, ParseError, UsageError
from .lang import (
    BinOp, Cmp, Const, MesgSend, Not, OT4, OutputCmd, PAnd, PNot, POr,
    Protocol, Ref, RevealCmd, AssertCmd, FLIP, MESG, REVEAL, SECRET,
)
from .lex import TokenStream, tokenize

STEP_LIMIT = 10 ** 6

_PUNCTS = (":=", "==", "!=", "++", "(", ")", "{", "}", "[", "]",
           "@", ";", ",", ".", "=", "+", "-", "*")
_KEYWORDS = {"let", "in", "true", "false", "not", "and", "or", "xor",
             "assert", "out", "OT4"}


# --- Metalanguage AST ---------------------------------------------------------

@dataclass(frozen=True)
class MInt:
    value: int


@dataclass(frozen=True)
class MStr:
    value: str


@dataclass(frozen=True)
class MUnit:
    pass


UNIT = MUnit()


@dataclass(frozen=True)
class MFieldVal:
    """An assembled field expression; sender is set for OT4 values."""

    expr: object
    sender: object = None


@dataclass(frozen=True)
class MPredVal:
    pred: object


@dataclass(frozen=True)
class MVar:
    name: str


@dataclass(frozen=True)
class MLet:
    name: str
    bound: object
    body: object


@dataclass(frozen=True)
class MCall:
    fname: str
    args: tuple


@dataclass(frozen=True)
class MRecord:
    fields: tuple  # pairs (name, expr)


@dataclass(frozen=True)
class MProj:
    record: object
    field: str


@dataclass(frozen=True)
class MConcat:
    left: object
    right: object


@dataclass(frozen=True)
class MSeq:
    first: object
    second: object


@dataclass(frozen=True)
class FERef:
    kind: str
    name: object


@dataclass(frozen=True)
class FEBin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class FENot:
    operand: object


@dataclass(frozen=True)
class FEOT4:
    c1: object
    c2: object
    table: object
    receiver: object
    sender: object


@dataclass(frozen=True)
class FECmp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class FPAnd:
    left: object
    right: object


@dataclass(frozen=True)
class FPOr:
    left: object
    right: object


@dataclass(frozen=True)
class FPNot:
    operand: object


@dataclass(frozen=True)
class CSend:
    name: object
    dest: object
    rhs: object
    src: object  # None when the right side carries its own sender (OT4)


@dataclass(frozen=True)
class CReveal:
    name: object
    rhs: object
    src: object


@dataclass(frozen=True)
class COut:
    client: object
    rhs: object
    src: object


@dataclass(frozen=True)
class CAssert:
    pred: object
    client: object


@dataclass(frozen=True)
class FunDecl:
    name: str
    params: tuple
    body: object


def is_value(e) -> bool:
    if isinstance(e, (MInt, MStr, MUnit, MFieldVal, MPredVal)):
        return True
    if isinstance(e, MRecord):
        return all(is_value(v) for _, v in e.fields)
    return False


# --- Substitution ---------------------------------------------------------------

def subst(e, name: str, value):
    """Capture-free substitution of a closed value for a variable."""
    if isinstance(e, MVar):
        return value if e.name == name else e
    if isinstance(e, (MInt, MStr, MUnit, MFieldVal, MPredVal)):
        return e
    if isinstance(e, MLet):
        bound = subst(e.bound, name, value)
        body = e.body if e.name == name else subst(e.body, name, value)
        return MLet(e.name, bound, body)
    if isinstance(e, MCall):
        return MCall(e.fname, tuple(subst(a, name, value) for a in e.args))
    if isinstance(e, MRecord):
        return MRecord(tuple((f, subst(v, name, value)) for f, v in e.fields))
    if isinstance(e, MProj):
        return MProj(subst(e.record, name, value), e.field)
    if isinstance(e, MConcat):
        return MConcat(subst(e.left, name, value), subst(e.right, name, value))
    if isinstance(e, MSeq):
        return MSeq(subst(e.first, name, value), subst(e.second, name, value))
    if isinstance(e, FERef):
        return FERef(e.kind, subst(e.name, name, value))
    if isinstance(e, FEBin):
        return FEBin(e.op, subst(e.left, name, value), subst(e.right, name, value))
    if isinstance(e, FENot):
        return FENot(subst(e.operand, name, value))
    if isinstance(e, FEOT4):
        return FEOT4(subst(e.c1, name, value), subst(e.c2, name, value),
                     subst(e.table, name, value), subst(e.receiver, name, value),
                     subst(e.sender, name, value))
    if isinstance(e, FECmp):
        return FECmp(e.op, subst(e.left, name, value), subst(e.right, name, value))
    if isinstance(e, FPAnd):
        return FPAnd(subst(e.left, name, value), subst(e.right, name, value))
    if isinstance(e, FPOr):
        return FPOr(subst(e.left, name, value), subst(e.right, name, value))
    if isinstance(e, FPNot):
        return FPNot(subst(e.operand, name, value))
    if isinstance(e, CSend):
        return CSend(subst(e.name, name, value), subst(e.dest, name, value),
                     subst(e.rhs, name, value),
                     None if e.src is None else subst(e.src, name, value))
    if isinstance(e, CReveal):
        return CReveal(subst(e.name, name, value), subst(e.rhs, name, value),
                       subst(e.src, name, value))
    if isinstance(e, COut):
        return COut(subst(e.client, name, value), subst(e.rhs, name, value),
                    subst(e.src, name, value))
    if isinstance(e, CAssert):
        return CAssert(subst(e.pred, name, value), subst(e.client, name, value))
    raise MetaEvalError(f"cannot substitute into {e!r}")


# --- Coercions -------------------------------------------------------------------

def _as_client(v) -> int:
    if isinstance(v, MInt) and v.value >= 1:
        return v.value
    raise MetaEvalError(f"expected a client number, got {_show(v)}")


def _as_name(v) -> str:
    if isinstance(v, MStr):
        return v.value
    raise MetaEvalError(f"expected a name string, got {_show(v)}")


def _as_field_expr(v):
    if isinstance(v, MFieldVal):
        if v.sender is not None:
            raise MetaEvalError("OT4 may only appear as the whole right side of a send")
        return v.expr
    if isinstance(v, MInt):
        if v.value in (0, 1):
            return Const(v.value)
        raise MetaEvalError(f"field constant {v.value} out of range for F_2")
    raise MetaEvalError(f"expected a field expression, got {_show(v)}")


def _show(v) -> str:
    if isinstance(v, MInt):
        return str(v.value)
    if isinstance(v, MStr):
        return f'"{v.value}"'
    if isinstance(v, MUnit):
        return "unit"
    if isinstance(v, MFieldVal):
        from .ovt import format_expr

        return format_expr(v.expr)
    if isinstance(v, MRecord):
        return "{" + "; ".join(f"{f} = {_show(x)}" for f, x in v.fields) + "}"
    return repr(v)


# --- Small-step evaluation --------------------------------------------------------

class _Stuck(MetaEvalError):
    pass


def step_meta(codebase: dict, protocol: list, e):
    """One reduction step; commands emitted by the step are appended to
    protocol, a plain list of commands."""
    return _step(e, codebase, protocol)


def _step(e, cb, out):
    if is_value(e):
        raise _Stuck("value cannot step")
    if isinstance(e, MVar):
        raise MetaEvalError(f"unbound variable {e.name}")
    if isinstance(e, MLet):
        if not is_value(e.bound):
            return MLet(e.name, _step(e.bound, cb, out), e.body)
        return subst(e.body, e.name, e.bound)
    if isinstance(e, MCall):
        args = list(e.args)
        for i, a in enumerate(args):
            if not is_value(a):
                args[i] = _step(a, cb, out)
                return MCall(e.fname, tuple(args))
        decl = cb.get(e.fname)
        if decl is None:
            raise MetaEvalError(f"unknown function {e.fname}")
        if len(decl.params) != len(args):
            raise MetaEvalError(
                f"{e.fname} expects {len(decl.params)} arguments, got {len(args)}")
        body = decl.body
        for param, arg in zip(decl.params, args):
            body = subst(body, param, arg)
        return body
    if isinstance(e, MRecord):
        fields = list(e.fields)
        for i, (f, v) in enumerate(fields):
            if not is_value(v):
                fields[i] = (f, _step(v, cb, out))
                return MRecord(tuple(fields))
        raise _Stuck("record of values")
    if isinstance(e, MProj):
        if not is_value(e.record):
            return MProj(_step(e.record, cb, out), e.field)
        if not isinstance(e.record, MRecord):
            raise MetaEvalError(f"projection .{e.field} of non-record {_show(e.record)}")
        for f, v in e.record.fields:
            if f == e.field:
                return v
        raise MetaEvalError(f"record has no field {e.field}")
    if isinstance(e, MConcat):
        if not is_value(e.left):
            return MConcat(_step(e.left, cb, out), e.right)
        if not is_value(e.right):
            return MConcat(e.left, _step(e.right, cb, out))
        if isinstance(e.left, MStr) and isinstance(e.right, MStr):
            return MStr(e.left.value + e.right.value)
        raise MetaEvalError("++ requires two strings")
    if isinstance(e, MSeq):
        if not is_value(e.first):
            return MSeq(_step(e.first, cb, out), e.second)
        return e.second
    if isinstance(e, FERef):
        if not is_value(e.name):
            return FERef(e.kind, _step(e.name, cb, out))
        return MFieldVal(Ref(e.kind, _as_name(e.name)))
    if isinstance(e, FEBin):
        if not is_value(e.left):
            return FEBin(e.op, _step(e.left, cb, out), e.right)
        if not is_value(e.right):
            return FEBin(e.op, e.left, _step(e.right, cb, out))
        return MFieldVal(BinOp(e.op, _as_field_expr(e.left), _as_field_expr(e.right)))
    if isinstance(e, FENot):
        if not is_value(e.operand):
            return FENot(_step(e.operand, cb, out))
        return MFieldVal(Not(_as_field_expr(e.operand)))
    if isinstance(e, FEOT4):
        parts = [e.c1, e.c2, e.table, e.receiver, e.sender]
        for i, part in enumerate(parts):
            if not is_value(part):
                parts[i] = _step(part, cb, out)
                return FEOT4(*parts)
        c1, c2 = _as_field_expr(e.c1), _as_field_expr(e.c2)
        if not isinstance(e.table, MRecord):
            raise MetaEvalError("OT4 table must be a record")
        rows = {f: v for f, v in e.table.fields}
        if set(rows) != {"row1", "row2", "row3", "row4"}:
            raise MetaEvalError("OT4 table needs fields row1..row4")
        receiver = _as_client(e.receiver)
        sender = _as_client(e.sender)
        node = OT4(c1, c2, receiver,
                   tuple(_as_field_expr(rows[f]) for f in ("row1", "row2", "row3", "row4")))
        return MFieldVal(node, sender=sender)
    if isinstance(e, FECmp):
        if not is_value(e.left):
            return FECmp(e.op, _step(e.left, cb, out), e.right)
        if not is_value(e.right):
            return FECmp(e.op, e.left, _step(e.right, cb, out))
        return MPredVal(Cmp(e.op, _as_field_expr(e.left), _as_field_expr(e.right)))
    if isinstance(e, (FPAnd, FPOr)):
        ctor = PAnd if isinstance(e, FPAnd) else POr
        rebuild = FPAnd if isinstance(e, FPAnd) else FPOr
        if not is_value(e.left):
            return rebuild(_step(e.left, cb, out), e.right)
        if not is_value(e.right):
            return rebuild(e.left, _step(e.right, cb, out))
        if not (isinstance(e.left, MPredVal) and isinstance(e.right, MPredVal)):
            raise MetaEvalError("predicate connective over non-predicates")
        return MPredVal(ctor(e.left.pred, e.right.pred))
    if isinstance(e, FPNot):
        if not is_value(e.operand):
            return FPNot(_step(e.operand, cb, out))
        if not isinstance(e.operand, MPredVal):
            raise MetaEvalError("not over a non-predicate")
        return MPredVal(PNot(e.operand.pred))
    if isinstance(e, CSend):
        parts = [e.name, e.dest, e.rhs] + ([] if e.src is None else [e.src])
        for i, part in enumerate(parts):
            if not is_value(part):
                parts[i] = _step(part, cb, out)
                if e.src is None:
                    return CSend(parts[0], parts[1], parts[2], None)
                return CSend(parts[0], parts[1], parts[2], parts[3])
        name = _as_name(e.name)
        dest = _as_client(e.dest)
        rhs = e.rhs
        if isinstance(rhs, MFieldVal) and rhs.sender is not None:
            src = rhs.sender
            if e.src is not None and _as_client(e.src) != src:
                raise MetaEvalError("send computing client conflicts with OT4 sender")
            expr = rhs.expr
        else:
            if e.src is None:
                raise MetaEvalError("send without a computing client")
            src = _as_client(e.src)
            expr = _as_field_expr(rhs)
        out.append(MesgSend(name, dest, expr, src))
        return UNIT
    if isinstance(e, CReveal):
        parts = [e.name, e.rhs, e.src]
        for i, part in enumerate(parts):
            if not is_value(part):
                parts[i] = _step(part, cb, out)
                return CReveal(*parts)
        out.append(RevealCmd(_as_name(e.name), _as_field_expr(e.rhs), _as_client(e.src)))
        return UNIT
    if isinstance(e, COut):
        parts = [e.client, e.rhs, e.src]
        for i, part in enumerate(parts):
            if not is_value(part):
                parts[i] = _step(part, cb, out)
                return COut(*parts)
        client = _as_client(e.client)
        src = _as_client(e.src)
        if client != src:
            raise MetaEvalError(f"output for client {client} computed at {src}")
        out.append(OutputCmd(client, _as_field_expr(e.rhs)))
        return UNIT
    if isinstance(e, CAssert):
        parts = [e.pred, e.client]
        for i, part in enumerate(parts):
            if not is_value(part):
                parts[i] = _step(part, cb, out)
                return CAssert(*parts)
        if not isinstance(e.pred, MPredVal):
            raise MetaEvalError("assert requires a predicate")
        out.append(AssertCmd(e.pred.pred, _as_client(e.client)))
        return UNIT
    raise MetaEvalError(f"cannot evaluate {e!r}")


def eval_meta(codebase: dict, main, step_limit: int = STEP_LIMIT):
    """Evaluate the main expression to a value; returns (protocol, value).

    The residual protocol grows append-only: commands are emitted in
    evaluation order and never modified.
    """
    commands: list = []
    e = main
    for _ in range(step_limit):
        if is_value(e):
            return Protocol.of(commands, modulus=2), e
        e = _step(e, codebase, commands)
    raise MetaEvalError(f"no value after {step_limit} steps")


# --- Parsing -----------------------------------------------------------------------

def parse_program(src: str):
    """Parse declarations and an optional main expression."""
    ts = TokenStream(tokenize(src, _PUNCTS, strings=True))
    codebase: dict = {}
    main = None
    while not ts.at("eof"):
        decl = _try_decl(ts)
        if decl is not None:
            if decl.name in codebase:
                raise ts.error(f"duplicate declaration of {decl.name}")
            codebase[decl.name] = decl
            continue
        main = _expr(ts)
        if not ts.at("eof"):
            raise ts.error("unexpected input after the main expression")
    return codebase, main


def _try_decl(ts):
    save = ts.save()
    t = ts.peek()
    if t.kind != "ident" or t.value in _KEYWORDS:
        return None
    name = ts.next().value
    if not ts.at_punct("("):
        ts.restore(save)
        return None
    ts.next()
    params = []
    if not ts.at_punct(")"):
        while True:
            p = ts.peek()
            if p.kind != "ident" or p.value in _KEYWORDS:
                ts.restore(save)
                return None
            params.append(ts.next().value)
            if ts.at_punct(","):
                ts.next()
                continue
            break
    if not ts.at_punct(")"):
        ts.restore(save)
        return None
    ts.next()
    if not ts.at_punct("{"):
        ts.restore(save)
        return None
    ts.next()
    body = _expr(ts)
    ts.eat("punct", "}")
    return FunDecl(name, tuple(params), body)


def _expr(ts):
    if ts.at_word("let"):
        ts.next()
        name = ts.eat("ident").value
        if name in _KEYWORDS:
            raise ts.error(f"{name} is a keyword")
        ts.eat("punct", "=")
        bound = _expr(ts)
        ts.eat("ident", "in")
        body = _expr(ts)
        return MLet(name, bound, body)
    return _seq(ts)


def _seq(ts):
    items = [_item(ts)]
    while ts.at_punct(";"):
        ts.next()
        if _starts_item(ts):
            if ts.at_word("let"):
                items.append(_expr(ts))
                break
            items.append(_item(ts))
        else:
            break
    e = items[-1]
    for prev in reversed(items[:-1]):
        e = MSeq(prev, e)
    return e


def _starts_item(ts) -> bool:
    t = ts.peek()
    if t.kind in ("int", "string"):
        return True
    if t.kind == "ident":
        return t.value not in ("in",)
    return t.kind == "punct" and t.value in ("(", "{")


def _item(ts):
    cmd = _try_command(ts)
    if cmd is not None:
        return cmd
    return _opexpr(ts)


def _try_command(ts):
    save = ts.save()
    if ts.at_word("assert"):
        ts.next()
        ts.eat("punct", "(")
        pred = _pred(ts)
        ts.eat("punct", ")")
        ts.eat("punct", "@")
        client = _opexpr(ts)
        return CAssert(pred, client)
    if ts.at_word("out"):
        ts.next()
        ts.eat("punct", "@")
        client = _opexpr(ts)
        ts.eat("punct", ":=")
        rhs = _opexpr(ts)
        ts.eat("punct", "@")
        src = _opexpr(ts)
        return COut(client, rhs, src)
    if ts.at_word("m"):
        ts.next()
        if not ts.at_punct("["):
            ts.restore(save)
            return None
        ts.next()
        name = _expr(ts)
        ts.eat("punct", "]")
        if not ts.at_punct("@"):
            ts.restore(save)
            return None
        ts.next()
        dest = _opexpr(ts)
        if not ts.at_punct(":="):
            ts.restore(save)
            return None
        ts.next()
        rhs = _opexpr(ts)
        src = None
        if ts.at_punct("@"):
            ts.next()
            src = _opexpr(ts)
        return CSend(name, dest, rhs, src)
    if ts.at_word("p"):
        ts.next()
        if not ts.at_punct("["):
            ts.restore(save)
            return None
        ts.next()
        name = _expr(ts)
        ts.eat("punct", "]")
        if not ts.at_punct(":="):
            ts.restore(save)
            return None
        ts.next()
        rhs = _opexpr(ts)
        ts.eat("punct", "@")
        src = _opexpr(ts)
        return CReveal(name, rhs, src)
    return None


def _pred(ts):
    e = _pred_and(ts)
    while ts.at_word("or"):
        ts.next()
        e = FPOr(e, _pred_and(ts))
    return e


def _pred_and(ts):
    e = _pred_unary(ts)
    while ts.at_word("and"):
        ts.next()
        e = FPAnd(e, _pred_unary(ts))
    return e


def _pred_unary(ts):
    if ts.at_word("not"):
        save = ts.save()
        ts.next()
        try:
            return FPNot(_pred_unary(ts))
        except ParseError:
            ts.restore(save)
            return _pred_cmp(ts)
    return _pred_atom(ts)


def _pred_atom(ts):
    if ts.at_punct("("):
        save = ts.save()
        ts.next()
        try:
            inner = _pred(ts)
            ts.eat("punct", ")")
            return inner
        except ParseError:
            ts.restore(save)
    return _pred_cmp(ts)


def _pred_cmp(ts):
    left = _opexpr(ts)
    t = ts.peek()
    if ts.at_punct("==") or ts.at_punct("!="):
        ts.next()
        return FECmp(t.value, left, _opexpr(ts))
    raise ts.error("expected == or != in predicate")


def _opexpr(ts):
    e = _level_xor(ts)
    while ts.at_word("or"):
        ts.next()
        e = FEBin("or", e, _level_xor(ts))
    return e


def _level_xor(ts):
    e = _level_and(ts)
    while True:
        if ts.at_word("xor"):
            ts.next()
            e = FEBin("xor", e, _level_and(ts))
        elif ts.at_punct("+"):
            ts.next()
            e = FEBin("+", e, _level_and(ts))
        elif ts.at_punct("-"):
            ts.next()
            e = FEBin("-", e, _level_and(ts))
        else:
            return e


def _level_and(ts):
    e = _level_concat(ts)
    while True:
        if ts.at_word("and"):
            ts.next()
            e = FEBin("and", e, _level_concat(ts))
        elif ts.at_punct("*"):
            ts.next()
            e = FEBin("*", e, _level_concat(ts))
        else:
            return e


def _level_concat(ts):
    e = _level_unary(ts)
    while ts.at_punct("++"):
        ts.next()
        e = MConcat(e, _level_unary(ts))
    return e


def _level_unary(ts):
    if ts.at_word("not"):
        ts.next()
        return FENot(_level_unary(ts))
    return _postfix(ts)


def _postfix(ts):
    e = _atom(ts)
    while ts.at_punct("."):
        ts.next()
        field = ts.eat("ident").value
        e = MProj(e, field)
    return e


def _atom(ts):
    t = ts.peek()
    if t.kind == "int":
        ts.next()
        return MInt(int(t.value))
    if t.kind == "string":
        ts.next()
        return MStr(t.value)
    if ts.at_word("true"):
        ts.next()
        return MFieldVal(Const(1))
    if ts.at_word("false"):
        ts.next()
        return MFieldVal(Const(0))
    if ts.at_word("OT4"):
        ts.next()
        ts.eat("punct", "(")
        args = [_expr(ts)]
        for _ in range(4):
            ts.eat("punct", ",")
            args.append(_expr(ts))
        ts.eat("punct", ")")
        return FEOT4(*args)
    if t.kind == "ident" and t.value in (SECRET, FLIP, MESG, REVEAL) and \
            ts.tokens[ts.pos + 1].kind == "punct" and ts.tokens[ts.pos + 1].value == "[":
        ts.next()
        ts.next()
        name = _expr(ts)
        ts.eat("punct", "]")
        return FERef(t.value, name)
    if t.kind == "ident" and t.value not in _KEYWORDS:
        ts.next()
        if ts.at_punct("("):
            ts.next()
            args = []
            if not ts.at_punct(")"):
                args.append(_expr(ts))
                while ts.at_punct(","):
                    ts.next()
                    args.append(_expr(ts))
            ts.eat("punct", ")")
            return MCall(t.value, tuple(args))
        return MVar(t.value)
    if ts.at_punct("("):
        ts.next()
        e = _expr(ts)
        ts.eat("punct", ")")
        return e
    if ts.at_punct("{"):
        ts.next()
        fields = []
        while True:
            fname = ts.eat("ident").value
            ts.eat("punct", "=")
            fields.append((fname, _item(ts)))
            if ts.at_punct(";"):
                ts.next()
                if ts.at_punct("}"):
                    break
                continue
            break
        ts.eat("punct", "}")
        return MRecord(tuple(fields))
    raise ts.error(f"expected an expression, found {t.value or t.kind!r}")


# --- Front end ----------------------------------------------------------------------

def expand(src: str, libs=()) -> Protocol:
    """Parse and evaluate a metaprogram (with optional extra codebases)."""
    codebase: dict = {}
    for lib in libs:
        cb, lib_main = parse_program(lib)
        if lib_main is not None:
            raise UsageError("library file contains a main expression")
        for name, decl in cb.items():
            if name in codebase:
                raise UsageError(f"duplicate declaration of {name}")
            codebase[name] = decl
    cb, main = parse_program(src)
    for name, decl in cb.items():
        if name in codebase:
            raise UsageError(f"duplicate declaration of {name}")
        codebase[name] = decl
    if main is None:
        raise UsageError("metaprogram has no main expression")
    protocol, _ = eval_meta(codebase, main)
    return protocol
