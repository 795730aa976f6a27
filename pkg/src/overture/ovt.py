"""Concrete syntax for protocol files (.ovt).

Commands, one per ';':

    m[NAME]@INT := EXPR @ INT;
    p[NAME]    := EXPR @ INT;
    out@INT    := EXPR @ INT;
    assert(PRED)@INT;

Expressions use atoms s[NAME], r[NAME], m[NAME], p[NAME], integer literals
and true/false, with operators + - * and or xor, unary not, parentheses.
Oblivious transfer (only as the entire right side of a send, computed by
the sending client) is written

    OT(CHOICE @ RECEIVER ; IF1, IF0)
    OT4(C1, C2 @ RECEIVER ; ROW11, ROW10, ROW01, ROW00)

Predicates are comparisons EXPR == EXPR / EXPR != EXPR combined with
and/or/not; comparison operands bind greedily, so combined comparisons
should be parenthesized individually.  '#' starts a comment.
"""

from .errors import ParseError, UsageError
from .lang import (
    AssertCmd, BinOp, Cmp, Const, MesgSend, Not, OT, OT4, OutputCmd, PAnd,
    PNot, POr, Protocol, Ref, RevealCmd,
)
from .lex import TokenStream, tokenize

_PUNCTS = (":=", "==", "!=", "(", ")", "[", "]", "@", ";", ",", "+", "-", "*")
_KEYWORDS = {"and", "or", "xor", "not", "true", "false", "out", "assert", "OT", "OT4"}


def parse_protocol(src: str, modulus: int = 2, federation=None) -> Protocol:
    ts = TokenStream(tokenize(src, _PUNCTS))
    commands = []
    while not ts.at("eof"):
        commands.append(_command(ts))
    return Protocol.of(commands, federation, modulus)


def _name(ts) -> str:
    t = ts.peek()
    if t.kind in ("ident", "int"):
        ts.next()
        return t.value
    raise ts.error(f"expected a name, found {t.value or t.kind!r}")


def _int(ts) -> int:
    return int(ts.eat("int").value)


def _command(ts):
    t = ts.peek()
    if ts.at_word("assert"):
        ts.next()
        ts.eat("punct", "(")
        pred = _pred(ts)
        ts.eat("punct", ")")
        ts.eat("punct", "@")
        client = _int(ts)
        ts.eat("punct", ";")
        return AssertCmd(pred, client)
    if ts.at_word("out"):
        ts.next()
        ts.eat("punct", "@")
        client = _int(ts)
        ts.eat("punct", ":=")
        expr = _expr(ts)
        ts.eat("punct", "@")
        src = _int(ts)
        ts.eat("punct", ";")
        if src != client:
            raise ParseError(f"output for client {client} computed at {src}", t.line, t.col)
        return OutputCmd(client, expr)
    if ts.at_word("m"):
        ts.next()
        ts.eat("punct", "[")
        name = _name(ts)
        ts.eat("punct", "]")
        ts.eat("punct", "@")
        dest = _int(ts)
        ts.eat("punct", ":=")
        expr = _expr(ts)
        ts.eat("punct", "@")
        src = _int(ts)
        ts.eat("punct", ";")
        return MesgSend(name, dest, expr, src)
    if ts.at_word("p"):
        ts.next()
        ts.eat("punct", "[")
        name = _name(ts)
        ts.eat("punct", "]")
        ts.eat("punct", ":=")
        expr = _expr(ts)
        ts.eat("punct", "@")
        src = _int(ts)
        ts.eat("punct", ";")
        return RevealCmd(name, expr, src)
    raise ts.error(f"expected a command, found {t.value or t.kind!r}")


# Expression precedence, loosest first: or | xor + - | and * | not | atoms.

def _expr(ts):
    e = _expr_xor(ts)
    while ts.at_word("or"):
        ts.next()
        e = BinOp("or", e, _expr_xor(ts))
    return e


def _expr_xor(ts):
    e = _expr_and(ts)
    while True:
        if ts.at_word("xor"):
            ts.next()
            e = BinOp("xor", e, _expr_and(ts))
        elif ts.at_punct("+"):
            ts.next()
            e = BinOp("+", e, _expr_and(ts))
        elif ts.at_punct("-"):
            ts.next()
            e = BinOp("-", e, _expr_and(ts))
        else:
            return e


def _expr_and(ts):
    e = _expr_unary(ts)
    while True:
        if ts.at_word("and"):
            ts.next()
            e = BinOp("and", e, _expr_unary(ts))
        elif ts.at_punct("*"):
            ts.next()
            e = BinOp("*", e, _expr_unary(ts))
        else:
            return e


def _expr_unary(ts):
    if ts.at_word("not"):
        ts.next()
        return Not(_expr_unary(ts))
    return _expr_atom(ts)


def _expr_atom(ts):
    t = ts.peek()
    if t.kind == "int":
        ts.next()
        return Const(int(t.value))
    if ts.at_word("true"):
        ts.next()
        return Const(1)
    if ts.at_word("false"):
        ts.next()
        return Const(0)
    if ts.at_word("OT"):
        ts.next()
        ts.eat("punct", "(")
        choice = _expr(ts)
        ts.eat("punct", "@")
        receiver = _int(ts)
        ts.eat("punct", ";")
        if1 = _expr(ts)
        ts.eat("punct", ",")
        if0 = _expr(ts)
        ts.eat("punct", ")")
        return OT(choice, receiver, if1, if0)
    if ts.at_word("OT4"):
        ts.next()
        ts.eat("punct", "(")
        c1 = _expr(ts)
        ts.eat("punct", ",")
        c2 = _expr(ts)
        ts.eat("punct", "@")
        receiver = _int(ts)
        ts.eat("punct", ";")
        rows = [_expr(ts)]
        for _ in range(3):
            ts.eat("punct", ",")
            rows.append(_expr(ts))
        ts.eat("punct", ")")
        return OT4(c1, c2, receiver, tuple(rows))
    if t.kind == "ident" and t.value in ("s", "r", "m", "p"):
        ts.next()
        ts.eat("punct", "[")
        name = _name(ts)
        ts.eat("punct", "]")
        return Ref(t.value, name)
    if ts.at_punct("("):
        ts.next()
        e = _expr(ts)
        ts.eat("punct", ")")
        return e
    raise ts.error(f"expected an expression, found {t.value or t.kind!r}")


def _pred(ts):
    e = _pred_and(ts)
    while ts.at_word("or"):
        ts.next()
        e = POr(e, _pred_and(ts))
    return e


def _pred_and(ts):
    e = _pred_unary(ts)
    while ts.at_word("and"):
        ts.next()
        e = PAnd(e, _pred_unary(ts))
    return e


def _pred_unary(ts):
    if ts.at_word("not"):
        save = ts.save()
        ts.next()
        try:
            return PNot(_pred_unary(ts))
        except ParseError:
            ts.restore(save)
            return _cmp(ts)
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
    return _cmp(ts)


def _cmp(ts):
    left = _expr(ts)
    t = ts.peek()
    if ts.at_punct("==") or ts.at_punct("!="):
        ts.next()
        return Cmp(t.value, left, _expr(ts))
    raise ts.error("expected == or != in predicate")


# --- Formatting -------------------------------------------------------------

_LEVEL = {"or": 1, "xor": 2, "+": 2, "-": 2, "and": 3, "*": 3}


def format_expr(e, min_level: int = 0) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Ref):
        return f"{e.kind}[{e.name}]"
    if isinstance(e, Not):
        s = "not " + format_expr(e.operand, 4)
        return f"({s})" if min_level > 3 else s
    if isinstance(e, BinOp):
        lvl = _LEVEL[e.op]
        s = f"{format_expr(e.left, lvl)} {e.op} {format_expr(e.right, lvl + 1)}"
        return f"({s})" if lvl < min_level else s
    if isinstance(e, OT):
        return (f"OT({format_expr(e.choice)} @ {e.receiver} ; "
                f"{format_expr(e.if1)}, {format_expr(e.if0)})")
    if isinstance(e, OT4):
        rows = ", ".join(format_expr(r) for r in e.rows)
        return (f"OT4({format_expr(e.c1)}, {format_expr(e.c2)} @ {e.receiver} ; {rows})")
    raise UsageError(f"not an expression: {e!r}")


def format_pred(pred, under: bool = False) -> str:
    if isinstance(pred, Cmp):
        s = f"{format_expr(pred.left)} {pred.op} {format_expr(pred.right)}"
        return f"({s})" if under else s
    if isinstance(pred, PAnd):
        return f"{format_pred(pred.left, True)} and {format_pred(pred.right, True)}"
    if isinstance(pred, POr):
        return f"{format_pred(pred.left, True)} or {format_pred(pred.right, True)}"
    if isinstance(pred, PNot):
        return f"not {format_pred(pred.operand, True)}"
    raise UsageError(f"not a predicate: {pred!r}")


def format_command(cmd) -> str:
    if isinstance(cmd, MesgSend):
        return f"m[{cmd.name}]@{cmd.dest} := {format_expr(cmd.expr)} @ {cmd.src};"
    if isinstance(cmd, RevealCmd):
        return f"p[{cmd.name}] := {format_expr(cmd.expr)} @ {cmd.src};"
    if isinstance(cmd, OutputCmd):
        return f"out@{cmd.client} := {format_expr(cmd.expr)} @ {cmd.client};"
    if isinstance(cmd, AssertCmd):
        return f"assert({format_pred(cmd.pred)})@{cmd.client};"
    raise UsageError(f"not a command: {cmd!r}")


def format_protocol(protocol: Protocol) -> str:
    return "\n".join(format_command(c) for c in protocol.commands) + "\n"
