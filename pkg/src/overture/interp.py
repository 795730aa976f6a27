"""Reference interpreter for protocols.

Execution is deterministic given an initial memory holding every secret,
every coin flip, and any preprocessing-dealt values.  An assertion that
fails on an honest client halts the run; views and outputs not yet produced
are padded with BOT.
"""

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

from . import field
from .errors import EvalError, UsageError
from .lang import (
    BOT, AssertCmd, BinOp, Cmp, Const, MesgSend, Not, OT, OT4, OutputCmd, PAnd,
    PNot, POr, Partition, Protocol, Ref, RevealCmd, Var, assigned_var,
    computing_client, expr_vars, REVEAL, SECRET, FLIP, MESG,
)


def eval_expr(m: dict, e, client: int, p: int = 2) -> int:
    """Field value of e as computed by client under memory m."""
    if isinstance(e, Const):
        if not 0 <= e.value < p:
            raise EvalError(f"constant {e.value} out of range for F_{p}")
        return e.value
    if isinstance(e, Ref):
        owner = None if e.kind == REVEAL else client
        var = Var(e.kind, e.name, owner)
        if var not in m:
            raise EvalError(f"{var} unbound")
        v = m[var]
        if v is BOT:
            raise EvalError(f"{var} is undefined (bot)")
        return v
    if isinstance(e, BinOp):
        a = eval_expr(m, e.left, client, p)
        b = eval_expr(m, e.right, client, p)
        if e.op == "+":
            return field.f_add(a, b, p)
        if e.op == "-":
            return field.f_sub(a, b, p)
        if e.op == "*":
            return field.f_mul(a, b, p)
        if p != 2:
            raise EvalError(f"operator {e.op} requires F_2")
        if e.op == "and":
            return field.f_and(a, b)
        if e.op == "or":
            return field.f_or(a, b)
        if e.op == "xor":
            return field.f_xor(a, b)
        raise EvalError(f"unknown operator {e.op}")
    if isinstance(e, Not):
        if p != 2:
            raise EvalError("operator not requires F_2")
        return field.f_not(eval_expr(m, e.operand, client, p))
    if isinstance(e, OT):
        if p != 2:
            raise EvalError("OT requires F_2")
        c = eval_expr(m, e.choice, e.receiver, p)
        return eval_expr(m, e.if1 if c == 1 else e.if0, client, p)
    if isinstance(e, OT4):
        if p != 2:
            raise EvalError("OT4 requires F_2")
        c1 = eval_expr(m, e.c1, e.receiver, p)
        c2 = eval_expr(m, e.c2, e.receiver, p)
        row = {(1, 1): 0, (1, 0): 1, (0, 1): 2, (0, 0): 3}[(c1, c2)]
        return eval_expr(m, e.rows[row], client, p)
    raise EvalError(f"not an expression: {e!r}")


def eval_pred(m: dict, pred, client: int, p: int = 2) -> bool:
    if isinstance(pred, Cmp):
        a = eval_expr(m, pred.left, client, p)
        b = eval_expr(m, pred.right, client, p)
        return (a == b) if pred.op == "==" else (a != b)
    if isinstance(pred, PAnd):
        return eval_pred(m, pred.left, client, p) and eval_pred(m, pred.right, client, p)
    if isinstance(pred, POr):
        return eval_pred(m, pred.left, client, p) or eval_pred(m, pred.right, client, p)
    if isinstance(pred, PNot):
        return not eval_pred(m, pred.operand, client, p)
    raise EvalError(f"not a predicate: {pred!r}")


@dataclass(frozen=True)
class AdversaryStrategy:
    """Rewrites applied to corrupt-computed commands, by command index.

    A replacement expression may reference only corrupt-readable storage
    (variables owned by a corrupt client, and reveals).  View-dependent
    behavior is expressed by the replacement itself: over F_2 any
    deterministic choice made from the visible memory is a truth table,
    hence an expression over the visible variables.  abort_at lists indices
    of the adversary's own assertions where it chooses to halt.
    """

    replacements: tuple = ()  # pairs (command index, expression)
    abort_at: frozenset = frozenset()
    label: str = ""

    def rewrite(self, index: int, expr):
        for i, e in self.replacements:
            if i == index:
                return e
        return expr

    def describe(self) -> str:
        return self.label or (f"rewrites at {sorted(i for i, _ in self.replacements)}"
                              if self.replacements else "identity")


IDENTITY = AdversaryStrategy(label="identity")


def _pad_undefined(m: dict, protocol: Protocol, done: int) -> dict:
    out = dict(m)
    for cmd in protocol.commands[done:]:
        v = assigned_var(cmd)
        if v is not None and v not in out:
            out[v] = BOT
    return out


def step(m: dict, protocol: Protocol):
    """One configuration step: execute the head command.

    Returns (memory, rest-protocol, aborted).  A failed honest assertion
    returns aborted=True with the memory unchanged.
    """
    if not protocol.commands:
        raise UsageError("empty protocol cannot step")
    cmd = protocol.commands[0]
    rest = Protocol(protocol.commands[1:], protocol.federation, protocol.modulus)
    p = protocol.modulus
    if isinstance(cmd, AssertCmd):
        if eval_pred(m, cmd.pred, cmd.client, p):
            return m, rest, False
        return m, rest, True
    value = eval_expr(m, cmd.expr, computing_client(cmd), p)
    var = assigned_var(cmd)
    if var in m:
        raise EvalError(f"{var} assigned twice")
    m2 = dict(m)
    m2[var] = value
    return m2, rest, False


def run(m0: dict, protocol: Protocol) -> dict:
    """Final memory of the run from m0; aborted runs are BOT-padded."""
    m = dict(m0)
    p = protocol.modulus
    for i, cmd in enumerate(protocol.commands):
        if isinstance(cmd, AssertCmd):
            if not eval_pred(m, cmd.pred, cmd.client, p):
                return _pad_undefined(m, protocol, i)
            continue
        value = eval_expr(m, cmd.expr, computing_client(cmd), p)
        var = assigned_var(cmd)
        if var in m:
            raise EvalError(f"{var} assigned twice")
        m[var] = value
    return m


def _check_replacement_visibility(expr, client: int, part: Partition):
    for v in expr_vars(expr, client):
        if v.kind == REVEAL:
            continue
        if v.owner not in part.corrupt:
            raise UsageError(f"adversarial replacement reads honest variable {v}")


def run_adv(m0: dict, protocol: Protocol, strategy: AdversaryStrategy,
            part: Partition) -> dict:
    """Run under an active adversary controlling the corrupt clients.

    Corrupt-computed commands have their expressions replaced through the
    strategy; corrupt assertions are skipped unless the strategy chooses to
    abort there; a failed honest assertion halts with BOT padding.
    """
    m = dict(m0)
    p = protocol.modulus
    for i, cmd in enumerate(protocol.commands):
        client = computing_client(cmd)
        corrupt = client in part.corrupt
        if isinstance(cmd, AssertCmd):
            if corrupt:
                if i in strategy.abort_at:
                    return _pad_undefined(m, protocol, i)
                continue
            if not eval_pred(m, cmd.pred, cmd.client, p):
                return _pad_undefined(m, protocol, i)
            continue
        expr = cmd.expr
        if corrupt:
            expr = strategy.rewrite(i, expr)
            if expr is not cmd.expr:
                _check_replacement_visibility(expr, client, part)
        value = eval_expr(m, expr, client, p)
        var = assigned_var(cmd)
        if var in m:
            raise EvalError(f"{var} assigned twice")
        m[var] = value
    return m
