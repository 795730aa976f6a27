"""Core protocol language: variables, expressions, commands, protocols.

A protocol is a straight-line sequence of commands executed by a fixed
federation of clients.  Memories are partial maps from variables to field
values; BOT marks entries padded after an abort.
"""

from dataclasses import dataclass, field as dc_field
from typing import Optional, Union

from .errors import UsageError, ValidationError

# Variable kinds.
SECRET = "s"
FLIP = "r"
MESG = "m"
REVEAL = "p"
OUT = "out"
GLOBAL = "gv"  # synthetic reconstructed wire value, never appears in protocols

_KINDS = (SECRET, FLIP, MESG, REVEAL, OUT, GLOBAL)


class _Bot:
    """The undefined marker: value of views and outputs never produced."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "bot"


BOT = _Bot()


@dataclass(frozen=True, order=True)
class Var:
    """A protocol variable: kind, name, and owning client.

    Reveals are public (owner None).  Synthetic 'gv' variables name a
    reconstructed wire value and also have owner None.
    """

    kind: str
    name: str
    owner: Optional[int] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UsageError(f"bad variable kind {self.kind!r}")
        if self.kind in (REVEAL, GLOBAL):
            if self.owner is not None:
                raise UsageError(f"{self.kind} variables carry no owner")
        elif self.owner is None:
            raise UsageError(f"{self.kind}[{self.name}] requires an owner")

    def __str__(self):
        if self.kind == REVEAL:
            return f"p[{self.name}]"
        if self.kind == GLOBAL:
            return f"<m[{self.name}]>"
        if self.kind == OUT:
            return f"out@{self.owner}"
        return f"{self.kind}[{self.name}]@{self.owner}"


def parse_var(text: str) -> Var:
    """Parse a variable from its display form, e.g. 'm[z]@2' or 'p[w]'."""
    s = text.strip()
    if s.startswith("<m[") and s.endswith(">") and "]" in s:
        return Var(GLOBAL, s[3 : s.index("]")])
    if s.startswith("out@"):
        return Var(OUT, "", int(s[4:]))
    for kind in (SECRET, FLIP, MESG, REVEAL):
        if s.startswith(kind + "["):
            close = s.index("]")
            name = s[len(kind) + 1 : close]
            rest = s[close + 1 :]
            if kind == REVEAL:
                if rest:
                    raise UsageError(f"reveal variable {text!r} carries no client")
                return Var(REVEAL, name)
            if not rest.startswith("@"):
                raise UsageError(f"missing @client in {text!r}")
            return Var(kind, name, int(rest[1:]))
    raise UsageError(f"cannot parse variable {text!r}")


# --- Expressions -----------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Ref:
    """Reference to s/r/m/p storage; owner is the evaluating client."""

    kind: str
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * and or xor
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class OT:
    """1-of-2 oblivious transfer: receiver's choice selects a sender branch."""

    choice: "Expr"
    receiver: int
    if1: "Expr"
    if0: "Expr"


@dataclass(frozen=True)
class OT4:
    """1-of-4 oblivious transfer with two choice bits.

    rows are selected by (c1, c2): (1,1)->rows[0], (1,0)->rows[1],
    (0,1)->rows[2], (0,0)->rows[3].
    """

    c1: "Expr"
    c2: "Expr"
    receiver: int
    rows: tuple

    def __post_init__(self):
        if len(self.rows) != 4:
            raise UsageError("OT4 requires exactly 4 rows")


Expr = Union[Const, Ref, BinOp, Not, OT, OT4]

BINOPS = ("+", "-", "*", "and", "or", "xor")


# --- Assertion predicates --------------------------------------------------

@dataclass(frozen=True)
class Cmp:
    op: str  # == or !=
    left: Expr
    right: Expr


@dataclass(frozen=True)
class PAnd:
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class POr:
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class PNot:
    operand: "Pred"


Pred = Union[Cmp, PAnd, POr, PNot]


# --- Commands --------------------------------------------------------------

@dataclass(frozen=True)
class MesgSend:
    """m[name]@dest := expr @ src"""

    name: str
    dest: int
    expr: Expr
    src: int


@dataclass(frozen=True)
class RevealCmd:
    """p[name] := expr @ src"""

    name: str
    expr: Expr
    src: int


@dataclass(frozen=True)
class OutputCmd:
    """out@client := expr @ client (computed locally)"""

    client: int
    expr: Expr


@dataclass(frozen=True)
class AssertCmd:
    """assert(pred)@client"""

    pred: Pred
    client: int


Command = Union[MesgSend, RevealCmd, OutputCmd, AssertCmd]


def assigned_var(cmd: Command) -> Optional[Var]:
    if isinstance(cmd, MesgSend):
        return Var(MESG, cmd.name, cmd.dest)
    if isinstance(cmd, RevealCmd):
        return Var(REVEAL, cmd.name)
    if isinstance(cmd, OutputCmd):
        return Var(OUT, "", cmd.client)
    return None


def computing_client(cmd: Command) -> int:
    if isinstance(cmd, MesgSend):
        return cmd.src
    if isinstance(cmd, RevealCmd):
        return cmd.src
    if isinstance(cmd, OutputCmd):
        return cmd.client
    return cmd.client


def expr_vars(e: Expr, client: int) -> set:
    """Variables read when client evaluates e; OT parts resolve per role."""
    out: set = set()
    _expr_vars(e, client, out)
    return out


def _expr_vars(e, client, out):
    if isinstance(e, Const):
        return
    if isinstance(e, Ref):
        owner = None if e.kind == REVEAL else client
        out.add(Var(e.kind, e.name, owner))
    elif isinstance(e, BinOp):
        _expr_vars(e.left, client, out)
        _expr_vars(e.right, client, out)
    elif isinstance(e, Not):
        _expr_vars(e.operand, client, out)
    elif isinstance(e, OT):
        _expr_vars(e.choice, e.receiver, out)
        _expr_vars(e.if1, client, out)
        _expr_vars(e.if0, client, out)
    elif isinstance(e, OT4):
        _expr_vars(e.c1, e.receiver, out)
        _expr_vars(e.c2, e.receiver, out)
        for row in e.rows:
            _expr_vars(row, client, out)
    else:
        raise UsageError(f"not an expression: {e!r}")


def pred_vars(pred: Pred, client: int) -> set:
    if isinstance(pred, Cmp):
        return expr_vars(pred.left, client) | expr_vars(pred.right, client)
    if isinstance(pred, (PAnd, POr)):
        return pred_vars(pred.left, client) | pred_vars(pred.right, client)
    return pred_vars(pred.operand, client)


def command_reads(cmd: Command) -> set:
    if isinstance(cmd, AssertCmd):
        return pred_vars(cmd.pred, cmd.client)
    return expr_vars(cmd.expr, computing_client(cmd))


def _contains_ot(e: Expr) -> bool:
    if isinstance(e, (OT, OT4)):
        return True
    if isinstance(e, BinOp):
        return _contains_ot(e.left) or _contains_ot(e.right)
    if isinstance(e, Not):
        return _contains_ot(e.operand)
    return False


# --- Protocols -------------------------------------------------------------

@dataclass(frozen=True)
class Protocol:
    commands: tuple
    federation: frozenset
    modulus: int = 2

    @staticmethod
    def of(commands, federation=None, modulus=2) -> "Protocol":
        commands = tuple(commands)
        if federation is None:
            feds = set()
            for cmd in commands:
                feds.add(computing_client(cmd))
                v = assigned_var(cmd)
                if v is not None and v.owner is not None:
                    feds.add(v.owner)
            federation = feds or {1}
        return Protocol(commands, frozenset(federation), modulus)

    def assigned(self) -> tuple:
        return tuple(v for v in (assigned_var(c) for c in self.commands) if v is not None)

    def secrets(self) -> tuple:
        return self._reads_of_kind(SECRET)

    def flips(self) -> tuple:
        return self._reads_of_kind(FLIP)

    def _reads_of_kind(self, kind) -> tuple:
        seen = []
        for cmd in self.commands:
            for v in sorted(command_reads(cmd), key=str):
                if v.kind == kind and v not in seen:
                    seen.append(v)
        return tuple(seen)

    def iovars(self) -> tuple:
        """All secret, message, reveal and output variables mentioned."""
        seen = []
        for cmd in self.commands:
            for v in sorted(command_reads(cmd), key=str):
                if v.kind != FLIP and v not in seen:
                    seen.append(v)
            v = assigned_var(cmd)
            if v is not None and v not in seen:
                seen.append(v)
        return tuple(seen)

    def message_vars(self) -> tuple:
        return tuple(v for v in self.iovars() if v.kind == MESG)

    def output_vars(self) -> tuple:
        return tuple(v for v in self.iovars() if v.kind == OUT)

    def reveal_vars(self) -> tuple:
        return tuple(v for v in self.iovars() if v.kind == REVEAL)


@dataclass(frozen=True)
class Partition:
    """Split of the federation into honest and corrupt clients."""

    honest: frozenset
    corrupt: frozenset

    @staticmethod
    def of(federation, corrupt) -> "Partition":
        federation = frozenset(federation)
        corrupt = frozenset(corrupt)
        if not corrupt <= federation:
            raise UsageError(f"corrupt set {set(corrupt)} not within federation")
        return Partition(federation - corrupt, corrupt)


def owned_by(vars_, clients) -> tuple:
    return tuple(v for v in vars_ if v.owner in clients)


def corrupt_views(protocol: Protocol, part: Partition) -> tuple:
    """Views the corrupt coalition receives from honest clients.

    Reveals published by honest clients plus messages sent honest -> corrupt.
    """
    out = []
    for cmd in protocol.commands:
        if isinstance(cmd, RevealCmd) and cmd.src in part.honest:
            out.append(Var(REVEAL, cmd.name))
        elif isinstance(cmd, MesgSend) and cmd.src in part.honest and cmd.dest in part.corrupt:
            out.append(Var(MESG, cmd.name, cmd.dest))
    return tuple(out)


def honest_views(protocol: Protocol, part: Partition) -> tuple:
    """Views honest clients receive from the corrupt coalition."""
    out = []
    for cmd in protocol.commands:
        if isinstance(cmd, RevealCmd) and cmd.src in part.corrupt:
            out.append(Var(REVEAL, cmd.name))
        elif isinstance(cmd, MesgSend) and cmd.src in part.corrupt and cmd.dest in part.honest:
            out.append(Var(MESG, cmd.name, cmd.dest))
    return tuple(out)


def validate(protocol: Protocol, preprocessed=()) -> list:
    """Static checks; returns a list of violation strings (empty when valid).

    preprocessed lists variables supplied by a preprocessing phase; reads of
    those variables need no prior write.
    """
    violations = []
    fed = protocol.federation
    defined = set(preprocessed)
    for i, cmd in enumerate(protocol.commands):
        where = f"command {i}"
        client = computing_client(cmd)
        if client not in fed:
            violations.append(f"{where}: client {client} not in federation")
        target = assigned_var(cmd)
        if target is not None:
            if target.owner is not None and target.owner not in fed:
                violations.append(f"{where}: destination client {target.owner} not in federation")
            if target in defined:
                violations.append(f"{where}: {target} assigned twice")
        for v in sorted(command_reads(cmd), key=str):
            if v.kind in (SECRET, FLIP):
                if v.owner not in fed:
                    violations.append(f"{where}: {v} owned outside federation")
            elif v not in defined:
                violations.append(f"{where}: {v} read before any write")
        if isinstance(cmd, MesgSend):
            if isinstance(cmd.expr, (OT, OT4)):
                recv = cmd.expr.receiver
                if recv != cmd.dest:
                    violations.append(f"{where}: OT receiver {recv} differs from destination {cmd.dest}")
                for part_expr in _ot_parts(cmd.expr):
                    if _contains_ot(part_expr):
                        violations.append(f"{where}: nested OT expression")
            elif _contains_ot(cmd.expr):
                violations.append(f"{where}: OT must be the entire right-hand side of a send")
        elif isinstance(cmd, AssertCmd):
            if any(_contains_ot(e) for e in _pred_exprs(cmd.pred)):
                violations.append(f"{where}: OT not allowed in assertions")
        elif _contains_ot(cmd.expr):
            violations.append(f"{where}: OT must be the entire right-hand side of a send")
        if target is not None:
            defined.add(target)
    return violations


def _ot_parts(e):
    if isinstance(e, OT):
        return (e.choice, e.if1, e.if0)
    return (e.c1, e.c2) + e.rows


def _pred_exprs(pred):
    if isinstance(pred, Cmp):
        return (pred.left, pred.right)
    if isinstance(pred, (PAnd, POr)):
        return _pred_exprs(pred.left) + _pred_exprs(pred.right)
    return _pred_exprs(pred.operand)


# --- Memory helpers --------------------------------------------------------

def mem_union(m1: dict, m2: dict) -> dict:
    """Union of memories; overlapping entries must agree."""
    for k, v in m2.items():
        if k in m1 and m1[k] != v:
            raise UsageError(f"memories disagree at {k}: {m1[k]} vs {v}")
    out = dict(m1)
    out.update(m2)
    return out


def mem_extend(m: dict, var: Var, value) -> dict:
    if var in m:
        raise UsageError(f"{var} already defined")
    out = dict(m)
    out[var] = value
    return out


def mem_restrict(m: dict, vars_) -> dict:
    vs = set(vars_)
    return {k: v for k, v in m.items() if k in vs}


def format_memory(m: dict) -> str:
    """Canonical one-line rendering: var=val pairs sorted lexicographically."""
    return " ".join(f"{v}={m[v]}" for v in sorted(m, key=str))
