"""Logic-program view of a protocol.

Each storage cell becomes a propositional atom that holds exactly when the
cell carries 1; every command becomes one clause per satisfying assignment
of the cells it reads, with negation marking the zero entries.  Evaluating
the program bottom-up from input facts reproduces a protocol run, which
makes the export a checkable semantics in its own right.
"""

import itertools
from dataclasses import dataclass

from .errors import ParseError, StratificationError, UsageError
from .interp import eval_expr
from .lang import (
    AssertCmd, FLIP, MESG, OUT, Protocol, REVEAL, SECRET, Var, assigned_var,
    command_reads, computing_client,
)

_KIND_PREFIX = {SECRET: "s_", FLIP: "r_", MESG: "m_", OUT: "out_"}


# --- Atom names ----------------------------------------------------------------

def mangle(v: Var) -> str:
    """Injective atom name for a variable."""
    if v.kind == REVEAL:
        return f"p_{v.name}"
    if v.kind == OUT:
        return f"out_c{v.owner}"
    if v.kind in _KIND_PREFIX:
        return f"{_KIND_PREFIX[v.kind]}{v.name}_c{v.owner}"
    raise UsageError(f"no atom name for {v}")


def unmangle(atom: str) -> Var:
    if atom.startswith("p_"):
        return Var(REVEAL, atom[2:])
    if atom.startswith("out_c") and atom[5:].isdigit():
        return Var(OUT, "", int(atom[5:]))
    for kind, prefix in _KIND_PREFIX.items():
        if kind == OUT or not atom.startswith(prefix):
            continue
        rest = atom[len(prefix):]
        i = rest.rfind("_c")
        if i < 0 or not rest[i + 2:].isdigit():
            break
        return Var(kind, rest[:i], int(rest[i + 2:]))
    raise UsageError(f"cannot unmangle atom {atom!r}")


# --- Programs --------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    atom: str
    negated: bool = False

    def __str__(self):
        return f"not {self.atom}" if self.negated else self.atom


@dataclass(frozen=True)
class Clause:
    head: str
    body: tuple = ()

    def __str__(self):
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(str(x) for x in self.body)}."


@dataclass(frozen=True)
class Program:
    clauses: tuple

    def facts(self) -> tuple:
        return tuple(c for c in self.clauses if not c.body)

    def rules(self) -> tuple:
        return tuple(c for c in self.clauses if c.body)


# --- Export ----------------------------------------------------------------------

def to_datalog(protocol: Protocol) -> Program:
    """One clause per satisfying local memory of each command."""
    clauses = []
    for cmd in protocol.commands:
        if isinstance(cmd, AssertCmd):
            raise UsageError("assertions have no clause form")
        target = assigned_var(cmd)
        client = computing_client(cmd)
        reads = sorted(command_reads(cmd), key=str)
        head = mangle(target)
        expr = cmd.expr
        for values in itertools.product(range(protocol.modulus), repeat=len(reads)):
            memory = dict(zip(reads, values))
            if eval_expr(memory, expr, client, protocol.modulus) != 1:
                continue
            body = tuple(Literal(mangle(v), negated=(memory[v] == 0)) for v in reads)
            clauses.append(Clause(head, body))
    return Program(tuple(clauses))


def facts_of(memory: dict) -> Program:
    """Input facts: one bodiless clause per variable holding 1."""
    clauses = [Clause(mangle(v)) for v in sorted(memory, key=str) if memory[v] == 1]
    return Program(tuple(clauses))


# --- Least model with stratified negation ------------------------------------------

def lhm(program: Program, facts: Program = Program(())) -> frozenset:
    """Bottom-up least model; atoms absent from every group read as false.

    Groups follow first-definition order of rule heads.  A body literal may
    only mention facts or heads of strictly earlier groups."""
    model = set(c.head for c in facts.clauses)
    for c in facts.clauses:
        if c.body:
            raise UsageError("facts must not have bodies")
    fact_atoms = set(model)
    group_of, groups = {}, []
    for c in program.rules():
        if c.head in fact_atoms:
            raise StratificationError(f"{c.head} is both a fact and a rule head")
        if c.head not in group_of:
            group_of[c.head] = len(groups)
            groups.append([])
        groups[group_of[c.head]].append(c)
    for i, group in enumerate(groups):
        head = group[0].head
        for c in group:
            for lit in c.body:
                j = group_of.get(lit.atom)
                if j is not None and j >= i:
                    raise StratificationError(
                        f"{lit.atom} used by {head} before it is defined")
        if any(all((lit.atom in model) != lit.negated for lit in c.body)
               for c in group):
            model.add(head)
    return frozenset(model)


def run_datalog(protocol: Protocol, memory: dict) -> frozenset:
    return lhm(to_datalog(protocol), facts_of(memory))


# --- Concrete syntax ------------------------------------------------------------------

def format_program(program: Program) -> str:
    return "".join(f"{c}\n" for c in program.clauses)


def parse_program_dl(text: str) -> Program:
    clauses = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if not line.endswith("."):
            raise ParseError("clause must end with '.'", lineno, len(raw))
        line = line[:-1].strip()
        if ":-" in line:
            head, rest = line.split(":-", 1)
            body = []
            for part in rest.split(","):
                part = part.strip()
                negated = part.startswith("not ")
                atom = part[4:].strip() if negated else part
                if not _atom_ok(atom):
                    raise ParseError(f"bad atom {atom!r}", lineno, 1)
                body.append(Literal(atom, negated))
            if not body:
                raise ParseError("empty body", lineno, 1)
            head = head.strip()
            if not _atom_ok(head):
                raise ParseError(f"bad atom {head!r}", lineno, 1)
            clauses.append(Clause(head, tuple(body)))
        else:
            if not _atom_ok(line):
                raise ParseError(f"bad atom {line!r}", lineno, 1)
            clauses.append(Clause(line))
    return Program(tuple(clauses))


def _atom_ok(atom: str) -> bool:
    return atom != "" and all(c.isalnum() or c == "_" for c in atom) \
        and not atom[0].isdigit()
