"""Hyperproperty checks over exact run distributions.

solve computes, by set algebra over a memory set, the satisfying set of an
expression; folding it over the command list enumerates all runs without
executing them one by one (runs_tt).  The check_* functions decide passive
correctness, noninterference modulo output, gradual release, the AND gate
conditioning conditions, the share-based circuit invariant, cheating
detection, and integrity; every failing verdict carries a witness that can
be recomputed from the distributions.
"""

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional

from . import dist as dist_mod
from .dist import (
    Functionality, Pmf, Preprocessing, UniformPreprocessing, bd, bd_adv,
    bd_domain, default_preprocessing,
)
from .errors import BudgetError, EvalError, UsageError
from .interp import IDENTITY, AdversaryStrategy, run, run_adv
from .lang import (
    BOT, AssertCmd, BinOp, Cmp, Const, FLIP, GLOBAL, MESG, MesgSend, Not, OT,
    OT4, OUT, OutputCmd, PAnd, PNot, POr, Partition, Protocol, REVEAL, Ref,
    RevealCmd, SECRET, Var, assigned_var, computing_client, corrupt_views,
    format_memory, honest_views, mem_restrict, owned_by,
)

# --- Memory sets and solve ---------------------------------------------------

@dataclass(frozen=True)
class MemSet:
    """Set of memories over a fixed domain, as bit masks (var i -> bit i)."""

    domain: tuple
    masks: frozenset

    @staticmethod
    def full(domain) -> "MemSet":
        domain = tuple(domain)
        return MemSet(domain, frozenset(range(2 ** len(domain))))

    @staticmethod
    def of_memories(domain, memories) -> "MemSet":
        domain = tuple(domain)
        masks = set()
        for m in memories:
            masks.add(_mask_of(m, domain))
        return MemSet(domain, frozenset(masks))

    def memories(self):
        for mask in sorted(self.masks):
            yield _memory_of(mask, self.domain)

    def __len__(self):
        return len(self.masks)


def _mask_of(memory: dict, domain) -> int:
    mask = 0
    for i, v in enumerate(domain):
        if memory[v]:
            mask |= 1 << i
    return mask


def _memory_of(mask: int, domain) -> dict:
    return {v: (mask >> i) & 1 for i, v in enumerate(domain)}


def _index(domain) -> dict:
    return {v: i for i, v in enumerate(domain)}


def _sat(index, sigma: frozenset, e, client: int) -> frozenset:
    """Memories of sigma under which the expression evaluates to 1."""
    if isinstance(e, Const):
        if e.value == 1:
            return sigma
        if e.value == 0:
            return frozenset()
        raise EvalError(f"constant {e.value} out of range for F_2")
    if isinstance(e, Ref):
        owner = None if e.kind == REVEAL else client
        var = Var(e.kind, e.name, owner)
        if var not in index:
            raise EvalError(f"{var} unbound")
        bit = 1 << index[var]
        return frozenset(m for m in sigma if m & bit)
    if isinstance(e, BinOp):
        a = _sat(index, sigma, e.left, client)
        b = _sat(index, sigma, e.right, client)
        if e.op in ("+", "-", "xor"):
            return a ^ b
        if e.op in ("*", "and"):
            return a & b
        if e.op == "or":
            return a | b
        raise EvalError(f"unknown operator {e.op}")
    if isinstance(e, Not):
        return sigma - _sat(index, sigma, e.operand, client)
    if isinstance(e, OT):
        c = _sat(index, sigma, e.choice, e.receiver)
        a = _sat(index, sigma, e.if1, client)
        b = _sat(index, sigma, e.if0, client)
        return (c & a) | ((sigma - c) & b)
    if isinstance(e, OT4):
        return _sat_ot4(index, sigma, e.c1, e.c2, e.receiver, e.rows, client)
    raise EvalError(f"not an expression: {e!r}")


def _sat_ot4(index, sigma, c1, c2, receiver, rows, client) -> frozenset:
    a = _sat(index, sigma, c1, receiver)
    b = _sat(index, sigma, c2, receiver)
    na, nb = sigma - a, sigma - b
    r11 = _sat(index, sigma, rows[0], client)
    r10 = _sat(index, sigma, rows[1], client)
    r01 = _sat(index, sigma, rows[2], client)
    r00 = _sat(index, sigma, rows[3], client)
    return (a & b & r11) | (a & nb & r10) | (na & b & r01) | (na & nb & r00)


def _sat_pred(index, sigma: frozenset, pred, client: int) -> frozenset:
    if isinstance(pred, Cmp):
        a = _sat(index, sigma, pred.left, client)
        b = _sat(index, sigma, pred.right, client)
        differ = a ^ b
        return differ if pred.op == "!=" else sigma - differ
    if isinstance(pred, PAnd):
        return _sat_pred(index, sigma, pred.left, client) & _sat_pred(index, sigma, pred.right, client)
    if isinstance(pred, POr):
        return _sat_pred(index, sigma, pred.left, client) | _sat_pred(index, sigma, pred.right, client)
    if isinstance(pred, PNot):
        return sigma - _sat_pred(index, sigma, pred.operand, client)
    raise EvalError(f"not a predicate: {pred!r}")


def solve(mems: MemSet, e, client: int) -> MemSet:
    """Subset of mems under which client evaluates e to 1."""
    return MemSet(mems.domain, _sat(_index(mems.domain), mems.masks, e, client))


def ot4_solve(mems: MemSet, c1, c2, receiver: int, rows, client: int) -> MemSet:
    """solve for a 1-of-4 transfer: choices read at the receiver, rows at
    the computing client."""
    index = _index(mems.domain)
    return MemSet(mems.domain, _sat_ot4(index, mems.masks, c1, c2, receiver, tuple(rows), client))


# --- Truth-table enumeration of runs -----------------------------------------

def runs_tt(protocol: Protocol, preproc: Optional[Preprocessing] = None):
    """All final memories, computed by folding solve over the commands.

    Returns (domain, runs) where runs is a frozenset of (values, bots)
    mask pairs over the domain; bots marks the BOT-padded variables of
    aborted runs.
    """
    if protocol.modulus != 2:
        raise UsageError("runs_tt requires F_2")
    if preproc is None:
        preproc = default_preprocessing(protocol)
    dist_mod._validate_for_bd(protocol, preproc)
    domain = bd_domain(protocol, preproc)
    index = _index(domain)
    flips = protocol.flips()
    alive = set()
    for m in preproc.memories():
        base = _mask_of(m, preproc.domain)
        for tape in range(2 ** len(flips)):
            mask = base
            for i, v in enumerate(flips):
                if (tape >> (len(flips) - 1 - i)) & 1:
                    mask |= 1 << index[v]
            alive.add(mask)
    suffix = [0] * (len(protocol.commands) + 1)
    for i in range(len(protocol.commands) - 1, -1, -1):
        v = assigned_var(protocol.commands[i])
        suffix[i] = suffix[i + 1] | (0 if v is None else 1 << index[v])
    finished = []
    for i, cmd in enumerate(protocol.commands):
        if isinstance(cmd, AssertCmd):
            sat = _sat_pred(index, frozenset(alive), cmd.pred, cmd.client)
            for m in alive - sat:
                finished.append((m, suffix[i]))
            alive = set(sat)
            continue
        bit = 1 << index[assigned_var(cmd)]
        sat = _sat(index, frozenset(alive), cmd.expr, computing_client(cmd))
        alive = {m | bit for m in sat} | (alive - sat)
    runs = frozenset(finished) | {(m, 0) for m in alive}
    return domain, runs


def padded_memory(domain, valmask: int, botmask: int) -> dict:
    out = {}
    for i, v in enumerate(domain):
        if (botmask >> i) & 1:
            out[v] = BOT
        else:
            out[v] = (valmask >> i) & 1
    return out


def comparable(memory: dict) -> frozenset:
    return frozenset((v, x) for v, x in memory.items())


def run_sweep(protocol: Protocol, preproc: Optional[Preprocessing] = None,
              strategy: Optional[AdversaryStrategy] = None,
              part: Optional[Partition] = None) -> list:
    """Final memories from the reference interpreter, one per initial memory."""
    if preproc is None:
        preproc = default_preprocessing(protocol)
    dist_mod._validate_for_bd(protocol, preproc)
    out = []
    for m0 in dist_mod._initial_memories(protocol, preproc):
        if strategy is None:
            out.append(run(m0, protocol))
        else:
            out.append(run_adv(m0, protocol, strategy, part))
    return out


# --- Verdicts ----------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    description: str
    memories: tuple = ()   # pairs (label, memory dict)
    numbers: tuple = ()    # pairs (label, Fraction or int)

    def format(self) -> str:
        lines = [self.description]
        for label, m in self.memories:
            lines.append(f"  {label}: {format_memory(m)}")
        for label, x in self.numbers:
            lines.append(f"  {label} = {x}")
        return "\n".join(lines)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    prop: str
    details: tuple = ()
    witness: Optional[Witness] = None

    def format(self) -> str:
        lines = [f"{self.prop}: {'holds' if self.ok else 'FAILS'}"]
        lines += [f"  {d}" for d in self.details]
        if self.witness is not None:
            lines.append(self.witness.format())
        return "\n".join(lines)


# --- Projected distributions --------------------------------------------------

def projected_bd(protocol: Protocol, vars_, preproc=None, strategy=None,
                 part=None, method: str = "auto", workers: int = 1) -> Pmf:
    """Marginal of the basic distribution over the given variables."""
    if preproc is None:
        preproc = default_preprocessing(protocol)
    vars_ = tuple(dict.fromkeys(vars_))
    total = preproc.count() * protocol.modulus ** len(protocol.flips())
    if method == "auto":
        method = "fold" if (protocol.modulus == 2 and total > 4096) else "interp"
    if method == "fold":
        from . import engine

        dist_mod._validate_for_bd(protocol, preproc)
        table = engine.fold(protocol, preproc, strategy, part)
        return engine.project_pmf(table, vars_)
    p = bd(protocol, preproc, strategy, part, method="interp", workers=workers)
    return p.marginal(vars_)


# --- Passive correctness ------------------------------------------------------

def check_passive_correct(protocol: Protocol, fn: Functionality,
                          preproc=None, method: str = "auto") -> Verdict:
    """Every run computes the functionality of its secrets with probability
    one: outputs equal F(secrets) in each enumerated run, no aborts."""
    prop = "passive-correct"
    if preproc is None:
        preproc = default_preprocessing(protocol)
    dealt = set(v for v in preproc.domain if v.kind == SECRET) | set(protocol.secrets())
    if set(fn.secrets) != dealt:
        raise UsageError("functionality secrets differ from the dealt secrets")
    if set(fn.outputs) != set(protocol.output_vars()):
        raise UsageError("functionality outputs differ from protocol outputs")
    total = preproc.count() * protocol.modulus ** len(protocol.flips())
    if method == "auto":
        method = "fold" if (protocol.modulus == 2 and total > 4096) else "interp"
    if method == "fold":
        return _correct_fold(protocol, fn, preproc, prop)
    for final in run_sweep(protocol, preproc):
        want = fn.apply(final)
        for v, x in want.items():
            if final[v] != x:
                w = Witness(
                    "run output differs from the functionality",
                    memories=(("run", final), ("expected outputs", want)),
                )
                return Verdict(False, prop, (), w)
    return Verdict(True, prop, (f"all {total} runs agree with the functionality",))


def _correct_fold(protocol, fn, preproc, prop):
    import numpy as np

    from . import engine

    dist_mod._validate_for_bd(protocol, preproc)
    table = engine.fold(protocol, preproc)
    idx = np.zeros(table.nrows, dtype=np.uint64)
    for i, s in enumerate(fn.secrets):
        idx |= table.cols[s].astype(np.uint64) << np.uint64(i)
    bad = ~table.alive
    for j, out_var in enumerate(fn.outputs):
        lut = np.zeros(2 ** len(fn.secrets), dtype=np.uint8)
        for key, out_key in fn.table.items():
            k = sum(x << i for i, x in enumerate(key))
            lut[k] = out_key[j]
        expected = lut[idx]
        bot = table.bots.get(out_var)
        col = table.cols[out_var]
        bad |= expected != col
        if bot is not None:
            bad |= bot
    if not bad.any():
        return Verdict(True, prop, (f"all {table.nrows} runs agree with the functionality",))
    row = int(np.argmax(bad))
    final = engine.memory_at(table, row)
    want = fn.apply({s: final[s] for s in fn.secrets})
    w = Witness(
        "run output differs from the functionality",
        memories=(("run", final), ("expected outputs", want)),
    )
    return Verdict(False, prop, (), w)


# --- Noninterference modulo output -------------------------------------------

def _dealt_secrets(protocol: Protocol, preproc) -> tuple:
    """Secrets of the run distribution: dealt by the preprocessing plus any
    referenced directly by commands."""
    dealt = tuple(v for v in preproc.domain if v.kind == SECRET) \
        if preproc is not None else ()
    return dealt + tuple(v for v in protocol.secrets() if v not in dealt)


def check_nimo(protocol: Protocol, part: Partition, preproc=None,
               method: str = "auto", workers: int = 1) -> Verdict:
    """Corrupt views add nothing to what corrupt secrets and outputs reveal
    about honest secrets: P(S_H | m1) = P(S_H | m1, m2) for every positive
    realization m1 of S_C and the outputs, m2 of the honest-to-corrupt views."""
    prop = f"nimo[corrupt={{{','.join(map(str, sorted(part.corrupt)))}}}]"
    secrets = _dealt_secrets(protocol, preproc)
    s_h = owned_by(secrets, part.honest)
    s_c = owned_by(secrets, part.corrupt)
    outs = protocol.output_vars()
    views = tuple(dict.fromkeys(corrupt_views(protocol, part)))
    x1 = tuple(dict.fromkeys(s_c + outs))
    if not s_h:
        return Verdict(True, prop, ("no honest secrets",))
    p = projected_bd(protocol, x1 + views + s_h, preproc, method=method, workers=workers)
    ta = p.conditional(x1, s_h)
    tb = p.conditional(x1 + views, s_h)
    for key12 in sorted(tb.rows, key=str):
        key1 = key12[: len(x1)]
        row_b = tb.rows[key12]
        row_a = ta.rows[key1]
        if row_a != row_b:
            diff = next(k for k in sorted(set(row_a) | set(row_b), key=str)
                        if row_a.get(k, 0) != row_b.get(k, 0))
            w = Witness(
                "conditioning on corrupt views changes the honest-secret distribution",
                memories=(
                    ("m1 (corrupt secrets and outputs)", dict(zip(x1, key1))),
                    ("m2 (corrupt views)", dict(zip(views, key12[len(x1):]))),
                    ("honest secrets", dict(zip(s_h, diff))),
                ),
                numbers=(
                    ("P(secrets | m1)", row_a.get(diff, Fraction(0))),
                    ("P(secrets | m1, m2)", row_b.get(diff, Fraction(0))),
                ),
            )
            return Verdict(False, prop, (), w)
    return Verdict(True, prop, (f"{len(tb.rows)} positive view realizations checked",))


# --- Gradual release ----------------------------------------------------------

def check_gradual_release(protocol: Protocol, part: Partition, preproc=None,
                          method: str = "auto") -> Verdict:
    """Corrupt-received messages are independent of honest secrets: all
    release happens through reveals and outputs."""
    prop = f"gradual-release[corrupt={{{','.join(map(str, sorted(part.corrupt)))}}}]"
    sent = tuple(v for v in protocol.assigned() if v.kind == MESG)
    m_c = owned_by(sent, part.corrupt)
    s_h = owned_by(_dealt_secrets(protocol, preproc), part.honest)
    if not m_c or not s_h:
        return Verdict(True, prop, ("no corrupt messages or no honest secrets",))
    p = projected_bd(protocol, m_c + s_h, preproc, method=method)
    witness = p.independent_witness(m_c, s_h)
    if witness is None:
        return Verdict(True, prop, (f"{len(m_c)} corrupt messages independent of honest secrets",))
    k1, k2, lhs, rhs = witness
    w = Witness(
        "corrupt messages are correlated with honest secrets",
        memories=(
            ("corrupt messages", dict(zip(m_c, k1))),
            ("honest secrets", dict(zip(s_h, k2))),
        ),
        numbers=(("P(joint)", lhs), ("P(messages) * P(secrets)", rhs)),
    )
    return Verdict(False, prop, (), w)


# --- AND gate conditioning -----------------------------------------------------

def _and_gate_shape(protocol: Protocol):
    ot_cmds = [c for c in protocol.commands
               if isinstance(c, MesgSend) and isinstance(c.expr, OT4)]
    if len(ot_cmds) != 1:
        raise UsageError("expected exactly one 1-of-4 transfer send")
    ot_cmd = ot_cmds[0]
    e = ot_cmd.expr
    if not (isinstance(e.c1, Ref) and isinstance(e.c2, Ref)
            and e.c1.kind == MESG and e.c2.kind == MESG):
        raise UsageError("transfer choices must read message shares")
    z = ot_cmd.name
    sender, receiver = ot_cmd.src, ot_cmd.dest
    locals_ = [c for c in protocol.commands
               if isinstance(c, MesgSend) and c.name == z and c.dest == sender]
    if len(locals_) != 1 or not isinstance(locals_[0].expr, Ref) or locals_[0].expr.kind != FLIP:
        raise UsageError(f"expected a local flip share for m[{z}]")
    return e.c1.name, e.c2.name, z, sender, receiver


def check_and_gate_tactic(protocol: Protocol, method: str = "auto") -> Verdict:
    """Conditioning conditions of a single AND gate over uniformly dealt
    input shares: the output wire is determined by the input wires, each
    output share alone is uniform noise, and the output wire is independent
    of the pair of output shares, all conditioned on the input wires."""
    prop = "and-gate-tactic"
    x, y, z, sender, receiver = _and_gate_shape(protocol)
    shares = tuple(Var(MESG, w, c) for w in (x, y) for c in sorted((sender, receiver)))
    preproc = UniformPreprocessing(shares)
    p = bd(protocol, preproc, method=method).with_global_views([x, y, z])
    gx, gy, gz = Var(GLOBAL, x), Var(GLOBAL, y), Var(GLOBAL, z)
    z1, z2 = Var(MESG, z, sender), Var(MESG, z, receiver)
    inputs = (gx, gy)
    checks = (
        (f"cond_det({{{gx},{gy}}} -> {gz})", p.cond_det_witness(inputs, (gz,))),
        (f"cond_uni({{{gx},{gy}}} -> {z1})", p.cond_uni_witness(inputs, (z1,))),
        (f"cond_uni({{{gx},{gy}}} -> {z2})", p.cond_uni_witness(inputs, (z2,))),
        (f"cond_sep({{{gx},{gy}}}; {gz}; {{{z1},{z2}}})",
         p.cond_sep_witness(inputs, (gz,), (z1, z2))),
    )
    return _condition_verdict(prop, inputs, checks)


def _condition_verdict(prop, inputs, checks) -> Verdict:
    details = []
    bad = None
    for label, witness in checks:
        details.append(f"{label}: {'holds' if witness is None else 'FAILS'}")
        if witness is not None and bad is None:
            bad = (label, witness)
    if bad is None:
        return Verdict(True, prop, tuple(details))
    label, witness = bad
    row = witness[0]
    w = Witness(
        f"{label} fails at conditioning realization",
        memories=(("conditioned on", dict(zip(inputs, row))),),
    )
    return Verdict(False, prop, tuple(details), w)


# --- Share-based circuit invariant ---------------------------------------------

def check_gmw_invariant(protocol: Protocol, wire: str, part: Partition,
                        preproc=None, method: str = "auto") -> Verdict:
    """Invariant of share-based circuit evaluation at a wire, before
    decoding: the reconstructed wire is determined by the secrets, the
    messages the corrupt coalition receives from honest clients are joint
    uniform noise given the secrets, and the wire is independent of its
    share pair given the secrets."""
    prop = f"gmw-invariant[{wire}, corrupt={{{','.join(map(str, sorted(part.corrupt)))}}}]"
    secrets = _dealt_secrets(protocol, preproc)
    shares = tuple(sorted((v for v in protocol.message_vars() if v.name == wire),
                          key=lambda v: v.owner))
    if len(shares) != 2:
        raise UsageError(f"wire {wire} does not have exactly two shares")
    received = tuple(v for v in corrupt_views(protocol, part) if v.kind == MESG)
    gw = Var(GLOBAL, wire)
    p = projected_bd(protocol, secrets + shares + received, preproc, method=method)
    p = p.with_global_views([wire])
    checks = (
        (f"cond_det(S -> {gw})", p.cond_det_witness(secrets, (gw,))),
        (f"cond_uni(S -> received messages {{{','.join(map(str, received))}}})",
         p.cond_uni_witness(secrets, received)),
        (f"cond_sep(S; {gw}; shares)", p.cond_sep_witness(secrets, (gw,), shares)),
    )
    return _condition_verdict(prop, secrets, checks)


# --- Adversary enumeration ------------------------------------------------------

def corrupt_positions(protocol: Protocol, part: Partition) -> tuple:
    return tuple(i for i, cmd in enumerate(protocol.commands)
                 if not isinstance(cmd, AssertCmd)
                 and computing_client(cmd) in part.corrupt)


def enumerate_adversaries(protocol: Protocol, part: Partition,
                          tables_budget: int = 0, preproc=None,
                          max_strategies: int = 100000,
                          positions=None) -> tuple:
    """Deterministic strategy family, identity first.

    With tables_budget = 0: every combination of constant replacements at
    corrupt-computed commands.  With a positive budget and at most that
    many corrupt positions: every view-dependent replacement, where each
    position may compute any boolean function of the variables its client
    holds at that point (its own initial values, earlier messages, and
    reveals).  positions restricts the tampered commands to a subset of the
    corrupt-computed ones.
    """
    corrupt_pos = corrupt_positions(protocol, part)
    if positions is None:
        positions = corrupt_pos
    else:
        positions = tuple(positions)
        bad = [i for i in positions if i not in corrupt_pos]
        if bad:
            raise UsageError(f"positions {bad} are not corrupt-computed commands")
    if tables_budget and len(positions) <= tables_budget:
        option_lists = [
            [None] + _table_exprs(protocol, part, i, preproc)
            for i in positions
        ]
    else:
        option_lists = [[None, Const(0), Const(1)] for _ in positions]
    count = 1
    for opts in option_lists:
        count *= len(opts)
        if count > max_strategies:
            raise BudgetError(f"strategy family exceeds {max_strategies}")
    out = []
    for combo in itertools.product(*option_lists):
        replacements = tuple((i, e) for i, e in zip(positions, combo) if e is not None)
        if not replacements:
            out.append(IDENTITY)
            continue
        label = ", ".join(
            f"{assigned_var(protocol.commands[i])}:={_expr_label(e)}"
            for i, e in replacements
        )
        out.append(AdversaryStrategy(replacements, label=label))
    return tuple(out)


def _expr_label(e) -> str:
    from .ovt import format_expr

    return format_expr(e)


def _visible_vars(protocol: Protocol, part: Partition, position: int, preproc) -> tuple:
    """Variables the computing client of the command can read there."""
    client = computing_client(protocol.commands[position])
    seen = []
    initial = list(preproc.domain) if preproc is not None else []
    for v in protocol.secrets() + protocol.flips():
        if v not in initial:
            initial.append(v)
    for v in initial:
        if v.owner == client:
            seen.append(v)
    for cmd in protocol.commands[:position]:
        v = assigned_var(cmd)
        if v is None:
            continue
        if v.kind == REVEAL or v.owner == client:
            seen.append(v)
    return tuple(dict.fromkeys(seen))


def _table_exprs(protocol, part, position, preproc) -> list:
    vars_ = _visible_vars(protocol, part, position, preproc)
    assignments = list(itertools.product((0, 1), repeat=len(vars_)))
    out = []
    for fn_bits in range(2 ** len(assignments)):
        minterms = []
        for j, values in enumerate(assignments):
            if not (fn_bits >> j) & 1:
                continue
            lits = []
            for v, val in zip(vars_, values):
                ref = Ref(v.kind, v.name)
                lits.append(ref if val else Not(ref))
            term = lits[0] if lits else Const(1)
            for lit in lits[1:]:
                term = BinOp("and", term, lit)
            minterms.append(term)
        if not minterms:
            expr = Const(0)
        elif len(minterms) == len(assignments):
            expr = Const(1)
        else:
            expr = minterms[0]
            for t in minterms[1:]:
                expr = BinOp("or", expr, t)
        out.append(expr)
    return out


# --- Adversarial inputs ----------------------------------------------------------

def adversarial_inputs(pmf: Pmf, views, targets) -> tuple:
    """Least corrupt-to-honest views not independent of the targets.

    Tests candidate subsets by growing size: if any single view is
    dependent, the result is the set of dependent single views; otherwise
    pairs are tried, and so on, returning the union of the minimal
    dependent subsets of the first size at which any exist.
    """
    present = tuple(v for v in views if v in pmf.domain)
    targets = tuple(t for t in targets if t in pmf.domain)
    if not targets:
        return ()
    for k in range(1, len(present) + 1):
        found = set()
        for subset in itertools.combinations(present, k):
            if not pmf.independent(subset, targets):
                found.update(subset)
        if found:
            return tuple(sorted(found, key=str))
    return ()


# --- Cheating detection -----------------------------------------------------------

def _scope_vars(protocol: Protocol, part: Partition, preproc, secret_scope: str) -> tuple:
    if secret_scope == "secrets":
        return owned_by(_dealt_secrets(protocol, preproc), part.honest)
    if secret_scope == "initial":
        initial = list(preproc.domain)
        for v in protocol.secrets() + protocol.flips():
            if v not in initial:
                initial.append(v)
        return tuple(v for v in dict.fromkeys(initial) if v.owner in part.honest)
    raise UsageError(f"unknown secret scope {secret_scope!r}")


def _response_vars(protocol: Protocol, part: Partition) -> tuple:
    outs_h = tuple(v for v in protocol.output_vars() if v.owner in part.honest)
    return tuple(dict.fromkeys(corrupt_views(protocol, part) + outs_h))


def detection_inputs(protocol: Protocol, part: Partition, strategies,
                     preproc=None) -> tuple:
    """Adversarial inputs used by the cheating check: the dependence test
    runs on the uniform mixture of the passive distribution with the
    distribution of every strategy in the family, so views the adversary
    can influence become visible as dependencies."""
    if preproc is None:
        preproc = default_preprocessing(protocol)
    v_ch = tuple(dict.fromkeys(honest_views(protocol, part)))
    x_h = _response_vars(protocol, part)
    vars_ = tuple(dict.fromkeys(v_ch + x_h))
    base = projected_bd(protocol, vars_, preproc)
    components = [
        projected_bd(protocol, vars_, preproc, strategy=s, part=part)
        for s in strategies if s.replacements or s.abort_at
    ]
    mixture = base.mixed_with(components) if components else base
    return adversarial_inputs(mixture, v_ch, x_h)


def check_cheating_detection(protocol: Protocol, part: Partition, strategies,
                             preproc=None, secret_scope: str = "secrets") -> Verdict:
    """Every adversarial run is explained by some passive run: a run of the
    unmodified protocol agreeing on the adversarial inputs, the defined
    honest responses, and the honest secrets (secret_scope='secrets') or
    all honest-held initial values (secret_scope='initial')."""
    prop = f"cheating-detection[scope={secret_scope}, corrupt={{{','.join(map(str, sorted(part.corrupt)))}}}]"
    if preproc is None:
        preproc = default_preprocessing(protocol)
    x_c = detection_inputs(protocol, part, strategies, preproc)
    x_h_all = _response_vars(protocol, part)
    scope = _scope_vars(protocol, part, preproc, secret_scope)
    passive = run_sweep(protocol, preproc)
    cache: dict = {}

    def passive_projections(vars_key):
        if vars_key not in cache:
            cache[vars_key] = {tuple(m[v] for v in vars_key) for m in passive}
        return cache[vars_key]

    checked = 0
    for strategy in strategies:
        for m in run_sweep(protocol, preproc, strategy, part):
            agree = tuple(dict.fromkeys(
                v for v in (x_c + x_h_all + scope) if m.get(v) is not BOT and v in m
            ))
            realization = tuple(m[v] for v in agree)
            checked += 1
            if realization not in passive_projections(agree):
                w = Witness(
                    f"no passive run explains the adversarial run (strategy: {strategy.describe()})",
                    memories=(
                        ("adversarial run", m),
                        ("agreement realization", dict(zip(agree, realization))),
                    ),
                )
                return Verdict(False, prop, (f"adversarial inputs: {', '.join(map(str, x_c)) or '(none)'}",), w)
    details = (
        f"adversarial inputs: {', '.join(map(str, x_c)) or '(none)'}",
        f"{checked} adversarial runs over {len(strategies)} strategies explained",
    )
    return Verdict(True, prop, details)


# --- Integrity ----------------------------------------------------------------------

def _cond_dist(pmf: Pmf, x_vars, given: dict) -> dict:
    pos = pmf._positions(tuple(given))
    want = tuple(given[v] for v in given)
    xpos = pmf._positions(tuple(x_vars))
    rows: dict = {}
    mass = Fraction(0)
    for key, w in pmf.weights.items():
        if tuple(key[i] for i in pos) != want:
            continue
        sub = tuple(key[i] for i in xpos)
        rows[sub] = rows.get(sub, Fraction(0)) + w
        mass += w
    if mass == 0:
        return {}
    return {k: v / mass for k, v in rows.items()}


def check_integrity(protocol: Protocol, part: Partition, strategies,
                    preproc=None, secret_scope: str = "secrets") -> Verdict:
    """Every adversarial run is explained by substituting corrupt inputs:
    conditioned on the dealt inputs and the messages the adversary actually
    delivered, the distribution of the defined honest responses matches the
    passive conditional under some input memory that agrees with the honest
    inputs (secret_scope='secrets' substitutes corrupt secrets only,
    'initial' also substitutes corrupt preprocessing draws)."""
    prop = f"integrity[scope={secret_scope}, corrupt={{{','.join(map(str, sorted(part.corrupt)))}}}]"
    if preproc is None:
        preproc = default_preprocessing(protocol)
    p_passive = bd(protocol, preproc, method="interp")
    x_h_all = _response_vars(protocol, part)
    v_ch = tuple(dict.fromkeys(honest_views(protocol, part)))
    if secret_scope == "secrets":
        inputs = _dealt_secrets(protocol, preproc)
        candidates = [dict(zip(inputs, values))
                      for values in itertools.product(range(protocol.modulus),
                                                      repeat=len(inputs))]
    elif secret_scope == "initial":
        inputs = tuple(preproc.domain)
        candidates = [dict(m) for m in preproc.memories()]
    else:
        raise UsageError(f"unknown secret scope {secret_scope!r}")
    match_vars = tuple(v for v in inputs if v.owner in part.honest)
    for strategy in strategies:
        p_a = bd(protocol, preproc, strategy, part, method="interp")
        seen_conditions = set()
        for key, _ in p_a.support():
            m = p_a.memory(key)
            x_vars = tuple(v for v in x_h_all if m[v] is not BOT)
            delivered = {v: m[v] for v in v_ch if m[v] is not BOT}
            given = {v: m[v] for v in inputs}
            given.update(delivered)
            cond_key = (x_vars, tuple((str(v), given[v])
                                      for v in sorted(given, key=str)))
            if cond_key in seen_conditions:
                continue
            seen_conditions.add(cond_key)
            lhs = _cond_dist(p_a, x_vars, given)
            found = False
            for m_prime in candidates:
                if any(m_prime[v] != m[v] for v in match_vars):
                    continue
                rhs_given = dict(m_prime)
                rhs_given.update(delivered)
                if _cond_dist(p_passive, x_vars, rhs_given) == lhs:
                    found = True
                    break
            if not found:
                w = Witness(
                    f"no input substitution reproduces the honest responses "
                    f"(strategy: {strategy.describe()})",
                    memories=(
                        ("adversarial run", m),
                        ("conditioned on", given),
                    ),
                )
                return Verdict(False, prop, (), w)
    return Verdict(True, prop, (f"{len(strategies)} strategies explained",))


# --- Partitions -----------------------------------------------------------------

def all_partitions(protocol: Protocol, max_corrupt: Optional[int] = None) -> tuple:
    """Every partition with a nonempty corrupt strict subset, smallest first."""
    fed = sorted(protocol.federation)
    if max_corrupt is None:
        max_corrupt = len(fed) - 1
    out = []
    for k in range(1, max_corrupt + 1):
        for corrupt in itertools.combinations(fed, k):
            out.append(Partition.of(fed, corrupt))
    return tuple(out)
