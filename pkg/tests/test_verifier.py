"""Hyperproperty checks: solve, run enumeration, and the check_* verdicts.

Failing verdicts are recomputed from the distributions they quantify over;
abort fractions follow from the one-bit MAC equation mc = key + delta * x.
"""

import itertools
from fractions import Fraction

import pytest

from overture.dist import Pmf, bd, bd_adv
from overture.errors import BudgetError, UsageError
from overture.interp import IDENTITY, AdversaryStrategy, eval_expr
from overture.lang import (
    AssertCmd, BOT, BinOp, Const, Partition, Protocol, Ref, Var,
    computing_client, expr_vars, parse_var,
)
from overture.ovt import parse_protocol
from overture.stdlib import FUNCTIONALITIES, load_package
from overture.verifier import (
    MemSet, Verdict, Witness, adversarial_inputs, all_partitions,
    check_and_gate_tactic, check_cheating_detection, check_gmw_invariant,
    check_gradual_release, check_integrity, check_nimo,
    check_passive_correct, corrupt_positions, detection_inputs,
    enumerate_adversaries, ot4_solve, padded_memory, runs_tt, run_sweep,
    solve,
)


def test_memset():
    a, b = parse_var("m[a]@1"), parse_var("m[b]@1")
    full = MemSet.full((a, b))
    assert len(full) == 4
    mems = list(full.memories())
    assert {a: 1, b: 0} in mems
    again = MemSet.of_memories((a, b), mems)
    assert again == full


def test_padded_memory():
    domain = (parse_var("m[a]@1"), parse_var("m[b]@1"), parse_var("m[c]@1"))
    m = padded_memory(domain, 0b101, 0b010)
    assert m == {domain[0]: 1, domain[1]: BOT, domain[2]: 1}


def test_solve_matches_interpreter_on_bundled_exprs():
    for name in ("otp", "leaky", "shamir-add3", "gmw-and", "gmw-and-xor",
                 "bdoz-open", "bdoz-beaver"):
        protocol, _, _ = load_package(name)
        for cmd in protocol.commands:
            if isinstance(cmd, AssertCmd):
                continue
            client = computing_client(cmd)
            domain = tuple(dict.fromkeys(expr_vars(cmd.expr, client)))
            mems = MemSet.full(domain)
            sat = solve(mems, cmd.expr, client).masks
            for values in itertools.product((0, 1), repeat=len(domain)):
                m = dict(zip(domain, values))
                mask = sum(1 << i for i, x in enumerate(values) if x)
                assert (eval_expr(m, cmd.expr, client) == 1) == (mask in sat)


def test_ot4_solve_row_order():
    c1, c2 = parse_var("m[c1]@2"), parse_var("m[c2]@2")
    mems = MemSet.full((c1, c2))
    rows = (Const(1), Const(0), Const(0), Const(1))
    sat = ot4_solve(mems, Ref("m", "c1"), Ref("m", "c2"), 2, rows, 1)
    # first row answers choices (1,1), last row (0,0)
    assert sat.masks == frozenset({0b00, 0b11})


def _final_masks(protocol, preproc, domain):
    out = set()
    for m in run_sweep(protocol, preproc):
        val = bot = 0
        for i, v in enumerate(domain):
            if m[v] is BOT:
                bot |= 1 << i
            elif m[v]:
                val |= 1 << i
        out.add((val, bot))
    return out


def test_runs_tt_matches_interpreter_sweep():
    for name in ("otp", "leaky", "shamir-add3", "gmw-and", "gmw-xor",
                 "gmw-and-xor", "gmw-gate", "bdoz-open"):
        protocol, _, preproc = load_package(name)
        domain, runs = runs_tt(protocol, preproc)
        assert runs == _final_masks(protocol, preproc, domain)


def test_runs_tt_covers_aborts():
    p = parse_protocol("m[z]@2 := s[x] @ 1;\n"
                       "assert (m[z] == 0) @ 2;\n"
                       "out@2 := m[z] @ 2;\n")
    domain, runs = runs_tt(p)
    aborted = [r for r in runs if r[1]]
    assert len(aborted) == 1
    m = padded_memory(domain, *aborted[0])
    assert m[parse_var("s[x]@1")] == 1
    assert m[parse_var("out@2")] is BOT


def test_passive_correct_holds():
    for name in ("otp", "leaky", "shamir-add3", "gmw-and", "gmw-xor",
                 "gmw-and-xor", "bdoz-open"):
        protocol, fn, preproc = load_package(name)
        for method in ("interp", "fold"):
            v = check_passive_correct(protocol, fn, preproc, method=method)
            assert v.ok, (name, method, v.format())


def test_passive_correct_witness():
    protocol, _, _ = load_package("gmw-and")
    wrong = FUNCTIONALITIES["xor2"]
    for method in ("interp", "fold"):
        v = check_passive_correct(protocol, wrong, method=method)
        assert not v.ok
        run_memory = dict(v.witness.memories[0][1])
        want = wrong.apply(run_memory)
        assert any(run_memory[u] != x for u, x in want.items())


def test_passive_correct_domain_checks():
    protocol, _, _ = load_package("gmw-and")
    with pytest.raises(UsageError):
        check_passive_correct(protocol, FUNCTIONALITIES["mul1"])
    with pytest.raises(UsageError):
        check_passive_correct(protocol, FUNCTIONALITIES["sum3"])


def test_nimo_holds():
    otp, _, _ = load_package("otp")
    for corrupt in ([1], [2]):
        assert check_nimo(otp, Partition.of(otp.federation, corrupt)).ok
    sh, _, _ = load_package("shamir-add3")
    assert check_nimo(sh, Partition.of(sh.federation, [2])).ok


def test_nimo_leaky_witness():
    leaky, _, _ = load_package("leaky")
    part = Partition.of(leaky.federation, [2])
    v = check_nimo(leaky, part)
    assert not v.ok
    # the ciphertextless leak pins the secret: 1/2 becomes 1
    numbers = dict(v.witness.numbers)
    assert numbers["P(secrets | m1)"] == Fraction(1, 2)
    assert numbers["P(secrets | m1, m2)"] == 1
    p = bd(leaky)
    m1 = dict(v.witness.memories[0][1])
    m2 = dict(v.witness.memories[1][1])
    s = dict(v.witness.memories[2][1])
    assert p.cond_prob(s, m1) == Fraction(1, 2)
    assert p.cond_prob(s, {**m1, **m2}) == 1


def test_gradual_release():
    sh, _, _ = load_package("shamir-add3")
    assert check_gradual_release(sh, Partition.of(sh.federation, [2])).ok
    g, _, _ = load_package("gmw-and")
    assert check_gradual_release(g, Partition.of(g.federation, [2])).ok
    # the pad transfer releases through messages, not reveals
    otp, _, _ = load_package("otp")
    v = check_gradual_release(otp, Partition.of(otp.federation, [2]))
    assert not v.ok
    leaky, _, _ = load_package("leaky")
    v = check_gradual_release(leaky, Partition.of(leaky.federation, [2]))
    assert not v.ok
    joint = dict(v.witness.memories[0][1]) | dict(v.witness.memories[1][1])
    p = bd(leaky)
    numbers = dict(v.witness.numbers)
    assert p.prob(joint) == numbers["P(joint)"]
    assert numbers["P(joint)"] != numbers["P(messages) * P(secrets)"]


def test_and_gate_tactic_holds():
    gate, _, _ = load_package("gmw-gate")
    v = check_and_gate_tactic(gate)
    assert v.ok
    assert len(v.details) == 4
    assert all(d.endswith("holds") for d in v.details)


def test_and_gate_tactic_rejects_unmasked_gate():
    # constant rows: the receiver share carries no noise and no function
    broken = parse_protocol("m[z]@2 := OT4(m[x], m[y] @ 2 ; 0, 0, 0, 0) @ 1;\n"
                            "m[z]@1 := r[z] @ 1;\n")
    v = check_and_gate_tactic(broken)
    assert not v.ok
    status = dict(d.rsplit(": ", 1) for d in v.details)
    assert status["cond_det({<m[x]>,<m[y]>} -> <m[z]>)"] == "FAILS"
    assert status["cond_uni({<m[x]>,<m[y]>} -> m[z]@1)"] == "holds"
    assert status["cond_uni({<m[x]>,<m[y]>} -> m[z]@2)"] == "FAILS"
    assert v.witness is not None


def test_and_gate_tactic_shape_errors():
    with pytest.raises(UsageError):
        check_and_gate_tactic(parse_protocol("out@1 := s[x] @ 1;\n"))
    two = ("m[z]@2 := OT4(m[x], m[y] @ 2 ; 0, 0, 0, 0) @ 1;\n"
           "m[w]@2 := OT4(m[x], m[y] @ 2 ; 0, 0, 0, 0) @ 1;\n")
    with pytest.raises(UsageError):
        check_and_gate_tactic(parse_protocol(two))


def test_gmw_invariant_holds_at_depth_two():
    protocol, _, _ = load_package("gmw-and-xor")
    for wire in ("g", "z"):
        for corrupt in ([1], [2]):
            part = Partition.of(protocol.federation, corrupt)
            v = check_gmw_invariant(protocol, wire, part)
            assert v.ok, v.format()


def test_gmw_invariant_rejects_direct_copy():
    copy = parse_protocol("m[w]@1 := s[x] @ 1;\n"
                          "m[w]@2 := 0 @ 1;\n"
                          "out@1 := m[w] @ 1;\n")
    part = Partition.of(copy.federation, [2])
    v = check_gmw_invariant(copy, "w", part)
    assert not v.ok
    assert any("cond_uni" in d and d.endswith("FAILS") for d in v.details)
    with pytest.raises(UsageError):
        check_gmw_invariant(copy, "nope", part)


def test_corrupt_positions_and_enumeration():
    otp, _, _ = load_package("otp")
    part1 = Partition.of(otp.federation, [1])
    assert corrupt_positions(otp, part1) == (0, 1)
    fam = enumerate_adversaries(otp, part1)
    assert len(fam) == 9           # {keep, 0, 1} at each of two sends
    assert fam[0] is IDENTITY
    assert len({s.replacements for s in fam}) == 9
    part2 = Partition.of(otp.federation, [2])
    assert corrupt_positions(otp, part2) == (2,)
    assert len(enumerate_adversaries(otp, part2)) == 3
    bdoz, _, _ = load_package("bdoz-open")
    bpart = Partition.of(bdoz.federation, [2])
    assert corrupt_positions(bdoz, bpart) == (3, 4, 7, 9)


def test_enumeration_with_table_budget():
    otp, _, _ = load_package("otp")
    part = Partition.of(otp.federation, [1])
    # client 1 sees s[x] and r[k]: 2^(2^2) boolean functions, plus keep
    fam = enumerate_adversaries(otp, part, tables_budget=1, positions=(0,))
    assert len(fam) == 17
    assert fam[0] is IDENTITY


def test_enumeration_guards():
    otp, _, _ = load_package("otp")
    part = Partition.of(otp.federation, [1])
    with pytest.raises(UsageError):
        enumerate_adversaries(otp, part, positions=(2,))
    with pytest.raises(BudgetError):
        enumerate_adversaries(otp, part, max_strategies=5)


def test_adversarial_inputs():
    a, b, t = (Var("m", n, 1) for n in "abt")
    keys = [(x, y, x ^ y) for x in (0, 1) for y in (0, 1)]
    masked = Pmf((a, b, t), {k: Fraction(1, 4) for k in keys})
    # neither view alone is dependent; the pair is, so both are returned
    assert adversarial_inputs(masked, (a, b), (t,)) == (a, b)
    leak = Pmf((a, b, t), {(x, y, x): Fraction(1, 4)
                           for x in (0, 1) for y in (0, 1)})
    assert adversarial_inputs(leak, (a, b), (t,)) == (a,)
    assert adversarial_inputs(leak, (a, b), ()) == ()
    assert adversarial_inputs(leak, (Var("m", "zz", 9),), (t,)) == ()


def test_detection_inputs_gmw():
    protocol, _, _ = load_package("gmw-and")
    part = Partition.of(protocol.federation, [2])
    fam = enumerate_adversaries(protocol, part)
    assert len(fam) == 81
    # lying at the decode reveal skews out@1 = p[z1] xor p[z2]; the share
    # sent to client 1 stays masked by r[z] on every path to a target
    assert detection_inputs(protocol, part, fam) == (parse_var("p[z2]"),)


def test_identity_strategies_always_explained():
    for name in ("otp", "leaky", "shamir-add3", "gmw-and", "bdoz-open"):
        protocol, _, preproc = load_package(name)
        for part in all_partitions(protocol, max_corrupt=1):
            for scope in ("secrets", "initial"):
                vd = check_cheating_detection(protocol, part, [IDENTITY],
                                              preproc, secret_scope=scope)
                vi = check_integrity(protocol, part, [IDENTITY], preproc,
                                     secret_scope=scope)
                assert vd.ok, (name, scope, vd.format())
                assert vi.ok, (name, scope, vi.format())


def test_constant_lies_at_inputs_are_substitutions():
    # a lying sender is indistinguishable from one with a different input
    otp, _, _ = load_package("otp")
    for corrupt in ([1], [2]):
        part = Partition.of(otp.federation, corrupt)
        fam = enumerate_adversaries(otp, part)
        assert check_cheating_detection(otp, part, fam).ok
        assert check_integrity(otp, part, fam).ok
    leaky, _, _ = load_package("leaky")
    part = Partition.of(leaky.federation, [2])
    fam = enumerate_adversaries(leaky, part)
    assert check_cheating_detection(leaky, part, fam).ok
    assert check_integrity(leaky, part, fam).ok


def test_lying_decode_is_not_explained():
    protocol, _, _ = load_package("gmw-and")
    part = Partition.of(protocol.federation, [2])
    fam = enumerate_adversaries(protocol, part)
    vd = check_cheating_detection(protocol, part, fam)
    assert not vd.ok
    assert "p[z2]:=0" in vd.witness.description
    agree = dict(vd.witness.memories[1][1])
    assert bd(protocol).prob(agree) == 0
    vi = check_integrity(protocol, part, fam)
    assert not vi.ok
    assert "p[z2]:=0" in vi.witness.description


def test_unauthenticated_open_is_caught():
    protocol, _, preproc = load_package("bdoz-open")
    stripped = Protocol(tuple(c for c in protocol.commands
                              if not isinstance(c, AssertCmd)),
                        protocol.federation, protocol.modulus)
    part = Partition.of(stripped.federation, [2])
    assert corrupt_positions(stripped, part) == (2, 3, 5, 7)
    flip = BinOp("+", stripped.commands[2].expr, Const(1))
    fam = (IDENTITY, AdversaryStrategy(replacements=((2, flip),),
                                       label="share-flip"))
    for scope in ("secrets", "initial"):
        v = check_cheating_detection(stripped, part, fam, preproc,
                                     secret_scope=scope)
        assert not v.ok
        agree = dict(v.witness.memories[1][1])
        assert bd(stripped, preproc, method="interp").prob(agree) == 0


def test_authenticated_open_abort_fractions():
    # mc = key + delta * x: a flipped share passes iff delta = 0, a flipped
    # mac never passes, flipping both passes iff delta = 1
    protocol, _, preproc = load_package("bdoz-open")
    part = Partition.of(protocol.federation, [2])
    share = protocol.commands[3].expr
    mac = protocol.commands[4].expr
    flip = lambda e: BinOp("+", e, Const(1))
    out1 = Var("out", "", 1)
    cases = ((((3, flip(share)),), Fraction(1, 2)),
             (((4, flip(mac)),), Fraction(1)),
             (((3, flip(share)), (4, flip(mac))), Fraction(1, 2)))
    for replacements, want in cases:
        s = AdversaryStrategy(replacements=replacements)
        p = bd_adv(protocol, s, part, preproc, method="interp")
        assert p.prob({out1: BOT}) == want


def test_bdoz_open_forgeries_break_both_checks():
    # one-bit macs forge with probability 1/2, so the full strategy family
    # contains runs no substituted passive execution explains
    protocol, _, preproc = load_package("bdoz-open")
    part = Partition.of(protocol.federation, [2])
    fam = enumerate_adversaries(protocol, part)
    assert len(fam) == 81
    for scope in ("secrets", "initial"):
        vd = check_cheating_detection(protocol, part, fam, preproc,
                                      secret_scope=scope)
        vi = check_integrity(protocol, part, fam, preproc, secret_scope=scope)
        assert not vd.ok and "p[x2]:=0" in vd.witness.description
        assert not vi.ok and "p[x2]:=0" in vi.witness.description
        agree = dict(vd.witness.memories[1][1])
        assert bd(protocol, preproc, method="interp").prob(agree) == 0


def test_all_partitions():
    sh, _, _ = load_package("shamir-add3")
    parts = all_partitions(sh)
    assert len(parts) == 6
    assert [sorted(p.corrupt) for p in parts] == [
        [1], [2], [3], [1, 2], [1, 3], [2, 3]]
    assert len(all_partitions(sh, max_corrupt=1)) == 3


def test_verdict_and_witness_format():
    w = Witness("what failed", memories=(("run", {parse_var("p[a]"): 1}),),
                numbers=(("P", Fraction(1, 2)),))
    v = Verdict(False, "some-check", ("note",), w)
    assert v.format() == ("some-check: FAILS\n  note\nwhat failed\n"
                          "  run: p[a]=1\n  P = 1/2")
    assert Verdict(True, "some-check").format() == "some-check: holds"
