"""Logic-program export: atom names, clause generation, least models."""

import itertools

import pytest

from overture.datalog import (
    Clause, Literal, Program, facts_of, format_program, lhm, mangle,
    parse_program_dl, run_datalog, to_datalog, unmangle,
)
from overture.errors import ParseError, StratificationError, UsageError
from overture.interp import run
from overture.lang import Var, parse_var
from overture.stdlib import load_package

OTP_DL = """\
m_z_c2 :- not r_k_c1, s_x_c1.
m_z_c2 :- r_k_c1, not s_x_c1.
m_k_c2 :- r_k_c1.
out_c2 :- not m_k_c2, m_z_c2.
out_c2 :- m_k_c2, not m_z_c2.
"""


def test_otp_export_golden():
    protocol, _, _ = load_package("otp")
    program = to_datalog(protocol)
    assert format_program(program) == OTP_DL
    assert len(program.clauses) == 5
    assert program.facts() == ()
    assert program.rules() == program.clauses


def test_mangle_unmangle_bijective():
    tricky = ("s[x]@1", "r[k]@3", "m[z]@2", "p[w]", "out@2",
              "m[out]@1", "m[x_c2]@7", "p[x_c2]", "s[out_c1]@1")
    for text in tricky:
        v = parse_var(text)
        assert unmangle(mangle(v)) == v
    assert mangle(parse_var("out@2")) == "out_c2"
    assert mangle(parse_var("m[out]@1")) == "m_out_c1"
    assert mangle(parse_var("m[x_c2]@7")) == "m_x_c2_c7"


def test_unmangle_rejects_malformed_atoms():
    for atom in ("q_x_c1", "out_cX", "m_x", "m_x_cy", "s_", "plain"):
        with pytest.raises(UsageError):
            unmangle(atom)
    with pytest.raises(UsageError):
        mangle(Var("gv", "w"))


def test_run_datalog_golden():
    protocol, _, _ = load_package("otp")
    m0 = {parse_var("s[x]@1"): 1, parse_var("r[k]@1"): 0}
    assert run_datalog(protocol, m0) == {"s_x_c1", "m_z_c2", "out_c2"}
    m0 = {parse_var("s[x]@1"): 0, parse_var("r[k]@1"): 1}
    assert run_datalog(protocol, m0) == {"r_k_c1", "m_z_c2", "m_k_c2"}


def test_facts_of_keeps_only_ones():
    m = {parse_var("s[x]@1"): 1, parse_var("r[k]@1"): 0}
    facts = facts_of(m)
    assert facts.clauses == (Clause("s_x_c1"),)


def test_least_model_matches_interpreter():
    for name in ("otp", "leaky", "shamir-add3", "gmw-and", "gmw-and-xor"):
        protocol, _, _ = load_package(name)
        program = to_datalog(protocol)
        inputs = protocol.secrets() + protocol.flips()
        for values in itertools.product((0, 1), repeat=len(inputs)):
            m0 = dict(zip(inputs, values))
            final = run(m0, protocol)
            want = frozenset(mangle(v) for v, x in final.items() if x == 1)
            assert lhm(program, facts_of(m0)) == want


def test_asserts_have_no_clause_form():
    protocol, _, _ = load_package("bdoz-open")
    with pytest.raises(UsageError):
        to_datalog(protocol)


def test_facts_must_be_bodiless():
    facts = Program((Clause("a", (Literal("b"),)),))
    with pytest.raises(UsageError):
        lhm(Program(()), facts)


def test_stratification_errors():
    with pytest.raises(StratificationError):
        lhm(Program((Clause("a", (Literal("a"),)),)))
    # a reads b, but b's group comes later
    forward = Program((Clause("a", (Literal("b"),)),
                       Clause("b", (Literal("c"),))))
    with pytest.raises(StratificationError):
        lhm(forward, Program((Clause("c"),)))
    redefined = Program((Clause("a", (Literal("b", negated=True),)),))
    with pytest.raises(StratificationError):
        lhm(redefined, Program((Clause("a"),)))


def test_lhm_negation_reads_absence():
    program = Program((Clause("a", (Literal("b", negated=True),)),))
    assert lhm(program) == {"a"}
    assert lhm(program, Program((Clause("b"),))) == {"b"}


def test_dl_round_trip():
    protocol, _, _ = load_package("gmw-and")
    program = to_datalog(protocol)
    assert parse_program_dl(format_program(program)) == program
    src = "a.\nb :- a, not c.  % comment\n% whole-line comment\n"
    program = parse_program_dl(src)
    assert program.clauses == (Clause("a"),
                               Clause("b", (Literal("a"), Literal("c", True))))


def test_dl_parse_errors():
    for src in ("a", "h :- .", "1x.", "h :- 2y.", "-."):
        with pytest.raises(ParseError):
            parse_program_dl(src)
