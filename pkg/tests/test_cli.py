"""Command-line front end: exit codes, golden output, determinism."""

import pytest

from overture.cli import main
from overture.stdlib import GMW_AND_PRE, GMW_PRE, OTP_OVT


def run_cli(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_pmf_marginal_golden(capsys):
    rc, out, err = run_cli(capsys, "pmf", "otp", "--marginal", "m[z]@2")
    assert rc == 0 and err == ""
    assert out == "m[z]@2=0 weight=1/2\nm[z]@2=1 weight=1/2\n"


def test_pmf_given(capsys):
    rc, out, _ = run_cli(capsys, "pmf", "otp", "--marginal", "s[x]@1",
                         "--given", "m[z]@2=1,m[k]@2=0")
    assert rc == 0
    assert out == "s[x]@1=1 weight=1/1\n"
    rc, _, err = run_cli(capsys, "pmf", "otp", "--given", "out@2=1,s[x]@1=0")
    assert rc == 2
    assert "probability zero" in err


def test_pmf_is_deterministic(capsys):
    outs = set()
    for _ in range(2):
        rc, out, _ = run_cli(capsys, "pmf", "gmw-and")
        assert rc == 0
        outs.add(out)
    assert len(outs) == 1


def test_run_defaults_missing_inputs_to_zero(capsys):
    rc, out, _ = run_cli(capsys, "run", "otp", "--inputs", "s[x]@1=1")
    assert rc == 0
    assert out == "m[k]@2=0 m[z]@2=1 out@2=1 r[k]@1=0 s[x]@1=1\n"


def test_expand_golden(tmp_path, capsys):
    lib = tmp_path / "gmw.pre"
    lib.write_text(GMW_PRE)
    src = tmp_path / "main.pre"
    src.write_text(GMW_AND_PRE)
    rc, out, _ = run_cli(capsys, "expand", str(src), "--lib", str(lib))
    assert rc == 0
    assert out.startswith("m[s1]@1 := s[s1] xor r[s1] @ 1;\n")
    assert out.count(";\n") == 10


def test_verify_holds_exit_zero(capsys):
    rc, out, _ = run_cli(capsys, "verify", "gmw-and", "--property", "correct",
                         "--functionality", "and2")
    assert rc == 0
    assert "passive-correct: holds" in out
    rc, out, _ = run_cli(capsys, "verify", "gmw-gate",
                         "--property", "and-tactic")
    assert rc == 0
    assert "and-gate-tactic: holds" in out


def test_verify_failure_exit_one(capsys):
    rc, out, _ = run_cli(capsys, "verify", "leaky", "--property", "nimo",
                         "--corrupt", "2")
    assert rc == 1
    assert "nimo[corrupt={2}]: FAILS" in out
    assert "P(secrets | m1) = 1/2" in out


def test_verify_all_partitions(capsys):
    rc, out, _ = run_cli(capsys, "verify", "shamir-add3", "--property", "nimo",
                         "--all-partitions")
    assert rc == 0
    assert out.count("holds") == 6


def test_verify_malicious_properties(capsys):
    rc, out, _ = run_cli(capsys, "verify", "otp",
                         "--property", "cheating-detection", "--corrupt", "1")
    assert rc == 0
    assert "cheating-detection[scope=secrets, corrupt={1}]: holds" in out
    # one-bit macs forge half the time, so even the open sends break it
    rc, out, _ = run_cli(capsys, "verify", "bdoz-open",
                         "--property", "cheating-detection", "--corrupt", "2",
                         "--positions", "3,4")
    assert rc == 1
    assert "FAILS" in out
    rc, out, _ = run_cli(capsys, "verify", "gmw-and", "--property",
                         "integrity", "--corrupt", "2")
    assert rc == 1
    assert "integrity[scope=secrets, corrupt={2}]: FAILS" in out


def test_verify_gmw_invariant(capsys):
    rc, out, _ = run_cli(capsys, "verify", "gmw-and-xor", "--property",
                         "gmw-invariant", "--wire", "g", "--corrupt", "2")
    assert rc == 0
    assert "gmw-invariant[g, corrupt={2}]: holds" in out


def test_export_datalog_and_lhm(tmp_path, capsys):
    rc, out, _ = run_cli(capsys, "export-datalog", "otp")
    assert rc == 0
    assert out.count(":-") == 5
    dl = tmp_path / "otp.dl"
    dl.write_text(out)
    rc, out, _ = run_cli(capsys, "lhm", str(dl), "--facts", "s_x_c1=1")
    assert rc == 0
    assert out.splitlines() == ["m_z_c2", "out_c2", "s_x_c1"]


def test_usage_errors_exit_two(capsys):
    cases = (
        ("run", "no-such-package"),
        ("verify", "otp", "--property", "correct", "--functionality", "nope"),
        ("verify", "otp", "--property", "nimo"),
        ("pmf", "otp", "--field", "3"),
        ("pmf", "otp", "--given", "m[z]@2=9"),
        ("verify", "otp", "--property", "nimo", "--corrupt", "1,bad"),
    )
    for argv in cases:
        rc, _, err = run_cli(capsys, *argv)
        assert rc == 2, argv
        assert err.startswith("error:"), argv
    rc, _, err = run_cli(capsys, "run", "no-such-package")
    assert "bundled package" in err


def test_parse_error_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.ovt"
    bad.write_text("m[z]@2 := s[x] $ 1;\n")
    rc, _, err = run_cli(capsys, "run", str(bad))
    assert rc == 2
    assert "line 1" in err


def test_file_targets(tmp_path, capsys):
    src = tmp_path / "otp.ovt"
    src.write_text(OTP_OVT)
    rc, out, _ = run_cli(capsys, "verify", str(src), "--property", "nimo",
                         "--corrupt", "2")
    assert rc == 0
