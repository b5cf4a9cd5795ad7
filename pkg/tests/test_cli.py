import contextlib
import io
import json
import os
from pathlib import Path

import pytest

from splincal.cli import main, parse_session, print_session
from splincal.errors import ParseError

FIXTURES = Path(__file__).parent / "fixtures"

CORPUS = sorted(p.name for p in FIXTURES.glob("*.spl"))


def run_cli(args, env=None):
    saved = {}
    env = env or {}
    for k, v in env.items():
        saved[k] = os.environ.get(k)
        os.environ[k] = v
    buf = io.StringIO()
    try:
        with contextlib.redirect_stdout(buf):
            code = main(args + ["--json", "-"])
    finally:
        for k, v in saved.items():
            if v is None:
                del os.environ[k]
            else:
                os.environ[k] = v
    return code, json.loads(buf.getvalue())


# ---- round-trips and determinism ---------------------------------------------


@pytest.mark.parametrize("name", CORPUS)
def test_parse_print_parse_fixpoint(name):
    text = (FIXTURES / name).read_text()
    session = parse_session(text)
    printed = print_session(session)
    again = parse_session(printed)
    assert session == again
    assert print_session(again) == printed


def test_print_canonical_objects():
    from splincal.cli import print_canonical
    from splincal.groebner import Ideal
    from splincal.poly import PolyRing

    R = PolyRing(7, ("x", "y", "z"))
    assert print_canonical(R.parse("3*x^2*y + z")) == "3*x^2*y + z"
    assert print_canonical(Ideal(R, [R.variable("y"), R.variable("x")])) == "(x, y)"
    assert print_canonical(()) == "chain()"
    assert print_canonical(("B1", "B2")) == "chain(B1, B2)"


def test_byte_identical_reports_across_runs():
    for args in (
        ["fpure", "--session", str(FIXTURES / "fermat7.spl")],
        ["compatible", "--session", str(FIXTURES / "node5.spl")],
        ["trace", "--session", str(FIXTURES / "cusp5.spl"), "--target", "N"],
    ):
        code1, rep1 = run_cli(list(args))
        code2, rep2 = run_cli(list(args))
        assert code1 == code2 == 0
        rep1.pop("wall_time_ms")
        rep2.pop("wall_time_ms")
        blob1 = json.dumps(rep1, sort_keys=True)
        blob2 = json.dumps(rep2, sort_keys=True)
        assert blob1 == blob2


# ---- command payloads ----------------------------------------------------------


def test_fpure_command():
    code, rep = run_cli(["fpure", "--session", str(FIXTURES / "fermat7.spl")])
    assert code == 0 and rep["result"]["fpure"] is True
    code, rep = run_cli(["fpure", "--session", str(FIXTURES / "fermat2.spl")])
    assert code == 0 and rep["result"]["fpure"] is False
    assert rep["result"]["witness"] is None


def test_compatible_command_node():
    code, rep = run_cli(["compatible", "--session", str(FIXTURES / "node5.spl")])
    assert code == 0
    r = rep["result"]
    assert r["size"] == 5
    assert r["complete"] is True
    assert r["binomial_bound_ok"] is True
    assert sorted(map(tuple, r["ideals"])) == sorted(
        [("1",), ("x",), ("y",), ("x*y",), ("x", "y")]
    )


def test_star_command():
    code, rep = run_cli(
        ["star", "--session", str(FIXTURES / "node5.spl"), "--target", "D"]
    )
    assert code == 0
    assert rep["result"]["star"] == ["x", "y"]


def test_frobclosure_command():
    code, rep = run_cli(
        [
            "frobclosure",
            "--session",
            str(FIXTURES / "closure2.spl"),
            "--target",
            "J",
            "--emax",
            "3",
        ]
    )
    assert code == 0
    assert rep["result"]["closure"] == ["x", "y", "z"]
    assert rep["result"]["stabilized_at"] == 1


def test_trace_and_contract_and_idealtrace_commands():
    session = str(FIXTURES / "cusp5.spl")
    code, rep = run_cli(["trace", "--session", session, "--target", "N"])
    assert code == 0
    assert rep["result"]["trace"] == ["u", "v"]
    assert rep["result"]["split"] is False
    code, rep = run_cli(
        ["contract", "--session", session, "--target", "N", "--family", "U"]
    )
    assert code == 0
    assert rep["result"]["contractions"]["U"] == ["u", "v"]
    code, rep = run_cli(
        ["idealtrace", "--session", session, "--target", "N", "--family", "U"]
    )
    assert code == 0
    assert rep["result"]["sample"] == ["u", "v"]


def test_etale_command():
    code, rep = run_cli(
        ["etale", "--session", str(FIXTURES / "quadchain5.spl"), "--target", "B1"]
    )
    assert code == 0
    assert rep["result"]["verdict"] is True
    assert rep["result"]["determinant"] == "2*t"


def test_chain_command():
    code, rep = run_cli(
        ["chain", "--session", str(FIXTURES / "quadchain5.spl"), "--target", "C"]
    )
    assert code == 0
    assert rep["result"]["traces"] == [["1"], ["1"]]
    assert rep["result"]["stabilized_at"] == 1


def test_splinter_command_verdicts():
    code, rep = run_cli(
        ["splinter", "--session", str(FIXTURES / "cusp5.spl"), "--target", "C"]
    )
    assert code == 0
    assert rep["result"]["verdict"] in (
        "NON_SPLINTER_AT_MAXIMAL",
        "CERTIFIED_NON_SPLINTER_ON_LOCUS",
    )
    assert rep["result"]["obstruction"] == ["u", "v"]
    code, rep = run_cli(
        ["splinter", "--session", str(FIXTURES / "veronese5.spl"), "--target", "C"]
    )
    assert code == 0
    assert rep["result"]["verdict"] == "NO_OBSTRUCTION_FOUND"


def test_unknown_target_is_precondition_error():
    code, rep = run_cli(
        ["trace", "--session", str(FIXTURES / "cusp5.spl"), "--target", "missing"]
    )
    assert code == 3
    assert rep["error"]["code"] == "UNKNOWN_TARGET"


def test_out_of_scope_exit_code():
    code, rep = run_cli(["compatible", "--session", str(FIXTURES / "quadric5.spl")])
    assert code == 4
    assert rep["error"]["code"] == "OUT_OF_SCOPE"


def test_threads_env_validation_and_equivalence():
    code, rep = run_cli(
        ["fpure", "--session", str(FIXTURES / "fermat7.spl")],
        env={"SPLINCAL_THREADS": "zero"},
    )
    assert code == 3
    base_code, base = run_cli(["compatible", "--session", str(FIXTURES / "node5.spl")])
    thr_code, thr = run_cli(
        ["compatible", "--session", str(FIXTURES / "node5.spl")],
        env={"SPLINCAL_THREADS": "2"},
    )
    assert base_code == thr_code == 0
    assert base["result"] == thr["result"]


def test_missing_session_file():
    code, rep = run_cli(["fpure", "--session", str(FIXTURES / "nope.spl")])
    assert code == 3
    assert rep["error"]["code"] == "IO_ERROR"


# ---- malformed corpus -----------------------------------------------------------


EXPECTED_MALFORMED = {i: (2, "PARSE_ERROR") for i in range(49)}
EXPECTED_MALFORMED[21] = (3, "PRECONDITION")
EXPECTED_MALFORMED[22] = (3, "PRECONDITION")
EXPECTED_MALFORMED[49] = (3, "INVALID_WITNESS")


@pytest.mark.parametrize("case", sorted(EXPECTED_MALFORMED))
def test_malformed_corpus_stable_codes(case):
    path = FIXTURES / "malformed" / f"case{case:02d}.spl"
    command = "compatible" if case == 49 else "fpure"
    code, rep = run_cli([command, "--session", str(path)])
    expected_code, expected_err = EXPECTED_MALFORMED[case]
    assert code == expected_code
    assert rep["error"]["code"] == expected_err
    assert "result" not in rep


def test_parse_errors_carry_lines():
    with pytest.raises(ParseError) as err:
        parse_session("ring R = poly(p=7; vars=x; order=lex) / ideal(x^2)\nbadline here\n")
    assert err.value.line == 2


def test_lex_order_session():
    code, rep = run_cli(["fpure", "--session", str(FIXTURES / "lex7.spl")])
    assert code == 0 and rep["result"]["fpure"] is True
    code, rep = run_cli(
        ["star", "--session", str(FIXTURES / "lex7.spl"), "--target", "J"]
    )
    assert code == 0
    assert rep["result"]["star"] == ["x"]


def test_auto_witness_requires_fpure():
    code, rep = run_cli(
        ["star", "--session", str(FIXTURES / "fermat2.spl"), "--target", "J"]
    )
    assert code == 3
    assert rep["error"]["code"] == "NOT_FPURE"
    code, rep = run_cli(["compatible", "--session", str(FIXTURES / "cusp5.spl")])
    assert code == 3
    assert rep["error"]["code"] == "NOT_FPURE"


def test_cross_process_determinism():
    import subprocess
    import sys

    cmd = [
        sys.executable,
        "-m",
        "splincal.cli",
        "star",
        "--session",
        str(FIXTURES / "node5.spl"),
        "--target",
        "D",
        "--json",
        "-",
    ]
    outs = []
    for _ in range(2):
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0
        rep = json.loads(proc.stdout)
        rep.pop("wall_time_ms")
        outs.append(json.dumps(rep, sort_keys=True))
    assert outs[0] == outs[1]


def test_replaying_echoed_session_reproduces_payload(tmp_path):
    code, rep = run_cli(
        ["trace", "--session", str(FIXTURES / "cusp5.spl"), "--target", "N"]
    )
    assert code == 0
    echoed = tmp_path / "echo.spl"
    echoed.write_text(rep["inputs"]["session"])
    code2, rep2 = run_cli(["trace", "--session", str(echoed), "--target", "N"])
    assert code2 == 0
    assert rep2["result"] == rep["result"]
    assert rep2["inputs"]["session"] == rep["inputs"]["session"]
