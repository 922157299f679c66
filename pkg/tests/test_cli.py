import io

import pytest

from cnltrace.cli import main
from cnltrace.specdsl import default_spec_text
from conftest import GOLDEN, REFERENCE_TRACE

NO_MONITOR = """\
[alphabet]
b l g x r w
[subject]
the user
[lexicon]
b = gave a bad password
l = requested to log in
g = gave a good password
x = logged out
r = read from a file
w = wrote to a file
"""


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "login.spec"
    path.write_text(default_spec_text(), encoding="utf-8")
    return str(path)


def run(argv, capsys, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_level0_golden(spec_file, capsys):
    code, out, err = run(["explain", "--spec", spec_file, "--level", "0", "--trace", REFERENCE_TRACE], capsys)
    assert code == 0 and err == ""
    assert out == (GOLDEN / "cnl0.txt").read_text(encoding="utf-8")


def test_default_level_is_3(spec_file, capsys):
    code, out, _ = run(["explain", "--spec", spec_file, "--max-count", "4", "--trace", REFERENCE_TRACE], capsys)
    assert code == 0
    assert out.splitlines() == [
        "1. The user successfully logged in a number of times, with one off bad logins in between.",
        "2. The user unsuccessfully attempted to log in 3 times.",
        "3. Finally, the user requested to log in, which should not have been allowed.",
    ]


def test_single_action(spec_file, tmp_path, capsys):
    code, out, _ = run(["explain", "--spec", spec_file, "--level", "1", "--format", "plain",
                        "--trace", "l"], capsys)
    assert (code, out) == (0, "1. The user requested to log in.\n")
    bare = tmp_path / "bare.spec"
    bare.write_text(NO_MONITOR, encoding="utf-8")
    code, out, _ = run(["explain", "--spec", str(bare), "--level", "1", "--trace", "r"], capsys)
    assert (code, out) == (0, "1. The user read from a file.\n")


def test_unknown_action(spec_file, capsys):
    code, out, err = run(["explain", "--spec", spec_file, "--trace", "lgq"], capsys)
    assert code == 1 and out == ""
    assert "UnknownAction" in err and "'q'" in err and "position 2" in err


def test_input_file_and_stdin(spec_file, tmp_path, capsys, monkeypatch):
    trace = tmp_path / "trace.txt"
    trace.write_text("lgx\n", encoding="utf-8")
    code, out, _ = run(["explain", "--spec", spec_file, "--level", "2", "--input", str(trace)], capsys)
    assert (code, out) == (0, "1. The user requested to log in, gave a good password and logged out.\n")
    code2, out2, _ = run(["explain", "--spec", spec_file, "--level", "2", "-"], capsys,
                         stdin="l g x", monkeypatch=monkeypatch)
    assert (code2, out2) == (0, out)


def test_formats(spec_file, capsys):
    _, html, _ = run(["explain", "--spec", spec_file, "--level", "2", "--format", "html",
                      "--trace", "lblb"], capsys)
    assert html.startswith("<ol>\n<li>") and html.endswith("</ol>\n")
    _, tex, _ = run(["explain", "--spec", spec_file, "--level", "2", "--format", "latex",
                     "--trace", "lblb"], capsys)
    assert tex.count("\\item ") == 2


@pytest.mark.parametrize("argv", [
    [],
    ["explain"],
    ["explain", "--spec", "x.spec", "--level", "7", "--trace", "l"],
    ["explain", "--spec", "x.spec", "--format", "rtf", "--trace", "l"],
    ["explain", "--spec", "x.spec", "--max-count", "-1", "--trace", "l"],
    ["frobnicate"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_trace_source_required(spec_file, capsys):
    code, _, err = run(["explain", "--spec", spec_file], capsys)
    assert code == 2 and "--trace" in err
    code, _, _ = run(["explain", "--spec", spec_file, "--trace", "l", "--input", "f"], capsys)
    assert code == 2


def test_spec_errors(tmp_path, capsys):
    bad = tmp_path / "bad.spec"
    bad.write_text("[alphabet]\nl l\n", encoding="utf-8")
    code, _, err = run(["explain", "--spec", str(bad), "--trace", "l"], capsys)
    assert code == 1 and err.startswith(f"{bad}:2:3: DuplicateSymbol")
    code, _, err = run(["explain", "--spec", str(tmp_path / "missing.spec"), "--trace", "l"], capsys)
    assert code == 1 and err


def test_validate(spec_file, tmp_path, capsys):
    assert run(["validate", "--spec", spec_file], capsys)[0] == 0
    bad = tmp_path / "bad.spec"
    bad.write_text(default_spec_text().replace("LO0 l A0\n", "LO0 l A0\nLO0 l LI\n"), encoding="utf-8")
    code, _, err = run(["validate", "--spec", str(bad)], capsys)
    assert code == 1 and "NondeterministicMonitor" in err


def test_default_spec_command(capsys):
    code, out, _ = run(["default-spec"], capsys)
    assert code == 0 and out == default_spec_text()


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
