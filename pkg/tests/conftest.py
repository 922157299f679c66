import sys
from pathlib import Path

import pytest

from cnltrace import ExplanationPipeline, default_spec

REFERENCE_TRACE = "lgrxlblgwwxlgrwxlgxlblblbl"
GOLDEN = Path(__file__).parent / "golden"

CONTEXT_SPEC = """\
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
[context]
x / l [^x]* _ => "logged out"
x / _ => "attempted to log out"
l / l b [^l]* _ b => "attempts to log in again"
l / _ b => "attempts to log in"
l / l [^b] [^l]* _ => "logs in again"
l / _ => "logs in"
"""


@pytest.fixture(scope="session")
def spec():
    return default_spec()


@pytest.fixture(scope="session")
def pipeline(spec):
    return ExplanationPipeline(spec)


@pytest.fixture(scope="session")
def small_pipeline(spec):
    # max_count 3 is enough for every count occurring in short test traces
    return ExplanationPipeline(spec, max_count=3)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
