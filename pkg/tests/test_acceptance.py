"""The fourteen acceptance criteria, one test each.

Each test prints the criterion's pass/fail line; the lines are repeated in
the terminal summary.  Run this file directly to get the lines without
pytest.  Criterion 2 is a known failure: the stated midpoint of the circle
lift does not hold (the lift passes through cos(theta) i + sin(theta) k), so
it is marked as a strict expected failure rather than relaxed.
"""

import sys

import pytest

from scl.suite import CRITERIA, run_criterion

LINES = []
STATE = {}

KNOWN_FAILURES = {
    2: "stated midpoint cos(2 theta) i + sin(2 theta) k is not on the lift; measured midpoint is cos(theta) i + sin(theta) k",
}


def _param(number):
    marks = []
    if number in KNOWN_FAILURES:
        marks.append(pytest.mark.xfail(reason=KNOWN_FAILURES[number], strict=True))
    return pytest.param(number, marks=marks, id=f"criterion_{number:02d}")


@pytest.mark.parametrize("number", [_param(n) for n, *_ in CRITERIA])
def test_criterion(number):
    result = run_criterion(number, STATE)
    line = result.line()
    LINES.append(line)
    print(line)
    assert result.passed, f"{line}\n{result.details}"


if __name__ == "__main__":
    state = {}
    ok = True
    for n, *_ in CRITERIA:
        r = run_criterion(n, state)
        print(r.line())
        ok &= r.passed
    sys.exit(0 if ok else 1)
