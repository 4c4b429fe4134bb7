"""Every primary acceptance criterion, one test each.

Criteria 1-11 run through the library's acceptance runner; criterion 12 runs
the installed command line twice and compares the bytes.  Each test prints
its pass/fail line, and the terminal summary repeats all of them.
"""

import subprocess
import sys
import time

import pytest

from conftest import ACCEPTANCE_LINES
from jetforge.acceptance import CRITERIA, CriterionResult

SEED = 0
BUDGET = 120.0


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number):
    start = time.perf_counter()
    result = CRITERIA[number](SEED)
    elapsed = time.perf_counter() - start
    ok = result.passed and elapsed < BUDGET
    line = CriterionResult(number, result.title, ok, result.details).line()
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert result.passed, result.details
    assert elapsed < BUDGET


def _autotest():
    cmd = [sys.executable, "-m", "jetforge.cli", "autotest", "--seed", "7"]
    return subprocess.run(cmd, capture_output=True, timeout=BUDGET)


def test_criterion_12_determinism():
    first, second = _autotest(), _autotest()
    ok = first.returncode == 0 and first.stdout == second.stdout and b'"passed": true' in first.stdout
    line = CriterionResult(12, "autotest --seed 7 is byte-identical across runs", ok, {}).line()
    ACCEPTANCE_LINES[12] = line
    print(line)
    assert first.returncode == 0, first.stderr.decode()
    assert first.stdout == second.stdout
    assert len(first.stdout) > 1000
