import time

import pytest

from fragpsm.harness import format_matrix, matrix_rows, matrix_verdicts

ACCEPTANCE = {}


def record_acceptance(number: int, title: str, ok: bool, detail: str = "") -> None:
    """Print one case's line; a criterion with several cases passes only if all of them do."""
    _, prev_ok, details = ACCEPTANCE.get(number, (title, True, []))
    ACCEPTANCE[number] = (title, prev_ok and ok, details + ([detail] if detail else []))
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}"
    print(line + (f" ({detail})" if detail else ""))


@pytest.fixture
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, details = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}")
        for d in details:
            terminalreporter.write_line(f"    {d}")


@pytest.fixture(scope="session")
def matrix_run():
    """Full single-worker matrix: (report text, seconds, verdicts with traces)."""
    t = time.perf_counter()
    verdicts = matrix_verdicts()
    text = format_matrix(matrix_rows(verdicts=verdicts))
    return text, time.perf_counter() - t, verdicts
