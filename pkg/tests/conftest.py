import pytest

from lsstokes.postproc import convergence_sweep

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def sweep_case1():
    return convergence_sweep(1, range(2, 9), tol=1e-10)


@pytest.fixture(scope="session")
def sweep_case3():
    return convergence_sweep(3, range(2, 11), tol=1e-10)


@pytest.fixture(scope="session")
def sweep_case5():
    return convergence_sweep(5, range(2, 9), tol=1e-10)


@pytest.fixture
def record():
    """Record an acceptance verdict: record(number, title)(passed, detail)."""
    def start(number, title):
        def finish(passed, detail=""):
            ACCEPTANCE[number] = (title, bool(passed), detail)
            return passed
        return finish
    return start


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        line = f"[{'PASS' if passed else 'FAIL'}] {number}. {title}"
        terminalreporter.write_line(line + (f": {detail}" if detail else ""))
