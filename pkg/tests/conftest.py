import os

import pytest
from hypothesis import settings

# fixed example sequence by default; HYPOTHESIS_PROFILE=explore for random search
settings.register_profile("ci", derandomize=True)
settings.register_profile("explore", max_examples=2000, derandomize=False)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report(request, capsys):
    """Print and record one PASS/FAIL line for an acceptance criterion."""

    def emit(label: str, ok: bool, detail: str) -> bool:
        line = f"{label} {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print(f"\n    {line}", end="")
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
