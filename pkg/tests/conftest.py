import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

_ACCEPTANCE: dict[tuple[int, str], str] = {}


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion.

    Usage: ``criterion(n, ok, detail)``; the line is printed immediately and
    again in the terminal summary. ``tag`` marks a supplementary line.
    """
    def record(number: int, ok: bool, detail: str, tag: str = "") -> bool:
        name = f"{number:2d}" + (f" ({tag})" if tag else "")
        line = f"criterion {name}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[(number, tag)] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[key])
