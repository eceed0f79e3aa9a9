import pytest

CRITERIA: list[str] = []


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion.

    Usage: ``with criterion("3", "quantization triplets"): ...``
    """
    from contextlib import contextmanager

    @contextmanager
    def check(number, label):
        try:
            yield
        except BaseException as exc:
            line = f"FAIL  criterion {number:>2}: {label} ({type(exc).__name__})"
            CRITERIA.append(line)
            print(line)
            raise
        line = f"PASS  criterion {number:>2}: {label}"
        CRITERIA.append(line)
        print(line)

    return check


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
