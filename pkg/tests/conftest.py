import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GATE: list[tuple[int, str]] = []


def record(criterion: int, passed: bool, summary: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion:>2}: {summary}"
    GATE.append((criterion, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if GATE:
        terminalreporter.section("acceptance gate")
        for _, line in sorted(GATE, key=lambda item: item[0]):
            terminalreporter.write_line(line)
