import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "dhlab",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("stress", parent=settings.get_profile("dhlab"), max_examples=400)
settings.load_profile(os.environ.get("DHLAB_HYPOTHESIS_PROFILE", "dhlab"))

ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion.

    Call ``criterion(label, ok, detail)`` before asserting.
    """

    def record(label, ok, detail=""):
        prev = ACCEPTANCE_LINES.get(label)
        state = "PASS" if ok else "FAIL"
        if prev is not None:
            old_state, _, old_detail = prev.partition("  ")
            state = "FAIL" if "FAIL" in (state, old_state) else "PASS"
            detail = f"{old_detail}; {detail}" if old_detail else detail
        ACCEPTANCE_LINES[label] = f"{state}  {detail}".rstrip()

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")

    def key(label):
        return int(label.split()[1])

    for label in sorted(ACCEPTANCE_LINES, key=key):
        terminalreporter.write_line(f"{label}: {ACCEPTANCE_LINES[label]}")
