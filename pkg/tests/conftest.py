import os

from hypothesis import HealthCheck, settings

import helpers

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=300,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    if not helpers.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(helpers.REPORT, key=lambda s: int(s.split()[1])):
        ok, detail = helpers.REPORT[label]
        terminalreporter.write_line(f"{label:<14} {'PASS' if ok else 'FAIL'}  {detail}")
