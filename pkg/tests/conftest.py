"""Shared pytest plumbing: the acceptance-criteria reporter.

Acceptance tests record one entry per criterion; after the run the summary
section prints one PASS/FAIL line for each.
"""

_ACCEPTANCE: list[tuple[float, str, bool, str]] = []


def record_criterion(num: float, description: str, passed: bool, detail: str = "") -> None:
    """Record a criterion outcome, then enforce it."""
    _ACCEPTANCE.append((num, description, bool(passed), detail))
    assert passed, f"acceptance criterion {num} FAILED: {description} ({detail})"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, description, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {num:>4} {status}  {description}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
