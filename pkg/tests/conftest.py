"""Replays the acceptance gate's verdict lines after the test summary.

test_acceptance.py appends one "[criterion N] PASS/FAIL ..." line per
criterion; printing them here puts the scoreboard on the terminal even
when every test passes (per-test stdout is only shown for failures).
"""

criterion_lines = []


def pytest_terminal_summary(terminalreporter):
    if not criterion_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in criterion_lines:
        terminalreporter.write_line(line)
