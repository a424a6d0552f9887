"""Shared pytest hooks for the acceptance run.

test_acceptance records one verdict per numbered check through
record_result; the terminal-summary hook prints the collected lines as a
compact block at the end of the session so the overall outcome is
readable without scrolling through per-test output.
"""

_RESULTS = {}


def record_result(num, ok, detail):
    _RESULTS[num] = (bool(ok), str(detail))


def has_result(num):
    return num in _RESULTS


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        ok, detail = _RESULTS[num]
        word = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {word}  {detail}")
