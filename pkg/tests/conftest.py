import time

_START = time.perf_counter()
SUITE_LIMIT_S = 180.0


def pytest_terminal_summary(terminalreporter):
    elapsed = time.perf_counter() - _START
    verdict = "PASS" if elapsed < SUITE_LIMIT_S else "FAIL"
    terminalreporter.write_line(f"[criterion 12] {verdict} full suite runtime {elapsed:.1f} s (limit {SUITE_LIMIT_S:.0f} s)")
