from __future__ import annotations

import time

from hypothesis import HealthCheck, settings

settings.register_profile("efftop", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("efftop")

# criterion number -> [(passed, description)] per part; filled by test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}
SUITE_LIMIT = 20 * 60
_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - _START
    if 12 in ACCEPTANCE:
        ACCEPTANCE[12].append((elapsed < SUITE_LIMIT, f"session {elapsed:.0f}s"))
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        failed = [d for ok, d in parts if not ok]
        if failed:
            line = f"criterion {n:2d}: FAIL  " + " | ".join(failed)
        else:
            extra = f" (+{len(parts) - 1} more parts)" if len(parts) > 1 else ""
            line = f"criterion {n:2d}: PASS  {parts[0][1]}{extra}"
        terminalreporter.write_line(line)
