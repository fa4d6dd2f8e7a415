import time
from contextlib import contextmanager

import pytest

_RESULTS = pytest.StashKey[dict]()


class _Outcome:
    def __init__(self):
        self.detail = ""


@pytest.fixture
def criterion(request):
    """Context manager recording one acceptance criterion as PASS or FAIL."""
    store = request.config.stash.setdefault(_RESULTS, {})

    @contextmanager
    def record(number, title):
        outcome = _Outcome()
        start = time.perf_counter()
        try:
            yield outcome
        except BaseException as exc:
            msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            store[number] = (title, False, f"{msg} [{time.perf_counter() - start:.1f}s]")
            print(f"\nACCEPTANCE {number}: FAIL {title}: {msg}")
            raise
        line = f"{outcome.detail} [{time.perf_counter() - start:.1f}s]".strip()
        store[number] = (title, True, line)
        print(f"\nACCEPTANCE {number}: PASS {title}: {line}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_RESULTS, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        title, ok, detail = store[number]
        terminalreporter.write_line(f"{number}. {'PASS' if ok else 'FAIL'}  {title}: {detail}")
