"""Collects one verdict line per acceptance criterion for the terminal summary."""

import contextlib
import time

RESULTS: list[str] = []


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record PASS when the block finishes, FAIL with the reason when it raises.

    The block receives a dict it can fill with measured values for the line.
    """
    notes: dict = {}
    t0 = time.perf_counter()
    try:
        yield notes
    except BaseException as exc:
        _emit(number, "FAIL", title, notes, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}".splitlines()[0])
        raise
    _emit(number, "PASS", title, notes, time.perf_counter() - t0)


def _emit(number, verdict, title, notes, seconds, reason=None):
    detail = ", ".join(f"{k}={v}" for k, v in notes.items())
    line = f"criterion {number:2d} {verdict}: {title} [{detail}{'; ' if detail else ''}{seconds:.2f}s]"
    if reason:
        line += f" -- {reason}"
    RESULTS.append(line)
    print(line)
