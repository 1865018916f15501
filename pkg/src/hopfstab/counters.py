"""Instrumentation: model-evaluation and linear-solve counters.

The linear-solve log is per-thread so concurrent pipelines do not interleave.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field


@dataclass
class EvalCounter:
    """Mutable call counter attached to a DynSystem."""

    residual_calls: int = 0
    jacobian_calls: int = 0

    def reset(self) -> None:
        self.residual_calls = 0
        self.jacobian_calls = 0


_local = threading.local()


def _logs() -> list:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def log_solve(kind: str) -> None:
    """Record one dense linear-solve event on every active log."""
    for log in _logs():
        log.append(kind)


@dataclass
class SolveLog:
    """Context manager collecting linear-solve events by kind.

    >>> with SolveLog() as log:
    ...     ...
    >>> log.count("evp_adjoint")
    """

    events: list = field(default_factory=list)

    def __enter__(self) -> "SolveLog":
        self.events.clear()
        _logs().append(self.events)
        return self

    def __exit__(self, *exc) -> None:
        _logs().remove(self.events)

    def count(self, kind: str | None = None) -> int:
        if kind is None:
            return len(self.events)
        return sum(1 for e in self.events if e == kind)
