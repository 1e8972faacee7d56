"""Operation tallies for solver runs.

Kernels in :mod:`grcsolve.sparse` bump whichever :class:`OpCounters` is active
in the current context, so a solver only has to wrap its loop in
``with counting(counters):``.
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import asdict, dataclass

__all__ = ["OpCounters", "counting", "active_counters"]


@dataclass
class OpCounters:
    """Cumulative matvec / inner product / vector update tallies.

    ``peak_vectors`` is the largest number of long work vectors a solver
    kept alive at once, not counting ``x``, ``b`` and ``r``.
    ``sweeps`` counts relaxation sweeps (RC inner solver only).
    """

    matvec_count: int = 0
    dot_count: int = 0
    axpy_count: int = 0
    sweeps: int = 0
    peak_vectors: int = 0

    def note_vectors(self, live: int) -> None:
        if live > self.peak_vectors:
            self.peak_vectors = live

    def as_dict(self) -> dict:
        return asdict(self)

    def copy(self) -> "OpCounters":
        return OpCounters(**asdict(self))


_ACTIVE: contextvars.ContextVar[OpCounters | None] = contextvars.ContextVar(
    "grcsolve_counters", default=None
)


def active_counters() -> OpCounters | None:
    return _ACTIVE.get()


@contextlib.contextmanager
def counting(counters: OpCounters):
    token = _ACTIVE.set(counters)
    try:
        yield counters
    finally:
        _ACTIVE.reset(token)
