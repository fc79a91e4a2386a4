"""Thread budget for FFT work, capped by the ``IMEX_THREADS`` variable."""
from __future__ import annotations

import os

from .errors import ConfigError

__all__ = ["fft_workers"]


def fft_workers() -> int:
    """Number of FFT worker threads.

    ``IMEX_THREADS`` (a positive integer) caps the count; otherwise every
    core available to the process is used.
    """
    try:
        avail = len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        avail = os.cpu_count() or 1
    raw = os.environ.get("IMEX_THREADS", "").strip()
    if not raw:
        return avail
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConfigError(f"IMEX_THREADS must be a positive integer, got {raw!r}") from exc
    if cap < 1:
        raise ConfigError(f"IMEX_THREADS must be a positive integer, got {raw!r}")
    return min(cap, avail)
