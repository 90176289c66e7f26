"""Worker-count resolution shared by the resampling and experiment loops."""
from __future__ import annotations

import os
from typing import Optional

ENV_VAR = "STOCHORDER_THREADS"


def resolve_workers(requested: Optional[int], jobs: int) -> int:
    """Number of threads to use for ``jobs`` independent tasks.

    ``requested`` wins over the environment; 0 (or unset) means one thread
    per CPU. Never more threads than jobs.
    """
    if requested is None:
        raw = os.environ.get(ENV_VAR, "0").strip() or "0"
        try:
            requested = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ValueError("thread count must be >= 0")
    if requested == 0:
        requested = os.cpu_count() or 1
    return max(1, min(requested, jobs))
