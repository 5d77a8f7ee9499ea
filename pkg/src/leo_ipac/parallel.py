"""Deterministic fan-out helper.

Grid points own independent derived random streams, so results are identical
for any worker count; ordering follows the input sequence.
"""
from __future__ import annotations


def parallel_map(fn, items, workers: int = 1) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=workers, prefer="processes")(delayed(fn)(it) for it in items)
