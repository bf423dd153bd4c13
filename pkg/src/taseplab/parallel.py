"""Replica execution helper.

Tasks are pure functions of their arguments, so results depend only on the
argument list, never on worker count or completion order; outputs are
returned in input order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def run_ordered(fn, args_list, workers: int = 1) -> list:
    """Apply fn to each args tuple, in order, optionally across processes."""
    if workers <= 1 or len(args_list) <= 1:
        return [fn(args) for args in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list))
