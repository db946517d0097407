"""Deterministic row-chunk scheduling.

Work is split into fixed-size row chunks regardless of worker count, so
the floating-point operations performed for each row never depend on the
degree of parallelism; threads only change which worker runs which chunk.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

CHUNK_ROWS = 1024


def row_chunks(n_rows: int, chunk: int = CHUNK_ROWS) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, n_rows)) for lo in range(0, n_rows, chunk)]


def run_blocks(blocks: list[tuple[int, int]], threads: int, fn: Callable[[int, int], None]) -> None:
    """Call fn(lo, hi) for every block, possibly on several threads.

    fn must write only to its own block's slice of any output and must
    not read slices another block writes.
    """
    if threads <= 1 or len(blocks) == 1:
        for lo, hi in blocks:
            fn(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for _ in pool.map(lambda c: fn(*c), blocks):
            pass


def run_chunked(n_rows: int, threads: int, fn: Callable[[int, int], None]) -> None:
    """run_blocks over fixed-size row chunks."""
    run_blocks(row_chunks(n_rows), threads, fn)
