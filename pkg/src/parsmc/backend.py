"""Execution backend: worker lanes over disjoint index ranges.

Every data-parallel operation in this library is a map over disjoint output
slots, so results are bit-identical whatever the lane count.  The parallel
mode runs lane kernels on a thread pool (numpy releases the GIL inside its
inner loops); a ``run`` call returns only after every lane has finished, which
is the phase barrier of the pipeline.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor, wait


class Backend:
    """Dispatch kernels over worker lanes.

    Parameters
    ----------
    mode : {"sequential", "parallel"}
        Sequential mode runs every kernel as a single full-range call.
    lanes : int
        Worker count in parallel mode.
    min_chunk : int
        Smallest per-lane slice worth dispatching; shorter inputs run on a
        single lane (results are identical either way).
    """

    def __init__(self, mode="sequential", lanes=1, min_chunk=4096):
        if mode not in ("sequential", "parallel"):
            raise ValueError(f"unknown backend mode: {mode!r}")
        if lanes < 1:
            raise ValueError("lanes must be >= 1")
        self.mode = mode
        self.lanes = lanes if mode == "parallel" else 1
        self.min_chunk = min_chunk
        self._pool = None

    def split(self, n):
        """Contiguous lane ranges covering [0, n)."""
        k = min(self.lanes, max(1, n // self.min_chunk))
        base, extra = divmod(n, k)
        ranges = []
        lo = 0
        for i in range(k):
            hi = lo + base + (1 if i < extra else 0)
            if hi > lo:
                ranges.append((lo, hi))
            lo = hi
        return ranges

    def run(self, n, fn):
        """Invoke ``fn(lo, hi)`` over disjoint ranges covering [0, n).

        Acts as a barrier: returns only once all lanes are done.  ``fn`` must
        write only to slots in its own range.
        """
        if n <= 0:
            return
        ranges = self.split(n)
        if self.mode == "sequential" or len(ranges) == 1:
            for lo, hi in ranges:
                fn(lo, hi)
            return
        if self._pool is None:
            self._pool = ThreadPoolExecutor(max_workers=self.lanes)
        futures = [self._pool.submit(fn, lo, hi) for lo, hi in ranges]
        wait(futures)
        for f in futures:
            f.result()  # re-raise lane exceptions

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    def __repr__(self):
        return f"Backend(mode={self.mode!r}, lanes={self.lanes})"
