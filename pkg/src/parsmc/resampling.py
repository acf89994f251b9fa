"""Resampling algorithms: sequential baselines and the exact parallel path.

Five schemes over a normalized CDF ``q`` (nondecreasing, ``q[-1] == 1``):

* :func:`resample_naive` -- exact multinomial; restarts a linear scan at the
  head of the CDF for every draw, the O(N^2) reference.
* :func:`resample_sorted` -- exact multinomial; sorts the uniforms so each
  search resumes where the previous one stopped (O(N log N), sort-dominated).
* :func:`resample_stratified` / :func:`resample_systematic` -- low-variance
  approximations, one draw per 1/N stratum; not exact multinomial samples.
* :func:`resample_cutpoint` -- exact multinomial with O(1) expected work per
  draw and no loop-carried state: every lane draws independently and starts
  its scan at a precomputed cut-point.

All indices are 1-based (matching the ceil(N*u) cut-point arithmetic);
subtract 1 before fancy-indexing particle arrays.
"""

from __future__ import annotations

import time

import numpy as np
from numba import njit

from .backend import Backend


def merge_indices(cdf, u):
    """Smallest 1-based index i with u < q(i), per sorted-merge semantics.

    For nondecreasing u this equals restarting each linear search where the
    previous one stopped; ``searchsorted`` gives the identical result without
    the loop-carried scan position.
    """
    return np.searchsorted(cdf, u, side="right") + 1


@njit(cache=True)
def _naive_scan(q, u):
    out = np.empty(u.shape[0], dtype=np.int64)
    for i in range(u.shape[0]):
        ui = u[i]
        j = 0
        while ui >= q[j]:
            j += 1
        out[i] = j + 1
    return out


def resample_naive(cdf, streams):
    """Exact multinomial resampling by a fresh head-to-tail scan per draw."""
    u = streams.uniforms()
    return _naive_scan(np.asarray(cdf, dtype=np.float64), u)


def resample_sorted(cdf, streams):
    """Exact multinomial resampling with pre-sorted uniforms.

    Returns ``(indices, sort_ns)``; the sort is timed separately so benchmark
    reports can quote the resampling cost with and without it.
    """
    u = streams.uniforms()
    t0 = time.perf_counter_ns()
    u_sorted = np.sort(u)
    sort_ns = time.perf_counter_ns() - t0
    return merge_indices(cdf, u_sorted), sort_ns


def resample_stratified(cdf, streams):
    """One uniform per stratum [(j-1)/N, j/N); nondecreasing output."""
    n = len(cdf)
    v = streams.uniforms()
    u = (np.arange(n) + v) / n
    return merge_indices(cdf, u)


def resample_systematic(cdf, stream):
    """A single offset shared by every stratum; nondecreasing output.

    Takes one scalar stream: the draw is inherently shared, only the CDF
    search is per-slot work.
    """
    n = len(cdf)
    v = stream.uniform()
    u = (np.arange(n) + v) / n
    return merge_indices(cdf, u)


_BRUTE_BLOCK_CELLS = 1 << 24


def cut_points_bruteforce(cdf):
    """Cut-point table by direct scan: idx[j] = min{ i : q(i) > (j-1)/N }.

    O(N^2) reference used as the oracle for the parallel search.
    """
    q = np.asarray(cdf)
    n = len(q)
    thresholds = np.arange(n, dtype=q.dtype) / q.dtype.type(n)
    out = np.empty(n, dtype=np.int64)
    block = max(1, _BRUTE_BLOCK_CELLS // n)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        hits = q[None, :] > thresholds[lo:hi, None]
        out[lo:hi] = np.argmax(hits, axis=1) + 1
    return out


def cut_points_parallel(cdf, backend=None):
    """Cut-point table via the per-lane search.

    Lane j computes L_j = ceil(N*q(j)) and owns output slots
    (L_{j-1}, L_j]; a lane with L_j == L_{j-1} writes nothing.  Slots are
    disjoint, so no synchronization is needed beyond the final barrier, and
    the result equals :func:`cut_points_bruteforce` exactly.
    """
    q = np.asarray(cdf)
    n = len(q)
    if backend is None:
        backend = Backend()
    # N*q is an exact exponent shift for power-of-two N, so the ceilings
    # agree exactly with the brute-force strict comparisons against (j-1)/N.
    bounds = np.ceil(q * q.dtype.type(n)).astype(np.int64)
    out = np.empty(n, dtype=np.int64)

    def assign(lo, hi):
        prev = bounds[lo - 1] if lo > 0 else 0
        counts = np.diff(bounds[lo:hi], prepend=prev)
        out[prev:bounds[hi - 1]] = np.repeat(
            np.arange(lo + 1, hi + 1, dtype=np.int64), counts)

    backend.run(n, assign)
    return out


def cut_point_draw(cdf, cuts, u):
    """One cut-point lookup: start at I_ceil(N*u), advance while u > q(k)."""
    n = len(cdf)
    k = int(cuts[int(np.ceil(n * u)) - 1])
    while u > cdf[k - 1]:
        k += 1
    return k


def cutpoint_indices(cdf, cuts, u):
    """Vectorized :func:`cut_point_draw` over an array of uniforms."""
    q = np.asarray(cdf)
    n = len(q)
    k = cuts[np.ceil(u * n).astype(np.int64) - 1].copy()
    # Expected O(1) advance per draw; bounded by max_j (L_j - L_{j-1}).
    active = u > q[k - 1]
    while active.any():
        k[active] += 1
        (where,) = np.nonzero(active)
        still = u[where] > q[k[where] - 1]
        active[where] = still
    return k


def resample_cutpoint(cdf, streams, backend=None):
    """Exact multinomial resampling, fully parallel.

    Each lane draws from its own stream and runs the cut-point lookup; output
    slots are disjoint and the result is independent of lane scheduling.
    """
    if backend is None:
        backend = Backend()
    u = streams.uniforms()
    cuts = cut_points_parallel(cdf, backend)
    out = np.empty(len(u), dtype=np.int64)

    def lane(lo, hi):
        out[lo:hi] = cutpoint_indices(cdf, cuts, u[lo:hi])

    backend.run(len(u), lane)
    return out
