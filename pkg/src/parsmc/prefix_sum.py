"""Resampling CDF construction via a two-pass adder tree.

The forward adder collapses neighboring pairs level by level until a single
node holds the grand total; the backward adder walks back down, branching each
node in two: the right child keeps the parent's partial sum, the left child is
the parent minus the forward-adder weight of its right sibling.  Level zero of
the backward pass is the inclusive prefix sum.  Both passes are parallel maps
over disjoint slots with one barrier per level; the pairing structure fixes
the summation order, so results do not depend on the lane count.

The input length must be a power of two (pad with zero weights otherwise:
padded tail particles carry zero probability mass and are never resampled).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import Backend
from .core import check_weights, is_power_of_two
from .errors import AllWeightsZeroError, NotPowerOfTwoError


@dataclass
class AdderTree:
    """Pairwise partial sums: levels[0] is the input, the top level its total."""

    levels: list

    @property
    def n(self):
        return len(self.levels[0])

    @property
    def total(self):
        return self.levels[-1][0]


def sequential_cumsum(weights):
    """Left-to-right inclusive prefix sums (the sequential oracle)."""
    return np.cumsum(np.asarray(weights))


def forward_adder(weights, backend=None):
    """Build the full adder tree by pairwise combination, one level at a time.

    Raises :class:`NotPowerOfTwoError` unless ``len(weights)`` is 2**k.
    """
    w = np.asarray(weights)
    n = w.shape[0]
    if not is_power_of_two(n):
        raise NotPowerOfTwoError(f"forward adder needs a power-of-two input, got {n}")
    if backend is None:
        backend = Backend()
    levels = [w]
    prev = w
    while len(prev) > 1:
        m = len(prev) // 2
        out = np.empty(m, dtype=prev.dtype)

        def combine(lo, hi, prev=prev, out=out):
            out[lo:hi] = prev[2 * lo:2 * hi:2] + prev[2 * lo + 1:2 * hi:2]

        backend.run(m, combine)
        levels.append(out)
        prev = out
    return AdderTree(levels)


def backward_adder(tree, backend=None):
    """Expand an adder tree into inclusive prefix sums.

    At each level the right child inherits the parent's value and the left
    child subtracts the forward-adder weight of the right sibling.
    """
    if backend is None:
        backend = Backend()
    s = tree.levels[-1].copy()
    for d in range(len(tree.levels) - 2, -1, -1):
        w = tree.levels[d]
        child = np.empty(len(w), dtype=s.dtype)

        def branch(lo, hi, parent=s, w=w, child=child):
            child[2 * lo + 1:2 * hi:2] = parent[lo:hi]
            child[2 * lo:2 * hi:2] = parent[lo:hi] - w[2 * lo + 1:2 * hi:2]

        backend.run(len(s), branch)
        s = child
    return s


def _finalize_cdf(prefix, total):
    """Normalize prefix sums into a CDF: divide, pin q[-1] to exactly 1,
    repair any ulp-level monotonicity loss from non-associative addition."""
    if not np.isfinite(total):
        raise AllWeightsZeroError("weight total is not finite")
    if total <= 0:
        raise AllWeightsZeroError()
    q = prefix / total
    np.maximum.accumulate(q, out=q)
    # tree rounding can leave the first entries a few ulp below zero
    np.clip(q, q.dtype.type(0), q.dtype.type(1), out=q)
    q[-1] = 1
    return q


def parallel_cdf(weights, backend=None, pad=False):
    """Resampling CDF q(i) = s(i)/s(N) built from the two adder passes.

    With ``pad=True`` a non-power-of-two input is extended with zero weights
    to the next power of two; the padded tail has zero probability mass, so
    resampling never returns those indices.
    """
    w = check_weights(weights)
    n = w.shape[0]
    if not is_power_of_two(n):
        if not pad:
            raise NotPowerOfTwoError(
                f"parallel CDF needs a power-of-two particle count, got {n} "
                "(set pad=True to zero-pad)")
        m = 1 << (n - 1).bit_length()
        w = np.concatenate([w, np.zeros(m - n, dtype=w.dtype)])
    tree = forward_adder(w, backend)
    prefix = backward_adder(tree, backend)
    return _finalize_cdf(prefix, tree.total)


def sequential_cdf(weights):
    """Resampling CDF built with a plain left-to-right cumulative sum."""
    w = check_weights(weights)
    prefix = np.cumsum(w)
    return _finalize_cdf(prefix, prefix[-1])
