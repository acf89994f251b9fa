"""Counter-based random number streams for reproducible data-parallel draws.

Every uniform is a pure function of ``(seed, stream_id, counter)``, so any
assignment of particles to worker lanes produces bit-identical draws: there is
no shared generator state and no draw-order dependence.  The generator is
Philox4x64-10; the implementation here is vectorized over numpy arrays and is
verified bit-for-bit against ``numpy.random.Philox`` in the test suite.

Draw ``k`` of a stream maps to word ``k & 3`` of the Philox block with counter
``(k >> 2, 0, 0, 0)`` and key ``(seed, stream_id)``.  Lockstep draws (all
streams at the same counter, the common case inside the filter loop) reuse the
four words of one block, so one Philox evaluation serves up to four
consecutive draws per stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.special import gammaincinv, ndtri

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)

#: stream ids at and above this value are reserved for auxiliary streams
#: (data simulation, the shared systematic-resampling offset, ...) so they
#: can never collide with per-particle streams.
AUX_STREAM_BASE = 1 << 62


def _mulhilo64(a, b):
    """Full 128-bit product of uint64 arrays, as (high, low) uint64 words."""
    lo = a * b
    a_lo = a & _MASK32
    a_hi = a >> _S32
    b_lo = b & _MASK32
    b_hi = b >> _S32
    t = a_lo * b_hi + ((a_lo * b_lo) >> _S32)
    hi = a_hi * b_hi + (t >> _S32) + (((t & _MASK32) + a_hi * b_lo) >> _S32)
    return hi, lo


def philox4x64_block(c0, c1, c2, c3, k0, k1):
    """One Philox4x64-10 block: four uint64 output words per counter.

    All arguments are uint64 scalars or broadcastable arrays.  Matches the
    Random123 reference network (numpy's ``Philox`` bit generator emits the
    same words after its internal counter pre-increment).
    """
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        for _ in range(10):
            hi0, lo0 = _mulhilo64(_M0, c0)
            hi1, lo1 = _mulhilo64(_M1, c2)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
            k0 = k0 + _W0
            k1 = k1 + _W1
    return c0, c1, c2, c3


@njit(cache=True)
def _philox_block_lanes(block, seed, stream_ids, w0, w1, w2, w3):
    """Compiled lockstep kernel: the block at one shared counter for every
    stream id.  Identical arithmetic to :func:`philox4x64_block` (asserted in
    the tests); exists because a 10-round vectorized pass costs hundreds of
    numpy dispatches, which dominates small particle counts."""
    for i in range(stream_ids.shape[0]):
        c0 = block
        c1 = np.uint64(0)
        c2 = np.uint64(0)
        c3 = np.uint64(0)
        k0 = seed
        k1 = stream_ids[i]
        for _ in range(10):
            a_lo = _M0 & _MASK32
            a_hi = _M0 >> _S32
            b_lo = c0 & _MASK32
            b_hi = c0 >> _S32
            t = a_lo * b_hi + ((a_lo * b_lo) >> _S32)
            hi0 = a_hi * b_hi + (t >> _S32) + (((t & _MASK32) + a_hi * b_lo) >> _S32)
            lo0 = _M0 * c0
            a_lo = _M1 & _MASK32
            a_hi = _M1 >> _S32
            b_lo = c2 & _MASK32
            b_hi = c2 >> _S32
            t = a_lo * b_hi + ((a_lo * b_lo) >> _S32)
            hi1 = a_hi * b_hi + (t >> _S32) + (((t & _MASK32) + a_hi * b_lo) >> _S32)
            lo1 = _M1 * c2
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
            k0 = k0 + _W0
            k1 = k1 + _W1
        w0[i] = c0
        w1[i] = c1
        w2[i] = c2
        w3[i] = c3


def philox_block_lanes(block, seed, stream_ids):
    """Four output words per stream id, all at one shared block counter."""
    n = stream_ids.shape[0]
    words = np.empty((4, n), dtype=np.uint64)
    _philox_block_lanes(np.uint64(block), np.uint64(seed),
                        np.ascontiguousarray(stream_ids, dtype=np.uint64),
                        words[0], words[1], words[2], words[3])
    return words


def _to_unit_open(word):
    """Map uint64 words to doubles strictly inside (0, 1).

    (k + 0.5) * 2**-52 with k < 2**52: the offset keeps both endpoints out,
    and k + 0.5 is exactly representable, so no draw can round to 0 or 1.
    """
    return ((word >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52


def uniforms_at(seed, stream_ids, counters):
    """Uniform(0,1) draws, one per (stream_id, counter) pair.

    Pure function: the same triple always yields the same value, on any
    backend and any lane decomposition.
    """
    stream_ids = np.asarray(stream_ids, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    stream_ids, counters = np.broadcast_arrays(stream_ids, counters)
    block = counters >> np.uint64(2)
    word = counters & np.uint64(3)
    zero = np.zeros_like(block)
    w = philox4x64_block(block, zero, zero, zero, np.uint64(seed), stream_ids)
    out = w[0].copy()
    for i in (1, 2, 3):
        sel = word == i
        if sel.any():
            out[sel] = w[i][sel]
    return _to_unit_open(out)


@dataclass
class RngStream:
    """A single counter-based stream: scalar draws plus vectorized batches."""

    seed: int
    stream_id: int = 0
    counter: int = 0

    def uniform(self):
        """One uniform in the open interval (0,1); advances the counter."""
        u = uniforms_at(self.seed, [self.stream_id], [self.counter])
        self.counter += 1
        return float(u[0])

    def uniforms(self, n):
        counters = self.counter + np.arange(n, dtype=np.uint64)
        self.counter += int(n)
        return uniforms_at(self.seed, np.uint64(self.stream_id), counters)

    def normal(self):
        return float(ndtri(self.uniform()))

    def normals(self, n):
        return ndtri(self.uniforms(n))

    def advance(self, n):
        """Skip n draws; drawing afterwards equals drawing the (counter+n)-th
        value directly."""
        self.counter += int(n)
        return self


@dataclass
class StreamArray:
    """One independent stream per particle lane, in struct-of-arrays form.

    All streams advance in lockstep inside the filter loop, which lets a
    single Philox block evaluation (four words) feed up to four consecutive
    draws of every stream.  The cache is transparent: results are identical
    to elementwise :func:`uniforms_at` calls.
    """

    seed: int
    stream_ids: np.ndarray
    counters: np.ndarray
    _cache_block: int | None = field(default=None, repr=False)
    _cache_words: tuple | None = field(default=None, repr=False)

    @classmethod
    def for_lanes(cls, seed, n, counter=0):
        return cls(
            seed=int(seed),
            stream_ids=np.arange(n, dtype=np.uint64),
            counters=np.full(n, counter, dtype=np.uint64),
        )

    def __len__(self):
        return len(self.stream_ids)

    def _lockstep_counter(self):
        c = int(self.counters[0])
        if int(self.counters[-1]) != c:
            return None
        return c

    def uniforms(self):
        """One uniform per stream at the current counters; counters += 1."""
        c = self._lockstep_counter()
        if c is None:
            u = uniforms_at(self.seed, self.stream_ids, self.counters)
            self.counters += np.uint64(1)
            return u
        block = c >> 2
        if self._cache_block != block:
            self._cache_words = philox_block_lanes(block, self.seed, self.stream_ids)
            self._cache_block = block
        out = _to_unit_open(self._cache_words[c & 3])
        self.counters += np.uint64(1)
        return out

    def normals(self):
        return ndtri(self.uniforms())

    def inverse_gammas(self, shape, scale):
        """Inverse-gamma draws (shape-scale parameterization, mean
        scale/(shape-1)) via the gamma quantile function: one uniform each."""
        return scale / gammaincinv(shape, self.uniforms())

    def skip(self, n):
        self.counters += np.uint64(n)
        return self
