"""Shared particle-system types and weight normalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllWeightsZeroError, NonFiniteWeightError, NotPowerOfTwoError


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def check_power_of_two(n, what="particle count"):
    if not is_power_of_two(n):
        raise NotPowerOfTwoError(f"{what} must be a power of two, got {n}")


def check_weights(weights):
    """Validate a weight vector: finite, nonnegative, 1-d float array."""
    w = np.asarray(weights)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a nonempty 1-d array")
    if not np.isfinite(w).all():
        raise NonFiniteWeightError("weights contain NaN or infinity")
    if (w < 0).any():
        raise ValueError("weights must be nonnegative")
    return w


def normalize_weights(weights):
    """Scale nonnegative weights so they sum to one.

    Proportionality is preserved; the sum of the result is 1 within a few
    units of rounding (the resampling CDF, not this function, pins its last
    entry to exactly 1).

    Raises
    ------
    AllWeightsZeroError
        If every weight is zero (total particle degeneracy).
    NonFiniteWeightError
        If any weight is NaN or infinite.
    """
    w = check_weights(weights)
    total = w.sum(dtype=w.dtype if w.dtype.kind == "f" else np.float64)
    if total <= 0:
        raise AllWeightsZeroError()
    return w / total


@dataclass
class ParamDraws:
    """Per-particle parameter draws (struct-of-arrays)."""

    sigma2: np.ndarray
    tau2: np.ndarray

    def take(self, idx):
        return ParamDraws(self.sigma2[idx], self.tau2[idx])

    def copy(self):
        return ParamDraws(self.sigma2.copy(), self.tau2.copy())


@dataclass
class SuffStats:
    """Per-particle conjugate hyperparameters for the variance posteriors.

    Shapes grow by exactly 1/2 per assimilated observation; scales accumulate
    the corresponding squared residuals / increments over each particle's own
    trajectory.
    """

    a_sigma: np.ndarray
    b_sigma: np.ndarray
    a_tau: np.ndarray
    b_tau: np.ndarray

    def take(self, idx):
        return SuffStats(
            self.a_sigma[idx], self.b_sigma[idx],
            self.a_tau[idx], self.b_tau[idx],
        )

    def copy(self):
        return SuffStats(
            self.a_sigma.copy(), self.b_sigma.copy(),
            self.a_tau.copy(), self.b_tau.copy(),
        )


@dataclass
class ParticleSystem:
    """States, weights and (for learning) parameter draws for N particles."""

    states: np.ndarray
    weights: np.ndarray
    params: ParamDraws | None = None
    suffstats: SuffStats | None = None

    @property
    def n(self):
        return len(self.states)

    def take(self, idx):
        """Gather a resampled system; each particle's (state, params,
        suffstats) tuple is copied jointly."""
        return ParticleSystem(
            states=self.states[idx],
            weights=self.weights[idx],
            params=self.params.take(idx) if self.params is not None else None,
            suffstats=self.suffstats.take(idx) if self.suffstats is not None else None,
        )

    def copy(self):
        return ParticleSystem(
            states=self.states.copy(),
            weights=self.weights.copy(),
            params=self.params.copy() if self.params is not None else None,
            suffstats=self.suffstats.copy() if self.suffstats is not None else None,
        )

    def validate(self):
        n = self.n
        if n < 1:
            raise ValueError("particle system is empty")
        arrays = [self.weights]
        if self.params is not None:
            arrays += [self.params.sigma2, self.params.tau2]
        if self.suffstats is not None:
            s = self.suffstats
            arrays += [s.a_sigma, s.b_sigma, s.a_tau, s.b_tau]
        for a in arrays:
            if len(a) != n:
                raise ValueError("particle arrays have mismatched lengths")
        check_weights(self.weights)
        return self
