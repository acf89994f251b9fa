"""The stochastic trend with noise benchmark model and its exact oracle.

    y_t = x_t + nu_t,        nu_t  ~ N(0, sigma2)
    x_t = x_{t-1} + eps_t,   eps_t ~ N(0, tau2)

This local-level model is linear Gaussian, so the Kalman filter gives the
exact filtering distribution; it ships as part of the library so particle
runs can always be validated against a closed-form answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteWeightError

LOG_TWO_PI = math.log(2.0 * math.pi)


@dataclass
class TrendNoiseModel:
    sigma2: float = 1.0
    tau2: float = 0.1
    x0_mean: float = 0.0
    x0_var: float = 10.0

    def __post_init__(self):
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValueError("sigma2 must be positive and finite")
        if not (self.tau2 >= 0 and math.isfinite(self.tau2)):
            raise ValueError("tau2 must be nonnegative and finite")
        if not (self.x0_var >= 0 and math.isfinite(self.x0_var)):
            raise ValueError("x0_var must be nonnegative and finite")


@dataclass(frozen=True)
class InverseGammaPrior:
    """Shape-scale inverse gamma: density ~ x^-(a+1) exp(-b/x), mean b/(a-1)."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("inverse-gamma shape and scale must be positive")

    @property
    def mean(self):
        if self.shape <= 1:
            return math.inf
        return self.scale / (self.shape - 1)


@dataclass
class Priors:
    """Priors for particle learning on the trend+noise model.

    ``sigma2`` and ``tau2`` accept either an :class:`InverseGammaPrior` (the
    parameter is learned) or a plain float (the parameter is known and held
    fixed).  Defaults follow the benchmark calibration, whose prior means sit
    exactly on the true values sigma2=1 and tau2=0.1.
    """

    x0_mean: float = 0.0
    x0_var: float = 10.0
    sigma2: InverseGammaPrior | float = field(
        default_factory=lambda: InverseGammaPrior(5.0, 4.0))
    tau2: InverseGammaPrior | float = field(
        default_factory=lambda: InverseGammaPrior(5.0, 0.4))

    def __post_init__(self):
        if self.x0_var < 0:
            raise ValueError("x0_var must be nonnegative")
        for name in ("sigma2", "tau2"):
            v = getattr(self, name)
            if isinstance(v, (int, float)) and not v > 0:
                raise ValueError(f"fixed {name} must be positive")

    @property
    def learns_sigma2(self):
        return isinstance(self.sigma2, InverseGammaPrior)

    @property
    def learns_tau2(self):
        return isinstance(self.tau2, InverseGammaPrior)


def simulate(model, t_len, stream):
    """Draw (states, observations) for t = 1..t_len from a known x_0.

    The path is a pure function of the stream position.
    """
    if t_len < 1:
        raise ValueError("t_len must be >= 1")
    z = stream.normals(2 * t_len)
    eps = math.sqrt(model.tau2) * z[:t_len]
    nu = math.sqrt(model.sigma2) * z[t_len:]
    states = model.x0_mean + np.cumsum(eps)
    return states, states + nu


def log_likelihood(model, y_t, x_t):
    """log N(y_t; x_t, sigma2), elementwise over x_t."""
    x = np.asarray(x_t, dtype=np.float64)
    if not (np.isfinite(y_t) and np.isfinite(x).all()):
        raise NonFiniteWeightError("log_likelihood inputs must be finite")
    r = y_t - x
    return -0.5 * (LOG_TWO_PI + math.log(model.sigma2)) - 0.5 * r * r / model.sigma2


def propagate(model, x_prev, stream):
    """One state transition: x_prev + sqrt(tau2) * z, z ~ N(0,1).

    ``x_prev`` may be a scalar or an array; the stream supplies one draw per
    element (a :class:`~parsmc.rng.StreamArray` draws one per lane).
    """
    x = np.asarray(x_prev, dtype=np.float64)
    if hasattr(stream, "stream_ids"):
        z = stream.normals()
    else:
        z = stream.normals(x.size).reshape(x.shape) if x.ndim else stream.normal()
    return x + math.sqrt(model.tau2) * z


def kalman_filter(y, sigma2, tau2, m0=0.0, c0=10.0):
    """Exact local-level Kalman recursion; returns (means, variances).

    predict: R_t = C_{t-1} + tau2
    update:  K_t = R_t / (R_t + sigma2)
             m_t = m_{t-1} + K_t (y_t - m_{t-1})
             C_t = (1 - K_t) R_t
    """
    y = np.asarray(y, dtype=np.float64)
    means = np.empty(len(y))
    variances = np.empty(len(y))
    m, c = float(m0), float(c0)
    for t, y_t in enumerate(y):
        r = c + tau2
        k = r / (r + sigma2)
        m = m + k * (y_t - m)
        c = (1.0 - k) * r
        means[t] = m
        variances[t] = c
    return means, variances
