"""Scikit-learn style estimator wrappers around the filtering drivers.

Both estimators follow the sklearn contract: all hyperparameters are plain
``__init__`` arguments (so ``get_params`` / ``set_params`` / ``clone`` work),
``fit`` validates its input and stores results in trailing-underscore
attributes, and nothing is mutated at construction time.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .backend import Backend
from .filtering import check_observations, run_particle_filter, run_particle_learning
from .models import InverseGammaPrior, Priors, TrendNoiseModel


def _make_backend(mode, lanes):
    return Backend(mode=mode, lanes=lanes)


class ParticleFilter(BaseEstimator):
    """Particle filter for the stochastic trend with noise model.

    Parameters
    ----------
    n_particles : int
        Number of particles (a power of two for the cut-point resampler).
    sigma2, tau2 : float
        Known observation-noise and state-innovation variances.
    x0_mean, x0_var : float
        Gaussian initial-state distribution.
    resampler : {"naive", "sorted", "stratified", "systematic", "cutpoint"}
    mode : {"sequential", "parallel"}
    lanes : int
        Worker lanes in parallel mode.
    precision : {"single", "double"}
    seed : int
        Fixed seed: results are bit-identical across modes and lane counts.
    store_particles : bool
        Keep a per-step snapshot of the full particle system.
    track_quantiles : bool
        Record weighted 5/50/95% state quantiles per step.

    Attributes
    ----------
    filtered_mean_ : ndarray of shape (T,)
        Posterior mean of x_t given y_{1:t}.
    filtered_quantiles_ : ndarray of shape (T, 3) or None
    timings_ : PhaseTimings
    output_ : FilterOutput
        The full driver output.
    """

    def __init__(self, n_particles=1024, sigma2=1.0, tau2=0.1, x0_mean=0.0,
                 x0_var=10.0, resampler="cutpoint", mode="sequential", lanes=1,
                 precision="double", seed=0, store_particles=False,
                 track_quantiles=True):
        self.n_particles = n_particles
        self.sigma2 = sigma2
        self.tau2 = tau2
        self.x0_mean = x0_mean
        self.x0_var = x0_var
        self.resampler = resampler
        self.mode = mode
        self.lanes = lanes
        self.precision = precision
        self.seed = seed
        self.store_particles = store_particles
        self.track_quantiles = track_quantiles

    def fit(self, y, X=None):
        """Run the filter over the observation series ``y``."""
        y = check_observations(y)
        model = TrendNoiseModel(sigma2=self.sigma2, tau2=self.tau2,
                                x0_mean=self.x0_mean, x0_var=self.x0_var)
        with _make_backend(self.mode, self.lanes) as backend:
            out = run_particle_filter(
                model, y, self.n_particles, seed=self.seed, backend=backend,
                resampler=self.resampler, precision=self.precision,
                store_particles=self.store_particles,
                track_quantiles=self.track_quantiles)
        self.output_ = out
        self.filtered_mean_ = out.filtered_mean
        self.filtered_quantiles_ = out.filtered_quantiles
        self.timings_ = out.timings
        self.n_steps_ = len(y)
        return self

    def predict(self, y=None):
        """Return the filtered posterior means from the fitted run."""
        if not hasattr(self, "filtered_mean_"):
            raise NotFittedError("call fit before predict")
        return self.filtered_mean_


class ParticleLearner(BaseEstimator):
    """Joint state and parameter estimation by particle learning.

    ``sigma2_prior`` and ``tau2_prior`` are (shape, scale) tuples of
    inverse-gamma priors; pass a plain float instead to hold that variance
    fixed at a known value.

    Attributes
    ----------
    sigma2_mean_, tau2_mean_ : float
        Posterior means at the final step (NaN for fixed parameters).
    param_posterior_ : dict of ParamSummary
    filtered_mean_ : ndarray of shape (T,)
    timings_ : PhaseTimings
    output_ : FilterOutput
    """

    def __init__(self, n_particles=1024, sigma2_prior=(5.0, 4.0),
                 tau2_prior=(5.0, 0.4), x0_mean=0.0, x0_var=10.0,
                 resampler="cutpoint", mode="sequential", lanes=1,
                 precision="double", seed=0, store_particles=False,
                 track_quantiles=True):
        self.n_particles = n_particles
        self.sigma2_prior = sigma2_prior
        self.tau2_prior = tau2_prior
        self.x0_mean = x0_mean
        self.x0_var = x0_var
        self.resampler = resampler
        self.mode = mode
        self.lanes = lanes
        self.precision = precision
        self.seed = seed
        self.store_particles = store_particles
        self.track_quantiles = track_quantiles

    def _priors(self):
        def coerce(p):
            if isinstance(p, (int, float)):
                return float(p)
            shape, scale = p
            return InverseGammaPrior(shape, scale)

        return Priors(x0_mean=self.x0_mean, x0_var=self.x0_var,
                      sigma2=coerce(self.sigma2_prior),
                      tau2=coerce(self.tau2_prior))

    def fit(self, y, X=None):
        y = check_observations(y)
        with _make_backend(self.mode, self.lanes) as backend:
            out = run_particle_learning(
                self._priors(), y, self.n_particles, seed=self.seed,
                backend=backend, resampler=self.resampler,
                precision=self.precision, store_particles=self.store_particles,
                track_quantiles=self.track_quantiles)
        self.output_ = out
        self.filtered_mean_ = out.filtered_mean
        self.filtered_quantiles_ = out.filtered_quantiles
        self.param_posterior_ = out.param_posterior
        self.timings_ = out.timings
        self.n_steps_ = len(y)
        post = out.param_posterior or {}
        self.sigma2_mean_ = float(post["sigma2"].mean[-1]) if "sigma2" in post else float("nan")
        self.tau2_mean_ = float(post["tau2"].mean[-1]) if "tau2" in post else float("nan")
        return self

    def predict(self, y=None):
        if not hasattr(self, "filtered_mean_"):
            raise NotFittedError("call fit before predict")
        return self.filtered_mean_
