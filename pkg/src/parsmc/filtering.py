"""Particle filtering and particle learning driver loops.

One cycle per observation: propagate every particle through the transition
density, weight by the observation likelihood, build the resampling CDF,
resample, optionally store the particles, then record posterior summaries.
Summaries are computed from the weighted pre-resampling particles, so the
resampling step never adds Monte Carlo noise to the reported estimates.

Elapsed time is attributed to the six pipeline phases (Initialize, CDF,
Resample, Propagate, Store, Other) with contiguous monotonic-clock brackets:
the phase fields sum to the measured total exactly.  The weighting step is
charged to the CDF phase, and each phase's barrier wait is charged to the
phase that owns the barrier.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincinv

from .backend import Backend
from .core import ParamDraws, ParticleSystem, SuffStats, check_power_of_two
from .errors import AllWeightsZeroError, NonFiniteWeightError
from .models import LOG_TWO_PI, Priors
from .prefix_sum import parallel_cdf, sequential_cdf
from .resampling import (
    resample_cutpoint,
    resample_naive,
    resample_sorted,
    resample_stratified,
    resample_systematic,
)
from .rng import AUX_STREAM_BASE, RngStream, StreamArray

RESAMPLERS = ("naive", "sorted", "stratified", "systematic", "cutpoint")
PARAM_QUANTILE_PROBS = (0.005, 0.05, 0.5, 0.95, 0.995)
STATE_QUANTILE_PROBS = (0.05, 0.5, 0.95)


@dataclass
class PhaseTimings:
    """Per-phase elapsed nanoseconds, accumulated over all time steps.

    ``resample_sort_only`` is the sort cost inside the sorted resampler (a
    sub-measurement of ``resample``, not an additional phase).
    """

    initialize: int = 0
    cdf: int = 0
    resample: int = 0
    resample_sort_only: int = 0
    propagate: int = 0
    store: int = 0
    other: int = 0

    @property
    def total(self):
        return (self.initialize + self.cdf + self.resample
                + self.propagate + self.store + self.other)

    def as_dict(self):
        return {
            "initialize_ns": self.initialize,
            "cdf_ns": self.cdf,
            "resample_ns": self.resample,
            "resample_sort_only_ns": self.resample_sort_only,
            "propagate_ns": self.propagate,
            "store_ns": self.store,
            "other_ns": self.other,
        }


class _PhaseClock:
    """Attributes wall time to phases with back-to-back brackets."""

    def __init__(self, timings):
        self.timings = timings
        self._last = time.perf_counter_ns()

    def tick(self, phase):
        now = time.perf_counter_ns()
        setattr(self.timings, phase, getattr(self.timings, phase) + now - self._last)
        self._last = now


@dataclass
class ParamSummary:
    """Posterior summary of one parameter's particle draws at every step."""

    mean: np.ndarray
    sd: np.ndarray
    quantiles: np.ndarray  # (T, len(PARAM_QUANTILE_PROBS))
    probs: tuple = PARAM_QUANTILE_PROBS

    def quantile(self, p):
        return self.quantiles[:, self.probs.index(p)]


@dataclass
class FilterOutput:
    filtered_mean: np.ndarray
    filtered_quantiles: np.ndarray | None
    param_posterior: dict | None
    timings: PhaseTimings
    final_particles: ParticleSystem | None = None
    particle_history: list | None = None
    resampled_indices: np.ndarray | None = None


def snapshot_store(particles, dest):
    """Copy the particle arrays into the persistent output record.

    Mirrors the device-to-host transfer of a particle-filter accelerator:
    it happens at most once per time step and only when full-particle output
    was requested.  Returns the elapsed nanoseconds.
    """
    t0 = time.perf_counter_ns()
    dest.append(particles.copy())
    return time.perf_counter_ns() - t0


def check_observations(y):
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("observations must be a 1-d array")
    if y.size and not np.isfinite(y).all():
        raise NonFiniteWeightError("observations contain NaN or infinity")
    return y


def weighted_quantiles(values, weights, probs):
    """Inverse-CDF weighted quantiles (smallest value with cum-weight >= p)."""
    order = np.argsort(values, kind="stable")
    cw = np.cumsum(weights[order], dtype=np.float64)
    pos = np.searchsorted(cw, np.asarray(probs) * cw[-1], side="left")
    return np.asarray(values, dtype=np.float64)[order[np.minimum(pos, len(order) - 1)]]


def _dtype_for(precision):
    if precision == "double":
        return np.float64
    if precision == "single":
        return np.float32
    raise ValueError(f"precision must be 'single' or 'double', got {precision!r}")


def _param_summary_row(draws, weights, w_sum):
    mean = float(np.dot(weights, draws) / w_sum)
    var = float(np.dot(weights, (draws - mean) ** 2) / w_sum)
    q = weighted_quantiles(draws, weights, PARAM_QUANTILE_PROBS)
    return mean, math.sqrt(max(var, 0.0)), q


def _fingerprint(arrays):
    out = np.zeros_like(arrays[0], dtype=np.float64)
    for k, a in enumerate(arrays, start=1):
        out += (2.0 * k + 1.0) * np.asarray(a, dtype=np.float64)
    return out


def run_particle_filter(model, y, n, seed=0, backend=None, resampler="cutpoint",
                        precision="double", store_particles=False,
                        keep_final=False, track_quantiles=True,
                        keep_indices=False, debug_checks=False):
    """Filter with known parameters; see :func:`run_particle_learning` for
    the unknown-parameter variant.  Returns a :class:`FilterOutput`."""
    return _run_loop(model=model, priors=None, y=y, n=n, seed=seed,
                     backend=backend, resampler=resampler, precision=precision,
                     store_particles=store_particles, keep_final=keep_final,
                     track_quantiles=track_quantiles, keep_indices=keep_indices,
                     debug_checks=debug_checks)


def run_particle_learning(priors, y, n, seed=0, backend=None, resampler="cutpoint",
                          precision="double", store_particles=False,
                          keep_final=False, track_quantiles=True,
                          keep_indices=False, debug_checks=False):
    """Joint state and parameter filtering on the trend+noise model.

    Each particle carries (state, sigma2, tau2, sufficient statistics).  Per
    step, the state is propagated with the particle's current variances, the
    sufficient statistics absorb the new squared increment and residual, and
    fresh variances are drawn from the updated conditional posteriors before
    weighting.  Resampling copies whole particle tuples, never mixing the
    state of one particle with the parameters of another.
    """
    if not isinstance(priors, Priors):
        raise TypeError("run_particle_learning expects a Priors instance")
    return _run_loop(model=None, priors=priors, y=y, n=n, seed=seed,
                     backend=backend, resampler=resampler, precision=precision,
                     store_particles=store_particles, keep_final=keep_final,
                     track_quantiles=track_quantiles, keep_indices=keep_indices,
                     debug_checks=debug_checks)


def _run_loop(model, priors, y, n, seed, backend, resampler, precision,
              store_particles, keep_final, track_quantiles, keep_indices,
              debug_checks):
    y = check_observations(y)
    n = int(n)
    if n < 1:
        raise ValueError("particle count must be >= 1")
    if resampler not in RESAMPLERS:
        raise ValueError(f"unknown resampler {resampler!r}; choose from {RESAMPLERS}")
    if resampler == "cutpoint":
        check_power_of_two(n)
    dtype = _dtype_for(precision)
    if backend is None:
        backend = Backend()
    learn = priors is not None

    t_len = len(y)
    timings = PhaseTimings()
    clock = _PhaseClock(timings)

    # ---- initialize: starting values for states and parameter draws ----
    # Counter layout, per particle stream and per block t (4 slots each):
    # slot 0 state innovation, slot 1 sigma2 draw, slot 2 tau2 draw,
    # slot 3 resampling uniform.  Unused slots are skipped so the layout is
    # identical for every configuration.
    streams = StreamArray.for_lanes(seed, n)
    aux = RngStream(seed, AUX_STREAM_BASE)

    if learn:
        x0_mean, x0_var = priors.x0_mean, priors.x0_var
        learn_sigma2, learn_tau2 = priors.learns_sigma2, priors.learns_tau2
    else:
        x0_mean, x0_var = model.x0_mean, model.x0_var
        learn_sigma2 = learn_tau2 = False

    states = (x0_mean + math.sqrt(x0_var) * streams.normals()).astype(dtype)

    a_sig = b_sig = a_tau = b_tau = None
    if learn_sigma2:
        a_sig = np.full(n, priors.sigma2.shape)
        b_sig = np.full(n, priors.sigma2.scale)
        sigma2 = streams.inverse_gammas(a_sig, b_sig)
    else:
        streams.skip(1)
        sigma2 = float(model.sigma2 if model is not None else priors.sigma2)
    if learn_tau2:
        a_tau = np.full(n, priors.tau2.shape)
        b_tau = np.full(n, priors.tau2.scale)
        tau2 = streams.inverse_gammas(a_tau, b_tau)
    else:
        streams.skip(1)
        tau2 = float(model.tau2 if model is not None else priors.tau2)
    streams.skip(1)  # unused resample slot of the init block

    filtered_mean = np.empty(t_len)
    filtered_quantiles = np.empty((t_len, 3)) if track_quantiles else None
    if learn:
        summaries = {
            name: ParamSummary(mean=np.empty(t_len), sd=np.empty(t_len),
                               quantiles=np.empty((t_len, len(PARAM_QUANTILE_PROBS))))
            for name, learned in (("sigma2", learn_sigma2), ("tau2", learn_tau2))
            if learned
        }
    else:
        summaries = None
    history = [] if store_particles else None
    indices_log = np.empty((t_len, n), dtype=np.int64) if keep_indices else None
    clock.tick("initialize")

    for t in range(1, t_len + 1):
        y_t = float(y[t - 1])

        # ---- propagate: new states, refreshed parameter draws ----
        z = streams.normals()
        step = np.sqrt(tau2) * z
        new_states = (states + step).astype(dtype, copy=False)
        resid = y_t - new_states.astype(np.float64, copy=False)
        if learn_sigma2:
            b_sig = b_sig + 0.5 * resid * resid
            a_sig = a_sig + 0.5
            sigma2 = b_sig / gammaincinv(a_sig, streams.uniforms())
        else:
            streams.skip(1)
        if learn_tau2:
            b_tau = b_tau + 0.5 * step * step
            a_tau = a_tau + 0.5
            tau2 = b_tau / gammaincinv(a_tau, streams.uniforms())
        else:
            streams.skip(1)
        states = new_states
        clock.tick("propagate")

        # ---- cdf: likelihood weights (log space, max-shifted), prefix sums ----
        log_w = -0.5 * (LOG_TWO_PI + np.log(sigma2)) - 0.5 * resid * resid / sigma2
        shift = float(np.max(log_w))
        if not math.isfinite(shift):
            raise AllWeightsZeroError(step=t)
        weights = np.exp(log_w - shift).astype(dtype, copy=False)
        w_sum = float(weights.sum(dtype=np.float64))
        if resampler == "cutpoint":
            cdf = parallel_cdf(weights, backend)
        else:
            cdf = sequential_cdf(weights)
        clock.tick("cdf")

        # ---- resample: joint copy of each selected particle tuple ----
        if resampler == "naive":
            idx = resample_naive(cdf, streams)
        elif resampler == "sorted":
            idx, sort_ns = resample_sorted(cdf, streams)
            timings.resample_sort_only += sort_ns
        elif resampler == "stratified":
            idx = resample_stratified(cdf, streams)
        elif resampler == "systematic":
            idx = resample_systematic(cdf, aux)
            streams.skip(1)
        else:
            idx = resample_cutpoint(cdf, streams, backend)
        take = idx - 1

        pre_states, pre_weights = states, weights
        pre_sigma2, pre_tau2 = sigma2, tau2
        if debug_checks:
            tagged = [states] + ([sigma2, tau2, b_sig, b_tau] if learn else [])
            tagged = [a for a in tagged if isinstance(a, np.ndarray)]
            before = _fingerprint(tagged)
        states = states[take]
        if learn_sigma2:
            sigma2, a_sig, b_sig = sigma2[take], a_sig[take], b_sig[take]
        if learn_tau2:
            tau2, a_tau, b_tau = tau2[take], a_tau[take], b_tau[take]
        if debug_checks:
            tagged = [states] + ([sigma2, tau2, b_sig, b_tau] if learn else [])
            tagged = [a for a in tagged if isinstance(a, np.ndarray)]
            if not np.array_equal(_fingerprint(tagged), before[take]):
                raise AssertionError("joint resampling copied a torn particle tuple")
        clock.tick("resample")

        # ---- store: copy particles out of the arena, when requested ----
        if store_particles:
            snapshot_store(_make_system(states, n, learn, sigma2, tau2,
                                        a_sig, b_sig, a_tau, b_tau), history)
            clock.tick("store")

        # ---- other: posterior summaries from the weighted pre-resample set ----
        filtered_mean[t - 1] = np.dot(pre_weights, pre_states) / w_sum
        if track_quantiles:
            filtered_quantiles[t - 1] = weighted_quantiles(
                pre_states, pre_weights, STATE_QUANTILE_PROBS)
        if learn:
            for name, draws in (("sigma2", pre_sigma2), ("tau2", pre_tau2)):
                if name in summaries:
                    mean, sd, q = _param_summary_row(draws, pre_weights, w_sum)
                    summaries[name].mean[t - 1] = mean
                    summaries[name].sd[t - 1] = sd
                    summaries[name].quantiles[t - 1] = q
        if keep_indices:
            indices_log[t - 1] = idx
        clock.tick("other")

    final = None
    if keep_final:
        final = _make_system(states, n, learn, sigma2, tau2,
                             a_sig, b_sig, a_tau, b_tau)
        clock.tick("other")

    return FilterOutput(
        filtered_mean=filtered_mean,
        filtered_quantiles=filtered_quantiles,
        param_posterior=summaries,
        timings=timings,
        final_particles=final,
        particle_history=history,
        resampled_indices=indices_log,
    )


def _make_system(states, n, learn, sigma2, tau2, a_sig, b_sig, a_tau, b_tau):
    # Post-resample particles are equally weighted.
    weights = np.full(n, 1.0 / n, dtype=states.dtype)
    params = suff = None
    if learn:
        as_arr = lambda v: v if isinstance(v, np.ndarray) else np.full(n, v)
        params = ParamDraws(sigma2=as_arr(sigma2), tau2=as_arr(tau2))
        suff = SuffStats(
            a_sigma=as_arr(a_sig if a_sig is not None else 0.0),
            b_sigma=as_arr(b_sig if b_sig is not None else 0.0),
            a_tau=as_arr(a_tau if a_tau is not None else 0.0),
            b_tau=as_arr(b_tau if b_tau is not None else 0.0),
        )
    return ParticleSystem(states=states.copy(), weights=weights,
                          params=params, suffstats=suff)
