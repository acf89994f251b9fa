import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from parsmc.estimators import ParticleFilter, ParticleLearner
from parsmc.filtering import PhaseTimings
from parsmc.models import TrendNoiseModel, simulate
from parsmc.rng import RngStream


@pytest.fixture(scope="module")
def series():
    _, y = simulate(TrendNoiseModel(), 40, RngStream(8, 2**62 + 1))
    return y


class TestParticleFilterEstimator:
    def test_get_set_params_roundtrip(self):
        est = ParticleFilter(n_particles=512, seed=3)
        params = est.get_params()
        assert params["n_particles"] == 512 and params["resampler"] == "cutpoint"
        est.set_params(resampler="systematic", lanes=2)
        assert est.resampler == "systematic" and est.lanes == 2

    def test_clone_preserves_params(self):
        est = ParticleFilter(n_particles=256, tau2=0.3, precision="single")
        c = clone(est)
        assert c.get_params() == est.get_params()

    def test_fit_sets_attributes(self, series):
        est = ParticleFilter(n_particles=512, seed=5).fit(series)
        assert est.filtered_mean_.shape == (40,)
        assert est.filtered_quantiles_.shape == (40, 3)
        assert isinstance(est.timings_, PhaseTimings)
        assert est.n_steps_ == 40

    def test_predict_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            ParticleFilter().predict()

    def test_predict_returns_filtered_means(self, series):
        est = ParticleFilter(n_particles=512, seed=5).fit(series)
        assert np.array_equal(est.predict(), est.filtered_mean_)

    def test_same_seed_same_fit(self, series):
        a = ParticleFilter(n_particles=256, seed=2).fit(series)
        b = ParticleFilter(n_particles=256, seed=2).fit(series)
        assert np.array_equal(a.filtered_mean_, b.filtered_mean_)

    def test_parallel_mode_identical(self, series):
        a = ParticleFilter(n_particles=512, seed=2).fit(series)
        b = ParticleFilter(n_particles=512, seed=2, mode="parallel", lanes=4).fit(series)
        assert np.array_equal(a.filtered_mean_, b.filtered_mean_)


class TestParticleLearnerEstimator:
    def test_fit_learns_both_variances(self, series):
        est = ParticleLearner(n_particles=1024, seed=1).fit(series)
        assert set(est.param_posterior_) == {"sigma2", "tau2"}
        assert est.sigma2_mean_ > 0 and est.tau2_mean_ > 0

    def test_fixed_tau2_is_not_learned(self, series):
        est = ParticleLearner(n_particles=512, tau2_prior=0.1, seed=1).fit(series)
        assert set(est.param_posterior_) == {"sigma2"}
        assert np.isnan(est.tau2_mean_)

    def test_clone_and_refit(self, series):
        est = ParticleLearner(n_particles=256, seed=4)
        a = est.fit(series).sigma2_mean_
        b = clone(est).fit(series).sigma2_mean_
        assert a == b

    def test_prior_tuple_validation(self, series):
        with pytest.raises(ValueError):
            ParticleLearner(n_particles=64, sigma2_prior=(0.0, 1.0)).fit(series)
