import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parsmc.core import (
    ParamDraws,
    ParticleSystem,
    SuffStats,
    is_power_of_two,
    normalize_weights,
)
from parsmc.errors import AllWeightsZeroError, NonFiniteWeightError


class TestNormalizeWeights:
    def test_table_weights(self):
        out = normalize_weights(np.array([2.0, 4.0, 3.0, 1.0]))
        assert np.allclose(out, [0.2, 0.4, 0.3, 0.1])

    def test_single_particle(self):
        assert normalize_weights(np.array([5.0])) == pytest.approx([1.0])

    def test_degenerate_point_mass_unchanged(self):
        out = normalize_weights(np.array([0.0, 0.0, 1.0, 0.0]))
        assert np.array_equal(out, [0.0, 0.0, 1.0, 0.0])

    def test_all_zero_raises(self):
        with pytest.raises(AllWeightsZeroError):
            normalize_weights(np.zeros(8))

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite_raises(self, bad):
        with pytest.raises(NonFiniteWeightError):
            normalize_weights(np.array([1.0, bad, 2.0]))

    def test_negative_raises(self):
        with pytest.raises(ValueError):
            normalize_weights(np.array([1.0, -0.5]))

    @given(st.lists(st.floats(min_value=0.0, max_value=1e12), min_size=1, max_size=300)
           .filter(lambda w: sum(w) > 0))
    @settings(max_examples=200, deadline=None)
    def test_sums_to_one_within_rounding(self, raw):
        w = np.array(raw)
        out = normalize_weights(w)
        eps = 8 * np.finfo(np.float64).eps * len(w)
        assert abs(out.sum() - 1.0) <= eps
        # proportionality preserved
        k = int(np.argmax(w))
        nz = w > 0
        assert np.allclose(out[nz] * w[k], out[k] * w[nz], rtol=1e-12)


def test_is_power_of_two():
    assert [n for n in range(1, 20) if is_power_of_two(n)] == [1, 2, 4, 8, 16]
    assert not is_power_of_two(0)


class TestParticleSystem:
    def _system(self, n=6):
        rng = np.random.default_rng(0)
        return ParticleSystem(
            states=rng.normal(size=n),
            weights=rng.random(n),
            params=ParamDraws(sigma2=rng.random(n) + 0.5, tau2=rng.random(n) + 0.1),
            suffstats=SuffStats(
                a_sigma=np.full(n, 5.0), b_sigma=rng.random(n) + 4,
                a_tau=np.full(n, 5.0), b_tau=rng.random(n) + 0.4),
        )

    def test_take_copies_tuples_jointly(self):
        ps = self._system()
        idx = np.array([3, 3, 0, 5, 1, 1])
        out = ps.take(idx)
        for i, j in enumerate(idx):
            assert out.states[i] == ps.states[j]
            assert out.params.sigma2[i] == ps.params.sigma2[j]
            assert out.params.tau2[i] == ps.params.tau2[j]
            assert out.suffstats.b_sigma[i] == ps.suffstats.b_sigma[j]
            assert out.suffstats.b_tau[i] == ps.suffstats.b_tau[j]

    def test_copy_is_deep(self):
        ps = self._system()
        c = ps.copy()
        c.states[0] = 1e9
        c.params.sigma2[0] = 1e9
        assert ps.states[0] != 1e9
        assert ps.params.sigma2[0] != 1e9

    def test_validate_catches_length_mismatch(self):
        ps = self._system()
        ps.weights = ps.weights[:-1]
        with pytest.raises(ValueError):
            ps.validate()

    def test_validate_passes(self):
        assert self._system().validate().n == 6
