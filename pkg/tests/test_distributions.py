"""Length laws: exact moments, transforms, and sampling behaviour."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpsloss import (
    ArrivalRates,
    Deterministic,
    Exponential,
    Hyperexponential,
    ZeroInflatedExponential,
    substream,
)

N_BIG = 1_000_000


def empirical_lst(samples: np.ndarray, s: float) -> float:
    return float(np.mean(np.exp(-s * samples)))


class TestDeterministic:
    def test_moments_and_transform(self):
        d = Deterministic(2.5)
        assert d.mean() == 2.5
        assert d.lst(0.0) == 1.0
        assert d.lst(1.0) == pytest.approx(math.exp(-2.5), abs=1e-15)
        assert not d.has_zero_atom

    def test_samples_are_constant(self):
        d = Deterministic(0.7)
        block = d.sample_block(substream(1), 100)
        assert np.all(block == 0.7)
        assert d.sample(substream(1)) == 0.7

    def test_validation(self):
        with pytest.raises(ValueError):
            Deterministic(0.0)
        with pytest.raises(ValueError):
            Deterministic(-1.0)
        with pytest.raises(ValueError):
            Deterministic(1.0).lst(-0.5)


class TestExponential:
    def test_moments_and_transform(self):
        d = Exponential(2.0)
        assert d.mean() == 0.5
        assert d.lst(0.0) == 1.0
        assert d.lst(2.0) == pytest.approx(0.5, abs=1e-15)

    def test_sample_statistics(self):
        d = Exponential(2.0)
        x = d.sample_block(substream(7), N_BIG)
        # mean 0.5, sd 0.5: five sigma of the sample mean is 2.5e-3
        assert abs(x.mean() - 0.5) < 2.5e-3
        assert abs(empirical_lst(x, 1.0) - d.lst(1.0)) < 0.01
        assert abs(empirical_lst(x, 3.0) - d.lst(3.0)) < 0.01

    def test_validation(self):
        with pytest.raises(ValueError):
            Exponential(0.0)


class TestZeroInflatedExponential:
    def test_moments_and_transform(self):
        d = ZeroInflatedExponential(0.5, 0.5)
        assert d.mean() == 1.0
        assert d.lst(0.0) == 1.0
        # closed form: 1 - alpha*s/(s + mu)
        assert d.lst(1.0) == pytest.approx(1.0 - 0.5 / 1.5, abs=1e-15)
        assert d.has_zero_atom

    def test_zero_atom_frequency(self):
        d = ZeroInflatedExponential(0.7, 1.0)
        x = d.sample_block(substream(11), N_BIG)
        frac_zero = np.mean(x == 0.0)
        # Binomial(1e6, 0.3): five sigma is about 2.3e-3
        assert abs(frac_zero - 0.3) < 2.5e-3
        assert np.all(x >= 0.0)
        assert abs(x.mean() - d.mean()) < 5e-3
        assert abs(empirical_lst(x, 2.0) - d.lst(2.0)) < 0.01

    def test_alpha_one_matches_exponential_law(self):
        zie = ZeroInflatedExponential(1.0, 2.0)
        exp = Exponential(2.0)
        assert zie.mean() == exp.mean()
        for s in (0.0, 0.5, 1.0, 4.0):
            assert zie.lst(s) == pytest.approx(exp.lst(s), abs=1e-15)
        assert not zie.has_zero_atom
        assert np.all(zie.sample_block(substream(3), 10_000) > 0.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            ZeroInflatedExponential(0.0, 1.0)
        with pytest.raises(ValueError):
            ZeroInflatedExponential(1.2, 1.0)
        with pytest.raises(ValueError):
            ZeroInflatedExponential(0.5, 0.0)


class TestHyperexponential:
    def test_explicit_branches(self):
        d = Hyperexponential(((0.25, 2.0), (0.75, 0.5)))
        assert d.mean() == pytest.approx(0.25 / 2.0 + 0.75 / 0.5, abs=1e-15)
        s = 1.0
        want = 0.25 * 2.0 / 3.0 + 0.75 * 0.5 / 1.5
        assert d.lst(s) == pytest.approx(want, abs=1e-15)

    def test_from_mean_scv(self):
        d = Hyperexponential.from_mean_scv(2.0, 4.0)
        assert d.mean() == pytest.approx(2.0, abs=1e-12)
        m2 = sum(2.0 * w / r**2 for w, r in d.branches)
        scv = m2 / d.mean() ** 2 - 1.0
        assert scv == pytest.approx(4.0, abs=1e-12)
        # balanced means: each branch carries half the total mean
        w0, r0 = d.branches[0]
        w1, r1 = d.branches[1]
        assert w0 / r0 == pytest.approx(w1 / r1, abs=1e-12)

    def test_sample_statistics(self):
        d = Hyperexponential.from_mean_scv(1.0, 4.0)
        x = d.sample_block(substream(13), N_BIG)
        # sd of one draw is sqrt(scv)*mean = 2, so 5 sigma of the mean is 0.01
        assert abs(x.mean() - 1.0) < 0.01
        assert abs(empirical_lst(x, 1.0) - d.lst(1.0)) < 0.01

    def test_validation(self):
        with pytest.raises(ValueError):
            Hyperexponential(())
        with pytest.raises(ValueError):
            Hyperexponential(((0.5, 1.0), (0.6, 1.0)))  # weights sum to 1.1
        with pytest.raises(ValueError):
            Hyperexponential(((1.0, 0.0),))
        with pytest.raises(ValueError):
            Hyperexponential(((-0.1, 1.0), (1.1, 1.0)))
        with pytest.raises(ValueError):
            Hyperexponential.from_mean_scv(1.0, 0.5)


class TestArrivalRates:
    def test_constant(self):
        r = ArrivalRates.constant(1.5, 3)
        assert r.rates == (1.5, 1.5, 1.5, 1.5)
        assert r.capacity == 3
        assert r.is_constant

    def test_extension_beyond_top(self):
        r = ArrivalRates((1.0, 2.0, 3.0))
        assert r.at(0) == 1.0
        assert r.at(2) == 3.0
        assert r.at(7) == 3.0
        assert not r.is_constant

    def test_validation(self):
        with pytest.raises(ValueError):
            ArrivalRates(())
        with pytest.raises(ValueError):
            ArrivalRates((1.0, -0.5))


class TestSamplingContract:
    def test_scalar_draw_matches_single_block(self):
        for d in (
            Deterministic(1.0),
            Exponential(1.3),
            ZeroInflatedExponential(0.6, 0.8),
            Hyperexponential.from_mean_scv(1.0, 3.0),
        ):
            a = d.sample(substream(42))
            b = d.sample_block(substream(42), 1)[0]
            assert a == b

    def test_blocks_are_reproducible(self):
        d = ZeroInflatedExponential(0.5, 0.5)
        x = d.sample_block(substream(5), 1000)
        y = d.sample_block(substream(5), 1000)
        assert np.array_equal(x, y)
        z = d.sample_block(substream(6), 1000)
        assert not np.array_equal(x, z)


@settings(max_examples=50, deadline=None)
@given(
    st.sampled_from([
        Deterministic(0.5),
        Exponential(1.0),
        ZeroInflatedExponential(0.4, 0.8),
        Hyperexponential.from_mean_scv(1.0, 2.0),
    ]),
    st.floats(min_value=0.0, max_value=20.0),
)
def test_lst_is_a_transform(dist, s):
    v = dist.lst(s)
    assert 0.0 < v <= 1.0
    assert dist.lst(0.0) == 1.0
    # monotone nonincreasing in s
    assert dist.lst(s + 0.5) <= v + 1e-15
