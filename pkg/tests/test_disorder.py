import math

import numpy as np
import pytest

from taseplab import (
    Mixture,
    ParameterError,
    PointMass,
    TwoPoint,
    Uniform,
    essential_infimum,
    mean_inverse_rate,
    mu,
    sample_environment,
    sup_support,
)

LAWS = [
    PointMass(0.5),
    TwoPoint(0.5, 1.0, 0.5),
    Uniform(0.5, 1.0),
    Mixture(1.0, 0.2, PointMass(0.5)),
    Mixture(1.0, 0.3, Uniform(0.4, 0.8)),
]


def test_essential_infimum_closed_forms():
    assert essential_infimum(PointMass(0.5)) == 0.5
    assert essential_infimum(TwoPoint(0.5, 1.0, 0.5)) == 0.5
    assert essential_infimum(Uniform(0.5, 1.0)) == 0.5
    assert essential_infimum(Mixture(1.0, 0.2, PointMass(0.5))) == 0.5
    # degenerate mixtures collapse to one component
    assert essential_infimum(Mixture(1.0, 0.0, PointMass(0.5))) == 1.0
    assert essential_infimum(Mixture(1.0, 1.0, PointMass(0.5))) == 0.5
    # a two-point law that never takes its low value
    assert essential_infimum(TwoPoint(0.5, 1.0, 0.0)) == 1.0


def test_mu_closed_forms():
    assert mu(PointMass(0.5)) == 0.0
    assert mu(TwoPoint(0.5, 1.0, 0.5)) == pytest.approx(0.5, abs=1e-15)
    assert mu(Uniform(0.5, 1.0)) == pytest.approx(2.0 - 2.0 * math.log(2.0), abs=1e-12)
    got = mu(Mixture(1.0, 0.2, PointMass(0.5)))
    assert got == pytest.approx(2.0 - (0.8 / 1.0 + 0.2 / 0.5), abs=1e-15)


def test_mu_nonnegative_zero_iff_point_mass_at_r():
    for law in LAWS:
        assert mu(law) >= 0.0
    assert mu(PointMass(1.3)) == 0.0
    # p=1 puts all mass at r: distributionally a point mass
    assert mu(TwoPoint(0.7, 2.0, 1.0)) == 0.0
    for law in LAWS[1:]:
        assert mu(law) > 0.0


def test_sup_support():
    assert sup_support(PointMass(0.5)) == 0.5
    assert sup_support(TwoPoint(0.5, 1.0, 0.5)) == 1.0
    assert sup_support(Uniform(0.5, 1.0)) == 1.0
    assert sup_support(Mixture(1.0, 0.3, Uniform(0.4, 0.8))) == 1.0


def test_parameter_validation():
    with pytest.raises(ParameterError):
        essential_infimum(PointMass(0.0))
    with pytest.raises(ParameterError):
        essential_infimum(PointMass(-1.0))
    with pytest.raises(ParameterError):
        essential_infimum(TwoPoint(0.5, 1.0, 1.5))
    with pytest.raises(ParameterError):
        essential_infimum(TwoPoint(1.0, 0.5, 0.5))  # b < r
    with pytest.raises(ParameterError):
        essential_infimum(Uniform(1.0, 1.0))
    with pytest.raises(ParameterError):
        essential_infimum(Mixture(1.0, -0.1, PointMass(0.5)))


def test_point_mass_environment_is_constant():
    env = sample_environment(PointMass(0.5), 123, (0, 9))
    assert np.all(env.rates == 0.5)
    assert len(env.rates) == 10


def test_two_point_empirical_fraction():
    n = 100_000
    env = sample_environment(TwoPoint(0.5, 1.0, 0.5), 7, (0, n - 1))
    frac = np.mean(env.rates == 0.5)
    assert abs(frac - 0.5) < 3 * math.sqrt(0.25 / n)


def test_environment_range_independence():
    law = TwoPoint(0.5, 1.0, 0.5)
    a = sample_environment(law, 42, (-50, 100))
    b = sample_environment(law, 42, (10, 20))
    for i in range(10, 21):
        assert a.rate(i) == b.rate(i)


def test_environment_bit_reproducibility():
    law = Uniform(0.5, 1.0)
    a = sample_environment(law, 9, (0, 9999))
    b = sample_environment(law, 9, (0, 9999))
    assert a.rates.tobytes() == b.rates.tobytes()


def test_rates_covering_resamples_consistently():
    law = TwoPoint(0.5, 1.0, 0.25)
    env = sample_environment(law, 5, (0, 9))
    wide = env.rates_covering(-5, 14)
    assert np.array_equal(wide[5:15], env.rates)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: type(l).__name__)
def test_empirical_mean_inverse_rate(law):
    n = 100_000
    env = sample_environment(law, 31, (0, n - 1))
    have = np.mean(1.0 / env.rates)
    want = 1.0 / essential_infimum(law) - mu(law)
    assert want == pytest.approx(mean_inverse_rate(law), abs=1e-12)
    assert abs(have - want) < 4.0 / math.sqrt(n)


def test_rates_stay_in_support():
    for law in LAWS:
        env = sample_environment(law, 3, (0, 9999))
        assert np.all(env.rates >= essential_infimum(law))
        assert np.all(env.rates <= sup_support(law))
