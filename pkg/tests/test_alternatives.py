"""Alternative laws: parsing, sampling and exact functionals."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, stats

from betagof import alternatives as alt
from betagof.errors import SpecParseError


def test_battery_and_nulls():
    assert len(alt.NULL_CASES) == 7
    assert len(alt.BATTERY) == 21
    for spec in alt.BATTERY:
        assert alt.parse_alternative(spec).label == spec


@pytest.mark.parametrize("text,label", [
    ("b(2, 2)", "B(2,2)"),
    ("Beta(0.5,3)", "B(0.5,3)"),
    ("U", "B(1,1)"),
    (" lt( 3 , 2 ) ", "LT(3,2)"),
    ("C(1)∘GO(2,1)", "C(1)oGO(2,1)"),
    ("PHI(0,1)oL(2,0.5)", "N(0,1)oL(2,0.5)"),
    ("exp(1) o hn(1)", "EXP(1)oHN(1)"),
    ("N(0,1)oHN(2)", "N(0,1)oHN(2)"),
])
def test_parse_normalises_labels(text, label):
    assert alt.parse_alternative(text).label == label


@pytest.mark.parametrize("text,fragment", [
    ("BN(0.25)", "expects 5 arguments"),
    ("B(2)", "expects 2 arguments"),
    ("XYZ(1)", "unknown"),
    ("B(2,2", "position"),
    ("B(2,-1)", "positive"),
    ("B(2,2)x", "position"),
    ("GO(2,1)oC(1)", "not an outer law"),
    ("", "expected a distribution name"),
    ("TN(0.5,abc)", "position"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(SpecParseError, match=fragment):
        alt.parse_alternative(text)


def test_parse_error_carries_position():
    with pytest.raises(SpecParseError) as info:
        alt.parse_alternative("B(2,2)!")
    assert info.value.position == 6


@pytest.mark.parametrize("spec", alt.BATTERY)
def test_draws_follow_the_cdf(spec):
    law = alt.parse_alternative(spec)
    x = law.sample(3000, seed=7)
    np.testing.assert_array_equal(x, law.sample(3000, seed=7))
    assert np.all((x >= 0) & (x <= 1))
    assert stats.kstest(x, law.cdf).pvalue > 1e-3


@pytest.mark.parametrize("spec", alt.BATTERY)
def test_cdf_and_sf_are_complementary(spec):
    law = alt.parse_alternative(spec)
    t = np.linspace(0, 1, 41)
    F = law.cdf(t)
    np.testing.assert_allclose(F + law.sf(t), 1.0, atol=1e-12)
    assert np.all(np.diff(F) >= -1e-14)
    assert F[0] == pytest.approx(0.0, abs=1e-12) and F[-1] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("spec", alt.BATTERY)
def test_partial_mean_and_moments_against_monte_carlo(spec):
    law = alt.parse_alternative(spec)
    x = law.sample(200_000, seed=1)
    se = 5 / math.sqrt(x.size)
    for t in (0.0, 0.3, 0.7):
        assert float(law.partial_mean(t)) == pytest.approx(np.mean(x * (x >= t)), abs=se)
    assert law.mean == pytest.approx(x.mean(), abs=se)
    assert law.second_moment == pytest.approx(np.mean(x * x), abs=se)
    L1, L2 = law.log_moments()
    with np.errstate(divide="ignore"):
        lx, lxc = np.log(x), np.log1p(-x)
    ok = np.isfinite(lx) & np.isfinite(lxc)
    assert L1 == pytest.approx(lx[ok].mean(), abs=20 * lx[ok].std() / math.sqrt(ok.sum()))
    assert L2 == pytest.approx(lxc[ok].mean(), abs=20 * lxc[ok].std() / math.sqrt(ok.sum()))


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (2, 3), (3, 0.5)])
def test_beta_law_closed_forms(a, b):
    law = alt.BetaLaw(a, b)
    t = np.array([0.1, 0.5, 0.9])
    np.testing.assert_allclose(law.cdf(t), stats.beta.cdf(t, a, b), rtol=1e-12)
    pm = [integrate.quad(lambda y: y * stats.beta.pdf(y, a, b), s, 1)[0] for s in t]
    np.testing.assert_allclose(law.partial_mean(t), pm, rtol=1e-8)
    from scipy.special import digamma
    L1, L2 = law.log_moments()
    assert L1 == pytest.approx(digamma(a) - digamma(a + b), rel=1e-12)
    assert L2 == pytest.approx(digamma(b) - digamma(a + b), rel=1e-12)


def test_truncated_normal_uses_standard_deviation():
    law = alt.parse_alternative("TN(0.25,0.25)")
    ref = stats.truncnorm((0 - 0.25) / 0.25, (1 - 0.25) / 0.25, loc=0.25, scale=0.25)
    t = np.linspace(0.05, 0.95, 7)
    np.testing.assert_allclose(law.cdf(t), ref.cdf(t), rtol=1e-12)
    assert law.mean == pytest.approx(ref.mean(), rel=1e-10)


def test_logit_normal_uses_standard_deviation():
    law = alt.parse_alternative("LT(0.5,3)")
    t = np.array([0.2, 0.5, 0.8])
    ref = stats.norm.cdf((np.log(t / (1 - t)) - 0.5) / 3)
    np.testing.assert_allclose(law.cdf(t), ref, rtol=1e-12)


def test_mixture_cdf_is_weighted_sum():
    law = alt.parse_alternative("BN(0.25,2,2,0.25,0.25)")
    t = np.linspace(0.05, 0.95, 7)
    ref = 0.25 * stats.beta.cdf(t, 2, 2) + 0.75 * alt.parse_alternative("TN(0.25,0.25)").cdf(t)
    np.testing.assert_allclose(law.cdf(t), ref, rtol=1e-12)


def test_composition_cdf_definition():
    # P(F(Y) <= t) = G(F^{-1}(t)) for the Cauchy-Gompertz law
    law = alt.parse_alternative("C(1)oGO(2,1)")
    t = np.array([0.55, 0.7, 0.9, 0.99])
    y = np.tan(math.pi * (t - 0.5))
    ref = 1 - np.exp(-2 * np.expm1(y))
    np.testing.assert_allclose(law.cdf(t), ref, rtol=1e-12)
    # the half-normal composed with an exponential outer CDF
    law = alt.parse_alternative("EXP(1)oHN(1)")
    y = -np.log1p(-t)
    np.testing.assert_allclose(law.cdf(t), stats.halfnorm.cdf(y), rtol=1e-12)


def test_helpers():
    x = alt.sample_alternative("LT(3,2)", 10, seed=3)
    assert x.shape == (10,)
    assert alt.alternative_cdf("B(1,1)", 0.3) == pytest.approx(0.3)
    assert alt.alternative_partial_mean("B(1,1)", 0.5) == pytest.approx(0.375)
    law = alt.parse_alternative("B(2,2)")
    assert alt.as_alternative(law) is law
