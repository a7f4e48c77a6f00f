"""Special functions against mpmath at high precision."""

from __future__ import annotations

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betagof import specfun
from betagof.errors import DomainError

mp.mp.dps = 40

ARGS = [1e-8, 1e-3, 0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 55.5, 1e3, 1e6]


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.mark.parametrize("x", ARGS)
def test_ln_gamma_matches_mpmath(x):
    assert rel(specfun.ln_gamma(x), float(mp.loggamma(x))) < 1e-13 or \
        abs(specfun.ln_gamma(x) - float(mp.loggamma(x))) < 1e-14


@pytest.mark.parametrize("x", ARGS)
def test_digamma_matches_mpmath(x):
    assert abs(specfun.digamma(x) - float(mp.digamma(x))) <= 1e-13 * max(1.0, abs(float(mp.digamma(x))))


@pytest.mark.parametrize("x", ARGS)
def test_trigamma_matches_mpmath(x):
    assert rel(specfun.trigamma(x), float(mp.polygamma(1, x))) < 1e-13


def test_gamma_values_at_integers_and_half():
    assert specfun.ln_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
    assert specfun.ln_gamma(2.0) == pytest.approx(0.0, abs=1e-15)
    assert specfun.ln_gamma(0.5) == pytest.approx(0.5 * np.log(np.pi), rel=1e-15)
    assert specfun.digamma(1.0) == pytest.approx(-np.euler_gamma, rel=1e-15)
    assert specfun.trigamma(1.0) == pytest.approx(np.pi**2 / 6, rel=1e-15)


def test_vectorised_shapes():
    x = np.array([[0.5, 1.0], [2.0, 3.0]])
    assert specfun.ln_gamma(x).shape == (2, 2)
    assert specfun.digamma(x).shape == (2, 2)
    assert np.isscalar(specfun.digamma(2.0)) or np.ndim(specfun.digamma(2.0)) == 0


@pytest.mark.parametrize("f", [specfun.ln_gamma, specfun.digamma, specfun.trigamma])
def test_nonpositive_arguments_raise(f):
    with pytest.raises(DomainError):
        f(0.0)
    with pytest.raises(DomainError):
        f(-1.5)


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (1, 1), (2, 3), (0.3, 8), (8, 0.3), (50, 70)])
def test_ln_beta_matches_mpmath(a, b):
    assert abs(specfun.ln_beta(a, b) - float(mp.log(mp.beta(a, b)))) < 1e-13 * max(1, abs(float(mp.log(mp.beta(a, b)))))


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (1, 1), (2, 3), (0.3, 8), (8, 0.3), (6.356, 1.97), (40, 25)])
@pytest.mark.parametrize("t", [1e-6, 0.01, 0.2, 0.5, 0.77, 0.99, 1 - 1e-6])
def test_reg_inc_beta_matches_mpmath(a, b, t):
    ref = float(mp.betainc(a, b, 0, t, regularized=True))
    got = specfun.reg_inc_beta(t, a, b)
    assert abs(got - ref) <= 1e-13 + 1e-12 * ref


def test_reg_inc_beta_endpoints_and_symmetry():
    assert specfun.reg_inc_beta(0.0, 2.0, 3.0) == 0.0
    assert specfun.reg_inc_beta(1.0, 2.0, 3.0) == 1.0
    t = np.linspace(0.01, 0.99, 21)
    np.testing.assert_allclose(specfun.reg_inc_beta(t, 2.5, 0.7),
                               1 - specfun.reg_inc_beta(1 - t, 0.7, 2.5), atol=1e-14)
    # B(1, 1) is uniform
    np.testing.assert_allclose(specfun.reg_inc_beta(t, 1.0, 1.0), t, atol=1e-15)


def test_reg_inc_beta_rejects_bad_input():
    with pytest.raises(DomainError):
        specfun.reg_inc_beta(1.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        specfun.reg_inc_beta(0.5, -1.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(p=st.floats(1e-6, 1 - 1e-6), a=st.floats(0.3, 20), b=st.floats(0.3, 20))
def test_inverse_round_trip(p, a, b):
    t = specfun.inv_reg_inc_beta(p, a, b)
    assert 0.0 <= t <= 1.0
    # backward error: near t = 1 with small b the density is huge, so one
    # unit in the last place of t moves the CDF by far more than 1e-10
    slope = float(mp.exp((a - 1) * mp.log(t) + (b - 1) * mp.log(1 - mp.mpf(t)) - mp.log(mp.beta(a, b)))) \
        if 0 < t < 1 else 0.0
    allowed = 1e-10 + 4 * np.spacing(t) * slope
    assert abs(specfun.reg_inc_beta(t, a, b) - p) < allowed


@pytest.mark.parametrize("p,a,b", [(0.3, 2.0, 5.0), (0.999, 0.5, 0.5), (1e-4, 8.0, 0.3), (0.5, 30.0, 30.0)])
def test_inverse_matches_mpmath_root(p, a, b):
    lo, hi = mp.mpf(0), mp.mpf(1)
    for _ in range(120):  # bisection in 40-digit arithmetic
        mid = (lo + hi) / 2
        if mp.betainc(a, b, 0, mid, regularized=True) < p:
            lo = mid
        else:
            hi = mid
    ref = float((lo + hi) / 2)
    assert specfun.inv_reg_inc_beta(p, a, b) == pytest.approx(ref, rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(t1=st.floats(0, 1), t2=st.floats(0, 1), a=st.floats(0.2, 30), b=st.floats(0.2, 30))
def test_reg_inc_beta_is_monotone(t1, t2, a, b):
    lo, hi = sorted((t1, t2))
    assert specfun.reg_inc_beta(lo, a, b) <= specfun.reg_inc_beta(hi, a, b) + 1e-15
