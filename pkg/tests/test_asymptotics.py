"""Covariance kernel, Nystrom eigenvalues and the discrepancy functional."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate, stats

from betagof import asymptotics as asy
from betagof.beta_model import BetaParams, sample_beta
from betagof.errors import DomainError


def test_g_fn_values():
    assert asy.g_fn(0.5, (1, 1)) == pytest.approx(0.25)  # t(1 - t) / B(1, 1)
    assert asy.g_fn(0.0, (2, 3)) == 0.0 and asy.g_fn(1.0, (2, 3)) == 0.0
    t = np.linspace(0.1, 0.9, 5)
    np.testing.assert_allclose(asy.g_fn(t, (2, 3)), t**2 * (1 - t) ** 3 * 12.0, rtol=1e-13)
    with pytest.raises(DomainError):
        asy.g_fn(1.5, (1, 1))


def test_g_is_the_model_side_of_the_moment_identity():
    # E[((a+b)X - a) 1{X >= t}] = g(t) under B(a, b)
    a, b = 2.5, 0.8
    for t in (0.2, 0.6, 0.9):
        lhs = integrate.quad(lambda x: ((a + b) * x - a) * stats.beta.pdf(x, a, b), t, 1)[0]
        assert lhs == pytest.approx(asy.g_fn(t, (a, b)), rel=1e-9)


def test_score_has_mean_zero_and_fisher_covariance():
    p = BetaParams(2.0, 3.0)
    x = sample_beta(400_000, p, seed=1)
    sc = asy.score(x, p)
    np.testing.assert_allclose(sc.mean(axis=0), 0.0, atol=0.01)
    from betagof.beta_model import fisher_information
    np.testing.assert_allclose(np.cov(sc.T), fisher_information(p), rtol=0.02)
    el = asy.ell(x[:5], p)
    np.testing.assert_allclose(el, sc[:5] @ np.linalg.inv(fisher_information(p)), rtol=1e-12)
    with pytest.raises(DomainError):
        asy.score([0.0], p)


@pytest.mark.parametrize("p", [(2.0, 2.0), (0.7, 3.0)])
def test_upsilon_equals_minus_score_covariance(p):
    # differentiating E_theta[c_theta(X) 1{X >= t}] = g_theta(t) in theta gives
    # Y(t) = -E[c(X) 1{X >= t} score(X)]; check by quadrature
    a, b = p
    for t in (0.1, 0.5, 0.85):
        ref = [-integrate.quad(lambda x: ((a + b) * x - a) * asy.score(x, p)[k] * stats.beta.pdf(x, a, b),
                               t, 1, limit=200)[0] for k in (0, 1)]
        np.testing.assert_allclose(asy.upsilon(t, p), ref, rtol=1e-8, atol=1e-12)


@pytest.mark.parametrize("p", [(1.0, 1.0), (2.0, 2.0), (0.5, 1.5), (3.0, 0.5)])
def test_kernel_matrix_matches_direct_quadrature(p):
    ctx = asy.KernelContext(p)
    nodes = np.array([0.05, 0.3, 0.5, 0.77, 0.95])
    K = asy.kernel_matrix(nodes, ctx)
    direct = np.array([[asy.kernel(s, t, ctx) for t in nodes] for s in nodes])
    np.testing.assert_allclose(K, direct, rtol=1e-9, atol=1e-13)


def test_kernel_against_monte_carlo():
    p = BetaParams(2.0, 2.0)
    x = sample_beta(400_000, p, seed=3)
    el = asy.ell(x, p)

    def h(s):
        return (4 * x - 2) * (x >= s) + el @ asy.upsilon(s, p) - asy.g_fn(s, p)

    ctx = asy.KernelContext(p)
    for s, t in [(0.2, 0.6), (0.5, 0.5), (0.7, 0.9)]:
        mc = np.mean(h(s) * h(t))
        assert asy.kernel(s, t, ctx) == pytest.approx(mc, abs=5 * np.std(h(s) * h(t)) / np.sqrt(x.size))


def test_centring_vanishes():
    ctx = asy.KernelContext((0.5, 3.0))
    for s in (0.01, 0.4, 0.99):
        assert abs(asy.centring(s, ctx)) < 1e-9


def test_eigenvalues_plain_sum_to_trace_and_are_sorted():
    res = asy.nystrom_eigenvalues(asy.KernelContext((1, 1)), m=64, method="plain")
    assert res.eigenvalues.sum() == pytest.approx(res.trace, rel=1e-12)
    assert np.all(np.diff(res.eigenvalues) <= 0)
    assert res.psd_ok and res.eigenvalues[0] > 0


def test_trace_equals_integral_of_variance():
    ctx = asy.KernelContext((2, 3))
    ref = integrate.quad(lambda t: asy.kernel(t, t, ctx), 0, 1, limit=200)[0]
    assert asy.nystrom_eigenvalues(ctx, m=64).trace == pytest.approx(ref, rel=1e-8)


def test_corrected_method_row_integrals():
    # r(x) = int K(x, y) dy in closed form, against adaptive quadrature of K
    ctx = asy.KernelContext((0.5, 1.5))
    u = np.array([0.1, 0.6])
    r = asy._row_integrals(u, asy._kernel_parts(u, ctx), ctx)
    for ui, ri in zip(u, r):
        ref = integrate.quad(lambda y: asy.kernel(ui, y, ctx), 0, 1, points=[ui], limit=200)[0]
        assert ri == pytest.approx(ref, rel=1e-8)


def test_nystrom_argument_checks():
    ctx = asy.KernelContext((1, 1))
    with pytest.raises(ValueError):
        asy.nystrom_eigenvalues(ctx, m=4)
    with pytest.raises(ValueError):
        asy.nystrom_eigenvalues(ctx, method="exact")
    with pytest.raises(ValueError):
        asy.KernelContext((1, 1), order=3)


@pytest.mark.parametrize("spec", ["B(2,2)", "B(0.5,3)", "B(3,0.5)"])
def test_delta_vanishes_under_the_model(spec):
    law = asy.as_alternative(spec)
    assert asy.delta_discrepancy(law, (law.alpha, law.beta)) < 1e-10
    p = asy.pseudo_true_params(law)
    assert p.alpha == pytest.approx(law.alpha, rel=1e-9)
    assert p.beta == pytest.approx(law.beta, rel=1e-9)


def test_delta_positive_off_model_and_pseudo_true_fit():
    law = asy.as_alternative("LT(3,2)")
    p = asy.pseudo_true_params(law)
    assert asy.delta_discrepancy(law, p) > 1e-4
    # the pseudo-true parameters are the MLE limit: fit a very large sample
    from betagof.beta_model import mle_fit
    est = mle_fit(np.clip(law.sample(400_000, seed=2), 1e-300, 1 - 1e-16))
    assert est.alpha == pytest.approx(p.alpha, rel=0.02)
    assert est.beta == pytest.approx(p.beta, rel=0.02)
