"""The two-parameter beta family: density, CDF, sampling and estimation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from ._random import stream
from .errors import DegenerateSample, DomainError, NoConvergence, NonInteriorData, SampleError


@dataclass(frozen=True)
class BetaParams:
    """Shape parameters (alpha, beta) of a beta law."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (math.isfinite(a) and math.isfinite(b) and a > 0 and b > 0):
            raise DomainError(f"beta parameters must be positive and finite, got ({a}, {b})")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    def __iter__(self):
        yield self.alpha
        yield self.beta

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


class EstimationMethod(str, enum.Enum):
    MLE = "mle"
    MOMENTS = "moments"


def as_params(p) -> BetaParams:
    return p if isinstance(p, BetaParams) else BetaParams(*p)


def as_sample(values, interior: bool = False) -> np.ndarray:
    """Validate observations and return them as a 1-D float array.

    With ``interior=True`` every value must lie strictly inside (0, 1), as
    required by maximum likelihood.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise SampleError("no observations")
    if not np.all(np.isfinite(x)):
        raise SampleError("sample contains non-finite values")
    if np.any((x < 0) | (x > 1)):
        raise SampleError("sample values must lie in [0, 1]")
    if interior and np.any((x == 0) | (x == 1)):
        raise NonInteriorData("maximum likelihood requires all values strictly inside (0, 1)")
    return x


def pdf(x, p):
    """Beta density; +inf at an endpoint where the exponent is negative."""
    a, b = as_params(p)
    x_arr = np.asarray(x, dtype=float)
    if not np.all((x_arr >= 0) & (x_arr <= 1)):
        raise DomainError("pdf: x must lie in [0, 1]")
    with np.errstate(divide="ignore", over="ignore"):
        out = np.exp(specfun._log_density(x_arr, a, b))
    return float(out) if x_arr.ndim == 0 else out


def cdf(t, p):
    a, b = as_params(p)
    return specfun.reg_inc_beta(t, a, b)


def draw_beta(rng: np.random.Generator, size, alpha, beta) -> np.ndarray:
    """Ratio-of-gammas beta variates from an existing generator."""
    ga = rng.standard_gamma(alpha, size)
    gb = rng.standard_gamma(beta, size)
    return ga / (ga + gb)


def sample_beta(n: int, p, seed: int) -> np.ndarray:
    """n i.i.d. beta draws, deterministic in ``(n, p, seed)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    a, b = as_params(p)
    return draw_beta(stream(seed), n, a, b)


def sample_beta_inverse(n: int, p, seed: int) -> np.ndarray:
    """Inverse-CDF beta draws (slower cross-check of ``sample_beta``)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    a, b = as_params(p)
    u = stream(seed).random(n)
    return specfun.inv_reg_inc_beta(u, a, b)


# ----------------------------------------------------------------------------
# estimation
# ----------------------------------------------------------------------------

_MLE_MAX_ITER = 200
_MLE_TOL = 1e-13
_MLE_ACCEPT = 1e-10


def _moments_init(mean, var):
    with np.errstate(divide="ignore", invalid="ignore"):
        c = mean * (1.0 - mean) / var - 1.0
    return mean * c, (1.0 - mean) * c


def _residuals(a, b, L1, L2):
    ps = specfun.digamma(a + b)
    return specfun.digamma(a) - ps - L1, specfun.digamma(b) - ps - L2


def solve_log_moments(L1, L2, alpha0, beta0, max_iter: int = _MLE_MAX_ITER):
    """Solve psi(a) - psi(a+b) = L1, psi(b) - psi(a+b) = L2 for (a, b).

    Two-dimensional Newton iteration with the analytic (trigamma) Jacobian.
    A step is halved while it leaves the positive quadrant or fails to reduce
    the largest residual. Works on arrays; each row stops at its own
    convergence, so a row's result does not depend on its batch.

    Returns
    -------
    alpha, beta : ndarray
    converged : ndarray of bool
        Residuals at most 1e-10 in both equations.
    """
    L1 = np.atleast_1d(np.asarray(L1, dtype=float))
    L2 = np.atleast_1d(np.asarray(L2, dtype=float))
    a = np.broadcast_to(np.asarray(alpha0, dtype=float), L1.shape).copy()
    b = np.broadcast_to(np.asarray(beta0, dtype=float), L1.shape).copy()
    converged = np.zeros(L1.shape, dtype=bool)
    active = np.nonzero(np.isfinite(a) & np.isfinite(b) & (a > 0) & (b > 0)
                        & np.isfinite(L1) & np.isfinite(L2))[0]
    if active.size:
        r1, r2 = _residuals(a[active], b[active], L1[active], L2[active])
        rmax = np.maximum(np.abs(r1), np.abs(r2))
    for _ in range(max_iter):
        if active.size == 0:
            break
        aa, bb = a[active], b[active]
        done = rmax <= _MLE_TOL
        t_s = specfun.trigamma(aa + bb)
        A = specfun.trigamma(aa) - t_s
        D = specfun.trigamma(bb) - t_s
        det = A * D - t_s * t_s
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            da = -(D * r1 + t_s * r2) / det
            db = -(t_s * r1 + A * r2) / det
        broken = ~(np.isfinite(da) & np.isfinite(db)) & ~done
        da = np.where(broken, 0.0, da)
        db = np.where(broken, 0.0, db)

        lam = np.ones_like(aa)
        na, nb = aa + da, bb + db
        nr1, nr2 = r1.copy(), r2.copy()
        nrmax = np.full_like(rmax, np.inf)
        pending = np.nonzero(~done & ~broken)[0]
        for _ in range(60):
            if pending.size == 0:
                break
            ca = aa[pending] + lam[pending] * da[pending]
            cb = bb[pending] + lam[pending] * db[pending]
            pos = (ca > 0) & (cb > 0) & np.isfinite(ca) & np.isfinite(cb)
            good = np.zeros(pending.size, dtype=bool)
            if pos.any():
                idx = pending[pos]
                q1, q2 = _residuals(ca[pos], cb[pos], L1[active[idx]], L2[active[idx]])
                qmax = np.maximum(np.abs(q1), np.abs(q2))
                ok = qmax < rmax[idx]
                na[idx], nb[idx] = ca[pos], cb[pos]
                nr1[idx], nr2[idx], nrmax[idx] = q1, q2, qmax
                good[pos] = ok
            lam[pending[~good]] *= 0.5
            pending = pending[~good]
        # no decrease possible: the residual is at its floating-point floor
        stuck = np.zeros(aa.shape, dtype=bool)
        stuck[pending] = True
        done |= stuck & (rmax <= _MLE_ACCEPT)
        failed = broken | (stuck & ~done)
        converged[active[done]] = True
        keep = ~done & ~failed
        a[active[keep]] = na[keep]
        b[active[keep]] = nb[keep]
        r1, r2, rmax = nr1[keep], nr2[keep], nrmax[keep]
        active = active[keep]
    return a, b, converged


def _check_fit_sample(x):
    if x.size < 2:
        raise DegenerateSample("parameter estimation needs at least two observations")
    if np.all(x == x[0]):
        raise DegenerateSample("sample is constant")


def mle_fit(values) -> BetaParams:
    """Maximum likelihood estimate of (alpha, beta).

    Raises
    ------
    NonInteriorData
        If any value equals 0 or 1.
    DegenerateSample
        For fewer than two observations or a constant sample.
    NoConvergence
        If the Newton iteration hits its cap.
    """
    x = as_sample(values, interior=True)
    _check_fit_sample(x)
    a0, b0 = _moments_init(x.mean(), x.var())
    a, b, ok = solve_log_moments(np.log(x).mean(), np.log1p(-x).mean(), a0, b0)
    if not ok[0]:
        raise NoConvergence("beta MLE did not converge")
    return BetaParams(a[0], b[0])


def score_residuals(values, p) -> tuple[float, float]:
    """Residuals of the two likelihood equations at ``p``."""
    x = as_sample(values, interior=True)
    a, b = as_params(p)
    r1, r2 = _residuals(np.array([a]), np.array([b]),
                        np.log(x).mean(), np.log1p(-x).mean())
    return float(r1[0]), float(r2[0])


def moment_fit(values) -> BetaParams:
    """Method-of-moments estimate (sample variance with divisor n)."""
    x = as_sample(values)
    mean, var = x.mean(), x.var()
    if not (0 < var < mean * (1.0 - mean)):
        raise DegenerateSample("sample variance must lie strictly between 0 and mean*(1-mean)")
    a, b = _moments_init(mean, var)
    return BetaParams(a, b)


def fit(values, method=EstimationMethod.MLE) -> BetaParams:
    method = EstimationMethod(method)
    return mle_fit(values) if method is EstimationMethod.MLE else moment_fit(values)


def fit_batch(X: np.ndarray, method=EstimationMethod.MLE):
    """Fit every row of ``X``; rows that cannot be fitted are flagged, not raised.

    Returns
    -------
    alpha, beta : ndarray
        Estimates (NaN where fitting failed).
    ok : ndarray of bool
    """
    method = EstimationMethod(method)
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=1)
    var = X.var(axis=1)
    valid = (var > 0) & (var < mean * (1.0 - mean))
    a0, b0 = _moments_init(mean, var)
    if method is EstimationMethod.MOMENTS:
        ok = valid & (a0 > 0) & (b0 > 0)
        return np.where(ok, a0, np.nan), np.where(ok, b0, np.nan), ok
    interior = np.all((X > 0) & (X < 1), axis=1)
    ok = valid & interior
    alpha = np.full(X.shape[0], np.nan)
    beta = np.full(X.shape[0], np.nan)
    if ok.any():
        Xi = X[ok]
        a, b, conv = solve_log_moments(np.log(Xi).mean(axis=1), np.log1p(-Xi).mean(axis=1),
                                       a0[ok], b0[ok])
        idx = np.nonzero(ok)[0]
        alpha[idx[conv]] = a[conv]
        beta[idx[conv]] = b[conv]
        ok[idx[~conv]] = False
    return alpha, beta, ok


def fisher_information(p) -> np.ndarray:
    a, b = as_params(p)
    ts = specfun.trigamma(a + b)
    return np.array([[specfun.trigamma(a) - ts, -ts], [-ts, specfun.trigamma(b) - ts]])


def fisher_inverse(p) -> np.ndarray:
    """Inverse Fisher information of one observation."""
    a, b = as_params(p)
    ta, tb, ts = specfun.trigamma(a), specfun.trigamma(b), specfun.trigamma(a + b)
    det = (ta + tb) * ts - ta * tb
    return np.array([[ts - tb, -ts], [-ts, ts - ta]]) / det
