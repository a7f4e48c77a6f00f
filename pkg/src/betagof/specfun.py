"""Special functions: log-gamma, digamma, trigamma, log-beta and the
regularized incomplete beta function with its inverse.

All functions accept scalars or numpy arrays (broadcast elementwise) and
return a Python float for scalar input.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, NoConvergence

EULER_GAMMA = 0.57721566490153286061
_HALF_LOG_2PI = 0.91893853320467274178

# B_{2k} / (2k (2k-1)), k = 1..8  (Stirling series for ln Gamma)
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# B_{2k} / (2k), k = 1..7  (asymptotic digamma)
_DIGAMMA_ASYM = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
# B_{2k}, k = 1..8  (asymptotic trigamma, odd powers from x^-3)
_TRIGAMMA_ASYM = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)
_ASYM_MIN = 10.0


def _zeta_minus_one(k: int, cutoff: int = 16) -> float:
    """zeta(k) - 1 for integer k >= 2 by Euler-Maclaurin summation."""
    bern = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0)
    terms = [float(n) ** -k for n in range(2, cutoff)]
    N = float(cutoff)
    terms.append(N ** (1 - k) / (k - 1))
    terms.append(0.5 * N**-k)
    rising = float(k)  # k (k+1) ... (k+2j-2)
    for j, b2j in enumerate(bern, start=1):
        terms.append(b2j / math.factorial(2 * j) * rising * N ** (-k - 2 * j + 1))
        rising *= (k + 2 * j - 1) * (k + 2 * j)
    return math.fsum(terms)


# ln Gamma(2 + z) = (1 - gamma) z + sum_{k>=2} (-1)^k (zeta(k) - 1) z^k / k, |z| < 2
_LG2_COEF = np.array([(-1.0) ** k * _zeta_minus_one(k) / k for k in range(2, 32)])


def _prep(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def _require_positive(x, name):
    if not np.all(x > 0):  # also rejects NaN
        raise DomainError(f"{name} requires positive arguments")


def _lngamma2(z):
    """ln Gamma(2 + z) for |z| <= 0.5."""
    acc = np.zeros_like(z)
    for c in _LG2_COEF[::-1]:
        acc = (acc + c) * z
    return z * (acc + (1.0 - EULER_GAMMA))


def _stirling(x):
    y = 1.0 / (x * x)
    acc = np.zeros_like(x)
    for c in _STIRLING[::-1]:
        acc = acc * y + c
    return (x - 0.5) * np.log(x) - x + _HALF_LOG_2PI + acc / x


def ln_gamma(x):
    """Natural logarithm of the gamma function for x > 0.

    Uses a zeta-series around 2 for x < 2.5 (accurate relative error near the
    zeros at 1 and 2), downward recurrence on [2.5, 10) and the Stirling
    series above.
    """
    arr, scalar = _prep(x)
    _require_positive(arr, "ln_gamma")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)

    m = flat < 0.5
    if m.any():
        z = flat[m]
        out[m] = _lngamma2(z) - np.log1p(z) - np.log(z)
    m = (flat >= 0.5) & (flat < 1.5)
    if m.any():
        z = flat[m] - 1.0
        out[m] = _lngamma2(z) - np.log1p(z)
    m = (flat >= 1.5) & (flat < 2.5)
    if m.any():
        out[m] = _lngamma2(flat[m] - 2.0)
    m = (flat >= 2.5) & (flat < _ASYM_MIN)
    if m.any():
        y = flat[m].copy()
        prod = np.ones_like(y)
        while True:
            step = y >= 2.5
            if not step.any():
                break
            y[step] -= 1.0
            prod[step] *= y[step]
        out[m] = np.log(prod) + _lngamma2(y - 2.0)
    m = flat >= _ASYM_MIN
    if m.any():
        out[m] = _stirling(flat[m])
    return _ret(out.reshape(arr.shape), scalar)


def digamma(x):
    """Digamma function psi(x) = d/dx ln Gamma(x), x > 0."""
    arr, scalar = _prep(x)
    _require_positive(arr, "digamma")
    y = np.atleast_1d(arr).astype(float).ravel()
    acc = np.zeros_like(y)
    while True:
        m = y < _ASYM_MIN
        if not m.any():
            break
        acc[m] += 1.0 / y[m]
        y[m] += 1.0
    with np.errstate(over="ignore"):
        w = 1.0 / (y * y)
    series = np.zeros_like(y)
    for c in _DIGAMMA_ASYM[::-1]:
        series = series * w + c
    out = np.log(y) - 0.5 / y - series * w - acc
    return _ret(out.reshape(arr.shape), scalar)


def _split(a):
    c = 134217729.0 * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _inv_square_dd(x):
    """1/x**2 as an unevaluated sum hi + lo (double-double accuracy)."""
    sh, sl = _two_prod(x, x)
    q = 1.0 / sh
    p, e = _two_prod(q, sh)
    r = ((1.0 - p) - e) - q * sl
    return q, q * r


def trigamma(x):
    """Trigamma function psi_1(x) = d^2/dx^2 ln Gamma(x), x > 0."""
    arr, scalar = _prep(x)
    _require_positive(arr, "trigamma")
    y = np.atleast_1d(arr).astype(float).ravel()
    hi = np.zeros_like(y)
    lo = np.zeros_like(y)
    # the leading 1/x^2 term dominates for small x: carry it in double-double
    small = y < 1.0
    if small.any():
        hi[small], lo[small] = _inv_square_dd(y[small])
        y[small] += 1.0
    acc = np.zeros_like(y)
    while True:
        m = y < _ASYM_MIN
        if not m.any():
            break
        acc[m] += 1.0 / (y[m] * y[m])
        y[m] += 1.0
    with np.errstate(over="ignore"):
        w = 1.0 / (y * y)
    series = np.zeros_like(y)
    for c in _TRIGAMMA_ASYM[::-1]:
        series = series * w + c
    tail = 1.0 / y + 0.5 * w + series * w / y
    out = hi + (lo + (acc + tail))
    return _ret(out.reshape(arr.shape), scalar)


def ln_beta(a, b):
    """ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b)."""
    a_arr, sa = _prep(a)
    b_arr, sb = _prep(b)
    if not (np.all(a_arr > 0) and np.all(b_arr > 0)):
        raise DomainError("ln_beta requires positive arguments")
    out = ln_gamma(a_arr) + ln_gamma(b_arr) - ln_gamma(a_arr + b_arr)
    return _ret(np.asarray(out), sa and sb)


_CF_EPS = 1e-15
_CF_TINY = 1e-300
_CF_MAXIT = 5000


def _betacf(x, a, b):
    """Continued fraction of the incomplete beta function (modified Lentz).

    Each element iterates until its own convergence, so results do not depend
    on which other elements share the call.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _CF_TINY, _CF_TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.arange(x.size)
    for m in range(1, _CF_MAXIT + 1):
        xa, aa_, ba = x[active], a[active], b[active]
        qaba, qapa, qama = qab[active], qap[active], qam[active]
        ca, da, ha = c[active], d[active], h[active]
        m2 = 2.0 * m
        num = m * (ba - m) * xa / ((qama + m2) * (aa_ + m2))
        da = 1.0 + num * da
        da = np.where(np.abs(da) < _CF_TINY, _CF_TINY, da)
        ca = 1.0 + num / ca
        ca = np.where(np.abs(ca) < _CF_TINY, _CF_TINY, ca)
        da = 1.0 / da
        ha = ha * da * ca
        num = -(aa_ + m) * (qaba + m) * xa / ((aa_ + m2) * (qapa + m2))
        da = 1.0 + num * da
        da = np.where(np.abs(da) < _CF_TINY, _CF_TINY, da)
        ca = 1.0 + num / ca
        ca = np.where(np.abs(ca) < _CF_TINY, _CF_TINY, ca)
        da = 1.0 / da
        delta = da * ca
        ha = ha * delta
        c[active], d[active], h[active] = ca, da, ha
        active = active[np.abs(delta - 1.0) >= _CF_EPS]
        if active.size == 0:
            return h
    raise NoConvergence("incomplete beta continued fraction did not converge")


def _check_unit(t, name):
    if not np.all((t >= 0) & (t <= 1)):
        raise DomainError(f"{name}: argument must lie in [0, 1]")


def reg_inc_beta(t, a, b):
    """Regularized incomplete beta function I_t(a, b).

    Continued fraction for I_t(a, b) when t < (a+1)/(a+b+2), otherwise
    1 - I_{1-t}(b, a).
    """
    t_arr, st = _prep(t)
    a_arr, sa = _prep(a)
    b_arr, sb = _prep(b)
    _check_unit(t_arr, "reg_inc_beta")
    if not (np.all(a_arr > 0) and np.all(b_arr > 0)):
        raise DomainError("reg_inc_beta requires positive shape parameters")
    t_arr, a_arr, b_arr = np.broadcast_arrays(t_arr, a_arr, b_arr)
    shape = t_arr.shape
    t_f = t_arr.ravel().astype(float)
    a_f = a_arr.ravel().astype(float)
    b_f = b_arr.ravel().astype(float)
    out = np.where(t_f >= 1.0, 1.0, 0.0)
    inner = (t_f > 0.0) & (t_f < 1.0)
    if inner.any():
        tt, aa, bb = t_f[inner], a_f[inner], b_f[inner]
        swap = tt > (aa + 1.0) / (aa + bb + 2.0)
        x = np.where(swap, 1.0 - tt, tt)
        p = np.where(swap, bb, aa)
        q = np.where(swap, aa, bb)
        log_t = np.log(tt)
        log_1mt = np.log1p(-tt)
        lx = np.where(swap, log_1mt, log_t)
        l1x = np.where(swap, log_t, log_1mt)
        front = np.exp(p * lx + q * l1x - ln_beta(p, q)) / p
        val = front * _betacf(x, p, q)
        out[inner] = np.clip(np.where(swap, 1.0 - val, val), 0.0, 1.0)
    return _ret(out.reshape(shape), st and sa and sb)


def _log_density(x, a, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.where(a == 1.0, 0.0, (a - 1.0) * np.log(x))
        l1x = np.where(b == 1.0, 0.0, (b - 1.0) * np.log1p(-x))
    return lx + l1x - ln_beta(a, b)


def inv_reg_inc_beta(p, a, b, max_iter: int = 100):
    """Inverse of ``reg_inc_beta`` in its first argument.

    Newton's method safeguarded by a shrinking bracket; whenever a Newton
    iterate leaves the bracket the step falls back to bisection. Iteration
    stops at ``|I_t(a, b) - p| <= 1e-14`` or when the bracket has shrunk to a
    few ulps. In the latter case the residual is limited by the density times
    the local double spacing (large near t = 1 when b << 1).
    """
    p_arr, sp_ = _prep(p)
    a_arr, sa = _prep(a)
    b_arr, sb = _prep(b)
    _check_unit(p_arr, "inv_reg_inc_beta")
    if not (np.all(a_arr > 0) and np.all(b_arr > 0)):
        raise DomainError("inv_reg_inc_beta requires positive shape parameters")
    p_arr, a_arr, b_arr = np.broadcast_arrays(p_arr, a_arr, b_arr)
    shape = p_arr.shape
    pf = p_arr.ravel().astype(float)
    af = a_arr.ravel().astype(float)
    bf = b_arr.ravel().astype(float)
    out = np.where(pf >= 1.0, 1.0, 0.0)
    active = np.nonzero((pf > 0.0) & (pf < 1.0))[0]
    if active.size == 0:
        return _ret(out.reshape(shape), sp_ and sa and sb)
    lo = np.zeros(pf.size)
    hi = np.ones(pf.size)
    x = af / (af + bf)
    for _ in range(max_iter):
        xa, pa, aa, ba = x[active], pf[active], af[active], bf[active]
        f = reg_inc_beta(xa, aa, ba) - pa
        below = f < 0
        lo[active] = np.where(below, xa, lo[active])
        hi[active] = np.where(below, hi[active], xa)
        with np.errstate(over="ignore"):
            dens = np.exp(_log_density(xa, aa, ba))
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = xa - f / dens
        la, ha = lo[active], hi[active]
        ok = np.isfinite(newton) & (newton > la) & (newton < ha)
        nxt = np.where(ok, newton, 0.5 * (la + ha))
        x[active] = nxt
        done = (np.abs(f) <= 1e-14) | (ha - la <= 4e-16 * np.maximum(ha, 1e-300))
        # elements that were already solved keep their evaluated point
        x[active[done]] = xa[done]
        active = active[~done]
        if active.size == 0:
            break
    if active.size:
        raise NoConvergence("inv_reg_inc_beta reached its iteration cap")
    out_idx = (pf > 0.0) & (pf < 1.0)
    out[out_idx] = x[out_idx]
    return _ret(out.reshape(shape), sp_ and sa and sb)
