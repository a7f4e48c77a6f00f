"""Limit theory of T_n: covariance kernel, its eigenvalues, and the
discrepancy functional under fixed alternatives.

Under the beta hypothesis with parameters (a, b), T_n converges in law to
||Z||^2 = sum_j lambda_j N_j^2, where Z is a centred Gaussian process on
[0, 1] with covariance kernel

    K(s, t) = E[h(X, s) h(X, t)],
    h(x, s) = ((a + b) x - a) 1{x >= s} + l(x)' Y(s) - g(s),

with g(t) = t^a (1 - t)^b / B(a, b), l(x) = I^{-1} score(x) the influence
function of the MLE, and Y(t) = E[(X - 1, X)' 1{X >= t}] - grad g(t).
The lambda_j are the eigenvalues of the integral operator with kernel K.

Under an alternative, T_n / n converges to

    Delta = int_0^1 ((a + b) E[X 1{X >= t}] - a P(X >= t) - g(t))^2 dt

evaluated at the limit of the estimator (pseudo-true parameters).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import specfun
from .alternatives import as_alternative
from .beta_model import BetaParams, _moments_init, as_params, fisher_inverse, solve_log_moments
from .errors import DomainError, NoConvergence
from .quadrature import _TMAX, checked_quad, gauss_legendre, tanh_sinh

#: eigenvalues down to this are treated as rounding noise and clipped to 0
PSD_TOLERANCE = 1e-8


def _unit(t, name="t"):
    x = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(x)) or np.any((x < 0) | (x > 1)):
        raise DomainError(f"{name} must lie in [0, 1]")
    return x


def _scalar_or(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _g_parts(x, xc, a, b):
    """g on nodes given x and 1 - x separately (0 at the endpoints)."""
    with np.errstate(divide="ignore"):
        lx, lxc = np.log(x), np.log(xc)
    return np.exp(a * lx + b * lxc - specfun.ln_beta(a, b)), lx, lxc


def g_fn(t, p):
    """g(t) = t^a (1 - t)^b / B(a, b)."""
    a, b = as_params(p)
    x = _unit(t)
    g, _, _ = _g_parts(x, 1.0 - x, a, b)
    return _scalar_or(g, t)


def _g_grad_parts(x, xc, a, b):
    g, lx, lxc = _g_parts(x, xc, a, b)
    ps = specfun.digamma(a + b)
    with np.errstate(invalid="ignore"):
        da = np.where(g > 0, g * (lx - specfun.digamma(a) + ps), 0.0)
        db = np.where(g > 0, g * (lxc - specfun.digamma(b) + ps), 0.0)
    return g, np.stack([da, db], axis=-1)


def g_grad(t, p):
    """(dg/da, dg/db); both components are 0 at t = 0 and t = 1."""
    a, b = as_params(p)
    x = _unit(t)
    _, grad = _g_grad_parts(x, 1.0 - x, a, b)
    return grad


def _score_parts(lx, lxc, a, b):
    ps = specfun.digamma(a + b)
    return np.stack([ps - specfun.digamma(a) + lx, ps - specfun.digamma(b) + lxc], axis=-1)


def score(x, p):
    """Gradient of the log density in (a, b)."""
    a, b = as_params(p)
    xv = np.asarray(x, dtype=float)
    if np.any(~((xv > 0) & (xv < 1))):
        raise DomainError("score needs x strictly inside (0, 1)")
    return _score_parts(np.log(xv), np.log1p(-xv), a, b)


def ell(x, p):
    """Influence function of the MLE: inverse Fisher information times the score."""
    return score(x, p) @ fisher_inverse(p)


def _upsilon_parts(x, xc, a, b):
    s = a + b
    tail_x = a / s * (1.0 - specfun.reg_inc_beta(x, a + 1.0, b))
    tail_1 = 1.0 - specfun.reg_inc_beta(x, a, b)
    g, grad = _g_grad_parts(x, xc, a, b)
    ups = np.stack([tail_x - tail_1 - grad[..., 0], tail_x - grad[..., 1]], axis=-1)
    return ups, g


def upsilon(t, p):
    """Y(t) = (E[X 1{X>=t}] - P(X>=t) - dg/da, E[X 1{X>=t}] - dg/db)."""
    a, b = as_params(p)
    x = _unit(t)
    ups, _ = _upsilon_parts(x, 1.0 - x, a, b)
    return ups


@dataclass(frozen=True)
class KernelContext:
    """Parameters at which the covariance kernel is built.

    ``order`` is the number of tanh-sinh nodes on each half of the rule used
    for every quadrature against the beta density.
    """

    params: BetaParams
    order: int = 64

    def __post_init__(self):
        object.__setattr__(self, "params", as_params(self.params))
        if int(self.order) != self.order or self.order < 8:
            raise ValueError("quadrature order must be an integer of at least 8")

    @property
    def step(self) -> float:
        return _TMAX / self.order

    @cached_property
    def info_inverse(self) -> np.ndarray:
        return fisher_inverse(self.params)

    def density(self, lx, lxc):
        a, b = self.params
        return np.exp((a - 1.0) * lx + (b - 1.0) * lxc - specfun.ln_beta(a, b))


def _h_on_piece(x, lx, lxc, above, s, ctx: KernelContext):
    """h(x, s) on quadrature nodes lying entirely above (or below) s."""
    a, b = ctx.params
    ups, g = _upsilon_parts(np.array([s]), np.array([1.0 - s]), a, b)
    lin = _score_parts(lx, lxc, a, b) @ ctx.info_inverse @ ups[0]
    lead = ((a + b) * x - a) if above else 0.0
    return lead + lin - g[0]


def _pieces(cuts):
    edges = [0.0] + sorted(cuts) + [1.0]
    return [(lo, hi) for lo, hi in zip(edges, edges[1:]) if hi > lo]


def centring(s: float, ctx: KernelContext) -> float:
    """int h(x, s) f(x) dx by quadrature; zero in exact arithmetic."""
    s = float(_unit(s, "s"))
    total = 0.0
    for lo, hi in _pieces([s]):
        x, xc, w = tanh_sinh(lo, hi, ctx.step)
        lx, lxc = np.log(x), np.log(xc)
        total += np.sum(w * _h_on_piece(x, lx, lxc, lo >= s, s, ctx) * ctx.density(lx, lxc))
    return float(total)


def kernel(s: float, t: float, ctx: KernelContext) -> float:
    """K(s, t) = E[h(X, s) h(X, t)] by quadrature against the beta density.

    The integration range is split at s and t, where the indicators jump.
    """
    s = float(_unit(s, "s"))
    t = float(_unit(t, "t"))
    total = 0.0
    for lo, hi in _pieces([s, t]):
        x, xc, w = tanh_sinh(lo, hi, ctx.step)
        lx, lxc = np.log(x), np.log(xc)
        hs = _h_on_piece(x, lx, lxc, lo >= s, s, ctx)
        ht = _h_on_piece(x, lx, lxc, lo >= t, t, ctx)
        total += np.sum(w * hs * ht * ctx.density(lx, lxc))
    return float(total)


def _tail_moment(k, u, a, b):
    """E[X^k 1{X >= u}] for X ~ B(a, b)."""
    ratio = math.exp(float(specfun.ln_beta(a + k, b) - specfun.ln_beta(a, b)))
    return ratio * (1.0 - specfun.reg_inc_beta(u, a + k, b))


def _kernel_parts(u, ctx: KernelContext):
    """A(u), C(u), Y(u) and g(u) on the nodes ``u`` (see ``kernel_matrix``)."""
    a, b = ctx.params
    s = a + b
    A = (s * s * _tail_moment(2, u, a, b) - 2.0 * a * s * _tail_moment(1, u, a, b)
         + a * a * _tail_moment(0, u, a, b))
    C = np.empty((u.size, 2))
    for i, ui in enumerate(u):
        x, xc, w = tanh_sinh(ui, 1.0, ctx.step)
        lx, lxc = np.log(x), np.log(xc)
        wf = w * ((s * x - a) * ctx.density(lx, lxc))
        C[i] = (wf @ _score_parts(lx, lxc, a, b)) @ ctx.info_inverse
    ups, g = _upsilon_parts(u, 1.0 - u, a, b)
    return A, C, ups, g


def _assemble(u, parts, ctx):
    A, C, ups, g = parts
    K = np.where(u[:, None] >= u[None, :], A[:, None], A[None, :])  # A(max(s, t))
    K = K + C @ ups.T + ups @ C.T + ups @ ctx.info_inverse @ ups.T - np.outer(g, g)
    return 0.5 * (K + K.T)


def kernel_matrix(nodes, ctx: KernelContext) -> np.ndarray:
    """K on a grid via the expansion

        K(s, t) = A(max(s, t)) + C(s)'Y(t) + C(t)'Y(s) + Y(s)' I^{-1} Y(t) - g(s) g(t)

    with A(u) = E[c(X)^2 1{X >= u}] (closed form), c(x) = (a + b) x - a, and
    C(u) = E[c(X) l(X) 1{X >= u}] (one quadrature per node). Uses
    E[c(X) 1{X >= u}] = g(u), E[l(X)] = 0 and E[l l'] = I^{-1}.
    """
    u = _unit(np.asarray(nodes, dtype=float).ravel(), "nodes")
    return _assemble(u, _kernel_parts(u, ctx), ctx)


def _row_integrals(u, parts, ctx):
    """int_0^1 K(u, y) dy in closed form, from the same expansion.

    int A(max(u, y)) dy = u A(u) + E[c(X)^2 (X - u)_+]; the integrals of Y and
    C over [0, 1] reduce to beta moments E[X^k] and E[X^k ln X],
    E[X^k ln(1 - X)].
    """
    a, b = ctx.params
    s = a + b
    A, C, ups, g = parts
    T = lambda k: _tail_moment(k, u, a, b)
    plus = lambda k: T(k + 1) - u * T(k)  # E[X^k (X - u)_+]
    a_part = u * A + s * s * plus(2) - 2.0 * a * s * plus(1) + a * a * plus(0)
    m = lambda k: math.exp(float(specfun.ln_beta(a + k, b) - specfun.ln_beta(a, b)))
    psi = lambda z: float(specfun.digamma(z))
    q = s * (s + 1.0)
    int_g = a * b / q  # B(a+1, b+1) / B(a, b)
    dint_a = b / q - a * b * (2.0 * s + 1.0) / (q * q)
    dint_b = a / q - a * b * (2.0 * s + 1.0) / (q * q)
    int_ups = np.array([m(2) - m(1) - dint_a, m(2) - dint_b])
    score_moment = lambda k: m(k) * np.array([psi(a + k) - psi(s + k) - psi(a) + psi(s),
                                              psi(s) - psi(s + k)])
    int_c = (s * score_moment(2) - a * score_moment(1)) @ ctx.info_inverse
    return (a_part + C @ int_ups + ups @ int_c + ups @ ctx.info_inverse @ int_ups
            - g * int_g)


@dataclass(frozen=True)
class EigenResult:
    """Nystrom approximation of the kernel's eigenvalues.

    ``trace`` is the quadrature value sum_i w_i K(x_i, x_i) of int K(t, t) dt,
    which equals the sum of all eigenvalues of the operator.
    """

    eigenvalues: np.ndarray
    m: int
    trace: float
    min_raw: float
    clipped: int = 0
    method: str = "corrected"
    notes: tuple[str, ...] = field(default=())

    @property
    def psd_ok(self) -> bool:
        return self.min_raw >= -PSD_TOLERANCE


NYSTROM_METHODS = ("corrected", "plain")


def nystrom_eigenvalues(ctx: KernelContext, m: int = 64, method: str = "corrected") -> EigenResult:
    """Eigenvalues of the integral operator with kernel K on [0, 1].

    Discretizes on an m-point Gauss-Legendre grid x_i with weights w_i.

    ``plain``: eigenvalues of W^{1/2} K W^{1/2}. Their sum equals the trace
    estimate exactly, but the kink of K along the diagonal limits the
    accuracy of individual eigenvalues to O(m^-2).

    ``corrected`` (default): singularity subtraction. The operator is
    applied as int K(x_i, y) (phi(y) - phi(x_i)) dy + phi(x_i) r(x_i) with
    the row integral r(x) = int K(x, y) dy in closed form, which adds the
    diagonal d_i = r(x_i) - sum_j w_j K(x_i, x_j) to the symmetric matrix.
    The leading eigenvalues then converge much faster; the sum of all
    eigenvalues is no longer tied to the trace estimate.

    Negative eigenvalues no larger in size than ``PSD_TOLERANCE`` are clipped
    to 0 and counted in ``clipped``.
    """
    if int(m) != m or m < 8:
        raise ValueError("grid size m must be an integer of at least 8")
    if method not in NYSTROM_METHODS:
        raise ValueError(f"method must be one of {NYSTROM_METHODS}, got {method!r}")
    x, w = gauss_legendre(int(m))
    parts = _kernel_parts(x, ctx)
    K = _assemble(x, parts, ctx)
    if not np.all(np.isfinite(K)):
        raise NoConvergence("kernel matrix has non-finite entries")
    r = np.sqrt(w)
    S = r[:, None] * K * r[None, :]
    if method == "corrected":
        S = S + np.diag(_row_integrals(x, parts, ctx) - K @ w)
    ev = np.linalg.eigvalsh(S)[::-1]
    min_raw = float(ev.min())
    tiny = (ev < 0) & (ev >= -PSD_TOLERANCE)
    notes = ()
    if tiny.any():
        notes += (f"clipped {int(tiny.sum())} eigenvalues in [{min_raw:.2e}, 0) to 0",)
    if min_raw < -PSD_TOLERANCE:
        notes += (f"smallest eigenvalue {min_raw:.2e} is below -{PSD_TOLERANCE:g}",)
    ev = np.where(tiny, 0.0, ev)
    return EigenResult(ev, int(m), float(np.sum(w * np.diag(K))), min_raw, int(tiny.sum()),
                       method, notes)


def delta_discrepancy(alt, p) -> float:
    """Limit of T_n / n under the law ``alt`` when the estimator converges to ``p``."""
    law = as_alternative(alt)
    a, b = as_params(p)
    s = a + b
    lnB = float(specfun.ln_beta(a, b))

    def integrand(t):
        if t <= 0.0 or t >= 1.0:
            g = 0.0
        else:
            g = math.exp(a * math.log(t) + b * math.log1p(-t) - lnB)
        r = s * float(law.partial_mean(t)) - a * float(law.sf(t)) - g
        return r * r

    pts = tuple(law.breakpoints) or None
    return max(checked_quad(integrand, 0.0, 1.0, epsabs=1e-15, points=pts), 0.0)


def pseudo_true_params(alt, tol: float = 1e-8) -> BetaParams:
    """Solve the likelihood equations with population log moments of ``alt``."""
    law = as_alternative(alt)
    L1, L2 = law.log_moments()
    mean = law.mean
    var = law.second_moment - mean * mean
    a0, b0 = _moments_init(mean, var)
    if not (a0 > 0 and b0 > 0):
        a0 = b0 = 1.0
    a, b, ok = solve_log_moments(L1, L2, a0, b0)
    if not ok[0]:
        raise NoConvergence(f"pseudo-true parameters for {law.label} not found")
    params = BetaParams(a[0], b[0])
    ps = float(specfun.digamma(params.alpha + params.beta))
    res = max(abs(float(specfun.digamma(params.alpha)) - ps - L1),
              abs(float(specfun.digamma(params.beta)) - ps - L2))
    if res > tol:
        raise NoConvergence(f"pseudo-true residual {res:.1e} exceeds {tol:g}")
    return params
