"""Quadrature rules on finite intervals.

``tanh_sinh`` handles integrands with algebraic or logarithmic endpoint
singularities (beta densities with a shape below one, score functions with
log x). ``gauss_legendre`` supplies the Nystrom grid. ``checked_quad`` wraps
adaptive quadrature for scalar integrands and fails loudly instead of warning.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import NoConvergence

# |tau| <= 6 keeps the smallest node offset near 1e-275 (no underflow in log)
_TMAX = 6.0


@lru_cache(maxsize=16)
def _ts_reference(step: float):
    k = int(np.ceil(_TMAX / step))
    tau = np.arange(-k, k + 1) * step
    u = np.pi * np.sinh(tau)
    psi = 1.0 / (1.0 + np.exp(-u))
    cpsi = 1.0 / (1.0 + np.exp(u))
    dpsi = np.pi * np.cosh(tau) * psi * cpsi
    return psi, cpsi, step * dpsi


def tanh_sinh(lo: float, hi: float, step: float = 0.125):
    """Double-exponential rule on [lo, hi] with lo, hi in [0, 1].

    Returns
    -------
    x, xc, w : ndarray
        Nodes, their complements ``1 - x`` (computed without cancellation) and
        weights, so that ``sum(w * f(x))`` approximates the integral.
    """
    psi, cpsi, wref = _ts_reference(float(step))
    width = hi - lo
    x = lo + width * psi
    xc = (1.0 - hi) + width * cpsi
    return x, xc, width * wref


@lru_cache(maxsize=32)
def _gl_reference(m: int):
    return np.polynomial.legendre.leggauss(m)


def gauss_legendre(m: int, lo: float = 0.0, hi: float = 1.0):
    """m-point Gauss-Legendre nodes and weights on [lo, hi]."""
    u, w = _gl_reference(int(m))
    half = 0.5 * (hi - lo)
    return lo + half * (u + 1.0), half * w


# adaptive-quadrature error estimates above this are reported as failures
QUAD_ERROR_LIMIT = 1e-8


def checked_quad(f, lo, hi, epsabs=1e-13, epsrel=1e-10, **kwargs) -> float:
    """Adaptive quadrature (QUADPACK) of a scalar function.

    Raises
    ------
    NoConvergence
        If the result is not finite or the error estimate exceeds
        ``QUAD_ERROR_LIMIT``.
    """
    # full_output replaces quadpack's roundoff warnings by an explicit error estimate
    out = integrate.quad(f, lo, hi, limit=500, epsabs=epsabs, epsrel=epsrel, full_output=1, **kwargs)
    value, err = out[0], out[1]
    if not (math.isfinite(value) and err <= QUAD_ERROR_LIMIT):
        raise NoConvergence(f"quadrature on [{lo}, {hi}] failed (error estimate {err:.2e})")
    return value
