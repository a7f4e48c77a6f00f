"""Alternative laws on [0, 1] used in power studies and consistency checks.

Every law can draw samples, evaluate its CDF and survival function, and
report the partial mean E[X 1{X >= t}] and the log moments
(E ln X, E ln(1 - X)). Laws are written as short spec strings:

    B(a,b)                 beta law
    U                      uniform, same as B(1,1)
    TN(mu,sigma)           normal(mu, sigma) truncated to [0, 1]
    LT(mu,sigma)           logit-normal: expit(mu + sigma * Z)
    BN(p,a,b,mu,sigma)     B(a,b) with probability p, otherwise TN(mu,sigma)
    F o G                  outer CDF F applied to a draw from the inner law G

The second argument of TN, LT and N is a standard deviation, not a variance.
Outer laws: C(theta) Cauchy, EXP(lambda) exponential, N(mu,sigma) normal
(also written PHI or Φ). Inner laws: GO(eta,nu) Gompertz, HN(sigma)
half-normal, L(mu,theta) Laplace. The composition operator is a lower-case
``o`` or ``∘`` right after the closing parenthesis, e.g. ``C(1)oGO(2,1)``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import specfun
from ._random import stream
from .beta_model import draw_beta
from .errors import SpecParseError
from .quadrature import checked_quad


def _fmt(v: float) -> str:
    return f"{v:g}"


def _arr(t):
    return np.asarray(t, dtype=float)


def _out(values, t):
    return float(values) if np.ndim(t) == 0 else values


def _quad(f, lo, hi, points=()):
    pts = sorted(p for p in points if lo < p < hi)
    return checked_quad(f, lo, hi, points=pts or None)


def _quad_inf(f, points=()):
    """int_0^inf f, split at the given points."""
    edges = [0.0] + sorted(p for p in points if p > 0)
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        total += _quad(f, lo, hi)
    return total + checked_quad(f, edges[-1], np.inf)


def _check_positive(name, **values):
    for key, v in values.items():
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name}: {key} must be positive and finite, got {v}")


def _check_finite(name, **values):
    for key, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name}: {key} must be finite, got {v}")


class Alternative(ABC):
    """A law on [0, 1]."""

    #: points in (0, 1) where the CDF has a kink (passed to quadrature)
    breakpoints: tuple[float, ...] = ()

    @property
    @abstractmethod
    def label(self) -> str:
        """Canonical spec string."""

    @abstractmethod
    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n draws from an existing generator."""

    @abstractmethod
    def _cdf(self, t: np.ndarray) -> np.ndarray:
        """CDF on an array of points inside [0, 1]."""

    def _sf(self, t: np.ndarray) -> np.ndarray:
        return 1.0 - self._cdf(t)

    def _sf_complement(self, c: float) -> float:
        """P(X >= 1 - c) for c in (0, 1); overridden where 1 - c would lose digits."""
        return float(self.sf(1.0 - c))

    def sample(self, n: int, seed: int) -> np.ndarray:
        """n draws, deterministic in (law, n, seed)."""
        if n < 1:
            raise ValueError("n must be at least 1")
        return self.draw(stream(seed), n)

    def cdf(self, t):
        x = _arr(t)
        if np.any((x < 0) | (x > 1)):
            raise ValueError("t must lie in [0, 1]")
        out = np.clip(self._cdf(x), 0.0, 1.0)
        out = np.where(x == 0, 0.0, np.where(x == 1, 1.0, out))
        return _out(out, t)

    def sf(self, t):
        x = _arr(t)
        if np.any((x < 0) | (x > 1)):
            raise ValueError("t must lie in [0, 1]")
        out = np.clip(self._sf(x), 0.0, 1.0)
        out = np.where(x == 0, 1.0, np.where(x == 1, 0.0, out))
        return _out(out, t)

    def partial_mean(self, t):
        """E[X 1{X >= t}] = t P(X >= t) + int_t^1 P(X >= u) du."""
        x = _arr(t)
        vals = np.array([self._partial_mean_scalar(float(v)) for v in np.ravel(x)]).reshape(x.shape)
        return _out(vals, t)

    def _partial_mean_scalar(self, t: float) -> float:
        if t >= 1.0:
            return 0.0
        sf = lambda u: float(self.sf(u))
        return t * sf(t) + _quad(sf, t, 1.0, self.breakpoints)

    @property
    def mean(self) -> float:
        return float(self.partial_mean(0.0))

    @property
    def second_moment(self) -> float:
        """E[X^2] = int_0^1 2u P(X >= u) du."""
        return _quad(lambda u: 2.0 * u * float(self.sf(u)), 0.0, 1.0, self.breakpoints)

    def log_moments(self) -> tuple[float, float]:
        """(E ln X, E ln(1 - X)) by integrating the CDF and survival function."""
        # E ln X = -int_0^1 F(u)/u du; with u = exp(-w) this is -int_0^inf F(e^-w) dw,
        # which keeps the slowly decaying endpoint contribution well resolved
        pts = tuple(-math.log(b) for b in self.breakpoints)
        e_log = -_quad_inf(lambda w: float(self.cdf(math.exp(-w))), pts)
        pts = tuple(-math.log1p(-b) for b in self.breakpoints)
        e_log1m = -_quad_inf(lambda w: self._sf_complement(math.exp(-w)), pts)
        return e_log, e_log1m

    def __str__(self):
        return self.label


@dataclass(frozen=True, eq=True)
class BetaLaw(Alternative):
    alpha: float
    beta: float

    def __post_init__(self):
        _check_positive("B", alpha=self.alpha, beta=self.beta)

    @property
    def label(self):
        return f"B({_fmt(self.alpha)},{_fmt(self.beta)})"

    def draw(self, rng, n):
        return draw_beta(rng, n, self.alpha, self.beta)

    def _cdf(self, t):
        return specfun.reg_inc_beta(t, self.alpha, self.beta)

    def _sf(self, t):
        return specfun.reg_inc_beta(1.0 - t, self.beta, self.alpha)

    def _partial_mean_scalar(self, t):
        a, b = self.alpha, self.beta
        return a / (a + b) * (1.0 - float(specfun.reg_inc_beta(t, a + 1.0, b)))

    def log_moments(self):
        a, b = self.alpha, self.beta
        ps = float(specfun.digamma(a + b))
        return float(specfun.digamma(a)) - ps, float(specfun.digamma(b)) - ps


@dataclass(frozen=True, eq=True)
class TruncatedNormal(Alternative):
    """Normal(mu, sigma) conditioned on [0, 1]; sigma is the standard deviation."""

    mu: float
    sigma: float

    def __post_init__(self):
        _check_finite("TN", mu=self.mu)
        _check_positive("TN", sigma=self.sigma)

    @property
    def label(self):
        return f"TN({_fmt(self.mu)},{_fmt(self.sigma)})"

    def _bounds(self):
        s = self.sigma
        lo, hi = special.ndtr(-self.mu / s), special.ndtr((1.0 - self.mu) / s)
        return lo, hi

    def draw(self, rng, n):
        lo, hi = self._bounds()
        u = rng.random(n)
        x = self.mu + self.sigma * special.ndtri(lo + u * (hi - lo))
        return np.clip(x, 0.0, 1.0)

    def _cdf(self, t):
        lo, hi = self._bounds()
        return (special.ndtr((t - self.mu) / self.sigma) - lo) / (hi - lo)

    def _partial_mean_scalar(self, t):
        s = self.sigma
        lo, hi = self._bounds()
        zt, z1 = (t - self.mu) / s, (1.0 - self.mu) / s
        phi = lambda z: math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        num = self.mu * (hi - special.ndtr(zt)) + s * (phi(zt) - phi(z1))
        return float(num / (hi - lo))


@dataclass(frozen=True, eq=True)
class LogitNormal(Alternative):
    """expit(mu + sigma Z) with Z standard normal."""

    mu: float
    sigma: float

    def __post_init__(self):
        _check_finite("LT", mu=self.mu)
        _check_positive("LT", sigma=self.sigma)

    @property
    def label(self):
        return f"LT({_fmt(self.mu)},{_fmt(self.sigma)})"

    def draw(self, rng, n):
        return special.expit(self.mu + self.sigma * rng.standard_normal(n))

    def _cdf(self, t):
        with np.errstate(divide="ignore"):
            return special.ndtr((special.logit(t) - self.mu) / self.sigma)

    def _sf(self, t):
        with np.errstate(divide="ignore"):
            return special.ndtr((self.mu - special.logit(t)) / self.sigma)


@dataclass(frozen=True, eq=True)
class BetaNormalMixture(Alternative):
    """B(alpha, beta) with probability p, otherwise TN(mu, sigma)."""

    p: float
    alpha: float
    beta: float
    mu: float
    sigma: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"BN: p must lie strictly between 0 and 1, got {self.p}")
        _check_positive("BN", alpha=self.alpha, beta=self.beta, sigma=self.sigma)
        _check_finite("BN", mu=self.mu)

    @property
    def components(self):
        return BetaLaw(self.alpha, self.beta), TruncatedNormal(self.mu, self.sigma)

    @property
    def label(self):
        args = ",".join(_fmt(v) for v in (self.p, self.alpha, self.beta, self.mu, self.sigma))
        return f"BN({args})"

    def draw(self, rng, n):
        u = rng.random(n)
        b, tn = self.components
        x1 = b.draw(rng, n)
        x2 = tn.draw(rng, n)
        return np.where(u <= self.p, x1, x2)

    def _cdf(self, t):
        b, tn = self.components
        return self.p * b._cdf(t) + (1.0 - self.p) * tn._cdf(t)

    def _sf(self, t):
        b, tn = self.components
        return self.p * b._sf(t) + (1.0 - self.p) * tn._sf(t)

    def _partial_mean_scalar(self, t):
        b, tn = self.components
        return self.p * b._partial_mean_scalar(t) + (1.0 - self.p) * tn._partial_mean_scalar(t)


# ----------------------------------------------------------------------------
# F o G compositions
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class _Outer:
    """Outer CDF F mapping the real line into [0, 1]."""

    name: str
    params: tuple[float, ...]

    def cdf(self, y):
        if self.name == "C":
            (theta,) = self.params
            return np.arctan(y / theta) / math.pi + 0.5
        if self.name == "EXP":
            (lam,) = self.params
            return -np.expm1(-lam * np.maximum(y, 0.0))
        mu, sigma = self.params
        return special.ndtr((y - mu) / sigma)

    def ppf(self, t):
        """F^{-1}(t) for t in (0, 1)."""
        if self.name == "C":
            (theta,) = self.params
            return theta * np.tan(math.pi * (t - 0.5))
        if self.name == "EXP":
            (lam,) = self.params
            return -np.log1p(-t) / lam
        mu, sigma = self.params
        return mu + sigma * special.ndtri(t)

    def isf(self, c):
        """F^{-1}(1 - c) for c in (0, 1), accurate for small c."""
        if self.name == "C":
            (theta,) = self.params
            return theta / np.tan(math.pi * c)
        if self.name == "EXP":
            (lam,) = self.params
            return -np.log(c) / lam
        mu, sigma = self.params
        return mu - sigma * special.ndtri(c)

    @property
    def label(self):
        return f"{self.name}({','.join(_fmt(v) for v in self.params)})"


@dataclass(frozen=True)
class _Inner:
    """Inner law G on the real line."""

    name: str
    params: tuple[float, ...]

    def draw(self, rng, n):
        if self.name == "GO":
            eta, nu = self.params
            return np.log1p(rng.standard_exponential(n) / eta) / nu
        if self.name == "HN":
            (sigma,) = self.params
            return sigma * np.abs(rng.standard_normal(n))
        mu, theta = self.params
        return rng.laplace(mu, theta, n)

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        if self.name == "GO":
            eta, nu = self.params
            with np.errstate(over="ignore"):
                return np.where(y > 0, -np.expm1(-eta * np.expm1(nu * np.maximum(y, 0.0))), 0.0)
        if self.name == "HN":
            (sigma,) = self.params
            return np.where(y > 0, special.erf(np.maximum(y, 0.0) / (sigma * math.sqrt(2.0))), 0.0)
        mu, theta = self.params
        z = (y - mu) / theta
        with np.errstate(over="ignore"):
            return np.where(z <= 0, 0.5 * np.exp(np.minimum(z, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(z, 0.0)))

    def sf(self, y):
        y = np.asarray(y, dtype=float)
        if self.name == "GO":
            eta, nu = self.params
            with np.errstate(over="ignore"):
                return np.where(y > 0, np.exp(-eta * np.expm1(nu * np.maximum(y, 0.0))), 1.0)
        if self.name == "HN":
            (sigma,) = self.params
            return np.where(y > 0, special.erfc(np.maximum(y, 0.0) / (sigma * math.sqrt(2.0))), 1.0)
        mu, theta = self.params
        z = (y - mu) / theta
        with np.errstate(over="ignore"):
            return np.where(z > 0, 0.5 * np.exp(-np.maximum(z, 0.0)), 1.0 - 0.5 * np.exp(np.minimum(z, 0.0)))

    @property
    def label(self):
        return f"{self.name}({','.join(_fmt(v) for v in self.params)})"


@dataclass(frozen=True)
class Composition(Alternative):
    """Law of F(Y) with Y ~ G."""

    outer: _Outer
    inner: _Inner

    @property
    def label(self):
        return f"{self.outer.label}o{self.inner.label}"

    @property
    def breakpoints(self):
        # the inner density has a corner (support edge or Laplace peak) at one point
        kink = self.inner.params[0] if self.inner.name == "L" else 0.0
        t = float(self.outer.cdf(np.float64(kink)))
        return (t,) if 0.0 < t < 1.0 else ()

    def draw(self, rng, n):
        return self.outer.cdf(self.inner.draw(rng, n))

    def _cdf(self, t):
        inside = (t > 0) & (t < 1)
        y = self.outer.ppf(np.where(inside, t, 0.5))
        return np.where(inside, self.inner.cdf(y), np.where(t >= 1, 1.0, 0.0))

    def _sf(self, t):
        inside = (t > 0) & (t < 1)
        y = self.outer.ppf(np.where(inside, t, 0.5))
        return np.where(inside, self.inner.sf(y), np.where(t >= 1, 0.0, 1.0))

    def _sf_complement(self, c):
        with np.errstate(divide="ignore"):
            return float(self.inner.sf(self.outer.isf(c)))


# ----------------------------------------------------------------------------
# spec strings
# ----------------------------------------------------------------------------

_OUTER_ARGS = {"C": ("theta",), "EXP": ("lambda",), "N": ("mu", "sigma")}
_INNER_ARGS = {"GO": ("eta", "nu"), "HN": ("sigma",), "L": ("mu", "theta")}
_PLAIN_ARGS = {
    "B": ("alpha", "beta"),
    "U": (),
    "TN": ("mu", "sigma"),
    "LT": ("mu", "sigma"),
    "BN": ("p", "alpha", "beta", "mu", "sigma"),
}
_ALIASES = {"PHI": "N", "Φ": "N", "BETA": "B", "EXPO": "EXP"}
_OUTER_POSITIVE = {"C": (0,), "EXP": (0,), "N": (1,)}
_INNER_POSITIVE = {"GO": (0, 1), "HN": (0,), "L": (1,)}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message, pos=None):
        return SpecParseError(message, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def term(self):
        """NAME ['(' number {',' number} ')'] -> (name, args, start)."""
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalpha() or self.text[self.pos] == "Φ"):
            self.pos += 1
        raw = self.text[start:self.pos]
        if not raw:
            raise self.error("expected a distribution name")
        name = _ALIASES.get(raw.upper(), raw.upper())
        self.skip()
        args: list[float] = []
        if self.pos < len(self.text) and self.text[self.pos] == "(":
            self.pos += 1
            while True:
                self.skip()
                num_start = self.pos
                while self.pos < len(self.text) and self.text[self.pos] not in ",)" and not self.text[self.pos].isspace():
                    self.pos += 1
                token = self.text[num_start:self.pos]
                try:
                    args.append(float(token))
                except ValueError:
                    raise self.error(f"expected a number, found {token!r}", num_start) from None
                if not math.isfinite(args[-1]):
                    raise self.error(f"argument {token!r} is not finite", num_start)
                self.skip()
                if self.pos >= len(self.text):
                    raise self.error("missing ')'")
                if self.text[self.pos] == ")":
                    self.pos += 1
                    break
                if self.text[self.pos] != ",":
                    raise self.error(f"expected ',' or ')', found {self.text[self.pos]!r}")
                self.pos += 1
        return name, tuple(args), start

    def at_compose(self):
        self.skip()
        if self.pos < len(self.text) and self.text[self.pos] in ("o", "∘"):
            self.pos += 1
            return True
        return False

    def at_end(self):
        self.skip()
        return self.pos >= len(self.text)


def _arity(table, name, args, parser, start, kind):
    names = table[name]
    if len(args) != len(names):
        plural = "argument" if len(names) == 1 else "arguments"
        expected = f"({', '.join(names)})" if names else ""
        raise parser.error(
            f"{kind} {name} expects {len(names)} {plural}{' ' + expected if expected else ''}, got {len(args)}",
            start,
        )


def parse_alternative(text: str) -> Alternative:
    """Parse a spec string such as ``BN(0.25,0.5,0.5,0.25,0.25)`` or ``C(1)oGO(2,1)``.

    Raises
    ------
    SpecParseError
        With the offending position; arity errors name the expected count.
    """
    if not isinstance(text, str):
        raise TypeError("spec must be a string")
    parser = _Parser(text)
    name, args, start = parser.term()
    if parser.at_compose():
        if name not in _OUTER_ARGS:
            raise parser.error(f"{name} is not an outer law (expected one of C, EXP, N)", start)
        _arity(_OUTER_ARGS, name, args, parser, start, "outer law")
        iname, iargs, istart = parser.term()
        if iname not in _INNER_ARGS:
            raise parser.error(f"{iname} is not an inner law (expected one of GO, HN, L)", istart)
        _arity(_INNER_ARGS, iname, iargs, parser, istart, "inner law")
        if not parser.at_end():
            raise parser.error("unexpected trailing input")
        for i in _OUTER_POSITIVE[name]:
            if not args[i] > 0:
                raise parser.error(f"{name}: {_OUTER_ARGS[name][i]} must be positive", start)
        for i in _INNER_POSITIVE[iname]:
            if not iargs[i] > 0:
                raise parser.error(f"{iname}: {_INNER_ARGS[iname][i]} must be positive", istart)
        return Composition(_Outer(name, args), _Inner(iname, iargs))
    if not parser.at_end():
        raise parser.error("unexpected trailing input")
    if name not in _PLAIN_ARGS:
        if name in _INNER_ARGS:
            raise parser.error(f"{name} must be composed with an outer law, e.g. C(1)o{name}(...)", start)
        known = ", ".join(list(_PLAIN_ARGS) + list(_OUTER_ARGS))
        raise parser.error(f"unknown distribution {name!r} (known: {known})", start)
    _arity(_PLAIN_ARGS, name, args, parser, start, "law")
    try:
        if name == "U":
            return BetaLaw(1.0, 1.0)
        if name == "B":
            return BetaLaw(*args)
        if name == "TN":
            return TruncatedNormal(*args)
        if name == "LT":
            return LogitNormal(*args)
        return BetaNormalMixture(*args)
    except ValueError as exc:
        raise parser.error(str(exc), start) from None


def as_alternative(spec) -> Alternative:
    return spec if isinstance(spec, Alternative) else parse_alternative(spec)


def sample_alternative(spec, n: int, seed: int) -> np.ndarray:
    return as_alternative(spec).sample(n, seed)


def alternative_cdf(spec, t):
    return as_alternative(spec).cdf(t)


def alternative_partial_mean(spec, t):
    return as_alternative(spec).partial_mean(t)


#: the seven beta null cases of the simulation design
NULL_CASES = ("B(0.5,0.5)", "B(1,1)", "B(2,2)", "B(0.5,1.5)", "B(0.5,3)", "B(1.5,0.5)", "B(3,0.5)")

#: the full battery of the simulation design, in table order
BATTERY = NULL_CASES + (
    "BN(0.25,0.5,0.5,0.25,0.25)",
    "BN(0.5,0.5,0.5,0.25,0.25)",
    "BN(0.75,0.5,0.5,0.25,0.25)",
    "BN(0.25,2,2,0.25,0.25)",
    "BN(0.25,1.5,0.5,0.25,0.25)",
    "TN(0.25,0.25)",
    "TN(0.5,0.25)",
    "TN(0.25,0.5)",
    "LT(3,2)",
    "LT(1,2)",
    "LT(0.5,3)",
    "C(1)oGO(2,1)",
    "EXP(1)oHN(1)",
    "N(0,1)oL(2,0.5)",
)
