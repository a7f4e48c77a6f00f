"""Parametric bootstrap calibration of the goodness-of-fit statistics.

The algorithm: fit (alpha, beta) on the data and compute the statistic;
draw B samples of the same size from the fitted beta law, re-fit the
parameters on every bootstrap sample and recompute the statistic; compare
the observed value with an interpolated upper order statistic of the
bootstrap values.

Randomness layout. Bootstrap replicates are processed in chunks of
``CHUNK_SIZE`` rows. Chunk ``c`` draws from ``stream(seed, *key, c)``; rows
that cannot be used (failed re-fit or non-finite statistic) are redrawn from
``stream(seed, *key, c, attempt)``. Because the chunk size is fixed, results
are bit-identical for any number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._random import check_seed, stream
from .beta_model import BetaParams, EstimationMethod, as_sample, draw_beta, fit, fit_batch
from .errors import NoConvergence
from .gof_tests import StatisticKind, evaluate, evaluate_rows

CHUNK_SIZE = 250
MAX_ATTEMPTS = 10
INTERPOLATION_WEIGHT = 0.90


@dataclass(frozen=True)
class BootstrapSpec:
    """Settings of one bootstrap test."""

    statistic: StatisticKind
    estimator: EstimationMethod = EstimationMethod.MLE
    B: int = 500
    level: float = 0.1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "estimator", EstimationMethod(self.estimator))
        validate_settings(self.B, self.level)
        object.__setattr__(self, "seed", check_seed(self.seed))


@dataclass
class TestOutcome:
    """Result of one bootstrap test."""

    __test__ = False  # not a pytest class

    statistic: str
    statistic_value: float
    critical_value: float
    p_value: float
    reject: bool
    fitted: BetaParams
    n: int
    B: int
    level: float
    estimator: str
    seed: int
    redraws: int = 0
    bootstrap_values: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self, include_bootstrap: bool = False) -> dict:
        out = {
            "statistic": self.statistic,
            "statistic_value": self.statistic_value,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "reject": self.reject,
            "alpha": self.fitted.alpha,
            "beta": self.fitted.beta,
            "n": self.n,
            "B": self.B,
            "level": self.level,
            "estimator": self.estimator,
            "seed": self.seed,
            "redraws": self.redraws,
        }
        if include_bootstrap and self.bootstrap_values is not None:
            out["bootstrap_values"] = [float(v) for v in self.bootstrap_values]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "TestOutcome":
        boot = d.get("bootstrap_values")
        return cls(
            statistic=d["statistic"],
            statistic_value=d["statistic_value"],
            critical_value=d["critical_value"],
            p_value=d["p_value"],
            reject=d["reject"],
            fitted=BetaParams(d["alpha"], d["beta"]),
            n=d["n"],
            B=d["B"],
            level=d["level"],
            estimator=d["estimator"],
            seed=d["seed"],
            redraws=d.get("redraws", 0),
            bootstrap_values=None if boot is None else np.asarray(boot, dtype=float),
        )


def validate_settings(B: int, level: float) -> None:
    if isinstance(B, bool) or int(B) != B or B < 2:
        raise ValueError(f"B must be an integer of at least 2, got {B!r}")
    if not 0.0 < float(level) < 1.0:
        raise ValueError(f"level must lie strictly between 0 and 1, got {level!r}")
    critical_index(int(B), float(level))


def critical_index(B: int, level: float) -> int:
    """1-based order-statistic index B - floor(level * (B + 1))."""
    # rounding guards against products such as 0.1 * 1001 = 100.10000000000001
    k = B - math.floor(round(level * (B + 1), 9))
    if not 1 <= k < B:
        raise ValueError(f"level {level} is incompatible with B = {B} (order-statistic index {k})")
    return k


def modified_critical_value(sorted_boot, level: float) -> float:
    """Interpolated upper order statistic of the bootstrap distribution.

    With k = B - floor(level * (B + 1)) the value is
    T*_(k) + 0.90 * (T*_(k+1) - T*_(k)) on the ascending order statistics.
    """
    t = np.asarray(sorted_boot, dtype=float)
    B = t.size
    if B < 2:
        raise ValueError("need at least two bootstrap values")
    k = critical_index(B, level)
    lo, hi = t[k - 1], t[k]
    return float(lo + INTERPOLATION_WEIGHT * (hi - lo))


def bootstrap_pvalue(boot, observed: float) -> float:
    """Share of bootstrap values at or above the observed statistic."""
    b = np.asarray(boot, dtype=float)
    if b.size == 0:
        raise ValueError("no bootstrap values")
    return float(np.count_nonzero(b >= observed) / b.size)


def decide(statistic_value: float, critical_value: float) -> bool:
    """Reject the beta hypothesis when the statistic exceeds the critical value."""
    return bool(statistic_value > critical_value)


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)


def _chunk_values(c, rows, n, params, kinds, estimator, seed, key):
    """Statistic values for ``rows`` replicates of chunk ``c``."""
    a, b = params
    labels = [k.label for k in kinds]
    out = {lab: np.empty(rows) for lab in labels}
    todo = np.arange(rows)
    redraws = 0
    for attempt in range(MAX_ATTEMPTS):
        rng = stream(seed, *key, c) if attempt == 0 else stream(seed, *key, c, attempt)
        X = draw_beta(rng, (todo.size, n), a, b)
        al, be, ok = fit_batch(X, estimator)
        good = ok.copy()
        if ok.any():
            vals = evaluate_rows(kinds, X[ok], al[ok], be[ok])
            finite = np.ones(int(ok.sum()), dtype=bool)
            for lab in labels:
                finite &= np.isfinite(vals[lab])
            good[np.nonzero(ok)[0][~finite]] = False
            keep = finite
            for lab in labels:
                out[lab][todo[good]] = vals[lab][keep]
        if attempt > 0:
            redraws += todo.size
        todo = todo[~good]
        if todo.size == 0:
            return out, redraws
    raise NoConvergence(
        f"{todo.size} bootstrap replicates still unusable after {MAX_ATTEMPTS} attempts"
    )


def bootstrap_distribution(n: int, params, kinds, estimator=EstimationMethod.MLE, B: int = 500,
                           seed: int = 0, key: tuple = (), threads: int | None = 1):
    """Bootstrap values of several statistics computed on shared samples.

    Returns
    -------
    values : dict mapping statistic label to an array of length B
    redraws : int
        Number of replicate rows that had to be drawn again.
    """
    estimator = EstimationMethod(estimator)
    seed = check_seed(seed)
    params = BetaParams(*params)
    kinds = tuple(kinds)
    sizes = [min(CHUNK_SIZE, B - start) for start in range(0, B, CHUNK_SIZE)]
    jobs = [(c, rows, n, params, kinds, estimator, seed, key) for c, rows in enumerate(sizes)]
    workers = default_threads() if threads is None else max(1, int(threads))
    if workers == 1 or len(jobs) == 1:
        parts = [_chunk_values(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _chunk_values(*job), jobs))
    values = {k.label: np.concatenate([p[0][k.label] for p in parts]) for k in kinds}
    return values, sum(p[1] for p in parts)


def run_tests(sample, statistics, estimator=EstimationMethod.MLE, B: int = 500, level: float = 0.1,
              seed: int = 0, threads: int | None = 1, key: tuple = (),
              keep_bootstrap: bool = False) -> dict[str, TestOutcome]:
    """Bootstrap tests of several statistics that share the bootstrap samples.

    A replicate is redrawn if its re-fit fails or any requested statistic is
    not finite on it.
    """
    estimator = EstimationMethod(estimator)
    validate_settings(B, level)
    seed = check_seed(seed)
    x = as_sample(sample)
    params = fit(x, estimator)
    kinds = tuple(statistics)
    observed = {k.label: evaluate(k, x, params) for k in kinds}
    boot, redraws = bootstrap_distribution(x.size, params, kinds, estimator, B, seed, key, threads)
    outcomes = {}
    for k in kinds:
        values = boot[k.label]
        crit = modified_critical_value(np.sort(values), level)
        outcomes[k.label] = TestOutcome(
            statistic=k.label,
            statistic_value=observed[k.label],
            critical_value=crit,
            p_value=bootstrap_pvalue(values, observed[k.label]),
            reject=decide(observed[k.label], crit),
            fitted=params,
            n=int(x.size),
            B=int(B),
            level=float(level),
            estimator=estimator.value,
            seed=seed,
            redraws=redraws,
            bootstrap_values=values if keep_bootstrap else None,
        )
    return outcomes


def run_test(sample, spec: BootstrapSpec, threads: int | None = 1,
             keep_bootstrap: bool = True) -> TestOutcome:
    """Bootstrap test of a single statistic."""
    result = run_tests(sample, [spec.statistic], spec.estimator, spec.B, spec.level, spec.seed,
                       threads=threads, keep_bootstrap=keep_bootstrap)
    return result[spec.statistic.label]
