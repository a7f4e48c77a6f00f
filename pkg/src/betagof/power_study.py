"""Monte Carlo estimation of rejection rates (size and power).

For every alternative and sample size, ``mc_reps`` samples are drawn; each
sample is tested with every requested statistic (all statistics share the
same sample and the same bootstrap samples) and rejections are tallied.

Randomness layout: replication ``i`` of alternative ``L`` at size ``n`` draws
its data from ``stream(seed, crc32(L), n, i, 0)`` (redraws append an attempt
counter) and its bootstrap from keys ``(crc32(L), n, i, 1, chunk)``. Tables
are therefore identical for any number of worker threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ._random import check_seed, label_key, stream
from .alternatives import as_alternative
from .beta_model import EstimationMethod
from .bootstrap_engine import MAX_ATTEMPTS, default_threads, run_tests, validate_settings
from .errors import ConfigError, NoConvergence, SampleError
from .gof_tests import ALL_STATISTICS, parse_statistics

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

CSV_COLUMNS = ("alternative", "statistic", "n", "reps", "B", "level", "rate", "se")

#: full-scale settings of the published simulation design
PUBLISHED_SCALE = {"n": [50, 100], "mc_reps": 10000, "B": 500, "level": 0.1}


@dataclass(frozen=True)
class PowerStudyConfig:
    """Design of a power study. Desk-scale defaults: 1000 replications, B = 200."""

    alternatives: tuple[str, ...]
    n: tuple[int, ...] = (50,)
    mc_reps: int = 1000
    B: int = 200
    level: float = 0.1
    statistics: tuple[str, ...] = tuple(k.label for k in ALL_STATISTICS)
    estimator: str = "mle"
    master_seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        alts = (self.alternatives,) if isinstance(self.alternatives, str) else tuple(self.alternatives)
        if not alts:
            raise ConfigError("alternatives: at least one alternative is required")
        labels = []
        for spec in alts:
            try:
                labels.append(as_alternative(spec).label)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"alternatives: {exc}") from None
        object.__setattr__(self, "alternatives", tuple(labels))

        sizes = (self.n,) if isinstance(self.n, int) else tuple(self.n)
        if not sizes or any(isinstance(v, bool) or not isinstance(v, int) or v < 2 for v in sizes):
            raise ConfigError(f"n: sample sizes must be integers of at least 2, got {self.n!r}")
        object.__setattr__(self, "n", sizes)

        if isinstance(self.mc_reps, bool) or not isinstance(self.mc_reps, int) or self.mc_reps < 1:
            raise ConfigError(f"mc_reps: must be a positive integer, got {self.mc_reps!r}")
        try:
            validate_settings(self.B, self.level)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"B/level: {exc}") from None
        object.__setattr__(self, "B", int(self.B))
        object.__setattr__(self, "level", float(self.level))

        stats = (self.statistics,) if isinstance(self.statistics, str) else tuple(self.statistics)
        try:
            kinds = parse_statistics([str(s) for s in stats])
        except ValueError as exc:
            raise ConfigError(f"statistics: {exc}") from None
        object.__setattr__(self, "statistics", tuple(k.label for k in kinds))

        try:
            object.__setattr__(self, "estimator", EstimationMethod(self.estimator).value)
        except ValueError:
            raise ConfigError(f"estimator: must be 'mle' or 'moments', got {self.estimator!r}") from None
        try:
            object.__setattr__(self, "master_seed", check_seed(self.master_seed))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"master_seed: {exc}") from None
        if self.threads is not None and (isinstance(self.threads, bool) or not isinstance(self.threads, int)
                                         or self.threads < 1):
            raise ConfigError(f"threads: must be a positive integer, got {self.threads!r}")

    @property
    def kinds(self):
        return parse_statistics(list(self.statistics))

    @classmethod
    def from_mapping(cls, data: dict) -> "PowerStudyConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        if "alternatives" not in data:
            raise ConfigError("alternatives: missing")
        return cls(**data)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("alternatives", "n", "statistics"):
            out[key] = list(out[key])
        return out

    def plan(self) -> str:
        """Human-readable summary of the work this configuration implies."""
        cells = len(self.alternatives) * len(self.n)
        lines = [
            f"alternatives ({len(self.alternatives)}): {', '.join(self.alternatives)}",
            f"sample sizes: {', '.join(str(v) for v in self.n)}",
            f"statistics: {', '.join(self.statistics)}",
            f"estimator: {self.estimator}",
            f"replications per cell: {self.mc_reps}; bootstrap B: {self.B}; level: {self.level:g}",
            f"master seed: {self.master_seed}",
            f"cells: {cells}; total bootstrap tests: {cells * self.mc_reps}; "
            f"total re-fitted bootstrap samples: {cells * self.mc_reps * self.B}",
        ]
        return "\n".join(lines)


def _line_error(path, exc, line, col):
    return ConfigError(f"{path}:{line}:{col}: {exc}")


def load_config(path) -> PowerStudyConfig:
    """Read a JSON or TOML configuration (chosen by extension, JSON otherwise).

    Syntax errors are reported as ``file:line:column: message``.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    if path.suffix.lower() == ".toml":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            line, col = _toml_position(str(exc))
            raise _line_error(path, str(exc).split(" (at ")[0], line, col) from None
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise _line_error(path, exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a table/object")
    return PowerStudyConfig.from_mapping(data)


def _toml_position(message: str):
    m = re.search(r"line (\d+), column (\d+)", message)
    return (int(m.group(1)), int(m.group(2))) if m else ("?", "?")


@dataclass
class PowerRow:
    alternative: str
    statistic: str
    n: int
    reps: int
    B: int
    level: float
    rejections: int

    @property
    def rate(self) -> float:
        return self.rejections / self.reps

    @property
    def se(self) -> float:
        r = self.rate
        return math.sqrt(r * (1.0 - r) / self.reps)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rate"] = self.rate
        out["se"] = self.se
        return out


@dataclass
class PowerTable:
    """Rejection counts and rates per (alternative, n, statistic)."""

    config: PowerStudyConfig
    rows: list[PowerRow] = field(default_factory=list)
    sample_redraws: int = 0
    bootstrap_redraws: int = 0

    def rate(self, alternative: str, statistic: str, n: int | None = None) -> float:
        return self.row(alternative, statistic, n).rate

    def row(self, alternative: str, statistic: str, n: int | None = None) -> PowerRow:
        label = as_alternative(alternative).label
        for r in self.rows:
            if r.alternative == label and r.statistic == statistic and (n is None or r.n == n):
                return r
        raise KeyError((alternative, statistic, n))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([r.alternative, r.statistic, r.n, r.reps, r.B, f"{r.level:g}",
                             f"{r.rate:.6f}", f"{r.se:.6f}"])
        return buf.getvalue()

    def to_dict(self) -> dict:
        # the worker count does not affect results, so it is left out
        design = {k: v for k, v in self.config.to_dict().items() if k != "threads"}
        return {
            "config": design,
            "rows": [r.to_dict() for r in self.rows],
            "sample_redraws": self.sample_redraws,
            "bootstrap_redraws": self.bootstrap_redraws,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        stats = list(self.config.statistics)
        width = max([len(a) for a in self.config.alternatives] + [11])
        lines = []
        for n in self.config.n:
            lines.append(f"n = {n}, {self.config.mc_reps} replications, B = {self.config.B}, "
                         f"level = {self.config.level:g} (rejection rates in %)")
            lines.append(" " * width + "".join(f"{s:>9}" for s in stats))
            for alt in self.config.alternatives:
                cells = "".join(f"{100 * self.row(alt, s, n).rate:9.1f}" for s in stats)
                lines.append(f"{alt:<{width}}{cells}")
            lines.append("")
        return "\n".join(lines)


def _one_replication(cfg: PowerStudyConfig, kinds, label: str, n: int, i: int):
    """Decisions of every statistic on replication i; returns (rejects, redraws)."""
    law = as_alternative(label)
    akey = label_key(label)
    for attempt in range(MAX_ATTEMPTS):
        rng = stream(cfg.master_seed, akey, n, i, 0) if attempt == 0 else \
            stream(cfg.master_seed, akey, n, i, 0, attempt)
        x = law.draw(rng, n)
        try:
            res = run_tests(x, kinds, cfg.estimator, cfg.B, cfg.level, cfg.master_seed,
                            threads=1, key=(akey, n, i, 1))
        except (SampleError, NoConvergence):
            continue
        return {k.label: res[k.label].reject for k in kinds}, attempt, res[kinds[0].label].redraws
    raise NoConvergence(f"replication {i} of {label} (n={n}) unusable after {MAX_ATTEMPTS} draws")


def run_power_study(cfg: PowerStudyConfig, progress=None) -> PowerTable:
    """Run the study; ``progress(done, total)`` is called after each replication."""
    kinds = cfg.kinds
    table = PowerTable(cfg)
    tasks = [(label, n, i) for label in cfg.alternatives for n in cfg.n for i in range(cfg.mc_reps)]
    total = len(tasks)
    workers = default_threads() if cfg.threads is None else cfg.threads

    def work(task):
        return _one_replication(cfg, kinds, *task)

    counts: dict[tuple[str, int, str], int] = {}
    done = 0
    if workers == 1:
        results = map(work, tasks)
        pool = None
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(work, tasks)
    try:
        for (label, n, _), (decisions, s_redraws, b_redraws) in zip(tasks, results):
            for stat, rejected in decisions.items():
                counts[(label, n, stat)] = counts.get((label, n, stat), 0) + int(rejected)
            table.sample_redraws += s_redraws
            table.bootstrap_redraws += b_redraws
            done += 1
            if progress is not None:
                progress(done, total)
    finally:
        if pool is not None:
            pool.shutdown()
    for label in cfg.alternatives:
        for n in cfg.n:
            for k in kinds:
                table.rows.append(PowerRow(label, k.label, n, cfg.mc_reps, cfg.B, cfg.level,
                                           counts.get((label, n, k.label), 0)))
    return table


def stderr_progress(every: int = 50):
    """Progress callback printing a line to standard error every ``every`` steps."""

    def report(done, total):
        if done % every == 0 or done == total:
            print(f"power study: {done}/{total} replications", file=sys.stderr, flush=True)

    return report

