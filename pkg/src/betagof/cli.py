"""Command-line front end.

Subcommands
-----------
test       bootstrap goodness-of-fit tests on a data file or embedded dataset
power      Monte Carlo power study from a TOML or JSON configuration
eigen      eigenvalues of the limit covariance operator at given parameters
simulate   draw a sample from an alternative given as a spec string
data       print an embedded dataset
qq         beta Q-Q coordinates (CSV) for external plotting

Exit codes: 0 success, 1 error, 2 rejection when ``test --gate`` is given.
Every command writes its result through one writer after the computation
finishes, so the output does not depend on ``--threads``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .alternatives import parse_alternative
from .asymptotics import NYSTROM_METHODS, KernelContext, nystrom_eigenvalues
from .beta_model import BetaParams, EstimationMethod, as_sample, fit
from .bootstrap_engine import TestOutcome, run_tests, validate_settings
from .data import DATASETS, load_dataset
from .errors import BetaGofError
from .gof_tests import parse_statistics
from .power_study import load_config, run_power_study, stderr_progress
from .specfun import inv_reg_inc_beta

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECT = 2

OUTCOME_COLUMNS = ("statistic", "statistic_value", "critical_value", "p_value", "reject",
                   "alpha", "beta", "n", "B", "level", "estimator", "seed")


class CliError(Exception):
    """A user-facing error; reported on stderr with exit code 1."""


# ----------------------------------------------------------------------------
# report
# ----------------------------------------------------------------------------


@dataclass
class Report:
    """Everything ``test`` computed, serialisable to JSON, CSV and text.

    ``fitted`` maps each estimator to its (alpha, beta) or ``None`` when that
    estimator fails on the data. ``runtime`` is only recorded on request so
    that reports are reproducible byte for byte.
    """

    source: str
    n: int
    minimum: float
    maximum: float
    fitted: dict[str, BetaParams | None]
    outcomes: list[TestOutcome]
    seed: int
    version: str = __version__
    runtime: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def any_rejected(self) -> bool:
        return any(o.reject for o in self.outcomes)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "input": {"n": self.n, "min": self.minimum, "max": self.maximum},
            "fitted": {k: (None if p is None else {"alpha": p.alpha, "beta": p.beta})
                       for k, p in self.fitted.items()},
            "outcomes": [o.to_dict() for o in self.outcomes],
            "seed": self.seed,
            "version": self.version,
            "runtime": self.runtime,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(
            source=d["source"],
            n=d["input"]["n"],
            minimum=d["input"]["min"],
            maximum=d["input"]["max"],
            fitted={k: (None if p is None else BetaParams(p["alpha"], p["beta"]))
                    for k, p in d["fitted"].items()},
            outcomes=[TestOutcome.from_dict(o) for o in d["outcomes"]],
            seed=d["seed"],
            version=d["version"],
            runtime=d.get("runtime"),
            notes=list(d.get("notes", [])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(OUTCOME_COLUMNS)
        for o in self.outcomes:
            d = o.to_dict()
            writer.writerow([repr(d[c]) if isinstance(d[c], float) else d[c] for c in OUTCOME_COLUMNS])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [
            f"data: {self.source} (n = {self.n}, min = {self.minimum:g}, max = {self.maximum:g})",
        ]
        for name, p in self.fitted.items():
            fitted = "failed" if p is None else f"alpha = {p.alpha:.6f}, beta = {p.beta:.6f}"
            lines.append(f"{name} estimate: {fitted}")
        if self.outcomes:
            o0 = self.outcomes[0]
            lines.append(f"bootstrap: B = {o0.B}, level = {o0.level:g}, estimator = {o0.estimator}, "
                         f"seed = {self.seed}")
            lines.append(f"{'test':<9}{'statistic':>14}{'critical':>14}{'p-value':>10}  decision")
            for o in self.outcomes:
                decision = "reject" if o.reject else "accept"
                lines.append(f"{o.statistic:<9}{o.statistic_value:14.6g}{o.critical_value:14.6g}"
                             f"{o.p_value:10.4f}  {decision}")
        lines.extend(f"note: {s}" for s in self.notes)
        if self.runtime is not None:
            lines.append(f"runtime: {self.runtime:.2f} s")
        lines.append(f"version: {self.version}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json() + "\n"
        if fmt == "csv":
            return self.to_csv()
        return self.to_text()


# ----------------------------------------------------------------------------
# input
# ----------------------------------------------------------------------------


def read_values(path) -> np.ndarray:
    """Read observations: one per line, or a single-column CSV with an
    optional header row. Blank lines and lines starting with ``#`` are
    skipped."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from None
    values = []
    first = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = next(csv.reader([line]))
        if len(cells) != 1:
            raise CliError(f"{path}:{lineno}: expected one value per line, got {len(cells)} columns")
        try:
            values.append(float(cells[0]))
        except ValueError:
            if first:  # header row
                first = False
                continue
            raise CliError(f"{path}:{lineno}: not a number: {cells[0]!r}") from None
        first = False
    if not values:
        raise CliError(f"{path}: no observations")
    return np.array(values, dtype=float)


def _load_input(args) -> tuple[str, np.ndarray]:
    if args.data is not None:
        try:
            return args.data, load_dataset(args.data)
        except KeyError as exc:
            raise CliError(exc.args[0]) from None
    return str(args.file), read_values(args.file)


def _clip(x: np.ndarray) -> tuple[np.ndarray, int]:
    """Move exact 0 and 1 observations inward by half the smallest gap to
    the boundary among the other values (at most 1e-6)."""
    inner = x[(x > 0) & (x < 1)]
    eps = 1e-6 if inner.size == 0 else min(1e-6, 0.5 * float(min(inner.min(), 1 - inner.max())))
    moved = int(np.count_nonzero((x == 0) | (x == 1)))
    return np.clip(x, eps, 1 - eps), moved


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------


def cmd_test(args, out) -> int:
    kinds = parse_statistics(args.stat or ["tn"])
    validate_settings(args.B, args.level)
    source, x = _load_input(args)
    x = as_sample(x)
    notes = []
    if args.clip:
        x, moved = _clip(x)
        if moved:
            notes.append(f"{moved} boundary observations moved inside (0, 1)")
    if args.dry_run:
        out.write(f"data: {source} (n = {x.size})\n"
                  f"statistics: {', '.join(k.label for k in kinds)}\n"
                  f"estimator: {args.estimator}; B = {args.B}; level = {args.level:g}; seed = {args.seed}\n")
        return EXIT_OK
    start = time.perf_counter()
    fitted = {}
    for method in EstimationMethod:
        try:
            fitted[method.value] = fit(x, method)
        except BetaGofError as exc:
            if method.value == args.estimator:
                raise
            fitted[method.value] = None
            notes.append(f"{method.value} estimate failed: {exc}")
    outcomes = run_tests(x, kinds, args.estimator, args.B, args.level, args.seed,
                         threads=args.threads)
    report = Report(
        source=source,
        n=int(x.size),
        minimum=float(x.min()),
        maximum=float(x.max()),
        fitted=fitted,
        outcomes=[outcomes[k.label] for k in kinds],
        seed=args.seed,
        runtime=time.perf_counter() - start if args.timing else None,
        notes=notes,
    )
    out.write(report.render(args.format))
    return EXIT_REJECT if args.gate and report.any_rejected else EXIT_OK


def cmd_power(args, out) -> int:
    cfg = load_config(args.config)
    if args.threads is not None:
        cfg = type(cfg).from_mapping({**cfg.to_dict(), "threads": args.threads})
    if args.dry_run:
        out.write(cfg.plan() + "\n")
        return EXIT_OK
    progress = None if args.quiet else stderr_progress()
    table = run_power_study(cfg, progress=progress)
    if args.format == "json":
        out.write(table.to_json() + "\n")
    elif args.format == "text":
        out.write(table.to_text())
    else:
        out.write(table.to_csv())
    return EXIT_OK


def cmd_eigen(args, out) -> int:
    params = BetaParams(args.alpha, args.beta)
    result = nystrom_eigenvalues(KernelContext(params), m=args.m, method=args.method)
    k = min(args.k, result.eigenvalues.size)
    ev = result.eigenvalues[:k]
    if args.format == "json":
        out.write(json.dumps({
            "alpha": params.alpha, "beta": params.beta, "m": result.m, "method": result.method,
            "eigenvalues": [float(v) for v in ev], "trace": result.trace,
            "sum_eigenvalues": float(result.eigenvalues.sum()),
            "min_raw": result.min_raw, "psd_ok": result.psd_ok, "clipped": result.clipped,
            "notes": list(result.notes),
        }, indent=2) + "\n")
        return EXIT_OK
    if args.format == "csv":
        out.write("index,eigenvalue\n")
        out.writelines(f"{i},{v!r}\n" for i, v in enumerate(ev, start=1))
        return EXIT_OK
    out.write(f"alpha = {params.alpha:g}, beta = {params.beta:g}, m = {result.m}, "
              f"method = {result.method}\n")
    out.writelines(f"lambda_{i:<3d} {v:.10g}\n" for i, v in enumerate(ev, start=1))
    out.write(f"trace estimate:       {result.trace:.10g}\n")
    out.write(f"sum of eigenvalues:   {result.eigenvalues.sum():.10g}\n")
    status = "ok" if result.psd_ok else "FAILED"
    out.write(f"PSD check: {status} (smallest raw eigenvalue {result.min_raw:.3e}, "
              f"clipped {result.clipped})\n")
    out.writelines(f"note: {s}\n" for s in result.notes)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    if args.n < 1:
        raise CliError("--n must be positive")
    law = parse_alternative(args.spec)
    x = law.sample(args.n, args.seed)
    text = "".join(f"{v!r}\n" for v in x.tolist())
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc.strerror or exc}") from None
    else:
        out.write(text)
    return EXIT_OK


def cmd_data(args, out) -> int:
    if args.name is None:
        out.writelines(f"{name}\n" for name in sorted(DATASETS))
        return EXIT_OK
    try:
        x = load_dataset(args.name)
    except KeyError as exc:
        raise CliError(exc.args[0]) from None
    out.writelines(f"{v:.2f}\n" for v in x)
    return EXIT_OK


def cmd_qq(args, out) -> int:
    source, x = _load_input(args)
    x = np.sort(as_sample(x))
    p = fit(x, args.estimator)
    n = x.size
    probs = (np.arange(1, n + 1) - 0.5) / n
    theo = inv_reg_inc_beta(probs, p.alpha, p.beta)
    out.write("probability,theoretical,empirical\n")
    out.writelines(f"{q!r},{t!r},{e!r}\n" for q, t, e in zip(probs.tolist(), np.atleast_1d(theo).tolist(),
                                                           x.tolist()))
    return EXIT_OK


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _add_input(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", metavar="NAME", help=f"embedded dataset ({', '.join(sorted(DATASETS))})")
    src.add_argument("--file", metavar="PATH", help="one value per line or single-column CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betagof", description="Goodness-of-fit tests for the beta family.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="bootstrap goodness-of-fit tests on data")
    _add_input(p)
    p.add_argument("--stat", action="append", metavar="LIST",
                   help="tn, ks, cm, ad, rf:<a> or all; repeatable or comma-separated (default tn)")
    p.add_argument("--estimator", choices=[m.value for m in EstimationMethod], default="mle")
    p.add_argument("--B", type=_positive_int, default=500, help="bootstrap replications (default 500)")
    p.add_argument("--level", type=float, default=0.1, help="test level (default 0.1)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--threads", type=_positive_int, default=None, help="worker threads (default: all CPUs)")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--gate", action="store_true", help="exit with status 2 if any test rejects")
    p.add_argument("--dry-run", action="store_true", help="validate inputs and print the plan only")
    p.add_argument("--clip", action="store_true", help="move observations equal to 0 or 1 inside (0, 1)")
    p.add_argument("--timing", action="store_true", help="include the runtime in the report")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("power", help="Monte Carlo power study")
    p.add_argument("--config", required=True, metavar="PATH", help="TOML or JSON configuration")
    p.add_argument("--format", choices=("text", "json", "csv"), default="csv")
    p.add_argument("--threads", type=_positive_int, default=None, help="override the configured threads")
    p.add_argument("--dry-run", action="store_true", help="print the resolved plan without computing")
    p.add_argument("--quiet", action="store_true", help="no progress messages on stderr")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("eigen", help="eigenvalues of the limit covariance operator")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--m", type=_positive_int, default=64, help="quadrature grid size (default 64)")
    p.add_argument("--k", type=_positive_int, default=10, help="number of eigenvalues to list (default 10)")
    p.add_argument("--method", choices=NYSTROM_METHODS, default="corrected")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("simulate", help="draw a sample from an alternative law")
    p.add_argument("spec", help='law such as "B(2,2)", "LT(3,2)" or "C(1)oGO(2,1)"')
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", metavar="PATH", help="write to a file instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("data", help="print an embedded dataset (or list them)")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_data)

    p = sub.add_parser("qq", help="beta Q-Q plot coordinates as CSV")
    _add_input(p)
    p.add_argument("--estimator", choices=[m.value for m in EstimationMethod], default="mle")
    p.set_defaults(func=cmd_qq)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    """Run the command line; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        code = exc.code if isinstance(exc.code, int) else EXIT_ERROR
        return EXIT_OK if code == 0 else EXIT_ERROR
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except (CliError, BetaGofError, ValueError) as exc:
        print(f"betagof {args.command}: error: {exc}", file=stderr)
        return EXIT_ERROR
    stdout.write(buf.getvalue())
    stdout.flush()
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
