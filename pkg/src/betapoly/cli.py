"""Command-line front end.

    betapoly volume   --d 2 --betas 0,0,0,1
    betapoly wieacker --d 2 --betas equal:0:5 --a 1 --b 1
    betapoly moment   --betas 0,0,0 --k 2
    betapoly verify   --d 2 --betas 0,0,0,0 --samples 100000 --seed 42
    betapoly sweep    --d 2 --betas equal:0:4 --param n --values 4,5,6,7
    betapoly selftest

Exit codes: 0 success, 1 usage, 2 numeric failure, 3 selftest failure.
Numbers are printed with 17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import closedform as cf
from .errors import BetaPolyError, BudgetError, ConvergenceError, DegeneracyError, DomainError, MonteCarloAbort
from .geometry import mc_estimate
from .sampling import RandomSource

SEED_ENV = "BETAPOLY_SEED"
COMMANDS = ("volume", "wieacker", "moment", "verify", "sweep", "selftest")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_SELFTEST = 0, 1, 2, 3


class UsageError(BetaPolyError, ValueError):
    pass


# -- parsing -------------------------------------------------------------------


def parse_number(text: str) -> float:
    """Decimal or simple fraction such as ``-1/2``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise UsageError("cli", "parse_number", f"not a number: {text!r}") from None


def parse_betas(text: str) -> tuple[float, ...]:
    """``"0,1/2,-0.3"`` or the shorthand ``"equal:beta:n"``."""
    text = text.strip()
    if text.startswith("equal:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError("cli", "parse_betas", f"expected equal:beta:n, got {text!r}")
        beta = parse_number(parts[1])
        try:
            n = int(parts[2])
        except ValueError:
            raise UsageError("cli", "parse_betas", f"bad count in {text!r}") from None
        if n < 1:
            raise UsageError("cli", "parse_betas", f"count must be >= 1 in {text!r}")
        values = (beta,) * n
    else:
        values = tuple(parse_number(t) for t in text.split(",") if t.strip())
    try:
        return tuple(float(b) for b in cf.beta_vector(values))
    except DomainError as exc:
        raise UsageError("cli", "parse_betas", str(exc)) from None


@dataclass
class RunConfig:
    command: str
    d: int = 1
    betas: tuple = ()
    a: float = 0.0
    b: float = 1.0
    k: float = 1.0
    samples: int = 0
    seed: int = 0
    rel_tol: float = cf.DEFAULT_REL_TOL
    budget: int = cf.DEFAULT_BUDGET
    threads: int = 1
    fmt: str = "json"
    functional: str = "volume"
    param: str | None = None
    values: tuple = ()
    timing: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError("cli", "RunConfig", f"unknown command {self.command!r}")
        if self.samples < 0:
            raise UsageError("cli", "RunConfig", "--samples must be >= 0")
        if not self.rel_tol > 0:
            raise UsageError("cli", "RunConfig", "--rel-tol must be positive")
        if self.threads < 1:
            raise UsageError("cli", "RunConfig", "--threads must be >= 1")
        if self.fmt not in ("json", "csv"):
            raise UsageError("cli", "RunConfig", f"unknown format {self.fmt!r}")


@dataclass
class EstimateReport:
    command: str
    d: int
    n: int
    closed_form: float
    quadrature_error: float
    term_count: int
    seed: int
    mc_mean: float | None = None
    mc_se: float | None = None
    z_score: float | None = None
    extra: dict = field(default_factory=dict)
    wall_time: float | None = None

    def fields(self, timing: bool = False) -> dict:
        out = {"command": self.command, "d": self.d, "n": self.n}
        out.update(self.extra)
        out.update(
            closed_form=self.closed_form,
            quadrature_error=self.quadrature_error,
            mc_mean=self.mc_mean,
            mc_se=self.mc_se,
            z_score=self.z_score,
            seed=self.seed,
            term_count=self.term_count,
        )
        if timing:
            out["wall_time"] = self.wall_time
        return out


# -- serialization ---------------------------------------------------------------


def format_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "%.17g" % v if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {format_value(x)}" for k, x in v.items()) + "}"
    return json.dumps(str(v))


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "%.17g" % v
    if isinstance(v, (list, tuple)):
        return " ".join(_csv_cell(x) for x in v)
    return str(v).lower() if isinstance(v, bool) else str(v)


def to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    header = list(rows[0]) if rows else []
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_csv_cell(row[h]) for h in header) + "\n")
    return buf.getvalue()


# -- commands ----------------------------------------------------------------------


def _spec(config: RunConfig) -> cf.PolytopeSpec:
    return cf.PolytopeSpec(config.d, config.betas)


def _closed_form(config: RunConfig, what: str, spec: cf.PolytopeSpec):
    kw = dict(rel_tol=config.rel_tol, budget=config.budget, threads=config.threads)
    if what == "volume":
        return cf.expected_volume_result(spec, **kw)
    return cf.expected_wieacker_result(spec, cf.WieackerParams(config.a, config.b), **kw)


def _with_mc(report: EstimateReport, config: RunConfig, what: str, spec: cf.PolytopeSpec) -> EstimateReport:
    functional = "volume" if what == "volume" else cf.WieackerParams(config.a, config.b)
    est = mc_estimate(spec, functional, config.samples, RandomSource(config.seed), threads=config.threads)
    report.mc_mean = est.mean
    report.mc_se = est.standard_error
    report.z_score = (est.mean - report.closed_form) / est.standard_error if est.standard_error > 0 else None
    return report


def _estimate(config: RunConfig, what: str, spec: cf.PolytopeSpec, command: str) -> EstimateReport:
    res = _closed_form(config, what, spec)
    extra = {"functional": what}
    if what == "wieacker":
        extra.update(a=config.a, b=config.b, extrapolated=res.extrapolated)
    report = EstimateReport(
        command, spec.d, spec.n, res.value, res.quadrature_error, res.term_count, config.seed, extra=extra
    )
    if config.samples > 0:
        _with_mc(report, config, what, spec)
    return report


def _sweep_point(config: RunConfig, value: float) -> tuple[RunConfig, cf.PolytopeSpec]:
    cfg = RunConfig(**{**config.__dict__})
    param = config.param
    betas = list(config.betas)
    if param == "n":
        n = int(value)
        if n != value or n < 1:
            raise UsageError("cli", "sweep", f"n must be a positive integer, got {value}")
        betas = (betas + [betas[-1]] * n)[:n]
    elif param == "a":
        cfg.a = value
    elif param == "b":
        cfg.b = value
    elif param is not None and param.startswith("beta:"):
        try:
            i = int(param.split(":", 1)[1])
            betas[i] = value
        except (ValueError, IndexError):
            raise UsageError("cli", "sweep", f"bad beta index in --param {param!r}") from None
    else:
        raise UsageError("cli", "sweep", f"--param must be n, a, b or beta:<index>, got {param!r}")
    cfg.betas = tuple(betas)
    return cfg, cf.PolytopeSpec(cfg.d, cfg.betas)


def run(config: RunConfig):
    """Execute one command; returns an :class:`EstimateReport` or a list of row dicts."""
    t0 = time.perf_counter()
    cmd = config.command
    if cmd in ("volume", "wieacker"):
        out = _estimate(config, cmd, _spec(config), cmd)
    elif cmd == "verify":
        samples = config.samples or 100_000
        cfg = RunConfig(**{**config.__dict__, "samples": samples})
        out = _estimate(cfg, config.functional, _spec(cfg), cmd)
    elif cmd == "moment":
        betas = cf.beta_vector(config.betas)
        value = cf.miles_moment(betas, config.k)
        out = EstimateReport(
            cmd, len(betas) - 1, len(betas), value, 0.0, 1, config.seed,
            extra={"k": config.k, "extrapolated": not float(config.k).is_integer()},
        )
    elif cmd == "sweep":
        if not config.values:
            raise UsageError("cli", "sweep", "--values is required")
        rows = []
        for v in config.values:
            cfg, spec = _sweep_point(config, v)
            res = _closed_form(cfg, config.functional, spec)
            row = {config.param: v, "closed_form": res.value, "quadrature_error": res.quadrature_error}
            if config.samples > 0:
                rep = EstimateReport(cmd, spec.d, spec.n, res.value, res.quadrature_error, res.term_count, cfg.seed)
                _with_mc(rep, cfg, config.functional, spec)
                row.update(mc_mean=rep.mc_mean, mc_se=rep.mc_se, z_score=rep.z_score)
            rows.append(row)
        return rows
    elif cmd == "selftest":
        from .selftest import run_selftest

        return run_selftest(seed=config.seed, threads=config.threads)
    out.wall_time = time.perf_counter() - t0
    return out


def render(config: RunConfig, result) -> str:
    if isinstance(result, EstimateReport):
        rows = [result.fields(config.timing)]
        if config.fmt == "json":
            return format_value(rows[0]) + "\n"
        return to_csv(rows)
    if config.fmt == "csv":
        return to_csv(result)
    return format_value(list(result)) + "\n"


# -- argv --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"cli.parse_args: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError("cli", "parse_args", f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="betapoly", description="Expected volumes and facet functionals of random beta polytopes.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--d", type=int, default=None, help="ambient dimension")
    p.add_argument("--betas", default=None, help='comma list (fractions allowed) or "equal:beta:n"')
    p.add_argument("--a", type=parse_number, default=0.0, help="exponent on facet distance")
    p.add_argument("--b", type=parse_number, default=None, help="exponent on facet volume (default 1)")
    p.add_argument("--k", type=parse_number, default=1.0, help="moment order for `moment`")
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV} or 0)")
    p.add_argument("--rel-tol", type=float, default=cf.DEFAULT_REL_TOL)
    p.add_argument("--budget", type=int, default=cf.DEFAULT_BUDGET, help="cap on subset groups")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default=None)
    p.add_argument("--functional", choices=("volume", "wieacker"), default=None)
    p.add_argument("--param", default=None, help="sweep parameter: n, a, b or beta:<index>")
    p.add_argument("--values", default=None, help="comma list of sweep values")
    p.add_argument("--timing", action="store_true", help="include wall_time in reports")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    needs_geometry = cmd in ("volume", "wieacker", "verify", "sweep")
    if needs_geometry and ns.d is None:
        raise UsageError("cli", "parse_args", f"`{cmd}` requires --d")
    if cmd != "selftest" and ns.betas is None:
        raise UsageError("cli", "parse_args", f"`{cmd}` requires --betas")
    functional = ns.functional or ("wieacker" if cmd == "wieacker" else "volume")
    b = 1.0 if ns.b is None else ns.b
    return RunConfig(
        command=cmd,
        d=ns.d if ns.d is not None else 1,
        betas=parse_betas(ns.betas) if ns.betas is not None else (),
        a=ns.a,
        b=b,
        k=ns.k,
        samples=ns.samples,
        seed=ns.seed if ns.seed is not None else _default_seed(),
        rel_tol=ns.rel_tol,
        budget=ns.budget,
        threads=ns.threads,
        fmt=ns.fmt or ("csv" if cmd == "sweep" else "json"),
        functional=functional,
        param=ns.param,
        values=tuple(parse_number(v) for v in ns.values.split(",")) if ns.values else (),
        timing=ns.timing,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        config = config_from_args(ns)
        result = run(config)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetError, ConvergenceError, MonteCarloAbort, DegeneracyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(render(config, result))
    if config.command == "selftest" and not all(r["passed"] for r in result):
        return EXIT_SELFTEST
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
