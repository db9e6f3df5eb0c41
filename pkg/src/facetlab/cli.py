"""Command line entry point: ``facetlab <subcommand> [options]``.

Exit codes: 0 success, 1 inequality violation or failed audit, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import scipy

from . import __version__
from .entropy import DomainError, derive_fixed_constants, f_entropy, fixed_constants
from .hull import (
    DEFAULT_DIM_CAP,
    HullCapExceeded,
    SignMatrix,
    facet_enum,
    sample_polytope,
    verify_h_rep,
)
from .hullio import dumps_json, dumps_text, read_points
from .sandwich import (
    EpsilonSchedule,
    boundary_coverage_experiment,
    containment_experiment,
    facet_growth_experiment,
)
from .suites import CHECKS, SuiteConfig, rows_to_csv, run_checks
from .volume import volume_sweep

CONFIG_SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    """Parameters of one invocation; round-trips through JSON unchanged."""

    command: str
    params: dict[str, Any] = field(default_factory=dict)
    schema: int = CONFIG_SCHEMA

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict) or "command" not in doc:
            raise UsageError("config needs a 'command' field")
        if doc.get("schema", CONFIG_SCHEMA) != CONFIG_SCHEMA:
            raise UsageError(f"unsupported config schema {doc.get('schema')!r}")
        params = doc.get("params", {})
        if not isinstance(params, dict):
            raise UsageError("'params' must be an object")
        return cls(command=doc["command"], params=params, schema=CONFIG_SCHEMA)


# -- output helpers ------------------------------------------------------------


class Outputs:
    """Writes data files under one directory and records their hashes."""

    def __init__(self, directory: str | None):
        self.dir = Path(directory) if directory else None
        self.files: list[dict[str, str]] = []
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        if self.dir is None:
            sys.stdout.write(text)
            return
        path = self.dir / name
        path.write_text(text, encoding="utf-8")
        self.files.append({"path": name, "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest()})

    def manifest(self, cfg: ExperimentConfig, started: float, counts: dict[str, dict[str, int]]) -> None:
        if self.dir is None:
            return
        doc = {
            "config": asdict(cfg),
            "version": __version__,
            "wall_time_s": round(time.time() - started, 3),
            "checks": counts,
            "environment": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "platform": platform.platform(),
            },
            "files": self.files,
        }
        (self.dir / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _threads(value: str) -> int:
    if value == "auto":
        return os.cpu_count() or 1
    try:
        n = int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("threads must be an integer or 'auto'") from exc
    if n < 1:
        raise argparse.ArgumentTypeError("threads must be positive")
    return n


def _int_list(value: str) -> list[int]:
    if not value.strip():
        return []
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {value!r}") from exc


# -- subcommands -----------------------------------------------------------------


def cmd_verify_bounds(args, out: Outputs) -> tuple[int, dict]:
    names = args.checks or list(CHECKS)
    unknown = [c for c in names if c not in CHECKS]
    if unknown:
        raise UsageError(f"unknown checks: {', '.join(unknown)} (known: {', '.join(CHECKS)})")
    n_override = args.n if args.n else None
    if n_override and max(n_override) > 18:
        raise UsageError("exact suites are limited to n <= 18")
    cfg = SuiteConfig(seed=args.seed, samples=args.samples, threads=args.threads)
    rows = list(run_checks(names, cfg, n_override))
    counts: dict[str, dict[str, int]] = {}
    for r in rows:
        c = counts.setdefault(r.check, {"pass": 0, "fail": 0})
        c["pass" if r.passed else "fail"] += 1
    if args.format == "json":
        out.write("verify_bounds.json", json.dumps(counts, indent=2, sort_keys=True) + "\n")
    else:
        out.write("verify_bounds.csv", rows_to_csv(rows))
    failures = sum(c["fail"] for c in counts.values())
    _report(args, "\n".join(f"{k}: {v['pass']} pass, {v['fail']} fail" for k, v in counts.items()))
    return (EXIT_FAIL if failures else EXIT_OK), counts


def cmd_hull(args, out: Outputs) -> tuple[int, dict]:
    if args.input:
        try:
            pts = read_points(Path(args.input).read_text())
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read {args.input}: {exc}") from exc
        matrix = SignMatrix(pts)
    elif args.exhaustive:
        matrix = sample_polytope(_single(args.n, "n"), exhaustive=True, seed=args.seed)
    else:
        if args.N is None:
            raise UsageError("--N is required unless --exhaustive or --input is given")
        matrix = sample_polytope(_single(args.n, "n"), args.N, args.seed)
    hull = facet_enum(matrix, dim_cap=args.dim_cap)
    counts = {"hull": {"pass": 0, "fail": 0}}
    if not hull.full_dimensional:
        _report(args, f"degenerate: affine dimension {hull.dim_affine} < {matrix.dim}")
        out.write("hull.json" if args.format == "json" else "hull.txt",
                  dumps_json(hull) + "\n" if args.format == "json" else dumps_text(hull))
        counts["hull"]["fail" if not args.allow_degenerate else "pass"] += 1
        return (EXIT_OK if args.allow_degenerate else EXIT_FAIL), counts
    check = verify_h_rep(matrix, hull)
    counts["hull"]["pass" if check.ok else "fail"] += 1
    if args.format == "json":
        out.write("hull.json", dumps_json(hull) + "\n")
    else:
        out.write("hull.txt", dumps_text(hull))
    _report(args, f"f_count {hull.f_count} (draws {matrix.draws}, duplicates {matrix.dedup_count})")
    if not check.ok:
        _report(args, "verification failed: " + "; ".join(check.problems[:5]))
    return (EXIT_OK if check.ok else EXIT_FAIL), counts


def cmd_scaling(args, out: Outputs) -> tuple[int, dict]:
    if not args.N_list:
        raise UsageError("--N-list must name at least one N")
    n = _single(args.n, "n")
    counts: dict[str, dict[str, int]] = {}
    if args.mode in ("facets", "both"):
        rep = facet_growth_experiment(n, args.N_list, args.trials, args.seed, threads=args.threads,
                                      dim_cap=args.dim_cap)
        out.write("facet_growth.csv", rep.to_csv())
        out.write("facet_growth.json", rep.to_json() + "\n")
        trend = rep.summary["nondecreasing"]
        counts["facet-trend"] = {"pass": int(trend), "fail": int(not trend)}
        _report(args, "mean facets: " + ", ".join(f"N={p['N']}: {p['mean']:.2f}" for p in rep.summary["per_N"]))
    if args.mode in ("volume", "both"):
        draws = sample_polytope(n, max(args.N_list), args.seed, allow_oversample=True)
        ests = volume_sweep(draws, args.N_list, args.samples, args.seed)
        lines = ["N,volume_fraction,half_width,hits,trials"]
        lines += [f"{N},{e.value!r},{e.half_width!r},{e.num},{e.trials}" for N, e in zip(args.N_list, ests)]
        out.write("volume_sweep.csv", "\n".join(lines) + "\n")
        vals = [e.value for e in ests]
        up = all(b > a for a, b in zip(vals, vals[1:]))
        counts["volume-trend"] = {"pass": int(up), "fail": int(not up)}
        _report(args, "volume fractions: " + ", ".join(f"N={N}: {v:.4g}" for N, v in zip(args.N_list, vals)))
    # trend checks are data-quality bars and never fail the run
    return EXIT_OK, counts


def cmd_sandwich(args, out: Outputs) -> tuple[int, dict]:
    n = _single(args.n, "n")
    if args.N is None:
        raise UsageError("--N is required")
    eps = {"eps1": args.eps1, "eps2": args.eps2, "eps3": args.eps3}
    # at desk scale the default schedule levels leave (0, f(gamma')); fall back to interior levels
    top = float(f_entropy(args.gamma_prime))
    beta_in = args.beta_contain
    beta_out = args.beta_cover
    notes = {}
    sched = EpsilonSchedule.default(n, args.N, **eps)
    if beta_in is None and not 0.0 < sched.inner_level < top:
        beta_in = 0.5 * top
        notes["containment_level"] = "fallback 0.5 f(gamma')"
    if beta_out is None and not 0.0 < sched.outer_level < top:
        beta_out = 0.8 * top
        notes["coverage_level"] = "fallback 0.8 f(gamma')"
    common = dict(samples=args.samples, gamma_prime=args.gamma_prime, eps=eps, threads=args.threads,
                  dim_cap=args.dim_cap)
    cont = containment_experiment(n, args.N, args.trials, args.seed, beta=beta_in, **common)
    cov = boundary_coverage_experiment(n, args.N, args.trials, args.seed, beta=beta_out, **common)
    for rep in (cont, cov):
        rep.summary.update(notes)
        out.write(f"{rep.name}.csv", rep.to_csv())
        out.write(f"{rep.name}.json", rep.to_json() + "\n")
    _report(args, f"containment: {cont.summary}\ncoverage: {cov.summary}")
    return EXIT_OK, {"containment": {"pass": args.trials, "fail": 0}}


def cmd_constants(args, out: Outputs) -> tuple[int, dict]:
    frozen = fixed_constants()
    derived = derive_fixed_constants()
    ok = (
        abs(derived["gamma"] - frozen.gamma) <= 1e-15
        and abs(derived["mont_smith_c"] - frozen.mont_smith_c) <= 1e-12
        and derived["k_gamma"] == frozen.k_gamma
        and frozen.gamma <= derived["gamma_mont_smith_cap"]
    )
    doc = {"frozen": json.loads(frozen.to_json()), "derived": derived, "consistent": ok}
    out.write("constants.json", json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n")
    return (EXIT_OK if ok else EXIT_FAIL), {"constants": {"pass": int(ok), "fail": int(not ok)}}


def _single(values, name: str) -> int:
    if not values:
        raise UsageError(f"--{name} is required")
    if len(values) != 1:
        raise UsageError(f"--{name} takes one value here")
    return values[0]


def _report(args, text: str) -> None:
    stream = sys.stderr if args.output is None else sys.stdout
    print(text, file=stream)


COMMANDS = {
    "verify-bounds": cmd_verify_bounds,
    "hull": cmd_hull,
    "scaling": cmd_scaling,
    "sandwich": cmd_sandwich,
    "constants": cmd_constants,
}


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="facetlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=_threads, default=1, help="worker threads or 'auto'")
        p.add_argument("--output", help="directory for data files and manifest (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--config", help="JSON config file; explicit flags override it")
        p.add_argument("--dim-cap", type=int, default=DEFAULT_DIM_CAP, help="exact hull dimension cap")

    p = sub.add_parser("verify-bounds", help="exact-oracle inequality suites")
    common(p)
    p.add_argument("--checks", type=lambda s: [c for c in s.split(",") if c], default=None,
                   help="comma list from: " + ", ".join(CHECKS))
    p.add_argument("--n", type=_int_list, default=None, help="override dimensions, e.g. 8,12")
    p.add_argument("--samples", type=int, default=200)

    p = sub.add_parser("hull", help="sample a +-1 polytope and enumerate its facets")
    common(p)
    p.add_argument("--n", type=_int_list, default=None)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--exhaustive", action="store_true", help="use all 2^n cube vertices")
    p.add_argument("--input", help="vertex file (text or JSON hull format)")
    p.add_argument("--allow-degenerate", action="store_true")

    p = sub.add_parser("scaling", help="facet-count and volume sweeps over N")
    common(p)
    p.add_argument("--n", type=_int_list, default=[7])
    p.add_argument("--N-list", dest="N_list", type=_int_list, default=[20, 40, 80, 160])
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--samples", type=int, default=10_000, help="Monte Carlo points for volume")
    p.add_argument("--mode", choices=("facets", "volume", "both"), default="facets")

    p = sub.add_parser("sandwich", help="containment and boundary-coverage experiments")
    common(p)
    p.add_argument("--n", type=_int_list, default=[6])
    p.add_argument("--N", type=int, default=32)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--gamma-prime", type=float, default=0.3)
    p.add_argument("--beta-contain", type=float, default=None)
    p.add_argument("--beta-cover", type=float, default=None)
    for name in ("eps1", "eps2", "eps3"):
        p.add_argument(f"--{name}", type=float, default=None)

    p = sub.add_parser("constants", help="audit the frozen constants against high precision")
    common(p)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> tuple[argparse.Namespace, ExperimentConfig]:
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = ExperimentConfig.from_json(Path(args.config).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if cfg.command != args.command:
            raise UsageError(f"config is for {cfg.command!r}, not {args.command!r}")
        sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
        known = {a.dest for a in sub._actions}  # noqa: SLF001
        bad = sorted(set(cfg.params) - known)
        if bad:
            raise UsageError(f"unknown config keys: {', '.join(bad)}")
        sub.set_defaults(**cfg.params)
        args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    return args, ExperimentConfig(command=args.command, params=params)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, cfg = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"facetlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    started = time.time()
    out = Outputs(args.output)
    try:
        code, counts = COMMANDS[args.command](args, out)
    except (UsageError, DomainError, HullCapExceeded, ValueError) as exc:
        print(f"facetlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.manifest(cfg, started, counts)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
