"""Command-line interface: ``cycleweights <command> [options]``.

Every command writes one table, as CSV (17 significant digits) or JSON.
Settings come from an optional JSON config file; command-line flags override
it. Exit codes: 0 ok, 2 configuration error, 3 numeric failure, 4 a
verification check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError, NumericError, UnsupportedLimit
from .exact import (compute_norms, dist_K, dist_L1, dist_Rj, expected_K, factorial_moment,
                    format_float)
from .montecarlo import run_batch, samples_to_csv
from .saddle import GenFnSpec, asymptotic_hn, solve_saddle
from .verify import COLUMNS as VERIFY_COLUMNS
from .verify import verify_family
from .weights import FamilyParams, build_weights, family_params

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
DEFAULT_MAX_N = 20_000
SCHEMA_VERSION = 1

_CONFIG_KEYS = {"family", "theta", "gamma", "custom_log_weights", "N", "n_grid", "statistics",
                "num_samples", "seed", "output_format", "tolerances", "j_max", "workers"}


def max_n_cap() -> int:
    raw = os.environ.get("CYCLEWEIGHTS_MAX_N", str(DEFAULT_MAX_N))
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"CYCLEWEIGHTS_MAX_N must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ConfigError("CYCLEWEIGHTS_MAX_N must be positive")
    return cap


@dataclass
class RunConfig:
    family: FamilyParams
    N: int
    n_grid: list
    statistics: list = field(default_factory=lambda: ["L1"])
    num_samples: int = 0
    seed: int = 0
    output_format: str = "csv"
    tolerances: dict = field(default_factory=dict)
    j_max: int = 5
    workers: int = 1

    def __post_init__(self):
        if not self.n_grid:
            raise ConfigError("n_grid is empty")
        for n in self.n_grid:
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise ConfigError(f"n_grid entries must be positive integers, got {n!r}")
            if n > self.N:
                raise ConfigError(f"n={n} exceeds the cap N={self.N}")
        if self.N > max_n_cap():
            raise ConfigError(f"N={self.N} exceeds CYCLEWEIGHTS_MAX_N={max_n_cap()}")
        if self.num_samples < 0:
            raise ConfigError("num_samples must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.j_max < 0:
            raise ConfigError("j_max must be >= 0")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output_format must be csv or json, got {self.output_format!r}")
        for k, v in self.tolerances.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v >= 0:
                raise ConfigError(f"tolerance {k!r} must be a nonnegative number")

    @property
    def n_max(self) -> int:
        return max(self.n_grid)


def parse_n_grid(text: str) -> list:
    """``"10,100,1000"`` or ``"lo:hi"`` or ``"lo:hi:step"`` (inclusive)."""
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] < 1):
                raise ValueError
            step = parts[2] if len(parts) == 3 else 1
            return list(range(parts[0], parts[1] + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse n grid {text!r}") from None


def _int(value, name):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return value


def build_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    fam = raw.get("family", "uniform")
    if isinstance(fam, dict):
        base = FamilyParams.from_dict(fam)
        name, theta, gamma, custom = base.family.value, base.theta, base.gamma, base.custom_log_weights
    else:
        name, theta, gamma, custom = fam, raw.get("theta"), raw.get("gamma"), raw.get("custom_log_weights")
    if args.family is not None:
        name = args.family
        theta = gamma = None
        if args.family == (fam if isinstance(fam, str) else None):
            theta, gamma = raw.get("theta"), raw.get("gamma")
    if args.theta is not None:
        theta = args.theta
    if args.gamma is not None:
        gamma = args.gamma
    if custom is not None:
        custom = [-math.inf if x is None else x for x in custom]
    params = family_params(str(name), theta=theta, gamma=gamma, custom_log_weights=custom)

    if args.n_grid is not None:
        n_grid = parse_n_grid(args.n_grid)
    elif args.n is not None:
        n_grid = [args.n]
    else:
        n_grid = raw.get("n_grid", [10])
        if not isinstance(n_grid, list):
            raise ConfigError("n_grid must be a list of integers")
    N = _int(raw.get("N", max_n_cap()), "N")
    statistics = raw.get("statistics", ["L1"])
    if getattr(args, "statistic", None) is not None:
        statistics = [args.statistic]
    return RunConfig(
        family=params,
        N=N,
        n_grid=list(n_grid),
        statistics=list(statistics),
        num_samples=_int(args.samples if args.samples is not None else raw.get("num_samples", 0), "num_samples"),
        seed=_int(args.seed if args.seed is not None else raw.get("seed", 0), "seed"),
        output_format=args.format or raw.get("output_format", "csv"),
        tolerances=dict(raw.get("tolerances", {})),
        j_max=_int(args.j_max if args.j_max is not None else raw.get("j_max", 5), "j_max"),
        workers=_int(raw.get("workers", 1), "workers"),
    )


# ------------------------------------------------------------ tables

@dataclass
class Table:
    command: str
    columns: list
    rows: list
    family: dict
    extra: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format_float(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        def clean(v):
            return None if isinstance(v, float) and not math.isfinite(v) else v

        doc = {"schema_version": SCHEMA_VERSION, "command": self.command, "family": self.family,
               "columns": self.columns, "rows": [[clean(v) for v in row] for row in self.rows]}
        doc.update(self.extra)
        return json.dumps(doc, sort_keys=True) + "\n"


def _norms(config: RunConfig):
    return compute_norms(build_weights(config.family, config.n_max))


def _parse_statistic(stat: str):
    s = stat.strip()
    if s in ("L1", "K"):
        return s, 0
    if s.startswith("R") and s[1:].isdigit() and int(s[1:]) >= 1:
        return "R", int(s[1:])
    raise ConfigError(f"unknown statistic {stat!r}; use L1, K or R<j>")


def cmd_weights(config: RunConfig) -> Table:
    w = build_weights(config.family, config.n_max)
    rows = [[n, float(w.log_theta[n])] for n in config.n_grid]
    return Table("weights", ["n", "log_theta"], rows, config.family.to_dict())


def cmd_normalize(config: RunConfig) -> Table:
    norms = _norms(config)
    rows = [[n, float(norms.log_h[n])] for n in config.n_grid]
    return Table("normalize", ["n", "log_h"], rows, config.family.to_dict())


def cmd_dist(config: RunConfig, statistic: Optional[str] = None, n: Optional[int] = None) -> Table:
    stat, j = _parse_statistic(statistic or config.statistics[0])
    n = config.n_max if n is None else n
    norms = _norms(config)
    if stat == "L1":
        pmf = dist_L1(norms, n)
    elif stat == "K":
        pmf = dist_K(norms, n)
    else:
        if j > n:
            raise ConfigError(f"R{j} needs j <= n={n}")
        pmf = dist_Rj(norms, n, j)
    rows = [[k, p, lp] for k, p, lp in pmf.to_records()]
    label = stat if stat != "R" else f"R{j}"
    return Table("dist", ["k", "probability", "log_probability"], rows, config.family.to_dict(),
                 extra={"statistic": label, "n": n})


def cmd_moments(config: RunConfig) -> Table:
    norms = _norms(config)
    cols = ["n", "E_K", "E_L1"] + [f"E_R{j}" for j in range(1, config.j_max + 1)]
    rows = []
    for n in config.n_grid:
        row = [n, expected_K(norms, n), dist_L1(norms, n).mean()]
        row += [factorial_moment(norms, n, {j: 1}) if j <= n else 0.0 for j in range(1, config.j_max + 1)]
        rows.append(row)
    return Table("moments", cols, rows, config.family.to_dict())


def cmd_sample(config: RunConfig) -> str:
    if config.num_samples < 1:
        raise ConfigError("sample needs --samples >= 1")
    norms = _norms(config)
    stats = run_batch(norms, config.n_max, config.num_samples, config.seed, j_max=config.j_max,
                      workers=config.workers, keep_samples=config.output_format == "csv")
    if config.output_format == "csv":
        return samples_to_csv(stats.samples)
    doc = stats.to_dict()
    doc["schema_version"] = SCHEMA_VERSION
    doc["command"] = "sample"
    return json.dumps(doc, sort_keys=True) + "\n"


SADDLE_COLUMNS = ["n", "r_n", "I_m1", "I_0", "I_1", "log_h_asymptotic", "log_h_exact", "delta"]


def cmd_saddle(config: RunConfig) -> Table:
    # truncated series need many more terms than n to resolve the saddle point
    spec = GenFnSpec.for_family(config.family, N=max(10_000, 20 * config.n_max))
    norms = _norms(config)
    rows = []
    for n in config.n_grid:
        sol = solve_saddle(spec, n)
        approx = asymptotic_hn(spec, sol)
        exact = float(norms.log_h[n])
        rows.append([n, sol.r, sol.I_m1, sol.I_0, sol.I_1, approx, exact, approx - exact])
    return Table("saddle", SADDLE_COLUMNS, rows, config.family.to_dict(), extra={"kind": spec.kind.value})


def cmd_verify(config: RunConfig) -> Table:
    norms = _norms(config)
    rows = []
    for n in config.n_grid:
        rows += [r.as_list() for r in verify_family(norms, n, config.num_samples, config.seed, config.tolerances)]
    return Table("verify", VERIFY_COLUMNS, rows, config.family.to_dict())


# ------------------------------------------------------------ entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file; flags override its values")
    common.add_argument("--family", help="family name (e.g. Ewens) or preset (e.g. subexp-growth)")
    common.add_argument("--gamma", type=float)
    common.add_argument("--theta", type=float)
    common.add_argument("--n", type=int, help="single system size")
    common.add_argument("--n-grid", help="comma list or lo:hi[:step]")
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")
    common.add_argument("--seed", type=int)
    common.add_argument("--j-max", type=int, help="largest j for R_j summaries")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    parser = argparse.ArgumentParser(prog="cycleweights", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("weights", parents=[common], help="table of ln theta_n")
    sub.add_parser("normalize", parents=[common], help="table of ln h_n")
    p = sub.add_parser("dist", parents=[common], help="exact pmf of L1, K or R<j>")
    p.add_argument("--statistic", help="L1 (default), K or R<j>")
    sub.add_parser("moments", parents=[common], help="E(K), E(L1) and E(R_j)")
    sub.add_parser("sample", parents=[common], help="exact Monte Carlo samples")
    sub.add_parser("saddle", parents=[common], help="saddle-point approximation of ln h_n")
    sub.add_parser("verify", parents=[common], help="compare exact laws with limit laws")
    return parser


def run(argv=None) -> tuple[int, str]:
    args = build_parser().parse_args(argv)
    try:
        config = build_config(args)
        cmd = args.command
        status = EXIT_OK
        if cmd == "sample":
            text = cmd_sample(config)
        else:
            table = {"weights": cmd_weights, "normalize": cmd_normalize, "dist": cmd_dist,
                     "moments": cmd_moments, "saddle": cmd_saddle, "verify": cmd_verify}[cmd](config)
            text = table.to_json() if config.output_format == "json" else table.to_csv()
            if cmd == "verify" and any(row[-1] == "fail" for row in table.rows):
                status = EXIT_VERIFY
    except (ConfigError, UnsupportedLimit) as exc:
        return EXIT_CONFIG, f"error: {exc}\n"
    except (NumericError, OverflowError, FloatingPointError) as exc:
        return EXIT_NUMERIC, f"numeric failure: {exc}\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        return status, ""
    return status, text


def main(argv=None) -> int:
    status, text = run(argv)
    stream = sys.stdout if status in (EXIT_OK, EXIT_VERIFY) else sys.stderr
    stream.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
