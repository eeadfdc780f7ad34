"""Command-line front end.

Subcommands map one-to-one onto the experiment drivers:

  simulate          pathwise wealth comparison (Monte Carlo + closed forms)
  prob              win probability: Monte Carlo + quadrature + lower bound
  bound             the explicit lower bound at (t, T)
  bound-scaled      the bound at t = f T
  optimal-horizon   the horizon maximizing the scaled bound
  moment            alpha-moment of the wealth ratio (closed form + MC)
  figure-bound-t    bound curves over t for several horizons
  figure-bound-T    scaled-bound curves over T for several fractions 1/n
  converge          grid-refinement study of the simulated gap
  accept            the acceptance battery (exit 1 if any item fails)

Values resolve with precedence: flag > config file (--config, `key = value`
lines) > environment (HVI_SEED for the seed) > built-in default.  Coefficient
flags take either a scalar ("0.05") or comma-joined time:value pairs
("0:0.03,0.5:0.06,1:0.04").  --T accepts a comma list for figure-bound-t and
--n a comma list for figure-bound-T / converge.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

from . import analysis, experiments
from .model import grid, make_model, node_index

DEFAULTS = {
    "T": "1", "t": "0.5", "r": "0.01", "mu": "0.05", "sigma": "0.2",
    "alpha": "1", "f": "0.5", "n": "1024", "paths": "1000000",
    "seed": "1", "format": "csv", "workers": "1", "samples": "500",
}

# per-subcommand default overrides (desk-scale budgets; all overridable)
SUB_DEFAULTS = {
    "simulate": {"paths": "100000"},
    "converge": {"paths": "1000", "n": "64,256,1024"},
    "figure-bound-t": {"T": "1,10,50,100"},
    "figure-bound-T": {"T": "250", "n": "2,4,8,16"},
}

SUBCOMMANDS = (
    "simulate", "prob", "bound", "bound-scaled", "optimal-horizon",
    "moment", "figure-bound-t", "figure-bound-T", "converge", "accept",
)

_GENERAL_KEYS = ("T", "t", "r", "mu", "sigma", "alpha", "f", "n", "paths",
                 "seed", "format", "workers", "samples")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    T: tuple          # horizons; single-valued for most subcommands
    t: float
    r: object         # float or tuple of (time, value) pairs
    mu: object
    sigma: object
    alpha: float
    f: float
    n: tuple          # grid steps / curve list
    paths: int
    seed: int
    fmt: str
    workers: int
    samples: int
    out: str | None


def _parse_number(text, key):
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"{key}: expected a number, got {text!r}") from None


def _parse_int(text, key):
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{key}: expected an integer, got {text!r}") from None


def _parse_number_list(text, key):
    return tuple(_parse_number(tok.strip(), key) for tok in str(text).split(",") if tok.strip())


def _parse_int_list(text, key):
    return tuple(_parse_int(tok.strip(), key) for tok in str(text).split(",") if tok.strip())


def _parse_coefficient(text, key):
    """Scalar, or comma-joined time:value pairs."""
    text = str(text).strip()
    if ":" not in text:
        return _parse_number(text, key)
    pairs = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" not in tok:
            raise ValueError(f"{key}: mixed scalar/pair syntax in {text!r}")
        a, b = tok.split(":", 1)
        pairs.append((_parse_number(a, key), _parse_number(b, key)))
    if not pairs:
        raise ValueError(f"{key}: empty coefficient spec")
    return tuple(pairs)


def _coefficient_text(spec):
    if isinstance(spec, tuple):
        return ",".join(f"{repr(t)}:{repr(v)}" for t, v in spec)
    return repr(spec)


def _read_config_file(path):
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                key = key.strip()
                if key not in _GENERAL_KEYS:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = val.strip()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from None
    return values


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hvi",
        description="Honest-vs-insider portfolio toolkit",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--T", help="horizon (comma list for figure-bound-t)")
        p.add_argument("--t", help="evaluation time")
        p.add_argument("--r", help="risk-free rate spec")
        p.add_argument("--mu", help="drift spec")
        p.add_argument("--sigma", help="volatility spec")
        p.add_argument("--alpha", help="moment order")
        p.add_argument("--f", help="fraction t/T")
        p.add_argument("--n", help="grid steps (comma list for figure-bound-T/converge)")
        p.add_argument("--paths", help="Monte Carlo sample count")
        p.add_argument("--seed", help="master seed")
        p.add_argument("--samples", help="figure samples per curve")
        p.add_argument("--workers", help="Monte Carlo worker threads")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--config", help="config file with 'key = value' defaults")
        p.add_argument("--dump-config", action="store_true",
                       help="print the effective config and exit")
    return parser


def parse_args(argv):
    """Parse and validate; returns (RunConfig, dump_config flag).

    Exits with status 2 and a one-line message on any malformed value or
    precondition violation.
    """
    parser = _build_parser()
    ns = parser.parse_args(argv)
    filecfg = {}
    if ns.config:
        try:
            filecfg = _read_config_file(ns.config)
        except ValueError as exc:
            parser.error(str(exc))

    def resolve(key):
        flag = getattr(ns, "fmt" if key == "format" else key, None)
        if flag is not None:
            return str(flag)
        if key in filecfg:
            return filecfg[key]
        if key == "seed" and os.environ.get("HVI_SEED"):
            return os.environ["HVI_SEED"]
        return SUB_DEFAULTS.get(ns.subcommand, {}).get(key, DEFAULTS[key])

    try:
        cfg = RunConfig(
            subcommand=ns.subcommand,
            T=_parse_number_list(resolve("T"), "--T"),
            t=_parse_number(resolve("t"), "--t"),
            r=_parse_coefficient(resolve("r"), "--r"),
            mu=_parse_coefficient(resolve("mu"), "--mu"),
            sigma=_parse_coefficient(resolve("sigma"), "--sigma"),
            alpha=_parse_number(resolve("alpha"), "--alpha"),
            f=_parse_number(resolve("f"), "--f"),
            n=_parse_int_list(resolve("n"), "--n"),
            paths=_parse_int(resolve("paths"), "--paths"),
            seed=_parse_int(resolve("seed"), "--seed"),
            fmt=resolve("format"),
            workers=_parse_int(resolve("workers"), "--workers"),
            samples=_parse_int(resolve("samples"), "--samples"),
            out=ns.out,
        )
        _validate(cfg)
    except ValueError as exc:
        parser.error(str(exc))
    return cfg, ns.dump_config


def _validate(cfg):
    sc = cfg.subcommand
    if cfg.fmt not in ("csv", "json"):
        raise ValueError(f"--format must be csv or json, got {cfg.fmt!r}")
    if cfg.workers < 1:
        raise ValueError("--workers must be >= 1")
    if cfg.paths < 1:
        raise ValueError("--paths must be >= 1")
    if cfg.seed < 0 or cfg.seed >= 2**64:
        raise ValueError("--seed must fit in 64 bits")
    if not cfg.T or any(T <= 0 for T in cfg.T):
        raise ValueError("--T values must be positive")
    if len(cfg.T) != 1 and sc != "figure-bound-t":
        raise ValueError(f"{sc}: --T takes a single value")
    if len(cfg.n) != 1 and sc not in ("figure-bound-T", "converge"):
        raise ValueError(f"{sc}: --n takes a single value")
    T = cfg.T[0]
    if sc == "simulate":
        if not 0 <= cfg.t < T:
            raise ValueError(f"simulate: --t must satisfy 0 <= t < T (insider runs "
                             f"are not viable at t >= T); got t={cfg.t}, T={T}")
        if cfg.n[0] < 1:
            raise ValueError("--n must be >= 1")
        try:
            node_index(grid(T, cfg.n[0]), cfg.t)
            make_model(T, cfg.r, cfg.mu, cfg.sigma)
        except ValueError as exc:
            raise ValueError(f"simulate: {exc}")
    elif sc in ("prob", "bound"):
        if not 0 < cfg.t < T:
            raise ValueError(f"{sc}: --t must lie strictly inside (0, --T); "
                             f"got t={cfg.t}, T={T}")
    elif sc == "bound-scaled":
        if not 0 < cfg.f < 1:
            raise ValueError(f"bound-scaled: --f must lie in (0, 1), got {cfg.f}")
    elif sc == "optimal-horizon":
        if not 0 < cfg.f < 1:
            raise ValueError(f"optimal-horizon: --f must lie in (0, 1), got {cfg.f}")
    elif sc == "moment":
        if cfg.alpha <= 0:
            raise ValueError(f"moment: --alpha must be positive, got {cfg.alpha}")
        if not 0 <= cfg.t < T:
            raise ValueError(f"moment: --t must satisfy 0 <= t < T, got t={cfg.t}, T={T}")
    elif sc == "figure-bound-t":
        if cfg.samples < 3:
            raise ValueError("figure-bound-t: --samples must be >= 3")
    elif sc == "figure-bound-T":
        if any(n < 2 for n in cfg.n):
            raise ValueError("figure-bound-T: --n entries must be >= 2")
        if cfg.samples < 3:
            raise ValueError("figure-bound-T: --samples must be >= 3")
    elif sc == "converge":
        if not 0 <= cfg.t < T:
            raise ValueError(f"converge: --t must satisfy 0 <= t < T, got t={cfg.t}, T={T}")
        if any(b <= a for a, b in zip(cfg.n, cfg.n[1:])):
            raise ValueError("converge: --n sizes must be strictly increasing")
        for n in cfg.n:
            try:
                node_index(grid(T, n), cfg.t)
            except ValueError as exc:
                raise ValueError(f"converge: {exc}")


def dump_config_text(cfg: RunConfig) -> str:
    lines = [f"# hvi {cfg.subcommand} configuration"]
    for key in _GENERAL_KEYS:
        if key == "format":
            lines.append(f"format = {cfg.fmt}")
        elif key in ("r", "mu", "sigma"):
            lines.append(f"{key} = {_coefficient_text(getattr(cfg, key))}")
        elif key in ("T", "n"):
            lines.append(f"{key} = {','.join(repr(v) for v in getattr(cfg, key))}")
        else:
            lines.append(f"{key} = {getattr(cfg, key)!r}")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig) -> int:
    """Dispatch a validated config; returns the process exit status."""
    T = cfg.T[0]
    if cfg.subcommand == "simulate":
        model = make_model(T, cfg.r, cfg.mu, cfg.sigma)
        report = experiments.wealth_comparison(model, cfg.t, cfg.n[0], cfg.paths,
                                               cfg.seed, cfg.workers)
    elif cfg.subcommand == "prob":
        est = analysis.prob_honest_wins_mc(cfg.t, T, cfg.paths, cfg.seed, cfg.workers)
        q = analysis.prob_honest_wins_quadrature(cfg.t, T)
        lb = analysis.lower_bound(cfg.t, T)
        report = experiments.ExperimentReport(
            name="prob",
            parameters={"t": cfg.t, "T": T, "paths": cfg.paths, "seed": cfg.seed,
                        "workers": cfg.workers},
            columns=["t", "T", "paths", "seed", "mc_estimate", "mc_stderr",
                     "quadrature_value", "lower_bound", "mc_ge_bound"],
            rows=[(cfg.t, T, cfg.paths, cfg.seed, est.mean, est.stderr, q,
                   lb.bound, est.mean >= lb.bound)],
            seed=cfg.seed,
        )
    elif cfg.subcommand == "bound":
        ev = analysis.lower_bound(cfg.t, T)
        report = experiments.ExperimentReport(
            name="bound",
            parameters={"t": cfg.t, "T": T},
            columns=["t", "T", "L", "a", "b", "c", "bound", "log_bound"],
            rows=[(ev.t, ev.T, ev.L, ev.a, ev.b, ev.c, ev.bound, ev.log_bound)],
        )
    elif cfg.subcommand == "bound-scaled":
        val = analysis.lower_bound_scaled(cfg.f, T)
        report = experiments.ExperimentReport(
            name="bound-scaled",
            parameters={"f": cfg.f, "T": T},
            columns=["f", "T", "L", "bound"],
            rows=[(cfg.f, T, analysis.horizon_free_L(cfg.f), val)],
        )
    elif cfg.subcommand == "optimal-horizon":
        try:
            t_star = analysis.optimal_horizon(cfg.f)
        except RuntimeError as exc:
            print(f"hvi optimal-horizon: {exc}", file=sys.stderr)
            return 1
        cp = analysis.cubic_coefficients(cfg.f)
        report = experiments.ExperimentReport(
            name="optimal-horizon",
            parameters={"f": cfg.f},
            columns=["f", "T_star", "L", "A3", "A2", "A1", "A0", "bound_at_T_star"],
            rows=[(cfg.f, t_star, cp.L, cp.A3, cp.A2, cp.A1, cp.A0,
                   analysis.lower_bound_scaled(cfg.f, t_star))],
        )
    elif cfg.subcommand == "moment":
        closed = analysis.moment_ratio(cfg.alpha, cfg.t, T)
        divergent = closed == float("inf")
        if divergent:
            mc_mean, mc_stderr, n_mc = float("nan"), float("nan"), 0
        else:
            est = analysis.moment_ratio_mc(cfg.alpha, cfg.t, T, cfg.paths,
                                           cfg.seed, cfg.workers)
            mc_mean, mc_stderr, n_mc = est.mean, est.stderr, est.n
        report = experiments.ExperimentReport(
            name="moment",
            parameters={"alpha": cfg.alpha, "t": cfg.t, "T": T,
                        "paths": cfg.paths, "seed": cfg.seed},
            columns=["alpha", "t", "T", "divergent", "closed_form",
                     "mc_paths", "mc_mean", "mc_stderr"],
            rows=[(cfg.alpha, cfg.t, T, divergent, closed, n_mc, mc_mean, mc_stderr)],
            seed=cfg.seed,
        )
    elif cfg.subcommand == "figure-bound-t":
        report = experiments.figure_bound_vs_t(cfg.T, cfg.samples)
    elif cfg.subcommand == "figure-bound-T":
        report = experiments.figure_bound_vs_T(cfg.n, T_max=T, samples=cfg.samples)
    elif cfg.subcommand == "converge":
        report = experiments.convergence_study(cfg.t, T, cfg.n, cfg.paths,
                                               cfg.seed, cfg.workers)
    elif cfg.subcommand == "accept":
        report = experiments.acceptance_suite(seed=cfg.seed, workers=cfg.workers)
    else:  # pragma: no cover - argparse restricts the choices
        raise AssertionError(cfg.subcommand)

    text = report.to_csv() if cfg.fmt == "csv" else report.to_json()
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.subcommand == "accept":
        failed = [row for row in report.rows if not row[2]]
        if failed:
            for row in failed:
                print(f"hvi accept: item {row[0]} failed: {row[1]} "
                      f"(measured {row[3]!r}, threshold {row[4]!r})", file=sys.stderr)
            return 1
    return 0


def main(argv=None) -> int:
    cfg, dump = parse_args(sys.argv[1:] if argv is None else list(argv))
    if dump:
        sys.stdout.write(dump_config_text(cfg))
        return 0
    try:
        return run(cfg)
    except (ValueError, OSError) as exc:
        print(f"hvi {cfg.subcommand}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
