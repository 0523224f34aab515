"""Command line interface: ``scalsub {estimate,distribution,ci,tune,mc}``.

Exit codes: 0 success, 2 invalid input or config, 3 infeasible tuning,
4 numerical failure.
"""

import argparse
import json
import math
import sys

from .core import evaluate_full, make_block_scheme, realized_exponents
from .distribution import subsampling_ci, subsampling_distribution
from .errors import InvalidInputError, SubsamplingError
from .experiment import ExperimentConfig, run_experiment
from .io import ingest_csv
from .statistics import parse_statistic
from .subagging import clt_ci, subagg_estimate, two_level_ci
from .tuning import TuningParams, tune


def _dump(obj):
    print(json.dumps(obj, indent=2, default=_jsonable))


def _jsonable(x):
    if hasattr(x, "tolist"):
        return x.tolist()
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


def _finite_or_str(x):
    return "inf" if x == math.inf else x


def _load(args):
    sample = ingest_csv(args.input, header=args.header)
    stat = parse_statistic(args.stat)
    alpha = stat.alpha if args.alpha is None else args.alpha
    gamma = getattr(args, "gamma", None)
    gamma = stat.gamma if gamma is None else gamma
    if alpha != stat.alpha or gamma != stat.gamma:
        stat = type(stat)(
            evaluate=stat.evaluate,
            alpha=alpha,
            gamma=gamma,
            zeta=stat.zeta,
            name=stat.name,
            batch=stat.batch,
        )
    scheme = make_block_scheme(sample.n, args.b, args.h)
    return sample, stat, scheme


def _add_data_args(p, g=False):
    p.add_argument("--input", required=True, help="CSV file, one observation per row")
    p.add_argument("--header", action="store_true", help="skip the first row")
    p.add_argument("--stat", required=True, help='e.g. "mean", "huber:k=1.345", "kde:x0=0"')
    p.add_argument("--b", type=int, required=True, help="block length")
    p.add_argument("--h", type=int, required=True, help="block offset")
    p.add_argument("--alpha", type=float, help="rate exponent (default: the statistic's)")
    if g:
        p.add_argument("--g", choices=("identity", "abs", "sup-norm"), default="identity")


def cmd_estimate(args):
    sample, stat, scheme = _load(args)
    res = subagg_estimate(
        sample, stat, scheme, allow_overlap=args.allow_overlap, dependence=args.dependence
    )
    if args.ci == "clt":
        res = res.with_ci(clt_ci(res, args.level))
    elif args.ci == "two-level":
        beta, delta = realized_exponents(scheme)
        tuning = TuningParams(
            alpha=stat.alpha,
            gamma=stat.gamma,
            beta=beta,
            delta=max(beta, delta),
            dependence=args.dependence,
        )
        res = res.with_ci(two_level_ci(sample, stat, tuning, args.level, scheme=scheme))
    _dump(res.to_dict())


def cmd_distribution(args):
    sample, stat, scheme = _load(args)
    dist = subsampling_distribution(sample, stat, scheme, g=args.g, center_on=args.center)
    if args.export:
        dist.to_json(args.export)
    summary = dict(
        q=dist.q,
        b=scheme.b,
        h=scheme.h,
        tau_b=dist.tau_b,
        center=dist.center,
        g=dist.g,
        unused_tail=scheme.unused_tail,
        quantiles={str(p): dist.quantile(p) for p in (0.025, 0.05, 0.5, 0.95, 0.975)},
    )
    _dump(summary)


def cmd_ci(args):
    sample, stat, scheme = _load(args)
    theta_n = evaluate_full(sample, stat)
    dist = subsampling_distribution(sample, stat, scheme, g=args.g, center=theta_n)
    ci = subsampling_ci(dist, theta_n, sample.n**stat.alpha, args.level)
    out = dict(theta_hat=theta_n, n=sample.n, b=scheme.b, h=scheme.h, q=scheme.q, ci=ci.to_dict())
    _dump(out)


def cmd_tune(args):
    params = TuningParams(
        alpha=args.alpha,
        gamma=args.gamma,
        beta=args.beta,
        delta=args.delta,
        c2=args.c2,
        c3=args.c3,
        dependence=args.dependence,
    )
    out = tune(args.n, params, zeta=args.zeta)
    out["params"]["gamma"] = _finite_or_str(out["params"]["gamma"])
    _dump(out)


def cmd_mc(args):
    config = ExperimentConfig.from_json(args.config)
    if args.output:
        from dataclasses import replace

        config = replace(config, output_path=args.output)

    def progress(n, row):
        if args.verbose:
            print(f"n={n}: mse={row.empirical_mse:.4e} coverage={row.coverage:.3f}", file=sys.stderr)

    report = run_experiment(config, workers=args.workers, progress=progress)
    if args.format == "text":
        print(report.to_text())
    else:
        print(report.to_json(include_time=not args.no_time))


def build_parser():
    parser = argparse.ArgumentParser(prog="scalsub", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="scalable subagging estimate")
    _add_data_args(p)
    p.add_argument("--gamma", type=float, help="bias exponent (default: the statistic's)")
    p.add_argument("--ci", choices=("none", "clt", "two-level"), default="none")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--dependence", choices=("iid", "mixing"), default="iid")
    p.add_argument("--allow-overlap", action="store_true", help="permit h < b (no variance)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("distribution", help="block subsampling distribution")
    _add_data_args(p, g=True)
    p.add_argument("--center", choices=("full", "subagg"), default="full")
    p.add_argument("--export", help="write the full distribution as JSON")
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("ci", help="subsampling confidence interval for the full-sample statistic")
    _add_data_args(p, g=True)
    p.add_argument("--method", choices=("subsampling",), default="subsampling")
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("tune", help="resolve (beta, delta, b, h) and report rates")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True, help="'inf' for unbiased statistics")
    p.add_argument("--beta", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--c3", type=float, default=1.0)
    p.add_argument("--zeta", type=float, default=1.0)
    p.add_argument("--dependence", choices=("iid", "mixing"), default="iid")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("mc", help="Monte Carlo coverage / rate experiment")
    p.add_argument("--config", required=True, help="experiment JSON")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", help="override output_path (JSON; .csv and .txt written alongside)")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--no-time", action="store_true", help="omit wall_time from stdout JSON")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SubsamplingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return InvalidInputError.exit_code
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
