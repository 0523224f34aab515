"""Monte Carlo experiments: coverage and MSE-rate checks for subagging.

For every n in the grid and every replication r, a sample is drawn from
stream ``(seed, n, r)``, the tuning rule picks (b, h), the subagging
estimate and the chosen interval are computed, and the results are
summarised against the model's population value.  Replications run on a
thread pool but are collected in replication order, so the report does not
depend on the number of workers.
"""

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .core import evaluate_full
from .distribution import build_distribution, subsampling_ci
from .errors import InvalidInputError, SubsamplingError
from .rng import DataModel, generate, population_theta
from .statistics import parse_statistic
from .subagging import clt_ci, subagg_estimate, two_level_ci
from .tuning import TuningParams, resolve_scheme

CI_METHODS = ("clt", "subsampling", "two_level")


@dataclass(frozen=True)
class ExperimentConfig:
    data_model: DataModel
    n_grid: tuple
    replications: int
    statistic: str
    tuning: TuningParams
    ci_method: str = "clt"
    level: float = 0.95
    seed: int = 0
    output_path: Optional[str] = None

    def __post_init__(self):
        if self.replications < 1:
            raise InvalidInputError("replications must be >= 1")
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidInputError("n_grid must be non-empty and strictly increasing")
        object.__setattr__(self, "n_grid", grid)
        if self.ci_method not in CI_METHODS:
            raise InvalidInputError(f"ci_method must be one of {CI_METHODS}")
        if not 0 < self.level < 1:
            raise InvalidInputError("level must lie in (0, 1)")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInputError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        try:
            stat = parse_statistic(d["statistic"])
            tuning = dict(d.get("tuning", {}))
            tuning.setdefault("alpha", stat.alpha)
            tuning.setdefault("gamma", stat.gamma)
            return cls(
                data_model=DataModel.from_dict(d["data_model"]),
                n_grid=tuple(d["n_grid"]),
                replications=int(d["replications"]),
                statistic=d["statistic"],
                tuning=TuningParams.from_dict(tuning),
                ci_method=d.get("ci_method", "clt"),
                level=float(d.get("level", 0.95)),
                seed=int(d.get("seed", 0)),
                output_path=d.get("output_path"),
            )
        except KeyError as exc:
            raise InvalidInputError(f"experiment config is missing {exc}") from None
        except TypeError as exc:
            raise InvalidInputError(f"bad experiment config: {exc}") from None

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot load {path}: {exc}") from exc

    def to_dict(self):
        return dict(
            data_model=self.data_model.to_dict(),
            n_grid=list(self.n_grid),
            replications=self.replications,
            statistic=self.statistic,
            tuning=self.tuning.to_dict(),
            ci_method=self.ci_method,
            level=self.level,
            seed=self.seed,
            output_path=self.output_path,
        )


class ReplicationError(SubsamplingError):
    def __init__(self, rep, n, cause):
        super().__init__(f"replication {rep} at n={n} failed: {cause}")
        self.replication = rep
        self.cause = cause
        self.exit_code = cause.exit_code


@dataclass(frozen=True)
class Replication:
    estimate: float
    lower: float
    upper: float
    covered: bool


@dataclass(frozen=True)
class ExperimentRow:
    n: int
    b: int
    h: int
    q: int
    theta: float
    empirical_mse: float
    empirical_bias: float
    empirical_var: float
    coverage: float
    mean_ci_width: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list
    slope: Optional[float]
    slope_se: Optional[float]
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self, include_time=True):
        cfg = self.config.to_dict()
        cfg.pop("output_path")  # where the report goes is not part of its content
        d = dict(
            config=cfg,
            seed=self.config.seed,
            rows=[r.to_dict() for r in self.rows],
            mse_slope=self.slope,
            mse_slope_se=self.slope_se,
        )
        if include_time:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, include_time=True):
        return json.dumps(self.to_dict(include_time), indent=2)

    def to_text(self):
        head = f"{'n':>9} {'b':>7} {'h':>7} {'q':>5} {'mse':>11} {'bias':>11} {'var':>11} {'cover':>6} {'width':>10}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(
                f"{r.n:>9d} {r.b:>7d} {r.h:>7d} {r.q:>5d} {r.empirical_mse:>11.4e} "
                f"{r.empirical_bias:>11.4e} {r.empirical_var:>11.4e} {r.coverage:>6.3f} "
                f"{r.mean_ci_width:>10.4e}"
            )
        if self.slope is not None:
            lines.append(f"log-log MSE slope: {self.slope:.4f} +/- {self.slope_se:.4f}")
        return "\n".join(lines)

    def to_csv(self):
        lines = ["n,mse,coverage"]
        lines += [f"{r.n},{r.empirical_mse!r},{r.coverage!r}" for r in self.rows]
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")
        stem = path[: -len(".json")] if path.endswith(".json") else path
        with open(stem + ".csv", "w") as fh:
            fh.write(self.to_csv())
        with open(stem + ".txt", "w") as fh:
            fh.write(self.to_text() + "\n")


def fit_rate_slope(ns, mses):
    """OLS slope of log(mse) on log(n) and its standard error."""
    ns = np.asarray(ns, dtype=np.float64)
    mses = np.asarray(mses, dtype=np.float64)
    if ns.shape != mses.shape or ns.size < 3:
        raise InvalidInputError("need at least 3 (n, mse) pairs")
    if np.any(mses <= 0) or np.any(ns <= 0):
        raise InvalidInputError("n and mse must be positive for a log-log fit")
    x = np.log(ns)
    y = np.log(mses)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    dof = x.size - 2
    se = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    return slope, se


def _one_replication(config, stat, params, scheme, theta, n, rep):
    sample = generate(config.data_model, n, config.seed, n, rep)
    res = subagg_estimate(
        sample, stat, scheme, dependence=params.dependence, beta_nominal=params.beta
    )
    if config.ci_method == "clt":
        ci = clt_ci(res, config.level)
    elif config.ci_method == "two_level":
        ci = two_level_ci(sample, stat, params, config.level, scheme=scheme)
    else:
        theta_n = evaluate_full(sample, stat)
        dist = build_distribution(res.stats, theta_n, scheme.b**stat.alpha, scheme=scheme)
        ci = subsampling_ci(dist, theta_n, n**stat.alpha, config.level)
    return Replication(res.theta_bar, ci.lower, ci.upper, ci.lower <= theta <= ci.upper)


def _summarise(n, scheme, theta, reps):
    est = np.array([r.estimate for r in reps])
    R = est.size
    avg = float(kernels.pairwise_sum(est) / R)
    dev = est - avg
    err = est - theta
    widths = np.array([r.upper - r.lower for r in reps])
    return ExperimentRow(
        n=n,
        b=scheme.b,
        h=scheme.h,
        q=scheme.q,
        theta=theta,
        empirical_mse=float(kernels.pairwise_sum(err * err) / R),
        empirical_bias=avg - theta,
        empirical_var=float(kernels.pairwise_sum(dev * dev) / R),
        coverage=sum(r.covered for r in reps) / R,
        mean_ci_width=float(kernels.pairwise_sum(widths) / R),
    )


def run_experiment(config: ExperimentConfig, workers: int = 1, progress=None) -> ExperimentReport:
    """Run every (n, replication) cell; ``progress(n, row)`` is called per grid point."""
    t0 = time.perf_counter()
    stat = parse_statistic(config.statistic)
    params = config.tuning.resolved()
    theta = population_theta(config.data_model, stat.name)
    rows = []
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for n in config.n_grid:
            scheme = resolve_scheme(n, params)

            def task(rep, n=n, scheme=scheme):
                try:
                    return _one_replication(config, stat, params, scheme, theta, n, rep)
                except SubsamplingError as exc:
                    raise ReplicationError(rep, n, exc) from exc

            reps_idx = range(config.replications)
            reps = list(pool.map(task, reps_idx)) if pool else [task(r) for r in reps_idx]
            row = _summarise(n, scheme, theta, reps)
            rows.append(row)
            if progress:
                progress(n, row)
    finally:
        if pool:
            pool.shutdown()
    slope = slope_se = None
    if len(rows) >= 3 and all(r.empirical_mse > 0 for r in rows):
        slope, slope_se = fit_rate_slope([r.n for r in rows], [r.empirical_mse for r in rows])
    report = ExperimentReport(config, rows, slope, slope_se, time.perf_counter() - t0)
    if config.output_path:
        report.write(config.output_path)
    return report
