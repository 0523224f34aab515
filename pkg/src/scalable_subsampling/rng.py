"""Reproducible random streams and the data models used by the harness.

Each stream is a Philox (counter-based) generator keyed by a
``SeedSequence(seed, spawn_key=key)``, so replication ``r`` at sample size
``n`` draws the same numbers regardless of which worker runs it or in what
order.
"""

import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from . import kernels
from .core import Sample
from .errors import InvalidInputError

MODELS = ("normal", "exponential", "student_t", "ar1")

_DEFAULTS = {
    "normal": {"mu": 0.0, "sigma": 1.0},
    "exponential": {"rate": 1.0},
    "student_t": {"nu": 5.0, "mu": 0.0},
    "ar1": {"phi": 0.5, "mu": 0.0, "sigma": 1.0},
}


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class DataModel:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in MODELS:
            raise InvalidInputError(f"unknown data model {self.name!r}; known: {MODELS}")
        unknown = set(self.params) - set(_DEFAULTS[self.name])
        if unknown:
            raise InvalidInputError(f"unknown parameters {sorted(unknown)} for {self.name}")
        p = {**_DEFAULTS[self.name], **{k: float(v) for k, v in self.params.items()}}
        object.__setattr__(self, "params", p)
        if self.name == "normal" and not p["sigma"] > 0:
            raise InvalidInputError("normal sigma must be positive")
        if self.name == "exponential" and not p["rate"] > 0:
            raise InvalidInputError("exponential rate must be positive")
        if self.name == "student_t" and not p["nu"] > 0:
            raise InvalidInputError("student_t nu must be positive")
        if self.name == "ar1":
            if not abs(p["phi"]) < 1:
                raise InvalidInputError("ar1 needs |phi| < 1")
            if not p["sigma"] > 0:
                raise InvalidInputError("ar1 sigma must be positive")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        name = d.pop("name", None)
        if name is None:
            raise InvalidInputError("data_model needs a 'name'")
        return cls(name, d)

    def to_dict(self):
        return {"name": self.name, **self.params}

    # -- drawing ----------------------------------------------------------

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        p = self.params
        if self.name == "normal":
            return p["mu"] + p["sigma"] * rng.standard_normal(n)
        if self.name == "exponential":
            return rng.exponential(1.0 / p["rate"], n)
        if self.name == "student_t":
            return p["mu"] + rng.standard_t(p["nu"], n)
        e = p["sigma"] * rng.standard_normal(n)
        e[0] /= math.sqrt(1.0 - p["phi"] ** 2)  # stationary start
        return p["mu"] + kernels.ar1_filter(e, p["phi"])

    # -- population quantities --------------------------------------------

    @property
    def marginal_sd(self):
        p = self.params
        if self.name == "normal":
            return p["sigma"]
        if self.name == "ar1":
            return p["sigma"] / math.sqrt(1.0 - p["phi"] ** 2)
        return None

    @property
    def symmetric_center(self):
        return None if self.name == "exponential" else self.params["mu"]

    def mean(self):
        p = self.params
        if self.name == "exponential":
            return 1.0 / p["rate"]
        if self.name == "student_t" and p["nu"] <= 1:
            raise InvalidInputError("student_t with nu <= 1 has no mean")
        return p["mu"]

    def long_run_variance(self):
        """Asymptotic variance of sqrt(n) * (sample mean - mean)."""
        p = self.params
        if self.name == "ar1":
            return (p["sigma"] / (1.0 - p["phi"])) ** 2
        if self.name == "normal":
            return p["sigma"] ** 2
        if self.name == "exponential":
            return 1.0 / p["rate"] ** 2
        if p["nu"] <= 2:
            raise InvalidInputError("student_t with nu <= 2 has infinite variance")
        return p["nu"] / (p["nu"] - 2.0)

    def quantile(self, prob):
        p = self.params
        if self.name == "exponential":
            return -math.log1p(-prob) / p["rate"]
        if self.name == "student_t":
            from scipy.stats import t

            return p["mu"] + float(t.ppf(prob, p["nu"]))
        return p["mu"] + self.marginal_sd * NormalDist().inv_cdf(prob)

    def density(self, x0):
        p = self.params
        if self.name == "exponential":
            return p["rate"] * math.exp(-p["rate"] * x0) if x0 >= 0 else 0.0
        if self.name == "student_t":
            nu = p["nu"]
            z = x0 - p["mu"]
            c = math.exp(math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2)) / math.sqrt(nu * math.pi)
            return c * (1 + z * z / nu) ** (-(nu + 1) / 2)
        return NormalDist(p["mu"], self.marginal_sd).pdf(x0)


def generate(model: DataModel, n: int, seed: int, *key: int) -> Sample:
    """Deterministic sample of size n from stream ``(seed, *key)``."""
    if n < 1:
        raise InvalidInputError(f"n must be positive, got {n}")
    return Sample(model.draw(int(n), stream(seed, *key)))


def population_theta(model: DataModel, stat_name: str) -> float:
    """The parameter a built-in statistic estimates under ``model``."""
    kind, _, params = stat_name.partition(":")
    kv = dict(item.split("=") for item in params.split(",") if item)
    if kind == "mean":
        return model.mean()
    if kind in ("quantile", "median"):
        return model.quantile(float(kv.get("p", 0.5)))
    if kind == "huber":
        if model.symmetric_center is None:
            raise InvalidInputError(f"no closed-form Huber location for {model.name}")
        return model.symmetric_center
    if kind == "kde":
        return model.density(float(kv.get("x0", 0.0)))
    raise InvalidInputError(f"no population value known for statistic {stat_name!r}")
