"""Distribution model for transceiver strengths and edge costs.

Five families: a point mass, a finite lattice of nonnegative atoms, Poisson,
continuous Pareto, and the discrete zeta law.  Each supports exact means,
extended-real log moment generating functions, and counter-based sampling.

Log-MGFs return ``math.inf`` rather than raising when the moment is
infinite: the routing criteria are naturally vacuous or one-sided in that
case, so infinity must flow through the arithmetic.  Python floats already
give +inf absorbing addition and a total order, which is all the callers
need.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Union

import mpmath
import numpy as np
from scipy import special, stats

from . import backend
from .errors import ConfigError
from .rng import RandomStream

INF = math.inf

_PROB_SUM_TOL = 1e-12
_TABLE_TAIL = 1e-18  # tail mass truncated from the Poisson sampling table
_MAX_TABLE = 500_000


@dataclass(frozen=True)
class SamplerPlan:
    """Flattened description of a distribution consumable by both kernel
    backends: (kind, two scalars, optional value/cdf tables)."""

    kind: int
    a: float
    b: float
    values: np.ndarray
    cdf: np.ndarray

    def args(self):
        return (self.kind, self.a, self.b, self.values, self.cdf)


_EMPTY = np.empty(0)


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise ConfigError("constant value must be finite and nonnegative")

    def mean(self) -> float:
        return self.value

    def log_mgf(self, lam: float) -> float:
        return lam * self.value

    def support_min(self) -> float:
        return self.value

    def support_max(self) -> float:
        return self.value

    def atom_at(self, x: float) -> float:
        return 1.0 if x == self.value else 0.0

    def _plan(self) -> SamplerPlan:
        return SamplerPlan(backend.KIND_CONSTANT, self.value, 0.0, _EMPTY, _EMPTY)


@dataclass(frozen=True)
class FiniteLattice:
    """Finitely many atoms (value, probability); values need not be integers."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple(sorted((float(v), float(p)) for v, p in self.atoms))
        if not atoms:
            raise ConfigError("finite distribution needs at least one atom")
        values = [v for v, _ in atoms]
        if len(set(values)) != len(values):
            raise ConfigError("atom values must be distinct")
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise ConfigError("atom values must be finite and nonnegative")
        if any(not 0.0 < p <= 1.0 for _, p in atoms):
            raise ConfigError("atom probabilities must lie in (0, 1]")
        if abs(math.fsum(p for _, p in atoms) - 1.0) > _PROB_SUM_TOL:
            raise ConfigError("atom probabilities must sum to 1")
        object.__setattr__(self, "atoms", atoms)

    def mean(self) -> float:
        return math.fsum(v * p for v, p in self.atoms)

    def log_mgf(self, lam: float) -> float:
        # max-shift keeps this exact for any lam up to the overflow cap
        vals = np.array([v for v, _ in self.atoms])
        probs = np.array([p for _, p in self.atoms])
        return float(special.logsumexp(lam * vals, b=probs))

    def support_min(self) -> float:
        return self.atoms[0][0]

    def support_max(self) -> float:
        return self.atoms[-1][0]

    def atom_at(self, x: float) -> float:
        for v, p in self.atoms:
            if v == x:
                return p
        return 0.0

    def _plan(self) -> SamplerPlan:
        values = np.array([v for v, _ in self.atoms])
        cdf = np.cumsum([p for _, p in self.atoms])
        cdf[-1] = 1.0
        return SamplerPlan(backend.KIND_TABLE, 0.0, 0.0, values, cdf)


@dataclass(frozen=True)
class Poisson:
    mean_value: float

    def __post_init__(self):
        if not (self.mean_value > 0 and math.isfinite(self.mean_value)):
            raise ConfigError("poisson mean must be positive and finite")

    def mean(self) -> float:
        return self.mean_value

    def log_mgf(self, lam: float) -> float:
        try:
            return self.mean_value * math.expm1(lam)
        except OverflowError:
            # finite in principle, but beyond double range; saturate
            return INF

    def support_min(self) -> float:
        return 0.0

    def support_max(self) -> float:
        return INF

    def atom_at(self, x: float) -> float:
        if x < 0 or x != int(x):
            return 0.0
        return float(stats.poisson.pmf(int(x), self.mean_value))

    def _plan(self) -> SamplerPlan:
        # Inverse-CDF table so one draw consumes exactly one counter.  The
        # tail mass beyond the table (< 1e-18) is folded into the last entry.
        mu = self.mean_value
        size = int(mu + 40.0 * math.sqrt(mu + 1.0) + 50.0)
        while True:
            cdf = stats.poisson.cdf(np.arange(size), mu)
            cut = np.searchsorted(cdf, 1.0 - _TABLE_TAIL)
            if cut < size or size >= _MAX_TABLE:
                break
            size *= 2
        cut = min(cut + 1, size)
        cdf = cdf[:cut].copy()
        cdf[-1] = 1.0
        return SamplerPlan(
            backend.KIND_TABLE, 0.0, 0.0, np.arange(cut, dtype=float), cdf
        )


@dataclass(frozen=True)
class Pareto:
    """Continuous power law: P(X > x) = (x / xmin)^-shape for x >= xmin."""

    shape: float
    xmin: float

    def __post_init__(self):
        if not (self.shape > 0 and math.isfinite(self.shape)):
            raise ConfigError("pareto shape must be positive and finite")
        if not (self.xmin > 0 and math.isfinite(self.xmin)):
            raise ConfigError("pareto xmin must be positive and finite")

    def mean(self) -> float:
        if self.shape <= 1.0:
            return INF
        return self.shape * self.xmin / (self.shape - 1.0)

    def log_mgf(self, lam: float) -> float:
        if lam > 0:
            return INF
        if lam == 0:
            return 0.0
        # E[e^{lam X}] = k t0^k Gamma(-k, t0) with t0 = -lam*xmin; mpmath
        # evaluates the incomplete gamma at negative order to full accuracy.
        k = self.shape
        t0 = -lam * self.xmin
        val = mpmath.log(k * mpmath.power(t0, k) * mpmath.gammainc(-k, t0, mpmath.inf))
        return float(val)

    def support_min(self) -> float:
        return self.xmin

    def support_max(self) -> float:
        return INF

    def atom_at(self, x: float) -> float:
        return 0.0

    def _plan(self) -> SamplerPlan:
        return SamplerPlan(backend.KIND_PARETO, self.xmin, self.shape, _EMPTY, _EMPTY)


@dataclass(frozen=True)
class Zeta:
    """Discrete power law on {1, 2, ...}: P(X = k) proportional to k^-tau."""

    tau: float

    def __post_init__(self):
        if not (self.tau > 1 and math.isfinite(self.tau)):
            raise ConfigError("zeta exponent must exceed 1")

    def mean(self) -> float:
        if self.tau <= 2.0:
            return INF
        return float(special.zeta(self.tau - 1.0) / special.zeta(self.tau))

    def log_mgf(self, lam: float) -> float:
        if lam > 0:
            return INF
        if lam == 0:
            return 0.0
        if lam < -500.0:
            # polylog argument underflows; only the first term survives
            return lam - float(mpmath.log(mpmath.zeta(self.tau)))
        val = mpmath.log(
            mpmath.polylog(self.tau, math.exp(lam)) / mpmath.zeta(self.tau)
        )
        return float(val)

    def support_min(self) -> float:
        return 1.0

    def support_max(self) -> float:
        return INF

    def atom_at(self, x: float) -> float:
        if x < 1 or x != int(x):
            return 0.0
        return float(x ** (-self.tau) / special.zeta(self.tau))

    def _plan(self) -> SamplerPlan:
        return SamplerPlan(backend.KIND_ZETA, self.tau, 2.0 ** (self.tau - 1.0), _EMPTY, _EMPTY)


Dist = Union[Constant, FiniteLattice, Poisson, Pareto, Zeta]

_HEAVY_TAILED = (Pareto, Zeta)


def is_heavy_tailed(d: Dist) -> bool:
    """True when the tail is regularly varying (log-MGF infinite for lam > 0)."""
    return isinstance(d, _HEAVY_TAILED)


@functools.lru_cache(maxsize=512)
def sampler_plan(d: Dist) -> SamplerPlan:
    return d._plan()


def sample(d: Dist, stream: RandomStream) -> float:
    """One draw; the value is a pure function of (seed, draw index)."""
    return float(sample_array(d, stream.key, stream.take(1))[0])


def sample_array(d: Dist, key: int, ctrs: np.ndarray) -> np.ndarray:
    """One draw per counter, using the active kernel backend."""
    return backend.sample(*sampler_plan(d).args(), key, ctrs)


def mean(d: Dist) -> float:
    return d.mean()


def log_mgf(d: Dist, lam: float) -> float:
    """log E[exp(lam X)], possibly +inf."""
    return d.log_mgf(lam)


def prob_below(d: Dist, x: float) -> float:
    """P(X < x), exact per family."""
    if x <= d.support_min():
        return 0.0
    if isinstance(d, Constant):
        return 1.0 if d.value < x else 0.0
    if isinstance(d, FiniteLattice):
        return math.fsum(p for v, p in d.atoms if v < x)
    if isinstance(d, Poisson):
        return float(stats.poisson.cdf(math.ceil(x) - 1, d.mean_value))
    if isinstance(d, Pareto):
        return 1.0 - (d.xmin / x) ** d.shape
    if isinstance(d, Zeta):
        top = math.ceil(x) - 1
        return math.fsum(d.atom_at(float(k)) for k in range(1, top + 1))
    raise TypeError(f"unknown distribution {d!r}")


# --- JSON wire format ------------------------------------------------------

def dist_to_json(d: Dist) -> dict:
    if isinstance(d, Constant):
        return {"kind": "constant", "value": d.value}
    if isinstance(d, FiniteLattice):
        return {"kind": "finite", "atoms": [[v, p] for v, p in d.atoms]}
    if isinstance(d, Poisson):
        return {"kind": "poisson", "mean": d.mean_value}
    if isinstance(d, Pareto):
        return {"kind": "pareto", "shape": d.shape, "xmin": d.xmin}
    if isinstance(d, Zeta):
        return {"kind": "zeta", "tau": d.tau}
    raise TypeError(f"unknown distribution {d!r}")


def dist_from_json(obj) -> Dist:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("distribution must be an object with a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "constant":
            return Constant(float(obj["value"]))
        if kind == "finite":
            return FiniteLattice(tuple((float(v), float(p)) for v, p in obj["atoms"]))
        if kind == "poisson":
            return Poisson(float(obj["mean"]))
        if kind == "pareto":
            return Pareto(float(obj["shape"]), float(obj["xmin"]))
        if kind == "zeta":
            return Zeta(float(obj["tau"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad {kind} distribution: {exc}") from exc
    raise ConfigError(f"unknown distribution kind {kind!r}")
