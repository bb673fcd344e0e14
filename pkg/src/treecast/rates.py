"""Large-deviation route for the augmented scheme.

The net gain of one hop is strength minus cost.  Its log-MGF, the
right-sided rate function (the Legendre transform restricted to nonnegative
tilts), and the induced front speed decide whether an amplified signal can
stay nonnegative along some ray of the m-ary tree: the scheme survives
exactly when the rate at zero is below log m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import optimize

from .distributions import INF, is_heavy_tailed, log_mgf, mean
from .errors import InternalConsistencyError, NonConvergence, PreconditionError
from .model import ModelConfig, Verdict

LAMBDA_CAP = 700.0  # exp overflow threshold for doubles
CRITICAL_BAND = 1e-7  # |rate - log m| inside this band is reported critical
_VALUE_TOL = 1e-9
_GRID_POINTS = 33

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def log_mgf_gain(cfg: ModelConfig, lam: float) -> float:
    """log E[exp(lam * (strength - cost))] for lam >= 0, possibly +inf."""
    if lam < 0:
        raise ValueError("gain log-MGF is only used with nonnegative tilts")
    return log_mgf(cfg.strength, lam) + log_mgf(cfg.cost, -lam)


def _gain_mgf_always_infinite(cfg: ModelConfig) -> bool:
    # heavy-tailed strength makes every positive tilt infinite
    return is_heavy_tailed(cfg.strength)


def _gain_top(cfg: ModelConfig):
    """(essential sup of the gain, probability of attaining it).

    The sup is finite exactly when the strength law is bounded; the
    attaining probability is the product of the boundary atoms (zero when
    the cost law is continuous at its minimum).
    """
    r, c = cfg.strength, cfg.cost
    top = r.support_max() - c.support_min()
    if not math.isfinite(top):
        return top, 0.0
    p = r.atom_at(r.support_max()) * c.atom_at(c.support_min())
    return top, p


def _golden_max(f, lo: float, hi: float, xtol: float):
    """Golden-section maximization of a concave function on [lo, hi].

    Returns (argmax, max).  Tracks the best evaluated point so the returned
    value never undershoots an evaluation.
    """
    a, b = lo, hi
    h = b - a
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    yc, yd = f(c), f(d)
    best_x, best_y = (c, yc) if yc >= yd else (d, yd)
    while h > xtol:
        if yc >= yd:
            b, d, yd = d, c, yc
            h = b - a
            c = a + _INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + _INV_PHI * h
            yd = f(d)
        if yc > best_y:
            best_x, best_y = c, yc
        if yd > best_y:
            best_x, best_y = d, yd
    return best_x, best_y


def rate_function(cfg: ModelConfig, s: float) -> float:
    """Right-sided rate of upper deviations of the mean gain: the exponential
    cost per level of keeping the running gain at or above s."""
    if _gain_mgf_always_infinite(cfg):
        return 0.0  # supremum is pinned at tilt zero

    mean_gain = mean(cfg.strength) - mean(cfg.cost)
    if not math.isnan(mean_gain) and s <= mean_gain:
        return 0.0  # no upper deviation needed

    top_gain, top_prob = _gain_top(cfg)
    if math.isfinite(top_gain):
        if s > top_gain + 1e-12:
            return INF
        if s >= top_gain - 1e-12:
            return INF if top_prob == 0.0 else -math.log(top_prob)

    def objective(lam: float) -> float:
        return lam * s - log_mgf_gain(cfg, lam)

    # expand a bracket by doubling until the concave objective turns over
    lo, hi = 0.0, 1.0
    y_prev = objective(0.0)
    while hi <= LAMBDA_CAP:
        y = objective(hi)
        if y < y_prev:
            break
        lo, y_prev = hi / 2.0, y
        hi *= 2.0
    else:
        if math.isfinite(top_gain) and top_prob > 0.0:
            # limit slope s - top_gain is ~0 here; the limit value is exact
            return -math.log(top_prob)
        raise NonConvergence(
            "rate objective still increasing at the tilt cap; "
            "no analytic limit available for this configuration"
        )
    hi = min(hi, LAMBDA_CAP)
    _, best = _golden_max(objective, max(0.0, lo / 2.0), hi, xtol=1e-10 * max(1.0, hi))
    return max(best, 0.0)


def front_speed(cfg: ModelConfig) -> float:
    """Largest s whose rate does not exceed log m: the asymptotic speed of
    the maximal particle of the unkilled walk.  May be +inf."""
    if cfg.m < 2:
        raise PreconditionError("front speed is defined for m >= 2")
    if _gain_mgf_always_infinite(cfg):
        return INF
    log_m = math.log(cfg.m)

    top_gain, _ = _gain_top(cfg)
    if math.isfinite(top_gain):
        if rate_function(cfg, top_gain) <= log_m:
            return top_gain
        hi = top_gain
    else:
        hi = 1.0
        for _ in range(120):
            if rate_function(cfg, hi) > log_m:
                break
            hi *= 2.0
        else:
            raise NonConvergence("no finite bracket for the front speed")

    mean_gain = mean(cfg.strength) - mean(cfg.cost)
    lo = mean_gain if math.isfinite(mean_gain) else min(0.0, hi) - 1.0
    guard = 0
    while rate_function(cfg, lo) > log_m:
        lo -= max(1.0, abs(lo))
        guard += 1
        if guard > 120:
            raise NonConvergence("no finite lower bracket for the front speed")
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if rate_function(cfg, mid) <= log_m:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class RateReport:
    """Rate-function evidence behind an augmented-routing verdict."""

    rate_at_zero: float
    front_speed: float | None  # None when skipped for speed
    verdict: Verdict
    log_branching: float
    corollary_margin: float  # inf over tilts of log(m E[e^{lam R}] E[e^{-lam C}])
    lambda_grid: list[tuple[float, float]] = field(default_factory=list)
    note: str | None = None

    def to_json(self) -> dict:
        enc = lambda x: "inf" if isinstance(x, float) and math.isinf(x) else x
        out = {
            "rate_at_zero": enc(self.rate_at_zero),
            "front_speed": enc(self.front_speed),
            "verdict": self.verdict.value,
            "log_branching": self.log_branching,
            "corollary_margin": enc(self.corollary_margin),
            "lambda_grid": [[lam, enc(val)] for lam, val in self.lambda_grid],
        }
        if self.note:
            out["note"] = self.note
        return out


def _corollary_margin(cfg: ModelConfig) -> float:
    """inf over lam >= 0 of log m + gain log-MGF, minimized independently of
    the rate-function route (Brent on a doubling bracket)."""
    log_m = math.log(cfg.m)
    if _gain_mgf_always_infinite(cfg):
        return log_m  # only lam = 0 is finite

    def h(lam: float) -> float:
        return log_m + log_mgf_gain(cfg, lam)

    lo, hi = 0.0, 1.0
    y_prev = h(0.0)
    while hi <= LAMBDA_CAP:
        y = h(hi)
        if y > y_prev:
            break
        lo, y_prev = hi / 2.0, y
        hi *= 2.0
    hi = min(hi, LAMBDA_CAP)
    res = optimize.minimize_scalar(
        h, bounds=(max(0.0, lo / 2.0), hi), method="bounded",
        options={"xatol": 1e-11 * max(1.0, hi)},
    )
    return min(float(res.fun), h(0.0))


def augmented_verdict(
    cfg: ModelConfig, *, with_front_speed: bool = True, with_grid: bool = True
) -> RateReport:
    """Sharp decision for augmented routing on an m-ary tree (m >= 2).

    Two equivalent criteria are evaluated and must agree: the rate at zero
    versus log m, and the infimum of m E[e^{lam R}] E[e^{-lam C}] versus 1.
    The front speed and the diagnostic tilt grid can be skipped by callers
    that only need the verdict (threshold bisection does many of these).
    """
    if cfg.m < 2:
        raise PreconditionError("augmented verdict needs m >= 2; "
                                "use the single-path rules for m = 1")
    log_m = math.log(cfg.m)

    if cfg.certain_outcome() == "survive":
        # gain never negative: the killed walk cannot die.  The rate route
        # would misclassify the degenerate zero-gain case, so short-circuit.
        return RateReport(
            rate_at_zero=0.0,
            front_speed=front_speed(cfg) if with_front_speed else None,
            verdict=Verdict.SURVIVES,
            log_branching=log_m,
            corollary_margin=_corollary_margin(cfg),
            lambda_grid=_mgf_grid(cfg) if with_grid else [],
            note="strength dominates cost almost surely",
        )

    rate0 = rate_function(cfg, 0.0)
    margin = _corollary_margin(cfg)
    diff = log_m - rate0

    if abs(diff) <= CRITICAL_BAND:
        verdict = Verdict.CRITICAL
        note = ("within the criticality band; at the exact critical point "
                "the killed walk dies out")
    elif diff > 0:
        verdict = Verdict.SURVIVES
        note = None
    else:
        verdict = Verdict.DIES
        note = None

    # the corollary margin equals log m - rate0 in exact arithmetic
    if abs(diff) > 1e-6 and math.isfinite(rate0):
        margin_cmp = margin if math.isfinite(margin) else log_m
        if diff * margin_cmp < 0 and abs(margin_cmp) > 1e-6:
            raise InternalConsistencyError(
                f"rate criterion ({diff:+.3e}) and product criterion "
                f"({margin_cmp:+.3e}) disagree"
            )

    return RateReport(
        rate_at_zero=rate0,
        front_speed=front_speed(cfg) if with_front_speed else None,
        verdict=verdict,
        log_branching=log_m,
        corollary_margin=margin,
        lambda_grid=_mgf_grid(cfg) if with_grid else [],
        note=note,
    )


def _mgf_grid(cfg: ModelConfig, points: int = _GRID_POINTS) -> list[tuple[float, float]]:
    """Diagnostic curve of the gain log-MGF on a fixed tilt grid."""
    hi = 4.0
    grid = [hi * i / (points - 1) for i in range(points)]
    return [(lam, log_mgf_gain(cfg, lam)) for lam in grid]
