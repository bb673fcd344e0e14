"""Scheme-level verdicts and threshold search.

Dispatches each routing scheme to its decision route (rate function,
spectral chain rate, splitting estimate, or the branching-process check for
constant costs), applies the structural shortcuts that force survival, and
locates critical parameter values for one-parameter families by bisection.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable, Union

from .chains import ChainKind, DecayEstimate, spectral_decay, splitting_decay
from .distributions import (
    Constant,
    Dist,
    FiniteLattice,
    INF,
    Poisson,
    is_heavy_tailed,
    mean,
    prob_below,
)
from .errors import (
    ConfigError,
    InternalConsistencyError,
    NoSignChange,
    NotLatticeFinite,
    PreconditionError,
)
from .model import ModelConfig, Scheme, Verdict
from .rates import RateReport, augmented_verdict
from .rng import derive_seed

_EQ_TOL = 1e-12  # equality band for the branching-process criterion


@dataclass
class SchemeVerdict:
    scheme: Scheme
    verdict: Verdict
    method: str  # rate-function | spectral | splitting | branching-process | m1-special | degenerate
    evidence: Union[RateReport, DecayEstimate, dict]
    note: str | None = None

    def to_json(self) -> dict:
        ev = self.evidence.to_json() if hasattr(self.evidence, "to_json") else self.evidence
        out = {
            "scheme": self.scheme.value,
            "verdict": self.verdict.value,
            "method": self.method,
            "evidence": ev,
        }
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class SchemeError:
    """A scheme whose route failed; other schemes are still reported."""

    scheme: Scheme
    error: str

    def to_json(self) -> dict:
        return {"scheme": self.scheme.value, "error": self.error}


def _enc(x: float):
    return "inf" if math.isinf(x) else x


# --- boundary routing, constant cost ----------------------------------------

def _offspring_terms(d: Dist, cost: float, m: int) -> tuple[float, float]:
    """(E[m^K], P(K = 0)) for K = floor(strength / cost).

    Rescaling the constant cost to 1 and flooring the strength leaves the
    boundary transmission process unchanged, so the check covers
    non-integer and unbounded strength laws too.
    """
    if is_heavy_tailed(d):
        return INF, prob_below(d, cost)
    if isinstance(d, Constant):
        k = math.floor(d.value / cost)
        return float(m) ** k, 1.0 if k == 0 else 0.0
    if isinstance(d, FiniteLattice):
        ev = 0.0
        r0 = 0.0
        for v, p in d.atoms:
            k = math.floor(v / cost)
            ev += p * float(m) ** k
            if k == 0:
                r0 += p
        return ev, r0
    if isinstance(d, Poisson):
        mu = d.mean_value
        r0 = prob_below(d, cost)
        if cost == 1.0:
            try:
                return math.exp(mu * (m - 1)), r0
            except OverflowError:
                return INF, r0
        ev = 0.0
        term = math.exp(-mu)  # pmf(0)
        k = 0
        while k < 200_000:
            contrib = term * float(m) ** math.floor(k / cost)
            ev += contrib
            if ev > 1e280:
                return INF, r0
            if k > mu and contrib < ev * 1e-17:
                break
            k += 1
            term *= mu / k
        return ev, r0
    raise PreconditionError(f"unsupported strength law {type(d).__name__}")


def boundary_branching_check(cfg: ModelConfig) -> SchemeVerdict:
    """Exact boundary-routing verdict when the edge cost is constant.

    The informed wavefront embeds a branching process whose offspring mean
    is E[m^K] - P(K = 0) with K the strength measured in whole hops;
    survival is equivalent to E[m^K] > 1 + P(K = 0), strictly.
    """
    if not isinstance(cfg.cost, Constant) or cfg.cost.value <= 0:
        raise PreconditionError("branching check needs a constant positive cost")
    ev, r0 = _offspring_terms(cfg.strength, cfg.cost.value, cfg.m)
    rhs = 1.0 + r0
    if math.isinf(ev):
        verdict = Verdict.SURVIVES
    elif abs(ev - rhs) <= _EQ_TOL:
        verdict = Verdict.CRITICAL
    elif ev > rhs:
        verdict = Verdict.SURVIVES
    else:
        verdict = Verdict.DIES
    return SchemeVerdict(
        scheme=Scheme.BOUNDARY,
        verdict=verdict,
        method="branching-process",
        evidence={
            "criterion_lhs": _enc(ev),
            "criterion_rhs": rhs,
            "offspring_mean": _enc(ev - r0),
        },
    )


# --- m = 1 special cases -----------------------------------------------------

def single_path_verdict(cfg: ModelConfig, scheme: Scheme) -> SchemeVerdict:
    """Verdicts on the single infinite path (m = 1), where the general
    machinery does not apply."""
    if cfg.m != 1:
        raise PreconditionError("single-path rules require m = 1")

    trivial = cfg.certain_outcome()
    evidence = {
        "mean_strength": _enc(mean(cfg.strength)),
        "mean_cost": _enc(mean(cfg.cost)),
    }
    if trivial == "survive":
        return SchemeVerdict(scheme, Verdict.SURVIVES, "m1-special", evidence,
                             note="strength dominates cost almost surely")
    if trivial == "die":
        return SchemeVerdict(scheme, Verdict.DIES, "m1-special", evidence,
                             note="cost exceeds strength almost surely")

    m_r, m_c = mean(cfg.strength), mean(cfg.cost)
    if scheme is Scheme.BOUNDARY:
        return SchemeVerdict(scheme, Verdict.DIES, "m1-special", evidence,
                             note="a too-weak relay is eventually hit on the path")
    if scheme is Scheme.AUGMENTED:
        if math.isinf(m_r) and math.isinf(m_c):
            return SchemeVerdict(scheme, Verdict.CRITICAL, "m1-special", evidence,
                                 note="both means infinite: either outcome is possible")
        if m_r > m_c:
            return SchemeVerdict(scheme, Verdict.SURVIVES, "m1-special", evidence)
        return SchemeVerdict(scheme, Verdict.DIES, "m1-special", evidence)
    # complete routing
    if math.isfinite(cfg.strength.support_max()):
        return SchemeVerdict(scheme, Verdict.DIES, "m1-special", evidence,
                             note="bounded strength cannot outlast a bad stretch")
    if not math.isinf(m_r) and m_r <= m_c:
        return SchemeVerdict(scheme, Verdict.DIES, "m1-special", evidence)
    return SchemeVerdict(scheme, Verdict.CRITICAL, "m1-special", evidence,
                         note="unbounded strength on a single path: undecided regime")


# --- structural shortcuts ----------------------------------------------------

def _structural_shortcut(cfg: ModelConfig) -> str | None:
    """Reason string when a structural fact forces survival of boundary
    routing (and therefore of all schemes)."""
    if cfg.m < 2:
        return None
    if is_heavy_tailed(cfg.strength):
        return "strength tail is regularly varying"
    if cfg.cost.atom_at(0.0) >= 1.0 / cfg.m:
        return "cost atom at zero is at least 1/m"
    return None


# --- per-scheme dispatch ------------------------------------------------------

def _mc_params(mc: dict | None) -> dict:
    out = {"n": 200, "particles": 10_000, "reps": 20}
    if mc:
        out.update(mc)
    return out


def scheme_verdict(
    cfg: ModelConfig,
    scheme: Scheme,
    seed: int = 1,
    mc: dict | None = None,
    fast: bool = False,
) -> SchemeVerdict:
    """Verdict for one scheme, preferring exact routes over Monte Carlo.

    `fast` trims diagnostic extras (front speed, tilt grid) from the
    augmented evidence; bisection loops use it.
    """
    if cfg.m == 1:
        return single_path_verdict(cfg, scheme)

    trivial = cfg.certain_outcome()
    if trivial is not None:
        verdict = Verdict.SURVIVES if trivial == "survive" else Verdict.DIES
        note = ("strength dominates cost almost surely" if trivial == "survive"
                else "cost exceeds strength almost surely")
        return SchemeVerdict(scheme, verdict, "degenerate",
                             {"trivial_regime": trivial}, note=note)

    if scheme is Scheme.AUGMENTED:
        report = augmented_verdict(cfg, with_front_speed=not fast,
                                   with_grid=not fast)
        return SchemeVerdict(scheme, report.verdict, "rate-function", report,
                             note=report.note)

    shortcut = _structural_shortcut(cfg)
    if shortcut is not None:
        cross = _cheap_exact_verdict(cfg, scheme)
        if cross is not None and cross.verdict is Verdict.DIES:
            raise InternalConsistencyError(
                f"structural shortcut ({shortcut}) contradicts the exact "
                f"{cross.method} route for {scheme.value}"
            )
        evidence = cross.evidence if cross is not None else {"shortcut": shortcut}
        method = cross.method if cross is not None else "branching-process"
        return SchemeVerdict(scheme, Verdict.SURVIVES, method, evidence,
                             note=shortcut)

    if scheme is Scheme.BOUNDARY and isinstance(cfg.cost, Constant) and cfg.cost.value > 0:
        return boundary_branching_check(cfg)

    chain = ChainKind.COMPLETE if scheme is Scheme.COMPLETE else ChainKind.BOUNDARY
    try:
        est = spectral_decay(cfg, chain)
        return SchemeVerdict(scheme, est.verdict, "spectral", est)
    except NotLatticeFinite:
        est = splitting_decay(cfg, chain, seed=seed, **_mc_params(mc))
        return SchemeVerdict(scheme, est.verdict, "splitting", est)


def _cheap_exact_verdict(cfg: ModelConfig, scheme: Scheme) -> SchemeVerdict | None:
    """Exact route for cross-checking a shortcut, when one is cheap."""
    if scheme is Scheme.BOUNDARY and isinstance(cfg.cost, Constant) and cfg.cost.value > 0:
        return boundary_branching_check(cfg)
    chain = ChainKind.COMPLETE if scheme is Scheme.COMPLETE else ChainKind.BOUNDARY
    try:
        est = spectral_decay(cfg, chain)
    except NotLatticeFinite:
        return None
    return SchemeVerdict(scheme, est.verdict, "spectral", est)


def scheme_report(
    cfg: ModelConfig, seed: int = 1, mc: dict | None = None
) -> list[SchemeVerdict | SchemeError]:
    """All three schemes; a failing route is reported alongside the others
    rather than aborting the whole report."""
    out: list[SchemeVerdict | SchemeError] = []
    for scheme in (Scheme.AUGMENTED, Scheme.COMPLETE, Scheme.BOUNDARY):
        try:
            out.append(scheme_verdict(cfg, scheme, seed=seed, mc=mc))
        except InternalConsistencyError:
            raise
        except Exception as exc:  # noqa: BLE001 - isolate per-scheme failures
            out.append(SchemeError(scheme, f"{type(exc).__name__}: {exc}"))
    return out


# --- parametrized families and threshold search -------------------------------

@dataclass(frozen=True)
class Family:
    """One-parameter family of configurations with a declared survival
    direction (used to sanity-check the endpoints before bisecting)."""

    name: str
    param: str
    lo: float
    hi: float
    make: Callable[[float], ModelConfig]
    survival_increases: bool = True


@dataclass
class ThresholdEstimate:
    theta: float
    half_width: float
    evaluations: int
    stopped_on: str  # tol | critical | budget
    scheme: Scheme
    method: str

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "half_width": self.half_width,
            "evaluations": self.evaluations,
            "stopped_on": self.stopped_on,
            "scheme": self.scheme.value,
            "method": self.method,
        }


def find_threshold(
    family: Family,
    scheme: Scheme,
    tol: float = 1e-4,
    budget: int = 200,
    seed: int = 1,
    mc: dict | None = None,
) -> ThresholdEstimate:
    """Bisection for the survival threshold of `family` under `scheme`.

    Exact routes bisect down to `tol`; a CRITICAL verdict at a midpoint
    means the midpoint already sits inside the decision band, so refinement
    stops there.  Stochastic verdicts make the reported half-width include
    whatever bracket remains.
    """
    if tol <= 0:
        raise PreconditionError("tol must be positive")

    evals = 0

    def verdict_at(theta: float) -> SchemeVerdict:
        nonlocal evals
        evals += 1
        return scheme_verdict(family.make(theta), scheme,
                              seed=derive_seed(seed, evals), mc=mc, fast=True)

    lo, hi = family.lo, family.hi
    v_lo = verdict_at(lo)
    v_hi = verdict_at(hi)
    if v_lo.verdict == v_hi.verdict or Verdict.CRITICAL in (v_lo.verdict, v_hi.verdict):
        raise NoSignChange(
            f"endpoints give {v_lo.verdict.value} / {v_hi.verdict.value}; "
            "need one definite verdict of each kind"
        )
    surviving_end = v_hi.verdict if family.survival_increases else v_lo.verdict
    if surviving_end is not Verdict.SURVIVES:
        raise ConfigError(
            "family direction mismatch: survival was declared "
            + ("increasing" if family.survival_increases else "decreasing")
            + " in the parameter but the endpoints disagree"
        )

    method = v_hi.method
    while hi - lo > tol and evals < budget:
        mid = 0.5 * (lo + hi)
        v_mid = verdict_at(mid)
        method = v_mid.method
        if v_mid.verdict is Verdict.CRITICAL:
            return ThresholdEstimate(mid, 0.5 * (hi - lo), evals, "critical",
                                     scheme, method)
        goes_up = v_mid.verdict is Verdict.SURVIVES
        if goes_up == family.survival_increases:
            hi = mid
        else:
            lo = mid
    stopped = "tol" if hi - lo <= tol else "budget"
    return ThresholdEstimate(0.5 * (lo + hi), 0.5 * (hi - lo), evals, stopped,
                             scheme, method)


# --- perturbation construction -------------------------------------------------

def shift_mass_to_zero(d: FiniteLattice, eps: float) -> FiniteLattice:
    """Move probability mass `eps` from the smallest strictly positive atom
    down to zero, weakening the distribution without touching its tail."""
    if not isinstance(d, FiniteLattice):
        raise PreconditionError("mass shifting is defined for finite lattices")
    positive = [(v, p) for v, p in d.atoms if v > 0.0]
    if not positive:
        raise PreconditionError("no mass above zero to shift")
    vk, pk = positive[0]
    if not 0.0 < eps < pk:
        raise PreconditionError(f"eps must lie in (0, {pk})")
    atoms = dict(d.atoms)
    atoms[vk] = pk - eps
    atoms[0.0] = atoms.get(0.0, 0.0) + eps
    return FiniteLattice(tuple(sorted(atoms.items())))


def boundary_vs_augmented_sweep(cfg: ModelConfig, steps: int = 25):
    """Sweep the mass shift looking for an eps where boundary routing dies
    while augmented routing still survives.

    Returns (eps, boundary verdict, augmented verdict) or None.  Requires a
    constant cost so the boundary side stays exact.
    """
    if not isinstance(cfg.strength, FiniteLattice):
        raise PreconditionError("sweep needs a finite-lattice strength law")
    positive = [(v, p) for v, p in cfg.strength.atoms if v > 0.0]
    if not positive:
        raise PreconditionError("no mass above zero to shift")
    pk = positive[0][1]
    for i in range(1, steps + 1):
        eps = pk * i / (steps + 1)
        shifted = ModelConfig(cfg.m, shift_mass_to_zero(cfg.strength, eps), cfg.cost)
        bond = boundary_branching_check(shifted)
        aug = augmented_verdict(shifted)
        if bond.verdict is Verdict.DIES and aug.verdict is Verdict.SURVIVES:
            return eps, bond, aug
    return None


# --- family JSON ----------------------------------------------------------------

_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd,
)


def _eval_arithmetic(text: str) -> float:
    """Evaluate a plain arithmetic expression (numbers and + - * / ** only)."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"bad expression {text!r}: {exc}") from exc
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ConfigError(f"disallowed syntax in expression {text!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ConfigError(f"non-numeric constant in expression {text!r}")
    return float(eval(compile(tree, "<family>", "eval"), {"__builtins__": {}}))


def _substitute(node, theta: float):
    if isinstance(node, str) and "$theta" in node:
        return _eval_arithmetic(node.replace("$theta", f"({theta!r})"))
    if isinstance(node, dict):
        return {k: _substitute(v, theta) for k, v in node.items()}
    if isinstance(node, list):
        return [_substitute(v, theta) for v in node]
    return node


def family_from_json(obj) -> Family:
    """Family spec: {"name", "param", "range": [lo, hi], "template": {...},
    "increasing": bool}; any number in the template may be the string
    "$theta" or an arithmetic expression containing it."""
    if not isinstance(obj, dict):
        raise ConfigError("family must be a JSON object")
    missing = {"name", "param", "range", "template"} - obj.keys()
    if missing:
        raise ConfigError(f"family missing fields: {sorted(missing)}")
    lo, hi = (float(x) for x in obj["range"])
    if not lo < hi:
        raise ConfigError("family range must satisfy lo < hi")
    template = obj["template"]

    def make(theta: float) -> ModelConfig:
        return ModelConfig.from_json(_substitute(template, theta))

    make(0.5 * (lo + hi))  # validate the template eagerly
    return Family(
        name=str(obj["name"]),
        param=str(obj["param"]),
        lo=lo,
        hi=hi,
        make=make,
        survival_increases=bool(obj.get("increasing", True)),
    )


# --- built-in example families ---------------------------------------------------

def two_point_strength_family(
    m: int, value: float = 2.0, cost: float = 1.0,
    lo: float = 1e-3, hi: float = 0.999,
) -> Family:
    """Strength 0 or `value`; the parameter is the probability of `value`."""

    def make(theta: float) -> ModelConfig:
        return ModelConfig(
            m,
            FiniteLattice(((0.0, 1.0 - theta), (value, theta))),
            Constant(cost),
        )

    return Family(f"two-point-{value:g}", "p_high", lo, hi, make)


def poisson_strength_family(
    m: int, cost: float = 1.0, lo: float = 0.02, hi: float = 4.0
) -> Family:
    """Poisson strength against a constant cost; the parameter is the mean."""

    def make(theta: float) -> ModelConfig:
        return ModelConfig(m, Poisson(theta), Constant(cost))

    return Family("poisson-strength", "mean", lo, hi, make)
