"""Ray chains for the complete and boundary schemes.

Along a single root-to-boundary ray, complete routing is described by a
Markov chain that tracks the remaining range of the signal, boundary
routing by one that tracks the strength of the most recent relay.  Both are
absorbed once the tracked value would go negative.  The scheme survives on
the tree when the chain's alive-probability decay rate is below log m.

Two estimators are provided: an exact spectral one for finite lattice state
spaces (the decay rate is minus the log spectral radius of the alive block
of the transition matrix) and a fixed-population splitting estimator for
everything else.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import eigs as sparse_eigs

from . import backend
from .distributions import Constant, Dist, FiniteLattice, INF
from .errors import (
    DegenerateExtinction,
    NotLatticeFinite,
    PreconditionError,
)
from .model import ModelConfig, Verdict
from .rng import (
    TAG_SPLIT_COST,
    TAG_SPLIT_RESAMPLE,
    TAG_SPLIT_STRENGTH,
    derive_seed,
    stream_key,
)

_MAX_STATES = 200_000
_POWER_TOL = 1e-14  # stationarity of the normalized iteration vector
_POWER_MAX_ITER = 1_000_000
_DENSE_LIMIT = 1500


class ChainKind(str, enum.Enum):
    """Wire tags follow the report format: W = complete, U = boundary."""

    COMPLETE = "W"
    BOUNDARY = "U"


def complete_step(value: float | None, strength: float, cost: float) -> float | None:
    """Advance the remaining-range chain one hop; None is the absorbing
    dead state.  Equivalent to max(value, strength) - cost when that is
    nonnegative."""
    if value is None:
        return None
    nxt = (strength if strength > value else value) - cost
    return nxt if nxt >= 0 else None


def boundary_step(value: float | None, relay_strength: float, cost: float) -> float | None:
    """Advance the relayed-signal chain one hop.  The running budget is
    spent first; only when it cannot cover the hop does the previous vertex
    relay with its own strength."""
    if value is None:
        return None
    kept = value - cost
    if kept >= 0:
        return kept
    fresh = relay_strength - cost
    return fresh if fresh >= 0 else None


@dataclass
class DecayEstimate:
    """Estimated (or exact) alive-probability decay rate of a ray chain,
    with the induced verdict for the scheme on an m-ary tree."""

    chain: ChainKind
    rate: float
    ci_half_width: float
    method: str  # "spectral" | "splitting"
    verdict: Verdict
    n: int | None = None
    particles: int | None = None
    reps: int | None = None
    burn_in: int | None = None
    lower_bound_reps: int = 0
    states: int | None = None

    def to_json(self) -> dict:
        out = {
            "chain": self.chain.value,
            "rate": "inf" if math.isinf(self.rate) else self.rate,
            "ci": self.ci_half_width,
            "method": self.method,
            "verdict": self.verdict.value,
        }
        for key in ("n", "particles", "reps", "burn_in", "states"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.lower_bound_reps:
            out["lower_bound_reps"] = self.lower_bound_reps
        return out


def verdict_from_rate(rate: float, ci: float, m: int) -> Verdict:
    """Decide strictly through the confidence interval, never the point
    estimate; exact rates carry ci = 0."""
    log_m = math.log(m)
    if rate + ci < log_m:
        return Verdict.SURVIVES
    if rate - ci > log_m:
        return Verdict.DIES
    return Verdict.CRITICAL


# --- exact spectral route ---------------------------------------------------

def _float_gcd(values, rel_tol=1e-9):
    g = 0.0
    scale = max((abs(v) for v in values), default=0.0)
    if scale == 0.0:
        return 1.0
    for v in values:
        a, b = g, abs(v)
        while b > rel_tol * scale:
            a, b = b, math.fmod(a, b)
        g = a
    return g if g > 0 else 1.0


def _lattice_atoms(d: Dist):
    if isinstance(d, Constant):
        return [(d.value, 1.0)]
    if isinstance(d, FiniteLattice):
        return list(d.atoms)
    return None


def _common_lattice(cfg: ModelConfig):
    """Rescale both supports to a common integer lattice.

    Returns (strength atoms, cost atoms) with integer values, or raises
    NotLatticeFinite when the supports are unbounded, non-commensurable, or
    would need too many states.
    """
    r_atoms = _lattice_atoms(cfg.strength)
    c_atoms = _lattice_atoms(cfg.cost)
    if r_atoms is None or c_atoms is None:
        raise NotLatticeFinite("supports are not finite lattices")
    values = [v for v, _ in r_atoms + c_atoms]
    g = _float_gcd(values)
    scaled = []
    for v in values:
        q = v / g
        if abs(q - round(q)) > 1e-6:
            raise NotLatticeFinite("supports are not commensurable")
        scaled.append(int(round(q)))
    if max(scaled, default=0) + 1 > _MAX_STATES:
        raise NotLatticeFinite("lattice state space too large")
    nr = len(r_atoms)
    r_int = [(scaled[i], p) for i, (_, p) in enumerate(r_atoms)]
    c_int = [(scaled[nr + i], p) for i, (_, p) in enumerate(c_atoms)]
    return r_int, c_int


def _reachable_matrix(cfg: ModelConfig, chain: ChainKind):
    """Sub-stochastic transition matrix over alive states reachable from 0."""
    r_int, c_int = _common_lattice(cfg)
    relay = chain is ChainKind.BOUNDARY

    def successors(state: int):
        out = {}
        for r, pr in r_int:
            for c, pc in c_int:
                if relay:
                    nxt = state - c if state - c >= 0 else r - c
                else:
                    nxt = max(state, r) - c
                if nxt >= 0:
                    out[nxt] = out.get(nxt, 0.0) + pr * pc
        return out

    index = {0: 0}
    order = [0]
    rows = []
    head = 0
    while head < len(order):
        state = order[head]
        head += 1
        moves = successors(state)
        for nxt in moves:
            if nxt not in index:
                if len(index) >= _MAX_STATES:
                    raise NotLatticeFinite("lattice state space too large")
                index[nxt] = len(order)
                order.append(nxt)
        rows.append(moves)
    size = len(order)
    data, indices, indptr = [], [], [0]
    for moves in rows:
        for nxt, p in sorted(moves.items()):
            indices.append(index[nxt])
            data.append(p)
        indptr.append(len(indices))
    mat = csr_matrix((data, indices, indptr), shape=(size, size))
    return mat


def _perron_radius(mat: csr_matrix) -> float:
    """Spectral radius of a nonnegative matrix by shifted power iteration.

    The +I shift damps an oscillating subdominant eigenvalue; convergence
    is judged on stationarity of the normalized iteration vector, which is
    immune to the transient sign flips of the eigenvalue quotient.  On
    stagnation (defective or near-tied dominant pair) we fall back to a
    dense/Arnoldi eigensolver.
    """
    size = mat.shape[0]
    if size == 1:
        return float(mat[0, 0])
    op = mat.toarray() if size <= _DENSE_LIMIT else mat
    x = np.full(size, 1.0 / size)
    for _ in range(_POWER_MAX_ITER):
        y = op @ x + x  # (Q + I) x
        total = float(y.sum())
        if total <= 0.0:
            return 0.0
        y /= total
        done = float(np.max(np.abs(y - x))) <= _POWER_TOL
        x = y
        if done:
            return max(total - 1.0, 0.0)
    if size <= 2000:
        eigvals = np.linalg.eigvals(mat.toarray())
    else:
        eigvals = sparse_eigs(mat, k=1, which="LM", return_eigenvectors=False)
    return float(np.max(np.abs(eigvals)))


def spectral_decay(cfg: ModelConfig, chain: ChainKind) -> DecayEstimate:
    """Exact decay rate for finite-lattice configurations.

    Raises NotLatticeFinite when the preconditions fail, signalling the
    caller to fall back to the splitting estimator.
    """
    mat = _reachable_matrix(cfg, chain)
    rho = _perron_radius(mat)
    if rho <= 0.0:
        rate = INF
    elif rho >= 1.0:
        rate = 0.0
    else:
        rate = -math.log(rho)
    return DecayEstimate(
        chain=chain,
        rate=rate,
        ci_half_width=0.0,
        method="spectral",
        verdict=verdict_from_rate(rate, 0.0, cfg.m),
        states=mat.shape[0],
    )


def alive_probability(cfg: ModelConfig, chain: ChainKind, n: int) -> float:
    """P(chain started at 0 is still alive after n hops), exact up to
    accumulated floating error."""
    if n < 0:
        raise PreconditionError("n must be nonnegative")
    mat_t = _reachable_matrix(cfg, chain).T.tocsr()
    vec = np.zeros(mat_t.shape[0])
    vec[0] = 1.0
    for _ in range(n):
        vec = mat_t @ vec
    return float(vec.sum())


# --- splitting estimator ----------------------------------------------------

def splitting_decay(
    cfg: ModelConfig,
    chain: ChainKind,
    n: int = 200,
    particles: int = 10_000,
    reps: int = 20,
    seed: int = 1,
    burn_in: int | None = None,
) -> DecayEstimate:
    """Fixed-population splitting estimate of the decay rate.

    Each repetition advances `particles` chains started at 0, records the
    surviving fraction per step, and resamples survivors back to full size;
    the rate estimate averages -log of the per-step fractions.  The first
    `burn_in` steps (default n/2) are discarded: they carry the transient
    of the population relaxing toward the quasi-stationary law, which
    would otherwise bias the estimate by O(1/n), larger than the reported
    confidence interval at the default settings.

    Lattice chains can be periodic (the per-step fractions then cycle
    forever), so each repetition averages the windowed mean over twelve
    boundary phases - exact cancellation for any period dividing 12 - and
    the residual phase spread is added to the confidence half-width.

    A repetition whose population dies out contributes only a lower bound
    on the rate; the verdict then never claims survival.
    """
    if n < 50:
        raise PreconditionError("n must be at least 50")
    if particles < 1_000:
        raise PreconditionError("particles must be at least 1000")
    if reps < 10:
        raise PreconditionError("reps must be at least 10")
    if burn_in is None:
        burn_in = n // 2
    if burn_in >= n:
        raise PreconditionError("burn_in must be smaller than n")

    from .distributions import sampler_plan

    plan_r = sampler_plan(cfg.strength).args()
    plan_c = sampler_plan(cfg.cost).args()
    code = backend.CHAIN_RELAY if chain is ChainKind.BOUNDARY else backend.CHAIN_RANGE

    shifts = min(12, burn_in)
    estimates = np.empty(reps)
    phase_means = np.zeros(shifts)
    phase_count = 0
    lower_bound_reps = 0
    died_early = 0
    for rep in range(reps):
        rep_seed = derive_seed(seed, rep)
        logf, extinct = backend.splitting_rep(
            plan_r,
            plan_c,
            code,
            n,
            particles,
            stream_key(rep_seed, TAG_SPLIT_STRENGTH),
            stream_key(rep_seed, TAG_SPLIT_COST),
            stream_key(rep_seed, TAG_SPLIT_RESAMPLE),
        )
        if extinct >= 0:
            # all particles died at step `extinct`: the surviving fraction
            # there was below 1/particles, so this bounds the rate from below
            bound = -(float(np.sum(logf)) + math.log(1.0 / particles)) / n
            estimates[rep] = bound
            lower_bound_reps += 1
            if extinct < 10:
                died_early += 1
        else:
            phased = np.array(
                [-float(np.mean(logf[burn_in - j : n - j])) for j in range(shifts)]
            )
            estimates[rep] = float(phased.mean())
            phase_means += phased
            phase_count += 1
    if died_early == reps:
        raise DegenerateExtinction(
            "every repetition died before step 10; increase particles or "
            "reduce n for this configuration"
        )

    rate = float(np.mean(estimates))
    ci = 3.0 * float(np.std(estimates, ddof=1)) / math.sqrt(reps)
    if phase_count > 0:
        phase_means /= phase_count
        ci += 0.5 * float(phase_means.max() - phase_means.min())
    if lower_bound_reps > 0:
        verdict = (
            Verdict.DIES if rate - ci > math.log(cfg.m) else Verdict.CRITICAL
        )
    else:
        verdict = verdict_from_rate(rate, ci, cfg.m)
    return DecayEstimate(
        chain=chain,
        rate=rate,
        ci_half_width=ci,
        method="splitting",
        verdict=verdict,
        n=n,
        particles=particles,
        reps=reps,
        burn_in=burn_in,
        lower_bound_reps=lower_bound_reps,
    )
