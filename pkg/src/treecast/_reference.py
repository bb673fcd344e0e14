"""NumPy reference implementations of the hot kernels.

`treecast._accel` (Cython) implements the same functions; both derive every
random quantity from the same (key, counter) pure function, so a fused
compiled loop and the vectorized loop below produce the same draws.

Outputs are bit-identical across backends for table-backed distributions
(constant, finite lattice, Poisson).  The power-law samplers go through
``pow``, where numpy and libm may round the last ulp differently; within one
backend they are fully deterministic.
"""
from __future__ import annotations

import numpy as np

from .rng import GOLDEN, SUBSTREAM

_U64 = np.uint64
_GOLDEN = _U64(GOLDEN)
_SUB = _U64(SUBSTREAM)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)
_TWO53 = 2.0**-53

# sampler plan kinds
KIND_CONSTANT = 0
KIND_TABLE = 1
KIND_PARETO = 2
KIND_ZETA = 3

# ray chains
CHAIN_RANGE = 0  # complete routing: tracks the remaining range of a signal
CHAIN_RELAY = 1  # boundary routing: tracks the strength of a relayed signal


def _mix64(z):
    z = (z ^ (z >> _U64(30))) * _M1
    z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


def raw64(key, ctrs):
    ctrs = np.ascontiguousarray(ctrs, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(_U64(key) + ctrs * _GOLDEN)


def _raw64_sub(key, ctrs, attempt):
    with np.errstate(over="ignore"):
        return _mix64(raw64(key, ctrs) + _U64(attempt + 1) * _SUB)


def _to_uniform(words):
    return ((words >> _U64(11)).astype(np.float64) + 0.5) * _TWO53


def uniforms(key, ctrs):
    """Uniforms on (0, 1), one per counter."""
    return _to_uniform(raw64(key, ctrs))


def sample(kind, a, b, values, cdf, key, ctrs):
    """Draw once per counter from the planned distribution."""
    ctrs = np.ascontiguousarray(ctrs, dtype=np.uint64)
    if kind == KIND_CONSTANT:
        return np.full(ctrs.shape[0], a)
    if kind == KIND_TABLE:
        u = uniforms(key, ctrs)
        return values[np.searchsorted(cdf, u, side="right")]
    if kind == KIND_PARETO:
        u = uniforms(key, ctrs)
        return a * (1.0 - u) ** (-1.0 / b)
    if kind == KIND_ZETA:
        return _sample_zeta(a, b, key, ctrs)
    raise ValueError(f"unknown sampler kind {kind}")


def _sample_zeta(tau, bpow, key, ctrs):
    # Devroye's inversion-rejection for the Zipf law; each draw consumes
    # pairs of words from its private subsequence until one is accepted.
    out = np.empty(ctrs.shape[0])
    pending = np.arange(ctrs.shape[0])
    inv_exp = -1.0 / (tau - 1.0)
    for attempt in range(1024):
        c = ctrs[pending]
        u = _to_uniform(_raw64_sub(key, c, 2 * attempt))
        v = _to_uniform(_raw64_sub(key, c, 2 * attempt + 1))
        x = np.floor(u**inv_exp)
        t = (1.0 + 1.0 / x) ** (tau - 1.0)
        accept = v * x * (t - 1.0) / (bpow - 1.0) <= t / bpow
        out[pending[accept]] = x[accept]
        pending = pending[~accept]
        if pending.size == 0:
            return out
    raise RuntimeError("zeta sampler did not accept within 1024 attempts")


def splitting_rep(plan_r, plan_c, chain, n, num, key_r, key_c, key_res):
    """One splitting repetition of `num` coupled ray chains over `n` steps.

    Returns (per-step log survival fractions, extinction step or -1).  The
    population is resampled back to full size after every step; draw
    counters are laid out as (step-1)*num + particle so the compiled
    backend can fuse the whole loop and still see the same randomness.
    """
    pop = np.zeros(num)
    logf = np.empty(n)
    lanes = np.arange(num, dtype=np.uint64)
    for step in range(1, n + 1):
        ctrs = _U64((step - 1) * num) + lanes
        r = sample(*plan_r, key_r, ctrs)
        c = sample(*plan_c, key_c, ctrs)
        if chain == CHAIN_RELAY:
            kept = pop - c
            vals = np.where(kept >= 0.0, kept, r - c)
        else:
            vals = np.maximum(pop, r) - c
        alive = vals >= 0.0
        k = int(alive.sum())
        if k == 0:
            return logf[: step - 1].copy(), step
        logf[step - 1] = np.log(k / num)
        survivors = vals[alive]
        u = uniforms(key_res, ctrs)
        pick = np.minimum((u * k).astype(np.int64), k - 1)
        pop = survivors[pick]
    return logf, -1


def tree_level(plan_r, plan_c, m, key_r, key_c, ids, v, va, w, wa, u, ua):
    """Expand one level of the coupled tree run.

    Vertex strengths are keyed by the parent id and edge costs by the child
    id, so weights depend on tree position only, never on traversal order.
    Dead values are canonicalized to -1 to keep reports byte-stable.
    """
    ids = np.ascontiguousarray(ids, dtype=np.uint64)
    r_par = sample(*plan_r, key_r, ids)
    with np.errstate(over="ignore"):
        cids = (
            (ids * _U64(m))[:, None] + _U64(1) + np.arange(m, dtype=np.uint64)[None, :]
        ).ravel()
    r = np.repeat(r_par, m)
    c = sample(*plan_c, key_c, cids)

    vv = np.repeat(v, m)
    nv = vv + r - c
    nva = np.repeat(va, m) & (nv >= 0.0)

    ww = np.repeat(w, m)
    nw = np.maximum(ww, r) - c
    nwa = np.repeat(wa, m) & (nw >= 0.0)

    uu = np.repeat(u, m)
    kept = uu - c
    nu = np.where(kept >= 0.0, kept, r - c)
    nua = np.repeat(ua, m) & (nu >= 0.0)

    nv = np.where(nva, nv, -1.0)
    nw = np.where(nwa, nw, -1.0)
    nu = np.where(nua, nu, -1.0)
    return cids, nv, nva, nw, nwa, nu, nua


def brw_level(plan_r, plan_c, m, key_r, key_c, ids, v):
    """Expand one level of the unkilled walk (no absorption at zero)."""
    ids = np.ascontiguousarray(ids, dtype=np.uint64)
    r_par = sample(*plan_r, key_r, ids)
    with np.errstate(over="ignore"):
        cids = (
            (ids * _U64(m))[:, None] + _U64(1) + np.arange(m, dtype=np.uint64)[None, :]
        ).ravel()
    c = sample(*plan_c, key_c, cids)
    nv = np.repeat(v, m) + np.repeat(r_par, m) - c
    return cids, nv
