"""Coupled simulation of the three routing schemes on one sampled tree.

All three schemes run on the same weights: vertex strengths are keyed by
the vertex's position index and edge costs by the child's, so pruning or
subsampling one part of the frontier never changes the weights seen
elsewhere.  The per-vertex states obey the coupling invariants exactly in
floating point (augmented value >= remaining range >= relay budget), which
the report checks and counts as `hierarchy_violations`.

`boundary_wavefront` is a literal, synchronized implementation of boundary
routing used as a small-instance oracle against the per-ray recursion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .distributions import sample_array, sampler_plan
from .errors import PreconditionError
from .model import ModelConfig
from .rng import (
    TAG_TREE_COST,
    TAG_TREE_PICK,
    TAG_TREE_STRENGTH,
    derive_seed,
    stream_key,
)

SCHEMES = ("aug", "comp", "bond")


@dataclass
class TreeRunReport:
    """Per-level alive counts for one coupled run.

    Counts are taken before any frontier truncation, so they are exact for
    the untruncated prefix; after a truncated level they (and the survival
    flags) are valid lower bounds.
    """

    depth: int
    seed: int
    frontier_cap: int
    alive_per_level: dict[str, list[int]]
    survived: dict[str, bool]
    hierarchy_violations: int
    truncated: bool
    bond_alive_ids: set[int] | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "seed": self.seed,
            "frontier_cap": self.frontier_cap,
            "alive_per_level": self.alive_per_level,
            "survived": self.survived,
            "hierarchy_violations": self.hierarchy_violations,
            "truncated": self.truncated,
        }

    def csv_rows(self):
        """(level, aug, comp, bond) rows."""
        levels = self.alive_per_level
        for lvl in range(self.depth + 1):
            yield (lvl, levels["aug"][lvl], levels["comp"][lvl], levels["bond"][lvl])


def run_coupled(
    cfg: ModelConfig,
    depth: int,
    seed: int,
    frontier_cap: int = 4096,
    collect_bond_ids: bool = False,
) -> TreeRunReport:
    """Level-order run of all three schemes coupled on one sampled tree.

    When the alive frontier exceeds `frontier_cap`, a uniformly random
    subset (chosen by per-vertex hash keys, hence deterministic and
    order-free) is retained and the report is flagged truncated.
    """
    if depth < 1:
        raise PreconditionError("depth must be at least 1")
    if frontier_cap < 1:
        raise PreconditionError("frontier_cap must be at least 1")

    plan_r = sampler_plan(cfg.strength).args()
    plan_c = sampler_plan(cfg.cost).args()
    key_r = stream_key(seed, TAG_TREE_STRENGTH)
    key_c = stream_key(seed, TAG_TREE_COST)
    key_pick = stream_key(seed, TAG_TREE_PICK)

    ids = np.zeros(1, dtype=np.uint64)
    v = np.zeros(1)
    w = np.zeros(1)
    # The root has no incoming signal: it always relays with its own
    # strength.  A negative starting budget forces the relay branch even
    # over zero-cost edges, where a zero budget would wrongly coast along.
    u = np.full(1, -1.0)
    va = np.ones(1, dtype=bool)
    wa = np.ones(1, dtype=bool)
    ua = np.ones(1, dtype=bool)

    counts = {name: [1] for name in SCHEMES}
    violations = 0
    truncated = False
    bond_ids: set[int] | None = {0} if collect_bond_ids else None

    for _level in range(1, depth + 1):
        if ids.size == 0:
            for name in SCHEMES:
                counts[name].append(0)
            continue
        cids, cv, cva, cw, cwa, cu, cua = backend.tree_level(
            plan_r, plan_c, cfg.m, key_r, key_c, ids, v, va, w, wa, u, ua
        )
        counts["aug"].append(int(cva.sum()))
        counts["comp"].append(int(cwa.sum()))
        counts["bond"].append(int(cua.sum()))

        violations += int(((cua & ~cwa) | (cwa & ~cva)).sum())
        violations += int((cwa & cva & (cv < cw)).sum())
        violations += int((cua & cwa & (cw < cu)).sum())

        if bond_ids is not None:
            bond_ids.update(int(x) for x in cids[cua])

        keep = cva | cwa | cua
        ids, v, va, w, wa, u, ua = (
            cids[keep], cv[keep], cva[keep], cw[keep], cwa[keep], cu[keep], cua[keep]
        )
        if ids.size > frontier_cap:
            truncated = True
            hashes = backend.raw64(key_pick, ids)
            chosen = np.lexsort((ids, hashes))[:frontier_cap]
            chosen.sort()
            ids, v, va, w, wa, u, ua = (
                ids[chosen], v[chosen], va[chosen], w[chosen], wa[chosen],
                u[chosen], ua[chosen],
            )

    survived = {
        "aug": counts["aug"][depth] > 0,
        "comp": counts["comp"][depth] > 0,
        "bond": counts["bond"][depth] > 0,
    }
    return TreeRunReport(
        depth=depth,
        seed=seed,
        frontier_cap=frontier_cap,
        alive_per_level=counts,
        survived=survived,
        hierarchy_violations=violations,
        truncated=truncated,
        bond_alive_ids=bond_ids,
    )


def boundary_wavefront(cfg: ModelConfig, depth: int, seed: int) -> set[int]:
    """Literal synchronized boundary routing on the fully materialized tree.

    Rounds: every informed vertex with an uninformed child forwards to all
    in-range vertices whose path (past the sender) is still uninformed at
    the start of the round.  Budgets are spent edge by edge in the same
    order as the per-ray recursion, so the informed set is exactly
    comparable with `run_coupled`'s relay states.

    Small instances only: m^depth must not exceed 10^6.
    """
    m = cfg.m
    if m**depth > 1_000_000:
        raise PreconditionError("oracle scale exceeded: m^depth must be <= 1e6")
    total = (m ** (depth + 1) - 1) // (m - 1) if m > 1 else depth + 1
    first_leaf = (m**depth - 1) // (m - 1) if m > 1 else depth

    all_ids = np.arange(total, dtype=np.uint64)
    strengths = sample_array(cfg.strength, stream_key(seed, TAG_TREE_STRENGTH), all_ids)
    costs = sample_array(cfg.cost, stream_key(seed, TAG_TREE_COST), all_ids)

    informed = np.zeros(total, dtype=bool)
    informed[0] = True

    def reachable_uninformed(x: int) -> list[int]:
        # DFS below x, spending x's strength edge by edge; branches blocked
        # by an already-informed vertex are skipped entirely.
        found = []
        stack = []
        if x < first_leaf:
            for j in range(m):
                child = x * m + 1 + j
                stack.append((child, strengths[x] - costs[child]))
        while stack:
            y, budget = stack.pop()
            if budget < 0 or informed[y]:
                continue
            found.append(y)
            if y < first_leaf:
                for j in range(m):
                    child = y * m + 1 + j
                    stack.append((child, budget - costs[child]))
        return found

    # initial transmission from the root
    for y in reachable_uninformed(0):
        informed[y] = True

    while True:
        senders = []
        for x in np.nonzero(informed)[0]:
            if x >= first_leaf:
                continue  # children lie beyond the horizon
            base = int(x) * m + 1
            if not informed[base : base + m].all():
                senders.append(int(x))
        fresh: set[int] = set()
        for x in senders:
            fresh.update(reachable_uninformed(x))
        if not fresh:
            break
        for y in fresh:
            informed[y] = True

    return {int(i) for i in np.nonzero(informed)[0]}


def simulate_front_speed(
    cfg: ModelConfig,
    depth: int = 25,
    reps: int = 20,
    seed: int = 1,
    frontier_cap: int = 4096,
) -> float:
    """Monte Carlo estimate of the front speed of the unkilled walk: the
    mean over reps of (max value at `depth`) / depth.

    The frontier keeps the highest-value vertices when capped, so the
    estimate is a slightly low-biased lower bound of the true front.
    """
    if cfg.m < 2:
        raise PreconditionError("front speed needs m >= 2")
    plan_r = sampler_plan(cfg.strength).args()
    plan_c = sampler_plan(cfg.cost).args()

    speeds = np.empty(reps)
    for rep in range(reps):
        rep_seed = derive_seed(seed, rep)
        key_r = stream_key(rep_seed, TAG_TREE_STRENGTH)
        key_c = stream_key(rep_seed, TAG_TREE_COST)
        ids = np.zeros(1, dtype=np.uint64)
        v = np.zeros(1)
        for _level in range(depth):
            ids, v = backend.brw_level(plan_r, plan_c, cfg.m, key_r, key_c, ids, v)
            if ids.size > frontier_cap:
                chosen = np.lexsort((ids, -v))[:frontier_cap]
                chosen.sort()
                ids, v = ids[chosen], v[chosen]
        speeds[rep] = float(v.max()) / depth
    return float(speeds.mean())
