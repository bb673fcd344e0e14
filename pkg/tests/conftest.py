"""Shared helpers: deterministic random model configurations."""
from __future__ import annotations

import numpy as np

import treecast as tc


def random_lattice_config(rng: np.random.Generator, m_choices=(2, 3)) -> tc.ModelConfig:
    """Random finite-lattice configuration with a nontrivial regime."""
    while True:
        nv = int(rng.integers(2, 4))
        vals = sorted(rng.choice(np.arange(0, 5), size=nv, replace=False).tolist())
        probs = rng.dirichlet(np.ones(nv) * 2.0)
        strength = tc.FiniteLattice(
            tuple((float(v), float(p)) for v, p in zip(vals, probs))
        )
        if rng.random() < 0.5:
            cost = tc.Constant(float(rng.integers(1, 3)))
        else:
            cvals = sorted(rng.choice(np.arange(0, 4), size=2, replace=False).tolist())
            cp = float(rng.uniform(0.2, 0.8))
            cost = tc.FiniteLattice(((float(cvals[0]), cp), (float(cvals[1]), 1 - cp)))
        cfg = tc.ModelConfig(int(rng.choice(m_choices)), strength, cost)
        if cfg.certain_outcome() is None:
            return cfg


def random_survivable_lattice_config(
    rng: np.random.Generator, chain: tc.ChainKind, max_rate: float = 1.6
) -> tuple[tc.ModelConfig, float]:
    """Lattice config whose chain decay rate keeps a splitting population
    healthy (no early extinction at the default sizes)."""
    while True:
        cfg = random_lattice_config(rng)
        try:
            rate = tc.spectral_decay(cfg, chain).rate
        except tc.NotLatticeFinite:
            continue
        if rate <= max_rate:
            return cfg, rate


def two_point_config(m: int, p_high: float, high: float = 2.0,
                     cost: float = 1.0) -> tc.ModelConfig:
    return tc.ModelConfig(
        m,
        tc.FiniteLattice(((0.0, 1.0 - p_high), (high, p_high))),
        tc.Constant(cost),
    )
