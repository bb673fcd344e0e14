import math

import numpy as np
import pytest
from scipy import stats

import treecast as tc
from treecast.rates import CRITICAL_BAND

from conftest import random_lattice_config, two_point_config


def two_point_rate_at_zero(p_up: float) -> float:
    """Closed form for a +-1 net gain with up-probability p: the rate at
    zero is -log(2 sqrt(p(1-p))) below p = 1/2 and zero above."""
    if p_up >= 0.5:
        return 0.0
    return -math.log(2.0 * math.sqrt(p_up * (1.0 - p_up)))


# --- gain log-MGF -------------------------------------------------------------

def test_gain_log_mgf_poisson_pair_closed_form():
    cfg = tc.ModelConfig(2, tc.Poisson(1.4), tc.Poisson(0.6))
    for lam in (0.0, 0.1, 1.0, 3.0):
        expect = (math.exp(lam) - 1) * 1.4 + (math.exp(-lam) - 1) * 0.6
        assert tc.log_mgf_gain(cfg, lam) == pytest.approx(expect, abs=1e-12)


def test_gain_log_mgf_zero_gain():
    cfg = tc.ModelConfig(2, tc.Constant(1.0), tc.Constant(1.0))
    for lam in (0.0, 0.5, 10.0):
        assert tc.log_mgf_gain(cfg, lam) == 0.0


def test_gain_log_mgf_heavy_strength_is_infinite():
    cfg = tc.ModelConfig(2, tc.Pareto(1.5, 1.0), tc.Constant(1.0))
    assert math.isinf(tc.log_mgf_gain(cfg, 0.3))


def test_gain_log_mgf_rejects_negative_tilt():
    cfg = tc.ModelConfig(2, tc.Constant(1.0), tc.Constant(1.0))
    with pytest.raises(ValueError):
        tc.log_mgf_gain(cfg, -0.1)


# --- rate function -------------------------------------------------------------

def test_rate_two_point_closed_form_at_zero():
    for p in (0.05, 0.1, 0.3, 0.45, 0.5, 0.7):
        cfg = two_point_config(2, p)
        assert tc.rate_function(cfg, 0.0) == pytest.approx(
            two_point_rate_at_zero(p), abs=1e-8
        )


def test_rate_zero_below_the_mean_gain():
    cfg = tc.ModelConfig(2, tc.Poisson(2.0), tc.Poisson(1.0))
    for s in (-5.0, 0.0, 0.9999):
        assert tc.rate_function(cfg, s) == 0.0


def test_rate_zero_when_gain_mgf_always_infinite():
    cfg = tc.ModelConfig(2, tc.Pareto(1.5, 1.0), tc.Poisson(3.0))
    assert tc.rate_function(cfg, 10.0) == 0.0


def test_rate_above_top_support_is_infinite():
    cfg = two_point_config(2, 0.3)  # gain support {-1, +1}
    assert math.isinf(tc.rate_function(cfg, 1.5))
    assert tc.rate_function(cfg, 1.0) == pytest.approx(-math.log(0.3), abs=1e-12)


def test_rate_monotone_and_convex_on_random_lattice_configs():
    rng = np.random.default_rng(11)
    for _ in range(200):
        cfg = random_lattice_config(rng)
        top = cfg.strength.support_max() - cfg.cost.support_min()
        lo = tc.mean(cfg.strength) - tc.mean(cfg.cost)
        grid = np.linspace(lo, top, 7)
        vals = [tc.rate_function(cfg, s) for s in grid]
        finite = [v for v in vals if math.isfinite(v)]
        for a, b in zip(vals, vals[1:]):
            assert b >= a - 1e-9
        for i in range(1, len(vals) - 1):
            if math.isfinite(vals[i - 1]) and math.isfinite(vals[i + 1]):
                assert vals[i] <= 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-8
        assert all(v >= -1e-12 for v in finite)


def test_rate_zero_at_zero_when_mean_gain_nonnegative():
    rng = np.random.default_rng(12)
    done = 0
    while done < 50:
        cfg = random_lattice_config(rng)
        if tc.mean(cfg.strength) < tc.mean(cfg.cost):
            continue
        assert tc.rate_function(cfg, 0.0) == 0.0
        done += 1


def test_cramer_consistency_against_exact_binomial():
    # +-1 gain: the alive-at-n probability of the mean staying nonnegative
    # is an exact binomial tail, an oracle independent of the rate code.
    n = 200
    for p in (0.2, 0.3, 0.4):
        cfg = two_point_config(2, p)
        tail = float(stats.binom.sf(n // 2 - 1, n, p))  # P(at least n/2 ups)
        empirical_rate = -math.log(tail) / n
        assert abs(empirical_rate - tc.rate_function(cfg, 0.0)) <= 5 * math.log(n) / n


# --- front speed ----------------------------------------------------------------

def test_front_speed_zero_gain():
    cfg = tc.ModelConfig(2, tc.Constant(1.0), tc.Constant(1.0))
    assert tc.front_speed(cfg) == 0.0


def test_front_speed_heavy_tail_is_infinite():
    cfg = tc.ModelConfig(2, tc.Pareto(1.5, 1.0), tc.Constant(1.0))
    assert math.isinf(tc.front_speed(cfg))


def test_front_speed_symmetric_two_point_hits_the_ceiling():
    # grid oracle: the rate at the top gain +1 is -log(1/2) = log 2, which
    # equals the branching budget, so the admissible speed extends to 1.
    cfg = two_point_config(2, 0.5)
    lams = np.linspace(0.0, 30.0, 4001)
    mgf = np.array([tc.log_mgf_gain(cfg, l) for l in lams])
    rate_at_one = float(np.max(lams * 1.0 - mgf))
    assert rate_at_one <= math.log(2) + 1e-9
    assert tc.front_speed(cfg) == pytest.approx(1.0, abs=1e-8)


def test_front_speed_two_point_bisection_matches_grid_oracle():
    cfg = two_point_config(2, 0.3)
    speed = tc.front_speed(cfg)
    # brute force: evaluate the Legendre objective on a dense (s, tilt) grid
    lams = np.linspace(0.0, 60.0, 6001)
    mgf = np.array([tc.log_mgf_gain(cfg, l) for l in lams])
    ss = np.linspace(-1.0, 1.0, 2001)
    rates = np.max(ss[:, None] * lams[None, :] - mgf[None, :], axis=1)
    grid_speed = float(ss[np.searchsorted(rates > math.log(2), True) - 1])
    assert abs(speed - grid_speed) <= 2e-3  # grid resolution dominates
    assert tc.rate_function(cfg, speed) == pytest.approx(math.log(2), abs=1e-6)


def test_front_speed_rejects_m1():
    with pytest.raises(tc.PreconditionError):
        tc.front_speed(tc.ModelConfig(1, tc.Constant(2.0), tc.Constant(1.0)))


# --- augmented verdict ------------------------------------------------------------

def test_augmented_poisson_pair_matches_closed_form():
    for mu_r, mu_c in [(1.0, 2.0), (0.5, 3.0), (2.0, 2.0), (0.2, 3.8)]:
        cfg = tc.ModelConfig(2, tc.Poisson(mu_r), tc.Poisson(mu_c))
        rep = tc.augmented_verdict(cfg)
        margin = math.sqrt(math.log(2)) - (math.sqrt(mu_c) - math.sqrt(mu_r))
        if margin > 1e-6:
            assert rep.verdict is tc.Verdict.SURVIVES
        elif margin < -1e-6:
            assert rep.verdict is tc.Verdict.DIES


def test_augmented_unit_strength_two_point_cost():
    # strength 1 against cost in {0, 2}: the net gain is +-1 with
    # up-probability the zero-cost mass; survival needs it above ~0.067
    for p0, expect in [(0.10, tc.Verdict.SURVIVES), (0.05, tc.Verdict.DIES)]:
        cfg = tc.ModelConfig(
            2, tc.Constant(1.0),
            tc.FiniteLattice(((0.0, p0), (2.0, 1.0 - p0))),
        )
        assert tc.augmented_verdict(cfg).verdict is expect


def test_augmented_power_law_strength_survives_any_cost():
    cfg = tc.ModelConfig(2, tc.Pareto(1.5, 1.0), tc.Zeta(2.2))
    rep = tc.augmented_verdict(cfg)
    assert rep.verdict is tc.Verdict.SURVIVES
    assert rep.rate_at_zero == 0.0


def test_augmented_degenerate_zero_gain_survives():
    cfg = tc.ModelConfig(2, tc.Constant(1.0), tc.Constant(1.0))
    rep = tc.augmented_verdict(cfg)
    assert rep.verdict is tc.Verdict.SURVIVES
    assert rep.note is not None


def test_augmented_critical_band_reports_critical():
    m = 2
    p_star = 0.5 * (1.0 - math.sqrt(1.0 - 1.0 / m**2))
    rep = tc.augmented_verdict(two_point_config(m, p_star))
    assert rep.verdict is tc.Verdict.CRITICAL
    assert abs(rep.rate_at_zero - math.log(m)) <= CRITICAL_BAND


def test_augmented_rejects_m1():
    with pytest.raises(tc.PreconditionError):
        tc.augmented_verdict(tc.ModelConfig(1, tc.Constant(2.0), tc.Constant(1.0)))


def test_criterion_equivalence_on_random_configs():
    # the rate-at-zero route and the product-criterion route must agree in
    # sign whenever the configuration is clearly off the critical line
    rng = np.random.default_rng(13)
    checked = 0
    while checked < 200:
        cfg = random_lattice_config(rng)
        rep = tc.augmented_verdict(cfg, with_front_speed=False, with_grid=False)
        diff = rep.log_branching - rep.rate_at_zero
        if math.isfinite(rep.rate_at_zero) and abs(diff) > 1e-6:
            if abs(rep.corollary_margin) > 1e-6:
                assert (diff > 0) == (rep.corollary_margin > 0)
        checked += 1


def test_report_json_encodes_infinities():
    cfg = tc.ModelConfig(2, tc.Pareto(1.5, 1.0), tc.Constant(1.0))
    obj = tc.augmented_verdict(cfg).to_json()
    assert obj["front_speed"] == "inf"
    assert obj["verdict"] == "survives"
