import math

import numpy as np
import pytest
from scipy import special

import treecast as tc
from treecast.distributions import prob_below, sample_array, sampler_plan
from treecast.rng import RandomStream, stream_key

INF = math.inf


def draws(d, n, seed=101):
    return sample_array(d, stream_key(seed, 1), np.arange(n, dtype=np.uint64))


# --- sampling ---------------------------------------------------------------

def test_constant_sample_is_the_value_for_any_seed():
    d = tc.Constant(1.0)
    for seed in (0, 1, 2**63, 987654321):
        assert tc.sample(d, RandomStream(seed)) == 1.0


def test_two_point_empirical_mean():
    d = tc.FiniteLattice(((0.0, 0.8), (2.0, 0.2)))
    x = draws(d, 10**6)
    # exact mean 0.4, sd of one draw 0.8
    se = 0.8 / 1000.0
    assert abs(x.mean() - 0.4) <= 3 * se


def test_poisson_empirical_variance_matches_mean():
    x = draws(tc.Poisson(0.5), 10**6)
    v = x.var(ddof=1)
    centered = (x - x.mean()) ** 2
    se_var = centered.std(ddof=1) / 1000.0
    assert abs(v - 0.5) <= 3 * se_var


def test_zeta_empirical_pmf():
    tau = 2.5
    d = tc.Zeta(tau)
    x = draws(d, 300_000)
    z = float(special.zeta(tau))
    for k in (1, 2, 3, 5):
        p = k ** (-tau) / z
        phat = float((x == k).mean())
        se = math.sqrt(p * (1 - p) / x.size)
        assert abs(phat - p) <= 4 * se, k


def test_pareto_empirical_tail():
    d = tc.Pareto(1.5, 1.0)
    x = draws(d, 300_000)
    assert x.min() >= 1.0
    p = 2.0 ** -1.5
    phat = float((x > 2.0).mean())
    se = math.sqrt(p * (1 - p) / x.size)
    assert abs(phat - p) <= 4 * se


def test_sampling_is_reproducible_across_backends_for_tables():
    from treecast.backend import implementations

    impls = implementations()
    d = tc.Poisson(1.3)
    plan = sampler_plan(d).args()
    ctrs = np.arange(10_000, dtype=np.uint64)
    outs = [impl.sample(*plan, 42, ctrs) for impl in impls.values()]
    for other in outs[1:]:
        assert np.array_equal(outs[0], other)


# --- moments ----------------------------------------------------------------

def test_means():
    assert tc.mean(tc.Constant(3.5)) == 3.5
    assert tc.mean(tc.Poisson(0.7)) == 0.7
    assert tc.mean(tc.Pareto(0.5, 1.0)) == INF
    assert tc.mean(tc.Pareto(2.0, 1.0)) == pytest.approx(2.0)
    assert tc.mean(tc.Zeta(1.5)) == INF
    z = tc.mean(tc.Zeta(3.0))
    assert z == pytest.approx(float(special.zeta(2.0) / special.zeta(3.0)))
    assert tc.mean(tc.FiniteLattice(((0.0, 0.8), (2.0, 0.2)))) == pytest.approx(0.4)


# --- log-MGF ----------------------------------------------------------------

ALL_DISTS = [
    tc.Constant(1.0),
    tc.Constant(0.0),
    tc.FiniteLattice(((0.0, 0.8), (2.0, 0.2))),
    tc.FiniteLattice(((0.5, 0.25), (1.0, 0.5), (3.0, 0.25))),
    tc.Poisson(0.5),
    tc.Poisson(4.0),
    tc.Pareto(1.5, 1.0),
    tc.Pareto(0.8, 2.0),
    tc.Zeta(2.2),
    tc.Zeta(3.5),
]


def test_log_mgf_poisson_closed_form():
    mu = 0.9
    for lam in (-2.0, -0.3, 0.0, 0.5, 3.0):
        assert tc.log_mgf(tc.Poisson(mu), lam) == pytest.approx(
            mu * (math.exp(lam) - 1.0), abs=1e-12
        )


def test_log_mgf_at_zero_is_zero():
    for d in ALL_DISTS:
        assert tc.log_mgf(d, 0.0) == 0.0


def test_log_mgf_power_law_positive_tilt_infinite():
    assert tc.log_mgf(tc.Pareto(2.0, 1.0), 0.1) == INF
    assert tc.log_mgf(tc.Zeta(2.5), 0.1) == INF


def test_log_mgf_convex_on_finite_domain():
    rng = np.random.default_rng(7)
    checks = 0
    while checks < 1000:
        d = ALL_DISTS[int(rng.integers(len(ALL_DISTS)))]
        lo = -3.0
        hi = -1e-6 if isinstance(d, (tc.Pareto, tc.Zeta)) else 3.0
        l1, l2 = sorted(rng.uniform(lo, hi, size=2))
        mid = tc.log_mgf(d, 0.5 * (l1 + l2))
        avg = 0.5 * (tc.log_mgf(d, l1) + tc.log_mgf(d, l2))
        if math.isinf(avg):
            assert mid <= avg
        else:
            assert mid <= avg + 1e-9
        checks += 1


def test_log_mgf_derivative_at_zero_is_the_mean():
    h = 1e-6
    for d in ALL_DISTS:
        if math.isinf(tc.mean(d)) or math.isinf(tc.log_mgf(d, h)):
            continue
        deriv = (tc.log_mgf(d, h) - tc.log_mgf(d, -h)) / (2 * h)
        assert deriv == pytest.approx(tc.mean(d), abs=1e-6, rel=1e-6)


def test_log_mgf_matches_empirical_over_a_million_draws():
    lams = (-1.0, -0.1, 0.1)
    for d in [tc.FiniteLattice(((0.0, 0.5), (1.0, 0.3), (3.0, 0.2))),
              tc.Poisson(0.8), tc.Pareto(1.5, 1.0), tc.Zeta(2.5)]:
        x = draws(d, 10**6, seed=55)
        for lam in lams:
            exact = tc.log_mgf(d, lam)
            if math.isinf(exact):
                continue
            ex = np.exp(lam * x)
            m = ex.mean()
            se_log = ex.std(ddof=1) / math.sqrt(ex.size) / m  # delta method
            assert abs(math.log(m) - exact) <= 3 * se_log, (d, lam)


def test_pareto_log_mgf_against_quadrature():
    from scipy.integrate import quad

    d = tc.Pareto(1.5, 2.0)
    for lam in (-0.05, -0.7, -3.0):
        val, err = quad(
            lambda x: math.exp(lam * x) * 1.5 * 2.0**1.5 * x**-2.5,
            2.0, math.inf, epsabs=1e-13, epsrel=1e-12,
        )
        assert tc.log_mgf(d, lam) == pytest.approx(math.log(val), abs=1e-10)


def test_zeta_log_mgf_against_series():
    tau = 2.2
    d = tc.Zeta(tau)
    z = float(special.zeta(tau))
    for lam in (-0.02, -1.0):
        total = sum(k**-tau * math.exp(lam * k) for k in range(1, 200_000)) / z
        assert tc.log_mgf(d, lam) == pytest.approx(math.log(total), abs=1e-8)


# --- misc -------------------------------------------------------------------

def test_prob_below():
    d = tc.FiniteLattice(((0.0, 0.3), (1.0, 0.3), (2.5, 0.4)))
    assert prob_below(d, 0.0) == 0.0
    assert prob_below(d, 1.0) == pytest.approx(0.3)
    assert prob_below(d, 3.0) == pytest.approx(1.0)
    assert prob_below(tc.Poisson(2.0), 1.0) == pytest.approx(math.exp(-2.0))


def test_json_round_trip():
    for d in ALL_DISTS:
        assert tc.dist_from_json(tc.dist_to_json(d)) == d


@pytest.mark.parametrize(
    "bad",
    [
        {"kind": "nope"},
        {"kind": "constant", "value": -1},
        {"kind": "finite", "atoms": [[0, 0.5], [1, 0.6]]},
        {"kind": "finite", "atoms": [[1, 0.5], [1, 0.5]]},
        {"kind": "poisson", "mean": 0},
        {"kind": "pareto", "shape": -1, "xmin": 1},
        {"kind": "zeta", "tau": 1.0},
        "not a dict",
    ],
)
def test_bad_dist_json_rejected(bad):
    with pytest.raises(tc.ConfigError):
        tc.dist_from_json(bad)
