import math
import random

import numpy as np
import pytest
from scipy import stats

from adaptivesis.qsd import (default_truncation, flow_inequality_check,
                             qsd_moments, quasi_stationary,
                             simulate_star_hitting_time,
                             simulate_star_hitting_times, star_generator,
                             truncated_poisson)

# closed-form reference at beta*=1, kappa=1, lam=1, L=1: the quadratic for
# the quasi-stationary weights gives alpha_1 = (4 - sqrt(10))/2 = rho
ALPHA_REF = np.array([(math.sqrt(10) - 2) / 2, (4 - math.sqrt(10)) / 2])
RHO_REF = (4 - math.sqrt(10)) / 2


def test_truncated_poisson_matches_scipy():
    tp = truncated_poisson(2.0, 12)
    ref = stats.poisson.pmf(np.arange(13), 2.0)
    ref /= ref.sum()
    assert np.abs(tp.weights - ref).max() < 1e-12
    assert math.isclose(tp.weights.sum(), 1.0, rel_tol=1e-12)
    assert math.isclose(tp.mean(), float(np.arange(13) @ ref))


def test_truncated_poisson_zero_mean_is_point_mass():
    tp = truncated_poisson(0.0, 5)
    assert tp.weights[0] == 1.0
    assert tp.weights[1:].max() == 0.0


def test_generator_rows_balance():
    gen = star_generator(2.0, 0.7, 0.4, 25)
    sums = gen.Q.sum(axis=1)
    assert np.abs(sums).max() < 1e-12
    off_diag = gen.Q[:, :26] - np.diag(np.diag(gen.Q[:, :26]))
    assert off_diag.min() >= 0
    assert gen.Q[:, 26].min() >= 0
    # kill column is lam * degree
    assert np.allclose(gen.Q[:, 26], 0.4 * np.arange(26))


def test_two_state_closed_form():
    gen = star_generator(1.0, 1.0, 1.0, 1)
    res = quasi_stationary(gen)
    assert np.abs(res.alpha - ALPHA_REF).max() < 1e-10
    assert abs(res.rho - RHO_REF) < 1e-10
    assert res.residual <= 1e-12 * max(1.0, 2.5)


def test_rho_equals_lam_times_mean_degree():
    for seed in range(25):
        rng = random.Random(seed)
        bstar = rng.uniform(0.2, 3.0)
        kappa = rng.uniform(0.2, 15.0)
        lam = rng.uniform(0.05, 2.0)
        gen = star_generator(bstar, kappa, lam, default_truncation(bstar))
        res = quasi_stationary(gen)
        mom = qsd_moments(res)
        assert abs(res.rho - lam * mom.mean) < 1e-8 * max(1.0, res.rho)
        assert mom.mean_bounded and mom.second_bounded
        x = rng.randrange(1, gen.L + 1)
        holds, margin = flow_inequality_check(gen, res.alpha, x)
        assert holds, (bstar, kappa, lam, x, margin)


def test_alpha_approaches_truncated_poisson_for_fast_updates():
    tvs = []
    for kappa in (1.0, 10.0, 100.0):
        gen = star_generator(2.0, kappa, 0.5, 30)
        res = quasi_stationary(gen)
        pois = truncated_poisson(2.0, 30).weights
        tvs.append(0.5 * float(np.abs(res.alpha - pois).sum()))
    assert tvs[0] > tvs[1] > tvs[2]
    assert tvs[2] < 0.01


def test_no_killing_reduces_to_stationary_law():
    gen = star_generator(1.5, 2.0, 0.0, 20)
    res = quasi_stationary(gen)
    assert res.rho == pytest.approx(0.0, abs=1e-12)
    pois = truncated_poisson(1.5, 20).weights
    assert np.abs(res.alpha - pois).max() < 1e-9


def test_flow_check_validates_cut():
    gen = star_generator(1.0, 1.0, 1.0, 5)
    res = quasi_stationary(gen)
    with pytest.raises(ValueError):
        flow_inequality_check(gen, res.alpha, 0)
    with pytest.raises(ValueError):
        flow_inequality_check(gen, res.alpha, 6)


def test_hitting_time_zero_lambda_is_never():
    val = simulate_star_hitting_time(1.0, 1.0, 0.0, 5, rng=random.Random(1))
    assert val == math.inf
    batch = simulate_star_hitting_times(1.0, 1.0, 0.0, 5, 100,
                                        np_rng=np.random.default_rng(1))
    assert np.all(np.isinf(batch))


def test_hitting_time_frozen_start_never_killed():
    # kappa=0 and degree 0: no transitions at all, the hub is never hit
    val = simulate_star_hitting_time(1.0, 0.0, 0.5, 5,
                                     init=[1.0, 0, 0, 0, 0, 0],
                                     rng=random.Random(2))
    assert val == math.inf


def test_scalar_and_batch_samplers_agree():
    n = 4000
    rng = random.Random(4)
    scalar = [simulate_star_hitting_time(1.0, 1.0, 1.0, 8, rng=rng)
              for _ in range(n)]
    batch = simulate_star_hitting_times(1.0, 1.0, 1.0, 8, n,
                                        np_rng=np.random.default_rng(4))
    res = stats.ks_2samp(scalar, batch)
    assert res.pvalue > 0.01, res


def test_hitting_from_qsd_is_exponential():
    gen = star_generator(1.0, 1.0, 1.0, 10)
    res = quasi_stationary(gen)
    n = 20000
    draws = simulate_star_hitting_times(1.0, 1.0, 1.0, 10, n,
                                        init=res.alpha,
                                        np_rng=np.random.default_rng(8))
    ks = stats.kstest(draws, "expon", args=(0, 1 / res.rho))
    assert ks.pvalue > 0.01, ks


def test_bad_init_rejected():
    with pytest.raises(ValueError):
        simulate_star_hitting_time(1.0, 1.0, 1.0, 5, init="nonsense")
    with pytest.raises(ValueError):
        simulate_star_hitting_time(1.0, 1.0, 1.0, 5, init=[0.5, 0.5])
