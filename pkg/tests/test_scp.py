import math
import random

import numpy as np
import pytest
from scipy import stats

from adaptivesis.cpef import HostTree, sample_gw_tree
from adaptivesis.scp import (exact_subtree_partition, gw_partition_values,
                             partition_from_levels, run_scp, sample_gw_levels,
                             simulate_scp_occupation)


def make_tree(parents):
    """Fully revealed HostTree from a parent array (parents[0] == -1)."""
    t = HostTree(1.0)
    t.parent = list(parents)
    t.children = [[] for _ in parents]
    for v, p in enumerate(parents):
        if p >= 0:
            t.children[p].append(v)
    t.revealed = [True] * len(parents)
    return t


def random_parents(n, rng):
    return [-1] + [rng.randrange(v) for v in range(1, n)]


def brute_force_partition(parents, weight):
    """Sum of weight^{|T|} over root-containing subtrees by enumeration."""
    n = len(parents)
    total = 1.0  # empty subtree
    for mask in range(1, 2**n):
        if not mask & 1:
            continue
        ok = True
        size = 0
        for v in range(n):
            if mask >> v & 1:
                size += 1
                if parents[v] >= 0 and not mask >> parents[v] & 1:
                    ok = False
                    break
        if ok:
            total += weight**size
    return total


def tree_levels(tree):
    """Offspring counts per generation, for the level-wise evaluator."""
    levels = []
    gen = [0]
    while gen:
        levels.append(np.array([len(tree.children[v]) for v in gen]))
        gen = [c for v in gen for c in tree.children[v]]
    return levels


def test_partition_matches_enumeration():
    rng = random.Random(55)
    for _ in range(60):
        n = rng.randrange(1, 9)
        parents = random_parents(n, rng)
        w = rng.uniform(0.1, 1.5)
        tree = make_tree(parents)
        z_dp = exact_subtree_partition(tree, w)
        z_brute = brute_force_partition(parents, w)
        assert math.isclose(z_dp, z_brute, rel_tol=1e-12), (parents, w)


def test_partition_levelwise_matches_exact():
    rng = random.Random(56)
    for _ in range(60):
        n = rng.randrange(1, 40)
        parents = random_parents(n, rng)
        w = rng.uniform(0.05, 1.2)
        tree = make_tree(parents)
        levels = tree_levels(tree)
        assert math.isclose(partition_from_levels(levels, w),
                            exact_subtree_partition(tree, w), rel_tol=1e-12)


def test_partition_unrevealed_nodes_are_leaves():
    # node 1 has a child, but with revealed[1]=False the DP must ignore it
    t = make_tree([-1, 0, 1])
    t.revealed[1] = False
    w = 0.5
    assert math.isclose(exact_subtree_partition(t, w),
                        brute_force_partition([-1, 0], w))
    t.revealed[1] = True
    assert math.isclose(exact_subtree_partition(t, w),
                        brute_force_partition([-1, 0, 1], w))


def test_partition_overflow_is_inf():
    parents = [-1] + list(range(3000 - 1))  # path
    z = exact_subtree_partition(make_tree(parents), 2.0)
    assert z == math.inf


def test_partition_empty_levels_means_lone_root():
    assert partition_from_levels([], 0.4) == pytest.approx(1.4)


def test_gw_levels_respect_cap():
    np_rng = np.random.default_rng(3)
    for _ in range(100):
        levels = sample_gw_levels(2.5, 300, np_rng)
        total = 1 + sum(int(np.sum(l)) for l in levels)
        assert total <= 300


def test_gw_partition_mean_matches_fixed_point():
    # E[f(root)] solves m = w * exp(beta * m) for subcritical weight
    beta, w = 0.5, 0.3
    m = 0.3
    for _ in range(60):
        m = w * math.exp(beta * m)
    np_rng = np.random.default_rng(12)
    vals = gw_partition_values(beta, w, 4000, 10**5, np_rng)
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - (1.0 + m)) < 4 * se


def test_scp_rejects_bad_input():
    tree = sample_gw_tree(3.0, 30, random.Random(1))
    assert tree.capped
    with pytest.raises(ValueError):
        run_scp(tree, 0.5)
    ok = make_tree([-1, 0])
    with pytest.raises(ValueError):
        run_scp(ok, 0.0)
    with pytest.raises(ValueError):
        run_scp(ok, 0.5, rho=0.5)


def test_scp_single_node_recovery_is_exponential():
    tree = make_tree([-1])
    times = [run_scp(tree, 0.7, rng=random.Random(s)).recovery_time
             for s in range(3000)]
    res = stats.kstest(times, "expon")
    assert res.pvalue > 0.01, res


def test_slowdown_keeps_the_jump_chain():
    """Scaling all exit rates by rho^{-size} stretches clocks only: with a
    common seed the visited sequence is identical, times are not."""
    tree = make_tree(random_parents(12, random.Random(3)))
    for seed in range(50):
        plain = run_scp(tree, 0.6, rho=1.0, rng=random.Random(seed))
        slow = run_scp(tree, 0.6, rho=1.7, rng=random.Random(seed))
        assert plain.events == slow.events
        assert plain.ever_infected == slow.ever_infected
    assert plain.recovery_time != slow.recovery_time


def test_kac_mean_recovery_time():
    # mean time to empty from {root} equals (Z - 1)/lam with the slowed
    # chain's weight lam*rho
    tree = make_tree([-1, 0, 1])  # path of 3
    for lam, rho in ((0.4, 1.0), (0.3, 1.5)):
        w = lam * rho
        z = 1 + w + w**2 + w**3
        expect = (z - 1) / lam
        rng = random.Random(77)
        draws = [run_scp(tree, lam, rho=rho, rng=rng).recovery_time
                 for _ in range(20000)]
        mean = sum(draws) / len(draws)
        sd = np.std(draws, ddof=1)
        assert abs(mean - expect) < 3.5 * sd / math.sqrt(len(draws)), (lam, rho)


def test_occupation_matches_stationary_law():
    tree = make_tree([-1, 0, 1])
    for lam, rho in ((0.5, 1.0), (0.5, 1.4)):
        w = lam * rho
        z = 1 + w + w**2 + w**3
        occ = simulate_scp_occupation(tree, lam, rho, t_end=2e5,
                                      rng=random.Random(31))
        total = sum(occ.values())
        assert math.isclose(total, 2e5, rel_tol=1e-9)
        assert set(map(len, occ)) == {0, 1, 2, 3}
        for state, t_in in occ.items():
            expect = w**len(state) / z
            assert abs(t_in / total - expect) < 0.01, (state, rho)


def test_occupation_respects_subtree_constraint():
    tree = make_tree([-1, 0, 0, 1])
    occ = simulate_scp_occupation(tree, 0.8, 1.0, t_end=5e3,
                                  rng=random.Random(9))
    for state in occ:
        for v in state:
            assert tree.parent[v] == -1 or tree.parent[v] in state
