"""Subtree contact process on a fixed host tree, plain and slowed.

An auxiliary permanently-infected vertex sits just above the root, so the
infected set is always a subtree containing the root (or empty).  A vertex
may only recover while none of its children are infected; infections run
down tree edges at rate lam.  This chain is reversible with stationary
weight lam^{|T|} over root-subtrees T, normalized by the subtree partition
function Z = sum_T lam^{|T|} (empty set included with weight 1).

The slowed variant multiplies every exit rate from a size-k state by
rho^{-k}, which tilts the stationary law to weight (lam*rho)^{|T|} while
keeping the jump chain identical.  By Kac's formula the mean time for the
slowed chain to empty out, started from {root}, is (Z_{lam*rho} - 1)/lam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cpef import HostTree
from .randutil import as_random

__all__ = [
    "ScpOutcome",
    "run_scp",
    "simulate_scp_occupation",
    "exact_subtree_partition",
    "partition_from_levels",
    "sample_gw_levels",
    "gw_partition_values",
]


@dataclass(frozen=True)
class ScpOutcome:
    recovery_time: float
    ever_infected: int
    events: int


def _require_full(tree: HostTree):
    if tree.capped:
        raise ValueError("capped tree: the subtree chain needs the whole host")


def run_scp(tree: HostTree, lam: float, rho: float = 1.0, rng=None,
            max_events: int = 10**9) -> ScpOutcome:
    """Run from T={root} until T empties; rho=1 is the plain chain."""
    _require_full(tree)
    if lam <= 0:
        raise ValueError("lam must be > 0")
    if rho < 1:
        raise ValueError("rho must be >= 1")
    rng = as_random(rng)

    n = tree.n_nodes
    in_t = bytearray(n)
    tchild = [0] * n
    ever = bytearray(n)

    # frontier: infectable vertices (parent in T, self not); removable:
    # members of T with no infected children
    fr_list: list[int] = []
    fr_pos: dict[int, int] = {}
    rm_list: list[int] = []
    rm_pos: dict[int, int] = {}

    def add(lst, pos, v):
        pos[v] = len(lst)
        lst.append(v)

    def drop(lst, pos, v):
        i = pos.pop(v)
        last = lst[-1]
        lst[i] = last
        if last != v:
            pos[last] = i
        lst.pop()

    in_t[0] = 1
    ever[0] = 1
    size = 1
    add(rm_list, rm_pos, 0)
    for c in tree.children[0]:
        add(fr_list, fr_pos, c)

    t = 0.0
    events = 0
    log_rho = math.log(rho) if rho > 1 else 0.0

    while size > 0:
        if events >= max_events:
            raise RuntimeError("run_scp exceeded its event budget")
        base = lam * len(fr_list) + len(rm_list)
        scale = math.exp(size * log_rho) if log_rho else 1.0
        t += rng.expovariate(base) * scale
        events += 1
        u = rng.random() * base
        if u < lam * len(fr_list):
            c = fr_list[rng.randrange(len(fr_list))]
            in_t[c] = 1
            ever[c] = 1
            size += 1
            drop(fr_list, fr_pos, c)
            p = tree.parent[c]
            tchild[p] += 1
            if tchild[p] == 1:
                drop(rm_list, rm_pos, p)
            add(rm_list, rm_pos, c)
            for g in tree.children[c]:
                add(fr_list, fr_pos, g)
        else:
            v = rm_list[rng.randrange(len(rm_list))]
            in_t[v] = 0
            size -= 1
            drop(rm_list, rm_pos, v)
            for c in tree.children[v]:
                drop(fr_list, fr_pos, c)
            if v != 0:
                p = tree.parent[v]
                tchild[p] -= 1
                if tchild[p] == 0:
                    add(rm_list, rm_pos, p)
                add(fr_list, fr_pos, v)

    return ScpOutcome(t, int(sum(ever)), events)


def simulate_scp_occupation(tree: HostTree, lam: float, rho: float = 1.0,
                            t_end: float = 1e5, rng=None):
    """Long-run occupation time per infected-subtree state.

    Includes the empty state: the auxiliary vertex reinfects the root at
    rate lam (times the slowdown at size 0, which is 1).  Returns
    {frozenset_of_vertices: occupied_time}.
    """
    _require_full(tree)
    if lam <= 0:
        raise ValueError("lam must be > 0")
    if rho < 1:
        raise ValueError("rho must be >= 1")
    rng = as_random(rng)

    n = tree.n_nodes
    in_t = bytearray(n)
    tchild = [0] * n
    fr_list: list[int] = []
    fr_pos: dict[int, int] = {}
    rm_list: list[int] = []
    rm_pos: dict[int, int] = {}

    def add(lst, pos, v):
        pos[v] = len(lst)
        lst.append(v)

    def drop(lst, pos, v):
        i = pos.pop(v)
        last = lst[-1]
        lst[i] = last
        if last != v:
            pos[last] = i
        lst.pop()

    # start empty; only move is the auxiliary infection of the root
    size = 0
    mask = 0
    add(fr_list, fr_pos, 0)

    occupation: dict[int, float] = {}
    t = 0.0
    log_rho = math.log(rho) if rho > 1 else 0.0
    while t < t_end:
        base = lam * len(fr_list) + len(rm_list)
        scale = math.exp(size * log_rho) if log_rho else 1.0
        dwell = rng.expovariate(base) * scale
        if t + dwell > t_end:
            dwell = t_end - t
        occupation[mask] = occupation.get(mask, 0.0) + dwell
        t += dwell
        if t >= t_end:
            break
        u = rng.random() * base
        if u < lam * len(fr_list):
            c = fr_list[rng.randrange(len(fr_list))]
            in_t[c] = 1
            size += 1
            mask |= 1 << c
            drop(fr_list, fr_pos, c)
            if c != 0:
                p = tree.parent[c]
                tchild[p] += 1
                if tchild[p] == 1:
                    drop(rm_list, rm_pos, p)
            add(rm_list, rm_pos, c)
            for g in tree.children[c]:
                add(fr_list, fr_pos, g)
        else:
            v = rm_list[rng.randrange(len(rm_list))]
            in_t[v] = 0
            size -= 1
            mask &= ~(1 << v)
            drop(rm_list, rm_pos, v)
            for c in tree.children[v]:
                drop(fr_list, fr_pos, c)
            add(fr_list, fr_pos, v)
            if v != 0:
                p = tree.parent[v]
                tchild[p] -= 1
                if tchild[p] == 0:
                    add(rm_list, rm_pos, p)

    return {
        frozenset(v for v in range(n) if m >> v & 1): dt
        for m, dt in occupation.items()
    }


def exact_subtree_partition(tree: HostTree, weight: float) -> float:
    """Z = sum over root-containing subtrees of weight^{|T|}, empty included.

    Computed by the product recursion f(v) = weight * prod_c (1 + f(c)),
    Z = 1 + f(root), iteratively so deep chains cannot blow the stack.
    Unrevealed nodes count as leaves.  Overflow comes back as +inf.
    """
    if weight < 0:
        raise ValueError("weight must be >= 0")
    f = [0.0] * tree.n_nodes
    stack = [(0, False)]
    while stack:
        v, done = stack.pop()
        kids = tree.children[v] if tree.revealed[v] else ()
        if not done:
            stack.append((v, True))
            for c in kids:
                stack.append((c, False))
        else:
            prod = 1.0
            for c in kids:
                prod *= 1.0 + f[c]
            f[v] = weight * prod
    return 1.0 + f[0]


def partition_from_levels(levels, weight: float) -> float:
    """Same recursion, evaluated level by level on offspring-count arrays.

    levels[k] holds the offspring counts of generation-k nodes in
    breadth-first order; nodes below the last stored level are unexplored
    and count as leaves.
    """
    if weight < 0:
        raise ValueError("weight must be >= 0")
    g_below = None  # (1 + f) for the generation under the one being processed
    for offs in reversed(levels):
        offs = np.asarray(offs, dtype=np.int64)
        if g_below is None:
            g_below = np.full(int(offs.sum()), 1.0 + weight)
        starts = np.zeros(len(offs), dtype=np.int64)
        np.cumsum(offs[:-1], out=starts[1:])
        padded = np.append(g_below, 1.0)
        if len(padded) > 1:
            prods = np.multiply.reduceat(padded, starts)
        else:
            prods = np.ones(len(offs))
        prods = np.where(offs > 0, prods, 1.0)
        g_below = 1.0 + weight * prods
    return float(g_below[0]) if g_below is not None else 1.0 + weight


def sample_gw_levels(beta: float, node_cap: int, np_rng) -> list:
    """Offspring counts per generation for one Galton-Watson tree.

    Generations are revealed whole while the node budget allows; the first
    generation that would overflow it stays unexplored, matching the
    leaves-at-the-cap convention of partition_from_levels.
    """
    levels = []
    width = 1
    total = 1
    while width:
        offs = np_rng.poisson(beta, width)
        born = int(offs.sum())
        if total + born > node_cap:
            break
        levels.append(offs)
        total += born
        width = born
    return levels


def gw_partition_values(beta: float, weight: float, n_trees: int,
                        node_cap: int, np_rng) -> np.ndarray:
    """Monte Carlo sample of subtree partition values over GW hosts."""
    return np.array([
        partition_from_levels(sample_gw_levels(beta, node_cap, np_rng), weight)
        for _ in range(n_trees)
    ])
