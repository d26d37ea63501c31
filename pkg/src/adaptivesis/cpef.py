"""Forest caricature of the adaptive epidemic.

Hosts are independent Poisson(beta) Galton-Watson trees carrying an SIS
infection with neighborhood updates: a vertex with an infected neighbor is
deleted from its host at rate kappa, and if it was infected at that moment
it seeds a fresh independent host rooted at an infected copy of itself.
Those seeds form a meta branching process; the epidemic survives when the
mean seed count per host exceeds one.  Healthy deleted vertices would seed
an all-healthy host that never interacts, so they are simply dropped.

Trees are grown lazily: a vertex samples its children the first time it
becomes infected, which is the first time they can matter.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .randutil import as_random, poisson_variate

__all__ = [
    "HostTree",
    "HostOutcome",
    "CpefOutcome",
    "sample_gw_tree",
    "run_host_infection",
    "run_cpef",
    "estimate_meta_offspring",
]

DEFAULT_NODE_CAP = 10**6
DEFAULT_HOST_EVENT_CAP = 10**8


class HostTree:
    """Rooted tree with on-demand child sampling.

    revealed[i] says whether node i's children have been drawn yet; capped
    is set once a reveal would push past the node budget, leaving the
    frontier unexplored.
    """

    def __init__(self, beta: float):
        if beta < 0:
            raise ValueError("beta must be >= 0")
        self.beta = beta
        self.parent: list[int] = [-1]
        self.children: list[list[int]] = [[]]
        self.revealed: list[bool] = [False]
        self.capped = False

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    def reveal(self, node: int, rng, node_cap: Optional[int] = None) -> bool:
        """Sample node's offspring; False when the node budget stops it."""
        if self.revealed[node]:
            return True
        k = poisson_variate(rng, self.beta)
        if node_cap is not None and self.n_nodes + k > node_cap:
            self.capped = True
            return False
        base = self.n_nodes
        for j in range(k):
            self.parent.append(node)
            self.children.append([])
            self.revealed.append(False)
            self.children[node].append(base + j)
        self.revealed[node] = True
        return True


def sample_gw_tree(beta: float, node_cap: int = DEFAULT_NODE_CAP,
                   rng=None) -> HostTree:
    """Materialize a Galton-Watson tree breadth-first up to node_cap."""
    rng = as_random(rng)
    tree = HostTree(beta)
    queue = deque([0])
    while queue:
        node = queue.popleft()
        if not tree.reveal(node, rng, node_cap):
            break
        queue.extend(tree.children[node])
    return tree


@dataclass(frozen=True)
class HostOutcome:
    ever_infected: int
    meta_offspring: int
    duration: float
    capped: bool
    events: int


@dataclass(frozen=True)
class CpefOutcome:
    total_ever_infected: int
    trees_infected: int
    termination: str  # 'extinct' | 'budget_exceeded'
    max_meta_depth: int


def run_host_infection(tree: HostTree, lam: float, kappa: float, rng=None,
                       node_cap: Optional[int] = DEFAULT_NODE_CAP,
                       max_events: int = DEFAULT_HOST_EVENT_CAP) -> HostOutcome:
    """SIS with updating-deletions on one host, root initially infected.

    Runs until no infected vertex remains or a budget trips.  The tree is
    revealed in place as infection reaches new vertices; meta_offspring
    counts vertices deleted while infected.
    """
    rng = as_random(rng)
    if lam < 0 or kappa < 0:
        raise ValueError("rates must be >= 0")

    n0 = tree.n_nodes
    alive = bytearray([1]) * n0
    infected = bytearray(n0)
    inc = [0] * n0

    inf_list = [0]
    inf_pos = {0: 0}
    infected[0] = 1
    frontier: dict[int, int] = {}
    S = 0
    elig_list: list[int] = []
    elig_pos: dict[int, int] = {}

    t = 0.0
    events = 0
    ever = 1
    meta = 0

    def elig_add(v):
        elig_pos[v] = len(elig_list)
        elig_list.append(v)

    def elig_remove(v):
        i = elig_pos.pop(v)
        last = elig_list[-1]
        elig_list[i] = last
        if last != v:
            elig_pos[last] = i
        elig_list.pop()

    def inc_change(w, d):
        nonlocal S
        c = inc[w] + d
        inc[w] = c
        if not infected[w]:
            S += d
            if c:
                frontier[w] = c
            else:
                del frontier[w]
        if d > 0 and c == 1:
            elig_add(w)
        elif d < 0 and c == 0:
            elig_remove(w)

    def alive_neighbors(v):
        p = tree.parent[v]
        if p >= 0 and alive[p]:
            yield p
        for c in tree.children[v]:
            if alive[c]:
                yield c

    def grow_arrays():
        extra = tree.n_nodes - len(alive)
        if extra > 0:
            alive.extend(b"\x01" * extra)
            infected.extend(bytes(extra))
            inc.extend([0] * extra)

    # root: children come into being with the first infection
    if not tree.reveal(0, rng, node_cap):
        return HostOutcome(ever, meta, t, True, events)
    grow_arrays()
    for w in alive_neighbors(0):
        inc_change(w, +1)

    while True:
        if not inf_list:
            return HostOutcome(ever, meta, t, False, events)
        if events >= max_events:
            return HostOutcome(ever, meta, t, True, events)

        n_inf = len(inf_list)
        r_rec = float(n_inf)
        r_tr = lam * S
        r_upd = kappa * len(elig_list)
        total = r_rec + r_tr + r_upd
        t += rng.expovariate(total)
        events += 1
        u = rng.random() * total

        if u < r_rec:
            v = inf_list[rng.randrange(n_inf)]
            i = inf_pos.pop(v)
            last = inf_list[-1]
            inf_list[i] = last
            if last != v:
                inf_pos[last] = i
            inf_list.pop()
            infected[v] = 0
            if inc[v]:
                frontier[v] = inc[v]
                S += inc[v]
            for w in alive_neighbors(v):
                inc_change(w, -1)

        elif u < r_rec + r_tr:
            x = (u - r_rec) / lam
            acc = 0
            v = -1
            for cand, c in frontier.items():
                acc += c
                v = cand
                if acc > x:
                    break
            S -= frontier.pop(v)
            infected[v] = 1
            inf_pos[v] = len(inf_list)
            inf_list.append(v)
            ever += 1
            if not tree.revealed[v]:
                if not tree.reveal(v, rng, node_cap):
                    return HostOutcome(ever, meta, t, True, events)
                grow_arrays()
            for w in alive_neighbors(v):
                inc_change(w, +1)

        else:
            v = elig_list[rng.randrange(len(elig_list))]
            was_infected = infected[v]
            nbrs = list(alive_neighbors(v))
            elig_remove(v)
            if was_infected:
                meta += 1
                i = inf_pos.pop(v)
                last = inf_list[-1]
                inf_list[i] = last
                if last != v:
                    inf_pos[last] = i
                inf_list.pop()
                infected[v] = 0
            else:
                S -= inc[v]
                del frontier[v]
            alive[v] = 0
            inc[v] = 0
            if was_infected:
                for w in nbrs:
                    inc_change(w, -1)


def run_cpef(lam: float, beta: float, kappa: float, rng=None,
             total_infected_cap: int = 10**4,
             max_hosts: int = 10**4,
             node_cap: int = DEFAULT_NODE_CAP,
             max_events_per_host: int = DEFAULT_HOST_EVENT_CAP) -> CpefOutcome:
    """Breadth-first run of the whole forest from a single infected root.

    Survival has no finite certificate here, so exhausting any budget
    (total infections, host count, per-host nodes or events) is reported as
    budget_exceeded and read as evidence of survival.
    """
    rng = as_random(rng)
    queue = deque([0])
    total_ever = 0
    trees = 0
    max_depth = 0
    while queue:
        depth = queue.popleft()
        tree = HostTree(beta)
        out = run_host_infection(tree, lam, kappa, rng,
                                 node_cap=node_cap,
                                 max_events=max_events_per_host)
        trees += 1
        total_ever += out.ever_infected
        if depth > max_depth:
            max_depth = depth
        if out.capped or total_ever >= total_infected_cap or trees >= max_hosts:
            return CpefOutcome(total_ever, trees, "budget_exceeded", max_depth)
        queue.extend([depth + 1] * out.meta_offspring)
    return CpefOutcome(total_ever, trees, "extinct", max_depth)


def estimate_meta_offspring(lam: float, beta: float, kappa: float,
                            samples: int, rng=None,
                            node_cap: int = DEFAULT_NODE_CAP,
                            max_events_per_host: int = DEFAULT_HOST_EVENT_CAP):
    """Monte Carlo mean and standard error of seeds per host.

    kappa=0 admits no update events at all, so the answer is exactly (0, 0)
    without simulating (hosts can be supercritical there and never finish).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if kappa == 0:
        return 0.0, 0.0
    rng = as_random(rng)
    total = 0.0
    total_sq = 0.0
    for _ in range(samples):
        out = run_host_infection(HostTree(beta), lam, kappa, rng,
                                 node_cap=node_cap,
                                 max_events=max_events_per_host)
        m = out.meta_offspring
        total += m
        total_sq += m * m
    mean = total / samples
    if samples == 1:
        return mean, 0.0
    var = (total_sq - samples * mean * mean) / (samples - 1)
    return mean, math.sqrt(max(var, 0.0) / samples)
