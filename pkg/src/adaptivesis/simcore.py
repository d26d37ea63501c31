"""Exact event-driven simulation of SIS epidemics on dynamic Erdos-Renyi graphs.

Two graph dynamics share one engine: in adaptive mode a vertex redraws its
whole neighborhood at rate kappa only while at least one neighbor is
infected; in nonadaptive mode every vertex redraws at rate kappa
unconditionally.  Redrawing means: drop all incident edges, then connect to
each other vertex independently with probability beta/n.  Infected vertices
recover at rate 1 and push infection across each incident edge at rate lam.

The engine is an aggregate-rate Gillespie loop over three event categories
(recovery, transmission, neighborhood update) with all aggregates maintained
incrementally, so a step costs O(degree) rather than O(n).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .randutil import as_random, binomial_variate

__all__ = [
    "Params",
    "SimState",
    "TrajectoryStats",
    "sample_er_graph",
    "resample_neighborhood",
    "run_trajectory",
    "validate_state",
]

DEFAULT_EVENT_BUDGET = 10**8

MODES = ("adaptive", "nonadaptive")


@dataclass(frozen=True)
class Params:
    """Model parameters for one finite-n run.

    n        vertex count
    beta     mean degree of the Erdos-Renyi graph (edge probability beta/n)
    lam      per-edge transmission rate
    kappa    neighborhood update rate
    epsilon  epidemic threshold: a run is an epidemic once ever-infected
             reaches epsilon * n
    """

    n: int
    beta: float
    lam: float
    kappa: float
    epsilon: float = 0.05

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.beta < 0 or self.beta > self.n:
            raise ValueError("need 0 <= beta <= n so beta/n is a probability")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must be in (0, 1]")
        if self.epsilon * self.n < 1:
            raise ValueError("epsilon * n must be >= 1")

    @property
    def edge_prob(self) -> float:
        return self.beta / self.n


@dataclass
class SimState:
    """Full graph-plus-infection state, cheap to introspect in tests."""

    n: int
    beta: float
    adjacency: list  # list[set[int]]
    infected: set
    infected_neighbor_count: list
    ever_infected: set = field(default_factory=set)
    time: float = 0.0


@dataclass(frozen=True)
class TrajectoryStats:
    """What a single run reports back."""

    ever_infected: int
    peak_infected: int
    extinction_time: Optional[float]
    termination: str  # 'extinct' | 'epidemic' | 'budget_exceeded'
    events: int
    time: float


def sample_er_graph(n: int, beta: float, rng=None) -> SimState:
    """Draw G(n, beta/n) with the usual geometric pair-skipping walk."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if beta < 0 or beta > n:
        raise ValueError("need 0 <= beta <= n")
    rng = as_random(rng)
    adj = [set() for _ in range(n)]
    p = beta / n
    if p > 0:
        if p >= 1.0:
            for i in range(n):
                for j in range(i + 1, n):
                    adj[i].add(j)
                    adj[j].add(i)
        else:
            log_q = math.log1p(-p)
            # walk the strictly-upper-triangular pairs in row-major order
            i, j = 0, 0
            total_pairs = n * (n - 1) // 2
            pos = -1
            while True:
                u = 1.0 - rng.random()
                pos += 1 + int(math.log(u) / log_q)
                if pos >= total_pairs:
                    break
                # invert row-major index -> (i, j)
                i = int((2 * n - 1 - math.sqrt((2 * n - 1) ** 2 - 8 * pos)) / 2)
                # guard the float inversion on row boundaries
                while pos >= (i + 1) * (2 * n - i - 2) // 2 + (i + 1):
                    i += 1
                while pos < i * (2 * n - i - 1) // 2:
                    i -= 1
                j = i + 1 + pos - i * (2 * n - i - 1) // 2
                adj[i].add(j)
                adj[j].add(i)
    return SimState(
        n=n,
        beta=beta,
        adjacency=adj,
        infected=set(),
        infected_neighbor_count=[0] * n,
        ever_infected=set(),
    )


def resample_neighborhood(state: SimState, vertex: int, rng=None) -> None:
    """Redraw all edges at `vertex`: drop them, then reconnect to each other
    vertex independently with probability beta/n.

    Updates infected_neighbor_count incrementally for the vertex and every
    gained or lost partner.
    """
    rng = as_random(rng)
    n = state.n
    if not 0 <= vertex < n:
        raise ValueError("vertex out of range")
    adj = state.adjacency
    inc = state.infected_neighbor_count
    v_inf = vertex in state.infected
    for w in adj[vertex]:
        adj[w].remove(vertex)
        if v_inf:
            inc[w] -= 1
    k = binomial_variate(rng, n - 1, state.beta / n)
    new = set()
    while len(new) < k:
        y = rng.randrange(n - 1)
        if y >= vertex:
            y += 1
        new.add(y)
    adj[vertex] = new
    count = 0
    for w in new:
        adj[w].add(vertex)
        if v_inf:
            inc[w] += 1
        if w in state.infected:
            count += 1
    inc[vertex] = count


def validate_state(state: SimState) -> None:
    """Assert adjacency symmetry, no self-loops, and count consistency."""
    n = state.n
    for v in range(n):
        assert v not in state.adjacency[v], f"self-loop at {v}"
        for w in state.adjacency[v]:
            assert v in state.adjacency[w], f"asymmetric edge {v}-{w}"
        expect = sum(1 for w in state.adjacency[v] if w in state.infected)
        got = state.infected_neighbor_count[v]
        assert got == expect, f"inc[{v}]={got}, expected {expect}"
    assert state.infected <= set(range(n))
    assert state.infected <= state.ever_infected or not state.ever_infected


def run_trajectory(
    params: Params,
    mode: str = "adaptive",
    initial_infected: Iterable[int] = (0,),
    rng=None,
    epidemic_fraction: Optional[float] = -1.0,
    max_events: int = DEFAULT_EVENT_BUDGET,
    debug: bool = False,
) -> TrajectoryStats:
    """Run one exact trajectory until extinction, epidemic, or event budget.

    epidemic_fraction defaults to params.epsilon; pass None to disable the
    epidemic stop and run to extinction (or budget).  Identical
    (params, mode, initial_infected, seed) give bit-identical stats.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    rng = as_random(rng)
    if epidemic_fraction == -1.0:
        epidemic_fraction = params.epsilon
    threshold = None if epidemic_fraction is None else epidemic_fraction * params.n

    n = params.n
    lam = params.lam
    kappa = params.kappa
    p = params.edge_prob
    adaptive = mode == "adaptive"

    state = sample_er_graph(n, params.beta, rng)
    adj = state.adjacency
    infected = bytearray(n)
    inc = [0] * n

    inf_list: list[int] = []
    inf_pos = [-1] * n
    for v in set(initial_infected):
        if not 0 <= v < n:
            raise ValueError("initial infected vertex out of range")
        infected[v] = 1
        inf_pos[v] = len(inf_list)
        inf_list.append(v)
    if not inf_list:
        raise ValueError("need at least one initially infected vertex")
    for v in inf_list:
        for w in adj[v]:
            inc[w] += 1

    # frontier: healthy vertices with infected neighbors, weight = count
    frontier: dict[int, int] = {}
    S = 0
    for v in range(n):
        if inc[v] and not infected[v]:
            frontier[v] = inc[v]
            S += inc[v]

    # eligible updaters in adaptive mode: any vertex with an infected neighbor
    elig_list: list[int] = []
    elig_pos = [-1] * n
    if adaptive:
        for v in range(n):
            if inc[v]:
                elig_pos[v] = len(elig_list)
                elig_list.append(v)

    n_inf = len(inf_list)
    ever = n_inf
    peak = n_inf
    t = 0.0
    events = 0

    if threshold is not None and ever >= threshold:
        return TrajectoryStats(ever, peak, None, "epidemic", 0, 0.0)

    while True:
        if n_inf == 0:
            return TrajectoryStats(ever, peak, t, "extinct", events, t)
        if events >= max_events:
            return TrajectoryStats(ever, peak, None, "budget_exceeded", events, t)

        r_rec = float(n_inf)
        r_tr = lam * S
        r_upd = kappa * (len(elig_list) if adaptive else n)
        total = r_rec + r_tr + r_upd

        t += rng.expovariate(total)
        events += 1
        u = rng.random() * total

        if u < r_rec:
            # recovery of a uniform infected vertex
            i = rng.randrange(n_inf)
            v = inf_list[i]
            last = inf_list[-1]
            inf_list[i] = last
            inf_pos[last] = i
            inf_list.pop()
            inf_pos[v] = -1
            infected[v] = 0
            n_inf -= 1
            if inc[v]:
                frontier[v] = inc[v]
                S += inc[v]
            for w in adj[v]:
                c = inc[w] - 1
                inc[w] = c
                if not infected[w]:
                    S -= 1
                    if c:
                        frontier[w] = c
                    else:
                        del frontier[w]
                if c == 0 and adaptive:
                    i2 = elig_pos[w]
                    last2 = elig_list[-1]
                    elig_list[i2] = last2
                    elig_pos[last2] = i2
                    elig_list.pop()
                    elig_pos[w] = -1

        elif u < r_rec + r_tr:
            # transmission onto a healthy vertex, weighted by infected degree
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
            n_inf += 1
            if n_inf > peak:
                peak = n_inf
            ever += 1
            for w in adj[v]:
                c = inc[w] + 1
                inc[w] = c
                if not infected[w]:
                    S += 1
                    frontier[w] = c
                if c == 1 and adaptive:
                    elig_pos[w] = len(elig_list)
                    elig_list.append(w)
            if threshold is not None and ever >= threshold:
                return TrajectoryStats(ever, peak, None, "epidemic", events, t)

        else:
            # neighborhood update
            if adaptive:
                v = elig_list[rng.randrange(len(elig_list))]
            else:
                v = rng.randrange(n)
            v_inf = infected[v]
            old = adj[v]
            old_inc = inc[v]
            if not v_inf and old_inc == 0:
                # no infected contact on either side of the old edges
                for w in old:
                    adj[w].remove(v)
            else:
                for w in old:
                    adj[w].remove(v)
                    if v_inf:
                        c = inc[w] - 1
                        inc[w] = c
                        if not infected[w]:
                            S -= 1
                            if c:
                                frontier[w] = c
                            else:
                                del frontier[w]
                        if c == 0 and adaptive:
                            i2 = elig_pos[w]
                            last2 = elig_list[-1]
                            elig_list[i2] = last2
                            elig_pos[last2] = i2
                            elig_list.pop()
                            elig_pos[w] = -1
            k = binomial_variate(rng, n - 1, p)
            new = set()
            while len(new) < k:
                y = rng.randrange(n - 1)
                if y >= v:
                    y += 1
                new.add(y)
            adj[v] = new
            new_inc = 0
            for w in new:
                adj[w].add(v)
                if infected[w]:
                    new_inc += 1
                if v_inf:
                    c = inc[w] + 1
                    inc[w] = c
                    if not infected[w]:
                        S += 1
                        frontier[w] = c
                    if c == 1 and adaptive:
                        elig_pos[w] = len(elig_list)
                        elig_list.append(w)
            inc[v] = new_inc
            if not v_inf:
                if old_inc:
                    S -= old_inc
                    del frontier[v]
                if new_inc:
                    frontier[v] = new_inc
                    S += new_inc
            if adaptive:
                if old_inc and not new_inc:
                    i2 = elig_pos[v]
                    last2 = elig_list[-1]
                    elig_list[i2] = last2
                    elig_pos[last2] = i2
                    elig_list.pop()
                    elig_pos[v] = -1
                elif new_inc and not old_inc:
                    elig_pos[v] = len(elig_list)
                    elig_list.append(v)

        if debug:
            _check_engine(n, adj, infected, inc, frontier, S, elig_list, elig_pos, adaptive)


def _check_engine(n, adj, infected, inc, frontier, S, elig_list, elig_pos, adaptive):
    for v in range(n):
        assert v not in adj[v]
        for w in adj[v]:
            assert v in adj[w]
        expect = sum(1 for w in adj[v] if infected[w])
        assert inc[v] == expect, (v, inc[v], expect)
        if not infected[v] and inc[v]:
            assert frontier.get(v) == inc[v]
        else:
            assert v not in frontier
        if adaptive:
            in_elig = elig_pos[v] >= 0 and elig_pos[v] < len(elig_list) and elig_list[elig_pos[v]] == v
            assert in_elig == (inc[v] > 0), (v, in_elig, inc[v])
    assert S == sum(frontier.values())
