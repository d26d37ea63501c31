"""Lazy-reveal simulation of the adaptive model.

Instead of materializing the whole graph, only vertices that have carried
infection are revealed.  A revealed vertex holds realized edges to other
revealed vertices plus a bundle of oriented half-edges toward the unrevealed
bulk; a half-edge turns into a realized edge the moment infection crosses it
and the far endpoint is revealed.  Updates regenerate connections exactly as
in the finite-n model: an updating infected vertex redraws edges to revealed
vertices and half-edges to the bulk, an updating healthy revealed vertex
drops back to unrevealed (keeping only freshly drawn half-edges pointing at
it), and an updating unrevealed vertex redraws its half-edges from the
revealed side.  The law of the infection trajectory matches run_trajectory
in adaptive mode; only the bookkeeping is sparser, O(revealed) not O(n).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .randutil import as_random, binomial_variate
from .simcore import DEFAULT_EVENT_BUDGET, Params, TrajectoryStats

__all__ = ["ExplorationState", "ExplorationEngine", "run_exploration_trajectory"]


@dataclass
class ExplorationState:
    """Snapshot of the revealed portion of the process."""

    n: int
    time: float
    revealed: set
    infected: set
    adjacency: dict  # realized edges among revealed vertices
    half_targets: dict  # revealed vertex -> set of unrevealed targets
    claimed: Optional[set] = None
    ever_infected: set = field(default_factory=set)


class ExplorationEngine:
    """Event-by-event lazy simulation; run_exploration_trajectory drives it."""

    def __init__(self, params: Params, initial_infected=(0,), rng=None,
                 track_claimed: bool = False):
        self.params = params
        self.rng = as_random(rng)
        n = params.n
        self.n = n
        self.p = params.edge_prob
        self.lam = params.lam
        self.kappa = params.kappa

        self.revealed = bytearray(n)
        self.revealed_list: list[int] = []
        self.infected = bytearray(n)
        self.inf_list: list[int] = []
        self.inf_pos: dict[int, int] = {}
        self.adj: dict[int, set] = {}
        self.out: dict[int, set] = {}
        self.incoming: dict[int, set] = {}
        self.inc: dict[int, int] = {}
        self.frontier: dict[int, int] = {}
        self.S = 0  # infected-to-healthy realized edge count
        self.H = 0  # half-edges hanging off infected vertices
        self.elig_list: list[int] = []
        self.elig_pos: dict[int, int] = {}
        self.claimed: Optional[set] = set() if track_claimed else None

        self.time = 0.0
        self.events = 0
        self.ever = 0
        self.peak = 0

        init = sorted(set(initial_infected))
        if not init:
            raise ValueError("need at least one initially infected vertex")
        for v in init:
            if not 0 <= v < n:
                raise ValueError("initial infected vertex out of range")
            self._reveal_infected(v, first=True)
        self.peak = len(self.inf_list)

    # -- small index helpers ------------------------------------------------

    def _elig_add(self, v):
        self.elig_pos[v] = len(self.elig_list)
        self.elig_list.append(v)

    def _elig_remove(self, v):
        i = self.elig_pos.pop(v)
        last = self.elig_list[-1]
        self.elig_list[i] = last
        if last != v:
            self.elig_pos[last] = i
        self.elig_list.pop()

    def _inc_up(self, v):
        c = self.inc.get(v, 0) + 1
        self.inc[v] = c
        if c == 1:
            self._elig_add(v)
        if self.revealed[v] and not self.infected[v]:
            self.frontier[v] = c
            self.S += 1

    def _inc_down(self, v):
        c = self.inc[v] - 1
        self.inc[v] = c
        if c == 0:
            self._elig_remove(v)
        if self.revealed[v] and not self.infected[v]:
            self.S -= 1
            if c:
                self.frontier[v] = c
            else:
                del self.frontier[v]

    def _draw_unrevealed(self, count, forbid=()):
        """count distinct unrevealed vertices by rejection; cheap while the
        revealed set is a vanishing fraction of [n]."""
        rng = self.rng
        n = self.n
        out = set()
        while len(out) < count:
            y = rng.randrange(n)
            if not self.revealed[y] and y not in out and y not in forbid:
                out.add(y)
        return out

    def _add_half_edge(self, src, tgt):
        self.out[src].add(tgt)
        self.incoming.setdefault(tgt, set()).add(src)
        if self.infected[src]:
            self.H += 1
            self._inc_up(tgt)
            if self.claimed is not None:
                self.claimed.add(tgt)

    def _sample_out_degree(self, v):
        """Fresh half-edge bundle for revealed v over the current bulk."""
        k = binomial_variate(self.rng, self.n - len(self.revealed_list), self.p)
        for tgt in self._draw_unrevealed(k):
            self._add_half_edge(v, tgt)

    def _mark_infected(self, v):
        self.infected[v] = 1
        self.inf_pos[v] = len(self.inf_list)
        self.inf_list.append(v)
        self.ever += 1
        if len(self.inf_list) > self.peak:
            self.peak = len(self.inf_list)
        if self.claimed is not None:
            self.claimed.add(v)

    def _reveal_infected(self, v, first=False):
        """Unrevealed v caught the infection: realize its incoming half-edges,
        then draw its own bundle."""
        srcs = self.incoming.pop(v, set())
        for w in srcs:
            self.out[w].remove(v)
            if self.infected[w]:
                self.H -= 1
        self.revealed[v] = 1
        self.revealed_list.append(v)
        self.adj[v] = set(srcs)
        self.out[v] = set()
        # inc[v] (infected sources) is already correct from half-edge tracking
        self._mark_infected(v)
        for w in srcs:
            self.adj[w].add(v)
            self._inc_up(w)
        self._sample_out_degree(v)
        if first and self.claimed is not None:
            self.claimed.add(v)

    # -- event handlers -----------------------------------------------------

    def _recover(self, v):
        i = self.inf_pos.pop(v)
        last = self.inf_list[-1]
        self.inf_list[i] = last
        if last != v:
            self.inf_pos[last] = i
        self.inf_list.pop()
        self.infected[v] = 0
        c = self.inc.get(v, 0)
        if c:
            self.frontier[v] = c
            self.S += c
        for w in self.adj[v]:
            self._inc_down(w)
        for y in self.out[v]:
            self._inc_down(y)
        self.H -= len(self.out[v])

    def _infect_revealed(self, v):
        self.S -= self.frontier.pop(v)
        self._mark_infected(v)
        for w in self.adj[v]:
            self._inc_up(w)
        for y in self.out[v]:
            self._inc_up(y)
            if self.claimed is not None:
                self.claimed.add(y)
        self.H += len(self.out[v])

    def _update_infected(self, v):
        for w in self.adj[v]:
            self.adj[w].remove(v)
            self._inc_down(w)
        for y in self.out[v]:
            srcs = self.incoming[y]
            srcs.remove(v)
            if not srcs:
                del self.incoming[y]
            self._inc_down(y)
        self.H -= len(self.out[v])
        self.adj[v] = set()
        self.out[v] = set()
        # redraw edges toward the revealed side
        r = len(self.revealed_list)
        k_in = binomial_variate(self.rng, r - 1, self.p)
        partners = set()
        rng = self.rng
        while len(partners) < k_in:
            w = self.revealed_list[rng.randrange(r)]
            if w != v and w not in partners:
                partners.add(w)
        old_inc = self.inc.get(v, 0)
        new_inc = 0
        for w in partners:
            self.adj[v].add(w)
            self.adj[w].add(v)
            self._inc_up(w)
            if self.infected[w]:
                new_inc += 1
            if self.claimed is not None:
                self.claimed.add(w)
        self._shift_inc(v, old_inc, new_inc)
        self._sample_out_degree(v)

    def _shift_inc(self, v, old, new):
        self.inc[v] = new
        if old and not new:
            self._elig_remove(v)
        elif new and not old:
            self._elig_add(v)

    def _update_healthy_revealed(self, v):
        for w in self.adj[v]:
            self.adj[w].discard(v)
        for y in self.out[v]:
            srcs = self.incoming[y]
            srcs.remove(v)
            if not srcs:
                del self.incoming[y]
        del self.adj[v]
        del self.out[v]
        old_inc = self.inc.get(v, 0)
        if old_inc:
            self.S -= old_inc
            del self.frontier[v]
        self.revealed[v] = 0
        self.revealed_list.remove(v)
        self._resample_halves_at(v, old_inc)

    def _update_unrevealed(self, v):
        srcs = self.incoming.pop(v, set())
        for w in srcs:
            self.out[w].remove(v)
            if self.infected[w]:
                self.H -= 1
        self._resample_halves_at(v, self.inc.get(v, 0))

    def _resample_halves_at(self, v, old_inc):
        """Fresh Bernoulli(beta/n) connection from every revealed vertex to
        the now-unrevealed v, stored as half-edges pointing at v."""
        rng = self.rng
        r = len(self.revealed_list)
        k = binomial_variate(rng, r, self.p)
        sources = set()
        while len(sources) < k:
            w = self.revealed_list[rng.randrange(r)]
            if w not in sources:
                sources.add(w)
        new_inc = 0
        for w in sources:
            self.out[w].add(v)
            self.incoming.setdefault(v, set()).add(w)
            if self.infected[w]:
                self.H += 1
                new_inc += 1
                if self.claimed is not None:
                    self.claimed.add(v)
        self._shift_inc(v, old_inc, new_inc)

    # -- main loop ----------------------------------------------------------

    def step(self) -> bool:
        """Process one event; False once no infected vertices remain."""
        if not self.inf_list:
            return False
        rng = self.rng
        n_inf = len(self.inf_list)
        r_rec = float(n_inf)
        r_tr = self.lam * (self.S + self.H)
        r_upd = self.kappa * len(self.elig_list)
        total = r_rec + r_tr + r_upd
        self.time += rng.expovariate(total)
        self.events += 1
        u = rng.random() * total
        if u < r_rec:
            self._recover(self.inf_list[rng.randrange(n_inf)])
        elif u < r_rec + r_tr:
            x = (u - r_rec) / self.lam
            if x < self.S:
                acc = 0
                v = -1
                for cand, c in self.frontier.items():
                    acc += c
                    v = cand
                    if acc > x:
                        break
                self._infect_revealed(v)
            else:
                x -= self.S
                acc = 0
                src = -1
                for cand in self.inf_list:
                    b = len(self.out[cand])
                    if b:
                        acc += b
                        src = cand
                        if acc > x:
                            break
                targets = self.out[src]
                tgt = tuple(targets)[rng.randrange(len(targets))]
                self._reveal_infected(tgt)
        else:
            v = self.elig_list[rng.randrange(len(self.elig_list))]
            if self.infected[v]:
                self._update_infected(v)
            elif self.revealed[v]:
                self._update_healthy_revealed(v)
            else:
                self._update_unrevealed(v)
        return True

    def snapshot(self) -> ExplorationState:
        ever = {v for v in range(self.n) if self.revealed[v]} | set(self.inf_list)
        return ExplorationState(
            n=self.n,
            time=self.time,
            revealed={v for v in range(self.n) if self.revealed[v]},
            infected=set(self.inf_list),
            adjacency={v: set(s) for v, s in self.adj.items()},
            half_targets={v: set(s) for v, s in self.out.items()},
            claimed=None if self.claimed is None else set(self.claimed),
            ever_infected=ever,
        )

    def check_invariants(self):
        assert len(self.revealed_list) == sum(self.revealed)
        for v in self.inf_list:
            assert self.revealed[v], "infected vertex must be revealed"
        for v, targets in self.out.items():
            assert self.revealed[v]
            for y in targets:
                assert not self.revealed[y], "half-edge target must be unrevealed"
                assert v in self.incoming[y]
        for y, srcs in self.incoming.items():
            assert not self.revealed[y]
            for w in srcs:
                assert y in self.out[w]
        for v, nbrs in self.adj.items():
            for w in nbrs:
                assert self.revealed[w] and v in self.adj[w]
        h = sum(len(self.out[v]) for v in self.inf_list)
        assert h == self.H, (h, self.H)
        s = 0
        for v in self.adj:
            expect = sum(1 for w in self.adj[v] if self.infected[w])
            if not self.revealed[v] or self.infected[v]:
                expect = None
            if expect is not None:
                assert self.frontier.get(v, 0) == (expect if expect else 0)
                if not self.infected[v]:
                    s += expect
        assert s == self.S, (s, self.S)
        for v, c in self.inc.items():
            if self.revealed[v]:
                expect = sum(1 for w in self.adj[v] if self.infected[w])
            else:
                expect = sum(1 for w in self.incoming.get(v, ()) if self.infected[w])
            assert c == expect, (v, c, expect)
            assert (v in self.elig_pos) == (c > 0)
        if self.claimed is not None:
            for v in range(self.n):
                if self.revealed[v]:
                    assert v in self.claimed, "revealed vertex outside claimed set"


def run_exploration_trajectory(
    params: Params,
    initial_infected: Iterable[int] = (0,),
    rng=None,
    epidemic_fraction: Optional[float] = -1.0,
    max_events: int = DEFAULT_EVENT_BUDGET,
    track_claimed: bool = False,
    debug: bool = False,
) -> TrajectoryStats:
    """Adaptive-mode trajectory via lazy reveal; same stats contract as
    run_trajectory, and the same stop rules."""
    if epidemic_fraction == -1.0:
        epidemic_fraction = params.epsilon
    threshold = None if epidemic_fraction is None else epidemic_fraction * params.n
    eng = ExplorationEngine(params, initial_infected, rng, track_claimed)
    if threshold is not None and eng.ever >= threshold:
        return TrajectoryStats(eng.ever, eng.peak, None, "epidemic", 0, 0.0)
    while True:
        if not eng.inf_list:
            return TrajectoryStats(eng.ever, eng.peak, eng.time, "extinct",
                                   eng.events, eng.time)
        if eng.events >= max_events:
            return TrajectoryStats(eng.ever, eng.peak, None, "budget_exceeded",
                                   eng.events, eng.time)
        eng.step()
        if debug:
            eng.check_invariants()
        if threshold is not None and eng.ever >= threshold:
            return TrajectoryStats(eng.ever, eng.peak, None, "epidemic",
                                   eng.events, eng.time)
