"""Degree chain seen from an infected hub, and its quasi-stationary law.

The hub's degree performs a birth-death-resample walk on {0..L}: down steps
at kappa*d (a neighbor updates away), up steps at kappa*beta_star (capped at
L), and at rate kappa the hub itself updates, redrawing the degree from a
truncated Poisson(beta_star).  Each of the d neighbors is a fresh infection
target, so the walk is killed at rate lam*d.  The quasi-stationary law alpha
solves alpha Q^S = -rho alpha with rho the escape rate; started from alpha,
the kill time is exactly Exp(rho), and rho = lam * E_alpha(degree).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .randutil import as_random

__all__ = [
    "TruncPoisson",
    "StarGenerator",
    "QsdResult",
    "QsdMoments",
    "default_truncation",
    "truncated_poisson",
    "star_generator",
    "quasi_stationary",
    "flow_inequality_check",
    "qsd_moments",
    "simulate_star_hitting_time",
    "simulate_star_hitting_times",
]

_BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class TruncPoisson:
    beta_star: float
    L: int
    weights: np.ndarray  # shape (L+1,), sums to 1

    def mean(self) -> float:
        return float(np.arange(self.L + 1) @ self.weights)


@dataclass(frozen=True)
class StarGenerator:
    beta_star: float
    kappa: float
    lam: float
    L: int
    Q: np.ndarray  # shape (L+1, L+2); last column is the killed state


@dataclass(frozen=True)
class QsdResult:
    gen: StarGenerator
    alpha: np.ndarray
    rho: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class QsdMoments:
    mean: float
    second_moment: float
    mean_bounded: bool  # mean <= beta_star
    second_bounded: bool  # second moment <= (4/3) beta_star + beta_star^2


def default_truncation(beta_star: float) -> int:
    """Degree cap comfortably above anything the walk visits."""
    return math.ceil(10 * beta_star + 20)


def truncated_poisson(beta_star: float, L: int) -> TruncPoisson:
    """Poisson(beta_star) conditioned on {0..L}."""
    if beta_star < 0:
        raise ValueError("beta_star must be >= 0")
    if L < 0:
        raise ValueError("L must be >= 0")
    if beta_star == 0:
        w = np.zeros(L + 1)
        w[0] = 1.0
        return TruncPoisson(beta_star, L, w)
    k = np.arange(L + 1)
    logw = k * math.log(beta_star) - np.array([math.lgamma(i + 1) for i in k])
    logw -= logw.max()
    w = np.exp(logw)
    w /= w.sum()
    return TruncPoisson(beta_star, L, w)


def star_generator(beta_star: float, kappa: float, lam: float, L: int) -> StarGenerator:
    """Build the (L+1) x (L+2) killed generator.

    Hub-update resampling that lands on the current degree is no event, so
    that rate mass sits on the diagonal rather than in a self-loop.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if beta_star < 0 or kappa < 0 or lam < 0:
        raise ValueError("rates must be >= 0")
    pi = truncated_poisson(beta_star, L).weights
    Q = np.zeros((L + 1, L + 2))
    for d in range(L + 1):
        if d > 0:
            Q[d, d - 1] += kappa * d
        if d < L:
            Q[d, d + 1] += kappa * beta_star
        Q[d, :L + 1] += kappa * pi
        Q[d, d] -= kappa * pi[d]  # folded self-resample
        Q[d, L + 1] = lam * d
        Q[d, d] -= Q[d].sum() - Q[d, d]
    return StarGenerator(beta_star, kappa, lam, L, Q)


def quasi_stationary(gen: StarGenerator, tol: float = 1e-12,
                     max_iter: int = 10**6) -> QsdResult:
    """Power iteration on the uniformized substochastic kernel.

    Convergence is declared when |alpha Q^S + rho alpha|_1 drops below
    tol * max(1, Lambda), Lambda being the uniformization rate; the raw
    residual is what QsdResult reports.  With lam=0 there is no killing and
    the fixed point is the stationary law with rho=0.
    """
    Qs = gen.Q[:, :gen.L + 1]
    # the diagonal already carries the full exit rate, killing included
    lam_max = float(np.max(-np.diag(Qs)))
    if lam_max <= 0:
        # all rates vanish; the start law is trivially invariant
        alpha = truncated_poisson(gen.beta_star, gen.L).weights
        return QsdResult(gen, alpha, 0.0, 0, 0.0)
    P = np.identity(gen.L + 1) + Qs / lam_max
    alpha = truncated_poisson(gen.beta_star, gen.L).weights.copy()
    if not alpha.all():
        alpha = np.full(gen.L + 1, 1.0 / (gen.L + 1))
    threshold = tol * max(1.0, lam_max)
    for it in range(1, max_iter + 1):
        nxt = alpha @ P
        s = nxt.sum()
        nxt /= s
        rho = lam_max * (1.0 - s)
        residual = float(np.abs(nxt @ Qs + rho * nxt).sum())
        alpha = nxt
        if residual <= threshold:
            return QsdResult(gen, alpha, rho, it, residual)
    raise RuntimeError(
        f"quasi_stationary failed to converge in {max_iter} iterations; "
        f"last residual {residual:.3e}")


def flow_inequality_check(gen: StarGenerator, alpha: np.ndarray, x: int):
    """Probability flow across the cut {0..x-1} | {x..L} under alpha.

    Returns (holds, margin) with margin = upward flow minus downward flow;
    at the exact quasi-stationary law the margin is provably >= 0.
    """
    if not 1 <= x <= gen.L:
        raise ValueError("cut must satisfy 1 <= x <= L")
    Qs = gen.Q[:, :gen.L + 1]
    up = float(alpha[:x] @ Qs[:x, x:].sum(axis=1))
    down = float(alpha[x:] @ Qs[x:, :x].sum(axis=1))
    margin = up - down
    return margin >= 0.0, margin


def qsd_moments(result: QsdResult) -> QsdMoments:
    d = np.arange(result.gen.L + 1)
    mean = float(d @ result.alpha)
    second = float((d * d) @ result.alpha)
    b = result.gen.beta_star
    return QsdMoments(
        mean=mean,
        second_moment=second,
        mean_bounded=mean <= b + _BOUND_SLACK,
        second_bounded=second <= (4.0 / 3.0) * b + b * b + _BOUND_SLACK,
    )


def _init_weights(gen: StarGenerator, init) -> np.ndarray:
    if isinstance(init, str):
        if init == "truncated_poisson":
            return truncated_poisson(gen.beta_star, gen.L).weights
        if init == "qsd":
            return quasi_stationary(gen).alpha
        raise ValueError("init must be 'truncated_poisson', 'qsd', or weights")
    w = np.asarray(init, dtype=float)
    if w.shape != (gen.L + 1,) or w.min() < 0 or not math.isclose(w.sum(), 1.0,
                                                                  rel_tol=1e-9):
        raise ValueError("init weights must be a distribution over 0..L")
    return w


def simulate_star_hitting_time(beta_star: float, kappa: float, lam: float,
                               L: int, init="truncated_poisson", rng=None) -> float:
    """One exact sample of the kill time; +inf when killing is unreachable."""
    gen = star_generator(beta_star, kappa, lam, L)
    rng = as_random(rng)
    weights = _init_weights(gen, init)
    cdf_init = np.cumsum(weights)
    pi_cdf = np.cumsum(truncated_poisson(beta_star, L).weights)
    d = int(np.searchsorted(cdf_init, rng.random(), side="right"))
    if lam == 0.0:
        return math.inf  # no killing anywhere, however much the walk moves
    t = 0.0
    while True:
        r_abs = lam * d
        r_down = kappa * d
        r_up = kappa * beta_star if d < L else 0.0
        r_res = kappa
        total = r_abs + r_down + r_up + r_res
        if total == 0.0:
            return math.inf
        t += rng.expovariate(total)
        u = rng.random() * total
        if u < r_abs:
            return t
        if u < r_abs + r_down:
            d -= 1
        elif u < r_abs + r_down + r_up:
            d += 1
        else:
            d = int(np.searchsorted(pi_cdf, rng.random(), side="right"))


def simulate_star_hitting_times(beta_star: float, kappa: float, lam: float,
                                L: int, size: int, init="truncated_poisson",
                                np_rng=None) -> np.ndarray:
    """Vectorized batch of kill-time samples (same chain as the scalar form)."""
    gen = star_generator(beta_star, kappa, lam, L)
    np_rng = np.random.default_rng(np_rng) if not isinstance(
        np_rng, np.random.Generator) else np_rng
    weights = _init_weights(gen, init)
    pi_cdf = np.cumsum(truncated_poisson(beta_star, L).weights)
    d = np_rng.choice(L + 1, size=size, p=weights / weights.sum())
    t = np.zeros(size)
    alive = np.arange(size)
    if lam == 0.0:
        return np.full(size, np.inf)
    while alive.size:
        da = d[alive]
        r_abs = lam * da
        r_down = kappa * da
        r_up = np.where(da < L, kappa * beta_star, 0.0)
        total = r_abs + r_down + r_up + kappa
        frozen = total == 0.0
        if frozen.any():
            t[alive[frozen]] = np.inf
            keep = ~frozen
            alive = alive[keep]
            da = da[keep]
            r_abs = r_abs[keep]
            r_down = r_down[keep]
            r_up = r_up[keep]
            total = total[keep]
        if not alive.size:
            break
        t[alive] += np_rng.exponential(1.0 / total)
        u = np_rng.random(alive.size) * total
        absorbed = u < r_abs
        down = ~absorbed & (u < r_abs + r_down)
        up = ~absorbed & ~down & (u < r_abs + r_down + r_up)
        res = ~absorbed & ~down & ~up
        nd = da.copy()
        nd[down] -= 1
        nd[up] += 1
        if res.any():
            nd[res] = np.searchsorted(pi_cdf, np_rng.random(int(res.sum())),
                                      side="right")
        d[alive] = nd
        alive = alive[~absorbed]
    return t
