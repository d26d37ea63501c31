"""Closed-form threshold conditions, bounds, and the small processes behind them.

Everything here is scalar arithmetic plus two light Monte Carlo helpers: a
two-type branching process (active/dormant infection units, mimicking fast
neighborhood turnover) and a three-state mean-field chain whose weighted
count is a supermartingale in the subcritical phase.
"""

from __future__ import annotations

import bisect
import logging
import math
import random
from dataclasses import dataclass
from typing import Optional

from .randutil import as_random

__all__ = [
    "TheoryReport",
    "MeanfieldDecay",
    "TwoTypeOutcome",
    "MeanfieldPath",
    "sir_offspring_mean",
    "meta_offspring_lower_bound",
    "supercritical_forest_condition",
    "branching_top_eigenvalue",
    "simulate_two_type_branching",
    "meanfield_decay",
    "simulate_meanfield",
    "z_bound",
    "slow_factor_theta",
    "infection_mean_bound",
    "subcritical_constant",
    "subcritical_constant_closed_form",
    "evaluate_conditions",
    "critical_lambda_small_product",
    "critical_lambda_fast_updates",
    "critical_lambda_simple",
    "critical_lambda_forest",
    "critical_lambda_nonadaptive",
]

log = logging.getLogger(__name__)

SMALL_PRODUCT_BOUND = 0.21


def sir_offspring_mean(lam: float, beta: float, kappa: float) -> float:
    """Mean offspring of the one-shot (SIR-style) lower-bound process."""
    return beta * lam / (1.0 + 2.0 * kappa + lam)


def _transmit_exponent(lam: float, beta: float, kappa: float) -> float:
    # beta*lam/(kappa+lam), read as 0 when both rates vanish
    if lam + kappa == 0:
        return 0.0
    return beta * lam / (kappa + lam)


def meta_offspring_lower_bound(lam: float, beta: float, kappa: float) -> float:
    """Lower bound on the mean number of fresh hosts seeded per host."""
    mu = sir_offspring_mean(lam, beta, kappa)
    if mu >= 1.0:
        raise ValueError("bound needs the one-shot mean below 1")
    p_any = 1.0 - math.exp(-_transmit_exponent(lam, beta, kappa))
    nonzero = p_any * (lam + kappa) / (1.0 + lam + 2.0 * kappa)
    return (kappa / (1.0 + kappa)) * nonzero / (1.0 - mu * mu)


def supercritical_forest_condition(lam: float, beta: float, kappa: float) -> bool:
    """Sufficient condition for forest survival: one-shot mean above the
    reinfection-discount threshold."""
    lhs = sir_offspring_mean(lam, beta, kappa)
    p_any = 1.0 - math.exp(-_transmit_exponent(lam, beta, kappa))
    radicand = 1.0 - kappa * (lam + kappa) * p_any / (
        (1.0 + kappa) * (1.0 + 2.0 * kappa + lam))
    if radicand < 0.0:
        log.warning("discount radicand %g < 0; condition reduces to lhs > 0",
                    radicand)
        return lhs > 0.0
    return lhs > math.sqrt(radicand)


def branching_top_eigenvalue(lam: float, beta: float, kappa: float,
                             delta: float = 0.0, eps: float = 0.0) -> float:
    """Growth rate of the two-type (active/dormant) branching process.

    b = lam*beta*(1-delta) is the effective branching rate, k = kappa*(1-eps)
    the activation rate; the mean matrix's top eigenvalue has a closed form
    and tends to lam*beta*(1-delta) - 1 as kappa grows.
    """
    b = lam * beta * (1.0 - delta)
    k = kappa * (1.0 - eps)
    return 0.5 * (math.sqrt(k * k + 6.0 * k * b + b * b) - 2.0 - k - b)


@dataclass(frozen=True)
class MeanfieldDecay:
    c: float
    eps_decay: float
    defined: bool


def meanfield_decay(lam: float, beta: float, kappa: float) -> MeanfieldDecay:
    """Weight C and decay rate for the mean-field supermartingale M = n1 + C*n2.

    Undefined at lam*beta = 0 (the weight diverges); eps_decay > 0 exactly
    when lam*beta < 1 and kappa > lam*beta*(1+lam*beta)/(1-lam*beta).
    """
    x = lam * beta
    if x == 0.0:
        return MeanfieldDecay(math.nan, math.nan, False)
    disc = (1.0 - kappa) ** 2 + 4.0 * x * (1.0 + kappa + x)
    c = (1.0 - kappa + 2.0 * x + math.sqrt(disc)) / (4.0 * x)
    eps_decay = 0.5 * (1.0 + kappa) - 0.5 * math.sqrt(disc)
    return MeanfieldDecay(c, eps_decay, True)


def z_bound(lam: float, beta: float) -> float:
    """Upper bound on the mean subtree partition value over GW hosts."""
    x = lam * beta
    if x * math.e >= 1.0:
        raise ValueError("bound needs lam*beta*e < 1")
    tail = math.e**3 * lam**3 * beta**2 / (3.0 * math.sqrt(6.0 * math.pi)
                                           * (1.0 - x * math.e))
    return 1.0 + lam + beta * lam * lam + tail


def slow_factor_theta(rho: float) -> float:
    """min over k >= 2 of rho^k / (k-1); needs rho > 1."""
    if rho <= 1.0:
        raise ValueError("rho must be > 1")
    k = 2
    best = rho * rho
    # successive ratio rho*(k-1)/k is increasing; stop once it reaches 1
    while rho * (k - 1) / k < 1.0:
        k += 1
        cand = rho**k / (k - 1)
        if cand < best:
            best = cand
    return best


def infection_mean_bound(lam: float, beta: float) -> float:
    """Upper bound on mean ever-infected per host, for lam*beta*e <= 3/4."""
    x = lam * beta
    if x * math.e > 0.75:
        raise ValueError("bound needs lam*beta*e <= 3/4")
    inner = 1.0 + math.sqrt(2.0 / (3.0 * math.pi)) * 2.0 * math.e**3 * x / (
        9.0 - 12.0 * x * math.e)
    return 1.0 + (27.0 * x / 16.0) * inner


def _quadratic_coefficients():
    a = 81.0 * math.e / 4.0 - math.sqrt(2.0 / (3.0 * math.pi)) * 27.0 * math.e**3 / 8.0
    b = 12.0 * math.e + 243.0 / 16.0
    return a, b


def subcritical_constant() -> float:
    """Largest product lam*beta for which the per-host mean bound closes.

    Smaller root of a*X^2 - b*X + 9 = 0, taken in the numerically stable
    form 18 / (b + sqrt(b^2 - 36 a)).
    """
    a, b = _quadratic_coefficients()
    disc = b * b - 36.0 * a
    return 18.0 / (b + math.sqrt(disc))


def subcritical_constant_closed_form() -> float:
    """Same constant written out explicitly; cross-check for the quadratic."""
    e = math.e
    rad = 1152.0 * e**3 * math.sqrt(6.0 / math.pi) + 4096.0 * e * e \
        - 10368.0 * e + 6561.0
    return (81.0 + 64.0 * e - math.sqrt(rad)) / (12.0 * e * (18.0 - e * e
                                                             * math.sqrt(6.0 / math.pi)))


# -- threshold curves in the (lambda, kappa) plane --------------------------

def critical_lambda_small_product(beta: float) -> float:
    return SMALL_PRODUCT_BOUND / beta


def critical_lambda_fast_updates(beta: float, kappa: float) -> float:
    if beta <= 0.5:
        return math.inf
    return kappa / (2.0 * beta - 1.0)


def critical_lambda_simple(beta: float, kappa: float) -> float:
    if beta <= 1.0:
        return math.inf
    return (1.0 + 2.0 * kappa) / (beta - 1.0)


def critical_lambda_forest(beta: float, kappa: float) -> float:
    """Smallest lambda satisfying the forest survival condition, by bisection."""
    if beta <= 1.0:
        return math.inf
    hi = critical_lambda_simple(beta, kappa) * (1.0 + 1e-9) + 1e-9
    if not supercritical_forest_condition(hi, beta, kappa):
        return math.inf
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if supercritical_forest_condition(mid, beta, kappa):
            hi = mid
        else:
            lo = mid
    return hi


def critical_lambda_nonadaptive(beta: float) -> float:
    if beta <= 0.0:
        return math.inf
    return 1.0 / beta


@dataclass(frozen=True)
class TheoryReport:
    """Every closed-form verdict at one parameter point.

    Flags are one-sided sufficient conditions, not a partition: both
    subcritical flags false says nothing by itself.
    """

    lam: float
    beta: float
    kappa: float
    subcritical_small_product: bool   # lam*beta < 0.21
    subcritical_fast_updates: bool    # (2*beta - 1)*lam < kappa
    supercritical_forest: bool
    supercritical_simple: bool        # lam*beta > 1 + 2*kappa + lam
    nonadaptive_subcritical: bool     # lam*beta < 1
    nonadaptive_supercritical: bool   # lam*beta > 1
    mu: float
    meta_lower_bound: Optional[float]
    branching_eig: float
    meanfield_c: Optional[float]
    meanfield_eps: Optional[float]
    z_bound: Optional[float]
    infection_mean_bound: Optional[float]

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "beta": self.beta,
            "kappa": self.kappa,
            "subcritical_small_product": self.subcritical_small_product,
            "subcritical_fast_updates": self.subcritical_fast_updates,
            "supercritical_forest": self.supercritical_forest,
            "supercritical_simple": self.supercritical_simple,
            "nonadaptive_subcritical": self.nonadaptive_subcritical,
            "nonadaptive_supercritical": self.nonadaptive_supercritical,
            "mu": self.mu,
            "meta_lower_bound": self.meta_lower_bound,
            "branching_eig": self.branching_eig,
            "meanfield_c": self.meanfield_c,
            "meanfield_eps": self.meanfield_eps,
            "z_bound": self.z_bound,
            "infection_mean_bound": self.infection_mean_bound,
        }


def evaluate_conditions(lam: float, beta: float, kappa: float) -> TheoryReport:
    """Evaluate every flag and bound, with out-of-domain values as None."""
    if lam < 0 or beta < 0 or kappa < 0:
        raise ValueError("parameters must be >= 0")
    x = lam * beta
    mu = sir_offspring_mean(lam, beta, kappa)
    meta_lb = meta_offspring_lower_bound(lam, beta, kappa) if mu < 1.0 else None
    mf = meanfield_decay(lam, beta, kappa)
    return TheoryReport(
        lam=lam,
        beta=beta,
        kappa=kappa,
        subcritical_small_product=x < SMALL_PRODUCT_BOUND,
        subcritical_fast_updates=(2.0 * beta - 1.0) * lam < kappa,
        supercritical_forest=supercritical_forest_condition(lam, beta, kappa),
        supercritical_simple=x > 1.0 + 2.0 * kappa + lam,
        nonadaptive_subcritical=x < 1.0,
        nonadaptive_supercritical=x > 1.0,
        mu=mu,
        meta_lower_bound=meta_lb,
        branching_eig=branching_top_eigenvalue(lam, beta, kappa),
        meanfield_c=mf.c if mf.defined else None,
        meanfield_eps=mf.eps_decay if mf.defined else None,
        z_bound=z_bound(lam, beta) if x * math.e < 1.0 else None,
        infection_mean_bound=(infection_mean_bound(lam, beta)
                              if x * math.e <= 0.75 else None),
    )


# -- two-type branching ------------------------------------------------------

@dataclass(frozen=True)
class TwoTypeOutcome:
    extinct: bool
    capped: bool
    extinction_time: Optional[float]
    path: list  # [(t, active, dormant)]


def simulate_two_type_branching(lambda_beta_star: float, kappa_eff: float,
                                t_max: float, rng=None, eps: float = 0.0,
                                pop_cap: int = 2000) -> TwoTypeOutcome:
    """Active units die at 1 and split into two dormant at lambda_beta_star;
    dormant units die at 1 and wake at kappa_eff.  Start is one active unit
    (one dormant with probability eps).  Hitting pop_cap counts as survival
    with the capped flag set."""
    if lambda_beta_star < 0 or kappa_eff < 0:
        raise ValueError("rates must be >= 0")
    rng = as_random(rng)
    b = lambda_beta_star
    k = kappa_eff
    if rng.random() < eps:
        a, d = 0, 1
    else:
        a, d = 1, 0
    t = 0.0
    path = [(0.0, a, d)]
    while a + d > 0 and a + d < pop_cap:
        total = a * (1.0 + b) + d * (1.0 + k)
        t += rng.expovariate(total)
        if t >= t_max:
            return TwoTypeOutcome(False, False, None, path)
        u = rng.random() * total
        if u < a:
            a -= 1
        elif u < a * (1.0 + b):
            a -= 1
            d += 2
        elif u < a * (1.0 + b) + d:
            d -= 1
        else:
            d -= 1
            a += 1
        path.append((t, a, d))
    if a + d == 0:
        return TwoTypeOutcome(True, False, t, path)
    return TwoTypeOutcome(False, True, None, path)


# -- three-state mean-field chain -------------------------------------------

@dataclass
class MeanfieldPath:
    times: list
    n1: list
    n2: list
    c: float

    def m_at(self, t: float) -> float:
        i = bisect.bisect_right(self.times, t) - 1
        if i < 0:
            i = 0
        return self.n1[i] + self.c * self.n2[i]


def simulate_meanfield(n: int, lam: float, beta: float, kappa: float,
                       t_end: float, rng=None, init_twos: int = 1,
                       init_ones: int = 0) -> MeanfieldPath:
    """Complete-graph caricature: states 0 (healthy), 1 (recovering),
    2 (infectious-and-recovering).  Any vertex in state >= 1 hits every other
    vertex at rate lam*beta/n, after which both sit in state 2; 2 -> 1 at
    kappa and 1 -> 0 at rate 1.

    Returns the event path of (n1, n2) with the supermartingale weight C
    attached (C falls back to 1 when lam*beta = 0, where it is undefined).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if init_twos + init_ones > n:
        raise ValueError("more initial marks than vertices")
    rng = as_random(rng)
    mf = meanfield_decay(lam, beta, kappa)
    c = mf.c if mf.defined else 1.0
    pair_rate = lam * beta / n
    n1, n2 = init_ones, init_twos
    t = 0.0
    times = [0.0]
    path1 = [n1]
    path2 = [n2]
    while t < t_end:
        m = n1 + n2
        if m == 0:
            break
        r_inf = m * (n - 1) * pair_rate
        total = r_inf + kappa * n2 + n1
        t += rng.expovariate(total)
        if t >= t_end:
            break
        u = rng.random() * total
        if u < r_inf:
            source_is_1 = rng.random() * m < n1
            if source_is_1:
                others_1 = n1 - 1
                others_2 = n2
            else:
                others_1 = n1
                others_2 = n2 - 1
            others_0 = n - 1 - others_1 - others_2
            x = rng.random() * (n - 1)
            if x < others_0:
                n2 += 1  # fresh vertex straight to state 2
            elif x < others_0 + others_1:
                n1 -= 1
                n2 += 1
            # target already in state 2: nothing changes for the target
            if source_is_1:
                n1 -= 1
                n2 += 1
        elif u < r_inf + kappa * n2:
            n2 -= 1
            n1 += 1
        else:
            n1 -= 1
        times.append(t)
        path1.append(n1)
        path2.append(n2)
    return MeanfieldPath(times, path1, path2, c)
