"""Scalar sampling helpers and reproducible stream derivation.

The event loops draw huge numbers of scalar variates, so they run on
``random.Random`` streams rather than numpy generators; the two samplers
here fill the gaps (Poisson, binomial) with plain CDF inversion, which is
exact up to float rounding and fast for the small means we care about.
"""

from __future__ import annotations

import hashlib
import math
import random
import struct

__all__ = [
    "poisson_variate",
    "binomial_variate",
    "derive_seed",
    "as_random",
]

# Inversion walks the pmf upward from 0; for means this large the walk
# gets slow and exp(-mean) underflows, so refuse rather than mis-sample.
_MAX_INVERSION_MEAN = 500.0


def poisson_variate(rng: random.Random, mean: float) -> int:
    """Draw Poisson(mean) by CDF inversion."""
    if mean < 0:
        raise ValueError("Poisson mean must be >= 0")
    if mean == 0:
        return 0
    if mean > _MAX_INVERSION_MEAN:
        raise ValueError(f"Poisson mean {mean} too large for inversion sampling")
    u = rng.random()
    p = math.exp(-mean)
    acc = p
    k = 0
    while u > acc:
        k += 1
        p *= mean / k
        acc += p
        if p == 0.0:  # float exhaustion in the far tail
            break
    return k


def binomial_variate(rng: random.Random, n: int, p: float) -> int:
    """Draw Binomial(n, p) by CDF inversion."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("binomial p must be in [0, 1]")
    if n < 0:
        raise ValueError("binomial n must be >= 0")
    if n == 0 or p == 0.0:
        return 0
    if p == 1.0:
        return n
    if p > 0.5:
        return n - binomial_variate(rng, n, 1.0 - p)
    if n * p > _MAX_INVERSION_MEAN:
        raise ValueError(f"binomial mean {n * p} too large for inversion sampling")
    u = rng.random()
    q = 1.0 - p
    ratio = p / q
    pk = q**n
    acc = pk
    k = 0
    while u > acc:
        k += 1
        if k > n:
            return n
        pk *= ratio * (n - k + 1) / k
        acc += pk
        if pk == 0.0:
            break
    return k


def derive_seed(*parts: int) -> int:
    """Collapse (master_seed, cell_index, replica_index, ...) into one 64-bit seed.

    Uses blake2b over the packed parts, so streams are independent of
    execution order and stable across platforms and processes.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(struct.pack("<q", part))
    return int.from_bytes(h.digest(), "little")


def as_random(rng: random.Random | int | None) -> random.Random:
    """Accept a stream, a seed, or None (fresh entropy) and return a stream."""
    if isinstance(rng, random.Random):
        return rng
    return random.Random(rng)
