"""Pure-Python kernel backend (numpy allowed, no compiled extension).

Semantics must match projprime._kernels._fast exactly.
"""

import math

import numpy as np

BACKEND = "pure"

# Segment of 2**20 odd numbers keeps the working bitmap cache-resident.
_ODD_BLOCK = 1 << 20

# Deterministic strong-probable-prime witnesses for every n < 2**64.
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TINY_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
    67, 71, 73, 79, 83, 89, 97,
)


def _simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit via a plain boolean sieve."""
    if limit < 2:
        return np.empty(0, dtype=np.uint64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.uint64)


def sieve_primes(lo: int, hi: int) -> np.ndarray:
    """Primes in [lo, hi) as an ascending uint64 array."""
    lo = max(lo, 2)
    if hi <= lo:
        return np.empty(0, dtype=np.uint64)
    base = _simple_sieve(math.isqrt(hi - 1))
    odd_base = base[1:]  # skip 2; the bitmap below covers odd numbers only

    chunks = []
    if lo <= 2 < hi:
        chunks.append(np.array([2], dtype=np.uint64))

    low = lo if lo % 2 == 1 else lo + 1
    span = 2 * _ODD_BLOCK
    while low < hi:
        high = min(low + span, hi)
        count = (high - low + 1) // 2
        mask = np.ones(count, dtype=bool)
        for p in odd_base:
            p = int(p)
            start = max(p * p, ((low + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            if start >= high:
                continue
            mask[(start - low) // 2 :: p] = False
        hits = np.flatnonzero(mask)
        if hits.size:
            chunks.append((low + 2 * hits).astype(np.uint64))
        low = high if high % 2 == 1 else high + 1

    if not chunks:
        return np.empty(0, dtype=np.uint64)
    return np.concatenate(chunks)


def _sprp(n: int, a: int, d: int, s: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime_u64(n: int) -> bool:
    """Deterministic primality for 0 <= n < 2**64 (12-witness strong test)."""
    if n < 2:
        return False
    for p in _TINY_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _WITNESSES:
        if not _sprp(n, a, d, s):
            return False
    return True


def prime_mask_u64(values: np.ndarray) -> np.ndarray:
    """Elementwise is_prime_u64 over a uint64 array."""
    vals = np.ascontiguousarray(values, dtype=np.uint64)
    mask = vals >= 2
    # Vectorized small-prime screen; keeps the Python loop to survivors only.
    for p in _TINY_PRIMES:
        mask &= (vals % p != 0) | (vals == p)
    out = np.zeros(vals.size, dtype=bool)
    for i in np.flatnonzero(mask):
        out[i] = is_prime_u64(int(vals[i]))
    return out
