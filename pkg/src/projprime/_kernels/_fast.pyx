# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend: segmented sieve, u64 primality, bulk prime masks."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdint cimport uint8_t, uint64_t
from libc.stdlib cimport free, malloc

cnp.import_array()

BACKEND = "compiled"

cdef extern from *:
    """
    static inline unsigned long long pp_mulmod(unsigned long long a,
                                               unsigned long long b,
                                               unsigned long long m) {
        return (unsigned long long)(((unsigned __int128)a * b) % m);
    }
    """
    uint64_t pp_mulmod(uint64_t a, uint64_t b, uint64_t m) nogil


cdef uint64_t[12] WITNESSES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
cdef uint64_t[25] TINY = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
                          47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]

# Segment of 2**20 odd numbers keeps the working bitmap cache-resident.
cdef enum:
    ODD_BLOCK = 1048576


cdef uint64_t pp_powmod(uint64_t b, uint64_t e, uint64_t m) nogil:
    cdef uint64_t r = 1 % m
    b %= m
    while e:
        if e & 1:
            r = pp_mulmod(r, b, m)
        b = pp_mulmod(b, b, m)
        e >>= 1
    return r


cdef bint _sprp(uint64_t n, uint64_t a, uint64_t d, int s) nogil:
    cdef uint64_t x = pp_powmod(a, d, n)
    cdef int i
    if x == 1 or x == n - 1:
        return True
    for i in range(s - 1):
        x = pp_mulmod(x, x, n)
        if x == n - 1:
            return True
    return False


cdef bint _is_prime(uint64_t n) nogil:
    cdef int i, s
    cdef uint64_t d
    if n < 2:
        return False
    for i in range(25):
        if n == TINY[i]:
            return True
        if n % TINY[i] == 0:
            return False
    d = n - 1
    s = 0
    while d % 2 == 0:
        d >>= 1
        s += 1
    for i in range(12):
        if not _sprp(n, WITNESSES[i], d, s):
            return False
    return True


def is_prime_u64(n) -> bool:
    """Deterministic primality for 0 <= n < 2**64 (12-witness strong test)."""
    if n < 0 or n >= (1 << 64):
        raise OverflowError("is_prime_u64 requires 0 <= n < 2**64")
    return bool(_is_prime(<uint64_t> n))


def prime_mask_u64(values) -> cnp.ndarray:
    """Elementwise is_prime_u64 over a uint64 array."""
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] vals = \
        np.ascontiguousarray(values, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] out = \
        np.zeros(vals.shape[0], dtype=np.bool_)
    cdef Py_ssize_t i, n = vals.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _is_prime(vals[i])
    return out


def sieve_primes(lo, hi) -> cnp.ndarray:
    """Primes in [lo, hi) as an ascending uint64 array."""
    cdef uint64_t ulo = max(<object> lo, 2)
    if hi <= ulo:
        return np.empty(0, dtype=np.uint64)
    cdef uint64_t uhi = hi

    # Base primes up to sqrt(hi - 1), simple byte sieve.
    cdef uint64_t root = <uint64_t> sqrt(<double> (uhi - 1)) + 2
    while root * root > uhi - 1:
        root -= 1
    cdef uint8_t *flags = <uint8_t *> malloc(root + 1)
    if flags is NULL:
        raise MemoryError()
    cdef uint64_t i, j, p
    for i in range(root + 1):
        flags[i] = 1
    if root >= 0:
        flags[0] = 0
    if root >= 1:
        flags[1] = 0
    i = 2
    while i * i <= root:
        if flags[i]:
            j = i * i
            while j <= root:
                flags[j] = 0
                j += i
        i += 1

    cdef list base = []
    for i in range(3, root + 1):
        if flags[i]:
            base.append(i)
    free(flags)

    cdef cnp.ndarray[cnp.uint64_t, ndim=1] odd_base = \
        np.array(base, dtype=np.uint64) if base else np.empty(0, dtype=np.uint64)
    cdef Py_ssize_t nbase = odd_base.shape[0]

    chunks = []
    if ulo <= 2 < uhi:
        chunks.append(np.array([2], dtype=np.uint64))

    cdef uint8_t *mask = <uint8_t *> malloc(ODD_BLOCK)
    if mask is NULL:
        raise MemoryError()

    cdef uint64_t low = ulo if ulo % 2 == 1 else ulo + 1
    cdef uint64_t high, start, count, k
    cdef Py_ssize_t b, nhits
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] seg
    try:
        while low < uhi:
            high = low + 2 * ODD_BLOCK
            if high > uhi:
                high = uhi
            count = (high - low + 1) // 2
            with nogil:
                for k in range(count):
                    mask[k] = 1
                for b in range(nbase):
                    p = odd_base[b]
                    start = p * p
                    if start < low:
                        start = ((low + p - 1) // p) * p
                        if start % 2 == 0:
                            start += p
                    if start >= high:
                        continue
                    k = (start - low) // 2
                    while k < count:
                        mask[k] = 0
                        k += p
            nhits = 0
            for k in range(count):
                if mask[k]:
                    nhits += 1
            if nhits:
                seg = np.empty(nhits, dtype=np.uint64)
                nhits = 0
                for k in range(count):
                    if mask[k]:
                        seg[nhits] = low + 2 * k
                        nhits += 1
                chunks.append(seg)
            if high % 2 == 1:
                low = high
            else:
                low = high + 1
    finally:
        free(mask)

    if not chunks:
        return np.empty(0, dtype=np.uint64)
    return np.concatenate(chunks)
