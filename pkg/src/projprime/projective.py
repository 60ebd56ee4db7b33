"""Repunit candidates m = (q^n - 1)/(q - 1) and their compositeness filters.

The structural filter encodes three provable rejection rules:

  N-COMPOSITE  composite exponent n: 1 + t + ... + t^(n-1) splits over Z,
               so repunit(q, d) divides m for any prime d | n.
  E-PRUNE      q = p^e with e >= 2 and n > e: the identity
               m * repunit(p, e) = repunit(p, n) * repunit(p^n, e)
               exhibits m as composite (both right factors exceed the left
               cofactor).
  Q-CONGRUENT  q ≡ 1 (mod n): summing n unit terms mod n shows n | m.

After those, any prime divisor r of m (n an odd prime, q ≢ 1 mod n) must
satisfy r ≡ 1 (mod 2n), which makes targeted trial division unusually cheap:
only primes in that progression are ever tried.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Union

try:
    import gmpy2
except ImportError:  # pragma: no cover
    gmpy2 = None

from . import arith
from ._kernels import is_prime_u64
from .arith import DEFAULT_POLICY, Primality, WitnessPolicy
from .errors import DomainError

RULE_N_COMPOSITE = "N-COMPOSITE"
RULE_E_PRUNE = "E-PRUNE"
RULE_Q_CONGRUENT = "Q-CONGRUENT"
RULE_TRIAL = "TRIAL"

DEFAULT_TRIAL_BOUND = 100_000

_WORD_LIMIT = 1 << 63


def repunit(q: int, n: int) -> int:
    """1 + q + q^2 + ... + q^(n-1), i.e. (q^n - 1)/(q - 1), exactly."""
    if q < 2:
        raise DomainError("repunit base must be >= 2")
    if n < 1:
        raise DomainError("repunit length must be >= 1")
    return (q ** n - 1) // (q - 1)


def repunit_mod(q: int, n: int, mod: int) -> int:
    """(1 + q + ... + q^(n-1)) mod `mod` without forming the full value."""
    if mod <= 0:
        raise DomainError("modulus must be >= 1")
    r, qp = 0, 1  # repunit of length L, q^L (mod), built MSB-first over n
    for bit in bin(n)[2:]:
        r = (r * qp + r) % mod
        qp = qp * qp % mod
        if bit == "1":
            r = (r * q + 1) % mod
            qp = qp * q % mod
    return r


def _least_prime_factor(n: int) -> int:
    for p in arith.SMALL_PRIMES:
        if p * p > n:
            return n
        if n % p == 0:
            return p
    if is_prime_u64(n):
        return n
    f = arith.SMALL_TRIAL_BOUND + 1
    while f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return n


@dataclass(frozen=True)
class PrimePower:
    """q = p^e for a word-sized prime p and exponent e >= 1."""

    p: int
    e: int = 1
    q: int = field(init=False)

    def __post_init__(self):
        if not 2 <= self.p < _WORD_LIMIT:
            raise DomainError("p must be a word-sized integer >= 2")
        if not is_prime_u64(self.p):
            raise DomainError(f"p = {self.p} is not prime")
        if not 1 <= self.e < _WORD_LIMIT:
            raise DomainError("e must be a word-sized integer >= 1")
        object.__setattr__(self, "q", self.p ** self.e)


@dataclass(frozen=True)
class ProjectiveCandidate:
    """A triple (q = p^e, n, m) with m = (q^n - 1)/(q - 1) by construction."""

    base: PrimePower
    n: int
    m: int = field(init=False)

    def __post_init__(self):
        if not 2 <= self.n < _WORD_LIMIT:
            raise DomainError("n must be a word-sized integer >= 2")
        object.__setattr__(self, "m", repunit(self.base.q, self.n))

    @classmethod
    def make(cls, p: int, e: int, n: int) -> "ProjectiveCandidate":
        return cls(PrimePower(p, e), n)

    @property
    def q(self) -> int:
        return self.base.q


@dataclass(frozen=True)
class FilterVerdict:
    """Result of a compositeness filter: a named rule plus witness, or survival."""

    rule: Optional[str] = None
    witness: Union[int, tuple, None] = None

    @property
    def survives(self) -> bool:
        return self.rule is None


SURVIVES = FilterVerdict()


def structural_filter(c: ProjectiveCandidate) -> FilterVerdict:
    """Apply the N-COMPOSITE, E-PRUNE and Q-CONGRUENT rules, in that order."""
    n = c.n
    if not is_prime_u64(n):
        d = _least_prime_factor(n)
        return FilterVerdict(RULE_N_COMPOSITE, repunit(c.q, d))
    p, e = c.base.p, c.base.e
    if e >= 2 and n > e:
        pair = (repunit(p, n), repunit(p ** n, e))
        return FilterVerdict(RULE_E_PRUNE, pair)
    if c.q % n == 1 and c.m > n:
        return FilterVerdict(RULE_Q_CONGRUENT, n)
    return SURVIVES


@lru_cache(maxsize=256)
def admissible_divisors(n: int, bound: int) -> tuple:
    """Primes r <= bound with r ≡ 1 (mod 2n): the only possible divisors of
    m = (q^n - 1)/(q - 1) once q ≢ 1 (mod n) and n is an odd prime."""
    return tuple(arith.primes_in_ap(2 * n, 1, bound))


def lemma_trial_division(c: ProjectiveCandidate, bound: int) -> FilterVerdict:
    """Trial-divide m by the admissible progression only.

    Precondition: n is an odd prime and the candidate survived the
    structural filter (so q ≢ 1 mod n and the progression is exhaustive
    among primes <= bound).
    """
    n = c.n
    if n < 3 or not is_prime_u64(n):
        raise DomainError("lemma trial division requires an odd prime exponent")
    m = c.m
    for r in admissible_divisors(n, bound):
        if r >= m:
            break
        if m % r == 0:
            return FilterVerdict(RULE_TRIAL, r)
    return SURVIVES


def is_projective_prime(c: ProjectiveCandidate,
                        policy: WitnessPolicy = DEFAULT_POLICY,
                        trial_bound: int = DEFAULT_TRIAL_BOUND) -> Primality:
    """Full pipeline: structural filter, lemma trial division, Miller-Rabin.

    Short-circuits at the first composite verdict; the returned Primality's
    `stage` records which stage decided.
    """
    v = structural_filter(c)
    if not v.survives:
        kind = "cofactor-pair" if v.rule == RULE_E_PRUNE else "factor"
        return Primality("composite", witness=v.witness, witness_kind=kind,
                         stage=f"structural:{v.rule}")
    if c.n > 2:
        v = lemma_trial_division(c, trial_bound)
        if not v.survives:
            return Primality("composite", witness=v.witness,
                             witness_kind="factor", stage="trial-division")
        # Lemma guarantees no divisor below 2n + 1, so the generic
        # small-prime sweep inside is_prime would be wasted work.
        verdict = arith.is_prime(c.m, policy, small_trial=False)
    else:
        verdict = arith.is_prime(c.m, policy)
    return replace(verdict, stage="primality-test")


def decimal_digits(m: int) -> int:
    """Number of decimal digits of m >= 0."""
    if m < 0:
        raise DomainError("m must be >= 0")
    if m == 0:
        return 1
    if gmpy2 is not None:
        return gmpy2.mpz(m).num_digits(10)
    return len(str(m))  # pragma: no cover
