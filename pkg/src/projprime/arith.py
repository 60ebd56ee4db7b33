"""Arbitrary-precision primality engine.

Python ints are the arbitrary-precision carrier throughout the package: they
round-trip decimal strings losslessly and stay exact at every size reached by
the searches (thousands of digits). gmpy2, when present, only accelerates the
modular arithmetic inside Miller-Rabin rounds; verdicts are identical with or
without it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence, Union

try:
    import gmpy2

    _mpz = gmpy2.mpz
    _powmod = gmpy2.powmod
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _mpz = int
    _powmod = pow

from . import _kernels
from .digests import digest16
from .errors import DomainError

_MASK64 = (1 << 64) - 1

#: Deterministic strong-probable-prime witnesses, valid for all m < 2**64.
DETERMINISTIC_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

#: Trial-division prefilter bound; the table below proves primality < 10**8.
SMALL_TRIAL_BOUND = 10_000

SMALL_PRIMES: tuple = tuple(int(p) for p in _kernels.sieve_primes(0, SMALL_TRIAL_BOUND))
_TABLE_PROOF_LIMIT = SMALL_TRIAL_BOUND * SMALL_TRIAL_BOUND

is_prime_u64 = _kernels.is_prime_u64


class RoundResult(Enum):
    """Outcome of one Miller-Rabin round."""

    PASSED = "passed"
    COMPOSITE_CERTAIN = "composite"


Witness = Union[int, tuple, None]


@dataclass(frozen=True)
class Primality:
    """Primality verdict with a re-checkable witness for composite results.

    kind is one of "not-prime" (m < 2), "composite", "prime" (proven, below
    the deterministic threshold), "probable-prime". For composites, witness
    holds either a factor, a Miller-Rabin base for which the round fails, or
    a cofactor pair (a, b) tied to a stated identity; witness_kind says which.
    """

    kind: str
    witness: Witness = None
    witness_kind: Optional[str] = None
    rounds: int = 0
    stage: Optional[str] = None

    @property
    def is_prime(self) -> bool:
        return self.kind in ("prime", "probable-prime")


@dataclass(frozen=True)
class WitnessPolicy:
    """How is_prime chooses Miller-Rabin bases.

    Below deterministic_threshold the fixed 12-witness set decides exactly;
    above it, rounds_above_threshold rounds run with base 2 first and the
    rest drawn from a counter-mode PRNG keyed on (rng_seed, m mod 2**64,
    round index), so any two runs agree witness-for-witness.
    """

    deterministic_threshold: int = 1 << 64
    rounds_above_threshold: int = 40
    rng_seed: int = 1

    def __post_init__(self):
        if self.rounds_above_threshold < 1:
            raise DomainError("rounds_above_threshold must be >= 1")
        if not 2 <= self.deterministic_threshold <= 1 << 64:
            # The fixed witness set is only proven exhaustive below 2**64.
            raise DomainError("deterministic_threshold must lie in [2, 2**64]")

    def digest(self) -> str:
        return digest16(
            f"threshold={self.deterministic_threshold};"
            f"rounds={self.rounds_above_threshold};seed={self.rng_seed}"
        )


DEFAULT_POLICY = WitnessPolicy()


def mod_pow(base: int, exponent: int, modulus: int) -> int:
    """base**exponent mod modulus by square-and-multiply.

    Every intermediate is reduced mod modulus, so operand size stays bounded.
    """
    if modulus <= 0:
        raise DomainError("modulus must be >= 1")
    if exponent < 0:
        raise DomainError("exponent must be >= 0")
    result = 1 % modulus
    b = base % modulus
    e = exponent
    while e:
        if e & 1:
            result = result * b % modulus
        b = b * b % modulus
        e >>= 1
    return result


def miller_rabin_round(m: int, t: int) -> RoundResult:
    """One strong-probable-prime round for odd m >= 3 with base t in [2, m-2].

    Writes m - 1 = (2l+1) * 2**k, computes a_0 = t^(2l+1) and the squaring
    chain a_i = a_{i-1}^2 mod m. Certainly composite when the chain first
    reaches 1 from something other than -1, or when a_k = t^(m-1) != 1.
    """
    if m < 3 or m % 2 == 0:
        raise DomainError("m must be odd and >= 3")
    if not 2 <= t <= m - 2:
        raise DomainError("base t must lie in [2, m-2]")
    d = m - 1
    k = (d & -d).bit_length() - 1
    d >>= k
    mz = _mpz(m)
    a = _powmod(_mpz(t), d, mz)
    if a == 1:
        return RoundResult.PASSED
    minus_one = m - 1
    for _ in range(k):
        prev = a
        a = a * a % mz
        if a == 1:
            if prev == minus_one:
                return RoundResult.PASSED
            return RoundResult.COMPOSITE_CERTAIN
    return RoundResult.COMPOSITE_CERTAIN


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def round_base(seed: int, m: int, index: int) -> int:
    """Deterministic Miller-Rabin base for (seed, m, round index)."""
    h = _splitmix64((seed & _MASK64) ^ 0x243F6A8885A308D3)
    h = _splitmix64(h ^ (m & _MASK64))
    h = _splitmix64(h ^ (index & _MASK64))
    return 2 + h % (m - 3)


def trial_divide(m: int, divisors: Sequence[int]) -> Optional[int]:
    """First divisor of m from an ascending list, else None.

    The list may contain m itself; callers must exclude r == m when they
    need a proper factor.
    """
    for r in divisors:
        if m % r == 0:
            return r
    return None


def is_prime(m: int, policy: WitnessPolicy = DEFAULT_POLICY, *,
             small_trial: bool = True) -> Primality:
    """Full primality pipeline: trial division, then Miller-Rabin.

    Below the policy's deterministic threshold the verdict is proven; above
    it, composites are still certain (witness re-checks) while "prime"
    softens to "probable-prime" after the configured number of rounds.
    small_trial=False skips the small-prime sweep for callers that already
    know m has no small factors.
    """
    if m < 0:
        raise DomainError("m must be >= 0")
    if m < 2:
        return Primality("not-prime")
    if m == 2:
        return Primality("prime")
    if m % 2 == 0:
        return Primality("composite", witness=2, witness_kind="factor")

    if m < _TABLE_PROOF_LIMIT:
        root = math.isqrt(m)
        for p in SMALL_PRIMES:
            if p > root:
                break
            if m % p == 0:
                return Primality("composite", witness=p, witness_kind="factor")
        return Primality("prime")

    if small_trial:
        f = trial_divide(m, SMALL_PRIMES)
        if f is not None:
            return Primality("composite", witness=f, witness_kind="factor")

    if m < policy.deterministic_threshold:
        for w in DETERMINISTIC_WITNESSES:
            if miller_rabin_round(m, w) is RoundResult.COMPOSITE_CERTAIN:
                return Primality("composite", witness=w, witness_kind="mr-base")
        return Primality("prime")

    rounds = policy.rounds_above_threshold
    for i in range(rounds):
        t = 2 if i == 0 else round_base(policy.rng_seed, m, i)
        if miller_rabin_round(m, t) is RoundResult.COMPOSITE_CERTAIN:
            return Primality("composite", witness=t, witness_kind="mr-base",
                             rounds=i + 1)
    return Primality("probable-prime", rounds=rounds)


def probable_prime(m: int, policy: WitnessPolicy = DEFAULT_POLICY, *,
                   small_trial: bool = True) -> bool:
    """Boolean form of is_prime for bulk search loops."""
    return is_prime(m, policy, small_trial=small_trial).is_prime


def sieve_segment(lo: int, hi: int) -> list:
    """Primes in [lo, hi), ascending. Bounds must fit a machine word."""
    if hi < lo:
        raise DomainError("sieve bounds out of order")
    if lo < 0:
        raise DomainError("sieve bounds must be nonnegative")
    if hi > 1 << 63:
        raise DomainError("sieve bound exceeds word size")
    return [int(p) for p in _kernels.sieve_primes(lo, hi)]


def primes_in_ap(step: int, residue: int, bound: int) -> Iterator[int]:
    """Primes r <= bound with r ≡ residue (mod step), ascending."""
    if step <= 0:
        raise DomainError("step must be positive")
    r = residue if residue > 1 else residue + step
    while r <= bound:
        if _kernels.is_prime_u64(r):
            yield r
        r += step
