"""Integer polynomials: fixed divisors and prime-value counting.

The per-prime test reduces f modulo t^p - t (every value of that polynomial
is divisible by p) and checks whether the remainder's coefficients all vanish
mod p; candidate primes come from the constant term. The full fixed divisor,
prime powers included, is gcd(f(0), ..., f(deg)) via the binomial basis: the
per-prime route alone would report {2, 3, 7} where the true divisor is 504.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels, arith
from .arith import DEFAULT_POLICY, WitnessPolicy
from .errors import DomainError
from .search import _execute, resolve_workers

_FACTOR_BOUND = 1_000_000


@dataclass(frozen=True)
class IntPolynomial:
    """Integer-coefficient polynomial, constant term first, canonical form
    (no trailing zero coefficients; the zero polynomial has no coefficients)."""

    coeffs: Tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(x) for x in self.coeffs)
        while c and c[-1] == 0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[int]) -> "IntPolynomial":
        return cls(tuple(coeffs))

    @classmethod
    def parse(cls, text: str) -> "IntPolynomial":
        """CLI syntax: comma-separated coefficients, constant term first."""
        try:
            return cls(tuple(int(tok.strip()) for tok in text.split(",")))
        except ValueError as exc:
            raise DomainError(f"bad coefficient list: {text!r}") from exc

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    @property
    def leading(self) -> int:
        if self.is_zero:
            raise DomainError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __call__(self, t: int) -> int:
        value = 0
        for c in reversed(self.coeffs):
            value = value * t + c
        return value

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            term = "t" if k == 1 else f"t^{k}" if k else ""
            mag = "" if (abs(c) == 1 and k) else str(abs(c))
            body = f"{mag}{term}" if term else str(abs(c))
            parts.append(("-" if c < 0 else "+", body))
        sign, first = parts[0]
        text = ("-" if sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


REPUNIT_FAMILY = "repunit"


def _is_repunit_family(f: IntPolynomial) -> bool:
    return f.degree >= 1 and all(c == 1 for c in f.coeffs)


def divides_all_values(f: IntPolynomial, p: int) -> bool:
    """True iff p divides f(t) for every integer t.

    Reduces f modulo t^p - t (replace t^k by t^((k-1) mod (p-1)) + 1 for
    k >= p) and checks the remainder's coefficients mod p.
    """
    if p < 2 or not _is_word_prime(p):
        raise DomainError("p must be prime")
    if f.is_zero:
        return True
    folded = [0] * min(p, f.degree + 1)
    for k, c in enumerate(f.coeffs):
        idx = k if k == 0 else (k - 1) % (p - 1) + 1
        if idx >= len(folded):
            folded.extend([0] * (idx + 1 - len(folded)))
        folded[idx] += c
    return all(c % p == 0 for c in folded)


def _is_word_prime(p: int) -> bool:
    if p < 1 << 64:
        return bool(_kernels.is_prime_u64(p))
    return arith.probable_prime(p)


def _prime_factors(value: int) -> List[int]:
    """Distinct prime factors; raises if a large composite cofactor remains."""
    v = abs(value)
    out = []
    for p in _kernels.sieve_primes(2, _FACTOR_BOUND).tolist():
        p = int(p)
        if p * p > v:
            break
        if v % p == 0:
            out.append(p)
            while v % p == 0:
                v //= p
    if v > 1:
        if v < _FACTOR_BOUND ** 2 or arith.probable_prime(v):
            out.append(v)
        else:
            raise DomainError(
                f"cannot factor constant term component {v} "
                f"(no prime factor below {_FACTOR_BOUND})")
    return out


def prime_fixed_divisors(f: IntPolynomial) -> List[int]:
    """Primes p dividing every value of f.

    Any such p divides the constant term (substitute t = p), so only its
    prime factors need testing. A zero constant term falls back to the first
    nonzero of f(0), ..., f(deg).
    """
    if f.is_zero:
        raise DomainError("zero polynomial")
    source = next((f(t) for t in range(f.degree + 1) if f(t) != 0), None)
    if source is None:  # impossible: deg+1 roots would force f = 0
        raise DomainError("zero polynomial")
    return [p for p in sorted(_prime_factors(source)) if divides_all_values(f, p)]


def fixed_divisor(f: IntPolynomial) -> int:
    """gcd of all values of f: equals gcd(f(0), ..., f(deg)).

    deg + 1 consecutive values suffice because f expands integrally in the
    binomial-coefficient basis, whose fixed divisors those values pin down.
    """
    if f.is_zero:
        raise DomainError("zero polynomial")
    return math.gcd(*(f(t) for t in range(f.degree + 1)))


@dataclass(frozen=True)
class BunyakovskyReport:
    leading_positive: bool
    irreducible: str  # "yes" | "no" | "unknown"
    irreducible_witness: Optional[Tuple[IntPolynomial, IntPolynomial]]
    fixed_divisor: int
    satisfies_conditions: str  # "satisfies" | "fails" | "unknown"


def _rational_root(f: IntPolynomial) -> Optional[Tuple[int, int]]:
    """A rational root num/den in lowest terms, or None."""
    c0, lead = f.coeffs[0], f.leading
    if c0 == 0:
        return (0, 1)
    nums = {d for d in _divisors(abs(c0))}
    dens = {d for d in _divisors(abs(lead))}
    for den in sorted(dens):
        for num in sorted(nums):
            if math.gcd(num, den) != 1:
                continue
            for s in (1, -1):
                # f(num*s/den) == 0 iff sum c_k (num*s)^k den^(deg-k) == 0
                acc = 0
                for k, c in enumerate(f.coeffs):
                    acc += c * (s * num) ** k * den ** (f.degree - k)
                if acc == 0:
                    return (s * num, den)
    return None


def _divisors(v: int) -> List[int]:
    out = []
    d = 1
    while d * d <= v:
        if v % d == 0:
            out.append(d)
            out.append(v // d)
        d += 1
    return sorted(set(out))


def bunyakovsky_report(f: IntPolynomial) -> BunyakovskyReport:
    """Evaluate the three conditions: positive leading coefficient,
    irreducibility (decided for degree <= 3 and the all-ones family),
    and fixed divisor 1."""
    if f.is_zero:
        raise DomainError("zero polynomial")
    leading_positive = f.leading > 0
    fd = fixed_divisor(f)

    irreducible = "unknown"
    witness: Optional[Tuple[IntPolynomial, IntPolynomial]] = None
    if f.degree <= 0:
        irreducible = "no"
    elif _is_repunit_family(f):
        n = f.degree + 1  # f = 1 + t + ... + t^(n-1)
        if _is_word_prime(n):
            irreducible = "yes"
        else:
            irreducible = "no"
            d = next(p for p in range(2, n + 1) if n % p == 0 and _is_word_prime(p))
            left = IntPolynomial((1,) * d)
            right_coeffs = [0] * (n - d + 1)
            for j in range(0, n // d):
                right_coeffs[j * d] = 1
            witness = (left, IntPolynomial(tuple(right_coeffs)))
    elif f.degree == 1:
        irreducible = "yes"
    elif f.degree in (2, 3):
        root = _rational_root(f)
        if root is None:
            irreducible = "yes"  # degree 2/3: reducible iff a linear factor exists
        else:
            irreducible = "no"
            num, den = root
            witness = _linear_factorization(f, num, den)

    if not leading_positive or irreducible == "no" or fd != 1:
        status = "fails"
    elif irreducible == "yes" and fd == 1:
        status = "satisfies"
    else:
        status = "unknown"
    return BunyakovskyReport(leading_positive, irreducible, witness, fd, status)


def _linear_factorization(f: IntPolynomial, num: int, den: int
                          ) -> Tuple[IntPolynomial, IntPolynomial]:
    """f = (den*t - num) * g over Q; returns (den*t - num, g) with g's
    coefficients scaled integral when possible."""
    linear = IntPolynomial((-num, den))
    # Long division of f by (den*t - num); exact by construction.
    rem = list(f.coeffs)
    g = [0] * f.degree
    for k in range(f.degree - 1, -1, -1):
        coef = rem[k + 1]
        if coef % den != 0:
            # scale-free fallback: multiply through; witness still verifies
            # den^deg * f = (den*t - num) * G
            return linear, _scaled_quotient(f, num, den)
        g[k] = coef // den
        rem[k + 1] = 0
        rem[k] += g[k] * num
    return linear, IntPolynomial(tuple(g))


def _scaled_quotient(f: IntPolynomial, num: int, den: int) -> IntPolynomial:
    scaled = IntPolynomial(tuple(c * den ** f.degree for c in f.coeffs))
    quotient, _ = _linear_factorization(scaled, num, den)
    return quotient


@dataclass(frozen=True)
class PrimeValueCount:
    """Result of count_prime_values: tally plus an optional hit stream."""

    count: int
    tested: int
    hits: Optional[List[int]] = None  # t values, ascending
    max_hit_t: Optional[int] = None


def _poly_values_u64(coeffs: Sequence[int], ts: np.ndarray) -> np.ndarray:
    values = np.zeros(ts.shape, dtype=np.uint64)
    for c in reversed(coeffs):
        values = values * ts + np.uint64(c)
    return values


def _count_chunk(task) -> Tuple[int, List[int], Optional[int]]:
    index, coeffs, ts, fast, policy, collect = task
    f = IntPolynomial(coeffs)
    hits: List[int] = []
    last: Optional[int] = None
    if fast:
        arr = np.asarray(ts, dtype=np.uint64)
        mask = _kernels.prime_mask_u64(_poly_values_u64(coeffs, arr))
        count = int(mask.sum())
        if count:
            matched = arr[mask]
            last = int(matched[-1])
            if collect:
                hits = [int(t) for t in matched.tolist()]
        return count, hits, last
    count = 0
    for t in ts:
        value = f(int(t))
        if value < 2:
            continue
        if value < 1 << 64:
            ok = bool(_kernels.is_prime_u64(value))
        else:
            ok = arith.probable_prime(value, policy)
        if ok:
            count += 1
            last = int(t)
            if collect:
                hits.append(int(t))
    return count, hits, last


def count_prime_values(f: IntPolynomial, t_max: int,
                       domain: str = "naturals",
                       policy: Optional[WitnessPolicy] = None, *,
                       t_min: int = 1, collect_hits: bool = False,
                       workers: Optional[int] = None) -> PrimeValueCount:
    """Count t in the domain with t_min <= t <= t_max and f(t) prime.

    Domains: naturals (t = t_min, ..., t_max), primes, prime_powers.
    Values below 2 count as non-prime. t_min defaults to 1; note f(0) is
    composite or unit for every polynomial whose prime counts this package
    reproduces, so the 0/1 origin choice does not move those tallies.
    """
    if f.is_zero:
        raise DomainError("zero polynomial")
    if domain not in ("naturals", "primes", "prime_powers"):
        raise DomainError(f"unknown domain {domain!r}")
    if t_max > 1 << 62:
        raise DomainError("t_max exceeds word size")
    policy = policy or DEFAULT_POLICY

    if domain == "naturals":
        total = max(0, t_max - t_min + 1)
        spans = _spans(t_min, t_max, 1 << 20)
        make = lambda lo, hi: np.arange(lo, hi, dtype=np.uint64)
    else:
        ps = _kernels.sieve_primes(max(2, t_min), t_max + 1)
        if domain == "prime_powers":
            extras = []
            for pu in _kernels.sieve_primes(2, math.isqrt(t_max) + 1).tolist():
                p = int(pu)
                q = p * p
                while q <= t_max:
                    if q >= t_min:
                        extras.append(q)
                    q *= p
            ts_all = np.sort(np.concatenate(
                [ps, np.array(extras, dtype=np.uint64)])) if extras else ps
        else:
            ts_all = ps
        total = int(ts_all.size)
        spans = _spans(0, total - 1, 1 << 20)
        make = lambda lo, hi: ts_all[lo:hi]

    # u64 fast path: nonnegative coefficients keep every Horner partial below
    # f(t_max), so overflow is impossible once f(t_max) < 2**64.
    fast = (not f.is_zero and all(c >= 0 for c in f.coeffs)
            and f(max(t_max, 1)) < 1 << 64)

    tasks = []
    for i, (lo, hi) in enumerate(spans):
        tasks.append((i, f.coeffs, make(lo, hi + 1), fast, policy, collect_hits))
    results: Dict[int, Tuple[int, List[int], Optional[int]]] = {}
    _execute(tasks, _count_chunk, resolve_workers(workers),
             lambda i, res: results.__setitem__(i, res))
    count = sum(results[i][0] for i in sorted(results))
    hits: Optional[List[int]] = None
    if collect_hits:
        hits = [t for i in sorted(results) for t in results[i][1]]
    max_hit = None
    for i in sorted(results, reverse=True):
        if results[i][2] is not None:
            max_hit = results[i][2]
            break
    return PrimeValueCount(count, total, hits, max_hit)


def _spans(lo: int, hi: int, width: int) -> List[Tuple[int, int]]:
    """Closed [lo, hi] split into [a, b] chunks of at most `width`."""
    if hi < lo:
        return []
    out = []
    a = lo
    while a <= hi:
        b = min(hi, a + width - 1)
        out.append((a, b))
        a = b + 1
    return out
