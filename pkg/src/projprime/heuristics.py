"""Analytic density estimators for projective-prime counts.

Everything here is heuristic in the density-model sense: Mertens-type
products over excluded residue classes rescale the naive 1/ln(m) prime
probability, giving closed-form expected counts for the fixed-n and fixed-p
searches, plus the product-vs-1/ln(x) comparison that motivates evaluating
those products up to x^mu rather than x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, NamedTuple

from . import _kernels
from .errors import DomainError

#: Euler-Mascheroni constant (stored literal, 30 digits).
GAMMA = 0.577215664901532860606512090082

#: mu = e^(-gamma) = 0.561459...; by construction mu * e^gamma == 1 in floats.
MU = math.exp(-GAMMA)

#: Reference value of the Hardy-Littlewood twin-prime constant.
TWIN_PRIME_CONSTANT = 1.320323632

_EXACT_PRODUCT_LIMIT = 100_000


def _primes_upto(y: int) -> list:
    return _kernels.sieve_primes(2, y + 1).tolist()


def mertens_product_exact(y: int) -> Fraction:
    """P(y) = prod over primes r <= y of (1 - 1/r)^(-1), as an exact rational."""
    if y < 2:
        raise DomainError("y must be >= 2")
    if y > _EXACT_PRODUCT_LIMIT:
        raise DomainError("exact product limited to y <= 100000")
    num = den = 1
    for r in _primes_upto(y):
        num *= r
        den *= r - 1
    return Fraction(num, den)


def mertens_product(y: int) -> float:
    """P(y) as a float; exact accumulation for small y, compensated log
    summation beyond (large products must not lose precision termwise)."""
    if y < 2:
        raise DomainError("y must be >= 2")
    if y <= _EXACT_PRODUCT_LIMIT:
        return float(mertens_product_exact(y))
    logs = [-math.log1p(-1.0 / r) for r in _primes_upto(y)]
    return math.exp(math.fsum(logs))


class CnValue(NamedTuple):
    exact: Fraction
    value: float


def c_n(n: int) -> CnValue:
    """c_n = P(2n)/(n - 1) for odd prime n; exactly 15/8 at n=3, 35/32 at n=5."""
    if n < 3 or n % 2 == 0 or not _kernels.is_prime_u64(n):
        raise DomainError("n must be an odd prime")
    exact = mertens_product_exact(2 * n) / (n - 1)
    return CnValue(exact, float(exact))


def expected_count_fixed_n(n: int, x: float) -> float:
    """Expected projective primes from primes p <= x at fixed exponent n:
    c_n (n-2) x / ((n-1) ln(x)^2)."""
    if x <= math.e:
        raise DomainError("x must exceed e")
    cn = c_n(n).exact
    factor = cn * (n - 2) / (n - 1)
    return float(factor) * x / math.log(x) ** 2


def expected_count_n3(x: float) -> float:
    """The n = 3 specialization 15x/(16 ln(x)^2) (identical to the general
    formula at n = 3; kept as its own formula id)."""
    return expected_count_fixed_n(3, x)


def expected_count_fixed_p(p: int, x: float, *, simplified: bool = False) -> float:
    """Expected projective primes from prime exponents n <= x at fixed p:
    e^gamma (ln x - ln(p-1)) / ln p, or e^gamma ln x / ln p when simplified."""
    if p < 2 or not _kernels.is_prime_u64(p):
        raise DomainError("p must be prime")
    if x <= p - 1:
        raise DomainError("x must exceed p - 1")
    eg = math.exp(GAMMA)
    if simplified:
        return eg * math.log(x) / math.log(p)
    return eg * (math.log(x) - math.log(p - 1)) / math.log(p)


def prime_probability_fixed_p(p: int, n: int) -> float:
    """Heuristic probability that (p^n - 1)/(p - 1) is prime:
    e^gamma ln(2n) / (n ln p - ln(p-1))."""
    if p < 2 or not _kernels.is_prime_u64(p):
        raise DomainError("p must be prime")
    if n < 3:
        raise DomainError("n must be >= 3")
    return math.exp(GAMMA) * math.log(2 * n) / (n * math.log(p) - math.log(p - 1))


@dataclass(frozen=True)
class PolyaProducts:
    """prod (1 - 1/r) over primes r up to x, sqrt(x) and x^mu, with the
    1/ln(x) reference the products are compared against."""

    full: float
    sqrt: float
    magic_mu: float
    reference: float


def _euler_product(limit: float) -> float:
    logs = [math.log1p(-1.0 / r) for r in _kernels.sieve_primes(2, int(limit) + 1).tolist()]
    return math.exp(math.fsum(logs))


def polya_products(x: float) -> PolyaProducts:
    """The product paradox: the full product lands at mu/ln(x), the sqrt
    variant at 2mu/ln(x); cutting at x^mu recovers 1/ln(x) itself."""
    if x < 4:
        raise DomainError("x must be >= 4")
    return PolyaProducts(
        full=_euler_product(x),
        sqrt=_euler_product(math.sqrt(x)),
        magic_mu=_euler_product(x ** MU),
        reference=1.0 / math.log(x),
    )


def twin_prime_constant(r_max: int) -> float:
    """Partial product 2 * prod_{3 <= r <= r_max} r(r-2)/(r-1)^2 over primes."""
    if r_max < 3:
        raise DomainError("r_max must be >= 3")
    logs = []
    for r in _primes_upto(r_max):
        if r == 2:
            continue
        logs.append(math.log(r) + math.log(r - 2) - 2.0 * math.log(r - 1))
    return 2.0 * math.exp(math.fsum(logs))


@dataclass(frozen=True)
class RealEstimate:
    """A computed estimate tagged with its formula id and echoed inputs."""

    value: float
    formula: str
    inputs: Dict[str, float]


FORMULAS = ("fixed-n", "fixed-p", "n3", "polya", "twin-constant", "mertens", "c-n")


def evaluate(formula: str, **inputs) -> RealEstimate:
    """Uniform dispatcher used by the CLI's `estimate` subcommand."""
    if formula == "fixed-n":
        value = expected_count_fixed_n(int(inputs["n"]), float(inputs["x"]))
    elif formula == "fixed-p":
        value = expected_count_fixed_p(int(inputs["p"]), float(inputs["x"]))
    elif formula == "n3":
        value = expected_count_n3(float(inputs["x"]))
    elif formula == "polya":
        products = polya_products(float(inputs["x"]))
        return RealEstimate(products.full / products.reference, "polya",
                            {k: float(v) for k, v in inputs.items()})
    elif formula == "twin-constant":
        value = twin_prime_constant(int(inputs["r_max"]))
    elif formula == "mertens":
        value = mertens_product(int(inputs["y"]))
    elif formula == "c-n":
        value = c_n(int(inputs["n"])).value
    else:
        raise DomainError(f"unknown formula {formula!r}")
    return RealEstimate(value, formula, {k: float(v) for k, v in inputs.items()})
