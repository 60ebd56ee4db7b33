"""projprime: searches, filters and density models for primes of the form
(q^n - 1)/(q - 1) with q a prime power."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .arith import (DEFAULT_POLICY, Primality, RoundResult, WitnessPolicy,
                    is_prime, miller_rabin_round, mod_pow, sieve_segment,
                    trial_divide)
from .bunyakovsky import (BunyakovskyReport, IntPolynomial, PrimeValueCount,
                          bunyakovsky_report, count_prime_values,
                          divides_all_values, fixed_divisor,
                          prime_fixed_divisors)
from .errors import DegenerateDataError, DomainError, IntegrityError
from .fitstats import (FitResult, Histogram, build_histogram, fit_rectified,
                       least_squares_line, loglog_transform, normal_density,
                       rectified_estimate, segment_estimate, segment_ratios)
from .heuristics import (GAMMA, MU, RealEstimate, c_n, expected_count_fixed_n,
                         expected_count_fixed_p, expected_count_n3,
                         mertens_product, mertens_product_exact,
                         polya_products, prime_probability_fixed_p,
                         twin_prime_constant)
from .projective import (FilterVerdict, PrimePower, ProjectiveCandidate,
                         is_projective_prime, lemma_trial_division, repunit,
                         repunit_mod, structural_filter)
from .search import (CollisionEntry, SearchSummary, SegmentRecord,
                     checkpoint_resume, checkpoint_write, degree_collisions,
                     search_fixed_n, search_fixed_p, search_grid,
                     search_prime_powers)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
