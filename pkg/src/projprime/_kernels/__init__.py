"""Hot kernels with a compiled core and a pure-Python fallback.

The compiled extension (Cython) is preferred; set PROJPRIME_PURE=1 to force
the pure backend. Both expose the same three functions and must produce
identical results (the test suite runs them differentially):

    sieve_primes(lo, hi)   -> uint64 ndarray of primes in [lo, hi)
    is_prime_u64(n)        -> bool, deterministic for all n < 2**64
    prime_mask_u64(values) -> bool ndarray, elementwise is_prime_u64
"""

import os


def load_backend(name: str):
    """Import a backend by name ("compiled" or "pure"). Raises ImportError."""
    if name == "compiled":
        from . import _fast

        return _fast
    if name == "pure":
        from . import _pure

        return _pure
    raise ImportError(f"unknown kernel backend {name!r}")


if os.environ.get("PROJPRIME_PURE"):
    from . import _pure as _impl
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _pure as _impl  # type: ignore[no-redef]

BACKEND = _impl.BACKEND
sieve_primes = _impl.sieve_primes
is_prime_u64 = _impl.is_prime_u64
prime_mask_u64 = _impl.prime_mask_u64
