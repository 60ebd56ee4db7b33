"""Parallel, checkpointable searches for projective primes.

Work is cut into indexed segments (p-ranges, or one row per exponent), each
processed by a pure worker function; results merge strictly by segment index,
so totals and hit lists are identical for any worker count or segment size.
Checkpoints persist the contiguous prefix of completed segments together with
their hit stream, and a resumed run reproduces the uninterrupted output byte
for byte.
"""

from __future__ import annotations

import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

try:
    import gmpy2
except ImportError:  # pragma: no cover
    gmpy2 = None

from . import _kernels, arith
from .arith import DEFAULT_POLICY, WitnessPolicy
from .checkpoint import (CheckpointHeader, SegmentRecord, read_checkpoint,
                         read_hits, write_checkpoint, write_hits)
from .digests import digest16
from .errors import DomainError, IntegrityError
from .projective import (DEFAULT_TRIAL_BOUND, PrimePower, admissible_divisors,
                         decimal_digits, repunit, repunit_mod)

#: Hits kept in memory; longer lists are only available via the hit stream.
HIT_CAP = 1_000_000

DEFAULT_SEGMENT_SIZE = 1_000_000

Hit = Tuple[int, int, int, int]  # (p, e, n, decimal digits of m)


def resolve_workers(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("PROJPRIME_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class SearchSummary:
    """Outcome of one search: parameters, ordered segment records, hits."""

    mode: str
    params: Dict[str, str]
    policy_digest: str
    records: List[SegmentRecord] = field(default_factory=list)
    hits: Optional[List[Hit]] = None
    hits_truncated: bool = False

    @property
    def primes_seen(self) -> int:
        return sum(r.primes_seen for r in self.records)

    @property
    def projective_hits(self) -> int:
        return sum(r.projective_hits for r in self.records)

    @property
    def max_hit_p(self) -> Optional[int]:
        best = None
        for r in self.records:
            if r.max_hit_p is not None:
                best = r.max_hit_p if best is None else max(best, r.max_hit_p)
        return best

    def header(self) -> CheckpointHeader:
        return CheckpointHeader(self.mode, dict(self.params), self.policy_digest)

    def config_digest(self) -> str:
        return digest16(self.header().to_line())


def checkpoint_write(summary: SearchSummary, path) -> None:
    """Persist a summary's records (atomic write-temp-then-rename)."""
    write_checkpoint(path, summary.header(), summary.records)


def checkpoint_resume(path) -> SearchSummary:
    """Load a checkpoint back into a SearchSummary (hits live in the sidecar)."""
    header, records = read_checkpoint(path)
    return SearchSummary(header.mode, dict(header.params),
                         header.policy_digest, records, hits=None)


def _passes_primality(m: int, policy: WitnessPolicy, divisors: Sequence[int]) -> bool:
    """Pipeline tail shared by all searches: progression trial division, then
    the primality engine (deterministic kernel below 2**64)."""
    for r in divisors:
        if r >= m:
            break
        if m % r == 0:
            return False
    if m < 1 << 64:
        return bool(_kernels.is_prime_u64(m))
    return arith.probable_prime(m, policy, small_trial=False)


def _auto_trial_bound(n: int, base_max: int) -> int:
    """Progression trial division only pays once Miller-Rabin rounds get
    expensive; scale the bound with the candidate size."""
    bits = n * math.log2(max(base_max, 3))
    if bits <= 64:
        return 0
    if bits <= 1024:
        return 1_000
    return DEFAULT_TRIAL_BOUND


# ---------------------------------------------------------------------------
# Segmented driver

class _SegmentRun:
    """Tracks completed segments, flushing the contiguous prefix (records and
    hits in lockstep) to the checkpoint and hit-stream files."""

    def __init__(self, header: CheckpointHeader, total: int,
                 checkpoint_path, hits_path, collect_hits: bool):
        self.header = header
        self.total = total
        self.checkpoint_path = checkpoint_path
        self.hits_path = hits_path
        self.collect_hits = collect_hits
        self.records: Dict[int, SegmentRecord] = {}
        self.hit_store: Dict[int, List[Hit]] = {}
        self.flushed_hits: List[Hit] = []
        self.frontier = 0  # first index not yet flushed
        self.pending: Dict[int, Tuple[SegmentRecord, Optional[List[Hit]]]] = {}

    def resume(self) -> int:
        """Load a prior checkpoint; returns the first index to recompute."""
        if not (self.checkpoint_path and os.path.exists(self.checkpoint_path)):
            return 0
        header, records = read_checkpoint(self.checkpoint_path)
        if (header.mode, header.params, header.policy_digest) != (
                self.header.mode, self.header.params, self.header.policy_digest):
            raise IntegrityError(
                "checkpoint was written by a different configuration")
        by_index = {r.segment_index: r for r in records}
        while self.frontier in by_index and self.frontier < self.total:
            self.records[self.frontier] = by_index[self.frontier]
            self.frontier += 1
        if self.collect_hits:
            if self.hits_path and os.path.exists(self.hits_path):
                raw = read_hits(self.hits_path)
                self.flushed_hits = [tuple(map(int, h)) for h in raw]
            expected = sum(self.records[i].projective_hits
                           for i in range(self.frontier))
            if len(self.flushed_hits) != expected:
                raise IntegrityError(
                    "hit stream does not match checkpoint tallies")
        return self.frontier

    def complete(self, index: int,
                 result: Tuple[SegmentRecord, Optional[List[Hit]]]) -> None:
        self.pending[index] = result
        advanced = False
        while self.frontier in self.pending:
            rec, seg_hits = self.pending.pop(self.frontier)
            self.records[self.frontier] = rec
            if self.collect_hits and seg_hits:
                self.flushed_hits.extend(seg_hits)
            self.frontier += 1
            advanced = True
        if advanced and self.checkpoint_path:
            write_checkpoint(self.checkpoint_path, self.header,
                             [self.records[i] for i in range(self.frontier)])
            if self.collect_hits and self.hits_path:
                write_hits(self.hits_path,
                           [",".join(map(str, h)) for h in self.flushed_hits])

    def finish(self, mode: str, params: Dict[str, str],
               policy_digest: str) -> SearchSummary:
        records = [self.records[i] for i in range(self.total)]
        hits: Optional[List[Hit]] = None
        truncated = False
        if self.collect_hits:
            hits = self.flushed_hits
            if len(hits) > HIT_CAP:
                truncated = True
                hits = hits[:HIT_CAP]
        return SearchSummary(mode, params, policy_digest, records, hits,
                             truncated)


def _execute(tasks, worker: Callable, workers: int, on_result: Callable) -> None:
    if workers <= 1 or len(tasks) <= 1:
        for task in tasks:
            on_result(task[0], worker(task))
        return
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        futures = {pool.submit(worker, task): task[0] for task in tasks}
        for fut in as_completed(futures):
            on_result(futures[fut], fut.result())


def _run_segmented(mode: str, params: Dict[str, object], policy: WitnessPolicy,
                   tasks, worker: Callable, workers: Optional[int],
                   checkpoint_path, hits_path, collect_hits: bool) -> SearchSummary:
    params_str = {k: str(v) for k, v in params.items()}
    header = CheckpointHeader(mode, params_str, policy.digest())
    run = _SegmentRun(header, len(tasks), checkpoint_path, hits_path,
                      collect_hits)
    start = run.resume()
    pending = [t for t in tasks if t[0] >= start]
    _execute(pending, worker, resolve_workers(workers), run.complete)
    summary = run.finish(mode, params_str, policy.digest())
    if checkpoint_path:
        checkpoint_write(summary, checkpoint_path)
        if collect_hits and hits_path:
            write_hits(hits_path,
                       [",".join(map(str, h)) for h in run.flushed_hits])
    return summary


# ---------------------------------------------------------------------------
# Fixed exponent n, primes p <= p_max  (one segment per p-range)

def _fixed_n_segment(task) -> Tuple[SegmentRecord, Optional[List[Hit]]]:
    index, lo, hi, n, policy, trial_bound, collect_hits = task
    ps = _kernels.sieve_primes(lo, hi)
    primes_seen = int(ps.size)
    hits: List[Hit] = []
    if n == 3 and hi <= 1 << 32:
        # m = 1 + p + p^2 stays below 2**64, so the whole segment runs inside
        # the compiled mask kernel.
        m_vals = 1 + ps + ps * ps
        mask = _kernels.prime_mask_u64(m_vals)
        for p, m in zip(ps[mask].tolist(), m_vals[mask].tolist()):
            hits.append((int(p), 1, n, len(str(int(m)))))
    else:
        divisors = admissible_divisors(n, trial_bound) if trial_bound else ()
        for pu in ps.tolist():
            p = int(pu)
            if p % n == 1:  # q ≡ 1 (mod n) forces n | m
                continue
            m = (p ** n - 1) // (p - 1)
            if _passes_primality(m, policy, divisors):
                hits.append((p, 1, n, decimal_digits(m)))
    max_hit = hits[-1][0] if hits else None
    record = SegmentRecord(index, lo, hi, primes_seen, len(hits), max_hit)
    return record, (hits if collect_hits else None)


def search_fixed_n(n: int, p_max: int, *, segment_size: int = DEFAULT_SEGMENT_SIZE,
                   policy: Optional[WitnessPolicy] = None,
                   trial_bound: Optional[int] = None,
                   workers: Optional[int] = None, collect_hits: bool = True,
                   checkpoint=None, hits_path=None) -> SearchSummary:
    """Count primes p <= p_max for which (p^n - 1)/(p - 1) is prime."""
    if n < 3 or not _kernels.is_prime_u64(n):
        raise DomainError("n must be an odd prime >= 3")
    if p_max < 0:
        raise DomainError("p_max must be >= 0")
    if segment_size < 1:
        raise DomainError("segment_size must be >= 1")
    policy = policy or DEFAULT_POLICY
    if trial_bound is None:
        trial_bound = _auto_trial_bound(n, p_max)
    params = {"n": n, "p_max": p_max, "segment_size": segment_size,
              "trial_bound": trial_bound, "collect_hits": int(collect_hits)}
    nseg = (p_max + segment_size) // segment_size
    tasks = []
    for i in range(nseg):
        lo = i * segment_size
        hi = min(p_max + 1, (i + 1) * segment_size)
        tasks.append((i, lo, hi, n, policy, trial_bound, collect_hits))
    if trial_bound:
        admissible_divisors(n, trial_bound)  # warm the cache before forking
    return _run_segmented("fixed-n", params, policy, tasks, _fixed_n_segment,
                          workers, checkpoint, hits_path, collect_hits)


# ---------------------------------------------------------------------------
# Fixed prime p, exponents n <= n_max

def _fixed_p_chunk(task) -> List[int]:
    p, exponents, policy, trial_bound = task
    found = []
    for n in exponents:
        divisors = admissible_divisors(n, trial_bound) if trial_bound else ()
        m = (p ** n - 1) // (p - 1)
        if _passes_primality(m, policy, divisors):
            found.append(n)
    return found


def search_fixed_p(p: int, n_max: int, *, policy: Optional[WitnessPolicy] = None,
                   trial_bound: int = DEFAULT_TRIAL_BOUND,
                   workers: Optional[int] = None) -> List[int]:
    """Exponents n <= n_max (odd primes) with (p^n - 1)/(p - 1) prime.

    Primes n dividing p - 1 are skipped up front: for those, n | m. The skip
    is re-verified against the actual residue before being trusted.
    """
    if p < 2 or not _kernels.is_prime_u64(p):
        raise DomainError("p must be prime")
    if n_max < 3:
        return []
    policy = policy or DEFAULT_POLICY
    kept: List[int] = []
    for nu in _kernels.sieve_primes(3, n_max + 1).tolist():
        n = int(nu)
        if (p - 1) % n == 0:
            if repunit_mod(p, n, n) != 0:
                raise RuntimeError(
                    f"exclusion rule violated for p={p}, n={n}")
            continue
        kept.append(n)
    nworkers = resolve_workers(workers)
    nchunks = max(1, min(len(kept), nworkers * 4))
    # Stripe the exponents so every chunk carries a mix of small and large n.
    chunks = [kept[k::nchunks] for k in range(nchunks)]
    tasks = [(p, chunk, policy, trial_bound) for chunk in chunks if chunk]
    found: List[int] = []
    _execute([(i,) + t for i, t in enumerate(tasks)],
             _fixed_p_chunk_indexed, nworkers,
             lambda _i, res: found.extend(res))
    return sorted(found)


def _fixed_p_chunk_indexed(task) -> List[int]:
    return _fixed_p_chunk(task[1:])


# ---------------------------------------------------------------------------
# Prime powers q = p^e with e >= e_min

def _iroot(x: int, k: int) -> int:
    if gmpy2 is not None:
        return int(gmpy2.iroot(gmpy2.mpz(x), k)[0])
    r = int(round(x ** (1.0 / k)))
    while r ** k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def _power_of(e: int, n: int) -> bool:
    while e % n == 0:
        e //= n
    return e == 1


def _prime_power_chunk(task) -> List[Tuple[int, int, int]]:
    index, e, ns, p_lo, p_hi, q_max, policy, trial_bound = task
    found = []
    for pu in _kernels.sieve_primes(p_lo, p_hi).tolist():
        p = int(pu)
        q = p ** e
        if q > q_max:
            break
        for n in ns:
            if q % n == 1:  # q ≡ 1 (mod n) forces n | m
                continue
            m = (q ** n - 1) // (q - 1)
            divisors = admissible_divisors(n, trial_bound) if n > 2 else ()
            if _passes_primality(m, policy, divisors):
                found.append((p, e, n))
    return found


def search_prime_powers(q_max: int, e_min: int = 3, *,
                        e_max: Optional[int] = None, include_n2: bool = False,
                        p_fixed: Optional[int] = None,
                        policy: Optional[WitnessPolicy] = None,
                        trial_bound: Optional[int] = None,
                        workers: Optional[int] = None,
                        exhaustive: bool = False) -> List[Tuple[PrimePower, int]]:
    """Projective primes from proper prime powers q = p^e <= q_max, e >= e_min.

    Exponents n are primes with n <= e (larger n cannot work when e >= 2);
    n = 2 joins only when include_n2 is set. By default e is additionally
    required to be a power of n: (q^n - 1)/(q - 1) = (p^(en) - 1)/(p^e - 1)
    is a product of one cyclotomic value per divisor of e*n not dividing e,
    so two or more such divisors force a composite. exhaustive=True disables
    that pruning and tests every pair.
    """
    if e_min < 2:
        raise DomainError("e_min must be >= 2")
    if p_fixed is not None and (p_fixed < 2 or not _kernels.is_prime_u64(p_fixed)):
        raise DomainError("p_fixed must be prime")
    policy = policy or DEFAULT_POLICY
    if q_max < 4:
        return []
    top_e = int(math.log2(q_max)) + 1
    while 2 ** top_e > q_max:
        top_e -= 1
    if e_max is not None:
        top_e = min(top_e, e_max)

    tasks = []
    index = 0
    for e in range(e_min, top_e + 1):
        limit = _iroot(q_max, e)
        if limit < 2:
            continue
        ns = []
        for nu in _kernels.sieve_primes(2, e + 1).tolist():
            n = int(nu)
            if n == 2 and not include_n2:
                continue
            if exhaustive or _power_of(e, n):
                ns.append(n)
        if not ns:
            continue
        tb = _auto_trial_bound(max(ns), q_max) if trial_bound is None else trial_bound
        if p_fixed is not None:
            if p_fixed <= limit:
                tasks.append((index, e, ns, p_fixed, p_fixed + 1, q_max, policy, tb))
                index += 1
            continue
        chunk = 100_000
        for lo in range(2, limit + 1, chunk):
            hi = min(limit + 1, lo + chunk)
            tasks.append((index, e, ns, lo, hi, q_max, policy, tb))
            index += 1

    found: Dict[int, List[Tuple[int, int, int]]] = {}
    _execute(tasks, _prime_power_chunk, resolve_workers(workers),
             lambda i, res: found.__setitem__(i, res))
    triples = [t for i in sorted(found) for t in found[i]]
    results = [(PrimePower(p, e), n) for (p, e, n) in triples]
    results.sort(key=lambda pair: (pair[0].q, pair[1]))
    return results


# ---------------------------------------------------------------------------
# Full grid: prime powers q <= q_max, odd primes n_min <= n <= n_max

def _prime_powers_upto(limit: int) -> List[Tuple[int, int, int]]:
    """All (p, e, q) with q = p^e <= limit, e >= 1, sorted by q."""
    out = [(int(p), 1, int(p)) for p in _kernels.sieve_primes(2, limit + 1).tolist()]
    for pu in _kernels.sieve_primes(2, _iroot(limit, 2) + 1).tolist():
        p = int(pu)
        q, e = p * p, 2
        while q <= limit:
            out.append((p, e, q))
            q *= p
            e += 1
    out.sort(key=lambda t: t[2])
    return out


def _grid_row(task) -> Tuple[SegmentRecord, Optional[List[Hit]]]:
    index, n, bases, q_max, policy, trial_bound, collect_hits = task
    tb = _auto_trial_bound(n, q_max) if trial_bound is None else trial_bound
    divisors = admissible_divisors(n, tb) if tb else ()
    hits: List[Hit] = []
    for p, e, q in bases:
        if e >= 2 and n > e:  # no projective primes beyond n = e
            continue
        if q % n == 1:
            continue
        m = (q ** n - 1) // (q - 1)
        if _passes_primality(m, policy, divisors):
            hits.append((p, e, n, decimal_digits(m)))
    max_hit = hits[-1][0] if hits else None
    record = SegmentRecord(index, 2, q_max + 1, len(bases), len(hits), max_hit)
    return record, (hits if collect_hits else None)


def search_grid(q_max: int, n_max: int, *, n_min: int = 3,
                policy: Optional[WitnessPolicy] = None,
                trial_bound: Optional[int] = None,
                workers: Optional[int] = None, checkpoint=None,
                hits_path=None,
                return_summary: bool = False):
    """All projective primes with prime-power q <= q_max and odd prime
    n_min <= n <= n_max. Returns (q, n) pairs, or the full SearchSummary
    when return_summary is set."""
    if q_max < 2:
        raise DomainError("q_max must be >= 2")
    if n_max < n_min or n_min < 3:
        raise DomainError("need 3 <= n_min <= n_max")
    policy = policy or DEFAULT_POLICY
    exponents = [int(n) for n in _kernels.sieve_primes(n_min, n_max + 1).tolist()]
    bases = _prime_powers_upto(q_max)
    params = {"q_max": q_max, "n_max": n_max, "n_min": n_min,
              "trial_bound": "auto" if trial_bound is None else trial_bound}
    tasks = [(i, n, bases, q_max, policy, trial_bound, True)
             for i, n in enumerate(exponents)]
    summary = _run_segmented("grid", params, policy, tasks, _grid_row, workers,
                             checkpoint, hits_path, collect_hits=True)
    if return_summary:
        return summary
    return [(p ** e, n) for (p, e, n, _d) in (summary.hits or [])]


# ---------------------------------------------------------------------------
# Degree collisions (same m from two different representations)

@dataclass(frozen=True)
class CollisionEntry:
    """A value m = (b^n - 1)/(b - 1) reachable from >= 2 distinct (b, n)."""

    m: int
    representations: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if len(self.representations) < 2:
            raise DomainError("a collision needs at least two representations")


def degree_collisions(m_max: int, domain: str = "prime_powers",
                      n_min: int = 3) -> List[CollisionEntry]:
    """Exhaustively enumerate repunit values <= m_max with n >= n_min over the
    chosen base domain and return every value hit more than once."""
    if domain not in ("prime_powers", "all_integers"):
        raise DomainError(f"unknown domain {domain!r}")
    if n_min < 2:
        raise DomainError("n_min must be >= 2")
    if m_max < 3:
        return []
    b_max = _iroot(m_max, n_min - 1)
    while b_max >= 2 and repunit(b_max, n_min) > m_max:
        b_max -= 1
    if b_max < 2:
        return []
    if domain == "prime_powers":
        bases = [q for (_p, _e, q) in _prime_powers_upto(b_max)]
    else:
        bases = range(2, b_max + 1)

    table: Dict[int, List[Tuple[int, int]]] = {}
    for b in bases:
        value = repunit(b, n_min)
        n = n_min
        while value <= m_max:
            table.setdefault(value, []).append((b, n))
            value = value * b + 1
            n += 1
    entries = [CollisionEntry(m, tuple(sorted(reps)))
               for m, reps in table.items() if len(reps) >= 2]
    entries.sort(key=lambda entry: entry.m)
    return entries
