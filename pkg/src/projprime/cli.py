"""Command-line front end.

Machine output goes to stdout (or --out); progress logs go to stderr. Every
table-reproducing subcommand stamps a config digest and the library version
into its output so runs can be diffed. Exit codes: 0 success, 2 domain
error, 3 integrity error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from . import __version__, arith, bunyakovsky, fitstats, heuristics, search
from .arith import WitnessPolicy
from .digests import digest16
from .errors import DomainError, IntegrityError
from .projective import decimal_digits, repunit
from .search import resolve_workers

log = logging.getLogger("projprime")

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_INTEGRITY = 3
EXIT_USAGE = 64

if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(2_000_000)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 64, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    """Resolved run parameters; its digest is embedded in all outputs."""

    command: str
    params: Dict[str, object]
    workers: int
    rng_seed: int
    rounds: int
    out_format: str
    out_path: Optional[str]

    def digest(self) -> str:
        body = ";".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return digest16(f"{self.command};{body};seed={self.rng_seed};"
                        f"rounds={self.rounds}")

    def policy(self) -> WitnessPolicy:
        return WitnessPolicy(rounds_above_threshold=self.rounds,
                             rng_seed=self.rng_seed)

    def to_json(self) -> str:
        return json.dumps({"command": self.command, "params": self.params,
                           "workers": self.workers, "rng_seed": self.rng_seed,
                           "rounds": self.rounds, "format": self.out_format})


def _emit(config: RunConfig, payload: dict, human_lines: Sequence[str],
          csv_header: Optional[Sequence[str]] = None,
          csv_rows: Optional[Sequence[Sequence]] = None,
          bare_human: bool = False) -> None:
    """Render one result in the selected format."""
    stamp = f"# projprime {__version__} config={config.digest()}"
    if config.out_format == "json":
        body = dict(payload)
        body["version"] = __version__
        body["config_digest"] = config.digest()
        text = json.dumps(body, sort_keys=True)
    elif config.out_format == "csv":
        lines = [stamp]
        if csv_header:
            lines.append(",".join(csv_header))
        for row in csv_rows or []:
            lines.append(",".join("" if v is None else str(v) for v in row))
        text = "\n".join(lines)
    else:
        lines = [] if bare_human else [stamp]
        lines.extend(human_lines)
        text = "\n".join(lines)
    if config.out_path:
        with open(config.out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _read_m(token: str) -> int:
    text = sys.stdin.read() if token == "-" else token
    try:
        return int(text.strip())
    except ValueError as exc:
        raise DomainError(f"not an integer: {text.strip()[:40]!r}") from exc


def _config(args, command: str, param_names: Sequence[str]) -> RunConfig:
    params = {}
    for name in param_names:
        value = getattr(args, name.replace("-", "_"))
        if value is not None:
            params[name] = value
    return RunConfig(command, params, resolve_workers(args.workers),
                     args.seed, args.rounds, args.format, args.out)


def _add_common(sub, workers=True):
    sub.add_argument("--format", choices=("human", "csv", "json"),
                     default="human", help="output format (default human)")
    sub.add_argument("--out", default=None, help="write output to this file")
    sub.add_argument("--seed", type=int, default=1,
                     help="PRNG seed for Miller-Rabin bases above 2^64")
    sub.add_argument("--rounds", type=int, default=40,
                     help="Miller-Rabin rounds above the deterministic range")
    if workers:
        sub.add_argument("--workers", type=int, default=None,
                         help="worker processes (default: PROJPRIME_WORKERS "
                              "or all cores)")
    else:
        sub.set_defaults(workers=1)


def build_parser() -> _Parser:
    parser = _Parser(prog="projprime",
                     description="Projective-prime search toolkit")
    parser.add_argument("--version", action="version",
                        version=f"projprime {__version__}")
    parser.add_argument("--config", default=None,
                        help="JSON file of default option values")
    subs = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")

    sp = subs.add_parser("isprime", help="primality verdict for m (or '-' for stdin)")
    sp.add_argument("m", help="integer, or '-' to read from stdin")
    _add_common(sp, workers=False)

    sp = subs.add_parser("repunit", help="print (q^n - 1)/(q - 1)")
    sp.add_argument("q", type=int)
    sp.add_argument("n", type=int)
    _add_common(sp, workers=False)

    sp = subs.add_parser("search-fixed-n",
                         help="primes p <= p_max with (p^n-1)/(p-1) prime")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p-max", type=int, required=True)
    sp.add_argument("--segment-size", type=int, default=search.DEFAULT_SEGMENT_SIZE)
    sp.add_argument("--trial-bound", type=int, default=None)
    sp.add_argument("--checkpoint", default=None)
    sp.add_argument("--hits-out", default=None,
                    help="stream hits (p,e,n,digits) to this file")
    sp.add_argument("--no-hits", action="store_true",
                    help="tally only; do not keep the hit list")
    _add_common(sp)

    sp = subs.add_parser("search-fixed-p",
                         help="exponents n <= n_max with (p^n-1)/(p-1) prime")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n-max", type=int, required=True)
    sp.add_argument("--trial-bound", type=int, default=100_000)
    _add_common(sp)

    sp = subs.add_parser("search-prime-powers",
                         help="projective primes from q = p^e, e >= e_min")
    sp.add_argument("--q-max", type=int, required=True)
    sp.add_argument("--e-min", type=int, default=3)
    sp.add_argument("--e-max", type=int, default=None)
    sp.add_argument("--p", type=int, default=None, dest="p_fixed",
                    help="restrict to powers of this prime")
    sp.add_argument("--include-n2", action="store_true",
                    help="also test n = 2 (Fermat-style candidates)")
    sp.add_argument("--exhaustive", action="store_true",
                    help="disable the power-of-n exponent pruning")
    sp.add_argument("--trial-bound", type=int, default=None)
    _add_common(sp)

    sp = subs.add_parser("search-grid",
                         help="all prime powers q <= q_max, odd primes n <= n_max")
    sp.add_argument("--q-max", type=int, required=True)
    sp.add_argument("--n-max", type=int, required=True)
    sp.add_argument("--n-min", type=int, default=3)
    sp.add_argument("--trial-bound", type=int, default=None)
    sp.add_argument("--checkpoint", default=None)
    sp.add_argument("--hits-out", default=None)
    _add_common(sp)

    sp = subs.add_parser("collisions",
                         help="values m shared by two repunit representations")
    sp.add_argument("--m-max", type=int, required=True)
    sp.add_argument("--domain", choices=("prime-powers", "all-integers"),
                    default="prime-powers")
    sp.add_argument("--n-min", type=int, default=3)
    _add_common(sp, workers=False)

    sp = subs.add_parser("bunyakovsky",
                         help="fixed-divisor report and prime-value counts")
    sp.add_argument("--coeffs", required=True,
                    help="comma-separated coefficients, constant term first "
                         "(t^9 - t^3 + 2520 is 2520,0,0,-1,0,0,0,0,0,1)")
    sp.add_argument("--count-to", type=int, default=None,
                    help="also count prime values for t up to this bound")
    sp.add_argument("--domain", choices=("naturals", "primes", "prime-powers"),
                    default="naturals")
    _add_common(sp)

    sp = subs.add_parser("estimate", help="evaluate a density formula")
    sp.add_argument("--formula", required=True,
                    choices=heuristics.FORMULAS)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--x", type=float, default=None)
    sp.add_argument("--y", type=int, default=None)
    sp.add_argument("--r-max", type=int, default=None)
    _add_common(sp, workers=False)

    sp = subs.add_parser("fit", help="least-squares fit of y = Cx/ln(x)^alpha")
    sp.add_argument("--input", required=True,
                    help="CSV of x,y pairs (comments start with '#')")
    _add_common(sp, workers=False)

    sp = subs.add_parser("segments",
                         help="estimate/true ratios per segment record")
    sp.add_argument("--input", required=True,
                    help="checkpoint file or CSV of segment records")
    sp.add_argument("--fit", default=None, help="fit JSON file (from `fit`)")
    sp.add_argument("--C", type=float, default=None, dest="c_const")
    sp.add_argument("--alpha", type=float, default=None)
    _add_common(sp, workers=False)

    sp = subs.add_parser("histogram", help="100-bin histogram of ratios")
    sp.add_argument("--input", required=True,
                    help="CSV whose last column holds the ratios")
    sp.add_argument("--bins", type=int, default=100)
    _add_common(sp, workers=False)

    return parser


# ---------------------------------------------------------------------------
# subcommand bodies

def _cmd_isprime(args) -> int:
    config = _config(args, "isprime", ())
    m = _read_m(args.m)
    config.params["m_digits"] = decimal_digits(m) if m >= 0 else 0
    verdict = arith.is_prime(m, config.policy())
    if verdict.kind == "composite":
        detail = (f"factor={verdict.witness}" if verdict.witness_kind == "factor"
                  else f"mr-base={verdict.witness}")
        human = f"composite ({detail})"
    elif verdict.kind == "probable-prime":
        human = f"probable prime (rounds={verdict.rounds})"
    else:
        human = verdict.kind.replace("-", " ")
    payload = {"kind": verdict.kind, "witness": _jsonable(verdict.witness),
               "witness_kind": verdict.witness_kind, "rounds": verdict.rounds,
               "digits": decimal_digits(m)}
    _emit(config, payload, [human], ("kind", "witness", "rounds"),
          [(verdict.kind, _jsonable(verdict.witness), verdict.rounds)],
          bare_human=True)
    return EXIT_OK


def _jsonable(witness):
    if isinstance(witness, tuple):
        return [str(w) for w in witness]
    return str(witness) if isinstance(witness, int) else witness


def _cmd_repunit(args) -> int:
    config = _config(args, "repunit", ("q", "n"))
    m = repunit(args.q, args.n)
    payload = {"q": args.q, "n": args.n, "m": str(m),
               "digits": decimal_digits(m)}
    _emit(config, payload, [str(m)], ("q", "n", "digits", "m"),
          [(args.q, args.n, decimal_digits(m), m)], bare_human=True)
    return EXIT_OK


def _summary_output(config: RunConfig, summary: search.SearchSummary) -> None:
    rows = [(r.segment_index, r.lo, r.hi, r.primes_seen, r.projective_hits,
             r.max_hit_p) for r in summary.records]
    human = []
    for r in summary.records:
        pct = (100.0 * r.projective_hits / r.primes_seen
               if r.primes_seen else 0.0)
        human.append(f"segment {r.segment_index}: [{r.lo}, {r.hi})  "
                     f"primes={r.primes_seen}  hits={r.projective_hits}  "
                     f"ratio={pct:.2f}%  max_p={r.max_hit_p}")
    human.append(f"primes={summary.primes_seen}")
    human.append(f"hits={summary.projective_hits} max_p={summary.max_hit_p}")
    payload = {"mode": summary.mode, "params": summary.params,
               "policy_digest": summary.policy_digest,
               "records": [list(row) for row in rows],
               "primes_seen": summary.primes_seen,
               "hits": summary.projective_hits,
               "max_hit_p": summary.max_hit_p}
    _emit(config, payload, human,
          ("segment_index", "lo", "hi", "primes_seen", "projective_hits",
           "max_hit_p"), rows)


def _cmd_search_fixed_n(args) -> int:
    config = _config(args, "search-fixed-n",
                     ("n", "p-max", "segment-size", "trial-bound"))
    log.info("search-fixed-n n=%d p_max=%d workers=%d", args.n, args.p_max,
             config.workers)
    summary = search.search_fixed_n(
        args.n, args.p_max, segment_size=args.segment_size,
        policy=config.policy(), trial_bound=args.trial_bound,
        workers=args.workers, collect_hits=not args.no_hits,
        checkpoint=args.checkpoint, hits_path=args.hits_out)
    log.info("search-fixed-n done: hits=%d of %d primes",
             summary.projective_hits, summary.primes_seen)
    _summary_output(config, summary)
    return EXIT_OK


def _cmd_search_fixed_p(args) -> int:
    config = _config(args, "search-fixed-p", ("p", "n-max", "trial-bound"))
    exponents = search.search_fixed_p(args.p, args.n_max,
                                      policy=config.policy(),
                                      trial_bound=args.trial_bound,
                                      workers=args.workers)
    human = [f"exponents: {','.join(map(str, exponents))}",
             f"count={len(exponents)}"]
    payload = {"p": args.p, "n_max": args.n_max, "exponents": exponents,
               "count": len(exponents)}
    _emit(config, payload, human, ("n",), [(n,) for n in exponents])
    return EXIT_OK


def _cmd_search_prime_powers(args) -> int:
    config = _config(args, "search-prime-powers",
                     ("q-max", "e-min", "e-max", "p-fixed"))
    results = search.search_prime_powers(
        args.q_max, args.e_min, e_max=args.e_max,
        include_n2=args.include_n2, p_fixed=args.p_fixed,
        policy=config.policy(), trial_bound=args.trial_bound,
        workers=args.workers, exhaustive=args.exhaustive)
    rows = []
    human = []
    for pp, n in results:
        m_digits = decimal_digits(repunit(pp.q, n))
        rows.append((pp.p, pp.e, n, pp.q, m_digits))
        human.append(f"p={pp.p} e={pp.e} n={n} q={pp.q} digits={m_digits}")
    human.append(f"solutions={len(results)}")
    payload = {"q_max": args.q_max, "e_min": args.e_min,
               "include_n2": args.include_n2,
               "solutions": [[p, e, n, str(q), d] for p, e, n, q, d in rows],
               "count": len(results)}
    _emit(config, payload, human, ("p", "e", "n", "q", "m_digits"), rows)
    return EXIT_OK


def _cmd_search_grid(args) -> int:
    config = _config(args, "search-grid", ("q-max", "n-max", "n-min"))
    summary = search.search_grid(
        args.q_max, args.n_max, n_min=args.n_min, policy=config.policy(),
        trial_bound=args.trial_bound, workers=args.workers,
        checkpoint=args.checkpoint, hits_path=args.hits_out,
        return_summary=True)
    hits = summary.hits or []
    rows = [(p, e, n, p ** e, d) for (p, e, n, d) in hits]
    human = [f"q={q} n={n} (p={p} e={e} digits={d})"
             for p, e, n, q, d in rows]
    human.append(f"hits={len(rows)}")
    payload = {"q_max": args.q_max, "n_max": args.n_max,
               "hits": [[p, e, n, str(q), d] for p, e, n, q, d in rows],
               "count": len(rows)}
    _emit(config, payload, human, ("p", "e", "n", "q", "m_digits"), rows)
    return EXIT_OK


def _cmd_collisions(args) -> int:
    config = _config(args, "collisions", ("m-max", "domain", "n-min"))
    domain = args.domain.replace("-", "_")
    entries = search.degree_collisions(args.m_max, domain, n_min=args.n_min)
    human = []
    rows = []
    for entry in entries:
        reps = " = ".join(f"({b},{n})" for b, n in entry.representations)
        human.append(f"{entry.m} = {reps}")
        rows.append((entry.m,
                     ";".join(f"{b}:{n}" for b, n in entry.representations)))
    human.append(f"collisions={len(entries)}")
    payload = {"m_max": args.m_max, "domain": domain,
               "collisions": [{"m": e.m, "representations": list(map(list, e.representations))}
                              for e in entries]}
    _emit(config, payload, human, ("m", "representations"), rows)
    return EXIT_OK


def _cmd_bunyakovsky(args) -> int:
    config = _config(args, "bunyakovsky", ("coeffs", "count-to", "domain"))
    poly = bunyakovsky.IntPolynomial.parse(args.coeffs)
    report = bunyakovsky.bunyakovsky_report(poly)
    human = [f"f(t) = {poly}",
             f"leading_positive={report.leading_positive}",
             f"irreducible={report.irreducible}",
             f"fixed_divisor={report.fixed_divisor}",
             f"satisfies_conditions={report.satisfies_conditions}"]
    primes = bunyakovsky.prime_fixed_divisors(poly)
    human.append(f"prime_fixed_divisors={','.join(map(str, primes)) or '-'}")
    payload = {"polynomial": str(poly), "coeffs": list(poly.coeffs),
               "leading_positive": report.leading_positive,
               "irreducible": report.irreducible,
               "fixed_divisor": report.fixed_divisor,
               "prime_fixed_divisors": primes,
               "satisfies_conditions": report.satisfies_conditions}
    rows = [("fixed_divisor", report.fixed_divisor),
            ("irreducible", report.irreducible),
            ("satisfies", report.satisfies_conditions)]
    if args.count_to is not None:
        domain = args.domain.replace("-", "_")
        result = bunyakovsky.count_prime_values(
            poly, args.count_to, domain, config.policy(),
            workers=args.workers)
        human.append(f"prime values: {result.count} of {result.tested} tested"
                     f" (max t={result.max_hit_t})")
        payload["count"] = result.count
        payload["tested"] = result.tested
        payload["max_hit_t"] = result.max_hit_t
        rows.append(("prime_values", result.count))
    _emit(config, payload, human, ("key", "value"), rows)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    config = _config(args, "estimate", ("formula", "n", "p", "x", "y", "r-max"))
    inputs = {}
    for key in ("n", "p", "x", "y"):
        value = getattr(args, key)
        if value is not None:
            inputs[key] = value
    if args.r_max is not None:
        inputs["r_max"] = args.r_max
    try:
        if args.formula == "polya":
            products = heuristics.polya_products(inputs["x"])
            human = [f"full={products.full:.9g}",
                     f"sqrt={products.sqrt:.9g}",
                     f"magic_mu={products.magic_mu:.9g}",
                     f"reference={products.reference:.9g}",
                     f"full/reference={products.full / products.reference:.9g}",
                     f"sqrt/reference={products.sqrt / products.reference:.9g}",
                     f"magic_mu/reference={products.magic_mu / products.reference:.9g}"]
            payload = {"formula": "polya", "inputs": inputs,
                       "full": products.full, "sqrt": products.sqrt,
                       "magic_mu": products.magic_mu,
                       "reference": products.reference}
            rows = [("full", products.full), ("sqrt", products.sqrt),
                    ("magic_mu", products.magic_mu),
                    ("reference", products.reference)]
        else:
            estimate = heuristics.evaluate(args.formula, **inputs)
            human = [f"formula={estimate.formula} value={estimate.value:.9g}"]
            payload = {"formula": estimate.formula, "inputs": estimate.inputs,
                       "value": estimate.value}
            rows = [(estimate.formula, estimate.value)]
    except KeyError as exc:
        raise DomainError(f"missing input for formula: {exc}") from exc
    _emit(config, payload, human, ("formula", "value"), rows)
    return EXIT_OK


def _cmd_fit(args) -> int:
    config = _config(args, "fit", ("input",))
    points = fitstats.read_xy_csv(args.input)
    result = fitstats.fit_rectified(points)
    human = [f"a={result.a:.9f} C={result.C:.9f} alpha={result.alpha:.9f} "
             f"rms_residual={result.rms_residual:.3e}"]
    payload = json.loads(result.to_json())
    rows = [("a", result.a), ("C", result.C), ("alpha", result.alpha),
            ("rms_residual", result.rms_residual)]
    _emit(config, payload, human, ("key", "value"), rows)
    return EXIT_OK


def _load_fit(args) -> fitstats.FitResult:
    if args.fit:
        with open(args.fit, "r", encoding="utf-8") as fh:
            return fitstats.FitResult.from_json(fh.read())
    if args.c_const is not None and args.alpha is not None:
        return fitstats.FitResult.from_constants(args.c_const, args.alpha)
    raise DomainError("segments needs --fit FILE or both --C and --alpha")


def _cmd_segments(args) -> int:
    config = _config(args, "segments", ("input",))
    records = fitstats.read_segment_records(args.input)
    fit = _load_fit(args)
    ratios = fitstats.segment_ratios(records, fit)
    zeros = fitstats.zero_hit_segments(records)
    human = [f"{idx},{ratio:.6f}" for idx, ratio in ratios]
    human.append(f"zero-hit segments: {len(zeros)}")
    payload = {"ratios": [[i, r] for i, r in ratios],
               "zero_hit_segments": zeros}
    _emit(config, payload, human, ("segment_index", "ratio"), ratios)
    return EXIT_OK


def _cmd_histogram(args) -> int:
    config = _config(args, "histogram", ("input", "bins"))
    values = fitstats.read_ratio_csv(args.input)
    hist = fitstats.build_histogram(values, bins=args.bins)
    rows = hist.to_rows()
    human = [f"{center:.6f},{count}" for center, count in rows]
    human.append(f"total={hist.total} mean={hist.mean:.2f} "
                 f"stddev={hist.stddev:.2f} r_min={hist.r_min:.4f} "
                 f"r_max={hist.r_max:.4f}")
    peak = fitstats.normal_density(hist.mean, hist.mean, hist.stddev) \
        if hist.stddev > 0 else float("nan")
    human.append(f"normal density at mean: {peak:.4f}")
    payload = {"bin_edges": list(hist.bin_edges), "counts": list(hist.counts),
               "total": hist.total, "mean": hist.mean, "stddev": hist.stddev,
               "r_min": hist.r_min, "r_max": hist.r_max}
    _emit(config, payload, human, ("bin_center", "count"), rows)
    return EXIT_OK


_COMMANDS = {
    "isprime": _cmd_isprime,
    "repunit": _cmd_repunit,
    "search-fixed-n": _cmd_search_fixed_n,
    "search-fixed-p": _cmd_search_fixed_p,
    "search-prime-powers": _cmd_search_prime_powers,
    "search-grid": _cmd_search_grid,
    "collisions": _cmd_collisions,
    "bunyakovsky": _cmd_bunyakovsky,
    "estimate": _cmd_estimate,
    "fit": _cmd_fit,
    "segments": _cmd_segments,
    "histogram": _cmd_histogram,
}


def _apply_config_file(args, parser) -> None:
    """Fill options the command line left unset (None) from a JSON file."""
    if not args.config:
        return
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            defaults = json.load(fh)
    except (OSError, ValueError) as exc:
        raise DomainError(f"cannot read config file: {exc}") from exc
    if not isinstance(defaults, dict):
        raise DomainError("config file must hold a JSON object")
    for key, value in defaults.items():
        attr = str(key).replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        _apply_config_file(args, parser)
        return _COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"projprime: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except IntegrityError as exc:
        print(f"projprime: integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
