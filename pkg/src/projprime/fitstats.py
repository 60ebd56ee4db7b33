"""Empirical rectification of the density model and segment-ratio statistics.

The model y = C x / ln(x)^alpha becomes a straight line v = a + alpha*u in
the coordinates u = ln(ln(x)), v = ln(x/y) with a = -ln(C); ordinary least
squares on transformed points recovers (C, alpha). Segment ratios divide the
model's interval estimate by the observed hit count; their spread is what
the histogram and normal-density comparison describe.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from statistics import fmean, pstdev
from typing import Iterable, List, Optional, Sequence, Tuple

from .checkpoint import SegmentRecord, read_checkpoint
from .errors import DegenerateDataError, DomainError, IntegrityError

Point = Tuple[float, float]


def loglog_transform(points: Sequence[Point]) -> List[Point]:
    """(x, y) -> (u, v) = (ln ln x, ln(x/y)); needs x > e and y > 0."""
    out = []
    for x, y in points:
        if x <= math.e:
            raise DomainError("x must exceed e for ln(ln(x))")
        if y <= 0:
            raise DomainError("y must be positive")
        out.append((math.log(math.log(x)), math.log(x / y)))
    return out


def least_squares_line(points: Sequence[Point]) -> Tuple[float, float]:
    """Unweighted OLS fit v ~ a + alpha*u; returns (a, alpha)."""
    if len(points) < 2:
        raise DomainError("need at least two points")
    us = [u for u, _ in points]
    vs = [v for _, v in points]
    umean = math.fsum(us) / len(us)
    vmean = math.fsum(vs) / len(vs)
    sxx = math.fsum((u - umean) ** 2 for u in us)
    if sxx == 0.0:
        raise DegenerateDataError("all u values identical; fit is degenerate")
    sxy = math.fsum((u - umean) * (v - vmean) for u, v in zip(us, vs))
    alpha = sxy / sxx
    a = vmean - alpha * umean
    return a, alpha


@dataclass(frozen=True)
class FitResult:
    """Constants of y = C x / ln(x)^alpha with per-point residuals."""

    a: float
    C: float
    alpha: float
    residuals: Tuple[Tuple[float, float, float], ...]  # (u, v, fitted v)
    rms_residual: float

    @classmethod
    def from_constants(cls, c_value: float, alpha: float) -> "FitResult":
        """Build a FitResult from externally known constants (no residuals)."""
        if c_value <= 0:
            raise DomainError("C must be positive")
        return cls(-math.log(c_value), c_value, alpha, (), 0.0)

    def to_json(self) -> str:
        return json.dumps({
            "a": self.a, "C": self.C, "alpha": self.alpha,
            "rms_residual": self.rms_residual,
            "residuals": [list(r) for r in self.residuals],
        })

    @classmethod
    def from_json(cls, text: str) -> "FitResult":
        try:
            data = json.loads(text)
            return cls(float(data["a"]), float(data["C"]), float(data["alpha"]),
                       tuple(tuple(r) for r in data.get("residuals", ())),
                       float(data.get("rms_residual", 0.0)))
        except (KeyError, ValueError, TypeError) as exc:
            raise IntegrityError(f"malformed fit JSON: {exc}") from exc


def fit_rectified(points: Sequence[Point]) -> FitResult:
    """Transform (x, y) pairs and fit the rectified model."""
    uv = loglog_transform(points)
    a, alpha = least_squares_line(uv)
    residuals = tuple((u, v, a + alpha * u) for u, v in uv)
    rms = math.sqrt(math.fsum((v - fv) ** 2 for _, v, fv in residuals)
                    / len(residuals))
    return FitResult(a, math.exp(-a), alpha, residuals, rms)


def rectified_estimate(x: float, fit: FitResult) -> float:
    """C x / ln(x)^alpha."""
    if x <= math.e:
        raise DomainError("x must exceed e")
    return fit.C * x / math.log(x) ** fit.alpha


def segment_estimate(a_lo: float, b_hi: float, fit: FitResult) -> float:
    """Expected hits from primes in [a_lo, b_hi]:
    C (b/ln(b)^alpha - a/ln(a)^alpha)."""
    if a_lo <= math.e:
        raise DomainError("segment start must exceed e")
    if b_hi < a_lo:
        raise DomainError("segment bounds out of order")
    return rectified_estimate(b_hi, fit) - rectified_estimate(a_lo, fit)


def segment_ratios(records: Sequence[SegmentRecord], fit: FitResult
                   ) -> List[Tuple[int, float]]:
    """(segment_index, estimate/true hits) per record; zero-hit segments are
    excluded (callers report them separately via zero_hit_segments)."""
    out = []
    for rec in records:
        if rec.projective_hits < 1:
            continue
        est = segment_estimate(max(rec.lo, 3.0), rec.hi, fit)
        out.append((rec.segment_index, est / rec.projective_hits))
    return out


def zero_hit_segments(records: Sequence[SegmentRecord]) -> List[int]:
    return [rec.segment_index for rec in records if rec.projective_hits < 1]


@dataclass(frozen=True)
class Histogram:
    """Equal-width histogram with mean/stddev reported in bin-index units."""

    bin_edges: Tuple[float, ...]
    counts: Tuple[int, ...]
    total: int
    mean: float
    stddev: float
    r_min: float
    r_max: float

    def to_rows(self) -> List[Tuple[float, int]]:
        """Plot-ready (bin center, count) rows."""
        return [((self.bin_edges[i] + self.bin_edges[i + 1]) / 2.0, c)
                for i, c in enumerate(self.counts)]


def build_histogram(values: Sequence[float], bins: int = 100) -> Histogram:
    """Count values into `bins` equal parts of [min, max]; the right edge is
    inclusive only for the last bin."""
    if bins < 1:
        raise DomainError("bins must be >= 1")
    if len(values) < 2:
        raise DegenerateDataError("need at least two values")
    r_min, r_max = min(values), max(values)
    if r_min == r_max:
        raise DegenerateDataError("all values identical; histogram is degenerate")
    width = (r_max - r_min) / bins
    counts = [0] * bins
    indices = []
    for v in values:
        if not r_min <= v <= r_max:
            raise DomainError("value outside histogram range")
        idx = min(int((v - r_min) / width), bins - 1)
        counts[idx] += 1
        indices.append(idx)
    edges = tuple(r_min + i * width for i in range(bins)) + (r_max,)
    return Histogram(edges, tuple(counts), len(values),
                     fmean(indices), pstdev(indices), r_min, r_max)


def normal_density(x: float, mean: float, stddev: float) -> float:
    """Gaussian density with the given parameters."""
    if stddev <= 0:
        raise DomainError("stddev must be positive")
    z = (x - mean) / stddev
    return math.exp(-0.5 * z * z) / (stddev * math.sqrt(2.0 * math.pi))


# ---------------------------------------------------------------------------
# CSV ingestion (field orders match the checkpoint format)

def read_xy_csv(path) -> List[Point]:
    """Two-column (x, y) CSV; '#' lines and a non-numeric header row skipped."""
    points: List[Point] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                points.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if points:
                    raise DomainError(f"malformed CSV row: {row!r}") from None
                # else: tolerated header line
    return points


def read_segment_records(path) -> List[SegmentRecord]:
    """SegmentRecords from either a checkpoint file or a bare CSV of rows in
    the checkpoint field order (segment_index,lo,hi,primes_seen,hits,max_p)."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("projprime-checkpoint,"):
        _header, records = read_checkpoint(path)
        return records
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            records.append(SegmentRecord.from_line(line))
    return records


def read_ratio_csv(path) -> List[float]:
    """Ratios from a one- or two-column CSV (last column is the ratio)."""
    out: List[float] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                out.append(float(row[-1]))
            except ValueError:
                if out:
                    raise DomainError(f"malformed ratio row: {row!r}") from None
    return out
