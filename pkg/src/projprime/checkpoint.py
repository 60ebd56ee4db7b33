"""Line-delimited checkpoint files for long searches.

Layout (text, UTF-8, one record per line):

    projprime-checkpoint,1,<mode>,<k=v;k=v;...>,<policy-digest>
    <segment_index>,<lo>,<hi>,<primes_seen>,<projective_hits>,<max_hit_p>
    ...
    checksum,<16 hex digits>

The footer is the 64-bit FNV-1a hash of every byte above it (newlines
included). Writes go through a temp file and an atomic rename, so an
interrupted run always leaves the previous complete file in place. Hits are
streamed to a sidecar file, one `p,e,n,digits` line per hit, in segment
order.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .digests import fnv1a64
from .errors import DomainError, IntegrityError

MAGIC = "projprime-checkpoint"
FORMAT_VERSION = "1"


@dataclass(frozen=True)
class SegmentRecord:
    """Per-interval tallies: one row of a segment table."""

    segment_index: int
    lo: int
    hi: int
    primes_seen: int
    projective_hits: int
    max_hit_p: Optional[int] = None

    def __post_init__(self):
        if self.projective_hits > self.primes_seen:
            raise DomainError("projective_hits cannot exceed primes_seen")
        if self.max_hit_p is not None and not self.lo <= self.max_hit_p < self.hi:
            raise DomainError("max_hit_p outside [lo, hi)")

    def to_line(self) -> str:
        tail = "" if self.max_hit_p is None else str(self.max_hit_p)
        return (f"{self.segment_index},{self.lo},{self.hi},"
                f"{self.primes_seen},{self.projective_hits},{tail}")

    @classmethod
    def from_line(cls, line: str) -> "SegmentRecord":
        parts = line.split(",")
        if len(parts) != 6:
            raise IntegrityError(f"malformed segment record: {line!r}")
        try:
            max_p = int(parts[5]) if parts[5] else None
            return cls(int(parts[0]), int(parts[1]), int(parts[2]),
                       int(parts[3]), int(parts[4]), max_p)
        except ValueError as exc:
            raise IntegrityError(f"malformed segment record: {line!r}") from exc


@dataclass(frozen=True)
class CheckpointHeader:
    mode: str
    params: Dict[str, str]
    policy_digest: str

    def to_line(self) -> str:
        for key, value in self.params.items():
            token = f"{key}={value}"
            if any(ch in token for ch in ",;\n") or "=" in str(value):
                raise DomainError(f"illegal characters in parameter {key!r}")
        body = ";".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{MAGIC},{FORMAT_VERSION},{self.mode},{body},{self.policy_digest}"

    @classmethod
    def from_line(cls, line: str) -> "CheckpointHeader":
        parts = line.split(",")
        if len(parts) != 5 or parts[0] != MAGIC:
            raise IntegrityError("not a checkpoint file")
        if parts[1] != FORMAT_VERSION:
            raise IntegrityError(f"unsupported checkpoint version {parts[1]!r}")
        params: Dict[str, str] = {}
        if parts[3]:
            for token in parts[3].split(";"):
                key, _, value = token.partition("=")
                params[key] = value
        return cls(parts[2], params, parts[4])


def _footer(payload: str) -> str:
    return f"checksum,{fnv1a64(payload.encode('utf-8')):016x}"


def write_checkpoint(path, header: CheckpointHeader,
                     records: Sequence[SegmentRecord]) -> None:
    """Atomically write a complete checkpoint (temp file + rename)."""
    ordered = sorted(records, key=lambda r: r.segment_index)
    payload = header.to_line() + "\n"
    payload += "".join(rec.to_line() + "\n" for rec in ordered)
    text = payload + _footer(payload) + "\n"
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def read_checkpoint(path) -> Tuple[CheckpointHeader, List[SegmentRecord]]:
    """Parse and validate a checkpoint; raises IntegrityError on any damage."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IntegrityError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(lines) < 2:
        raise IntegrityError("checkpoint truncated")
    footer = lines[-1]
    if not footer.startswith("checksum,"):
        raise IntegrityError("checkpoint missing checksum footer")
    payload = "".join(line + "\n" for line in lines[:-1])
    if _footer(payload) != footer:
        raise IntegrityError("checkpoint checksum mismatch")
    header = CheckpointHeader.from_line(lines[0])
    records = [SegmentRecord.from_line(line) for line in lines[1:-1]]
    return header, records


def write_hits(path, hit_lines: Sequence[str]) -> None:
    """Atomically write the hit stream (one `p,e,n,digits[,m]` line per hit)."""
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        for line in hit_lines:
            fh.write(line + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def read_hits(path) -> List[Tuple[int, ...]]:
    """Parse a hit stream into integer tuples."""
    out: List[Tuple[int, ...]] = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    out.append(tuple(int(tok) for tok in line.split(",")))
                except ValueError as exc:
                    raise IntegrityError(f"malformed hit line: {line!r}") from exc
    except OSError as exc:
        raise IntegrityError(f"cannot read hit stream {path}: {exc}") from exc
    return out
