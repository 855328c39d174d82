"""Trace log parsing, aggregation into a PathSet, and descriptive statistics.

Canonical text format, one trace per line::

    <epoch-seconds> <source-id> <destination-id> <hop1> <hop2> ...

``*`` marks a hop that did not answer and ``#`` starts a comment line.  The
structured variant carries one JSON object per line with keys ``ts``, ``src``,
``dst`` and ``hops``.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .model import Path, PathRecord, PathSet

UNKNOWN_HOP = "*"

LogFormat = Literal["auto", "text", "structured"]
UnknownHopPolicy = Literal["drop", "placeholder"]


@dataclass(frozen=True)
class TraceRecord:
    timestamp: float
    source: str
    destination: str
    hops: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.source or not self.destination:
            raise ValueError("source and destination must be non-empty")
        if self.source == self.destination:
            raise ValueError(f"source equals destination ({self.source})")
        object.__setattr__(self, "hops", tuple(self.hops))

    @property
    def has_unknown_hop(self) -> bool:
        return UNKNOWN_HOP in self.hops

    def to_text(self) -> str:
        ts = int(self.timestamp) if float(self.timestamp).is_integer() else self.timestamp
        return " ".join([str(ts), self.source, self.destination, *self.hops])


@dataclass(frozen=True)
class ParseError:
    lineno: int
    line: str
    message: str

    def __str__(self) -> str:
        return f"line {self.lineno}: {self.message}: {self.line!r}"


@dataclass
class IngestStats:
    total_traces: int = 0
    kept_traces: int = 0
    dropped_traces: int = 0
    drop_reasons: dict[str, int] = field(default_factory=dict)
    distinct_paths: int = 0
    distinct_pairs: int = 0
    endpoints: list[str] = field(default_factory=list)
    destination_only: list[str] = field(default_factory=list)
    unexpected_endpoints: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "total": self.total_traces,
            "kept": self.kept_traces,
            "dropped": self.dropped_traces,
            "drop_reasons": dict(sorted(self.drop_reasons.items())),
            "distinct_paths": self.distinct_paths,
            "pairs": self.distinct_pairs,
            "endpoints": len(self.endpoints),
            "destination_only": list(self.destination_only),
            "unexpected_endpoints": list(self.unexpected_endpoints),
        }

    def report(self) -> str:
        lines = [
            f"total traces:    {self.total_traces}",
            f"kept traces:     {self.kept_traces}",
            f"dropped traces:  {self.dropped_traces}",
        ]
        for reason, n in sorted(self.drop_reasons.items()):
            lines.append(f"  {reason}: {n}")
        n_ep = len(self.endpoints)
        lines += [
            f"distinct paths:  {self.distinct_paths}",
            f"distinct pairs:  {self.distinct_pairs} (of {n_ep * (n_ep - 1)} possible)",
            f"endpoints:       {n_ep}",
        ]
        if self.destination_only:
            lines.append("destination-only endpoints: " + " ".join(self.destination_only))
        if self.unexpected_endpoints:
            lines.append("endpoints not in roster: " + " ".join(self.unexpected_endpoints))
        return "\n".join(lines)


def _parse_text(line: str) -> TraceRecord:
    tokens = line.split()
    if len(tokens) < 3:
        raise ValueError("expected '<epoch> <source> <destination> [hops...]'")
    try:
        ts = float(tokens[0])
    except ValueError:
        raise ValueError(f"bad timestamp {tokens[0]!r}") from None
    if not math.isfinite(ts):
        raise ValueError(f"bad timestamp {tokens[0]!r}")
    if UNKNOWN_HOP in tokens[1:3]:
        raise ValueError("source and destination cannot be unknown")
    return TraceRecord(ts, tokens[1], tokens[2], tuple(tokens[3:]))


def _parse_structured(line: str) -> TraceRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ValueError("expected a JSON object")
    missing = [k for k in ("ts", "src", "dst") if k not in obj]
    if missing:
        raise ValueError(f"missing keys {missing}")
    hops = obj.get("hops", [])
    if not isinstance(hops, list) or not all(isinstance(h, str) and h for h in hops):
        raise ValueError("'hops' must be a list of non-empty strings")
    ts = obj["ts"]
    if isinstance(ts, bool) or not isinstance(ts, (int, float)) or not math.isfinite(ts):
        raise ValueError(f"bad timestamp {ts!r}")
    src, dst = obj["src"], obj["dst"]
    if not isinstance(src, str) or not isinstance(dst, str):
        raise ValueError("'src' and 'dst' must be strings")
    if any(" " in x for x in (src, dst, *hops)):
        raise ValueError("node ids cannot contain whitespace")
    return TraceRecord(float(ts), src, dst, tuple(hops))


def parse_trace_log(
    lines: Iterable[str], fmt: LogFormat = "auto"
) -> tuple[list[TraceRecord], list[ParseError]]:
    """Parse a trace log into records, collecting one diagnostic per malformed line.

    With ``fmt="auto"`` a line whose first character is ``{`` is read as the
    structured variant and anything else as text.  Blank and ``#`` lines are
    ignored.  I/O errors from the underlying stream propagate.
    """
    if fmt not in ("auto", "text", "structured"):
        raise ValueError(f"unknown log format {fmt!r}")
    records: list[TraceRecord] = []
    errors: list[ParseError] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        structured = fmt == "structured" or (fmt == "auto" and line.startswith("{"))
        try:
            rec = _parse_structured(line) if structured else _parse_text(line)
        except ValueError as exc:
            errors.append(ParseError(lineno, line, str(exc)))
            continue
        records.append(rec)
    return records, errors


def _placeholder(rec: TraceRecord, position: int) -> str:
    return f"?{rec.source}>{rec.destination}@{position}"


def aggregate_paths(
    records: Sequence[TraceRecord],
    policy: UnknownHopPolicy = "drop",
    roster: Iterable[str] | None = None,
    malformed: int = 0,
) -> tuple[PathSet, IngestStats]:
    """Merge trace records into distinct paths with observation frequencies.

    Records containing ``*`` are dropped under ``policy="drop"``; with
    ``"placeholder"`` each unknown hop becomes a synthetic node id unique to
    its (source, destination, hop position).  Records that revisit a node are
    dropped with reason ``loop``.  ``malformed`` counts lines the parser
    rejected so that the stats cover the whole input.

    Raises:
        ValueError: "no usable traces" when nothing survives.
    """
    if policy not in ("drop", "placeholder"):
        raise ValueError(f"unknown unknown-hop policy {policy!r}")
    reasons: Counter[str] = Counter()
    if malformed:
        reasons["malformed"] = malformed
    counts: Counter[Path] = Counter()
    for rec in records:
        hops = list(rec.hops)
        if rec.has_unknown_hop:
            if policy == "drop":
                reasons["unknown_hop"] += 1
                continue
            hops = [
                _placeholder(rec, i) if h == UNKNOWN_HOP else h
                for i, h in enumerate(hops, start=1)
            ]
        try:
            path = Path.from_nodes([rec.source, *hops, rec.destination])
        except ValueError:
            reasons["loop"] += 1
            continue
        counts[path] += 1

    kept = sum(counts.values())
    if kept == 0:
        raise ValueError("no usable traces")
    ps = PathSet.from_counts(counts)

    sources = {p.source for p in counts}
    destinations = {p.destination for p in counts}
    endpoints = sorted(sources | destinations)
    unexpected: list[str] = []
    if roster is not None:
        allowed = set(roster)
        unexpected = [e for e in endpoints if e not in allowed]

    dropped = sum(reasons.values())
    stats = IngestStats(
        total_traces=kept + dropped,
        kept_traces=kept,
        dropped_traces=dropped,
        drop_reasons=dict(reasons),
        distinct_paths=len(ps),
        distinct_pairs=len(ps.pairs),
        endpoints=endpoints,
        destination_only=sorted(destinations - sources),
        unexpected_endpoints=unexpected,
    )
    return ps, stats


def ingest_lines(
    lines: Iterable[str],
    fmt: LogFormat = "auto",
    policy: UnknownHopPolicy = "drop",
    roster: Iterable[str] | None = None,
) -> tuple[PathSet, IngestStats, list[ParseError]]:
    """Parse and aggregate in one pass; malformed lines count as dropped traces."""
    records, errors = parse_trace_log(lines, fmt)
    ps, stats = aggregate_paths(records, policy, roster, malformed=len(errors))
    return ps, stats, errors


def path_frequency_histogram(ps: PathSet, bin_width: float) -> dict[tuple[float, float], int]:
    """Count distinct paths per frequency bin ``[k*w, (k+1)*w)``."""
    if not bin_width > 0:
        raise ValueError(f"bin width must be positive, got {bin_width!r}")
    if len(ps) == 0:
        raise ValueError("no paths")
    bins: Counter[int] = Counter(math.floor(r.frequency / bin_width) for r in ps)
    return {(k * bin_width, (k + 1) * bin_width): n for k, n in sorted(bins.items())}


def path_count_matrix(
    ps: PathSet, endpoints: Sequence[str] | None = None
) -> tuple[list[str], np.ndarray]:
    """Number of distinct observed paths for each (source row, destination column)."""
    eps = list(endpoints) if endpoints is not None else ps.endpoints
    index = {e: i for i, e in enumerate(eps)}
    out = np.zeros((len(eps), len(eps)), dtype=int)
    for r in ps:
        out[index[r.path.source], index[r.path.destination]] += 1
    return eps, out


# -- PathSet archive ---------------------------------------------------------


def dump_archive(ps: PathSet) -> str:
    """One JSON object per path: ``src``, ``dst``, ``hops``, ``frequency``."""
    rows = [
        json.dumps(
            {
                "src": r.path.source,
                "dst": r.path.destination,
                "hops": list(r.path.hops),
                "frequency": r.frequency,
            },
            separators=(", ", ": "),
        )
        for r in ps
    ]
    return "\n".join(rows) + "\n"


def load_archive(lines: Iterable[str]) -> PathSet:
    counts: Counter[Path] = Counter()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
            path = Path.from_nodes([obj["src"], *obj.get("hops", []), obj["dst"]])
            freq = int(obj["frequency"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"archive line {lineno}: {exc}") from None
        if freq < 1:
            raise ValueError(f"archive line {lineno}: frequency must be >= 1")
        counts[path] += freq
    if not counts:
        raise ValueError("archive holds no paths")
    return PathSet(PathRecord(p, c) for p, c in counts.items())
