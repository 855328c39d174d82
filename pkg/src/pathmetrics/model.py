"""Core domain types: endpoints, directed edges, paths and the routing matrix."""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Literal, Mapping, NamedTuple, Sequence

import numpy as np
from scipy import sparse

__all__ = [
    "DirectedEdge",
    "Path",
    "PathRecord",
    "PathSet",
    "RoutingMatrix",
    "WeightScheme",
    "build_routing_matrix",
    "row_of",
]


class DirectedEdge(NamedTuple):
    """An ordered adjacency ``src -> dst``; ``(a, b)`` and ``(b, a)`` differ."""

    src: str
    dst: str

    @property
    def label(self) -> str:
        return f"{self.src}->{self.dst}"

    @classmethod
    def parse(cls, text: str) -> "DirectedEdge":
        """Parse ``"a->b"``; a bare ``"a-b"`` is accepted when it has exactly one dash."""
        if "->" in text:
            src, _, dst = text.partition("->")
        elif text.count("-") == 1:
            src, _, dst = text.partition("-")
        else:
            raise ValueError(f"cannot parse edge label {text!r}; expected 'from->to'")
        src, dst = src.strip(), dst.strip()
        if not src or not dst:
            raise ValueError(f"cannot parse edge label {text!r}; expected 'from->to'")
        return cls(src, dst)

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True, order=True)
class Path:
    """A loop-free chain of directed edges from ``source`` to ``destination``.

    Ordering is ``(source, destination, edges)`` which is the column order of
    :class:`RoutingMatrix`.
    """

    source: str
    destination: str
    edges: tuple[DirectedEdge, ...]

    def __post_init__(self) -> None:
        if not self.source or not self.destination:
            raise ValueError("path endpoints must be non-empty ids")
        if not self.edges:
            raise ValueError("a path needs at least one edge")
        edges = tuple(DirectedEdge(*e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        for e in edges:
            if e.src == e.dst:
                raise ValueError(f"self-loop edge {e.label} in path")
        if edges[0].src != self.source or edges[-1].dst != self.destination:
            raise ValueError(
                f"edges do not run from {self.source} to {self.destination}"
            )
        for a, b in zip(edges, edges[1:]):
            if a.dst != b.src:
                raise ValueError(f"broken chain between {a.label} and {b.label}")
        nodes = self.nodes
        if len(set(nodes)) != len(nodes):
            raise ValueError(f"path {'>'.join(nodes)} revisits a node")

    @classmethod
    def from_nodes(cls, nodes: Sequence[str]) -> "Path":
        """Build a path from its node sequence ``[source, hop1, ..., destination]``."""
        if len(nodes) < 2:
            raise ValueError("a path needs at least two nodes")
        edges = tuple(DirectedEdge(a, b) for a, b in zip(nodes, nodes[1:]))
        return cls(nodes[0], nodes[-1], edges)

    @property
    def nodes(self) -> tuple[str, ...]:
        return (self.edges[0].src,) + tuple(e.dst for e in self.edges)

    @property
    def hops(self) -> tuple[str, ...]:
        """Intermediate nodes, excluding source and destination."""
        return self.nodes[1:-1]

    @property
    def pair(self) -> tuple[str, str]:
        return (self.source, self.destination)

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, edge: object) -> bool:
        return edge in self.edges


@dataclass(frozen=True)
class PathRecord:
    path: Path
    frequency: int

    def __post_init__(self) -> None:
        if int(self.frequency) != self.frequency or self.frequency < 1:
            raise ValueError(
                f"frequency must be a positive integer, got {self.frequency!r}"
            )


@dataclass(frozen=True, init=False)
class PathSet:
    """Distinct observed paths with their observation counts.

    Records are kept sorted by path, so two PathSets built from the same
    observations compare equal regardless of input order.
    """

    records: tuple[PathRecord, ...]

    def __init__(self, records: Iterable[PathRecord]) -> None:
        recs = tuple(sorted(records, key=lambda r: r.path))
        seen: set[Path] = set()
        for r in recs:
            if r.path in seen:
                raise ValueError(f"duplicate path record {'>'.join(r.path.nodes)}")
            seen.add(r.path)
        object.__setattr__(self, "records", recs)

    @classmethod
    def from_counts(cls, counts: Mapping[Path, int]) -> "PathSet":
        return cls(PathRecord(p, int(c)) for p, c in counts.items())

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def paths(self) -> tuple[Path, ...]:
        return tuple(r.path for r in self.records)

    @property
    def pair_totals(self) -> dict[tuple[str, str], int]:
        totals: Counter[tuple[str, str]] = Counter()
        for r in self.records:
            totals[r.path.pair] += r.frequency
        return dict(sorted(totals.items()))

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return sorted({r.path.pair for r in self.records})

    @property
    def endpoints(self) -> list[str]:
        return sorted({x for pair in self.pairs for x in pair})

    @property
    def edges(self) -> list[DirectedEdge]:
        return sorted({e for r in self.records for e in r.path.edges})

    def frequency(self, path: Path) -> int:
        for r in self.records:
            if r.path == path:
                return r.frequency
        raise KeyError(path)

    def labels(self) -> dict[Path, str]:
        """Column labels ``src>dst#k`` with ``k`` counting paths within the pair from 0."""
        counter: defaultdict[tuple[str, str], int] = defaultdict(int)
        out = {}
        for r in self.records:
            k = counter[r.path.pair]
            counter[r.path.pair] += 1
            out[r.path] = f"{r.path.source}>{r.path.destination}#{k}"
        return out


WeightKind = Literal["indicator", "frequency", "supplied"]


@dataclass(frozen=True)
class WeightScheme:
    """How the per-path weight ``w_p`` of the routing matrix is chosen."""

    kind: WeightKind = "frequency"
    supplied_weights: Mapping[Path, float] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in ("indicator", "frequency", "supplied"):
            raise ValueError(f"unknown weight scheme {self.kind!r}")
        if self.kind == "supplied":
            if self.supplied_weights is None:
                raise ValueError("supplied weight scheme needs a weight mapping")
            for p, w in self.supplied_weights.items():
                if not np.isfinite(w) or w < 0:
                    raise ValueError(
                        f"weight for path {'>'.join(p.nodes)} must be a non-negative "
                        f"finite number, got {w!r}"
                    )

    @classmethod
    def indicator(cls) -> "WeightScheme":
        return cls("indicator")

    @classmethod
    def frequency(cls) -> "WeightScheme":
        return cls("frequency")

    @classmethod
    def supplied(cls, weights: Mapping[Path, float]) -> "WeightScheme":
        return cls("supplied", dict(weights))

    def weight(self, record: PathRecord) -> float:
        if self.kind == "indicator":
            return 1.0
        if self.kind == "frequency":
            return float(record.frequency)
        assert self.supplied_weights is not None
        return float(self.supplied_weights[record.path])


@dataclass(frozen=True, eq=False)
class RoutingMatrix:
    """Edges x paths matrix with ``entries[e, p] = w_p`` when edge ``e`` lies on ``p``.

    ``entries`` is a sparse CSR array holding only the nonzero entries; treat
    it and ``weights`` as read-only.
    """

    edges: tuple[DirectedEdge, ...]
    paths: tuple[Path, ...]
    entries: sparse.csr_array
    weights: np.ndarray
    scheme: WeightKind
    path_labels: tuple[str, ...]
    _edge_index: dict[DirectedEdge, int] = field(repr=False, compare=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @cached_property
    def exact_weights(self) -> tuple[tuple[int, ...], int]:
        """Weights as integers over one common power-of-two denominator.

        Every float is a dyadic rational, so sums of these integers are exact
        and a single final division gives a correctly rounded ratio.
        """
        ratios = [float(w).as_integer_ratio() for w in self.weights]
        den = max(d for _, d in ratios)
        return tuple(n * (den // d) for n, d in ratios), den

    def dense(self) -> np.ndarray:
        return self.entries.toarray()

    def index_of(self, edge: DirectedEdge | tuple[str, str]) -> int:
        try:
            return self._edge_index[DirectedEdge(*edge)]
        except KeyError:
            raise KeyError(f"unknown edge {DirectedEdge(*edge).label}") from None

    def __contains__(self, edge: object) -> bool:
        return (
            isinstance(edge, tuple)
            and len(edge) == 2
            and DirectedEdge(*edge) in self._edge_index
        )

    def row(self, edge: DirectedEdge | tuple[str, str]) -> np.ndarray:
        i = self.index_of(edge)
        out = np.zeros(self.shape[1])
        lo, hi = self.entries.indptr[i], self.entries.indptr[i + 1]
        out[self.entries.indices[lo:hi]] = self.entries.data[lo:hi]
        return out

    def support(self, edge: DirectedEdge | tuple[str, str]) -> frozenset[int]:
        """Path indices ``P_e`` carrying a nonzero entry for ``edge``."""
        i = self.index_of(edge)
        lo, hi = self.entries.indptr[i], self.entries.indptr[i + 1]
        return frozenset(self.entries.indices[lo:hi].tolist())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["edge", *self.path_labels])
        for e in self.edges:
            writer.writerow([e.label, *(_fmt_real(v) for v in self.row(e))])
        return buf.getvalue()


def _fmt_real(v: float) -> str:
    return f"{int(v)}" if float(v).is_integer() else repr(float(v))


def build_routing_matrix(paths: PathSet, scheme: WeightScheme | None = None) -> RoutingMatrix:
    """Build the weighted routing matrix of ``paths`` under ``scheme``.

    Rows are all edges in lexicographic ``(from, to)`` order; columns are the
    distinct paths ordered by ``(source, destination, edge sequence)``.

    Raises:
        ValueError: if ``paths`` is empty, a supplied weight is missing, or a
            zero weight leaves some edge row without a nonzero entry.
    """
    scheme = scheme or WeightScheme.frequency()
    if len(paths) == 0:
        raise ValueError("no paths")
    records = paths.records
    labels = paths.labels()
    if scheme.kind == "supplied":
        assert scheme.supplied_weights is not None
        for r in records:
            if r.path not in scheme.supplied_weights:
                raise ValueError(f"no supplied weight for path {labels[r.path]}")

    edges = tuple(paths.edges)
    index = {e: i for i, e in enumerate(edges)}
    weights = np.array([scheme.weight(r) for r in records], dtype=float)
    rows: list[int] = []
    cols: list[int] = []
    for j, r in enumerate(records):
        if weights[j] == 0:
            continue
        rows.extend(index[e] for e in r.path.edges)
        cols.extend([j] * len(r.path.edges))
    data = weights[cols] if cols else np.zeros(0)
    entries = sparse.csr_array(
        (data, (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(len(edges), len(records)),
    )
    entries.sort_indices()

    empty = np.flatnonzero(np.diff(entries.indptr) == 0)
    if empty.size:
        names = ", ".join(edges[i].label for i in empty[:5])
        raise ValueError(f"edges with all-zero weight rows: {names}")

    weights.setflags(write=False)
    return RoutingMatrix(
        edges=edges,
        paths=tuple(r.path for r in records),
        entries=entries,
        weights=weights,
        scheme=scheme.kind,
        path_labels=tuple(labels[r.path] for r in records),
        _edge_index=index,
    )


def row_of(matrix: RoutingMatrix, edge: DirectedEdge | tuple[str, str]) -> np.ndarray:
    """Row ``A_e`` of ``matrix``; see :meth:`RoutingMatrix.support` for ``P_e``."""
    return matrix.row(edge)
