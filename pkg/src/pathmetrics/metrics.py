"""Edge distances over routing-matrix rows.

All four distances are computed from three exact quantities per edge pair:
the weight mass of paths shared by both edges, the union mass, and each
edge's own row mass.  Weights are first mapped to integers over a common
power-of-two denominator (see :attr:`RoutingMatrix.exact_weights`), so every
value returned here is the correctly rounded real result.  Consequently
``weighted_jaccard == jaccard`` holds bit-for-bit whenever all path weights
are equal.

Norms are L1 throughout; with indicator weights and one path per pair the
Vardi distance is then exactly the size of the symmetric difference of the
two edges' path sets.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import sparse

from .model import DirectedEdge, PathSet, RoutingMatrix

EdgeLike = Union[DirectedEdge, tuple[str, str]]

# Keeps mass_e + mass_f below 2**53, where float64 integer arithmetic is exact.
_EXACT_FLOAT_LIMIT = 2**52


class MetricKind(str, enum.Enum):
    VARDI = "vardi"
    NORMALIZED = "normalized"
    WEIGHTED_JACCARD = "weighted_jaccard"
    JACCARD = "jaccard"

    @classmethod
    def parse(cls, text: str | "MetricKind") -> "MetricKind":
        if isinstance(text, MetricKind):
            return text
        key = text.strip().lower().replace("-", "_")
        alias = {"d": "vardi", "d1": "normalized", "d2": "weighted_jaccard", "d3": "jaccard"}
        try:
            return cls(alias.get(key, key))
        except ValueError:
            choices = ", ".join([m.value for m in cls] + list(alias))
            raise ValueError(f"unknown metric {text!r}; choose from {choices}") from None

    @property
    def bounded(self) -> bool:
        return self in (MetricKind.WEIGHTED_JACCARD, MetricKind.JACCARD)


@dataclass(frozen=True, eq=False)
class EdgeDistanceMatrix:
    edges: tuple[DirectedEdge, ...]
    kind: MetricKind
    values: np.ndarray
    scheme: str = "frequency"

    def __post_init__(self) -> None:
        self.values.setflags(write=False)

    def index_of(self, edge: EdgeLike) -> int:
        return self.edges.index(DirectedEdge(*edge))

    def get(self, e: EdgeLike, f: EdgeLike) -> float:
        return float(self.values[self.index_of(e), self.index_of(f)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# metric={self.kind.value} weights={self.scheme}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["edge", *(e.label for e in self.edges)])
        for e, row in zip(self.edges, self.values):
            writer.writerow([e.label, *(f"{v:.6f}" for v in row)])
        return buf.getvalue()


# -- per-pair evaluation -------------------------------------------------------


def _pair_masses(A: RoutingMatrix, e: EdgeLike, f: EdgeLike) -> tuple[int, int, int, int, int]:
    """Exact integer ``(shared, union, mass_e, mass_f, denominator)`` for one pair."""
    pe, pf = A.support(e), A.support(f)
    ints, den = A.exact_weights
    mass_e = sum(ints[p] for p in pe)
    mass_f = sum(ints[p] for p in pf)
    shared = sum(ints[p] for p in pe & pf)
    return shared, mass_e + mass_f - shared, mass_e, mass_f, den


def vardi_distance(A: RoutingMatrix, e: EdgeLike, f: EdgeLike) -> float:
    """L1 distance ``|A_e - A_f|`` between two rows."""
    shared, union, _, _, den = _pair_masses(A, e, f)
    return (union - shared) / den


def normalized_distance(A: RoutingMatrix, e: EdgeLike, f: EdgeLike) -> float:
    """``|A_e - A_f| / max(|A_e|, |A_f|)``; ranges over ``[0, 2]``."""
    shared, union, mass_e, mass_f, _ = _pair_masses(A, e, f)
    return (union - shared) / max(mass_e, mass_f)


def weighted_jaccard_distance(A: RoutingMatrix, e: EdgeLike, f: EdgeLike) -> float:
    """Weight mass of the symmetric difference of ``P_e`` and ``P_f`` over their union."""
    shared, union, _, _, _ = _pair_masses(A, e, f)
    return (union - shared) / union


def jaccard_distance(source: RoutingMatrix | PathSet, e: EdgeLike, f: EdgeLike) -> float:
    """``|P_e Δ P_f| / |P_e ∪ P_f|`` ignoring weights."""
    if isinstance(source, PathSet):
        e, f = DirectedEdge(*e), DirectedEdge(*f)
        pe = {i for i, p in enumerate(source.paths) if e in p}
        pf = {i for i, p in enumerate(source.paths) if f in p}
        for edge, support in ((e, pe), (f, pf)):
            if not support:
                raise KeyError(f"unknown edge {edge.label}")
    else:
        pe, pf = source.support(e), source.support(f)
    return len(pe ^ pf) / len(pe | pf)


def similarity(A: RoutingMatrix, e: EdgeLike, f: EdgeLike) -> float:
    """``1 - weighted_jaccard_distance``, evaluated as shared mass over union mass."""
    shared, union, _, _, _ = _pair_masses(A, e, f)
    return shared / union


_SCALAR = {
    MetricKind.VARDI: vardi_distance,
    MetricKind.NORMALIZED: normalized_distance,
    MetricKind.WEIGHTED_JACCARD: weighted_jaccard_distance,
    MetricKind.JACCARD: jaccard_distance,
}


def distance(A: RoutingMatrix, e: EdgeLike, f: EdgeLike, kind: MetricKind | str) -> float:
    return _SCALAR[MetricKind.parse(kind)](A, e, f)


# -- all pairs -----------------------------------------------------------------


def incidence(A: RoutingMatrix) -> sparse.csr_array:
    """0/1 edges x paths support of ``A`` as a sparse float array."""
    B = A.entries.copy()
    B.data[:] = 1.0
    return B


def shared_mass(A: RoutingMatrix, weighted: bool = True) -> sparse.csr_array | None:
    """Sparse ``B diag(w) B^T`` of exact integer shared masses, or None if float64 would round.

    The diagonal holds each edge's own row mass.
    """
    B = incidence(A)
    if weighted:
        ints, _ = A.exact_weights
        if sum(ints) >= _EXACT_FLOAT_LIMIT:
            return None
        w = np.asarray(ints, dtype=float)
    else:
        w = np.ones(B.shape[1])
    return sparse.csr_array(B.multiply(w[None, :]) @ B.T)


def _pairwise_exact_python(A: RoutingMatrix, kind: MetricKind) -> np.ndarray:
    n = len(A.edges)
    out = np.zeros((n, n))
    fn = _SCALAR[kind]
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = fn(A, A.edges[i], A.edges[j])
    return out


def pairwise_matrix(A: RoutingMatrix, kind: MetricKind | str) -> EdgeDistanceMatrix:
    """Distances for every edge pair, symmetric with zero diagonal."""
    kind = MetricKind.parse(kind)
    weighted = kind is not MetricKind.JACCARD
    shared = shared_mass(A, weighted)
    if shared is None:
        values = _pairwise_exact_python(A, kind)
    else:
        inter = shared.toarray()
        mass = inter.diagonal().copy()
        union = mass[:, None] + mass[None, :] - inter
        delta = union - inter
        if kind is MetricKind.VARDI:
            values = delta / A.exact_weights[1]
        elif kind is MetricKind.NORMALIZED:
            values = delta / np.maximum(mass[:, None], mass[None, :])
        else:
            values = delta / union
        np.fill_diagonal(values, 0.0)
    return EdgeDistanceMatrix(tuple(A.edges), kind, values, A.scheme)


def similarity_map(A: RoutingMatrix, reference: EdgeLike) -> dict[DirectedEdge, float]:
    """Similarity of every edge of ``A`` to ``reference``, in matrix row order."""
    reference = DirectedEdge(*reference)
    if reference not in A:
        available = ", ".join(e.label for e in A.edges)
        raise KeyError(f"unknown reference edge {reference.label}; available: {available}")
    return {e: similarity(A, reference, e) for e in A.edges}
