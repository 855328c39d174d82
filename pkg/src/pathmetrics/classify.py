"""Canonical topologies, edge-similarity signatures and signature matching."""

from __future__ import annotations

import enum
import io
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse

from .metrics import shared_mass, similarity
from .model import Path, PathRecord, PathSet, RoutingMatrix, WeightScheme, build_routing_matrix

DEFAULT_BINS = 20
DEFAULT_REFERENCE_N = 100
HUB = "hub"


class TopologyKind(str, enum.Enum):
    RING_UNIDIRECTIONAL = "ring_unidirectional"
    RING_BIDIRECTIONAL = "ring_bidirectional"
    STAR = "star"
    MESH = "mesh"

    @classmethod
    def parse(cls, text: "str | TopologyKind") -> "TopologyKind":
        if isinstance(text, TopologyKind):
            return text
        key = text.strip().lower().replace("-", "_")
        key = {"ring_uni": "ring_unidirectional", "ring_bi": "ring_bidirectional"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown topology {text!r}; choose from {choices}") from None


_MIN_NODES = {
    TopologyKind.RING_UNIDIRECTIONAL: 3,
    TopologyKind.RING_BIDIRECTIONAL: 3,
    TopologyKind.STAR: 3,
    TopologyKind.MESH: 2,
}


@dataclass(frozen=True)
class CanonicalNetwork:
    kind: TopologyKind
    n: int
    nodes: tuple[str, ...]
    paths: PathSet

    @property
    def endpoints(self) -> list[str]:
        return self.paths.endpoints


def _ring_nodes(s: int, d: int, n: int, forward: bool) -> list[str]:
    step = 1 if forward else -1
    out = [s]
    while out[-1] != d:
        out.append((out[-1] + step) % n)
    return [str(x) for x in out]


def topology_paths(kind: TopologyKind | str, n: int) -> list[list[str]]:
    """Node sequences of the one path per ordered endpoint pair in a canonical network.

    Ring and mesh endpoints are ``"0".."n-1"``.  A star has ``n`` nodes in
    total: the router ``"hub"`` and ``n-1`` spokes that act as endpoints.
    """
    kind = TopologyKind.parse(kind)
    if n < _MIN_NODES[kind]:
        raise ValueError(f"{kind.value} needs at least {_MIN_NODES[kind]} nodes, got {n}")
    out: list[list[str]] = []
    spokes = n - 1 if kind is TopologyKind.STAR else n
    for s in range(spokes):
        for d in range(spokes):
            if s == d:
                continue
            if kind is TopologyKind.MESH:
                out.append([str(s), str(d)])
            elif kind is TopologyKind.STAR:
                out.append([str(s), HUB, str(d)])
            elif kind is TopologyKind.RING_UNIDIRECTIONAL:
                out.append(_ring_nodes(s, d, n, True))
            else:
                fwd = (d - s) % n
                # antipodal ties go clockwise
                out.append(_ring_nodes(s, d, n, fwd <= n - fwd))
    return out


def generate_topology(kind: TopologyKind | str, n: int) -> CanonicalNetwork:
    """One of the four reference networks with a frequency-1 path per ordered pair."""
    kind = TopologyKind.parse(kind)
    seqs = topology_paths(kind, n)
    ps = PathSet(PathRecord(Path.from_nodes(nodes), 1) for nodes in seqs)
    if kind is TopologyKind.STAR:
        nodes = (HUB, *(str(i) for i in range(n - 1)))
    else:
        nodes = tuple(str(i) for i in range(n))
    return CanonicalNetwork(kind, n, nodes, ps)


# -- signatures ------------------------------------------------------------------


@dataclass(frozen=True)
class PairSimilarities:
    """Similarities of all unordered distinct edge pairs, stored sparsely.

    ``rows``/``cols`` index edges of the routing matrix for every pair with a
    nonzero similarity; the remaining ``n_pairs - len(values)`` pairs are 0.
    """

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    n_pairs: int

    @property
    def n_zero(self) -> int:
        return self.n_pairs - len(self.values)


def pair_similarities(A: RoutingMatrix, weighted: bool = True) -> PairSimilarities:
    """``1 - d2`` (or ``1 - d3`` when ``weighted`` is false) for every edge pair."""
    n = len(A.edges)
    inter = shared_mass(A, weighted)
    if inter is None:
        # weights too fine-grained for exact float64 sums; go pair by pair
        rows, cols, vals = [], [], []
        for i in range(n):
            for j in range(i + 1, n):
                s = similarity(A, A.edges[i], A.edges[j])
                if s > 0:
                    rows.append(i)
                    cols.append(j)
                    vals.append(s)
        return PairSimilarities(
            np.asarray(rows, dtype=np.int64),
            np.asarray(cols, dtype=np.int64),
            np.asarray(vals, dtype=float),
            n * (n - 1) // 2,
        )
    mass = inter.diagonal()
    upper = sparse.triu(inter, k=1).tocoo()
    keep = upper.data > 0
    r, c, shared = upper.row[keep], upper.col[keep], upper.data[keep]
    order = np.lexsort((c, r))
    r, c, shared = r[order], c[order], shared[order]
    union = mass[r] + mass[c] - shared
    return PairSimilarities(r.astype(np.int64), c.astype(np.int64), shared / union, n * (n - 1) // 2)


@dataclass(frozen=True, eq=False)
class SignatureHistogram:
    """Normalized distribution of edge-pair similarities.

    ``zero_mass`` is the share of pairs with similarity exactly 0; ``masses``
    covers ``bins`` equal intervals of ``(0, 1]``, the last one closed.
    """

    zero_mass: float
    masses: np.ndarray
    n_pairs: int

    @property
    def bins(self) -> int:
        return len(self.masses)

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.bins + 1)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([[self.zero_mass], self.masses])

    def distance(self, other: "SignatureHistogram") -> float:
        """L1 distance between the two normalized histograms, zero bin included."""
        if other.bins != self.bins:
            raise ValueError(f"bin counts differ ({self.bins} vs {other.bins})")
        return float(np.abs(self.vector - other.vector).sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("bin_low,bin_high,mass\n")
        buf.write(f"0,0,{self.zero_mass:.10f}\n")
        e = self.edges
        for lo, hi, m in zip(e[:-1], e[1:], self.masses):
            buf.write(f"{lo:.4f},{hi:.4f},{m:.10f}\n")
        return buf.getvalue()


def histogram_from_similarities(sims: PairSimilarities, bins: int = DEFAULT_BINS) -> SignatureHistogram:
    if bins < 1:
        raise ValueError("need at least one bin")
    if sims.n_pairs < 1:
        raise ValueError("a signature needs at least 2 edges")
    idx = np.minimum(np.floor(sims.values * bins).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(float)
    return SignatureHistogram(sims.n_zero / sims.n_pairs, counts / sims.n_pairs, sims.n_pairs)


def signature(
    ps: PathSet, weights: WeightScheme | None = None, bins: int = DEFAULT_BINS
) -> SignatureHistogram:
    """Histogram of edge-pair similarities; indicator weights by default.

    Indicator weights give ``1 - d3``; frequency or supplied weights give
    ``1 - d2``.

    Raises:
        ValueError: if the paths contain fewer than two edges.
    """
    weights = weights or WeightScheme.indicator()
    if len(ps.edges) < 2:
        raise ValueError("a signature needs at least 2 edges")
    A = build_routing_matrix(ps, weights)
    return histogram_from_similarities(pair_similarities(A, weights.kind != "indicator"), bins)


@lru_cache(maxsize=64)
def canonical_signature(
    kind: TopologyKind, n: int = DEFAULT_REFERENCE_N, bins: int = DEFAULT_BINS
) -> SignatureHistogram:
    return signature(generate_topology(kind, n).paths, WeightScheme.indicator(), bins)


@dataclass(frozen=True)
class Classification:
    kind: TopologyKind
    distances: dict[TopologyKind, float]
    reference_n: int

    def report(self) -> str:
        return (
            json.dumps(
                {
                    "classified_as": self.kind.value,
                    "reference_n": self.reference_n,
                    "distances": {k.value: round(v, 12) for k, v in self.distances.items()},
                },
                indent=2,
            )
            + "\n"
        )


def classify_network(
    sig: SignatureHistogram, reference_n: int = DEFAULT_REFERENCE_N
) -> Classification:
    """Nearest canonical topology by L1 histogram distance at ``reference_n`` nodes.

    Ties go to the first kind in declaration order.
    """
    distances = {
        kind: sig.distance(canonical_signature(kind, reference_n, sig.bins))
        for kind in TopologyKind
    }
    best = min(TopologyKind, key=lambda k: (distances[k], list(TopologyKind).index(k)))
    return Classification(best, distances, reference_n)


def ring_hop_separation(a: tuple[str, str], b: tuple[str, str], n: int) -> int:
    """Circular distance between the tails of two ring edges."""
    d = abs(int(a[0]) - int(b[0])) % n
    return min(d, n - d)


__all__ = [
    "CanonicalNetwork",
    "Classification",
    "PairSimilarities",
    "SignatureHistogram",
    "TopologyKind",
    "canonical_signature",
    "classify_network",
    "generate_topology",
    "pair_similarities",
    "signature",
    "topology_paths",
]
