"""Independent reference computations used by the tests.

Everything here works from plain node sequences and Python sets with exact
``Fraction`` arithmetic.  Nothing touches the routing matrix, sparse algebra
or the package's metric code.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

Edge = tuple[str, str]
PathNodes = tuple[str, ...]


def path_edges(nodes: PathNodes) -> list[Edge]:
    return list(zip(nodes, nodes[1:]))


def edge_paths(paths: list[PathNodes]) -> dict[Edge, set[int]]:
    """P_e for every edge, by scanning each path."""
    out: dict[Edge, set[int]] = {}
    for i, p in enumerate(paths):
        for e in path_edges(p):
            out.setdefault(e, set()).add(i)
    return out


def membership_matrix(paths: list[PathNodes], weights: list[float]) -> dict[tuple[Edge, int], float]:
    """Every (edge, path) entry by looping over all pairs and testing membership."""
    edges = sorted({e for p in paths for e in path_edges(p)})
    out = {}
    for e in edges:
        for j, p in enumerate(paths):
            out[(e, j)] = weights[j] if e in path_edges(p) else 0.0
    return out


def _mass(idx: set[int], weights: list[float]) -> Fraction:
    return sum((Fraction(weights[i]) for i in idx), Fraction(0))


def vardi(pe: set[int], pf: set[int], w: list[float]) -> float:
    return float(_mass(pe ^ pf, w))


def normalized(pe: set[int], pf: set[int], w: list[float]) -> float:
    return float(_mass(pe ^ pf, w) / max(_mass(pe, w), _mass(pf, w)))


def weighted_jaccard(pe: set[int], pf: set[int], w: list[float]) -> float:
    return float(_mass(pe ^ pf, w) / _mass(pe | pf, w))


def jaccard(pe: set[int], pf: set[int]) -> float:
    return float(Fraction(len(pe ^ pf), len(pe | pf)))


def similarity(pe: set[int], pf: set[int], w: list[float]) -> float:
    return float(_mass(pe & pf, w) / _mass(pe | pf, w))


ORACLES = {
    "vardi": vardi,
    "normalized": normalized,
    "weighted_jaccard": weighted_jaccard,
    "jaccard": lambda pe, pf, w: jaccard(pe, pf),
}


def simple_paths(edges: set[Edge]) -> list[PathNodes]:
    """All loop-free paths of one or more edges in a small digraph."""
    adj: dict[str, list[str]] = {}
    for a, b in sorted(edges):
        adj.setdefault(a, []).append(b)
    out: list[PathNodes] = []

    def extend(path: list[str]) -> None:
        for nxt in adj.get(path[-1], []):
            if nxt in path:
                continue
            out.append(tuple(path + [nxt]))
            extend(path + [nxt])

    for start in sorted(adj):
        extend([start])
    return out


def random_instance(
    rng: random.Random,
    max_edges: int = 6,
    max_paths: int = 6,
    nodes: int = 5,
    one_per_pair: bool = False,
) -> list[PathNodes]:
    """Random loop-free paths using at most ``max_edges`` distinct edges."""
    names = [f"n{i}" for i in range(nodes)]
    all_edges = [(a, b) for a in names for b in names if a != b]
    while True:
        edges = set(rng.sample(all_edges, rng.randint(1, max_edges)))
        target = rng.randint(1, max_paths)
        candidates = simple_paths(edges)
        rng.shuffle(candidates)
        chosen: list[PathNodes] = []
        pairs = set()
        for p in candidates:
            if one_per_pair and (p[0], p[-1]) in pairs:
                continue
            chosen.append(p)
            pairs.add((p[0], p[-1]))
            if len(chosen) == target:
                break
        if chosen:
            return chosen


def ring_paths(n: int) -> list[PathNodes]:
    """Unidirectional ring: walk forward from s to d."""
    out = []
    for s in range(n):
        for d in range(n):
            if s != d:
                k = (d - s) % n
                out.append(tuple(str((s + i) % n) for i in range(k + 1)))
    return out


def star_paths(spokes: int) -> list[PathNodes]:
    return [(str(a), "hub", str(b)) for a in range(spokes) for b in range(spokes) if a != b]


def all_pair_similarities(paths: list[PathNodes]) -> dict[tuple[Edge, Edge], Fraction]:
    """Exact indicator-weight similarity for every unordered edge pair."""
    pe = edge_paths(paths)
    edges = sorted(pe)
    return {
        (e, f): Fraction(len(pe[e] & pe[f]), len(pe[e] | pe[f]))
        for e, f in itertools.combinations(edges, 2)
    }


def replay_proportions(traces: list[PathNodes]) -> dict[tuple[str, str], dict[Edge, Fraction]]:
    """Per pair, the fraction of individual traces that cross each edge."""
    crossed: dict[tuple[str, str], dict[Edge, int]] = {}
    total: dict[tuple[str, str], int] = {}
    for t in traces:
        pair = (t[0], t[-1])
        total[pair] = total.get(pair, 0) + 1
        counts = crossed.setdefault(pair, {})
        for e in path_edges(t):
            counts[e] = counts.get(e, 0) + 1
    return {
        pair: {e: Fraction(c, total[pair]) for e, c in counts.items()}
        for pair, counts in crossed.items()
    }
