"""Endpoint hierarchies from routing data and the test schedules they drive.

Pipeline: collapse the frequency-weighted routing matrix to one column per
source/destination pair (the fraction of that pair's traces crossing each
edge), sum each column into an endpoint distance, symmetrize, cluster, and
walk the resulting tree to produce rounds of pairwise tests.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import random
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Literal, Sequence

import numpy as np
from scipy import sparse

from .model import DirectedEdge, PathSet, RoutingMatrix

Linkage = Literal["average", "single", "complete"]


@dataclass(frozen=True, eq=False)
class PairIncidenceMatrix:
    """Per-pair edge usage: ``entries[e, k] = counts[e, k] / totals[k]``."""

    edges: tuple[DirectedEdge, ...]
    pairs: tuple[tuple[str, str], ...]
    counts: np.ndarray
    totals: np.ndarray

    @property
    def entries(self) -> np.ndarray:
        return self.counts / self.totals[None, :]

    def column(self, pair: tuple[str, str]) -> np.ndarray:
        return self.entries[:, self.pairs.index(tuple(pair))]


def collapse_by_pair(A: RoutingMatrix, ps: PathSet) -> PairIncidenceMatrix:
    """Merge the path columns of each source/destination pair into usage proportions.

    Raises:
        ValueError: if ``A`` is not frequency weighted or was not built from ``ps``.
    """
    if A.scheme != "frequency":
        raise ValueError(
            f"collapsing needs a frequency-weighted routing matrix, got {A.scheme!r} weights"
        )
    if A.paths != ps.paths:
        raise ValueError("routing matrix was not built from this path set")
    totals_by_pair = ps.pair_totals
    pairs = tuple(totals_by_pair)
    col = {pair: k for k, pair in enumerate(pairs)}
    to_pair = sparse.csr_array(
        (
            np.ones(len(A.paths)),
            (np.arange(len(A.paths)), [col[p.pair] for p in A.paths]),
        ),
        shape=(len(A.paths), len(pairs)),
    )
    counts = np.rint((A.entries @ to_pair).toarray()).astype(np.int64)
    totals = np.array([totals_by_pair[p] for p in pairs], dtype=np.int64)
    return PairIncidenceMatrix(tuple(A.edges), pairs, counts, totals)


@dataclass(frozen=True, eq=False)
class EndpointDistanceMatrix:
    """Endpoint-to-endpoint distances; NaN marks a pair that was never tested."""

    endpoints: tuple[str, ...]
    values: np.ndarray
    symmetric: bool = False

    def get(self, a: str, b: str) -> float:
        i, j = self.endpoints.index(a), self.endpoints.index(b)
        return float(self.values[i, j])

    def missing_pairs(self) -> list[tuple[str, str]]:
        idx = np.argwhere(np.isnan(self.values))
        return [(self.endpoints[i], self.endpoints[j]) for i, j in idx if i != j]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["endpoint", *self.endpoints])
        for e, row in zip(self.endpoints, self.values):
            writer.writerow([e, *("" if np.isnan(v) else f"{v:.6f}" for v in row)])
        return buf.getvalue()


def endpoint_distance(pim: PairIncidenceMatrix) -> EndpointDistanceMatrix:
    """``D[s, d]`` = sum of the collapsed column for pair ``(s, d)``.

    For a pair that always follows one path this is its hop count.
    """
    endpoints = tuple(sorted({x for pair in pim.pairs for x in pair}))
    index = {e: i for i, e in enumerate(endpoints)}
    values = np.full((len(endpoints), len(endpoints)), np.nan)
    np.fill_diagonal(values, 0.0)
    col_sums = pim.counts.sum(axis=0)
    for k, (s, d) in enumerate(pim.pairs):
        # int / int keeps the division correctly rounded
        values[index[s], index[d]] = int(col_sums[k]) / int(pim.totals[k])
    return EndpointDistanceMatrix(endpoints, values, symmetric=False)


def symmetrize(D: EndpointDistanceMatrix) -> EndpointDistanceMatrix:
    """``(D + D^T) / 2``; when only one direction was measured it is used alone."""
    v = D.values
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError("distance matrix must be square")
    vt = v.T
    out = np.where(np.isnan(v), vt, np.where(np.isnan(vt), v, (v + vt) / 2))
    np.fill_diagonal(out, 0.0)
    return EndpointDistanceMatrix(D.endpoints, out, symmetric=True)


# -- trees ---------------------------------------------------------------------


@dataclass
class TreeNode:
    label: str
    height: float = 0.0
    children: list["TreeNode"] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list[str]:
        if self.is_leaf:
            return [self.label]
        return [leaf for c in self.children for leaf in c.leaves()]

    def walk(self) -> Iterator["TreeNode"]:
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class HierarchyTree:
    root: TreeNode

    def leaves(self) -> list[str]:
        return self.root.leaves()

    def internal_nodes(self) -> list[TreeNode]:
        return [n for n in self.root.walk() if not n.is_leaf]

    def levels(self) -> list[list[TreeNode]]:
        """Internal nodes grouped by depth, top-down, children in stored order."""
        out: list[list[TreeNode]] = []
        frontier = [self.root] if not self.root.is_leaf else []
        while frontier:
            out.append(frontier)
            frontier = [c for n in frontier for c in n.children if not c.is_leaf]
        return out

    def round_size(self) -> int:
        return sum(math.comb(len(n.children), 2) for n in self.internal_nodes())

    # -- serialization --

    def to_dict(self) -> dict:
        def enc(n: TreeNode) -> dict:
            if n.is_leaf:
                return {"label": n.label}
            return {
                "label": n.label,
                "height": n.height,
                "children": [enc(c) for c in n.children],
            }

        return enc(self.root)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, obj: dict) -> "HierarchyTree":
        counter = itertools.count()

        def dec(o: dict) -> TreeNode:
            kids = [dec(c) for c in o.get("children", [])]
            label = o.get("label") or f"node{next(counter)}"
            return TreeNode(str(label), float(o.get("height", 0.0)), kids)

        tree = cls(dec(obj))
        _check_unique_leaves(tree)
        return tree

    def to_newick(self) -> str:
        def enc(n: TreeNode, parent_height: float | None) -> str:
            text = _newick_label(n.label)
            if not n.is_leaf:
                text = "(" + ",".join(enc(c, n.height) for c in n.children) + ")" + text
            if parent_height is not None:
                text += f":{parent_height - n.height:.10g}"
            return text

        return enc(self.root, None) + ";\n"

    @classmethod
    def from_newick(cls, text: str) -> "HierarchyTree":
        tree = cls(_NewickParser(text).parse())
        _check_unique_leaves(tree)
        return tree


def _check_unique_leaves(tree: HierarchyTree) -> None:
    leaves = tree.leaves()
    dupes = sorted({x for x in leaves if leaves.count(x) > 1})
    if dupes:
        raise ValueError(f"leaf labels repeat: {', '.join(dupes)}")


_NEWICK_PLAIN = re.compile(r"^[A-Za-z0-9_.\-/>#@?]+$")


def _newick_label(label: str) -> str:
    if _NEWICK_PLAIN.match(label):
        return label
    return "'" + label.replace("'", "''") + "'"


class _NewickParser:
    def __init__(self, text: str) -> None:
        self.s = text.strip()
        self.i = 0
        self.counter = itertools.count()

    def parse(self) -> TreeNode:
        node, _ = self._node()
        if self.i >= len(self.s) or self.s[self.i] != ";":
            raise ValueError(f"newick: expected ';' at offset {self.i}")
        self._set_heights(node)
        return node

    def _node(self) -> tuple[TreeNode, float]:
        children: list[tuple[TreeNode, float]] = []
        if self._peek() == "(":
            self.i += 1
            while True:
                children.append(self._node())
                c = self._peek()
                self.i += 1
                if c == ")":
                    break
                if c != ",":
                    raise ValueError(f"newick: unexpected {c!r} at offset {self.i - 1}")
        label = self._label()
        length = 0.0
        if self._peek() == ":":
            self.i += 1
            m = re.compile(r"[-+0-9.eE]+").match(self.s, self.i)
            if not m:
                raise ValueError(f"newick: bad branch length at offset {self.i}")
            length = float(m.group())
            self.i = m.end()
        if not label:
            label = f"node{next(self.counter)}"
        node = TreeNode(label, 0.0, [c for c, _ in children])
        node._branch = [b for _, b in children]  # type: ignore[attr-defined]
        return node, length

    def _peek(self) -> str:
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1
        return self.s[self.i] if self.i < len(self.s) else ""

    def _label(self) -> str:
        if self._peek() == "'":
            out = []
            self.i += 1
            while self.i < len(self.s):
                ch = self.s[self.i]
                if ch == "'":
                    if self.s[self.i + 1 : self.i + 2] == "'":
                        out.append("'")
                        self.i += 2
                        continue
                    self.i += 1
                    return "".join(out)
                out.append(ch)
                self.i += 1
            raise ValueError("newick: unterminated quoted label")
        m = re.compile(r"[^\s(),:;']*").match(self.s, self.i)
        assert m is not None
        self.i = m.end()
        return m.group()

    def _set_heights(self, node: TreeNode) -> float:
        branches = node.__dict__.pop("_branch", [])
        if node.is_leaf:
            node.height = 0.0
        else:
            node.height = max(self._set_heights(c) + b for c, b in zip(node.children, branches))
        return node.height


# -- clustering ----------------------------------------------------------------


def agglomerative_cluster(
    symD: EndpointDistanceMatrix, linkage: Linkage = "average"
) -> HierarchyTree:
    """Agglomerative clustering into a binary dendrogram.

    Clusters are numbered like leaves ``0..n-1`` then ``n, n+1, ...`` in merge
    order; at equal distance the pair with the smallest ``(i, j)`` merges
    first.  Internal nodes are labelled ``c<number>``.

    Raises:
        ValueError: on missing pairs, asymmetry, negative entries or an
            unknown linkage.
    """
    if linkage not in ("average", "single", "complete"):
        raise ValueError(f"unknown linkage {linkage!r}")
    v = np.asarray(symD.values, dtype=float)
    missing = symD.missing_pairs()
    if missing:
        listed = ", ".join(f"{a}->{b}" for a, b in missing if a < b) or ", ".join(
            f"{a}->{b}" for a, b in missing
        )
        raise ValueError(f"untested endpoint pairs: {listed}")
    if not np.array_equal(v, v.T):
        raise ValueError("distance matrix is not symmetric; symmetrize it first")
    if (v < 0).any() or (np.diag(v) != 0).any():
        raise ValueError("distances must be non-negative with zero diagonal")
    n = len(symD.endpoints)
    if n == 0:
        raise ValueError("no endpoints to cluster")

    nodes: dict[int, TreeNode] = {i: TreeNode(ep) for i, ep in enumerate(symD.endpoints)}
    sizes = {i: 1 for i in range(n)}
    dist: dict[tuple[int, int], float] = {
        (i, j): float(v[i, j]) for i in range(n) for j in range(i + 1, n)
    }
    next_id = n
    while len(nodes) > 1:
        (i, j), h = min(dist.items(), key=lambda kv: (kv[1], kv[0]))
        merged = TreeNode(f"c{next_id}", h, [nodes.pop(i), nodes.pop(j)])
        ni, nj = sizes.pop(i), sizes.pop(j)
        for k in nodes:
            dik = dist.pop((min(i, k), max(i, k)))
            djk = dist.pop((min(j, k), max(j, k)))
            if linkage == "average":
                d = (ni * dik + nj * djk) / (ni + nj)
            elif linkage == "single":
                d = min(dik, djk)
            else:
                d = max(dik, djk)
            dist[(k, next_id)] = d
        del dist[(i, j)]
        nodes[next_id] = merged
        sizes[next_id] = ni + nj
        next_id += 1
    return HierarchyTree(next(iter(nodes.values())))


def flatten(tree: HierarchyTree, heights: Sequence[float]) -> HierarchyTree:
    """Cut a dendrogram at decreasing ``heights`` into an n-ary tree.

    Level ``k`` groups the leaves into the maximal subtrees whose merge height
    is at most ``heights[k]``.  Groups with a single member are spliced out so
    a cut above the root, or below every merge, both give one node over all
    leaves.
    """
    heights = [float(h) for h in heights]
    if any(a <= b for a, b in zip(heights, heights[1:])):
        raise ValueError("cut heights must be strictly decreasing")

    def clusters(node: TreeNode, cut: float) -> list[TreeNode]:
        if node.is_leaf or node.height <= cut:
            return [node]
        return [c for child in node.children for c in clusters(child, cut)]

    def build(node: TreeNode, level: int) -> TreeNode:
        if node.is_leaf:
            return TreeNode(node.label)
        if level == len(heights):
            return TreeNode(node.label, node.height, [TreeNode(x) for x in node.leaves()])
        groups = clusters(node, heights[level])
        if len(groups) == 1:
            return build(node, level + 1)
        return TreeNode(node.label, node.height, [build(g, level + 1) for g in groups])

    return HierarchyTree(build(tree.root, 0))


# -- scheduling ----------------------------------------------------------------


@dataclass(frozen=True)
class ScheduledTest:
    src: str
    dst: str
    node: str


@dataclass
class TestSchedule:
    __test__ = False  # not a pytest class

    rounds: list[list[ScheduledTest]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["round", "order", "src", "dst", "generating_node"])
        for r, tests in enumerate(self.rounds, start=1):
            for k, t in enumerate(tests, start=1):
                writer.writerow([r, k, t.src, t.dst, t.node])
        return buf.getvalue()


def schedule_round(tree: HierarchyTree, seed: int | random.Random = 0) -> list[ScheduledTest]:
    """One round of tests: every pair of children under every internal node.

    Internal nodes are visited breadth-first, top level first.  A child that
    is itself a region is represented by a leaf beneath it drawn uniformly
    with the seeded generator.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    if len(tree.leaves()) < 2:
        raise ValueError("a schedule needs at least two leaves")

    def representative(node: TreeNode) -> str:
        return node.label if node.is_leaf else rng.choice(node.leaves())

    tests: list[ScheduledTest] = []
    queue = deque([tree.root])
    while queue:
        node = queue.popleft()
        if node.is_leaf:
            continue
        for a, b in itertools.combinations(node.children, 2):
            tests.append(ScheduledTest(representative(a), representative(b), node.label))
        queue.extend(node.children)
    return tests


def test_schedule(tree: HierarchyTree, rounds: int = 1, seed: int = 0) -> TestSchedule:
    """``rounds`` independently sampled rounds from one seeded generator."""
    if rounds < 1:
        raise ValueError("need at least one round")
    rng = random.Random(seed)
    return TestSchedule([schedule_round(tree, rng) for _ in range(rounds)])


test_schedule.__test__ = False  # type: ignore[attr-defined]


def build_hierarchy(
    ps: PathSet, A: RoutingMatrix, linkage: Linkage = "average"
) -> tuple[HierarchyTree, EndpointDistanceMatrix]:
    """Run collapse, endpoint distance, symmetrize and clustering in one call."""
    D = symmetrize(endpoint_distance(collapse_by_pair(A, ps)))
    return agglomerative_cluster(D, linkage), D
