import itertools
import random

import numpy as np
import pytest
from conftest import NJ_TABLE, pathset
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pathmetrics.metrics import (
    MetricKind,
    distance,
    jaccard_distance,
    normalized_distance,
    pairwise_matrix,
    similarity,
    similarity_map,
    vardi_distance,
    weighted_jaccard_distance,
)
from pathmetrics.model import WeightScheme, build_routing_matrix

LIN_B = ("Lin", "B")


def instance(seed, weights="random", one_per_pair=False):
    rng = random.Random(seed)
    nodes = oracles.random_instance(rng, one_per_pair=one_per_pair)
    ps = pathset([(p, rng.randint(1, 20)) for p in nodes])
    paths = [p.nodes for p in ps.paths]
    if weights == "random":
        w = [rng.uniform(0.01, 100.0) for _ in paths]
        scheme = WeightScheme.supplied(dict(zip(ps.paths, w)))
    elif weights == "indicator":
        w = [1.0] * len(paths)
        scheme = WeightScheme.indicator()
    else:
        w = [float(ps.frequency(p)) for p in ps.paths]
        scheme = WeightScheme.frequency()
    return build_routing_matrix(ps, scheme), paths, w


class TestNJ:
    def test_shared_branch_similarity(self, nj_matrix):
        assert similarity(nj_matrix, LIN_B, ("B", "D")) == 1336 / 1888
        assert weighted_jaccard_distance(nj_matrix, LIN_B, ("B", "D")) == 552 / 1888

    def test_disjoint_edges_similarity(self, nj_matrix):
        assert similarity(nj_matrix, LIN_B, ("I", "G")) == 0
        assert weighted_jaccard_distance(nj_matrix, LIN_B, ("I", "G")) == 1

    def test_normalized_hand_value(self, nj_matrix):
        assert normalized_distance(nj_matrix, LIN_B, ("B", "C")) == 1336 / 1888
        assert normalized_distance(nj_matrix, LIN_B, ("B", "C")) == pytest.approx(0.7076, abs=1e-4)

    def test_jaccard_counts(self, nj_matrix, nj_paths):
        assert jaccard_distance(nj_matrix, LIN_B, ("B", "D")) == 0.5
        assert jaccard_distance(nj_paths, LIN_B, ("B", "D")) == 0.5

    def test_similarity_column(self, nj_matrix):
        sims = similarity_map(nj_matrix, LIN_B)
        for a, b, printed in NJ_TABLE:
            assert sims[(a, b)] == pytest.approx(printed, abs=0.005)
        assert sims[("F", "H")] == 1.0
        assert sims[LIN_B] == 1.0

    def test_pairwise_row_reproduces_column(self, nj_matrix):
        m = pairwise_matrix(nj_matrix, "d2")
        assert m.values.shape == (14, 14)
        for a, b, printed in NJ_TABLE:
            assert 1 - m.get(LIN_B, (a, b)) == pytest.approx(printed, abs=0.005)

    def test_unknown_reference(self, nj_matrix):
        with pytest.raises(KeyError, match="available"):
            similarity_map(nj_matrix, ("X", "Y"))

    def test_unknown_edge(self, nj_matrix):
        for fn in (vardi_distance, normalized_distance, weighted_jaccard_distance, jaccard_distance, similarity):
            with pytest.raises(KeyError):
                fn(nj_matrix, LIN_B, ("X", "Y"))

    def test_unknown_edge_on_pathset(self, nj_paths):
        with pytest.raises(KeyError):
            jaccard_distance(nj_paths, LIN_B, ("X", "Y"))


class TestSmallCases:
    def test_disjoint_single_paths_vardi(self):
        A = build_routing_matrix(pathset([(("a", "b"), 3), (("c", "d"), 5)]), WeightScheme.indicator())
        assert vardi_distance(A, ("a", "b"), ("c", "d")) == 2

    def test_disjoint_equal_norm_normalized(self):
        A = build_routing_matrix(pathset([(("a", "b"), 3), (("c", "d"), 3)]), WeightScheme.frequency())
        assert normalized_distance(A, ("a", "b"), ("c", "d")) == 2

    def test_one_edge_pairwise(self):
        A = build_routing_matrix(pathset([(("a", "b"), 3)]))
        for kind in MetricKind:
            assert pairwise_matrix(A, kind).values.tolist() == [[0.0]]

    def test_disjoint_component_similarity(self):
        A = build_routing_matrix(pathset([(("a", "x", "b"), 3), (("c", "d"), 1)]))
        assert similarity_map(A, ("a", "x"))[("c", "d")] == 0

    @pytest.mark.parametrize("alias, kind", [("d", "vardi"), ("d1", "normalized"), ("d2", "weighted_jaccard"), ("d3", "jaccard")])
    def test_metric_aliases(self, alias, kind):
        assert MetricKind.parse(alias).value == kind

    def test_bad_metric(self):
        with pytest.raises(ValueError, match="unknown metric"):
            MetricKind.parse("cosine")

    def test_csv_export(self, nj_matrix):
        text = pairwise_matrix(nj_matrix, "d2").to_csv()
        lines = text.splitlines()
        assert lines[0] == "# metric=weighted_jaccard weights=frequency"
        assert lines[1].split(",")[0] == "edge" and len(lines) == 16
        assert "0.292373" in text


class TestOracleAgreement:
    @pytest.mark.parametrize("seed", range(30))
    @pytest.mark.parametrize("weights", ["random", "frequency", "indicator"])
    def test_scalar_metrics(self, seed, weights):
        A, paths, w = instance(seed, weights)
        pe = oracles.edge_paths(paths)
        for e, f in itertools.product(A.edges, repeat=2):
            for kind, oracle in oracles.ORACLES.items():
                assert distance(A, e, f, kind) == oracle(pe[e], pe[f], w), (kind, e, f)
            assert similarity(A, e, f) == oracles.similarity(pe[e], pe[f], w)

    @pytest.mark.parametrize("seed", range(30))
    @pytest.mark.parametrize("kind", list(MetricKind))
    def test_pairwise(self, seed, kind):
        A, paths, w = instance(seed, "random" if seed % 2 else "frequency")
        pe = oracles.edge_paths(paths)
        m = pairwise_matrix(A, kind)
        oracle = oracles.ORACLES[kind.value]
        for (i, e), (j, f) in itertools.product(enumerate(A.edges), repeat=2):
            assert m.values[i, j] == oracle(pe[e], pe[f], w)

    def test_float_fallback_path_agrees(self):
        # weights spanning many binades force the pure-Python exact path
        ps = pathset([(("a", "b", "c"), 1), (("a", "b"), 1), (("b", "c"), 1)])
        w = dict(zip(ps.paths, [1e-30, 3.0, 1e30]))
        A = build_routing_matrix(ps, WeightScheme.supplied(w))
        pe = oracles.edge_paths([p.nodes for p in ps.paths])
        ws = [w[p] for p in ps.paths]
        m = pairwise_matrix(A, "d2")
        for (i, e), (j, f) in itertools.product(enumerate(A.edges), repeat=2):
            assert m.values[i, j] == oracles.weighted_jaccard(pe[e], pe[f], ws)


@st.composite
def weighted_instances(draw):
    seed = draw(st.integers(0, 10**6))
    rng = random.Random(seed)
    nodes = oracles.random_instance(rng)
    ps = pathset([(p, 1) for p in nodes])
    w = draw(st.lists(st.floats(0.001, 1e3), min_size=len(ps), max_size=len(ps)))
    return build_routing_matrix(ps, WeightScheme.supplied(dict(zip(ps.paths, w))))


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(weighted_instances())
    def test_symmetry_identity_range(self, A):
        for kind in MetricKind:
            v = pairwise_matrix(A, kind).values
            assert np.array_equal(v, v.T)
            assert (np.diag(v) == 0).all()
            assert (v >= 0).all()
            if kind.bounded:
                assert (v <= 1).all()
            if kind is MetricKind.NORMALIZED:
                assert (v <= 2).all()
        for e in A.edges:
            assert similarity(A, e, e) == 1.0

    @settings(max_examples=60, deadline=None)
    @given(weighted_instances(), st.floats(0.001, 1e6))
    def test_equal_weights_reduce_to_jaccard(self, A, c):
        ps = pathset([(p.nodes, 1) for p in A.paths])
        B = build_routing_matrix(ps, WeightScheme.supplied({p: c for p in ps.paths}))
        assert np.array_equal(pairwise_matrix(B, "d2").values, pairwise_matrix(B, "d3").values)

    @settings(max_examples=60, deadline=None)
    @given(weighted_instances())
    def test_similarity_one_iff_same_support(self, A):
        for e, f in itertools.combinations(A.edges, 2):
            assert (similarity(A, e, f) == 1.0) == (A.support(e) == A.support(f))

    @settings(max_examples=40, deadline=None)
    @given(weighted_instances(), st.randoms(use_true_random=False))
    def test_relabeling_permutes_matrix(self, A, rnd):
        # rename nodes so the lexicographic edge order changes
        names = sorted({x for e in A.edges for x in e})
        shuffled = names[:]
        rnd.shuffle(shuffled)
        rename = dict(zip(names, shuffled))
        weights = {p.nodes: w for p, w in zip(A.paths, A.weights)}
        ps = pathset([(tuple(rename[x] for x in nodes), 1) for nodes in weights])
        B = build_routing_matrix(
            ps,
            WeightScheme.supplied({p: weights[tuple(names[shuffled.index(x)] for x in p.nodes)] for p in ps.paths}),
        )
        for kind in MetricKind:
            ma, mb = pairwise_matrix(A, kind), pairwise_matrix(B, kind)
            for e, f in itertools.product(A.edges, repeat=2):
                e2, f2 = (rename[e[0]], rename[e[1]]), (rename[f[0]], rename[f[1]])
                assert ma.get(e, f) == mb.get(e2, f2)
