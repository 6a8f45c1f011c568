from __future__ import annotations

import itertools
import random

import numpy as np
import pytest

from scratch_creativity import (
    NULL,
    Concept,
    Metric,
    Product,
    SemanticNetwork,
    check_metric_axioms,
    cosine_distance,
    cosine_metric,
    discrete_metric,
    euclidean_distance,
    euclidean_metric,
    matrix_distance,
    matrix_metric,
    network_distance,
    symbol_concept,
    vector_concept,
)
from scratch_creativity.errors import DimensionMismatch, NetworkError


class TestConcept:
    def test_null_carries_no_payload(self):
        with pytest.raises(ValueError):
            Concept(id="bad", payload="x", is_null=True)

    def test_payload_required(self):
        with pytest.raises(ValueError):
            Concept(id="bad")

    def test_non_finite_payload_rejected(self):
        with pytest.raises(ValueError):
            vector_concept([1.0, np.nan])
        with pytest.raises(ValueError):
            vector_concept([np.inf, 0.0])

    def test_key_distinguishes_payloads(self):
        assert symbol_concept("a").key() == symbol_concept("a", id="other").key()
        assert symbol_concept("a").key() != symbol_concept("b").key()
        assert vector_concept([1, 2]).key() == vector_concept([1, 2]).key()
        assert vector_concept([1, 2]).key() != vector_concept([2, 1]).key()

    def test_dedup_key_overrides_payload(self):
        a = Concept(id="a", payload=np.array([1.0]), dedup_key="d1")
        b = Concept(id="b", payload=np.array([2.0]), dedup_key="d1")
        assert a.payload_equal(b)


class TestProduct:
    def test_edge_indices_validated(self):
        with pytest.raises(ValueError):
            Product.of(symbol_concept("a"), edges=[(0, 1)])

    def test_edges_never_touch_null(self):
        with pytest.raises(ValueError):
            Product.of(symbol_concept("a"), NULL, edges=[(0, 1)])

    def test_edges_allowed_between_concepts(self):
        p = Product.of(symbol_concept("a"), symbol_concept("b"), edges=[(0, 1)])
        assert len(p) == 2


class TestSemanticNetwork:
    def test_shapes_distances(self, shapes_network):
        # triangle and square are adjacent; the circle hangs off null.
        assert network_distance(shapes_network, "triangle", "square") == 1
        assert network_distance(shapes_network, "triangle", "circle") == 2
        assert network_distance(shapes_network, "square", "circle") == 2
        for node in ("triangle", "square", "circle"):
            assert network_distance(shapes_network, node, "0") == 1
            assert network_distance(shapes_network, node, node) == 0

    def test_symmetry(self, shapes_network):
        for a, b in itertools.combinations(shapes_network.nodes, 2):
            assert shapes_network.distance(a, b) == shapes_network.distance(b, a)

    def test_unknown_id_named_in_error(self, shapes_network):
        with pytest.raises(NetworkError, match="pentagon"):
            shapes_network.distance("pentagon", "square")

    def test_disconnected_rejected(self):
        with pytest.raises(NetworkError, match="island"):
            SemanticNetwork([("a", "b", 1.0), ("island", "far", 1.0)], null_id="a")

    def test_nonpositive_length_rejected(self):
        with pytest.raises(NetworkError):
            SemanticNetwork([("a", "b", 0.0)], null_id="a")
        with pytest.raises(NetworkError):
            SemanticNetwork([("a", "b", -2.0)], null_id="a")

    def test_file_round_trip(self, tmp_path, shapes_network):
        path = tmp_path / "net.txt"
        lines = [f"{a} {b} {w}" for a, b, w in shapes_network.edges]
        lines.append(f"null {shapes_network.null_id}")
        path.write_text("\n".join(lines), encoding="utf-8")
        loaded = SemanticNetwork.from_file(path)
        assert loaded.nodes == shapes_network.nodes
        for a, b in itertools.combinations(loaded.nodes, 2):
            assert loaded.distance(a, b) == shapes_network.distance(a, b)

    def test_file_without_null_line(self, tmp_path):
        path = tmp_path / "net.txt"
        path.write_text("a b 1\n", encoding="utf-8")
        with pytest.raises(NetworkError, match="null"):
            SemanticNetwork.from_file(path)

    def test_file_malformed_line(self, tmp_path):
        path = tmp_path / "net.txt"
        path.write_text("a b\nnull a\n", encoding="utf-8")
        with pytest.raises(NetworkError):
            SemanticNetwork.from_file(path)

    def test_triangle_inequality_exhaustive(self):
        rng = random.Random(5)
        nodes = [f"n{i}" for i in range(30)]
        edges = [("0", nodes[0], 1.0)]
        for i, node in enumerate(nodes[1:], start=1):
            edges.append((nodes[rng.randrange(i)], node, rng.uniform(0.25, 3.0)))
        for _ in range(20):
            a, b = rng.sample(nodes, 2)
            if not any({a, b} == {x, y} for x, y, _ in edges):
                edges.append((a, b, rng.uniform(0.25, 3.0)))
        net = SemanticNetwork(edges, null_id="0")
        for x, y, z in itertools.permutations(net.nodes, 3):
            assert net.distance(x, z) <= net.distance(x, y) + net.distance(y, z) + 1e-9


class TestEuclidean:
    def test_pythagorean(self):
        assert euclidean_distance([0, 0], [3, 4]) == 5.0

    def test_identity(self):
        u = [1.5, -2.0, 7.0]
        assert euclidean_distance(u, u) == 0.0

    def test_norm(self):
        assert euclidean_distance([1, 2, 2], [0, 0, 0]) == 3.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            euclidean_distance([1, 2], [1, 2, 3])


class TestCosine:
    def test_orthogonal_unit_vectors(self):
        assert cosine_distance([1, 0], [0, 1]) == 1.0

    def test_identity(self):
        assert cosine_distance([2.0, 3.0], [2.0, 3.0]) == 0.0

    def test_zero_vector_convention(self):
        assert cosine_distance([5, 1], [0, 0]) == 1.0
        assert cosine_distance([0, 0], [5, 1]) == 1.0
        assert cosine_distance([0, 0], [0, 0]) == 0.0

    def test_opposite_vectors(self):
        assert cosine_distance([1, 0], [-1, 0]) == 2.0

    def test_clamped_range(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            u = rng.normal(size=4)
            v = rng.normal(size=4)
            assert 0.0 <= cosine_distance(u, v) <= 2.0

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            u = rng.normal(size=5)
            v = rng.normal(size=5)
            c = float(rng.uniform(0.1, 40.0))
            assert cosine_distance(c * u, v) == pytest.approx(
                cosine_distance(u, v), abs=1e-12
            )

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine_distance([1], [1, 2])


class TestMatrixDistance:
    def test_identity(self):
        a = [[1.0, 2.0], [3.0, 4.0]]
        assert matrix_distance(a, a) == 0.0

    def test_distance_to_zero_is_frobenius(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert matrix_distance(a, np.zeros_like(a)) == pytest.approx(
            float(np.linalg.norm(a))
        )

    def test_padding_example(self):
        # pad [[3,4]] with a zero row, difference is [[0,0],[0,5]].
        assert matrix_distance([[3.0, 4.0]], [[3.0, 4.0], [0.0, 5.0]]) == 5.0

    def test_feature_mismatch(self):
        with pytest.raises(DimensionMismatch):
            matrix_distance([[1.0, 2.0]], [[1.0, 2.0, 3.0]])

    def test_equals_flattened_euclidean(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            t1, t2, f = rng.integers(1, 6), rng.integers(1, 6), rng.integers(1, 5)
            a = rng.normal(size=(t1, f))
            b = rng.normal(size=(t2, f))
            rows = max(t1, t2)
            pa = np.vstack([a, np.zeros((rows - t1, f))]).ravel()
            pb = np.vstack([b, np.zeros((rows - t2, f))]).ravel()
            assert matrix_distance(a, b) == pytest.approx(
                euclidean_distance(pa, pb), abs=1e-12
            )

    def test_symmetric(self):
        a = [[1.0, 0.0]]
        b = [[0.0, 2.0], [3.0, 0.0]]
        assert matrix_distance(a, b) == matrix_distance(b, a)


SHAPES_TABLE = {
    ("triangle", "triangle"): 0, ("triangle", "square"): 1,
    ("triangle", "circle"): 2, ("triangle", "0"): 1,
    ("square", "square"): 0, ("square", "circle"): 2, ("square", "0"): 1,
    ("circle", "circle"): 0, ("circle", "0"): 1, ("0", "0"): 0,
}


def _table_metric(pseudo=False) -> Metric:
    def fn(x, y):
        a = "0" if x.is_null else x.payload
        b = "0" if y.is_null else y.payload
        return float(SHAPES_TABLE.get((a, b), SHAPES_TABLE.get((b, a))))

    return Metric("table", fn, pseudo=pseudo)


class TestMetricAxioms:
    def test_shapes_table_clean(self):
        sample = [symbol_concept(s) for s in ("triangle", "square", "circle")] + [NULL]
        report = check_metric_axioms(_table_metric(), sample)
        assert report.ok
        assert report.checked_pairs == 10

    def test_negative_distance_reported(self):
        def fn(x, y):
            if {x.id, y.id} == {"a", "b"}:
                return -1.0
            return 0.0 if x.id == y.id else 1.0

        sample = [symbol_concept("a"), symbol_concept("b")]
        report = check_metric_axioms(Metric("broken", fn), sample)
        kinds = {v.axiom for v in report.violations}
        assert "non-negativity" in kinds

    def test_parallel_vectors_flagged_only_without_pseudo(self):
        sample = [
            vector_concept([1.0, 0.0], id="u"),
            vector_concept([2.0, 0.0], id="2u"),
        ]
        pseudo_report = check_metric_axioms(cosine_metric(), sample)
        assert pseudo_report.ok
        strict = Metric("cosine-strict", cosine_metric().fn, pseudo=False)
        strict_report = check_metric_axioms(strict, sample)
        assert any(v.axiom == "identity" for v in strict_report.violations)

    def test_network_metric_null_handling(self, shapes_metric):
        tri = symbol_concept("triangle")
        assert shapes_metric.null_distance(tri) == 1.0
        assert shapes_metric(NULL, NULL) == 0.0

    def test_euclidean_metric_null_is_origin(self):
        m = euclidean_metric()
        assert m.null_distance(vector_concept([3.0, 4.0])) == 5.0

    def test_matrix_metric_null_is_zero_matrix(self):
        m = matrix_metric()
        c = Concept(id="m", payload=np.array([[3.0, 4.0]]))
        assert m.null_distance(c) == 5.0

    def test_discrete_metric(self):
        m = discrete_metric()
        a, b = symbol_concept("a"), symbol_concept("b")
        assert m(a, a) == 0.0
        assert m(a, b) == 1.0
        assert m.null_distance(a) == 1.0
