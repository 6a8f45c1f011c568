from __future__ import annotations

import random

import numpy as np
import pytest

from oracles import (
    alignment_brute_force,
    assignment_brute_force,
    levenshtein_units,
    tree_mapping_brute_force,
)
from scratch_creativity import (
    Alignment,
    LabeledTree,
    Metric,
    Product,
    alignment_distance,
    discrete_metric,
    hungarian,
    sequence_edit_distance,
    symbol_concept,
    tree_edit_distance,
)


class TestHungarian:
    def test_two_by_two(self):
        assignment, total = hungarian([[1.0, 2.0], [3.0, 1.0]])
        assert total == 2.0
        assert set(assignment) == {(0, 0), (1, 1)}

    def test_zero_matrix(self):
        _, total = hungarian(np.zeros((4, 4)))
        assert total == 0.0

    def test_three_by_three(self):
        # all six permutations cost 4+0+2, 4+5+2, 1+2+2, ... minimum is 5
        assignment, total = hungarian([[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]])
        assert total == 5.0

    def test_rectangular_padded(self):
        assignment, total = hungarian([[2.0, 7.0, 1.0]])
        assert total == 1.0
        assert len(assignment) == 3
        assert {i for i, _ in assignment} == {0, 1, 2}
        assert {j for _, j in assignment} == {0, 1, 2}

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            hungarian([[np.nan, 1.0], [1.0, 0.0]])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            hungarian([[-0.5, 1.0], [1.0, 0.0]])

    def test_matches_brute_force(self):
        rng = random.Random(11)
        for _ in range(60):
            n = rng.randint(1, 6)
            m = rng.randint(1, 6)
            cost = [[float(rng.randint(0, 20)) for _ in range(m)] for _ in range(n)]
            _, total = hungarian(cost)
            assert total == assignment_brute_force(cost)

    def test_invariant_under_permutation(self):
        rng = random.Random(13)
        for _ in range(25):
            n = rng.randint(2, 6)
            cost = np.array([[float(rng.randint(0, 9)) for _ in range(n)] for _ in range(n)])
            _, total = hungarian(cost)
            rows = rng.sample(range(n), n)
            cols = rng.sample(range(n), n)
            _, permuted = hungarian(cost[np.ix_(rows, cols)])
            assert permuted == total


def _products(*label_lists):
    return [Product(tuple(symbol_concept(l) for l in labels)) for labels in label_lists]


class TestAlignmentDistance:
    def test_figure_vs_house(self, figure_product, house_product, shapes_metric):
        # one square and one triangle align for free; three triangles and
        # the circle fall back to null at unit cost each.
        dist, best = alignment_distance(figure_product, house_product, shapes_metric)
        assert dist == 4.0
        assert best.cost == 4.0
        matched = [(l, r) for l, r in best.pairs if l is not None and r is not None]
        assert len(matched) == 2

    def test_self_distance_zero(self, figure_product, shapes_metric):
        dist, _ = alignment_distance(figure_product, figure_product, shapes_metric)
        assert dist == 0.0

    def test_vs_empty_product(self, figure_product, shapes_metric):
        dist, best = alignment_distance(figure_product, Product(), shapes_metric)
        assert dist == 6.0
        assert all(r is None for _, r in best.pairs)

    def test_symmetric(self, figure_product, house_product, shapes_metric):
        d1, _ = alignment_distance(figure_product, house_product, shapes_metric)
        d2, _ = alignment_distance(house_product, figure_product, shapes_metric)
        assert d1 == d2

    def test_alignment_pairs_cover_everything_once(
        self, figure_product, house_product, shapes_metric
    ):
        _, best = alignment_distance(figure_product, house_product, shapes_metric)
        lefts = sorted(l for l, _ in best.pairs if l is not None)
        rights = sorted(r for _, r in best.pairs if r is not None)
        assert lefts == list(range(len(figure_product)))
        assert rights == list(range(len(house_product)))

    def test_matches_brute_force_discrete(self):
        rng = random.Random(17)
        metric = discrete_metric()
        alphabet = "abcd"
        for _ in range(40):
            left = [symbol_concept(rng.choice(alphabet)) for _ in range(rng.randint(0, 5))]
            right = [symbol_concept(rng.choice(alphabet)) for _ in range(rng.randint(0, 5))]
            dist, _ = alignment_distance(Product(tuple(left)), Product(tuple(right)), metric)
            assert dist == alignment_brute_force(left, right, metric)

    def test_multiset_identities(self):
        # when relabeling costs twice the null distance, the optimum keeps
        # the largest common multiset and pays one per leftover concept:
        # n + m - 2*common.  Under unit relabel costs mismatched pairs
        # match for 1 instead, giving max(n, m) - common.
        def two_step(x, y):
            if x.key() == y.key():
                return 0.0
            if x.is_null or y.is_null:
                return 1.0
            return 2.0

        expensive = Metric("two-step", two_step)
        unit = discrete_metric()
        rng = random.Random(19)
        for _ in range(40):
            a = [rng.choice("abc") for _ in range(rng.randint(0, 6))]
            b = [rng.choice("abc") for _ in range(rng.randint(0, 6))]
            (s,), (t,) = _products(a), _products(b)
            common = 0
            pool = list(b)
            for label in a:
                if label in pool:
                    pool.remove(label)
                    common += 1
            dist_expensive, _ = alignment_distance(s, t, expensive)
            assert dist_expensive == len(a) + len(b) - 2 * common
            assert dist_expensive == alignment_brute_force(
                s.concepts, t.concepts, expensive
            )
            dist_unit, _ = alignment_distance(s, t, unit)
            assert dist_unit == max(len(a), len(b)) - common

    def test_never_beaten_by_explicit_alignment(self, shapes_metric):
        rng = random.Random(23)
        labels = ["triangle", "square", "circle"]
        for _ in range(25):
            a = [symbol_concept(rng.choice(labels)) for _ in range(rng.randint(1, 5))]
            b = [symbol_concept(rng.choice(labels)) for _ in range(rng.randint(1, 5))]
            dist, _ = alignment_distance(Product(tuple(a)), Product(tuple(b)), shapes_metric)
            # sample random explicit alignments and check none is cheaper
            for _ in range(10):
                k = rng.randint(0, min(len(a), len(b)))
                left_idx = rng.sample(range(len(a)), k)
                right_idx = rng.sample(range(len(b)), k)
                cost = sum(
                    shapes_metric(a[i], b[j]) for i, j in zip(left_idx, right_idx)
                )
                cost += sum(
                    shapes_metric.null_distance(a[i])
                    for i in range(len(a))
                    if i not in left_idx
                )
                cost += sum(
                    shapes_metric.null_distance(b[j])
                    for j in range(len(b))
                    if j not in right_idx
                )
                assert dist <= cost + 1e-9

    def test_alignment_validation(self):
        with pytest.raises(ValueError):
            Alignment(((0, 1), (0, 2)), cost=0.0)
        with pytest.raises(ValueError):
            Alignment(((None, None),), cost=0.0)


def _tree(label, *children):
    return LabeledTree(symbol_concept(label), tuple(children))


class TestTreeEditDistance:
    def test_single_nodes(self):
        metric = discrete_metric()
        assert tree_edit_distance(_tree("x"), _tree("y"), metric) == 1.0
        assert tree_edit_distance(_tree("x"), _tree("x"), metric) == 0.0

    def test_single_nodes_general_rule(self, shapes_metric):
        # relabel or delete+insert, whichever is cheaper
        a = _tree("triangle")
        b = _tree("circle")
        d = tree_edit_distance(a, b, shapes_metric)
        relabel = shapes_metric(a.label, b.label)
        via_null = shapes_metric.null_distance(a.label) + shapes_metric.null_distance(
            b.label
        )
        assert d == min(relabel, via_null)

    def test_vs_empty_tree(self, shapes_metric):
        tree = _tree("triangle", _tree("square"), _tree("circle", _tree("triangle")))
        expected = sum(
            shapes_metric.null_distance(n.label) for n in tree.postorder()
        )
        assert tree_edit_distance(tree, None, shapes_metric) == expected
        assert tree_edit_distance(None, tree, shapes_metric) == expected
        assert tree_edit_distance(None, None, shapes_metric) == 0.0

    def test_one_relabel(self):
        metric = discrete_metric()
        a = _tree("r", _tree("x"), _tree("y"))
        b = _tree("r", _tree("x"), _tree("z"))
        assert tree_edit_distance(a, b, metric) == 1.0

    def test_sibling_order_matters(self):
        metric = discrete_metric()
        a = _tree("r", _tree("x"), _tree("y"))
        b = _tree("r", _tree("y"), _tree("x"))
        # swapping ordered siblings needs two operations
        assert tree_edit_distance(a, b, metric) == 2.0

    def test_matches_exhaustive_mapping_search(self):
        metric = discrete_metric()
        rng = random.Random(29)
        alphabet = "abc"

        def gen(size):
            if size == 1:
                return _tree(rng.choice(alphabet))
            children = []
            remaining = size - 1
            while remaining > 0:
                piece = rng.randint(1, remaining)
                children.append(gen(piece))
                remaining -= piece
            return LabeledTree(symbol_concept(rng.choice(alphabet)), tuple(children))

        for _ in range(60):
            a = gen(rng.randint(1, 5))
            b = gen(rng.randint(1, 5))
            assert tree_edit_distance(a, b, metric) == tree_mapping_brute_force(
                a, b, metric
            )

    def test_triangle_inequality_true_metric(self, shapes_metric):
        rng = random.Random(31)
        labels = ["triangle", "square", "circle"]

        def gen(size):
            if size == 1:
                return _tree(rng.choice(labels))
            children = []
            remaining = size - 1
            while remaining > 0:
                piece = rng.randint(1, remaining)
                children.append(gen(piece))
                remaining -= piece
            return LabeledTree(symbol_concept(rng.choice(labels)), tuple(children))

        for _ in range(30):
            a, b, c = (gen(rng.randint(1, 4)) for _ in range(3))
            dab = tree_edit_distance(a, b, shapes_metric)
            dbc = tree_edit_distance(b, c, shapes_metric)
            dac = tree_edit_distance(a, c, shapes_metric)
            assert dac <= dab + dbc + 1e-9


def _symbols(text):
    return [symbol_concept(ch) for ch in text]


class TestSequenceEditDistance:
    def test_kitten_sitting(self):
        metric = discrete_metric()
        assert sequence_edit_distance(_symbols("kitten"), _symbols("sitting"), metric) == 3.0

    def test_identity(self):
        metric = discrete_metric()
        seq = _symbols("abcabc")
        assert sequence_edit_distance(seq, seq, metric) == 0.0

    def test_vs_empty(self, shapes_metric):
        seq = _symbols_shapes(["triangle", "square", "circle"])
        expected = sum(shapes_metric.null_distance(c) for c in seq)
        assert sequence_edit_distance(seq, [], shapes_metric) == expected
        assert sequence_edit_distance([], seq, shapes_metric) == expected

    def test_reproduces_unit_levenshtein(self):
        metric = discrete_metric()
        rng = random.Random(37)
        for _ in range(200):
            a = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 10)))
            b = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 10)))
            got = sequence_edit_distance(_symbols(a), _symbols(b), metric)
            assert got == levenshtein_units(a, b)


def _symbols_shapes(labels):
    return [symbol_concept(l) for l in labels]
