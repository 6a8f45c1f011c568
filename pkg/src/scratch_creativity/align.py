"""Optimal alignment machinery between products.

Covers minimum-cost assignment, the alignment distance between two
products (nulls allowed on either side), and the order-preserving edit
distances for trees and sequences.  All of these minimize the same kind
of objective: a sum of concept distances over matched pairs, with
unmatched concepts paying their distance to the null concept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .concepts import Concept, Metric, Product

__all__ = [
    "hungarian",
    "Alignment",
    "alignment_distance",
    "LabeledTree",
    "tree_edit_distance",
    "sequence_edit_distance",
]


def hungarian(cost) -> tuple[list[tuple[int, int]], float]:
    """Minimum-cost perfect matching on the zero-padded square of ``cost``.

    Rectangular matrices are padded with zero rows/columns up to the
    larger dimension.  Returns the assignment as (row, col) pairs over
    the padded matrix, sorted by row, plus the total cost.
    """
    c = np.asarray(cost, dtype=float)
    if c.size == 0:
        return [], 0.0
    if c.ndim != 2:
        raise ValueError("cost must be a 2-D matrix")
    if np.isnan(c).any():
        raise ValueError("cost matrix contains NaN entries")
    if (c < 0).any():
        raise ValueError("cost matrix contains negative entries")
    if np.isinf(c).any():
        raise ValueError("cost matrix entries must be finite")

    n = max(c.shape)
    sq = np.zeros((n, n))
    sq[: c.shape[0], : c.shape[1]] = c

    # Shortest-augmenting-path formulation with dual potentials,
    # 1-indexed with column 0 as the virtual start.
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    assigned_row = [0] * (n + 1)  # assigned_row[j] = row matched to column j
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        assigned_row[0] = i
        j0 = 0
        minv = [math.inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = assigned_row[j0]
            delta = math.inf
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = sq[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[assigned_row[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if assigned_row[j0] == 0:
                break
        while True:
            j1 = way[j0]
            assigned_row[j0] = assigned_row[j1]
            j0 = j1
            if j0 == 0:
                break

    col_of = {assigned_row[j] - 1: j - 1 for j in range(1, n + 1)}
    assignment = [(i, col_of[i]) for i in range(n)]
    total = float(sum(sq[i, j] for i, j in assignment))
    return assignment, total


@dataclass(frozen=True)
class Alignment:
    """A matching between two products' concept indices; ``None`` stands
    for the null concept on either side."""

    pairs: tuple[tuple[int | None, int | None], ...]
    cost: float

    def __post_init__(self):
        lefts = [l for l, _ in self.pairs if l is not None]
        rights = [r for _, r in self.pairs if r is not None]
        if len(lefts) != len(set(lefts)) or len(rights) != len(set(rights)):
            raise ValueError("alignment repeats a concept index")
        if any(l is None and r is None for l, r in self.pairs):
            raise ValueError("alignment contains a null-to-null pair")


def alignment_distance(
    s: Product, t: Product, metric: Metric
) -> tuple[float, Alignment]:
    """Cost of the cheapest alignment between two products.

    Solved exactly as an assignment problem on an (n+m) x (n+m) matrix
    where the padding rows/columns price alignment to the null concept
    and null-to-null pairs cost nothing.
    """
    xs, ys = s.concepts, t.concepts
    n, m = len(xs), len(ys)
    if n == 0 and m == 0:
        return 0.0, Alignment((), 0.0)
    cost = np.zeros((n + m, n + m))
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            cost[i, j] = metric(x, y)
        cost[i, m:] = metric.null_distance(x)
    for j, y in enumerate(ys):
        cost[n:, j] = metric.null_distance(y)
    assignment, total = hungarian(cost)
    pairs = []
    for i, j in assignment:
        left = i if i < n else None
        right = j if j < m else None
        if left is None and right is None:
            continue
        pairs.append((left, right))
    return total, Alignment(tuple(pairs), total)


@dataclass(frozen=True)
class LabeledTree:
    """Ordered tree whose nodes are labeled with concepts."""

    label: Concept
    children: tuple["LabeledTree", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def postorder(self) -> list["LabeledTree"]:
        out: list[LabeledTree] = []
        stack: list[tuple[LabeledTree, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                out.append(node)
                continue
            stack.append((node, True))
            for child in reversed(node.children):
                stack.append((child, False))
        return out

    @property
    def size(self) -> int:
        return len(self.postorder())


class _AnnotatedTree:
    """Postorder enumeration plus leftmost-descendant indices and
    keyroots, the bookkeeping needed by the tree edit recurrence."""

    def __init__(self, root: LabeledTree, metric: Metric):
        self.nodes = root.postorder()
        index = {id(node): i for i, node in enumerate(self.nodes)}
        self.lmd: list[int] = []
        for i, node in enumerate(self.nodes):
            if node.children:
                self.lmd.append(self.lmd[index[id(node.children[0])]])
            else:
                self.lmd.append(i)
        last_with_lmd: dict[int, int] = {}
        for i, l in enumerate(self.lmd):
            last_with_lmd[l] = i
        self.keyroots = sorted(last_with_lmd.values())
        self.null_cost = [metric.null_distance(node.label) for node in self.nodes]


def tree_edit_distance(
    a: LabeledTree | None, b: LabeledTree | None, metric: Metric
) -> float:
    """Minimum cost to turn one ordered tree into the other.

    Relabeling costs the concept distance, deletions and insertions cost
    the distance to the null concept; ancestor and sibling order are
    preserved.  ``None`` stands for the empty tree.
    """
    if a is None and b is None:
        return 0.0
    if a is None:
        return float(sum(metric.null_distance(n.label) for n in b.postorder()))
    if b is None:
        return float(sum(metric.null_distance(n.label) for n in a.postorder()))

    ta = _AnnotatedTree(a, metric)
    tb = _AnnotatedTree(b, metric)
    treedist = np.zeros((len(ta.nodes), len(tb.nodes)))
    relabel_cache: dict[tuple[int, int], float] = {}

    def relabel(x: int, y: int) -> float:
        key = (x, y)
        if key not in relabel_cache:
            relabel_cache[key] = metric(ta.nodes[x].label, tb.nodes[y].label)
        return relabel_cache[key]

    def forest_dist(i: int, j: int) -> None:
        al, bl = ta.lmd, tb.lmd
        m = i - al[i] + 2
        n = j - bl[j] + 2
        fd = np.zeros((m, n))
        ioff = al[i] - 1
        joff = bl[j] - 1
        for x in range(1, m):
            fd[x, 0] = fd[x - 1, 0] + ta.null_cost[x + ioff]
        for y in range(1, n):
            fd[0, y] = fd[0, y - 1] + tb.null_cost[y + joff]
        for x in range(1, m):
            for y in range(1, n):
                if al[i] == al[x + ioff] and bl[j] == bl[y + joff]:
                    fd[x, y] = min(
                        fd[x - 1, y] + ta.null_cost[x + ioff],
                        fd[x, y - 1] + tb.null_cost[y + joff],
                        fd[x - 1, y - 1] + relabel(x + ioff, y + joff),
                    )
                    treedist[x + ioff, y + joff] = fd[x, y]
                else:
                    p = al[x + ioff] - 1 - ioff
                    q = bl[y + joff] - 1 - joff
                    fd[x, y] = min(
                        fd[x - 1, y] + ta.null_cost[x + ioff],
                        fd[x, y - 1] + tb.null_cost[y + joff],
                        fd[p, q] + treedist[x + ioff, y + joff],
                    )

    for i in ta.keyroots:
        for j in tb.keyroots:
            forest_dist(i, j)
    return float(treedist[-1, -1])


def sequence_edit_distance(
    a: list[Concept] | tuple[Concept, ...],
    b: list[Concept] | tuple[Concept, ...],
    metric: Metric,
) -> float:
    """Order-preserving minimal alignment cost between two sequences.

    Substitution costs the concept distance, gaps cost the distance to
    the null concept; reduces to Levenshtein under the discrete metric.
    """
    n, m = len(a), len(b)
    prev = np.zeros(m + 1)
    for j in range(1, m + 1):
        prev[j] = prev[j - 1] + metric.null_distance(b[j - 1])
    for i in range(1, n + 1):
        cur = np.zeros(m + 1)
        del_i = metric.null_distance(a[i - 1])
        cur[0] = prev[0] + del_i
        for j in range(1, m + 1):
            cur[j] = min(
                prev[j] + del_i,
                cur[j - 1] + metric.null_distance(b[j - 1]),
                prev[j - 1] + metric(a[i - 1], b[j - 1]),
            )
        prev = cur
    return float(prev[m])
