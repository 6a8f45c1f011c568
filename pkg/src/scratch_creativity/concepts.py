"""Concept spaces, creative products, and distances between concepts.

A creative product is modeled as a graph over a concept space, and every
measure downstream is driven by a distance function between concepts.
The distance of a concept to the null concept encodes how much knowledge
or effort that single concept embodies on its own.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NetworkError

__all__ = [
    "Concept",
    "NULL",
    "symbol_concept",
    "vector_concept",
    "matrix_concept",
    "Product",
    "SemanticNetwork",
    "network_distance",
    "euclidean_distance",
    "cosine_distance",
    "matrix_distance",
    "Metric",
    "network_metric",
    "euclidean_metric",
    "cosine_metric",
    "matrix_metric",
    "discrete_metric",
    "squared",
    "AxiomViolation",
    "AxiomReport",
    "check_metric_axioms",
]


def _require_finite(arr: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} must contain only finite values")
    return arr


@dataclass(frozen=True)
class Concept:
    """One building block of a creative product.

    ``payload`` is a symbolic label (str or tuple), a 1-D feature vector,
    or a 2-D feature matrix whose rows are time steps.  The null concept
    carries no payload and acts as the neutral reference point.
    ``dedup_key`` overrides payload identity when grouping duplicates
    (media assets deduplicate by content digest, not by feature values).
    """

    id: str
    payload: object = None
    is_null: bool = False
    dedup_key: object = None

    def __post_init__(self):
        p = self.payload
        if self.is_null:
            if p is not None:
                raise ValueError("the null concept carries no payload")
            return
        if p is None:
            raise ValueError(f"concept {self.id!r} needs a payload")
        if isinstance(p, np.ndarray):
            if p.ndim not in (1, 2):
                raise ValueError(
                    f"concept {self.id!r}: payload must be a 1-D vector or 2-D matrix"
                )
            _require_finite(p, f"concept {self.id!r} payload")
            p.setflags(write=False)

    def key(self):
        """Hashable identity used for duplicate detection."""
        if self.dedup_key is not None:
            return ("dedup", self.dedup_key)
        if self.is_null:
            return ("null",)
        p = self.payload
        if isinstance(p, np.ndarray):
            return ("array", p.shape, p.tobytes())
        return ("sym", p)

    def payload_equal(self, other: "Concept") -> bool:
        return self.key() == other.key()


NULL = Concept(id="0", is_null=True)


def symbol_concept(label, id: str | None = None) -> Concept:
    return Concept(id=str(label) if id is None else id, payload=label)


def vector_concept(values, id: str = "vec") -> Concept:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError("vector concept needs a 1-D payload")
    return Concept(id=id, payload=arr)


def matrix_concept(values, id: str = "mat") -> Concept:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError("matrix concept needs a 2-D payload")
    return Concept(id=id, payload=arr)


@dataclass(frozen=True)
class Product:
    """A creative artifact: an ordered multiset of concepts plus edges.

    Edges are ordered pairs of indices into ``concepts``.  The measures
    only consume the concept list; edges are retained because structured
    product distances (trees, sequences) are defined over them.
    """

    concepts: tuple[Concept, ...] = ()
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "concepts", tuple(self.concepts))
        object.__setattr__(self, "edges", frozenset(self.edges))
        n = len(self.concepts)
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) does not index into concepts")
            if self.concepts[a].is_null or self.concepts[b].is_null:
                raise ValueError("no edge may touch the null concept")

    @classmethod
    def of(cls, *concepts: Concept, edges: Iterable[tuple[int, int]] = ()) -> "Product":
        return cls(tuple(concepts), frozenset(edges))

    def __len__(self) -> int:
        return len(self.concepts)


EMPTY_PRODUCT = Product()


class SemanticNetwork:
    """Undirected weighted graph of concept ids; distance = shortest path.

    The network must be connected from the null node and all edge lengths
    must be strictly positive, so every pairwise distance exists and the
    triangle inequality holds by construction.
    """

    _CACHE_LIMIT = 4096

    def __init__(self, edges: Iterable[tuple[str, str, float]], null_id: str):
        adj: dict[str, dict[str, float]] = {null_id: {}}
        for a, b, length in edges:
            a, b = str(a), str(b)
            w = float(length)
            if a == b:
                raise NetworkError(f"self-loop on node {a!r}")
            if not (w > 0.0) or not np.isfinite(w):
                raise NetworkError(f"edge ({a!r}, {b!r}) needs a positive finite length")
            if b in adj.get(a, {}):
                raise NetworkError(f"duplicate edge ({a!r}, {b!r})")
            adj.setdefault(a, {})[b] = w
            adj.setdefault(b, {})[a] = w
        self.null_id = str(null_id)
        self._adj = adj
        self._nodes = tuple(sorted(adj))
        self._index = {node: i for i, node in enumerate(self._nodes)}
        n = len(self._nodes)
        self._matrix = np.full((n, n), np.nan) if n <= self._CACHE_LIMIT else None
        self._check_connected()

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def edges(self) -> tuple[tuple[str, str, float], ...]:
        out = []
        for a, nbrs in self._adj.items():
            for b, w in nbrs.items():
                if a < b:
                    out.append((a, b, w))
        return tuple(sorted(out))

    def _check_connected(self):
        seen = {self.null_id}
        frontier = [self.null_id]
        while frontier:
            nxt = []
            for node in frontier:
                for nbr in self._adj[node]:
                    if nbr not in seen:
                        seen.add(nbr)
                        nxt.append(nbr)
            frontier = nxt
        missing = set(self._nodes) - seen
        if missing:
            raise NetworkError(
                "network is not connected; unreachable from null: "
                + ", ".join(sorted(missing))
            )

    @classmethod
    def from_file(cls, path) -> "SemanticNetwork":
        """Load a network from text: `<idA> <idB> <length>` per edge plus
        one `null <id>` line.  UTF-8, dot decimal separator."""
        text = Path(path).read_text(encoding="utf-8")
        edges: list[tuple[str, str, float]] = []
        null_id: str | None = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "null":
                if len(parts) != 2:
                    raise NetworkError(f"{path}:{lineno}: malformed null line")
                if null_id is not None:
                    raise NetworkError(f"{path}:{lineno}: second null line")
                null_id = parts[1]
            elif len(parts) == 3:
                try:
                    length = float(parts[2])
                except ValueError:
                    raise NetworkError(
                        f"{path}:{lineno}: bad edge length {parts[2]!r}"
                    ) from None
                edges.append((parts[0], parts[1], length))
            else:
                raise NetworkError(f"{path}:{lineno}: malformed line {line!r}")
        if null_id is None:
            raise NetworkError(f"{path}: no `null <id>` line")
        return cls(edges, null_id)

    def _dijkstra_row(self, source: str) -> dict[str, float]:
        dist = {source: 0.0}
        heap = [(0.0, source)]
        while heap:
            d, node = heapq.heappop(heap)
            if d > dist.get(node, np.inf):
                continue
            for nbr, w in self._adj[node].items():
                nd = d + w
                if nd < dist.get(nbr, np.inf):
                    dist[nbr] = nd
                    heapq.heappush(heap, (nd, nbr))
        return dist

    def distance(self, a: str, b: str) -> float:
        for node in (a, b):
            if node not in self._index:
                raise NetworkError(f"unknown concept id {node!r}")
        if a == b:
            return 0.0
        ia, ib = self._index[a], self._index[b]
        if self._matrix is None:
            return self._dijkstra_row(a)[b]
        if np.isnan(self._matrix[ia, ib]):
            row = self._dijkstra_row(a)
            for node, d in row.items():
                j = self._index[node]
                self._matrix[ia, j] = d
                self._matrix[j, ia] = d
        return float(self._matrix[ia, ib])


def network_distance(net: SemanticNetwork, a: str, b: str) -> float:
    """Shortest-path length between two concept ids of a semantic network."""
    return net.distance(a, b)


def _as_vector(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{what} must be 1-D, got shape {arr.shape}")
    return arr


def euclidean_distance(u, v) -> float:
    """L2 norm of u - v; arguments must share the same dimension."""
    u = _as_vector(u, "left vector")
    v = _as_vector(v, "right vector")
    if u.shape != v.shape:
        raise DimensionMismatch(f"vector dimensions differ: {u.shape[0]} vs {v.shape[0]}")
    return float(np.linalg.norm(u - v))


def cosine_distance(u, v) -> float:
    """1 - cosine similarity, clamped to [0, 2].

    Conventions: the distance of any non-zero vector to the zero vector
    is 1, two zero vectors sit at distance 0, and similarity is clamped
    to [-1, 1] before subtraction to absorb floating-point drift.
    """
    u = _as_vector(u, "left vector")
    v = _as_vector(v, "right vector")
    if u.shape != v.shape:
        raise DimensionMismatch(f"vector dimensions differ: {u.shape[0]} vs {v.shape[0]}")
    if np.array_equal(u, v):
        return 0.0
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 and nv == 0.0:
        return 0.0
    if nu == 0.0 or nv == 0.0:
        return 1.0
    sim = float(np.dot(u, v)) / (nu * nv)
    sim = min(1.0, max(-1.0, sim))
    return min(2.0, max(0.0, 1.0 - sim))


def _as_matrix(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{what} must be 2-D, got shape {arr.shape}")
    return arr


def matrix_distance(a, b) -> float:
    """Distance between time-by-feature matrices with end padding.

    The shorter matrix is padded with zero rows at the end, then the
    result is the Euclidean (Frobenius) norm of the entrywise difference.
    """
    a = _as_matrix(a, "left matrix")
    b = _as_matrix(b, "right matrix")
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(
            f"feature dimensions differ: {a.shape[1]} vs {b.shape[1]}"
        )
    rows = max(a.shape[0], b.shape[0])
    if a.shape[0] < rows:
        a = np.vstack([a, np.zeros((rows - a.shape[0], a.shape[1]))])
    if b.shape[0] < rows:
        b = np.vstack([b, np.zeros((rows - b.shape[0], b.shape[1]))])
    return float(np.linalg.norm(a - b))


@dataclass(frozen=True)
class Metric:
    """Distance contract between concepts.

    Callables must be non-negative and symmetric with d(x, x) = 0.
    ``pseudo`` marks metrics where distinct concepts may legitimately
    sit at distance zero (cosine on parallel vectors).
    """

    name: str
    fn: Callable[[Concept, Concept], float]
    pseudo: bool = False

    def __call__(self, x: Concept, y: Concept) -> float:
        return self.fn(x, y)

    def null_distance(self, x: Concept) -> float:
        return self.fn(x, NULL)


def _vector_payload(c: Concept, other: Concept) -> np.ndarray:
    if c.is_null:
        ref = other.payload
        dim = len(ref) if isinstance(ref, np.ndarray) and not other.is_null else 0
        return np.zeros(dim)
    if not isinstance(c.payload, np.ndarray) or c.payload.ndim != 1:
        raise DimensionMismatch(f"concept {c.id!r} has no vector payload")
    return c.payload


def _matrix_payload(c: Concept, other: Concept) -> np.ndarray:
    if c.is_null:
        ref = other.payload
        cols = ref.shape[1] if isinstance(ref, np.ndarray) and not other.is_null else 0
        return np.zeros((0, cols))
    if not isinstance(c.payload, np.ndarray) or c.payload.ndim != 2:
        raise DimensionMismatch(f"concept {c.id!r} has no matrix payload")
    return c.payload


def euclidean_metric() -> Metric:
    def fn(x: Concept, y: Concept) -> float:
        if x.is_null and y.is_null:
            return 0.0
        return euclidean_distance(_vector_payload(x, y), _vector_payload(y, x))

    return Metric("euclidean", fn)


def cosine_metric() -> Metric:
    def fn(x: Concept, y: Concept) -> float:
        if x.is_null and y.is_null:
            return 0.0
        return cosine_distance(_vector_payload(x, y), _vector_payload(y, x))

    return Metric("cosine", fn, pseudo=True)


def matrix_metric() -> Metric:
    def fn(x: Concept, y: Concept) -> float:
        if x.is_null and y.is_null:
            return 0.0
        return matrix_distance(_matrix_payload(x, y), _matrix_payload(y, x))

    return Metric("matrix", fn)


def network_metric(net: SemanticNetwork) -> Metric:
    def fn(x: Concept, y: Concept) -> float:
        a = net.null_id if x.is_null else str(x.payload)
        b = net.null_id if y.is_null else str(y.payload)
        return net.distance(a, b)

    return Metric("network", fn)


def discrete_metric() -> Metric:
    """0 for identical payloads, 1 otherwise; the null concept matches
    only itself, so every concept is one unit away from null."""

    def fn(x: Concept, y: Concept) -> float:
        return 0.0 if x.key() == y.key() else 1.0

    return Metric("discrete", fn)


def squared(metric: Metric) -> Metric:
    """Square a metric's values (used as an edit-cost transform)."""

    def fn(x: Concept, y: Concept) -> float:
        d = metric(x, y)
        return d * d

    return Metric(f"{metric.name}^2", fn, pseudo=metric.pseudo)


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    left: str
    right: str
    value: float


@dataclass(frozen=True)
class AxiomReport:
    metric: str
    pseudo: bool
    checked_pairs: int
    violations: tuple[AxiomViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_metric_axioms(
    metric: Metric, sample: Sequence[Concept], tol: float = 1e-9
) -> AxiomReport:
    """Verify non-negativity, symmetry, and zero self-distance over all
    pairs of the sample; identity of indiscernibles is checked only for
    non-pseudo metrics.  Failures are reported, never raised."""
    if not sample:
        raise ValueError("axiom check needs a non-empty sample")
    violations: list[AxiomViolation] = []
    checked = 0
    for i, x in enumerate(sample):
        for y in sample[i:]:
            checked += 1
            dxy = metric(x, y)
            dyx = metric(y, x)
            if dxy < -tol:
                violations.append(AxiomViolation("non-negativity", x.id, y.id, dxy))
            if abs(dxy - dyx) > tol:
                violations.append(AxiomViolation("symmetry", x.id, y.id, dxy - dyx))
            if x is y or x.key() == y.key():
                if abs(dxy) > tol:
                    violations.append(AxiomViolation("self-distance", x.id, y.id, dxy))
            elif not metric.pseudo and abs(dxy) <= tol:
                violations.append(AxiomViolation("identity", x.id, y.id, dxy))
    return AxiomReport(metric.name, metric.pseudo, checked, tuple(violations))
