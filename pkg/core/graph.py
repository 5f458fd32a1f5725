"""
Interval-indexed graphs and their cluster structure.

Vertices are the integers of a half-open interval, edges an (E, 2) integer
array with i < j. Clusters come from a union-find with path compression and
union by size, compiled with numba.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List
import numpy as np
from numba import njit
from core.errors import DomainError, GraphError


@dataclass(frozen=True)
class Interval:
    """Half-open integer range [lo, hi)"""

    lo: int
    hi: int

    def __post_init__(self):
        object.__setattr__(self, 'lo', int(self.lo))
        object.__setattr__(self, 'hi', int(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"interval lower end {self.lo} exceeds upper end {self.hi}")

    def __len__(self):
        return self.hi - self.lo

    @property
    def length(self) -> int:
        return self.hi - self.lo

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __contains__(self, vertex) -> bool:
        return self.lo <= vertex < self.hi

    def padded(self, pad: int) -> "Interval":
        """I±L"""
        return Interval(self.lo - pad, self.hi + pad)

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, max(lo, hi))

    def num_pairs(self) -> int:
        n = self.length
        return n * (n - 1) // 2

    def pairs(self) -> List[tuple]:
        """All pairs i < j in lexicographic order"""
        return [(i, j) for i in range(self.lo, self.hi) for j in range(i + 1, self.hi)]

    def __str__(self):
        return f"[{self.lo},{self.hi})"

    @staticmethod
    def parse(text: str) -> "Interval":
        """Parse `lo:hi`"""
        try:
            lo, hi = text.split(':')
            return Interval(int(lo), int(hi))
        except ValueError as e:
            raise DomainError(f"cannot parse interval '{text}' (expected lo:hi)") from e


def _as_edge_array(edges) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    return arr.reshape(-1, 2)


@dataclass(frozen=True, eq=False)
class Graph:
    """Vertex interval plus an edge list of unordered pairs"""

    vertices: Interval
    edges: np.ndarray

    def __post_init__(self):
        arr = _as_edge_array(self.edges)
        if len(arr):
            if np.any(arr[:, 0] == arr[:, 1]):
                bad = arr[arr[:, 0] == arr[:, 1]][0]
                raise GraphError(f"self-loop at vertex {bad[0]}")
            arr = np.sort(arr, axis=1)
            if arr[:, 0].min() < self.vertices.lo or arr[:, 1].max() >= self.vertices.hi:
                raise GraphError(f"edge endpoint outside vertex interval {self.vertices}")
            width = self.vertices.length
            keys = np.unique((arr[:, 0] - self.vertices.lo) * width + (arr[:, 1] - self.vertices.lo))
            arr = np.column_stack([keys // width, keys % width]) + self.vertices.lo
        arr.setflags(write=False)
        object.__setattr__(self, 'edges', arr)

    @classmethod
    def empty(cls, vertices: Interval) -> "Graph":
        return cls(vertices, np.empty((0, 2), dtype=np.int64))

    @classmethod
    def from_pairs(cls, vertices: Interval, pairs) -> "Graph":
        return cls(vertices, _as_edge_array(list(pairs)))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_set(self) -> frozenset:
        return frozenset((int(i), int(j)) for i, j in self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        a, b = min(i, j), max(i, j)
        return b in self.adjacency.get(a, ())

    @cached_property
    def adjacency(self) -> Dict[int, set]:
        """Adjacency index, built on first use"""
        adj: Dict[int, set] = {}
        for i, j in self.edges.tolist():
            adj.setdefault(i, set()).add(j)
            adj.setdefault(j, set()).add(i)
        return adj

    def offsets(self) -> tuple:
        """Endpoint arrays shifted so that vertices.lo maps to 0"""
        return self.edges[:, 0] - self.vertices.lo, self.edges[:, 1] - self.vertices.lo

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.vertices == other.vertices and self.edge_set() == other.edge_set()

    def __hash__(self):
        return hash((self.vertices, self.edge_set()))

    def __repr__(self):
        return f"Graph(vertices={self.vertices}, edges={self.num_edges})"

    # Text format: `vertices <lo> <hi>` then sorted `edge <i> <j>` lines

    def to_text(self) -> str:
        lines = [f"vertices {self.vertices.lo} {self.vertices.hi}"]
        if len(self.edges):
            ordered = self.edges[np.lexsort((self.edges[:, 1], self.edges[:, 0]))]
            lines.extend(f"edge {i} {j}" for i, j in ordered.tolist())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        lines = [line.split() for line in text.splitlines() if line.strip()]
        if not lines or lines[0][0] != 'vertices' or len(lines[0]) != 3:
            raise GraphError("graph text must start with 'vertices <lo> <hi>'")
        vertices = Interval(int(lines[0][1]), int(lines[0][2]))
        pairs = []
        for number, parts in enumerate(lines[1:], start=2):
            if len(parts) != 3 or parts[0] != 'edge':
                raise GraphError(f"malformed graph line {number}: {' '.join(parts)}")
            pairs.append((int(parts[1]), int(parts[2])))
        return cls.from_pairs(vertices, pairs)


# Union-find kernels

@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    # path compression
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _union_edges(parent, size, us, vs):
    merges = 0
    for k in range(us.shape[0]):
        a = _find(parent, us[k])
        b = _find(parent, vs[k])
        if a != b:
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
            merges += 1
    return merges


@njit(cache=True)
def _roots(parent):
    n = parent.shape[0]
    out = np.empty(n, dtype=np.int64)
    for k in range(n):
        out[k] = _find(parent, k)
    return out


@njit(cache=True)
def _first_crossing(n, us, vs, win_lo, win_hi, tenth, need_count):
    """Index of the first edge after which the proxy holds, or -1.

    need_count > 0 asks for a cluster with that many window vertices;
    otherwise a cluster touching both end tenths of the window.
    """
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    wcount = np.zeros(n, dtype=np.int64)
    flags = np.zeros(n, dtype=np.int64)
    for k in range(win_lo, win_hi):
        wcount[k] = 1
        if k < win_lo + tenth:
            flags[k] |= 1
        if k >= win_hi - tenth:
            flags[k] |= 2
    for e in range(us.shape[0]):
        a = _find(parent, us[e])
        b = _find(parent, vs[e])
        if a == b:
            continue
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
        wcount[a] += wcount[b]
        flags[a] |= flags[b]
        if need_count > 0:
            if wcount[a] >= need_count:
                return e
        elif flags[a] == 3:
            return e
    return -1


class ClusterPartition:
    """Connected components of a graph over its vertex interval.

    Block ids are ordered by each block's smallest vertex, so block 0 holds
    vertices.lo and ties between equal-size blocks resolve to the lower id.
    """

    def __init__(self, vertices: Interval, labels: np.ndarray, merges: int):
        self.vertices = vertices
        self.labels = labels
        self.sizes = np.bincount(labels, minlength=int(labels.max()) + 1 if len(labels) else 0)
        self.merges = merges

    @classmethod
    def from_roots(cls, vertices: Interval, roots: np.ndarray, merges: int) -> "ClusterPartition":
        _, first, inverse = np.unique(roots, return_index=True, return_inverse=True)
        # relabel by first occurrence
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first, kind='stable')] = np.arange(len(first))
        return cls(vertices, rank[inverse].astype(np.int64), merges)

    @property
    def omega(self) -> int:
        """Number of clusters"""
        return len(self.sizes)

    def blocks(self) -> List[frozenset]:
        if self.omega == 0:
            return []
        lo = self.vertices.lo
        order = np.argsort(self.labels, kind='stable')
        chunks = np.split(order, np.cumsum(self.sizes)[:-1])
        return [frozenset(int(v) + lo for v in chunk) for chunk in chunks]

    def block_of(self, vertex: int) -> frozenset:
        label = self.labels[vertex - self.vertices.lo]
        members = np.nonzero(self.labels == label)[0] + self.vertices.lo
        return frozenset(int(v) for v in members)

    def connected(self, i: int, j: int) -> bool:
        lo = self.vertices.lo
        return bool(self.labels[i - lo] == self.labels[j - lo])

    def largest_size(self) -> int:
        return int(self.sizes.max()) if self.omega else 0

    def _induced_labels(self, window: Interval) -> np.ndarray:
        if not self.vertices.contains(window):
            raise DomainError(f"interval {window} not contained in domain {self.vertices}")
        lo = self.vertices.lo
        return self.labels[window.lo - lo:window.hi - lo]

    def induced_sizes(self, window: Interval) -> tuple:
        """(block ids, first offsets in window, counts) for C∩I, ordered by min vertex"""
        sub = self._induced_labels(window)
        ids, first, counts = np.unique(sub, return_index=True, return_counts=True)
        order = np.argsort(first, kind='stable')
        return ids[order], first[order], counts[order]

    def largest_induced_size(self, window: Interval) -> int:
        if window.length == 0:
            return 0
        return int(self.induced_sizes(window)[2].max())

    def parent_array(self) -> tuple:
        """Union-find state equivalent to this partition, for adding more edges"""
        _, reps = np.unique(self.labels, return_index=True)
        parent = reps[self.labels].astype(np.int64)
        size = np.zeros(len(self.labels), dtype=np.int64)
        size[reps] = self.sizes
        return parent, size

    def with_edges(self, extra: np.ndarray) -> "ClusterPartition":
        """Partition after also joining the given edges (vertex ids, not offsets)"""
        extra = _as_edge_array(extra)
        parent, size = self.parent_array()
        lo = self.vertices.lo
        merges = _union_edges(parent, size, extra[:, 0] - lo, extra[:, 1] - lo)
        return ClusterPartition.from_roots(self.vertices, _roots(parent), self.merges + merges)

    def __repr__(self):
        return f"ClusterPartition(vertices={self.vertices}, omega={self.omega})"


def clusters(g: Graph) -> ClusterPartition:
    """Exact connected components; omega = |V| - successful merges"""
    n = g.vertices.length
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    us, vs = g.offsets()
    merges = _union_edges(parent, size, us, vs) if n else 0
    return ClusterPartition.from_roots(g.vertices, _roots(parent), merges)


def largest_cluster(p: ClusterPartition) -> frozenset:
    """A cluster of maximum size, ties to the smallest minimum vertex"""
    if p.vertices.length == 0:
        raise DomainError("empty domain")
    return largest_induced(p, p.vertices)


def induced_partition(p: ClusterPartition, i: Interval) -> List[frozenset]:
    """All nonempty C∩I for clusters C, ordered by minimum vertex"""
    sub = p._induced_labels(i)
    ids, _, _ = p.induced_sizes(i)
    return [frozenset(int(v) + i.lo for v in np.nonzero(sub == k)[0]) for k in ids]


def largest_induced(p: ClusterPartition, i: Interval) -> frozenset:
    """An element of the induced partition on I of maximum size"""
    if i.length == 0:
        raise DomainError("empty domain")
    sub = p._induced_labels(i)
    ids, _, counts = p.induced_sizes(i)
    best = ids[int(np.argmax(counts))]  # first maximum has the smallest min vertex
    return frozenset(int(v) + i.lo for v in np.nonzero(sub == best)[0])


def induced_subgraph(g: Graph, v: Interval) -> Graph:
    """G[V]: the edges of g with both endpoints in v"""
    if not g.vertices.contains(v):
        raise DomainError(f"interval {v} not contained in {g.vertices}")
    e = g.edges
    mask = (e[:, 0] >= v.lo) & (e[:, 1] < v.hi)
    return Graph(v, e[mask])


def union_graphs(g: Graph, h: Graph) -> Graph:
    """G∪H on g's vertex interval, without duplicate edges"""
    if not g.vertices.contains(h.vertices):
        raise GraphError(f"incompatible vertex sets {g.vertices} and {h.vertices}")
    if h.num_edges == 0:
        return g
    if g.num_edges == 0:
        return Graph(g.vertices, h.edges)
    return Graph(g.vertices, np.concatenate([g.edges, h.edges]))


def first_crossing_index(g: Graph, order: np.ndarray, window: Interval, tenth: int, need_count: int) -> int:
    """Newman-Ziff pass over g's edges in `order`; see _first_crossing"""
    if not g.vertices.contains(window):
        raise DomainError(f"interval {window} not contained in {g.vertices}")
    us, vs = g.offsets()
    lo = g.vertices.lo
    return int(_first_crossing(g.vertices.length, us[order], vs[order],
                               window.lo - lo, window.hi - lo, tenth, need_count))


@njit(cache=True)
def _omega_per_state(n, us, vs):
    """Cluster count of every subgraph; bit k of the state selects edge k"""
    m = us.shape[0]
    total = 1 << m
    out = np.empty(total, dtype=np.int64)
    parent = np.empty(n, dtype=np.int64)
    size = np.empty(n, dtype=np.int64)
    for state in range(total):
        for k in range(n):
            parent[k] = k
            size[k] = 1
        merges = 0
        for k in range(m):
            if (state >> k) & 1:
                a = _find(parent, us[k])
                b = _find(parent, vs[k])
                if a != b:
                    if size[a] < size[b]:
                        a, b = b, a
                    parent[b] = a
                    size[a] += size[b]
                    merges += 1
        out[state] = n - merges
    return out


def omega_per_state(vertices: Interval, pairs: np.ndarray) -> np.ndarray:
    """omega(G) for all 2^len(pairs) subgraphs of the given pair universe"""
    pairs = _as_edge_array(pairs)
    return _omega_per_state(vertices.length, pairs[:, 0] - vertices.lo, pairs[:, 1] - vertices.lo)
