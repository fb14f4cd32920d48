"""Simple undirected graphs, metrics, ball extraction and rewiring.

Graphs are immutable: every operation that changes structure returns a new
``Graph`` whose nodes are relabelled ``0..n-1`` preserving relative order.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EdgeExists, InvalidGraph, NotATree, PreconditionViolated
from .trees import RootedTree

INFINITE = math.inf


@dataclass(frozen=True)
class Graph:
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.adjacency)
        for v, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise InvalidGraph(f"adjacency of node {v} is not sorted and duplicate-free")
            for u in nbrs:
                if not 0 <= u < n:
                    raise InvalidGraph(f"node {v} has out-of-range neighbor {u}")
                if u == v:
                    raise InvalidGraph(f"self-loop at node {v}")
                if v not in self.adjacency[u]:
                    raise InvalidGraph(f"edge {v}-{u} is not symmetric")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph, rejecting loops and repeated edges."""
        if n < 0:
            raise InvalidGraph("node count must be non-negative")
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidGraph(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise InvalidGraph(f"self-loop at node {u}")
            if v in adj[u]:
                raise InvalidGraph(f"parallel edge {u}-{v}")
            adj[u].add(v)
            adj[v].add(u)
        return cls(tuple(tuple(sorted(s)) for s in adj))

    @classmethod
    def from_adjacency_sets(cls, adj: dict[int, set[int]]) -> tuple["Graph", list[int]]:
        """Compact a dict-of-sets graph; also returns the new-id -> old-id map."""
        labels = sorted(adj)
        index = {v: i for i, v in enumerate(labels)}
        return (
            cls(tuple(tuple(sorted(index[u] for u in adj[v])) for v in labels)),
            labels,
        )

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def is_regular(self, r: int | None = None) -> bool:
        degs = {len(a) for a in self.adjacency}
        if r is None:
            return len(degs) <= 1
        return degs <= {r}

    def adjacency_sets(self) -> dict[int, set[int]]:
        return {v: set(nbrs) for v, nbrs in enumerate(self.adjacency)}

    def remove_nodes(self, nodes: Iterable[int]) -> "Graph":
        drop = set(nodes)
        adj = {v: set(nbrs) - drop for v, nbrs in enumerate(self.adjacency) if v not in drop}
        return Graph.from_adjacency_sets(adj)[0]

    def mask(self) -> int:
        return (1 << self.n) - 1


@dataclass(frozen=True)
class GraphMetrics:
    girth: float  # int, or INFINITE for forests
    diameter: float  # int, or INFINITE when disconnected
    max_degree: int


def bfs_distances(adj: Sequence[Sequence[int]] | dict, source: int, limit: float = INFINITE) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if dist[u] >= limit:
            continue
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def _shortest_cycle_through(adj, root: int) -> float:
    # Closed walks found from a BFS root bound the girth from above and the
    # minimum over all roots is attained by any root lying on a shortest cycle.
    dist = {root: 0}
    parent = {root: -1}
    queue = deque([root])
    best = INFINITE
    while queue:
        u = queue.popleft()
        if 2 * dist[u] >= best:
            break
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                parent[w] = u
                queue.append(w)
            elif w != parent[u]:
                best = min(best, dist[u] + dist[w] + 1)
    return best


def girth_of(adj) -> float:
    nodes = range(len(adj)) if not isinstance(adj, dict) else adj.keys()
    # forests are detected in linear time: edges == nodes - components
    edges = sum(len(adj[v]) for v in nodes) // 2
    seen: set = set()
    components = 0
    for v in nodes:
        if v not in seen:
            components += 1
            seen.update(bfs_distances(adj, v))
    if edges == len(seen) - components:
        return INFINITE
    best = INFINITE
    for v in nodes:
        best = min(best, _shortest_cycle_through(adj, v))
        if best == 3:
            break
    return best


def compute_metrics(g: Graph) -> GraphMetrics:
    diameter = 0
    for v in range(g.n):
        dist = bfs_distances(g.adjacency, v)
        if len(dist) < g.n:
            diameter = INFINITE
            break
        diameter = max(diameter, max(dist.values()))
    return GraphMetrics(girth=girth_of(g.adjacency), diameter=diameter, max_degree=g.max_degree)


def is_forest(g: Graph) -> bool:
    components = 0
    seen: set[int] = set()
    for v in range(g.n):
        if v not in seen:
            components += 1
            seen.update(bfs_distances(g.adjacency, v))
    return g.m == g.n - components


def ball_tree(adj, v: int, t: float) -> RootedTree:
    """BFS ball of radius ``t`` around ``v`` in any adjacency mapping, as a tree.

    Works on dict-of-sets residual graphs as well as ``Graph.adjacency``.
    Raises ``NotATree`` when the induced ball contains a cycle.
    """
    order = [v]
    level = {v: 0}
    parent = {v: -1}
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        if level[u] >= t:
            continue
        for w in sorted(adj[u]):
            if w not in level:
                level[w] = level[u] + 1
                parent[w] = u
                order.append(w)
    inside = level.keys()
    induced_edges = sum(1 for u in order for w in adj[u] if w in inside) // 2
    if induced_edges != len(order) - 1:
        raise NotATree(f"ball of radius {t} around node {v} contains a cycle")
    index = {u: i for i, u in enumerate(order)}
    # an unbounded ball is a whole tree component and has no boundary
    depth = int(t) if t != INFINITE else max(level.values()) + 1
    return RootedTree.from_parents(
        [index[parent[u]] if parent[u] >= 0 else -1 for u in order],
        depth=depth,
        labels=order,
    )


def extract_ball(g: Graph, v: int, t: int) -> RootedTree:
    """Depth-``t`` neighborhood of ``v`` rooted at ``v``; level-``t`` nodes form the boundary."""
    if t < 0:
        raise ValueError("depth must be non-negative")
    return ball_tree(g.adjacency, v, t)


def safe_depth(metrics: GraphMetrics | float) -> float:
    """Largest ``t`` with ``2t + 1 < girth``, so every radius-``t`` ball is a tree."""
    girth = metrics.girth if isinstance(metrics, GraphMetrics) else metrics
    if girth == INFINITE:
        return INFINITE
    return int(girth) // 2 - 1


def _check_rewire_pair(g: Graph, v1: int, v2: int) -> None:
    if v1 == v2:
        raise PreconditionViolated("rewiring needs two distinct nodes")
    if g.has_edge(v1, v2):
        raise PreconditionViolated(f"nodes {v1} and {v2} are adjacent")
    if set(g.neighbors(v1)) & set(g.neighbors(v2)):
        raise PreconditionViolated(f"nodes {v1} and {v2} share a neighbor")
    if g.degree(v1) != g.degree(v2):
        raise PreconditionViolated(f"degrees of {v1} and {v2} differ")


def rewire(g: Graph, v1: int, v2: int, pairing: Sequence[tuple[int, int]] | None = None) -> Graph:
    """Delete ``v1`` and ``v2`` and join their neighbors pairwise.

    ``pairing`` lists index pairs ``(i, j)`` into the sorted neighbor lists of
    ``v1`` and ``v2``; the default matches the i-th neighbor to the i-th.
    """
    _check_rewire_pair(g, v1, v2)
    n1, n2 = g.neighbors(v1), g.neighbors(v2)
    r = len(n1)
    if pairing is None:
        pairing = [(i, i) for i in range(r)]
    if sorted(i for i, _ in pairing) != list(range(r)) or sorted(j for _, j in pairing) != list(range(r)):
        raise PreconditionViolated("pairing must be a perfect matching of neighbor indices")
    adj = g.adjacency_sets()
    for v in (v1, v2):
        for u in adj.pop(v):
            adj[u].discard(v)
    for i, j in pairing:
        a, b = n1[i], n2[j]
        if b in adj[a]:
            raise EdgeExists(f"edge {a}-{b} already present")
        adj[a].add(b)
        adj[b].add(a)
    return Graph.from_adjacency_sets(adj)[0]


def diameter_pair(g: Graph) -> tuple[int, int, int] | None:
    """Lexicographically smallest pair realizing the largest finite distance."""
    best = None
    for u in range(g.n):
        dist = bfs_distances(g.adjacency, u)
        for w in sorted(dist):
            if w > u and (best is None or dist[w] > best[2]):
                best = (u, w, dist[w])
    return best


def rewiring_schedule(g: Graph, girth_target: int, max_steps: int | None = None) -> list[tuple[Graph, int, int]]:
    """Repeatedly rewire a diameter pair at distance at least ``2 * girth_target + 1``.

    Each entry is ``(graph_after, v1, v2)`` with ``v1, v2`` labelled in the
    graph *before* that step.
    """
    if girth_target < 4:
        raise ValueError("girth_target must be at least 4")
    steps: list[tuple[Graph, int, int]] = []
    current = g
    limit = g.n // 2 if max_steps is None else max_steps
    while len(steps) < limit:
        pair = diameter_pair(current)
        if pair is None or pair[2] < 2 * girth_target + 1:
            break
        v1, v2, _ = pair
        current = rewire(current, v1, v2)
        steps.append((current, v1, v2))
    return steps


def parse_graph(text: str) -> Graph:
    """Parse the ``p <n> <m>`` / ``e <u> <v>`` text format."""
    n = m = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "p" and len(parts) == 3:
                if n is not None:
                    raise InvalidGraph(f"line {lineno}: duplicate header")
                n, m = int(parts[1]), int(parts[2])
            elif parts[0] == "e" and len(parts) == 3:
                if n is None:
                    raise InvalidGraph(f"line {lineno}: edge before header")
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise InvalidGraph(f"line {lineno}: cannot parse {raw!r}")
        except ValueError as exc:
            if isinstance(exc, InvalidGraph):
                raise
            raise InvalidGraph(f"line {lineno}: {exc}") from None
    if n is None:
        raise InvalidGraph("missing 'p <n> <m>' header")
    if len(edges) != m:
        raise InvalidGraph(f"header declares {m} edges but {len(edges)} were given")
    return Graph.from_edges(n, edges)


def format_graph(g: Graph) -> str:
    lines = [f"p {g.n} {g.m}"]
    lines.extend(f"e {u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def read_graph(path) -> Graph:
    with open(path) as fh:
        return parse_graph(fh.read())


def write_graph(g: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_graph(g))
