"""Tree recursions for the hard-core model and for proper colorings.

All marginals here are *non-occupancy* probabilities ``P(root not in I)``.
Activities given as ``int`` or ``Fraction`` are evaluated exactly in rational
arithmetic; ``float`` activities use floats, and ``interval_bounds`` then
rounds every step outward so the enclosure stays rigorous.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import InfeasibleBoundary

IN = 1
OUT = 0


@dataclass(frozen=True)
class RootedTree:
    """Rooted tree with nodes numbered in BFS order, root ``0``.

    ``depth`` is the nominal depth ``t``; nodes on level ``t`` form the
    boundary.  A tree may be shallower than ``depth``, in which case its
    boundary is empty.
    """

    parent: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    level: tuple[int, ...]
    depth: int
    labels: tuple | None = None

    def __post_init__(self):
        if not self.parent or self.parent[0] != -1:
            raise ValueError("node 0 must be the root")
        for v in range(1, len(self.parent)):
            p = self.parent[v]
            if not 0 <= p < v:
                raise ValueError("nodes must be numbered in BFS order")
            if self.level[v] != self.level[p] + 1 or v not in self.children[p]:
                raise ValueError(f"inconsistent parent link at node {v}")
        if max(self.level) > self.depth:
            raise ValueError("tree is deeper than its nominal depth")

    @classmethod
    def from_parents(cls, parent: Sequence[int], depth: int | None = None, labels=None) -> "RootedTree":
        children: list[list[int]] = [[] for _ in parent]
        level = [0] * len(parent)
        for v in range(1, len(parent)):
            children[parent[v]].append(v)
            level[v] = level[parent[v]] + 1
        if depth is None:
            depth = max(level)
        return cls(
            tuple(parent),
            tuple(tuple(c) for c in children),
            tuple(level),
            depth,
            tuple(labels) if labels is not None else None,
        )

    @classmethod
    def from_children_counts(cls, counts: Sequence[int], depth: int | None = None) -> "RootedTree":
        """Build from per-node child counts listed in BFS order."""
        parent = [-1]
        head = 0
        for c in counts:
            if head >= len(parent):
                break
            parent.extend([head] * c)
            head += 1
        return cls.from_parents(parent, depth)

    @property
    def size(self) -> int:
        return len(self.parent)

    @property
    def boundary(self) -> list[int]:
        return [v for v, lv in enumerate(self.level) if lv == self.depth]

    @property
    def max_degree(self) -> int:
        return max(len(c) + (p >= 0) for c, p in zip(self.children, self.parent))

    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v, p in enumerate(self.parent) if p >= 0]


@dataclass(frozen=True)
class ProbInterval:
    lo: float | Fraction
    hi: float | Fraction

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi <= 1:
            raise ValueError(f"invalid probability interval [{self.lo}, {self.hi}]")

    @property
    def width(self):
        return self.hi - self.lo

    def __contains__(self, p) -> bool:
        return self.lo <= p <= self.hi


def _activity(lam):
    if isinstance(lam, float):
        return lam
    return Fraction(lam)


def _check_lambda(lam) -> None:
    if not lam > 0:
        raise ValueError("activity must be positive")


def _run_recursion(tree: RootedTree, lam, seeds: Mapping[int, object]):
    # Bottom-up in reverse BFS order; children are multiplied in index order.
    one = 1.0 if isinstance(lam, float) else Fraction(1)
    free_leaf = one / (1 + lam)
    p = [None] * tree.size
    for v in range(tree.size - 1, -1, -1):
        if v in seeds:
            p[v] = seeds[v]
            continue
        kids = tree.children[v]
        if not kids:
            p[v] = free_leaf
            continue
        prod = one
        for c in kids:
            prod *= p[c]
        p[v] = one / (1 + lam * prod)
    return p


def counting_tree_marginal(tree: RootedTree, lam=1):
    """Free-boundary ``P(root not in I)`` via ``p(u) = 1 / (1 + lam * prod p(children))``."""
    lam = _activity(lam)
    _check_lambda(lam)
    return _run_recursion(tree, lam, {})[0]


def marginal_with_boundary(tree: RootedTree, lam, b: Mapping[int, int]):
    """Exact ``P(root not in I | b)`` for a boundary condition ``b``.

    ``b`` maps boundary nodes to ``IN`` or ``OUT``; unassigned boundary nodes
    are free.  An ``IN`` node contributes probability 0, an ``OUT`` node 1.
    """
    lam = _activity(lam)
    _check_lambda(lam)
    boundary = set(tree.boundary)
    for v, state in b.items():
        if v not in boundary:
            raise ValueError(f"node {v} is not on the boundary")
        if state not in (IN, OUT):
            raise ValueError(f"boundary state must be IN or OUT, got {state!r}")
    for v, state in b.items():
        if state == IN:
            p = tree.parent[v]
            if p >= 0 and b.get(p) == IN:
                raise InfeasibleBoundary(f"adjacent boundary nodes {p} and {v} both occupied")
    zero = 0.0 if isinstance(lam, float) else Fraction(0)
    seeds = {v: (zero if s == IN else zero + 1) for v, s in b.items()}
    return _run_recursion(tree, lam, seeds)[0]


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


def _down(x: float) -> float:
    return math.nextafter(x, -math.inf)


def interval_node_bounds(tree: RootedTree, lam=1) -> list[ProbInterval]:
    """Interval ``[a(v), c(v)]`` for every node, boundary nodes seeded with ``[0, 1]``."""
    lam = _activity(lam)
    _check_lambda(lam)
    exact = not isinstance(lam, float)
    one = Fraction(1) if exact else 1.0
    boundary = set(tree.boundary)
    lo = [None] * tree.size
    hi = [None] * tree.size
    for v in range(tree.size - 1, -1, -1):
        if v in boundary:
            lo[v], hi[v] = one - 1, one
            continue
        plo = phi = one
        for c in tree.children[v]:
            if exact:
                plo *= lo[c]
                phi *= hi[c]
            else:
                plo = _down(plo * lo[c])
                phi = _up(phi * hi[c])
        if exact:
            lo[v] = one / (1 + lam * phi)
            hi[v] = one / (1 + lam * plo)
        else:
            lo[v] = max(0.0, _down(1.0 / _up(1.0 + _up(lam * phi))))
            hi[v] = min(1.0, _up(1.0 / _down(1.0 + max(0.0, _down(lam * plo)))))
    return [ProbInterval(a, c) for a, c in zip(lo, hi)]


def interval_bounds(tree: RootedTree, lam=1) -> ProbInterval:
    """Enclosure of ``P(root not in I | b)`` over every boundary condition ``b``."""
    return interval_node_bounds(tree, lam)[0]


def exact_tree_color_marginal(tree: RootedTree, q: int, b: Mapping[int, int] | None = None, exact: bool = True):
    """Distribution of the root color over proper ``q``-colorings consistent with ``b``.

    Colors are ``0..q-1``.  Messages are normalized at every node.
    """
    b = b or {}
    if q < tree.max_degree + 1:
        raise ValueError(f"need q >= max degree + 1 = {tree.max_degree + 1}")
    boundary = set(tree.boundary)
    for v, c in b.items():
        if v not in boundary:
            raise ValueError(f"node {v} is not on the boundary")
        if not 0 <= c < q:
            raise ValueError(f"color {c} out of range for q={q}")
    one = Fraction(1) if exact else 1.0
    zero = one - 1
    msg = [None] * tree.size
    for v in range(tree.size - 1, -1, -1):
        if v in b:
            vec = [zero] * q
            vec[b[v]] = one
        else:
            vec = [one] * q
            for c in tree.children[v]:
                child = msg[c]
                total = sum(child)
                for j in range(q):
                    vec[j] *= total - child[j]
        total = sum(vec)
        if total == 0:
            raise InfeasibleBoundary("no proper coloring extends the boundary condition")
        msg[v] = [x / total for x in vec]
    return msg[0]


def regular_tree(r: int, depth: int, root_degree: int | None = None) -> RootedTree:
    """Complete tree where the root has ``root_degree`` (default ``r``) children
    and every other internal node has ``r - 1``."""
    root_degree = r if root_degree is None else root_degree
    parent = [-1]
    frontier = [0]
    for lv in range(depth):
        nxt = []
        for u in frontier:
            k = root_degree if lv == 0 else r - 1
            for _ in range(k):
                parent.append(u)
                nxt.append(len(parent) - 1)
        frontier = nxt
    return RootedTree.from_parents(parent, depth)


def random_rooted_tree(depth: int, max_degree: int, rng: random.Random, max_nodes: int = 20000) -> RootedTree:
    """Random tree with every level ``< depth`` node given 0..max-allowed children.

    The root may have ``max_degree`` children, other nodes ``max_degree - 1``.
    """
    parent = [-1]
    frontier = [0]
    for lv in range(depth):
        nxt = []
        for u in frontier:
            cap = max_degree if lv == 0 else max_degree - 1
            k = rng.randint(1 if lv == 0 else 0, cap)
            if len(parent) + k > max_nodes:
                k = 0
            for _ in range(k):
                parent.append(u)
                nxt.append(len(parent) - 1)
        frontier = nxt
    return RootedTree.from_parents(parent, depth)


@dataclass(frozen=True)
class DecayRow:
    depth: int
    model: str
    param: object
    max_dev: float
    certified_width: float | None


DECAY_CSV_HEADER = "depth,model,param,max_dev,certified_width"


def decay_experiment(r: int, t: int, model: str = "ind", param=1, samples: int = 16, seed: int = 0) -> list[DecayRow]:
    """Boundary sensitivity of the root marginal on complete degree-``r`` trees.

    For ``model="ind"`` (``param`` = activity) each row carries the certified
    interval width and the spread of root marginals over all-IN, all-OUT and
    ``samples`` random boundaries.  For ``model="color"`` (``param`` = q) the
    row carries ``max_j |P(root=j | b) - 1/q|`` over the all-same-color
    boundaries and ``samples`` random ones; no certified width exists.
    """
    if r < 2 or t < 1:
        raise ValueError("need r >= 2 and t >= 1")
    rng = random.Random(seed)
    rows = []
    for depth in range(1, t + 1):
        tree = regular_tree(r, depth)
        bnd = tree.boundary
        if model == "ind":
            lam = float(param)
            iv = interval_bounds(tree, lam)
            conds = [{v: IN for v in bnd}, {v: OUT for v in bnd}]
            conds += [{v: rng.choice((IN, OUT)) for v in bnd} for _ in range(samples)]
            vals = [marginal_with_boundary(tree, lam, c) for c in conds]
            rows.append(DecayRow(depth, "ind", param, max(vals) - min(vals), iv.hi - iv.lo))
        elif model == "color":
            q = int(param)
            exact = tree.size <= 4000
            conds = [{v: c for v in bnd} for c in range(q)]
            conds += [{v: rng.randrange(q) for v in bnd} for _ in range(samples)]
            dev = 0
            for c in conds:
                vec = exact_tree_color_marginal(tree, q, c, exact=exact)
                dev = max(dev, max(abs(x - (Fraction(1, q) if exact else 1 / q)) for x in vec))
            rows.append(DecayRow(depth, "color", q, float(dev), None))
        else:
            raise ValueError(f"unknown model {model!r}")
    return rows


def decay_rows_to_csv(rows: Sequence[DecayRow]) -> str:
    lines = [DECAY_CSV_HEADER]
    for row in rows:
        width = "" if row.certified_width is None else f"{float(row.certified_width):.12g}"
        lines.append(f"{row.depth},{row.model},{row.param},{float(row.max_dev):.12g},{width}")
    return "\n".join(lines) + "\n"
