"""Graph generators.

Randomized generators draw from ``random.Random(seed)`` (Mersenne Twister),
so a seed pins the output across platforms and Python versions >= 3.2.
"""

from __future__ import annotations

import random

from .errors import InvalidParameters
from .graph import Graph

# LCF codes of the named cubic cages.
_LCF = {
    "heawood": ([5, -5], 7),
    "mcgee": ([12, 7, -7], 8),
    "tutte_coxeter": ([-13, -9, 7, -7, 9, 13], 5),
}


def cycle(n: int) -> Graph:
    if n < 3:
        raise InvalidParameters("a cycle needs at least 3 nodes")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    if n < 1:
        raise InvalidParameters("a path needs at least 1 node")
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete(k: int) -> Graph:
    if k < 1:
        raise InvalidParameters("complete graph needs at least 1 node")
    return Graph.from_edges(k, [(i, j) for i in range(k) for j in range(i + 1, k)])


def lcf(shifts, repeats: int) -> Graph:
    n = len(shifts) * repeats
    edges = {tuple(sorted((i, (i + 1) % n))) for i in range(n)}
    for i in range(n):
        j = (i + shifts[i % len(shifts)]) % n
        edges.add(tuple(sorted((i, j))))
    return Graph.from_edges(n, sorted(edges))


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


def named(name: str) -> Graph:
    if name == "petersen":
        return petersen()
    if name in _LCF:
        return lcf(*_LCF[name])
    raise InvalidParameters(f"unknown named graph {name!r}")


def random_regular(n: int, r: int, seed: int, max_tries: int = 100000) -> Graph:
    """Configuration model; a pairing with a loop or repeated edge is discarded whole."""
    if n < 1 or r < 0 or r >= n or (n * r) % 2:
        raise InvalidParameters(f"no simple {r}-regular graph on {n} nodes")
    rng = random.Random(seed)
    stubs = [v for v in range(n) for _ in range(r)]
    for _ in range(max_tries):
        rng.shuffle(stubs)
        edges = set()
        for a, b in zip(stubs[::2], stubs[1::2]):
            e = (a, b) if a < b else (b, a)
            if a == b or e in edges:
                break
            edges.add(e)
        else:
            return Graph.from_edges(n, sorted(edges))
    raise InvalidParameters(f"no simple pairing found in {max_tries} tries")


def random_tree(n: int, max_degree: int, seed: int) -> Graph:
    """Grow a tree by attaching each new node to a random node of spare degree."""
    if n < 1 or (max_degree < 2 and n > 2) or (max_degree < 1 and n > 1):
        raise InvalidParameters(f"no tree on {n} nodes with max degree {max_degree}")
    rng = random.Random(seed)
    degree = [0] * n
    open_nodes = [0]
    edges = []
    for v in range(1, n):
        u = rng.choice(open_nodes)
        edges.append((u, v))
        degree[u] += 1
        degree[v] = 1
        if degree[u] == max_degree:
            open_nodes.remove(u)
        if max_degree > 1:
            open_nodes.append(v)
    return Graph.from_edges(n, edges)


def generate(kind: str, *params, seed: int | None = None) -> Graph:
    """Dispatch on generator name; ``seed`` may also be the last positional parameter."""
    try:
        if kind == "cycle":
            return cycle(int(params[0]))
        if kind == "path":
            return path(int(params[0]))
        if kind == "complete":
            return complete(int(params[0]))
        if kind == "named":
            return named(str(params[0]))
        if kind == "random_regular":
            n, r = int(params[0]), int(params[1])
            s = seed if seed is not None else int(params[2])
            return random_regular(n, r, s)
        if kind == "random_tree":
            n, d = int(params[0]), int(params[1])
            s = seed if seed is not None else int(params[2])
            return random_tree(n, d, s)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, InvalidParameters):
            raise
        raise InvalidParameters(f"bad parameters for {kind}: {params}") from None
    raise InvalidParameters(f"unknown generator {kind!r}")


def parse_generator(spec: str) -> Graph:
    """Parse ``kind:p1:p2...``, e.g. ``random_regular:20:3:1`` or ``named:petersen``."""
    kind, *params = spec.split(":")
    return generate(kind, *params)
