"""Exact counting engines for small graphs and checks of the cavity identities.

Independence polynomials are computed by branching on a max-degree vertex
with component splitting and memoization on vertex bitmasks.  Rational
activities ``p/s`` are handled in integer arithmetic by tracking
``s^|V| * Z``.  Proper colorings are counted by a vertex-ordered dynamic
program over the colors of the current frontier, with states merged under
color permutations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from . import config
from .errors import InvalidParameters, PreconditionViolated, TooLarge
from .graph import Graph, is_forest, rewire


@dataclass(frozen=True)
class OracleResult:
    value: Fraction | float | int
    node_budget: int


def _exact_activity(lam) -> tuple[Fraction, bool]:
    frac = Fraction(lam)
    if frac < 0:
        raise InvalidParameters("activity must be non-negative")
    return frac, not isinstance(lam, float)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class IndependenceEngine:
    """Memoized ``Z(lam, G[mask])`` for induced subgraphs of one graph."""

    def __init__(self, g: Graph, lam):
        self.graph = g
        self.lam, _ = _exact_activity(lam)
        self.p = self.lam.numerator
        self.s = self.lam.denominator
        self.nbr = [sum(1 << u for u in g.neighbors(v)) for v in range(g.n)]
        self._w = lru_cache(maxsize=None)(self._weight)

    def z(self, mask: int | None = None) -> Fraction:
        if mask is None:
            mask = self.graph.mask()
        return Fraction(self._w(mask), self.s ** mask.bit_count())

    def z_without(self, nodes: Iterable[int], mask: int | None = None) -> Fraction:
        if mask is None:
            mask = self.graph.mask()
        for v in nodes:
            mask &= ~(1 << v)
        return self.z(mask)

    def _component(self, mask: int) -> int:
        comp = frontier = mask & -mask
        while frontier:
            reach = 0
            for v in _bits(frontier):
                reach |= self.nbr[v]
            frontier = reach & mask & ~comp
            comp |= frontier
        return comp

    def _path_or_cycle(self, comp: int) -> int:
        # Component of max degree <= 2: weight s^k Z by the two-state recurrence.
        k = comp.bit_count()
        p, s = self.p, self.s
        edges = sum((self.nbr[v] & comp).bit_count() for v in _bits(comp)) // 2

        def path_weight(length: int) -> int:
            if length <= 0:
                return 1
            out_w, in_w = s, p  # weights of the first node being out / in
            for _ in range(length - 1):
                out_w, in_w = (out_w + in_w) * s, out_w * p
            return out_w + in_w

        if edges == k - 1:
            return path_weight(k)
        # Cycle: first node out leaves a path on k-1 nodes, in leaves k-3.
        return s * path_weight(k - 1) + p * s * s * path_weight(k - 3) if k > 3 else (
            s**3 + 3 * p * s * s
        )

    def _weight(self, mask: int) -> int:
        if mask == 0:
            return 1
        comp = self._component(mask)
        if comp != mask:
            return self._w(comp) * self._w(mask ^ comp)
        best_v, best_d = -1, -1
        for v in _bits(mask):
            d = (self.nbr[v] & mask).bit_count()
            if d > best_d:
                best_v, best_d = v, d
        if best_d <= 2:
            return self._path_or_cycle(mask)
        v = best_v
        without_v = self._w(mask & ~(1 << v))
        closed = (self.nbr[v] | (1 << v)) & mask
        with_v = self._w(mask & ~closed)
        return self.s * without_v + self.p * self.s**best_d * with_v


def _result(value: Fraction, exact: bool):
    return value if exact else float(value)


def _check_cap(n: int, cap: int | None, default: int, what: str = "graph") -> int:
    cap = default if cap is None else cap
    if n > cap:
        raise TooLarge(n, cap, what)
    return cap


def independence_polynomial(g: Graph, lam=1, cap: int | None = None) -> OracleResult:
    """Exact hard-core partition function ``Z(lam, G)``."""
    cap = _check_cap(g.n, cap, config.ind_cap())
    _, exact = _exact_activity(lam)
    return OracleResult(_result(IndependenceEngine(g, lam).z(), exact), cap)


def naive_independence_polynomial(g: Graph, lam=1) -> Fraction:
    """Sum of ``lam^|I|`` over all ``2^n`` subsets; an independent check for small ``n``."""
    lam = Fraction(lam)
    nbr = [sum(1 << u for u in g.neighbors(v)) for v in range(g.n)]
    total = Fraction(0)
    for subset in range(1 << g.n):
        if all(not (nbr[v] & subset) for v in _bits(subset)):
            total += lam ** subset.bit_count()
    return total


def transfer_matrix_cycle(n: int, lam=1) -> OracleResult:
    """``Z(lam, C_n)`` as the trace of ``M^n``.

    ``M = [[1, 1], [lam, 0]]`` with ``M[a][b]`` the weight of a site in state
    ``a`` following a site in state ``b`` (state 0 = out, 1 = in); an in-site
    carries ``lam`` and two in-sites may not be adjacent.
    """
    if n < 3:
        raise InvalidParameters("cycle length must be at least 3")
    lam_f, exact = _exact_activity(lam)
    m = ((Fraction(1), Fraction(1)), (lam_f, Fraction(0)))

    def mul(a, b):
        return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2)) for i in range(2))

    result = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    base, e = m, n
    while e:
        if e & 1:
            result = mul(result, base)
        base = mul(base, base)
        e >>= 1
    return OracleResult(_result(result[0][0] + result[1][1], exact), n)


def exact_marginal_ind(g: Graph, v: int, lam=1, cap: int | None = None):
    """``P(v not in I) = Z(G - v) / Z(G)``."""
    _check_cap(g.n, cap, config.ind_cap())
    _, exact = _exact_activity(lam)
    eng = IndependenceEngine(g, lam)
    return _result(eng.z_without([v]) / eng.z(), exact)


# ---------------------------------------------------------------------------
# colorings


def _elimination_order(adj: dict[int, set[int]]) -> list[int]:
    order: list[int] = []
    placed: set[int] = set()
    remaining = set(adj)
    while remaining:
        v = min(remaining, key=lambda u: (-len(adj[u] & placed), -len(adj[u]), u))
        order.append(v)
        placed.add(v)
        remaining.discard(v)
    return order


def _canonical(colors: tuple, masks: tuple, q: int) -> tuple[tuple, tuple]:
    relabel: dict[int, int] = {}
    for c in colors:
        if c not in relabel:
            relabel[c] = len(relabel)
    for mask in masks:
        for c in range(q):
            if mask >> c & 1 and c not in relabel:
                relabel[c] = len(relabel)
    new_masks = tuple(sum(1 << relabel[c] for c in range(q) if mask >> c & 1) for mask in masks)
    return tuple(relabel[c] for c in colors), new_masks


def coloring_profile(
    adj: dict[int, set[int]],
    q: int,
    groups: Sequence[Iterable[int]] = (),
    lists: dict[int, Iterable[int]] | None = None,
) -> dict[tuple, int]:
    """Count proper colorings, split by the color sets used on each group.

    Returns ``{(mask_1, ..., mask_g): count}``.  Without ``lists`` the masks
    are canonical up to a permutation of colors, so only quantities invariant
    under relabelling (such as popcounts) are meaningful.
    """
    group_sets = [set(gr) for gr in groups]
    member = {v: [i for i, gs in enumerate(group_sets) if v in gs] for v in adj}
    allowed = {v: (set(lists[v]) if lists and v in lists else set(range(q))) for v in adj}
    order = _elimination_order(adj)
    states: dict[tuple, int] = {((), tuple(0 for _ in group_sets)): 1}
    frontier: list[int] = []
    placed: set[int] = set()
    for v in order:
        nbr_pos = [i for i, u in enumerate(frontier) if u in adj[v]]
        placed.add(v)
        new_frontier = [u for u in frontier + [v] if adj[u] - placed]
        keep = [i for i, u in enumerate(frontier + [v]) if u in new_frontier]
        nxt: dict[tuple, int] = {}
        for (colors, masks), count in states.items():
            blocked = {colors[i] for i in nbr_pos}
            for c in allowed[v]:
                if c in blocked:
                    continue
                full = colors + (c,)
                new_colors = tuple(full[i] for i in keep)
                new_masks = tuple(
                    m | (1 << c) if i in member[v] else m for i, m in enumerate(masks)
                )
                key = (new_colors, new_masks) if lists else _canonical(new_colors, new_masks, q)
                nxt[key] = nxt.get(key, 0) + count
        states = nxt
        frontier = new_frontier
    profile: dict[tuple, int] = {}
    for (_, masks), count in states.items():
        profile[masks] = profile.get(masks, 0) + count
    return profile


def _is_cycle(g: Graph) -> bool:
    return g.n >= 3 and g.is_regular(2) and g.m == g.n and len(_components(g.adjacency_sets())) == 1


def _components(adj: dict[int, set[int]]) -> list[set[int]]:
    seen: set[int] = set()
    comps = []
    for v in sorted(adj):
        if v in seen:
            continue
        comp = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        comps.append(comp)
    return comps


def _count_colorings_adj(adj: dict[int, set[int]], q: int, cap: int) -> int:
    total = 1
    general = 0
    pending = []
    for comp in _components(adj):
        k = len(comp)
        edges = sum(len(adj[v]) for v in comp) // 2
        if edges == k - 1:
            total *= q * (q - 1) ** (k - 1)
        elif edges == k and all(len(adj[v]) == 2 for v in comp):
            total *= (q - 1) ** k + (-1) ** k * (q - 1)
        else:
            general += k
            pending.append(comp)
    if general > cap:
        raise TooLarge(general, cap, "non-tree, non-cycle part")
    for comp in pending:
        sub = {v: adj[v] & comp for v in comp}
        total *= sum(coloring_profile(sub, q).values())
        if total == 0:
            break
    return total


def count_proper_colorings(g: Graph, q: int, cap: int | None = None) -> OracleResult:
    """Exact number of proper ``q``-colorings."""
    if q < 0:
        raise InvalidParameters("q must be non-negative")
    cap = config.color_cap() if cap is None else cap
    return OracleResult(_count_colorings_adj(g.adjacency_sets(), q, cap), cap)


def deletion_contraction(g: Graph, q: int) -> int:
    """Chromatic polynomial at ``q`` by deletion-contraction (small graphs only)."""

    @lru_cache(maxsize=None)
    def chrom(n: int, edges: frozenset) -> int:
        if not edges:
            return q**n
        u, v = min(edges)
        deleted = chrom(n, edges - {(u, v)})
        merged = set()
        for a, b in edges - {(u, v)}:
            a, b = (u if a == v else a), (u if b == v else b)
            a, b = min(a, b), max(a, b)
            # shift labels above v down by one to keep ids contiguous
            a, b = (a - (a > v)), (b - (b > v))
            merged.add((a, b))
        return deleted - chrom(n - 1, frozenset(merged))

    return chrom(g.n, frozenset(g.edges()))


def brute_force_colorings(g: Graph, q: int) -> int:
    edges = g.edges()
    return sum(
        1
        for colors in itertools.product(range(q), repeat=g.n)
        if all(colors[a] != colors[b] for a, b in edges)
    )


def expected_used_colors(g: Graph, v: int, q: int, cap: int | None = None) -> Fraction:
    """``E|C(N(v))|`` over uniform proper colorings of ``g - v``, with ``N(v)`` taken in ``g``."""
    cap = _check_cap(g.n, cap, config.color_cap())
    adj = g.adjacency_sets()
    nbrs = adj.pop(v)
    for u in nbrs:
        adj[u].discard(v)
    profile = coloring_profile(adj, q, groups=[nbrs])
    total = sum(profile.values())
    if total == 0:
        raise InvalidParameters(f"g - {v} has no proper {q}-coloring")
    return Fraction(sum(m[0].bit_count() * c for m, c in profile.items()), total)


# ---------------------------------------------------------------------------
# identity checks


@dataclass
class IdentityReport:
    product: Fraction
    exact: Fraction
    passed: bool
    factors: list = field(default_factory=list)
    max_step_deviation: float = 0.0


def _rel_close(a, b, tol: float) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


def _order_or_default(g: Graph, order):
    order = list(range(g.n)) if order is None else list(order)
    if sorted(order) != list(range(g.n)):
        raise InvalidParameters("order must be a permutation of the nodes")
    return order


def verify_cavity_identity(g: Graph, lam=1, order=None, cap: int | None = None, tol: float = 1e-9) -> IdentityReport:
    """Check ``prod_k P_{G_{k-1}}(v_k not in I)^{-1} = Z(G)``.

    Each marginal is obtained through the occupancy route
    ``1 - lam Z(G_{k-1} - N[v_k]) / Z(G_{k-1})`` and compared per step with the
    deletion ratio ``Z(G_k) / Z(G_{k-1})``; the product is compared with
    ``Z(G)`` from the branching engine.
    """
    _check_cap(g.n, cap, config.ind_cap())
    order = _order_or_default(g, order)
    lam_f, exact = _exact_activity(lam)
    eng = IndependenceEngine(g, lam_f)
    mask = g.mask()
    product = Fraction(1)
    factors = []
    worst = Fraction(0)
    for v in order:
        z_here = eng.z(mask)
        closed = (eng.nbr[v] | (1 << v)) & mask
        p_occ = 1 - lam_f * eng.z(mask & ~closed) / z_here
        p_del = eng.z(mask & ~(1 << v)) / z_here
        worst = max(worst, abs(p_occ - p_del))
        factors.append(p_occ)
        product /= p_occ
        mask &= ~(1 << v)
    z = eng.z()
    if exact:
        passed = product == z
    else:
        passed = _rel_close(float(product), float(z), tol)
    return IdentityReport(product, z, passed, factors, float(worst))


def verify_color_identity(g: Graph, q: int, order=None, cap: int | None = None, tol: float = 1e-9) -> IdentityReport:
    """Check ``prod_k (q - E_{G_k}|C(N(v_k, G_{k-1}))|) = |C(q, G)|``."""
    _check_cap(g.n, cap, config.color_cap())
    if q < g.max_degree + 1:
        raise InvalidParameters(f"need q >= max degree + 1 = {g.max_degree + 1}")
    order = _order_or_default(g, order)
    adj = g.adjacency_sets()
    product = Fraction(1)
    factors = []
    for v in order:
        nbrs = adj.pop(v)
        for u in nbrs:
            adj[u].discard(v)
        profile = coloring_profile(adj, q, groups=[nbrs]) if adj else {(0,): 1}
        total = sum(profile.values())
        used = Fraction(sum(m[0].bit_count() * c for m, c in profile.items()), total)
        factors.append(q - used)
        product *= q - used
    z = Fraction(count_proper_colorings(g, q, cap=max(g.n, cap or 0)).value)
    return IdentityReport(product, z, product == z, factors, float(abs(product - z)))


@dataclass
class EnergyShiftReport:
    ratio: Fraction
    p_pair_out: Fraction
    p_matched: Fraction
    passed: bool
    color_ratio: Fraction | None = None
    color_expectation: Fraction | None = None
    color_p_distinct: Fraction | None = None
    color_passed: bool | None = None

    @property
    def all_passed(self) -> bool:
        return self.passed and self.color_passed is not False


def _union_find_merge(adj: dict[int, set[int]], pairs) -> dict[int, set[int]] | None:
    # Identify each pair; returns None when an identified pair is adjacent.
    rep = {v: v for v in adj}

    def find(x):
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            rep[max(ra, rb)] = min(ra, rb)
    merged: dict[int, set[int]] = {}
    for v in adj:
        merged.setdefault(find(v), set())
    for v, nbrs in adj.items():
        for u in nbrs:
            a, b = find(v), find(u)
            if a == b:
                return None
            merged[a].add(b)
    return merged


def verify_energy_shift(
    g: Graph,
    v1: int,
    v2: int,
    lam=1,
    q: int | None = None,
    pairing=None,
    cap: int | None = None,
    tol: float = 1e-9,
) -> EnergyShiftReport:
    """Check the rewiring identity for independent sets (and colorings when ``q`` is given).

    Independent sets: ``Z(G°)/Z(G) = P_G(v1, v2 out) * P_{G'}(no matched pair both in)``,
    the second factor by inclusion-exclusion over the matched pairs.
    Colorings: ``Z(G)/Z(G°) = E_{G'}[(q-|C(N1)|)(q-|C(N2)|)] / P_{G'}(matched pairs differ)``,
    the denominator by inclusion-exclusion over contractions of matched pairs.
    """
    _check_cap(g.n, cap, config.ind_cap())
    rewired = rewire(g, v1, v2, pairing)
    n1, n2 = g.neighbors(v1), g.neighbors(v2)
    r = len(n1)
    pairing = [(i, i) for i in range(r)] if pairing is None else list(pairing)
    pairs = [(n1[i], n2[j]) for i, j in pairing]

    lam_f, exact = _exact_activity(lam)
    eng = IndependenceEngine(g, lam_f)
    z_g = eng.z()
    ratio = IndependenceEngine(rewired, lam_f).z() / z_g
    rest = g.mask() & ~(1 << v1) & ~(1 << v2)
    z_rest = eng.z(rest)
    p_pair = z_rest / z_g
    inc_exc = Fraction(0)
    for size in range(r + 1):
        for chosen in itertools.combinations(pairs, size):
            nodes = [x for pr in chosen for x in pr]
            node_mask = sum(1 << x for x in nodes)
            if any(eng.nbr[x] & node_mask for x in nodes):
                continue
            closed = node_mask
            for x in nodes:
                closed |= eng.nbr[x]
            inc_exc += (-1) ** size * lam_f ** (2 * size) * eng.z(rest & ~closed)
    p_matched = inc_exc / z_rest
    if exact:
        passed = ratio == p_pair * p_matched
    else:
        passed = _rel_close(float(ratio), float(p_pair * p_matched), tol)
    report = EnergyShiftReport(ratio, p_pair, p_matched, passed)

    if q is not None:
        ccap = max(g.n, config.color_cap())
        z_col = count_proper_colorings(g, q, cap=ccap).value
        z_col_rewired = count_proper_colorings(rewired, q, cap=ccap).value
        adj = g.adjacency_sets()
        for v in (v1, v2):
            for u in adj.pop(v):
                adj[u].discard(v)
        profile = coloring_profile(adj, q, groups=[n1, n2])
        total = sum(profile.values())
        expectation = Fraction(
            sum((q - m[0].bit_count()) * (q - m[1].bit_count()) * c for m, c in profile.items()), total
        )
        distinct = Fraction(0)
        for size in range(r + 1):
            for chosen in itertools.combinations(pairs, size):
                merged = _union_find_merge(adj, chosen)
                if merged is not None:
                    distinct += (-1) ** size * _count_colorings_adj(merged, q, ccap)
        p_distinct = distinct / total
        if z_col_rewired == 0 or p_distinct == 0:
            raise PreconditionViolated("rewired graph has no proper colorings")
        color_ratio = Fraction(z_col, z_col_rewired)
        report.color_ratio = color_ratio
        report.color_expectation = expectation
        report.color_p_distinct = p_distinct
        report.color_passed = color_ratio == expectation / p_distinct
    return report


def forest_coloring_count(g: Graph, q: int) -> int:
    if not is_forest(g):
        raise InvalidParameters("graph is not a forest")
    return _count_colorings_adj(g.adjacency_sets(), q, 0)
