import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from girthcount.graph import Graph
from girthcount.oracle import brute_force_colorings, exact_marginal_ind
from girthcount.trees import (
    DECAY_CSV_HEADER,
    IN,
    OUT,
    RootedTree,
    counting_tree_marginal,
    decay_experiment,
    decay_rows_to_csv,
    exact_tree_color_marginal,
    interval_bounds,
    interval_node_bounds,
    marginal_with_boundary,
    random_rooted_tree,
    regular_tree,
)


def tree_graph(tree):
    return Graph.from_edges(tree.size, tree.edges())


def test_small_marginals_exact():
    one_child = RootedTree.from_parents([-1, 0])
    assert counting_tree_marginal(one_child, 1) == Fraction(2, 3)
    star = RootedTree.from_parents([-1, 0, 0, 0])
    assert counting_tree_marginal(star, 1) == Fraction(8, 9)
    assert counting_tree_marginal(RootedTree.from_parents([-1]), Fraction(1, 2)) == Fraction(2, 3)


def test_rejects_bad_trees():
    with pytest.raises(ValueError):
        RootedTree.from_parents([0])
    with pytest.raises(ValueError):
        RootedTree.from_parents([-1, 2, 0])
    with pytest.raises(ValueError):
        counting_tree_marginal(RootedTree.from_parents([-1]), 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(2, 4), st.integers(0, 10**6),
       st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(2)]))
def test_free_marginal_equals_oracle(depth, max_degree, seed, lam):
    tree = random_rooted_tree(depth, max_degree, random.Random(seed), max_nodes=14)
    assert counting_tree_marginal(tree, lam) == exact_marginal_ind(tree_graph(tree), 0, lam)


def test_boundary_conditions():
    tree = regular_tree(3, 2)
    bnd = tree.boundary
    all_in = marginal_with_boundary(tree, 1, {v: IN for v in bnd})
    all_out = marginal_with_boundary(tree, 1, {v: OUT for v in bnd})
    # children see probability 1/(1+0)=1 under all-IN, 1/2 under all-OUT
    assert all_in == Fraction(1, 2)
    assert all_out == Fraction(1, 1 + Fraction(1, 8))
    with pytest.raises(ValueError):
        marginal_with_boundary(tree, 1, {0: IN})
    with pytest.raises(ValueError):
        marginal_with_boundary(tree, 1, {bnd[0]: 7})


@pytest.mark.parametrize("r,depth", [(3, 1), (3, 2), (3, 3), (4, 2), (4, 3), (2, 5)])
def test_interval_is_tight_on_complete_trees(r, depth):
    tree = regular_tree(r, depth)
    bnd = tree.boundary
    extremes = [marginal_with_boundary(tree, 1, {v: s for v in bnd}) for s in (IN, OUT)]
    box = interval_bounds(tree, 1)
    assert (box.lo, box.hi) == (min(extremes), max(extremes))


def test_interval_contains_every_boundary_condition():
    tree = regular_tree(3, 2, root_degree=2)
    bnd = tree.boundary
    box = interval_bounds(tree, Fraction(3, 2))
    for states in itertools.product((IN, OUT, None), repeat=len(bnd)):
        b = {v: s for v, s in zip(bnd, states) if s is not None}
        assert marginal_with_boundary(tree, Fraction(3, 2), b) in box


def test_float_interval_encloses_exact():
    rng = random.Random(9)
    for _ in range(30):
        tree = random_rooted_tree(rng.randint(1, 7), 4, rng)
        exact = interval_node_bounds(tree, 1)
        approx = interval_node_bounds(tree, 1.0)
        for e, a in zip(exact, approx):
            assert a.lo <= e.lo and e.hi <= a.hi


def test_boundary_free_tree_interval_is_degenerate():
    tree = RootedTree.from_parents([-1, 0, 0, 1], depth=5)
    box = interval_bounds(tree, 1)
    assert box.lo == box.hi == counting_tree_marginal(tree, 1)


def test_color_marginal_free_tree_is_uniform():
    dist = exact_tree_color_marginal(regular_tree(3, 3), 4)
    assert dist == [Fraction(1, 4)] * 4


def test_color_marginal_matches_brute_force():
    tree = regular_tree(3, 2, root_degree=2)
    q = 4
    b = {v: i % q for i, v in enumerate(tree.boundary)}
    edges = tree.edges()
    counts = [0] * q
    for colors in itertools.product(range(q), repeat=tree.size):
        if all(colors[a] != colors[c] for a, c in edges) and all(colors[v] == c for v, c in b.items()):
            counts[colors[0]] += 1
    total = sum(counts)
    assert exact_tree_color_marginal(tree, q, b) == [Fraction(c, total) for c in counts]
    g = Graph.from_edges(tree.size, edges)
    assert brute_force_colorings(g, q) == q * (q - 1) ** (tree.size - 1)


def test_color_marginal_errors():
    tree = regular_tree(3, 1)
    with pytest.raises(ValueError):
        exact_tree_color_marginal(tree, 3)
    with pytest.raises(ValueError):
        exact_tree_color_marginal(tree, 4, {1: 9})


def test_regular_tree_sizes():
    assert regular_tree(3, 3).size == 1 + 3 + 6 + 12
    assert regular_tree(4, 2, root_degree=1).size == 1 + 1 + 3
    assert len(regular_tree(3, 3).boundary) == 12


def test_decay_experiment_rows():
    rows = decay_experiment(3, 5, "ind", 1, samples=4, seed=1)
    assert [r.depth for r in rows] == [1, 2, 3, 4, 5]
    widths = [r.certified_width for r in rows]
    assert widths == sorted(widths, reverse=True)
    assert all(r.max_dev <= r.certified_width + 1e-15 for r in rows)
    csv = decay_rows_to_csv(rows)
    assert csv.splitlines()[0] == DECAY_CSV_HEADER
    assert csv.splitlines()[1] == "1,ind,1,0.5,0.5"
    color = decay_experiment(3, 3, "color", 4, samples=2)
    assert 1 / 12 <= color[0].max_dev <= 0.75 and color[0].certified_width is None
    with pytest.raises(ValueError):
        decay_experiment(3, 2, "potts", 1)
