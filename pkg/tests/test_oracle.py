import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_graph
from girthcount.errors import EdgeExists, InvalidParameters, PreconditionViolated, TooLarge
from girthcount.generators import complete, cycle, named, path, petersen, random_regular, random_tree
from girthcount.graph import Graph, rewire
from girthcount.oracle import (
    brute_force_colorings,
    count_proper_colorings,
    deletion_contraction,
    exact_marginal_ind,
    expected_used_colors,
    forest_coloring_count,
    independence_polynomial,
    naive_independence_polynomial,
    transfer_matrix_cycle,
    verify_cavity_identity,
    verify_color_identity,
    verify_energy_shift,
)

STAR = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])


def test_independence_examples():
    assert independence_polynomial(complete(2)).value == 3
    assert independence_polynomial(cycle(5)).value == 11
    assert independence_polynomial(Graph.from_edges(1, []), Fraction(3, 7)).value == Fraction(10, 7)
    assert independence_polynomial(petersen()).value == 76
    assert independence_polynomial(named("mcgee")).value == 34305
    assert isinstance(independence_polynomial(cycle(5), 0.5).value, float)


def test_colorings_examples():
    assert count_proper_colorings(complete(3), 3).value == 6
    assert count_proper_colorings(cycle(4), 3).value == 18
    assert count_proper_colorings(path(2), 7).value == 42
    assert count_proper_colorings(petersen(), 3).value == 120
    assert count_proper_colorings(complete(4), 3).value == 0
    # formulas bypass the cap for cycles and trees
    assert count_proper_colorings(cycle(200), 3, cap=0).value == 2**200 + 2
    assert forest_coloring_count(random_tree(300, 4, 1), 5) == 5 * 4**299


def test_caps(monkeypatch):
    with pytest.raises(TooLarge):
        independence_polynomial(cycle(40))
    monkeypatch.setenv("GIRTHCOUNT_IND_CAP", "40")
    assert independence_polynomial(cycle(40)).value == transfer_matrix_cycle(40).value
    with pytest.raises(TooLarge):
        count_proper_colorings(random_regular(18, 3, 1), 4)
    monkeypatch.setenv("GIRTHCOUNT_COLOR_CAP", "nope")
    with pytest.raises(ValueError):
        count_proper_colorings(random_regular(18, 3, 1), 4)


def test_marginals():
    assert exact_marginal_ind(complete(2), 0) == Fraction(2, 3)
    assert exact_marginal_ind(Graph.from_edges(1, []), 0) == Fraction(1, 2)
    assert exact_marginal_ind(STAR, 0) == Fraction(8, 9)


def test_expected_used_colors():
    assert expected_used_colors(path(2), 0, 5) == 1
    assert expected_used_colors(STAR, 0, 3) == Fraction(19, 9)
    assert expected_used_colors(complete(3), 0, 3) == 2


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 11), st.floats(0.05, 0.9), st.integers(0, 10**6),
       st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(5, 3)]))
def test_branching_matches_naive(n, p, seed, lam):
    g = random_graph(n, p, random.Random(seed))
    assert independence_polynomial(g, lam).value == naive_independence_polynomial(g, lam)


def test_transfer_matrix_matches_branching():
    lucas = [None, 1, 3, 4, 7, 11, 18, 29]
    for n in range(3, 8):
        assert transfer_matrix_cycle(n).value == lucas[n]
    for n in range(3, 27):
        for lam in (Fraction(1), Fraction(2, 3)):
            assert transfer_matrix_cycle(n, lam).value == independence_polynomial(cycle(n), lam).value
    ratio = transfer_matrix_cycle(61).value / transfer_matrix_cycle(60).value
    assert float(ratio) == pytest.approx((1 + 5**0.5) / 2, rel=1e-12)
    with pytest.raises(InvalidParameters):
        transfer_matrix_cycle(2)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.floats(0.1, 0.8), st.integers(0, 10**6), st.integers(1, 5))
def test_colorings_match_deletion_contraction(n, p, seed, q):
    g = random_graph(n, p, random.Random(seed))
    value = count_proper_colorings(g, q).value
    assert value == deletion_contraction(g, q)
    if n <= 6:
        assert value == brute_force_colorings(g, q)


def test_cavity_identity_examples():
    empty = Graph.from_edges(4, [])
    rep = verify_cavity_identity(empty, Fraction(1, 2))
    assert rep.passed and rep.product == Fraction(3, 2) ** 4
    rep = verify_cavity_identity(cycle(5), 1, order=[4, 2, 0, 1, 3])
    assert rep.passed and rep.product == 11 and rep.max_step_deviation == 0
    assert verify_cavity_identity(petersen(), 1.5).passed


def test_color_identity_examples():
    rep = verify_color_identity(complete(3), 3)
    assert rep.factors == [1, 2, 3] and rep.product == 6 and rep.passed
    tree = random_tree(9, 3, 4)
    rep = verify_color_identity(tree, 4, order=[8, 0, 3, 5, 1, 7, 2, 6, 4])
    assert rep.passed and rep.product == 4 * 3**8
    with pytest.raises(InvalidParameters):
        verify_color_identity(complete(3), 2)


def test_energy_shift_cycle():
    rep = verify_energy_shift(cycle(12), 0, 6, 1, q=3)
    assert rep.passed and rep.color_passed
    assert rep.ratio == Fraction(independence_polynomial(cycle(5)).value ** 2, 322)
    zero = verify_energy_shift(cycle(12), 0, 6, 0)
    assert zero.ratio == zero.p_pair_out == zero.p_matched == 1
    assert verify_energy_shift(cycle(12), 0, 6, 0.75).passed


def rewirable_pair(g):
    for v1 in range(g.n):
        for v2 in range(v1 + 1, g.n):
            try:
                rewire(g, v1, v2)
            except (PreconditionViolated, EdgeExists):
                continue
            return v1, v2
    return None


def test_energy_shift_regular():
    g = random_regular(12, 3, 4)
    v1, v2 = rewirable_pair(g)
    rep = verify_energy_shift(g, v1, v2, Fraction(1, 2), q=4)
    assert rep.all_passed
    with pytest.raises(PreconditionViolated):
        verify_energy_shift(g, 0, g.neighbors(0)[0])
