import json
import math
import random
from fractions import Fraction

import pytest

from conftest import random_graph
from girthcount.analytic import energy_shift
from girthcount.cavity import (
    CAVITY,
    EXACT_FALLBACK,
    count_colorings,
    count_independent_sets,
    log_fraction,
    rewire_count_demo,
)
from girthcount.errors import PreconditionViolated, TooFewColors
from girthcount.generators import complete, cycle, named, path, petersen, random_regular, random_tree
from girthcount.graph import Graph, girth_of
from girthcount.oracle import independence_polynomial, transfer_matrix_cycle

JSON_KEYS = ["n", "girth", "method", "lambda", "log_z", "log_z_per_node",
             "certified_lo", "certified_hi", "epsilon", "depth"]


def test_cycle_60():
    est = count_independent_sets(cycle(60), 0.2)
    exact = log_fraction(Fraction(transfer_matrix_cycle(60).value))
    assert est.method == CAVITY and est.depth_used == 29
    assert abs(est.log_z_per_node - math.log((1 + 5**0.5) / 2)) < 0.01
    assert est.certified_lo <= exact <= est.certified_hi
    assert est.log_z == pytest.approx(28.8727095036, abs=1e-9)


def test_single_node_and_k4():
    est = count_independent_sets(Graph.from_edges(1, []), 0.5)
    assert est.log_z == pytest.approx(math.log(2), abs=1e-15)
    assert est.certified_lo <= est.log_z <= est.certified_hi
    assert est.certified_hi - est.certified_lo < 1e-14
    k4 = count_independent_sets(complete(4), 0.01)
    assert k4.method == EXACT_FALLBACK and k4.log_z == pytest.approx(math.log(5), abs=1e-15)


def test_factors_sum_to_log_z():
    for g, eps in [(cycle(30), 0.5), (petersen(), 0.5), (petersen(), 2.0)]:
        est = count_independent_sets(g, eps)
        assert math.fsum(f for _, f in est.per_node_factors) == pytest.approx(est.log_z, abs=1e-10)
        assert sorted(v for v, _ in est.per_node_factors) == list(range(g.n))


def test_forest_is_exact():
    g = random_tree(30, 4, 3)
    est = count_independent_sets(g, 0.1, lam=Fraction(1, 2), order=list(range(29, -1, -1)))
    exact = log_fraction(independence_polynomial(g, Fraction(1, 2)).value)
    assert est.method == CAVITY and est.log_z == pytest.approx(exact, abs=1e-10)
    assert est.certified_lo <= exact <= est.certified_hi
    assert est.certified_hi - est.certified_lo < 1e-9


def test_certified_soundness_random_corpus():
    rng = random.Random(11)
    checked = 0
    while checked < 25:
        n = rng.randint(8, 20)
        g = random_graph(n, rng.uniform(0.1, 0.3), rng)
        if girth_of(g.adjacency) < 5:
            continue
        lam = rng.choice([Fraction(1, 2), Fraction(1), Fraction(3)])
        est = count_independent_sets(g, 2.0, lam=lam)
        exact = log_fraction(independence_polynomial(g, lam).value)
        assert est.method == CAVITY
        assert est.certified_lo <= exact <= est.certified_hi
        checked += 1


def test_fallback_beyond_cap_warns():
    g = random_regular(20, 3, 2)
    est = count_independent_sets(g, 0.01, cap=10)
    assert est.method == CAVITY and est.warning
    assert est.certified_lo <= log_fraction(independence_polynomial(g).value) <= est.certified_hi


def test_depth_zero_has_unbounded_interval():
    est = count_independent_sets(complete(5), 0.1, cap=3)
    assert est.depth_used == 0 and est.certified_hi == math.inf
    data = est.to_json_dict()
    assert data["certified_hi"] is None and data["depth"] == 0


def test_json_schema():
    data = count_independent_sets(cycle(12), 0.5).to_json_dict()
    assert list(data) == JSON_KEYS
    json.dumps(data)
    colors = count_colorings(cycle(12), 3).to_json_dict()
    assert list(colors) == ["n", "girth", "method", "q", "log_z", "log_z_per_node",
                            "certified_lo", "certified_hi", "epsilon", "depth"]


def test_count_colorings_trees_exact():
    for seed in range(5):
        g = random_tree(12, 3, seed)
        expected = math.log(4) + 11 * math.log(3)
        order = list(range(12))
        random.Random(seed).shuffle(order)
        assert count_colorings(g, 4, order).log_z == pytest.approx(expected, abs=1e-12)


def test_count_colorings_cycles_and_errors():
    assert count_colorings(cycle(9), 3).log_z == pytest.approx(9 * math.log(2), abs=1e-12)
    assert count_colorings(Graph.from_edges(1, []), 5).log_z == pytest.approx(math.log(5))
    with pytest.raises(TooFewColors):
        count_colorings(complete(4), 3)


def test_rewire_demo_cycle():
    report = rewire_count_demo(cycle(24), 1, 4)
    assert len(report.steps) == 1
    step = report.steps[0]
    exact = log_fraction(Fraction(independence_polynomial(cycle(11)).value ** 2, transfer_matrix_cycle(24).value))
    assert step.measured == pytest.approx(exact, abs=1e-12)
    assert step.measured == pytest.approx(math.log(energy_shift(2, 1)), abs=1e-4)
    assert report.limit_shift == pytest.approx(report.accumulated_predicted, abs=1e-12)


def test_rewire_demo_edge_cases():
    assert rewire_count_demo(cycle(8), 1, 4).steps == []
    report = rewire_count_demo(named("tutte_coxeter"), 1, 4, cap=10)
    assert all(s.measured is None for s in report.steps)
    with pytest.raises(PreconditionViolated):
        rewire_count_demo(path(5), 1, 4)
    with pytest.raises(PreconditionViolated):
        rewire_count_demo(petersen(), 1, 6)
