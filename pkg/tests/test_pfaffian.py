import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghostwalk.dynamics import annihilation_distribution, pairwise_coalescence_probability
from ghostwalk.errors import InvalidArgument
from ghostwalk.linalg import determinant
from ghostwalk.pfaffian import (
    build_antisymmetric,
    check_antisymmetric,
    pairwise_coalescence_weight,
    pairwise_weight,
    pfaffian,
)
from ghostwalk.spacetime import SpacetimeGraph, lattice_instance

F = Fraction
rationals = st.fractions(min_value=-4, max_value=4, max_denominator=5)


def antisym(upper, n):
    a = [[F(0)] * n for _ in range(n)]
    for (i, j), v in zip(itertools.combinations(range(n), 2), upper):
        a[i][j], a[j][i] = v, -v
    return a


def test_pfaffian_2x2():
    assert pfaffian([[0, F(3, 7)], [F(-3, 7), 0]]) == F(3, 7)


def test_pfaffian_empty():
    assert pfaffian([]) == 1


def test_pfaffian_4x4_three_matchings():
    # distinct primes keep every monomial identifiable
    a12, a13, a14, a23, a24, a34 = 2, 3, 5, 7, 11, 13
    a = antisym([a12, a13, a14, a23, a24, a34], 4)
    assert pfaffian(a) == a12 * a34 - a13 * a24 + a14 * a23


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 4, 6]).flatmap(lambda n: st.tuples(st.just(n), st.lists(rationals, min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))))
def test_pfaffian_squared_is_determinant(data):
    n, upper = data
    a = antisym(upper, n)
    assert pfaffian(a) ** 2 == determinant(a)


def test_odd_dimension_rejected():
    with pytest.raises(InvalidArgument):
        pfaffian(antisym([1, 2, 3], 3))


def test_antisymmetry_violation_rejected():
    with pytest.raises(InvalidArgument):
        pfaffian([[0, 1], [1, 0]])
    with pytest.raises(InvalidArgument):
        check_antisymmetric([[1, 0], [0, 0]])


def test_pairwise_weight_horizon_one():
    inst = lattice_instance((0, 2), 1, same_parity=False)
    assert pairwise_weight(inst.graph, (0, 0), (2, 0), inst.targets) == F(1, 4)


def test_pairwise_weight_disconnected():
    g = SpacetimeGraph(["x", "z", "y"], [("z", "y", 1)])
    assert pairwise_weight(g, "x", "z", ["y"]) == 0


def test_pairwise_weight_equals_meeting_probability():
    inst = lattice_instance((0, 2), 2)
    assert pairwise_weight(inst.graph, (0, 0), (2, 0), inst.targets) == pairwise_coalescence_probability((0, 2), 2)


def test_build_antisymmetric_shapes():
    inst = lattice_instance((0, 2), 2)
    a = build_antisymmetric(inst.graph, inst.sources, inst.targets)
    assert a[0][0] == a[1][1] == 0 and a[1][0] == -a[0][1]
    inst4 = lattice_instance((0, 2, 4, 6), 2)
    a4 = build_antisymmetric(inst4.graph, inst4.sources, inst4.targets)
    check_antisymmetric(a4)
    for i, j in itertools.combinations(range(4), 2):
        assert a4[i][j] == pairwise_weight(inst4.graph, inst4.sources[i], inst4.sources[j], inst4.targets)


@pytest.mark.parametrize("starts,t", [((0, 2), 1), ((0, 2), 2), ((0, 2), 3), ((0, 2, 4, 6), 1), ((0, 2, 4, 6), 2)])
def test_three_way_equality(starts, t):
    inst = lattice_instance(starts, t)
    pf = pairwise_coalescence_weight(inst.graph, inst.sources, inst.targets)
    complete = annihilation_distribution(starts, t).marginal_k(len(starts) // 2)
    assert pf == complete == pairwise_coalescence_probability(starts, t)


def test_far_sources_give_zero():
    inst = lattice_instance((0, 6), 2)
    assert pairwise_coalescence_weight(inst.graph, inst.sources, inst.targets) == 0


def test_odd_sources_rejected():
    inst = lattice_instance((0, 2, 4), 1)
    with pytest.raises(InvalidArgument):
        pairwise_coalescence_weight(inst.graph, inst.sources, inst.targets)
