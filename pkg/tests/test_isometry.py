from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from katetov.approximant import Grid, build_approximant
from katetov.errors import GroupMismatch, NotAGroup, ParseError, SearchBudgetExceeded
from katetov.isometry import (
    PartialIsometry,
    are_disjoint,
    compose,
    extend_partial_isometry,
    format_perm,
    full_isometry_group,
    group_from_generators,
    identity,
    inverse,
    inverse_set,
    is_isometry,
    is_subset,
    nbhd,
    parse_perm,
    power,
    product,
    verify_group,
)
from katetov.metric import validate
from katetov.oracles import isometries_by_filter

from conftest import metric_spaces


def test_group_orders(singleton, triangle, path, square):
    assert len(full_isometry_group(singleton)) == 1
    assert len(full_isometry_group(triangle)) == 6
    G = full_isometry_group(path)
    assert [format_perm(g, path.points) for g in G] == ["()", "(a c)"]
    assert len(full_isometry_group(square)) == 8


def test_cycle_notation_roundtrip(square):
    for g in full_isometry_group(square):
        assert parse_perm(format_perm(g, square.points), square) == g
    assert parse_perm("()", square) == identity(4)
    for bad in ["(a b", "(a b)(b c)", "a b"]:
        with pytest.raises(ParseError):
            parse_perm(bad, square)


def test_composition_convention():
    a, b = (1, 2, 0), (1, 0, 2)
    assert compose(a, b) == tuple(a[b[i]] for i in range(3))
    assert compose(a, inverse(a)) == identity(3)


def test_verify_group_rejects_non_groups():
    with pytest.raises(NotAGroup):
        verify_group([(0, 1, 2), (1, 2, 0)])
    verify_group([(0, 1, 2), (1, 2, 0), (2, 0, 1)])


def test_search_budget(square):
    with pytest.raises(SearchBudgetExceeded):
        full_isometry_group(square, search_budget=2)


def test_generated_subgroup(square):
    G = group_from_generators(square, [parse_perm("(a b c d)", square)])
    assert len(G) == 4


def test_partial_isometry_extension(triangle, square):
    ident = extend_partial_isometry(triangle, PartialIsometry(triangle, (("a", "a"), ("b", "b"))), 3)
    assert ident.ok and sorted(ident.phi.pairs) == [(0, 0), (1, 1), (2, 2)]
    res = extend_partial_isometry(triangle, PartialIsometry(triangle, (("a", "b"),)), 3)
    assert res.ok and is_isometry(triangle, tuple(t for _, t in sorted(res.phi.pairs)))
    res = extend_partial_isometry(square, PartialIsometry(square, (("a", "b"),)), 4)
    assert res.ok


def test_partial_isometry_must_preserve_distances(path):
    with pytest.raises(ValueError):
        PartialIsometry(path, (("a", "a"), ("b", "c")))


def test_extension_failure_is_reported():
    # a, b are the only pair at distance 1; sending c to a leaves b without a preimage
    space = validate(["a", "b", "c", "d"],
                     [[0, 1, 2, 2], [1, 0, 2, 2], [2, 2, 0, 2], [2, 2, 2, 0]])
    res = extend_partial_isometry(space, PartialIsometry(space, (("c", "a"),)), 4)
    assert not res.ok
    assert res.failure == {"direction": "back", "point": "b", "A": ["c", "a"], "g": ["1", "2"]}


def test_certified_approximant_extends_small_maps(singleton):
    X = build_approximant(singleton, 2, 2, Grid(1, 2))
    assert X.witness_k >= 1
    # |pairs| = 0 < k: one step in each direction always succeeds
    res = extend_partial_isometry(X.space, PartialIsometry(X.space, ()), 2)
    assert res.ok


def test_nbhd_examples(path, square):
    G = full_isometry_group(path)
    assert nbhd(G, [("a", 1)]).members == {identity(3)}
    assert nbhd(G, [("a", 3)]).members == G.members()
    assert nbhd(G, [("b", Fraction(1, 2))]).members == G.members()
    with pytest.raises(ValueError):
        nbhd(G, [("a", 0)])


def test_set_algebra_examples(path):
    G = full_isometry_group(path)
    e, s = G.elements
    A = {e, s}
    assert product(G, {e}, A) == A
    assert e in product(G, A, inverse_set(G, A))
    assert are_disjoint(G, product(G, {s}, {e}), product(G, {e}, {e}))
    assert power(G, {s}, 2) == {e}
    assert is_subset(G, {e}, A)
    with pytest.raises(GroupMismatch):
        G.check([(0, 2, 1)])


@settings(max_examples=50, deadline=None)
@given(metric_spaces(max_points=6))
def test_pruned_search_matches_filter(space):
    G = full_isometry_group(space)
    assert list(G.elements) == isometries_by_filter(space)


@settings(max_examples=30, deadline=None)
@given(metric_spaces(max_points=5), st.data())
def test_nbhd_sets_are_symmetric_and_intersect(space, data):
    G = full_isometry_group(space)
    n = len(space)
    x, y = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1))
    r, s = Fraction(data.draw(st.integers(1, 8)), 2), Fraction(data.draw(st.integers(1, 8)), 2)
    V, W = nbhd(G, [(x, r)]).members, nbhd(G, [(y, s)]).members
    assert inverse_set(G, V) == V
    assert nbhd(G, [(x, r), (y, s)]).members == V & W
    assert G.identity in V


@settings(max_examples=30, deadline=None)
@given(metric_spaces(max_points=5), st.data())
def test_products_associate(space, data):
    G = full_isometry_group(space)
    els = list(G.elements)
    sub = st.sets(st.sampled_from(els))
    A, B, C = data.draw(sub), data.draw(sub), data.draw(sub)
    assert product(G, product(G, A, B), C) == product(G, A, product(G, B, C))
    assert inverse_set(G, product(G, A, B)) == product(G, inverse_set(G, B), inverse_set(G, A))


def test_orbit(square):
    G = full_isometry_group(square)
    assert G.orbit("a") == [0, 1, 2, 3]
