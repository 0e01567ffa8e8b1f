from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from katetov.errors import CapTooSmall, LengthMismatch, NotKatetov, NotKatetovOnA, SpaceMismatch
from katetov.functions import (
    KatetovFunction,
    enumerate_profiles,
    grid_katetov_functions,
    grid_levels,
    is_controlled_by,
    is_katetov,
    katetov_extension,
    kuratowski,
    one_point_extension,
    sup_metric,
    translate,
    truncate,
)
from katetov.isometry import full_isometry_group
from katetov.metric import Subspace
from katetov.oracles import lipschitz_grid_extensions

from conftest import metric_spaces

F = Fraction


def test_kuratowski_profile_is_katetov(square):
    for x in square.points:
        assert is_katetov(square, square.row(x))


def test_constant_on_pair(pair2):
    assert is_katetov(pair2, [1, 1])
    verdict = is_katetov(pair2, ["9/10", "9/10"])
    assert not verdict and verdict.witness["inequality"] == "katetov"


def test_lipschitz_failure_reported(path):
    verdict = is_katetov(path, [0, 2, 1])
    assert verdict.witness == {"x": "a", "y": "b", "inequality": "lipschitz"}


def test_constant_zero_on_singleton(singleton):
    assert is_katetov(singleton, [0])


def test_length_mismatch(path):
    with pytest.raises(LengthMismatch):
        is_katetov(path, [1, 1])


def test_function_rejects_non_katetov(pair2):
    with pytest.raises(NotKatetov):
        KatetovFunction(pair2, (F(0), F(0)))


def test_extension_from_one_point_is_distance_profile(square):
    f = katetov_extension(square, square.subspace(["b"]), [0])
    assert f.values == square.row("b")


def test_extension_from_everything_is_identity(path):
    f = katetov_extension(path, path.all_points(), [1, 2, 3])
    assert f.values == (1, 2, 3)


def test_path_extension_values(path):
    f = katetov_extension(path, path.subspace(["a", "c"]), [2, 1])
    assert f.values == (2, 2, 1)


def test_extension_rejects_bad_g(path):
    with pytest.raises(NotKatetovOnA):
        katetov_extension(path, path.subspace(["a", "c"]), [0, 0])
    with pytest.raises(NotKatetovOnA):
        katetov_extension(path, Subspace(path, ()), [])


def test_control(path, square):
    f = KatetovFunction(path, (2, 2, 1))
    assert is_controlled_by(f, path.subspace(["a", "c"]))
    g = KatetovFunction(path, (2, F(3, 2), 1))
    assert not is_controlled_by(g, path.subspace(["a", "c"]))
    assert is_controlled_by(g, path.all_points())
    assert is_controlled_by(kuratowski(square, "c"), square.subspace(["c"]))


def test_sup_metric_examples(pair2, path):
    f, g = kuratowski(pair2, "a"), kuratowski(pair2, "b")
    assert sup_metric(f, f) == 0
    assert sup_metric(f, g) == 2
    assert abs(f("b") - g("b")) <= f("a") + g("a")
    assert sup_metric(kuratowski(path, "a"), kuratowski(path, "c")) == 2
    with pytest.raises(SpaceMismatch):
        sup_metric(f, kuratowski(path, "a"))


def test_kuratowski_values(singleton, pair2):
    assert kuratowski(singleton, "x").values == (0,)
    assert kuratowski(pair2, "a").values == (0, 2)


def test_one_point_extension_examples(singleton, pair2):
    grown = one_point_extension(singleton, KatetovFunction(singleton, (F(3, 2),)), "y")
    assert grown.d("x", "y") == F(3, 2)
    mid = one_point_extension(pair2, KatetovFunction(pair2, (1, 1)), "m")
    assert mid.d("m", "a") == mid.d("m", "b") == 1 and not mid.pseudometric
    dup = one_point_extension(pair2, kuratowski(pair2, "a"), "a2")
    assert dup.pseudometric and dup.d("a", "a2") == 0


def test_truncate_examples(pair2):
    f = KatetovFunction(pair2, (3, 5))
    assert truncate(f, 2).values == (2, 2)
    assert truncate(f, 5) == f
    c = KatetovFunction(pair2, (2, 2))
    assert truncate(c, 2) == c
    with pytest.raises(CapTooSmall):
        truncate(f, 1)


def test_translate_is_left_action(square):
    G = full_isometry_group(square)
    f = katetov_extension(square, square.subspace(["a", "b"]), [1, 2])
    for g in G:
        for h in G:
            gh = tuple(g[h[i]] for i in range(len(square)))
            assert translate(translate(f, h), g) == translate(f, gh)


def test_grid_levels():
    assert grid_levels(2, 1) == [0, F(1, 2), 1]


def test_enumeration_is_lexicographic_and_complete(path):
    got = list(enumerate_profiles(path.dist, grid_levels(1, 2)))
    assert got == sorted(got)
    brute = [(a, b, c) for a in range(3) for b in range(3) for c in range(3)
             if is_katetov(path, [a, b, c])]
    assert got == brute


@settings(max_examples=60, deadline=None)
@given(metric_spaces(max_points=4), st.data())
def test_extension_is_largest_lipschitz_extension(space, data):
    n = len(space)
    idx = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    A = Subspace(space, tuple(sorted(idx)))
    gs = list(enumerate_profiles(A.induced().dist, grid_levels(2, 2)))
    g = data.draw(st.sampled_from(gs))
    f = katetov_extension(space, A, g)
    assert f.restrict(A) == tuple(g)
    assert is_katetov(space, f.values)
    assert is_controlled_by(f, A)
    for h in lipschitz_grid_extensions(space, A, g, 2, 2):
        assert all(a <= b for a, b in zip(h, f.values))


@settings(max_examples=60, deadline=None)
@given(metric_spaces(max_points=5))
def test_kuratowski_embedding_is_isometric(space):
    for x in space.points:
        for y in space.points:
            assert sup_metric(kuratowski(space, x), kuratowski(space, y)) == space.d(x, y)


@settings(max_examples=40, deadline=None)
@given(metric_spaces(max_points=4), st.data())
def test_truncation_and_one_point_extension_stay_metric(space, data):
    fs = list(grid_katetov_functions(space, 2, 3))
    f = data.draw(st.sampled_from(fs))
    cap = data.draw(st.sampled_from([c for c in grid_levels(2, 3) if c >= space.diameter() and c > 0]))
    t = truncate(f, cap)
    assert is_katetov(space, t.values)
    grown = one_point_extension(space, t, "new")
    assert grown.pseudometric == any(v == 0 for v in t.values)


@settings(max_examples=40, deadline=None)
@given(metric_spaces(max_points=4), st.data())
def test_sup_metric_bounded_by_values_at_any_point(space, data):
    fs = list(grid_katetov_functions(space, 2, 2))
    f, g = data.draw(st.sampled_from(fs)), data.draw(st.sampled_from(fs))
    for x0 in range(len(space)):
        assert sup_metric(f, g) <= f.values[x0] + g.values[x0]


def test_json_roundtrip(square):
    f = kuratowski(square, "a")
    assert KatetovFunction.from_json(f.to_json()) == f
    assert KatetovFunction.from_json(f.to_json(inline_space=False), square) == f
