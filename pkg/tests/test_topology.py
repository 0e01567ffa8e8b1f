from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from katetov.approximant import Approximant, Grid, build_approximant, regrid
from katetov.errors import DegenerateTargets, NoAdmissibleGamma
from katetov.functions import KatetovFunction
from katetov.isometry import full_isometry_group
from katetov.metric import validate
from katetov.topology import (
    build_lemma1_instance,
    choose_gamma,
    separation_violations,
    separator_function,
    verify_lemma1,
)

F = Fraction


@pytest.fixture(scope="module")
def grown_square():
    sq = validate(["a", "b", "c", "d"], [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]])
    return regrid(build_approximant(sq, 2, 2, Grid(1, 2)), Grid(12, 6))


def test_gamma_single_target_needs_diameter(path):
    with pytest.raises(DegenerateTargets):
        choose_gamma(path, ["a"], 1, 4)


def test_gamma_path_pair(path):
    # bounds: eps = 1, D/3 - 1/4 = 5/12, (2 - 1/4)/4 = 7/16; grid floor at q = 4
    assert choose_gamma(path, ["a", "c"], 1, 4) == F(1, 4)


def test_gamma_equals_small_eps(path):
    assert choose_gamma(path, ["a", "c"], F(1, 12), 12) == F(1, 12)


def test_gamma_coarse_grid_has_no_room(path):
    with pytest.raises(NoAdmissibleGamma):
        choose_gamma(path, ["a", "b"], 1, 1)


def test_separator_on_path(path):
    D, gamma = F(2), F(1, 4)
    f = separator_function(path, ["a", "c"], gamma, D)
    assert f("a") == D + gamma and f("c") == D + 2 * gamma
    assert abs(f("a") - f("c")) <= path.d("a", "c")
    assert all(v >= D + gamma for v in f.values)
    assert separation_violations(f, [0, 2], D, gamma) == []


def test_separation_violation_detected_on_uncontrolled_function(path):
    # b dips below D + gamma without lying near any earlier target
    f = KatetovFunction(path, (F(9, 4), F(2), F(5, 2)))
    bad = separation_violations(f, [0, 2], F(2), F(1, 4))
    assert bad[0] == {"i": 1, "x": "b", "f": "2"}


def test_path_single_target(path):
    X = Approximant(path, Grid(4, 2))
    G = full_isometry_group(path)
    inst = build_lemma1_instance(X, G, ["a"], 1)
    rep = verify_lemma1(inst)
    assert rep["degenerate"] and rep["passed"]
    assert rep["nbhd_y_size"] == 1   # the swap moves a by 2


def test_trivial_group(singleton):
    X = Approximant(singleton, Grid(4, 2))
    G = full_isometry_group(singleton)
    assert verify_lemma1(build_lemma1_instance(X, G, ["x"], 1))["passed"]


def test_instance_on_square(grown_square):
    X = grown_square
    G = full_isometry_group(X.space)
    inst = build_lemma1_instance(X, G, ["a", "c"], F(1, 2))
    rep = verify_lemma1(inst, strict=True)
    assert rep["passed"]
    # min(1/2, 2/3 - 1/12, (2 - 1/12)/4) = 23/48, floored to the 1/12 grid
    assert rep["gamma"] == "5/12"
    assert set(rep["steps"]) >= {"separation_property", "injection", "brute_force_containment"}


def test_eps_at_most_gamma_monotone(grown_square):
    X = grown_square
    G = full_isometry_group(X.space)
    g_small = build_lemma1_instance(X, G, ["a", "c"], F(1, 12)).gamma
    g_big = build_lemma1_instance(X, G, ["a", "c"], 2).gamma
    assert g_small <= g_big


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_containment_on_random_targets(grown_square, data):
    X = grown_square
    G = full_isometry_group(X.space)
    n = len(X.space)
    size = data.draw(st.integers(1, 3))
    targets = data.draw(st.lists(st.integers(0, n - 1), min_size=size, max_size=size, unique=True))
    eps = data.draw(st.sampled_from([F(1, 4), F(1, 2), F(1), F(2)]))
    try:
        inst = build_lemma1_instance(X, G, targets, eps)
    except NoAdmissibleGamma:
        return
    rep = verify_lemma1(inst)
    assert rep["passed"], {k: v for k, v in rep["steps"].items() if not v["passed"]}
