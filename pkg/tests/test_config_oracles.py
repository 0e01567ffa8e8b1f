import pytest

from katetov.approximant import Grid
from katetov.config import RunConfig
from katetov.functions import grid_levels, is_katetov
from katetov.oracles import grid_metric_spaces, lipschitz_grid_extensions, one_point_property_bruteforce


def test_config_defaults_and_serialization():
    cfg = RunConfig()
    assert cfg.grid == Grid(2, 2) and cfg.k == 2 and cfg.rounds == 2
    out = cfg.to_json()
    assert out["grid"] == "2:2"
    assert "output" not in out and "verbosity" not in out and "jobs" not in out


def test_config_budget_from_environment(monkeypatch):
    monkeypatch.setenv("KATETOV_SIZE_BUDGET", "17")
    assert RunConfig().size_budget == 17


@pytest.mark.parametrize("kw", [{"k": -1}, {"size_budget": 0}, {"search_budget": 0}, {"jobs": 0}])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        RunConfig(**kw)


def test_thirds():
    RunConfig(grid=Grid(12, 6)).require_thirds()
    with pytest.raises(ValueError):
        RunConfig().require_thirds()


def test_grid_space_counts():
    # up to isomorphism on values {1/2, 1, 3/2, 2}
    assert len(list(grid_metric_spaces(1, 2, 2))) == 1
    assert len(list(grid_metric_spaces(2, 2, 2))) == 4
    three = list(grid_metric_spaces(3, 2, 2))
    # an isometry class of triangles is a sorted triple a <= b <= c with c <= a + b
    triples = [(a, b, c) for a in range(1, 5) for b in range(a, 5) for c in range(b, 5) if c <= a + b]
    assert len(three) == len(triples)
    assert all(is_katetov(s, s.dist[0]) for s in three)


def test_lipschitz_extensions_contain_katetov_extension(path):
    A = path.subspace(["a", "c"])
    exts = list(lipschitz_grid_extensions(path, A, [2, 1], 1, 2))
    assert (2, 2, 1) in [tuple(e) for e in exts]
    assert all(e[0] == 2 and e[2] == 1 for e in exts)


def test_bruteforce_property(pair2, singleton):
    assert not one_point_property_bruteforce(pair2, 1, 1, 2)
    assert one_point_property_bruteforce(singleton, 0, 1, 2)
    assert grid_levels(1, 2) == [0, 1, 2]
