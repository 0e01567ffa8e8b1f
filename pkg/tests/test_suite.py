import itertools

from katetov.approximant import Grid, build_approximant
from katetov.config import RunConfig
from katetov.isometry import full_isometry_group
from katetov.suite import (
    _map,
    _theorem4_on,
    canonical_json,
    criterion_certification,
    criterion_isometry_oracle,
    lemma1_targets,
    random_space,
    seed_space,
)


def test_orbit_representatives_cover_every_tuple():
    X = build_approximant(seed_space("square"), 2, 1, Grid(1, 2))
    G = full_isometry_group(X.space)
    n = len(X.space)
    kept = set(lemma1_targets(G, n))
    for t in itertools.permutations(range(n), 2):
        assert any(tuple(g[i] for i in t) in kept for g in G)
    for t in itertools.combinations(range(n), 3):
        assert any(tuple(sorted(g[i] for i in t)) in kept for g in G)


def test_random_spaces_are_valid_and_seeded():
    import random
    a = [random_space(random.Random(5), 5, k) for k in range(4)]
    b = [random_space(random.Random(5), 5, k) for k in range(4)]
    assert a == b


def test_parallel_map_matches_serial():
    X = build_approximant(seed_space("singleton"), 2, 2, Grid(1, 2))
    items = [("singleton", X, 0), ("singleton", X, 1)]
    assert _map(_theorem4_on, items, 2) == _map(_theorem4_on, items, 1)


def test_criteria_are_repeatable():
    cfg = RunConfig(grid=Grid(1, 2))
    assert canonical_json(criterion_isometry_oracle(cfg, 12)) == canonical_json(criterion_isometry_oracle(cfg, 12))
    c2 = criterion_certification(cfg)
    assert c2["passed"] and c2["witness_k"] == 1 and c2["rechecks_agree"]
