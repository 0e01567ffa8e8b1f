"""The acceptance battery: one function per criterion, each returning a JSON-ready dict."""

from __future__ import annotations

import hashlib
import itertools
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .approximant import Approximant, Grid, build_approximant, check_one_point_property, regrid
from .config import RunConfig
from .errors import KatetovError, SizeBudgetExceeded
from .fsin import (
    corrupt,
    default_basis,
    discrete_reduction_check,
    displacement_bound_check,
    random_katetov,
    separated_subset,
    theorem4_construct,
    verify_theorem4,
)
from .functions import enumerate_profiles, grid_levels, katetov_extension, kuratowski
from .isometry import displacement, full_isometry_group, nbhd
from .metric import MetricSpace, Subspace, format_rational, validate
from .oracles import (
    grid_metric_spaces,
    isometries_by_filter,
    lipschitz_grid_extensions,
    one_point_property_bruteforce,
)
from .topology import build_lemma1_instance, verify_lemma1

SEEDS = {
    "singleton": (["x"], [[0]]),
    "triangle": (["a", "b", "c"], [[0, 1, 1], [1, 0, 1], [1, 1, 0]]),
    "square": (["a", "b", "c", "d"], [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]]),
    "path": (["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]]),
}
# approximants used by the group probes, and the finer grid they are read on
PROBE_BUILD = {"k": 2, "rounds": 2, "grid": Grid(1, 2)}
PROBE_GRID = Grid(12, 6)
REFINE_EPS = ("1/4", "1/2", "1", "2")
NEUTRAL_EPS = ("1/4", "1/2", "3/4", "1")


def seed_space(name: str) -> MetricSpace:
    pts, d = SEEDS[name]
    return validate(pts, d)


def probe_approximants(cfg: RunConfig) -> list[tuple[str, Approximant]]:
    out = []
    for name in SEEDS:
        X = build_approximant(seed_space(name), PROBE_BUILD["k"], PROBE_BUILD["rounds"],
                              PROBE_BUILD["grid"], cfg.size_budget)
        out.append((name, X))
    return out


def _log(msg: str, cfg: RunConfig):
    if cfg.verbosity >= 0:
        print(msg, file=sys.stderr, flush=True)


# ---------------------------------------------------------------- criteria

def criterion_maximality(cfg: RunConfig, max_points: int = 4, q: int = 2, cap=2) -> dict:
    spaces = checks = 0
    violations = []
    for n in range(1, max_points + 1):
        for space in grid_metric_spaces(n, q, cap):
            spaces += 1
            for size in range(1, n + 1):
                for A in itertools.combinations(range(n), size):
                    sub = Subspace(space, A)
                    for g in enumerate_profiles(sub.induced().dist, grid_levels(q, cap)):
                        ext = katetov_extension(space, sub, g).values
                        for h in lipschitz_grid_extensions(space, sub, g, q, cap):
                            checks += 1
                            if any(a > b for a, b in zip(h, ext)):
                                violations.append({"space": space.to_json(), "A": list(A),
                                                   "g": [format_rational(v) for v in g]})
    return {
        "id": 1,
        "name": "Katetov extension maximality",
        "params": {"max_points": max_points, "grid": f"{q}:{cap}"},
        "spaces": spaces,
        "comparisons": checks,
        "violations": len(violations),
        "witnesses": violations[:3],
        "passed": spaces > 0 and not violations,
    }


def criterion_certification(cfg: RunConfig) -> dict:
    grid = cfg.grid
    attempts = []
    X = None
    while X is None:
        try:
            X = build_approximant(seed_space("singleton"), cfg.k, cfg.rounds, grid, cfg.size_budget)
        except SizeBudgetExceeded:
            attempts.append({"grid": str(grid), "outcome": "size budget exceeded"})
            if grid.q == 1:
                break
            grid = Grid(grid.q - 1, grid.cap)
    if X is None:
        return {"id": 2, "name": "one-point property certification", "attempts": attempts, "passed": False}
    direct = check_one_point_property(X.space, cfg.k, grid)
    shuffled = check_one_point_property(X.space, cfg.k, grid, order_seed=cfg.rng_seed + 1)
    oracle_k1 = one_point_property_bruteforce(X.space, 1, grid.q, grid.cap)
    # same growth on the unit grid, for comparison only; it does not affect the verdict
    unit = build_approximant(seed_space("singleton"), cfg.k, cfg.rounds, Grid(1, grid.cap), cfg.size_budget)
    agree = (direct.ok == shuffled.ok and direct.witness_k == shuffled.witness_k
             and oracle_k1 == (direct.witness_k >= 1))
    return {
        "id": 2,
        "name": "one-point property certification",
        "params": {"seed": "singleton", "k": cfg.k, "rounds": cfg.rounds, "grid": str(grid),
                   "size_budget": cfg.size_budget},
        "attempts": attempts,
        "points": len(X.space),
        "witness_k": X.witness_k,
        "counterexample": direct.counterexample,
        "shuffled_recheck": shuffled.to_json(),
        "bruteforce_k1": oracle_k1,
        "rechecks_agree": agree,
        "unit_grid_reference": {"grid": str(unit.grid), "points": len(unit.space), "witness_k": unit.witness_k},
        "passed": X.witness_k >= 1 and agree,
    }


def random_space(rng: random.Random, n: int, kind: int) -> MetricSpace:
    names = [f"v{i}" for i in range(n)]
    if kind == 0:
        # values in {1, 2} always satisfy the triangle inequality
        m = [[0] * n for _ in range(n)]
        for i, j in itertools.combinations(range(n), 2):
            m[i][j] = m[j][i] = rng.choice((1, 2))
        return validate(names, m)
    if kind == 1:
        cells = rng.sample([(a, b) for a in range(3) for b in range(3)], n)
        norm = rng.choice((max, lambda u, v: u + v))
        m = [[norm(abs(p[0] - r[0]), abs(p[1] - r[1])) for r in cells] for p in cells]
        return validate(names, m)
    if kind == 2:
        inf = 10 * n
        m = [[0 if i == j else inf for j in range(n)] for i in range(n)]
        for i in range(1, n):
            j = rng.randrange(i)
            w = rng.choice((1, 1, 2))
            m[i][j] = m[j][i] = w
        for _ in range(rng.randrange(n + 1)):
            i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
            if i != j:
                w = rng.choice((1, 2))
                m[i][j] = m[j][i] = min(m[i][j], w)
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    m[i][j] = min(m[i][j], m[i][k] + m[k][j])
        return validate(names, m)
    vals = [Fraction(rng.randint(1, 4), 2) for _ in range(n)]
    m = [[0 if i == j else max(vals[i], vals[j]) for j in range(n)] for i in range(n)]
    return validate(names, m)


def criterion_isometry_oracle(cfg: RunConfig, count: int = 50) -> dict:
    rng = random.Random(cfg.rng_seed)
    mismatches = []
    orders = []
    for t in range(count):
        n = rng.randint(1, 7)
        space = random_space(rng, n, t % 4)
        pruned = list(full_isometry_group(space, cfg.search_budget).elements)
        brute = isometries_by_filter(space)
        orders.append(len(brute))
        if pruned != brute:
            mismatches.append({"space": space.to_json(), "pruned": len(pruned), "brute": len(brute)})
    return {
        "id": 3,
        "name": "isometry group oracle equivalence",
        "spaces": count,
        "group_orders": orders,
        "mismatches": len(mismatches),
        "witnesses": mismatches[:3],
        "passed": not mismatches,
    }


def lemma1_targets(G, n: int) -> list[tuple[int, ...]]:
    """Target tuples of size <= 3 (ordered up to size 2, sorted at size 3), one per G-orbit."""
    tuples = [t for size in (1, 2) for t in itertools.permutations(range(n), size)]
    tuples += list(itertools.combinations(range(n), 3))
    keep = []
    for t in tuples:
        images = [tuple(g[i] for i in t) for g in G]
        if len(t) == 3:
            images = [tuple(sorted(im)) for im in images]
        if t == min(images):
            keep.append(t)
    return keep


def _lemma1_on(args) -> dict:
    name, X = args
    Y = regrid(X, PROBE_GRID)
    G = full_isometry_group(Y.space)
    passed = failed = 0
    skipped: dict[str, int] = {}
    new_points = nontrivial = 0
    failures = []
    for targets in lemma1_targets(G, len(Y.space)):
        for eps in REFINE_EPS:
            try:
                inst = build_lemma1_instance(Y, G, targets, eps)
            except KatetovError as exc:
                skipped[exc.code] = skipped.get(exc.code, 0) + 1
                continue
            rep = verify_lemma1(inst)
            new_points += rep["y_is_new"]
            nontrivial += rep["nbhd_y_size"] > 1
            if rep["passed"]:
                passed += 1
            else:
                failed += 1
                failures.append({k: v for k, v in rep.items() if k != "steps"}
                                | {"failed_steps": [s for s, v in rep["steps"].items() if not v["passed"]]})
    return {
        "approximant": name,
        "points": len(Y.space),
        "group_order": len(G),
        "instances": passed + failed,
        "passed": passed,
        "failed": failed,
        "skipped": dict(sorted(skipped.items())),
        "y_new": new_points,
        "nontrivial_V_y": nontrivial,
        "witnesses": failures[:3],
    }


def _map(fn, items, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def criterion_lemma1(cfg: RunConfig, apps) -> dict:
    certified = [(n, X) for n, X in apps if X.witness_k >= 1]
    rows = _map(_lemma1_on, certified, cfg.jobs)
    total = sum(r["instances"] for r in rows)
    failed = sum(r["failed"] for r in rows)
    return {
        "id": 4,
        "name": "one-anchor refinement containment",
        "params": {"probe_grid": str(PROBE_GRID), "eps": list(REFINE_EPS), "max_targets": 3,
                   "targets": "ordered up to size 2, sorted at size 3, one per orbit"},
        "approximants": rows,
        "instances": total,
        "failures": failed,
        "passed": total > 0 and failed == 0,
    }


def _theorem4_on(args) -> dict:
    name, X, rng_seed = args
    rng = random.Random(f"{rng_seed}:{name}")
    Y = regrid(X, PROBE_GRID)
    G = full_isometry_group(Y.space)
    constructed = failed = 0
    corruptions = {"eps": 0, "f": 0, "D": 0}
    missed = []
    skipped: dict[str, int] = {}
    failures = []
    nontrivial = 0
    for x in range(len(Y.space)):
        for eps in NEUTRAL_EPS:
            V = nbhd(G, [(x, 2 * Fraction(eps))]).members
            shuffled = list(G.elements)
            rng.shuffle(shuffled)
            choices = {frozenset([G.identity]),
                       frozenset(separated_subset(G, V)),
                       frozenset(separated_subset(G, V, shuffled))}
            for A in sorted(choices, key=lambda s: sorted(s)):
                try:
                    inst = theorem4_construct(Y, G, A, x, eps)
                except KatetovError as exc:
                    skipped[exc.code] = skipped.get(exc.code, 0) + 1
                    continue
                constructed += 1
                rep = verify_theorem4(inst)
                nontrivial += rep["W_size"] > 1 and rep["A_size"] > 1
                if not rep["passed"]:
                    failed += 1
                    failures.append({"x": rep["x"], "eps": rep["eps"],
                                     "failed_steps": [s for s, v in rep["steps"].items() if not v["passed"]]})
                for how in corruptions:
                    bad = verify_theorem4(corrupt(inst, how))
                    hit = [s for s, v in bad["steps"].items() if not v["passed"]]
                    if hit and not bad["passed"]:
                        corruptions[how] += 1
                    else:
                        missed.append({"x": rep["x"], "eps": rep["eps"], "corruption": how})
    return {
        "approximant": name,
        "points": len(Y.space),
        "group_order": len(G),
        "constructed": constructed,
        "failed": failed,
        "nontrivial_W_and_A": nontrivial,
        "skipped": dict(sorted(skipped.items())),
        "corruptions_detected": corruptions,
        "corruptions_missed": missed[:3],
        "witnesses": failures[:3],
    }


def criterion_theorem4(cfg: RunConfig, apps) -> dict:
    rows = _map(_theorem4_on, [(n, X, cfg.rng_seed) for n, X in apps], cfg.jobs)
    constructed = sum(r["constructed"] for r in rows)
    used = sum(1 for r in rows if r["constructed"])
    failed = sum(r["failed"] for r in rows)
    missed = sum(len(r["corruptions_missed"]) for r in rows)
    return {
        "id": 5,
        "name": "neutrality construction end to end",
        "params": {"probe_grid": str(PROBE_GRID), "eps": list(NEUTRAL_EPS)},
        "approximants": rows,
        "instances": constructed,
        "approximants_used": used,
        "failures": failed,
        "corruptions_missed": missed,
        "passed": constructed >= 10 and used >= 3 and failed == 0 and missed == 0,
    }


def criterion_displacement(cfg: RunConfig, apps, samples: int = 1000) -> dict:
    small_runs = small_violations = 0
    for n in (1, 2, 3):
        for space in grid_metric_spaces(n, 2, 2):
            G = full_isometry_group(space)
            for V in {B.members for B in default_basis(G)} | {G.members()}:
                eps = max(displacement(space, v) for v in V)
                rep = displacement_bound_check(G, space, V, eps, q=2, cap=2)
                small_runs += 1
                small_violations += not rep["passed"]
    large = []
    for name, X in apps:
        G = full_isometry_group(X.space)
        rng = random.Random(f"{cfg.rng_seed}:{name}")
        fs = [random_katetov(X.space, rng, 2, 2) for _ in range(samples)]
        Vs = [G.members()] + [B.members for B in default_basis(G)][:6]
        bad = 0
        for V in Vs:
            eps = max(displacement(X.space, v) for v in V)
            rep = displacement_bound_check(G, X.space, V, eps, functions=fs)
            bad += not rep["passed"]
        large.append({"approximant": name, "points": len(X.space), "samples": len(fs),
                      "V_sets": len(Vs), "violations": bad})
    pair = validate(["a", "b"], [[0, 2], [2, 0]])
    G2 = full_isometry_group(pair)
    swap = (1, 0)
    tight = displacement_bound_check(G2, pair, [swap], 2, functions=[kuratowski(pair, "a")])
    passed = (small_violations == 0 and all(r["violations"] == 0 for r in large)
              and tight["passed"] and tight["max_sup"] == "2" and tight["bound_attained"])
    return {
        "id": 6,
        "name": "displacement bound",
        "exhaustive_runs": small_runs,
        "exhaustive_violations": small_violations,
        "sampled": large,
        "tightness": {"max_sup": tight["max_sup"], "eps": tight["eps"], "attained": tight["bound_attained"]},
        "passed": passed,
    }


def criterion_reduction_chain(cfg: RunConfig, apps) -> dict:
    rng = random.Random(cfg.rng_seed)
    spaces = [(n, X.space) for n, X in apps] + [("pair", validate(["a", "b"], [[0, 2], [2, 0]]))]
    instances = failures = 0
    witnesses = []
    for name, space in spaces:
        G = full_isometry_group(space)
        basis = default_basis(G)
        for V in basis:
            subsets = [frozenset(), frozenset([G.identity]), G.members()]
            subsets += [frozenset([g]) for g in G.elements]
            for _ in range(3):
                subsets.append(frozenset(rng.sample(G.elements, rng.randint(1, len(G)))))
            for A in subsets:
                rep = discrete_reduction_check(G, basis, A, V.members)
                instances += 1
                if not rep["passed"]:
                    failures += 1
                    witnesses.append({"space": name, "steps": rep["steps"]})
    return {
        "id": 7,
        "name": "discrete reduction chain",
        "instances": instances,
        "failures": failures,
        "witnesses": witnesses[:3],
        "passed": instances > 0 and failures == 0,
    }


# ---------------------------------------------------------------- driver

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def run_battery(cfg: RunConfig, timings: dict | None = None) -> list[dict]:
    timings = {} if timings is None else timings
    apps = probe_approximants(cfg)
    steps = [
        ("1", lambda: criterion_maximality(cfg)),
        ("2", lambda: criterion_certification(cfg)),
        ("3", lambda: criterion_isometry_oracle(cfg)),
        ("4", lambda: criterion_lemma1(cfg, apps)),
        ("5", lambda: criterion_theorem4(cfg, apps)),
        ("6", lambda: criterion_displacement(cfg, apps)),
        ("7", lambda: criterion_reduction_chain(cfg, apps)),
    ]
    out = []
    for key, fn in steps:
        t0 = time.perf_counter()
        res = fn()
        timings[key] = time.perf_counter() - t0
        _log(f"[{'PASS' if res['passed'] else 'FAIL'}] criterion {res['id']}: {res['name']} "
             f"({timings[key]:.1f}s)", cfg)
        out.append(res)
    return out


def run_suite(cfg: RunConfig, timings: dict | None = None) -> dict:
    criteria = run_battery(cfg, timings)
    # determinism: the order-sensitive criteria are recomputed and compared byte for byte
    apps = probe_approximants(cfg)
    again = [criterion_certification(cfg), criterion_isometry_oracle(cfg),
             criterion_theorem4(cfg, apps), criterion_reduction_chain(cfg, apps)]
    first = [c for c in criteria if c["id"] in (2, 3, 5, 7)]
    same = canonical_json(first) == canonical_json(again)
    det = {"id": 8, "name": "determinism", "recomputed": [2, 3, 5, 7], "identical": same, "passed": same}
    _log(f"[{'PASS' if same else 'FAIL'}] criterion 8: determinism (in-process rerun)", cfg)
    criteria.append(det)
    config = cfg.to_json()
    return {
        "command": "suite",
        "config": config,
        "config_sha256": hashlib.sha256(canonical_json(config).encode()).hexdigest(),
        "criteria": criteria,
        "passed": all(c["passed"] for c in criteria),
    }
