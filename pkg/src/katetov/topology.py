"""One-anchor refinement of multi-anchor neighbourhoods in a finite isometry group.

Given targets ``x_1..x_n`` and ``eps``, build a point ``y`` and a radius
``gamma`` with ``V[y; gamma] & G  <=  V[x_1..x_n; eps]``. The point ``y``
realizes, over the union of ``G``-orbits of the targets, the Katetov
function controlled by the targets with ``f(x_i) = D + i*gamma``.

At finite scale adding ``y`` may destroy isometries; ``G`` is then
replaced by ``G_y``, the elements that extend to the grown space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .approximant import Approximant, extension_with_realized_point
from .errors import ContainmentFailure, DegenerateTargets, NoAdmissibleGamma, NotKatetov
from .functions import KatetovFunction, katetov_extension
from .isometry import IsometryGroup, Perm, format_perm, nbhd, verify_group
from .metric import MetricSpace, Point, Subspace, format_rational, parse_rational


def _grid_floor(x: Fraction, q: int) -> Fraction:
    return Fraction(math.floor(x * q), q)


def choose_gamma(space: MetricSpace, targets: Sequence[Point], eps, q: int) -> Fraction:
    """Largest ``i/q`` with ``gamma <= eps``, ``gamma <= D/3 - 1/q`` and ``2 n gamma <= sep - 1/q``.

    ``sep`` is the least distance between distinct targets; the ``1/q``
    margins turn the strict inequalities into non-strict ones on the grid.
    """
    eps = parse_rational(eps)
    idx = [space.index(t) for t in targets]
    n = len(idx)
    d = space.dist
    D = max((d[i][j] for i in idx for j in idx), default=Fraction(0))
    if D == 0:
        raise DegenerateTargets("targets have diameter 0")
    step = Fraction(1, q)
    bounds = [eps, D / 3 - step]
    if n > 1:
        sep = min(d[i][j] for a, i in enumerate(idx) for j in idx[a + 1:])
        bounds.append((sep - step) / (2 * n))
    gamma = _grid_floor(min(bounds), q)
    if gamma <= 0:
        raise NoAdmissibleGamma(f"no positive multiple of 1/{q} fits", bounds=[format_rational(b) for b in bounds])
    return gamma


def separation_violations(f: KatetovFunction, targets: Sequence[int], D, gamma) -> list[dict]:
    """Points where ``f(x) < D + i*gamma`` but ``x`` lies in no ball ``B_{(i-j)gamma}(x_j)``, ``j < i``."""
    d = f.space.dist
    out = []
    for i in range(1, len(targets) + 1):
        level = D + i * gamma
        for x, fx in enumerate(f.values):
            if fx < level and not any(d[x][targets[j - 1]] < (i - j) * gamma for j in range(1, i)):
                out.append({"i": i, "x": f.space.points[x], "f": format_rational(fx)})
    return out


def separator_function(space: MetricSpace, targets: Sequence[Point], gamma, D) -> KatetovFunction:
    """Extension over ``space`` of ``x_i -> D + i*gamma``; the separation property is asserted."""
    gamma, D = parse_rational(gamma), parse_rational(D)
    idx = [space.index(t) for t in targets]
    if len(set(idx)) != len(idx):
        raise NotKatetov("targets repeat")
    order = sorted(range(len(idx)), key=lambda a: idx[a])
    X = Subspace(space, tuple(idx[a] for a in order))
    g = [D + (a + 1) * gamma for a in order]
    f = katetov_extension(space, X, g)
    bad = separation_violations(f, idx, D, gamma)
    if bad:
        raise ContainmentFailure("separation property fails", first=bad[0])
    return f


@dataclass(frozen=True)
class Lemma1Instance:
    approximant: Approximant           # grown space, old points first
    base_size: int
    G: IsometryGroup                   # on the old space
    G_y: IsometryGroup                 # on the grown space
    targets: tuple[int, ...]
    eps: Fraction
    D: Fraction
    gamma: Fraction
    f: KatetovFunction | None          # on the grown space; None when degenerate
    y: int
    orbit_union: tuple[int, ...]
    dropped: tuple[Perm, ...] = field(default=())
    degenerate: bool = False


def extended_subgroup(G: IsometryGroup, grown: MetricSpace) -> tuple[IsometryGroup, list[Perm]]:
    """Elements of ``G`` that stay isometries once the new points are fixed."""
    n = len(G.space)
    m = len(grown)
    d = grown.dist
    keep, dropped = [], []
    tail = tuple(range(n, m))
    for g in G:
        ok = all(d[z][g[x]] == d[z][x] for z in tail for x in range(n))
        (keep if ok else dropped).append(g + tail)
    verify_group(keep)
    return IsometryGroup(grown, tuple(keep)), [g[:n] for g in dropped]


def build_lemma1_instance(X: Approximant, G: IsometryGroup, targets: Sequence[Point], eps) -> Lemma1Instance:
    space = X.space
    eps = parse_rational(eps)
    idx = tuple(space.index(t) for t in targets)
    if not idx:
        raise DegenerateTargets("no targets")
    d = space.dist
    D = max(d[i][j] for i in idx for j in idx)
    orbit_union = tuple(sorted({g[i] for g in G for i in idx}))
    if D == 0:
        # a single anchor already: y = x_1, gamma = eps
        return Lemma1Instance(X, len(space), G, G, idx, eps, D, eps, None, idx[0], orbit_union,
                              degenerate=True)
    gamma = choose_gamma(space, idx, eps, X.grid.q)
    f_old = separator_function(space, idx, gamma, D)
    A = Subspace(space, orbit_union)
    grown, y = extension_with_realized_point(X, A, f_old.restrict(A))
    if len(grown.space) == len(space):
        G_y, dropped = G, []
    else:
        G_y, dropped = extended_subgroup(G, grown.space)
    X_sub = Subspace(grown.space, tuple(sorted(idx)))
    f = katetov_extension(grown.space, X_sub, [f_old.values[i] for i in X_sub.indices])
    return Lemma1Instance(grown, len(space), G, G_y, idx, eps, D, gamma, f, y, orbit_union,
                          tuple(dropped))


def _step(report, name, failures):
    report["steps"][name] = {"passed": not failures, "witnesses": failures[:5], "failures": len(failures)}


def verify_lemma1(inst: Lemma1Instance, strict: bool = False) -> dict:
    """Replay the proof on the instance and check the containment exhaustively."""
    space = inst.approximant.space
    pts = space.points
    d = space.dist
    G = inst.G_y
    xs = inst.targets
    gamma, eps, D = inst.gamma, inst.eps, inst.D
    report = {
        "targets": [pts[i] for i in xs],
        "eps": format_rational(eps),
        "gamma": format_rational(gamma),
        "D": format_rational(D),
        "y": pts[inst.y],
        "y_is_new": inst.y >= inst.base_size,
        "degenerate": inst.degenerate,
        "group_order": len(inst.G),
        "extended_group_size": len(G),
        "dropped_elements": [format_perm(g, pts[:inst.base_size]) for g in inst.dropped],
        "steps": {},
    }
    V_y = nbhd(G, [(inst.y, gamma)])
    V_x = nbhd(G, [(x, eps) for x in xs])
    report["nbhd_y_size"] = len(V_y)
    report["nbhd_targets_size"] = len(V_x)

    if not inst.degenerate:
        f = inst.f
        n = len(xs)
        sep = min((d[i][j] for a, i in enumerate(xs) for j in xs[a + 1:]), default=None)
        bad = []
        if not gamma <= eps:
            bad.append({"constraint": "gamma <= eps"})
        if not 3 * gamma < D:
            bad.append({"constraint": "gamma < D/3"})
        if sep is not None and not 2 * n * gamma < sep:
            bad.append({"constraint": "balls of radius n*gamma disjoint"})
        _step(report, "gamma_constraints", bad)

        bad = [{"i": a + 1, "x": pts[x], "f": format_rational(f.values[x])}
               for a, x in enumerate(xs) if f.values[x] != D + (a + 1) * gamma]
        _step(report, "separator_values", bad)

        bad = [{"a": pts[a], "d": format_rational(d[inst.y][a]), "f": format_rational(f.values[a])}
               for a in inst.orbit_union if d[inst.y][a] != f.values[a]]
        _step(report, "realization", bad)

        _step(report, "separation_property", separation_violations(f, xs, D, gamma))

        bad = []
        for g in G:
            moved = d[inst.y][g[inst.y]]
            for x in inst.orbit_union:
                if abs(f.values[x] - f.values[g[x]]) > moved:
                    bad.append({"g": format_perm(g, pts), "x": pts[x]})
        _step(report, "displacement_transfer", bad)

        strict_bad, ball_bad, inj_bad = [], [], []
        for g in sorted(V_y.members):
            phi = []
            for a, x in enumerate(xs, start=1):
                gx = g[x]
                if not abs(f.values[x] - f.values[gx]) < gamma:
                    strict_bad.append({"g": format_perm(g, pts), "i": a})
                if not f.values[gx] < D + (a + 1) * gamma:
                    strict_bad.append({"g": format_perm(g, pts), "i": a, "bound": "f(gx_i) < D+(i+1)gamma"})
                centres = [j for j in range(1, a + 1) if d[gx][xs[j - 1]] < (a - j + 1) * gamma]
                if len(centres) != 1:
                    ball_bad.append({"g": format_perm(g, pts), "i": a, "centres": centres})
                    phi.append(None)
                else:
                    phi.append(centres[0])
            if None not in phi:
                if len(set(phi)) != len(phi) or any(p > a for a, p in enumerate(phi, start=1)):
                    inj_bad.append({"g": format_perm(g, pts), "phi": phi})
        _step(report, "strict_transfer", strict_bad)
        _step(report, "ball_membership", ball_bad)
        _step(report, "injection", inj_bad)

    bad = [{"g": format_perm(g, pts), "x": pts[x], "moved": format_rational(d[x][g[x]])}
           for g in sorted(V_y.members) for x in xs if not d[x][g[x]] < eps]
    _step(report, "containment", bad)
    bad = [format_perm(g, pts) for g in sorted(V_y.members - V_x.members)]
    _step(report, "brute_force_containment", bad)

    report["passed"] = all(s["passed"] for s in report["steps"].values())
    if strict and not report["steps"]["brute_force_containment"]["passed"]:
        raise ContainmentFailure("V[y;gamma] not inside V[x;eps]", g=bad[0])
    return report
