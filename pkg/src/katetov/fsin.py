"""Neutral sets, uniform discreteness and functional balance in finite isometry groups.

Every finite group is functionally balanced and has bounded orbits, so
nothing here can separate groups. What is checked is that each step of
the constructions holds on concrete data: the reduction to uniformly
discrete sets, the ``W A <= A V`` construction through a realized point
``z``, and the displacement bound for the left-regular action on
Katetov functions.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .approximant import Approximant, extension_with_realized_point
from .errors import (
    EmptyBasis,
    EmptyComplement,
    NoSmallEnoughW,
    NotKatetov,
    NotUniformlyDiscrete,
    PremiseFails,
    SparseComplement,
)
from .functions import KatetovFunction, enumerate_profiles, grid_levels, is_katetov, katetov_extension
from .isometry import (
    IsometryGroup,
    NbhdSet,
    Perm,
    compose,
    format_perm,
    inverse,
    nbhd,
    power,
    product,
)
from .metric import MetricSpace, Point, Subspace, format_rational, parse_rational
from .topology import extended_subgroup


@dataclass(frozen=True)
class UniformityBasis:
    group: IsometryGroup
    basis: tuple[NbhdSet, ...]

    def __post_init__(self):
        G = self.group
        for V in self.basis:
            if G.identity not in V.members:
                raise ValueError("basis element misses the identity")
            if any(inverse(g) not in V.members for g in V.members):
                raise ValueError("basis element is not symmetric")

    def __len__(self):
        return len(self.basis)

    def __iter__(self):
        return iter(self.basis)


def default_basis(G: IsometryGroup, max_anchors: int = 2) -> UniformityBasis:
    """``V[x_1..x_m; eps] & G`` over anchor tuples with ``m <= max_anchors``, plus ``{e}`` and ``G``.

    Radii run over the distinct positive distances (where the strict
    inequality changes) and one value above the diameter. Duplicate member
    sets are dropped; the result is ordered largest first.
    """
    space = G.space
    n = len(space)
    dists = sorted({v for row in space.dist for v in row if v > 0})
    radii = dists + [(dists[-1] if dists else Fraction(0)) + 1]
    found: dict[frozenset, NbhdSet] = {}

    def add(V):
        found.setdefault(V.members, V)

    add(nbhd(G, [(0, radii[-1])]))
    for m in range(1, min(max_anchors, n) + 1):
        for anchors in itertools.combinations(range(n), m):
            for r in radii:
                add(nbhd(G, [(x, r) for x in anchors]))
    if dists:
        add(nbhd(G, [(x, dists[0]) for x in range(n)]))
    pts = space.points
    ordered = sorted(found.values(),
                     key=lambda V: (-len(V.members), sorted(format_perm(g, pts) for g in V.members)))
    return UniformityBasis(G, tuple(ordered))


def _fmt(G: IsometryGroup, g: Perm) -> str:
    return format_perm(g, G.space.points)


def is_left_uniformly_discrete(G: IsometryGroup, A: Iterable[Perm], V: Iterable[Perm]):
    """``aV & bV`` empty for all distinct ``a, b`` in ``A``; returns ``(ok, witness)``."""
    A = sorted(G.check(A))
    V = G.check(V)
    cosets = [frozenset(compose(a, v) for v in V) for a in A]
    for i, j in itertools.combinations(range(len(A)), 2):
        if cosets[i] & cosets[j]:
            return False, {"a": _fmt(G, A[i]), "b": _fmt(G, A[j])}
    return True, None


@dataclass(frozen=True)
class NeutralityResult:
    ok: bool
    U: NbhdSet | None
    witnesses: tuple = field(default=())

    def to_json(self):
        return {
            "ok": self.ok,
            "U": self.U.to_json() if self.U is not None else None,
            "witnesses": list(self.witnesses),
        }


def neutrality_check(G: IsometryGroup, A: Iterable[Perm], V: Iterable[Perm],
                     basis: UniformityBasis) -> NeutralityResult:
    """Largest basis element ``U`` with ``U A <= A V``."""
    if not len(basis):
        raise EmptyBasis("uniformity basis is empty")
    A = G.check(A)
    AV = product(G, A, V)
    witnesses = []
    for U in basis:
        bad = next(((u, a) for u in sorted(U.members) for a in sorted(A)
                    if compose(u, a) not in AV), None)
        if bad is None:
            return NeutralityResult(True, U)
        witnesses.append({"U_size": len(U), "u": _fmt(G, bad[0]), "a": _fmt(G, bad[1])})
    return NeutralityResult(False, None, tuple(witnesses))


def discrete_reduction_check(G: IsometryGroup, basis: UniformityBasis,
                             A: Iterable[Perm], V: Iterable[Perm]) -> dict:
    """Reduce neutrality of ``A`` at ``V`` to a uniformly discrete ``B`` at ``W``.

    ``W`` is the largest symmetric basis element with ``W^4 <= V``; ``B`` is a
    greedy maximal subset of ``AW`` with pairwise disjoint ``bW``. Then
    ``UA <= UBW^2 <= BW^3 <= AW^4 <= AV`` for the ``U`` that makes ``B`` neutral.
    """
    A, V = G.check(A), G.check(V)
    W = next((Wc for Wc in basis
              if power(G, Wc.members, 4) <= V
              and all(inverse(w) in Wc.members for w in Wc.members)), None)
    if W is None:
        raise NoSmallEnoughW("no basis element W with W^4 inside V")
    Wm = W.members
    AW = product(G, A, Wm)
    B: list[Perm] = []
    cover: set = set()
    for c in sorted(AW):
        cW = {compose(c, w) for w in Wm}
        if not (cW & cover):
            B.append(c)
            cover |= cW
    Bs = frozenset(B)
    W2, W3, W4 = (power(G, Wm, k) for k in (2, 3, 4))

    steps = {}
    maximal = all({compose(c, w) for w in Wm} & cover for c in AW)
    steps["B_maximal"] = maximal
    disc, _ = is_left_uniformly_discrete(G, Bs, Wm)
    steps["B_uniformly_discrete"] = disc
    BW2 = product(G, Bs, W2)
    steps["A_in_BW2"] = A <= BW2

    neutral = neutrality_check(G, Bs, Wm, basis)
    steps["B_neutral"] = neutral.ok
    if neutral.ok:
        U = neutral.U.members
        UA = product(G, U, A)
        UBW2 = product(G, product(G, U, Bs), W2)
        BW3 = product(G, Bs, W3)
        AW4 = product(G, A, W4)
        AV = product(G, A, V)
        steps["UA<=UBW2"] = UA <= UBW2
        steps["UBW2<=BW3"] = UBW2 <= BW3
        steps["BW3<=AW4"] = BW3 <= AW4
        steps["AW4<=AV"] = AW4 <= AV
        steps["UA<=AV"] = UA <= AV
    return {
        "W_size": len(Wm),
        "B_size": len(Bs),
        "U_size": len(neutral.U) if neutral.ok else None,
        "steps": steps,
        "passed": all(steps.values()),
    }


# ------------------------------------------------------------------ neutrality construction

@dataclass(frozen=True)
class Theorem4Instance:
    approximant: Approximant          # grown space, old points first
    base_size: int
    G: IsometryGroup                  # on the old space
    G_z: IsometryGroup                # on the grown space
    A: frozenset
    x: int
    eps: Fraction
    V: frozenset                      # V[x; 2 eps] & G
    D: Fraction
    F: tuple[int, ...]                # complement of the open eps-neighbourhood of Ax
    f: tuple[Fraction, ...]           # D - d(F, y) on old points
    z: int
    W: frozenset                      # V[z; eps/3] & G_z, perms of the grown space
    dropped: tuple = field(default=())


def _near(space: MetricSpace, centres: Iterable[int], r: Fraction) -> set[int]:
    d = space.dist
    centres = list(centres)
    return {y for y in range(len(space)) if any(d[y][c] < r for c in centres)}


def theorem4_construct(X: Approximant, G: IsometryGroup, A: Iterable[Perm], x: Point, eps) -> Theorem4Instance:
    space = X.space
    d = space.dist
    q = X.grid.q
    eps = parse_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    xi = space.index(x)
    A = G.check(A)
    if not A:
        raise NotUniformlyDiscrete("A is empty")
    V = nbhd(G, [(xi, 2 * eps)]).members
    V2 = power(G, V, 2)
    As = sorted(A)
    for a, b in itertools.combinations(As, 2):
        if {compose(a, v) for v in V2} & {compose(b, v) for v in V2}:
            raise NotUniformlyDiscrete("aV^2 meets bV^2", a=_fmt(G, a), b=_fmt(G, b))

    Ax = sorted({a[xi] for a in A})
    for a, b in itertools.combinations(As, 2):
        if d[a[xi]][b[xi]] < 2 * eps:
            raise NotUniformlyDiscrete("eps-balls around ax and bx meet", a=_fmt(G, a), b=_fmt(G, b))
    near = _near(space, Ax, eps)
    F = tuple(y for y in range(len(space)) if y not in near)
    if not F:
        raise EmptyComplement("every point is within eps of Ax; grow the approximant")
    diam_Ax = max(d[i][j] for i in Ax for j in Ax)
    D = Fraction(math.floor(max(diam_Ax, 4 * eps) * q) + 1, q)
    f = tuple(D - min(d[y][c] for c in F) for y in range(len(space)))
    low = [y for y in range(len(space)) if f[y] < D - 2 * eps]
    if low:
        raise SparseComplement("f drops below D - 2 eps", point=space.points[low[0]])
    verdict = is_katetov(space, f)
    if not verdict.ok:
        raise NotKatetov("D - d(F, .) is not Katetov", **verdict.witness)

    orbit = G.orbit(xi)
    grown, z = extension_with_realized_point(X, Subspace(space, tuple(orbit)), [f[o] for o in orbit])
    if len(grown.space) == len(space):
        G_z, dropped = G, []
    else:
        G_z, dropped = extended_subgroup(G, grown.space)
    W = nbhd(G_z, [(z, eps / 3)]).members
    return Theorem4Instance(grown, len(space), G, G_z, A, xi, eps, V, D, F, f, z, W, tuple(dropped))


def verify_theorem4(inst: Theorem4Instance) -> dict:
    """Re-derive every ingredient from the instance and check each proof step exhaustively."""
    space = inst.approximant.space
    n = inst.base_size
    d = space.dist
    G = inst.G
    pts = space.points
    xi, eps, D, f, z = inst.x, inst.eps, inst.D, inst.f, inst.z
    A = sorted(inst.A)
    Ax = sorted({a[xi] for a in A})
    steps: dict[str, dict] = {}

    def step(name, failures, **extra):
        steps[name] = {"passed": not failures, "failures": len(failures), "witnesses": failures[:5], **extra}

    step("V_matches", [] if nbhd(G, [(xi, 2 * eps)]).members == inst.V else [{"V": "differs from V[x;2eps]"}])
    V2 = power(G, inst.V, 2)
    bad = []
    for a, b in itertools.combinations(A, 2):
        if {compose(a, v) for v in V2} & {compose(b, v) for v in V2}:
            bad.append({"a": _fmt(G, a), "b": _fmt(G, b)})
    step("separation", bad)

    bad = []
    for a, b in itertools.combinations(A, 2):
        ax, bx = a[xi], b[xi]
        if d[ax][bx] < 2 * eps:
            bad.append({"a": _fmt(G, a), "b": _fmt(G, b), "d": format_rational(d[ax][bx])})
        both = [pts[y] for y in range(n) if d[y][ax] < eps and d[y][bx] < eps]
        if both:
            bad.append({"a": _fmt(G, a), "b": _fmt(G, b), "common": both[:3]})
    step("disjoint_balls", bad)

    diam_Ax = max((d[i][j] for i in Ax for j in Ax), default=Fraction(0))
    bad = []
    if not D > diam_Ax:
        bad.append({"bound": "D > diam(Ax)", "diam": format_rational(diam_Ax)})
    if not D > 4 * eps:
        bad.append({"bound": "D > 4 eps"})
    step("D_bounds", bad)

    near = {y for y in range(n) if any(d[y][c] < eps for c in Ax)}
    F = tuple(y for y in range(n) if y not in near)
    step("F_matches", [] if (F == inst.F and F) else [{"expected": [pts[y] for y in F][:5],
                                                       "stored": [pts[y] for y in inst.F][:5]}])
    Fs = inst.F or (0,)
    bad = [{"y": pts[y]} for y in range(n) if f[y] != D - min(d[y][c] for c in Fs)]
    step("f_formula", bad)
    step("f_lower_bound", [{"y": pts[y], "f": format_rational(f[y])} for y in range(n) if f[y] < D - 2 * eps])
    old = Subspace(space, tuple(range(n))).induced()
    kv = is_katetov(old, f)
    step("f_katetov", [] if kv.ok else [kv.witness])

    orbit = sorted({g[xi] for g in G})
    step("realization", [{"gx": pts[o]} for o in orbit if d[o][z] != f[o]])

    bad, exact = [], []
    for ax in Ax:
        dF = min(d[ax][c] for c in inst.F) if inst.F else None
        if dF is None or dF < eps:
            bad.append({"ax": pts[ax], "d(F,ax)": None if dF is None else format_rational(dF)})
        if any(d[ax][y] == eps for y in range(n)):
            exact.append({"ax": pts[ax], "holds": f[ax] == D - eps})
    step("f_ax_at_most_D_minus_eps", bad)
    step("f_ax_equals_D_minus_eps", [e for e in exact if not e["holds"]], checked=len(exact))

    Wcheck = nbhd(inst.G_z, [(z, eps / 3)]).members
    step("W_matches", [] if Wcheck == inst.W else [{"W": "differs from V[z;eps/3]"}])

    V_eps = nbhd(G, [(xi, eps)]).members
    A_Veps = product(G, A, V_eps)
    transfer, below, inside, ball, prod = [], [], [], [], []
    for w in sorted(inst.W):
        for a in A:
            ax = a[xi]
            wax = w[ax]
            tag = {"w": format_perm(w, pts), "a": _fmt(G, a)}
            if not abs(d[wax][z] - d[ax][z]) < eps:
                transfer.append(tag)
            if not wax < n or not f[wax] < D:
                below.append(tag)
            if wax not in near:
                inside.append(tag)
            if not any(d[wax][bx] < eps for bx in Ax):
                ball.append(tag)
            wa = compose(tuple(w[:n]), a)
            if wa not in A_Veps:
                prod.append(tag)
    step("transfer", transfer)
    step("f_wax_below_D", below)
    step("wax_in_neighbourhood", inside)
    step("ball_membership", ball)
    step("wa_in_A_Veps", prod)

    W_old = {tuple(w[:n]) for w in inst.W}
    WA = product(G, W_old, A)
    AV = product(G, A, inst.V)
    step("containment", [{"wa": _fmt(G, g)} for g in sorted(WA - AV)])

    return {
        "x": pts[xi],
        "eps": format_rational(eps),
        "D": format_rational(D),
        "z": pts[z],
        "z_is_new": z >= n,
        "A_size": len(A),
        "V_size": len(inst.V),
        "W_size": len(inst.W),
        "group_order": len(G),
        "extended_group_size": len(inst.G_z),
        "dropped_elements": [format_perm(g, pts[:n]) for g in inst.dropped],
        "density_hypothesis": "vacuous for finite groups; not modelled",
        "steps": steps,
        "passed": all(s["passed"] for s in steps.values()),
    }


def corrupt(inst: Theorem4Instance, how: str = "eps") -> Theorem4Instance:
    """Perturb a constructed instance; verification must then fail somewhere."""
    if how == "eps":
        bump = max((max(r) for r in inst.approximant.space.dist), default=Fraction(0)) + 1
        return replace(inst, eps=inst.eps + bump)
    if how == "f":
        return replace(inst, f=tuple(v + 1 if i == inst.F[0] else v for i, v in enumerate(inst.f)))
    if how == "D":
        return replace(inst, D=inst.D - inst.eps)
    raise ValueError(f"unknown corruption {how!r}")


def separated_subset(G: IsometryGroup, V: Iterable[Perm], candidates: Sequence[Perm] | None = None) -> list[Perm]:
    """Greedy maximal ``A`` with ``aV^2 & bV^2`` empty for distinct members."""
    V2 = power(G, G.check(V), 2)
    chosen, cover = [], set()
    for g in (candidates if candidates is not None else G.elements):
        gV2 = {compose(g, v) for v in V2}
        if not gV2 & cover:
            chosen.append(g)
            cover |= gV2
    return chosen


# ----------------------------------------------------------- displacement

def act(f_values: Sequence[Fraction], g: Perm) -> tuple[Fraction, ...]:
    """``(g.f)(x) = f(g^-1 x)``."""
    inv = inverse(g)
    return tuple(f_values[inv[x]] for x in range(len(f_values)))


def random_katetov(space: MetricSpace, rng: random.Random, q: int = 2, cap=2) -> KatetovFunction:
    """A Katetov function controlled by a few random points, possibly shifted or truncated."""
    n = len(space)
    size = rng.randint(1, min(3, n))
    ctrl = tuple(sorted(rng.sample(range(n), size)))
    sub = [[space.dist[a][b] for b in ctrl] for a in ctrl]
    levels = grid_levels(q, max(parse_rational(cap), max((max(r) for r in sub), default=0)))
    for _ in range(200):
        g = [rng.choice(levels) for _ in ctrl]
        if all(abs(g[i] - g[j]) <= sub[i][j] <= g[i] + g[j]
               for i in range(size) for j in range(i + 1, size)):
            break
    else:
        g = [space.diameter()] * size
    f = katetov_extension(space, Subspace(space, ctrl), g)
    shift = Fraction(rng.randint(0, 2 * q), q) if rng.random() < 0.3 else Fraction(0)
    return KatetovFunction(space, tuple(v + shift for v in f.values))


def displacement_bound_check(G: IsometryGroup, space: MetricSpace, V: Iterable[Perm], eps,
                             functions: Iterable[KatetovFunction] | None = None,
                             samples: int = 1000, seed: int = 0, q: int = 2, cap=2) -> dict:
    """Premise ``d(x, vx) <= eps`` on ``V``; then ``sup |g.f - f| <= eps`` for Katetov ``f``.

    Functions default to the exhaustive grid family when the space has at
    most three points, and to ``samples`` seeded random draws otherwise.
    """
    eps = parse_rational(eps)
    V = sorted(G.check(V))
    d = space.dist
    n = len(space)
    for v in V:
        for x in range(n):
            if d[x][v[x]] > eps:
                raise PremiseFails("premise fails", x=space.points[x], v=format_perm(v, space.points))

    if functions is None:
        if n <= 3:
            vals = list(enumerate_profiles(space.dist, grid_levels(q, cap)))
            mode = "exhaustive"
        else:
            rng = random.Random(seed)
            vals = [random_katetov(space, rng, q, cap).values for _ in range(samples)]
            mode = f"sampled:{samples}:seed={seed}"
    else:
        vals = [fn.values for fn in functions]
        mode = "given"

    disp = {v: max((d[inverse(v)[x]][x] for x in range(n)), default=Fraction(0)) for v in V}
    violations, term_violations = [], []
    worst = Fraction(0)
    tight = False
    for f in vals:
        for v in V:
            gf = act(f, v)
            inv = inverse(v)
            s = max((abs(a - b) for a, b in zip(gf, f)), default=Fraction(0))
            worst = max(worst, s)
            for x in range(n):
                if abs(f[inv[x]] - f[x]) > d[inv[x]][x]:
                    term_violations.append({"v": format_perm(v, space.points), "x": space.points[x]})
                    break
            if s > disp[v] or s > eps:
                violations.append({"v": format_perm(v, space.points),
                                   "f": [format_rational(t) for t in f], "sup": format_rational(s)})
            if s == eps and s > 0:
                tight = True
    return {
        "eps": format_rational(eps),
        "V_size": len(V),
        "functions": len(vals),
        "mode": mode,
        "max_sup": format_rational(worst),
        "bound_attained": tight,
        "violations": violations[:5],
        "term_violations": term_violations[:5],
        "passed": not violations and not term_violations,
    }
