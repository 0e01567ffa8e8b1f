"""Isometry groups of finite metric spaces.

Permutations are tuples ``p`` with ``p[i]`` the image of point ``i``;
composition is ``(a*b)[i] = a[b[i]]`` (apply ``b`` first). Groups are
stored as full sorted element lists; subsets of a group are frozensets.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import GroupMismatch, NotAGroup, SearchBudgetExceeded, UnknownPoint, ParseError
from .metric import MetricSpace, Point, format_rational, parse_rational

Perm = tuple

DEFAULT_SEARCH_BUDGET = int(os.environ.get("KATETOV_SEARCH_BUDGET", 2_000_000))


def identity(n: int) -> Perm:
    return tuple(range(n))


def compose(a: Perm, b: Perm) -> Perm:
    return tuple(a[i] for i in b)


def inverse(a: Perm) -> Perm:
    inv = [0] * len(a)
    for i, j in enumerate(a):
        inv[j] = i
    return tuple(inv)


def is_isometry(space: MetricSpace, perm: Sequence[int]) -> bool:
    d = space.dist
    n = len(perm)
    if sorted(perm) != list(range(len(space))):
        return False
    return all(d[perm[i]][perm[j]] == d[i][j] for i in range(n) for j in range(i + 1, n))


def format_perm(perm: Perm, points: Sequence[str]) -> str:
    seen, cycles = set(), []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc, i = [], start
        while i not in seen:
            seen.add(i)
            cyc.append(points[i])
            i = perm[i]
        cycles.append("(" + " ".join(cyc) + ")")
    return "".join(cycles) or "()"


_CYCLE = re.compile(r"\(([^()]*)\)")


def parse_perm(text: str, space: MetricSpace) -> Perm:
    """Cycle notation over point ids, e.g. ``"(a c)(b d)"``; ``"()"`` is the identity."""
    stripped = _CYCLE.sub("", text).strip()
    if stripped:
        raise ParseError(f"bad cycle notation: {text!r}")
    perm = list(range(len(space)))
    moved = set()
    for body in _CYCLE.findall(text):
        ids = [t for t in re.split(r"[\s,]+", body.strip()) if t]
        idx = [space.index(t) for t in ids]
        if moved & set(idx) or len(set(idx)) != len(idx):
            raise ParseError(f"cycles overlap in {text!r}")
        moved |= set(idx)
        for a, b in zip(idx, idx[1:] + idx[:1]):
            perm[a] = b
    return tuple(perm)


@dataclass(frozen=True)
class Isometry:
    space: MetricSpace
    perm: Perm

    def __post_init__(self):
        if not is_isometry(self.space, self.perm):
            raise ValueError("permutation does not preserve distances")

    def __call__(self, x: Point) -> int:
        return self.perm[self.space.index(x)]

    def __str__(self):
        return format_perm(self.perm, self.space.points)


@dataclass(frozen=True)
class IsometryGroup:
    space: MetricSpace
    elements: tuple[Perm, ...]
    _members: frozenset = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(sorted(set(self.elements))))
        object.__setattr__(self, "_members", frozenset(self.elements))

    @property
    def identity(self) -> Perm:
        return identity(len(self.space))

    @property
    def identity_index(self) -> int:
        return self.elements.index(self.identity)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in self._members

    def __iter__(self):
        return iter(self.elements)

    def members(self) -> frozenset:
        return self._members

    def check(self, subset: Iterable[Perm]) -> frozenset:
        s = frozenset(subset)
        stray = s - self._members
        if stray:
            raise GroupMismatch("element outside the group",
                                element=format_perm(next(iter(stray)), self.space.points))
        return s

    def orbit(self, x: Point) -> list[int]:
        i = self.space.index(x)
        return sorted({g[i] for g in self.elements})

    def to_json(self):
        pts = self.space.points
        return {"order": len(self), "elements": [format_perm(g, pts) for g in self.elements]}


def verify_group(elements: Sequence[Perm], exhaustive: bool | None = None) -> None:
    """Raise :class:`NotAGroup` unless the set contains the identity and is closed.

    The exhaustive path checks the whole multiplication table. The default
    for large sets rebuilds the subgroup generated by greedily chosen
    generators and compares: equal sets prove closure as well.
    """
    S = set(elements)
    if not S:
        raise NotAGroup("empty set")
    n = len(next(iter(S)))
    if identity(n) not in S:
        raise NotAGroup("identity missing")
    if exhaustive is None:
        exhaustive = len(S) <= 400
    if exhaustive:
        for a in S:
            if inverse(a) not in S:
                raise NotAGroup("not inverse-closed", element=str(a))
            for b in S:
                if compose(a, b) not in S:
                    raise NotAGroup("not closed under composition", pair=[str(a), str(b)])
        return
    gens: list[Perm] = []
    H = {identity(n)}
    for g in sorted(S):
        if g in H:
            continue
        gens.append(g)
        frontier = list(H)
        while frontier:
            nxt = []
            for h in frontier:
                for s in gens:
                    p = compose(h, s)
                    if p not in H:
                        if p not in S:
                            raise NotAGroup("not closed under composition", pair=[str(h), str(s)])
                        H.add(p)
                        nxt.append(p)
            frontier = nxt
    if H != S:
        raise NotAGroup("set is not the subgroup it generates")


def full_isometry_group(space: MetricSpace, search_budget: int | None = DEFAULT_SEARCH_BUDGET,
                        verify: bool = True) -> IsometryGroup:
    """All distance-preserving permutations, by backtracking.

    A candidate image for point ``i`` must carry the same sorted distance
    row and match every distance to the points already assigned.
    """
    n = len(space)
    d = space.dist
    sig = [tuple(sorted(r)) for r in d]
    cands = [[t for t in range(n) if sig[t] == sig[i]] for i in range(n)]
    perm = [0] * n
    used = [False] * n
    out: list[Perm] = []
    nodes = 0

    def rec(i):
        nonlocal nodes
        if i == n:
            out.append(tuple(perm))
            return
        row_i = d[i]
        for t in cands[i]:
            if used[t]:
                continue
            nodes += 1
            if search_budget is not None and nodes > search_budget:
                raise SearchBudgetExceeded(f"more than {search_budget} search nodes", budget=search_budget)
            row_t = d[t]
            if all(row_t[perm[j]] == row_i[j] for j in range(i)):
                perm[i] = t
                used[t] = True
                rec(i + 1)
                used[t] = False

    rec(0)
    if verify:
        verify_group(out)
    return IsometryGroup(space, tuple(out))


def group_from_generators(space: MetricSpace, gens: Iterable[Perm]) -> IsometryGroup:
    """The subgroup generated by some isometries."""
    gens = [tuple(g) for g in gens]
    for g in gens:
        if not is_isometry(space, g):
            raise GroupMismatch("generator is not an isometry", element=format_perm(g, space.points))
    e = identity(len(space))
    H, frontier = {e}, [e]
    while frontier:
        nxt = []
        for h in frontier:
            for s in gens:
                p = compose(h, s)
                if p not in H:
                    H.add(p)
                    nxt.append(p)
        frontier = nxt
    return IsometryGroup(space, tuple(H))


# ---------------------------------------------------------------- partial maps

@dataclass(frozen=True)
class PartialIsometry:
    space: MetricSpace
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((self.space.index(s), self.space.index(t)) for s, t in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        src = [s for s, _ in pairs]
        dst = [t for _, t in pairs]
        if len(set(src)) != len(src) or len(set(dst)) != len(dst):
            raise ValueError("partial isometry must be injective")
        d = self.space.dist
        for s1, t1 in pairs:
            for s2, t2 in pairs:
                if d[s1][s2] != d[t1][t2]:
                    raise ValueError(f"pairs {s1}->{t1}, {s2}->{t2} do not preserve distance")

    def __len__(self):
        return len(self.pairs)

    def domain(self):
        return [s for s, _ in self.pairs]

    def image(self):
        return [t for _, t in self.pairs]

    def to_json(self):
        p = self.space.points
        return [[p[s], p[t]] for s, t in self.pairs]


@dataclass(frozen=True)
class ExtensionResult:
    ok: bool
    phi: PartialIsometry
    failure: dict | None = None

    def to_json(self):
        return {"ok": self.ok, "pairs": self.phi.to_json(), "failure": self.failure}


def extend_partial_isometry(space: MetricSpace, phi: PartialIsometry, target_size: int) -> ExtensionResult:
    """Back-and-forth: alternately add the smallest missing source, then the smallest missing target.

    Each new point is sent to the canonically smallest point realizing the
    required distance profile over the current image (or preimage).
    """
    n = len(space)
    if target_size > n:
        raise ValueError(f"target size {target_size} exceeds {n} points")
    d = space.dist
    pairs = list(phi.pairs)
    pts = space.points

    def step(forth: bool):
        if forth:
            have, other = [s for s, _ in pairs], [t for _, t in pairs]
        else:
            have, other = [t for _, t in pairs], [s for s, _ in pairs]
        fresh = next(x for x in range(n) if x not in have)
        profile = [d[fresh][h] for h in have]
        taken = set(other)
        for c in range(n):
            if c not in taken and all(d[c][o] == v for o, v in zip(other, profile)):
                pairs.append((fresh, c) if forth else (c, fresh))
                return None
        return {
            "direction": "forth" if forth else "back",
            "point": pts[fresh],
            "A": [pts[o] for o in other],
            "g": [format_rational(v) for v in profile],
        }

    forth = True
    while len(pairs) < target_size:
        failure = step(forth)
        if failure is not None:
            return ExtensionResult(False, PartialIsometry(space, tuple(pairs)), failure)
        forth = not forth
    return ExtensionResult(True, PartialIsometry(space, tuple(pairs)))


# ------------------------------------------------------------- neighbourhoods

@dataclass(frozen=True)
class NbhdSet:
    """``{g in G : d(x_i, g x_i) < eps_i}`` for the listed anchors."""

    group: IsometryGroup
    anchors: tuple[tuple[int, Fraction], ...]
    members: frozenset

    def __contains__(self, g):
        return g in self.members

    def __len__(self):
        return len(self.members)

    def to_json(self):
        pts = self.group.space.points
        return {
            "anchors": [[pts[x], format_rational(e)] for x, e in self.anchors],
            "size": len(self.members),
            "members": sorted(format_perm(g, pts) for g in self.members),
        }


def nbhd(G: IsometryGroup, anchors: Iterable[tuple[Point, object]]) -> NbhdSet:
    space = G.space
    anchors = tuple((space.index(x), parse_rational(e)) for x, e in anchors)
    if not anchors:
        raise ValueError("at least one anchor is required")
    if any(e <= 0 for _, e in anchors):
        raise ValueError("radii must be positive")
    d = space.dist
    members = frozenset(g for g in G if all(d[x][g[x]] < e for x, e in anchors))
    return NbhdSet(G, anchors, members)


def displacement(space: MetricSpace, g: Perm) -> Fraction:
    d = space.dist
    return max((d[x][g[x]] for x in range(len(g))), default=Fraction(0))


# ---------------------------------------------------------------- set algebra

def product(G: IsometryGroup, A: Iterable[Perm], B: Iterable[Perm]) -> frozenset:
    A, B = G.check(A), G.check(B)
    return frozenset(compose(a, b) for a in A for b in B)


def inverse_set(G: IsometryGroup, A: Iterable[Perm]) -> frozenset:
    return frozenset(inverse(a) for a in G.check(A))


def power(G: IsometryGroup, A: Iterable[Perm], k: int) -> frozenset:
    A = G.check(A)
    out = frozenset([G.identity])
    for _ in range(k):
        out = frozenset(compose(x, a) for x in out for a in A)
    return out


def is_subset(G: IsometryGroup, A: Iterable[Perm], B: Iterable[Perm]) -> bool:
    return G.check(A) <= G.check(B)


def are_disjoint(G: IsometryGroup, A: Iterable[Perm], B: Iterable[Perm]) -> bool:
    return not (G.check(A) & G.check(B))


def restrict_perm(perm: Perm, n: int) -> Perm:
    """Restriction of a permutation of a grown space to its first ``n`` points."""
    r = tuple(perm[:n])
    if any(v >= n for v in r):
        raise UnknownPoint("permutation moves an old point outside the old space")
    return r
