"""Finite grid-valued analogue of the iterated Katetov extension chain.

``extend_once`` adjoins, for every control set ``A`` with ``|A| <= k`` and
every grid Katetov profile ``g`` on ``A`` that no point realizes, the
truncated extension ``g^X``. New points are compared with each other by
the sup metric, i.e. the result is ``X`` together with a finite piece of
``E(X)``, with ``X`` sitting inside through the Kuratowski embedding.

All hot loops run on integer grid units (distance * q).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .errors import GridOverflow, SizeBudgetExceeded
from .functions import enumerate_profiles, katetov_extension, one_point_extension, truncate
from .metric import MetricSpace, Subspace, diameter, format_rational, parse_rational, validate

DEFAULT_SIZE_BUDGET = 4096


@dataclass(frozen=True)
class Grid:
    q: int
    cap: Fraction

    def __post_init__(self):
        cap = parse_rational(self.cap)
        object.__setattr__(self, "cap", cap)
        if not isinstance(self.q, int) or self.q < 1:
            raise ValueError(f"granularity must be a positive integer, got {self.q!r}")
        if cap <= 0 or (cap * self.q).denominator != 1:
            raise ValueError(f"cap {cap} must be a positive multiple of 1/{self.q}")

    @classmethod
    def parse(cls, text: str) -> "Grid":
        """``"q:B"``, e.g. ``"2:2"``."""
        q, _, cap = text.partition(":")
        return cls(int(q), parse_rational(cap or "1"))

    @property
    def top(self) -> int:
        return int(self.cap * self.q)

    def levels(self) -> list[Fraction]:
        return [Fraction(i, self.q) for i in range(self.top + 1)]

    def contains(self, value) -> bool:
        v = Fraction(value)
        return 0 <= v <= self.cap and (v * self.q).denominator == 1

    def units(self, value) -> int:
        if not self.contains(value):
            raise GridOverflow(f"{value} is off the grid q={self.q}, B={self.cap}",
                               value=format_rational(Fraction(value)))
        return int(Fraction(value) * self.q)

    def to_json(self):
        return {"q": self.q, "cap": format_rational(self.cap)}

    def __str__(self):
        return f"{self.q}:{format_rational(self.cap)}"


@dataclass(frozen=True)
class Approximant:
    space: MetricSpace
    grid: Grid
    witness_k: int = 0
    provenance: tuple = field(default=())

    def __post_init__(self):
        units(self.space, self.grid)

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "grid": self.grid.to_json(),
            "witness_k": self.witness_k,
            "provenance": [dict(p) for p in self.provenance],
        }

    @classmethod
    def from_json(cls, data) -> "Approximant":
        g = data["grid"]
        return cls(
            MetricSpace.from_json(data["space"]),
            Grid(int(g["q"]), parse_rational(g["cap"])),
            int(data.get("witness_k", 0)),
            tuple(data.get("provenance", ())),
        )


def units(space: MetricSpace, grid: Grid) -> list[list[int]]:
    return [[grid.units(x) for x in row] for row in space.dist]


def _fresh_ids(space: MetricSpace, count: int, prefix: str = "p") -> list[str]:
    taken = set(space.points)
    out, c = [], len(space)
    while len(out) < count:
        name = f"{prefix}{c}"
        c += 1
        if name not in taken:
            out.append(name)
            taken.add(name)
    return out


def extend_once(X: Approximant, k: int, size_budget: int | None = DEFAULT_SIZE_BUDGET,
                round_no: int = 1) -> Approximant:
    """Adjoin every unrealized truncated extension controlled by at most ``k`` points."""
    if k < 1:
        raise ValueError("control bound must be at least 1")
    space, grid = X.space, X.grid
    U = units(space, grid)
    n, top = len(U), grid.top
    if n and max(map(max, U)) > top:
        raise GridOverflow("diameter exceeds the grid cap", value=format_rational(diameter(space)))
    levels = range(top + 1)

    rows = {tuple(r) for r in U}
    new: dict[tuple, tuple] = {}
    for size in range(1, min(k, n) + 1):
        for A in itertools.combinations(range(n), size):
            sub = [[U[a][b] for b in A] for a in A]
            realized = {tuple(U[y][a] for a in A) for y in range(n)}
            cols = [U[a] for a in A]
            for g in enumerate_profiles(sub, levels):
                if g in realized:
                    continue
                f = tuple(min(top, min(ga + col[x] for ga, col in zip(g, cols))) for x in range(n))
                if f in new or f in rows:
                    continue
                new[f] = (A, g)
                if size_budget is not None and n + len(new) > size_budget:
                    raise SizeBudgetExceeded(
                        f"growth passed the budget of {size_budget} points", budget=size_budget)
    if not new:
        return X

    profiles = list(new)
    ids = _fresh_ids(space, len(profiles))
    m = n + len(profiles)
    D = [list(r) + [0] * len(profiles) for r in U] + [[0] * m for _ in profiles]
    for i, f in enumerate(profiles):
        for x in range(n):
            D[n + i][x] = D[x][n + i] = f[x]
        for j in range(i + 1, len(profiles)):
            h = profiles[j]
            s = max(abs(a - b) for a, b in zip(f, h))
            D[n + i][n + j] = D[n + j][n + i] = s
    q = grid.q
    grown = validate(space.points + tuple(ids),
                     [[Fraction(v, q) for v in r] for r in D], pseudometric=space.pseudometric)
    log = list(X.provenance)
    for pid, f in zip(ids, profiles):
        A, g = new[f]
        log.append({
            "point": pid,
            "round": round_no,
            "controllers": [space.points[a] for a in A],
            "values": [format_rational(Fraction(v, q)) for v in g],
        })
    return Approximant(grown, grid, 0, tuple(log))


@dataclass(frozen=True)
class PropertyCheck:
    """Outcome of an exhaustive k-point realization check."""

    ok: bool
    k: int
    witness_k: int
    counterexample: dict | None = None
    checked: int = 0

    def to_json(self):
        return {"ok": self.ok, "k": self.k, "witness_k": self.witness_k,
                "counterexample": self.counterexample, "checked": self.checked}


def check_one_point_property(X: MetricSpace, k: int, grid: Grid,
                             order_seed: int | None = None) -> PropertyCheck:
    """Is every grid Katetov profile on every ``A`` with ``|A| <= k`` realized by a point?

    Sizes are checked in increasing order, so ``witness_k`` is the largest
    size below the first failure. ``order_seed`` shuffles the enumeration of
    subsets and profile values (the verdict must not depend on it).
    """
    U = units(X, grid)
    n = len(U)
    rng = random.Random(order_seed) if order_seed is not None else None
    checked = 0
    for size in range(1, k + 1):
        subsets = list(itertools.combinations(range(n), size))
        levels = list(range(grid.top + 1))
        if rng is not None:
            rng.shuffle(subsets)
        for A in subsets:
            if rng is not None:
                rng.shuffle(levels)
            sub = [[U[a][b] for b in A] for a in A]
            realized = {tuple(U[y][a] for a in A) for y in range(n)}
            for g in enumerate_profiles(sub, levels):
                checked += 1
                if g not in realized:
                    return PropertyCheck(False, k, size - 1, {
                        "A": [X.points[a] for a in A],
                        "g": [format_rational(Fraction(v, grid.q)) for v in g],
                    }, checked)
    return PropertyCheck(True, k, k if n else 0, None, checked)


def build_approximant(seed: MetricSpace, k: int, rounds: int, grid: Grid,
                      size_budget: int | None = DEFAULT_SIZE_BUDGET) -> Approximant:
    """Apply :func:`extend_once` ``rounds`` times, then certify the k-point property."""
    X = Approximant(seed, grid)
    if size_budget is not None and len(seed) > size_budget:
        raise SizeBudgetExceeded("seed is larger than the size budget", budget=size_budget)
    for r in range(1, rounds + 1):
        X = extend_once(X, k, size_budget, round_no=r)
    return replace(X, witness_k=check_one_point_property(X.space, k, grid).witness_k)


def regrid(X: Approximant, grid: Grid) -> Approximant:
    """Reinterpret the same space on another grid and re-certify (never above the old witness)."""
    units(X.space, grid)
    w = check_one_point_property(X.space, X.witness_k, grid).witness_k
    return Approximant(X.space, grid, w, X.provenance)


def extension_with_realized_point(X: Approximant, A: Subspace, g: Sequence) -> tuple[Approximant, int]:
    """Return ``(X', y)`` with ``d(y, a) = g(a)`` on ``A``.

    ``y`` is the first existing point realizing ``g`` if there is one,
    otherwise a new point at the truncated Katetov extension of ``g``.
    """
    space, grid = X.space, X.grid
    g = tuple(parse_rational(v) for v in g)
    for v in g:
        grid.units(v)
    for y in range(len(space)):
        if all(space.dist[y][a] == v for a, v in zip(A.indices, g)):
            return X, y
    f = katetov_extension(space, A, g)
    if max(f.values) > grid.cap:
        if diameter(space) > grid.cap:
            raise GridOverflow("cannot truncate: diameter exceeds the grid cap",
                               value=format_rational(diameter(space)))
        f = truncate(f, grid.cap)
    (pid,) = _fresh_ids(space, 1, prefix="y")
    grown = one_point_extension(space, f, pid)
    log = X.provenance + ({
        "point": pid,
        "round": "realize",
        "controllers": A.ids(),
        "values": [format_rational(v) for v in g],
    },)
    w = check_one_point_property(grown, X.witness_k, grid).witness_k
    return Approximant(grown, grid, w, log), len(space)
