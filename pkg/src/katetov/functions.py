"""Katetov functions over a finite metric space.

A Katetov function ``f`` is 1-Lipschitz with ``d(x, y) <= f(x) + f(y)``;
these are exactly the distance profiles of points in one-point metric
extensions. The collection of all of them, under the sup metric, is
``E(X)``, which is never materialised here: enumeration is always
restricted to a finite grid of values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

from .errors import (
    CapTooSmall,
    DuplicatePointId,
    LengthMismatch,
    NotKatetov,
    NotKatetovOnA,
    SpaceMismatch,
)
from .metric import MetricSpace, Point, Subspace, diameter, format_rational, parse_rational, validate


class Verdict(NamedTuple):
    ok: bool
    witness: dict | None = None

    def __bool__(self):
        return self.ok


def _first_violation(dist, values, labels) -> dict | None:
    n = len(values)
    for i in range(n):
        if values[i] < 0:
            return {"x": labels[i], "y": labels[i], "inequality": "nonnegative"}
    for i in range(n):
        for j in range(i + 1, n):
            d = dist[i][j]
            if abs(values[i] - values[j]) > d:
                return {"x": labels[i], "y": labels[j], "inequality": "lipschitz"}
            if d > values[i] + values[j]:
                return {"x": labels[i], "y": labels[j], "inequality": "katetov"}
    return None


def is_katetov(space: MetricSpace, values: Sequence) -> Verdict:
    """Check both defining inequalities at every pair; report the first failure."""
    if len(values) != len(space):
        raise LengthMismatch(f"{len(values)} values for {len(space)} points")
    vals = [parse_rational(v) for v in values]
    w = _first_violation(space.dist, vals, space.points)
    return Verdict(w is None, w)


@dataclass(frozen=True)
class KatetovFunction:
    space: MetricSpace
    values: tuple[Fraction, ...]

    def __post_init__(self):
        vals = tuple(parse_rational(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        verdict = is_katetov(self.space, vals)
        if not verdict.ok:
            raise NotKatetov("not a Katetov function", **verdict.witness)

    def __call__(self, x: Point) -> Fraction:
        return self.values[self.space.index(x)]

    def __len__(self):
        return len(self.values)

    def restrict(self, subset: Subspace) -> tuple[Fraction, ...]:
        return tuple(self.values[i] for i in subset.indices)

    def to_json(self, inline_space: bool = True) -> dict:
        out = {"values": [format_rational(v) for v in self.values]}
        if inline_space:
            out["space"] = self.space.to_json()
        return out

    @classmethod
    def from_json(cls, data, space: MetricSpace | None = None) -> "KatetovFunction":
        if space is None:
            space = MetricSpace.from_json(data["space"])
        return cls(space, tuple(parse_rational(v) for v in data["values"]))


@dataclass(frozen=True)
class ControlCertificate:
    function: KatetovFunction
    controllers: Subspace

    def __post_init__(self):
        if not is_controlled_by(self.function, self.controllers):
            raise ValueError("function is not controlled by the given subset")


def katetov_extension(space: MetricSpace, A: Subspace, g: Sequence) -> KatetovFunction:
    """Largest 1-Lipschitz extension of ``g`` from ``A``: ``x -> min_a g(a) + d(x, a)``."""
    if A.parent is not space and A.parent != space:
        raise SpaceMismatch("controller subset belongs to another space")
    g = [parse_rational(v) for v in g]
    if len(g) != len(A):
        raise LengthMismatch(f"{len(g)} values for {len(A)} controllers")
    sub = [[space.dist[i][j] for j in A.indices] for i in A.indices]
    w = _first_violation(sub, g, A.ids())
    if w is not None:
        raise NotKatetovOnA("g is not Katetov on A", **w)
    if not A.indices:
        raise NotKatetovOnA("cannot extend from an empty subset")
    vals = tuple(
        min(ga + space.dist[x][a] for a, ga in zip(A.indices, g))
        for x in range(len(space))
    )
    return KatetovFunction(space, vals)


def is_controlled_by(f: KatetovFunction, A: Subspace) -> bool:
    if not len(A):
        return False
    return katetov_extension(f.space, A, f.restrict(A)).values == f.values


def sup_metric(f: KatetovFunction, g: KatetovFunction) -> Fraction:
    if f.space != g.space:
        raise SpaceMismatch("functions live on different spaces")
    return max((abs(a - b) for a, b in zip(f.values, g.values)), default=Fraction(0))


def kuratowski(space: MetricSpace, x: Point) -> KatetovFunction:
    return KatetovFunction(space, space.row(x))


def one_point_extension(space: MetricSpace, f: KatetovFunction, new_id: str) -> MetricSpace:
    """Adjoin ``new_id`` at distance ``f(x)`` from each ``x``.

    A zero value means the new point duplicates an existing one; the result
    is then flagged as a pseudometric.
    """
    if f.space != space:
        raise SpaceMismatch("function belongs to another space")
    if new_id in space.points:
        raise DuplicatePointId(f"point {new_id!r} already exists", point=new_id)
    vals = list(f.values)
    rows = [list(r) + [v] for r, v in zip(space.dist, vals)]
    rows.append(vals + [Fraction(0)])
    pseudo = space.pseudometric or any(v == 0 for v in vals)
    return validate(space.points + (new_id,), rows, pseudometric=pseudo)


def truncate(f: KatetovFunction, cap) -> KatetovFunction:
    """``min(f, cap)``; stays Katetov whenever ``cap`` is at least the diameter."""
    cap = parse_rational(cap)
    if len(f.space) and cap < diameter(f.space):
        raise CapTooSmall(f"cap {cap} below diameter {diameter(f.space)}", cap=format_rational(cap))
    return KatetovFunction(f.space, tuple(min(v, cap) for v in f.values))


def translate(f: KatetovFunction, g_perm: Sequence[int]) -> KatetovFunction:
    """Left-regular action ``(g.f)(x) = f(g^-1 x)`` for a point permutation ``g``."""
    inv = [0] * len(g_perm)
    for i, j in enumerate(g_perm):
        inv[j] = i
    return KatetovFunction(f.space, tuple(f.values[inv[x]] for x in range(len(f.values))))


def enumerate_profiles(dist: Sequence[Sequence], levels: Sequence) -> Iterator[tuple]:
    """All Katetov vectors over a (sub)matrix with entries drawn from ``levels``.

    Lexicographic in the order of ``levels``. Works for ints or Fractions;
    pruned pairwise as values are assigned.
    """
    n = len(dist)
    chosen: list = []

    def rec(i):
        if i == n:
            yield tuple(chosen)
            return
        row = dist[i]
        for v in levels:
            ok = True
            for j, u in enumerate(chosen):
                d = row[j]
                if d > u + v or u - v > d or v - u > d:
                    ok = False
                    break
            if ok:
                chosen.append(v)
                yield from rec(i + 1)
                chosen.pop()

    yield from rec(0)


def grid_levels(q: int, cap) -> list[Fraction]:
    cap = parse_rational(cap)
    return [Fraction(i, q) for i in range(int(cap * q) + 1)]


def grid_katetov_functions(space: MetricSpace, q: int, cap) -> Iterator[KatetovFunction]:
    """Every Katetov function on ``space`` with values in ``{i/q : 0 <= i/q <= cap}``."""
    for vals in enumerate_profiles(space.dist, grid_levels(q, cap)):
        yield KatetovFunction(space, vals)
