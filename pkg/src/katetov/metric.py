"""Exact rational scalars and validated finite metric (or pseudometric) spaces."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    Asymmetric,
    DuplicatePointId,
    EmptySubset,
    NegativeDistance,
    NonzeroDiagonal,
    NotSquare,
    ParseError,
    TriangleViolation,
    UnknownPoint,
    ZeroDistanceDistinctPoints,
)

Rational = Fraction
Point = Union[str, int]

_RATIONAL_RE = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, an integer string, an int or a Fraction. Floats are refused."""
    if isinstance(value, bool):
        raise ParseError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str) and _RATIONAL_RE.match(value):
        try:
            return Fraction(value.replace(" ", ""))
        except ZeroDivisionError:
            raise ParseError(f"zero denominator: {value!r}") from None
    raise ParseError(f"not a rational: {value!r}")


def format_rational(r: Fraction) -> str:
    return str(Fraction(r))


@dataclass(frozen=True)
class MetricSpace:
    """A finite point set with an exact distance matrix.

    Build instances with :func:`validate` (or :meth:`from_json`); the
    constructor itself trusts its input.
    """

    points: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]
    pseudometric: bool = False
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    def __len__(self):
        return len(self.points)

    def index(self, p: Point) -> int:
        if isinstance(p, (int, np.integer)) and not isinstance(p, bool):
            if 0 <= p < len(self.points):
                return int(p)
            raise UnknownPoint(f"index {p} out of range", point=int(p))
        try:
            return self._index[p]
        except (KeyError, TypeError):
            raise UnknownPoint(f"unknown point {p!r}", point=str(p)) from None

    def d(self, p: Point, q: Point) -> Fraction:
        return self.dist[self.index(p)][self.index(q)]

    def row(self, p: Point) -> tuple[Fraction, ...]:
        return self.dist[self.index(p)]

    def subspace(self, members: Iterable[Point]) -> "Subspace":
        return Subspace(self, tuple(sorted({self.index(p) for p in members})))

    def all_points(self) -> "Subspace":
        return Subspace(self, tuple(range(len(self))))

    def diameter(self) -> Fraction:
        return max((max(r) for r in self.dist), default=Fraction(0))

    def to_json(self) -> dict:
        return {
            "points": list(self.points),
            "dist": [[format_rational(x) for x in r] for r in self.dist],
            "pseudometric": self.pseudometric,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MetricSpace":
        try:
            points = data["points"]
            dist = data["dist"]
        except (KeyError, TypeError):
            raise ParseError("space JSON needs 'points' and 'dist'") from None
        if not isinstance(points, list) or not all(isinstance(p, str) for p in points):
            raise ParseError("'points' must be a list of strings")
        if not isinstance(dist, list) or not all(isinstance(r, list) for r in dist):
            raise ParseError("'dist' must be a list of lists")
        matrix = [[parse_rational(x) for x in r] for r in dist]
        return validate(points, matrix, pseudometric=bool(data.get("pseudometric", False)))


@dataclass(frozen=True)
class Subspace:
    """A subset of a parent space, as strictly increasing point positions."""

    parent: MetricSpace
    indices: tuple[int, ...]

    def __post_init__(self):
        n = len(self.parent)
        if any(not 0 <= i < n for i in self.indices):
            raise UnknownPoint("subspace index out of range", indices=list(self.indices))
        if any(a >= b for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("subspace indices must be strictly increasing")

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def ids(self) -> list[str]:
        return [self.parent.points[i] for i in self.indices]

    def induced(self) -> MetricSpace:
        d = self.parent.dist
        return MetricSpace(
            tuple(self.ids()),
            tuple(tuple(d[i][j] for j in self.indices) for i in self.indices),
            self.parent.pseudometric,
        )


def _as_int_matrix(dist: Sequence[Sequence[Fraction]]):
    """Scale to a common denominator; int64 when it is safe, python ints otherwise."""
    den = 1
    for r in dist:
        for x in r:
            den = math.lcm(den, x.denominator)
    scaled = [[x.numerator * (den // x.denominator) for x in r] for r in dist]
    biggest = max((abs(v) for r in scaled for v in r), default=0)
    dtype = np.int64 if biggest < 2**60 else object
    return np.array(scaled, dtype=dtype).reshape(len(dist), len(dist))


def validate(points: Sequence[str], dist: Sequence[Sequence], pseudometric: bool = False) -> MetricSpace:
    """Check the metric axioms and return a :class:`MetricSpace`.

    Raises the first violated axiom. Triangle witnesses ``(i, j, k)`` are the
    lexicographically smallest triple with ``d(i,k) > d(i,j) + d(j,k)``.
    """
    points = tuple(points)
    n = len(points)
    if len(set(points)) != n:
        dup = next(p for p in points if points.count(p) > 1)
        raise DuplicatePointId(f"duplicate point id {dup!r}", point=dup)
    if len(dist) != n or any(len(r) != n for r in dist):
        raise NotSquare(f"distance matrix must be {n}x{n}")
    m = tuple(tuple(parse_rational(x) for x in r) for r in dist)

    for i in range(n):
        if m[i][i] != 0:
            raise NonzeroDiagonal(f"d({points[i]},{points[i]}) != 0", i=points[i])
    for i in range(n):
        for j in range(i + 1, n):
            if m[i][j] != m[j][i]:
                raise Asymmetric(f"d({points[i]},{points[j]}) != d({points[j]},{points[i]})",
                                 i=points[i], j=points[j])
    for i in range(n):
        for j in range(n):
            if m[i][j] < 0:
                raise NegativeDistance(f"d({points[i]},{points[j]}) < 0", i=points[i], j=points[j])

    if n:
        a = _as_int_matrix(m)
        bad = False
        for j in range(n):
            if np.any(a[:, j][:, None] + a[j, :][None, :] < a):
                bad = True
                break
        if bad:
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        if m[i][k] > m[i][j] + m[j][k]:
                            raise TriangleViolation(
                                f"d({points[i]},{points[k]}) > d({points[i]},{points[j]}) + d({points[j]},{points[k]})",
                                i=points[i], j=points[j], k=points[k],
                            )

    if not pseudometric:
        for i in range(n):
            for j in range(i + 1, n):
                if m[i][j] == 0:
                    raise ZeroDistanceDistinctPoints(
                        f"d({points[i]},{points[j]}) = 0", i=points[i], j=points[j])
    return MetricSpace(points, m, pseudometric)


def diameter(space: MetricSpace, subset: Subspace | None = None) -> Fraction:
    idx = subset.indices if subset is not None else tuple(range(len(space)))
    if not idx:
        raise EmptySubset("diameter of an empty subset")
    return max(space.dist[i][j] for i in idx for j in idx)


def dist_to_set(space: MetricSpace, x: Point, subset: Subspace) -> Fraction:
    if not len(subset):
        raise EmptySubset("distance to an empty subset")
    row = space.dist[space.index(x)]
    return min(row[a] for a in subset.indices)


def is_isometric_map(src: MetricSpace, dst: MetricSpace, mapping: Mapping[Point, Point]) -> bool:
    pairs = [(src.index(s), dst.index(t)) for s, t in mapping.items()]
    targets = [t for _, t in pairs]
    if len(set(targets)) != len(targets):
        return False
    return all(
        src.dist[s1][s2] == dst.dist[t1][t2]
        for s1, t1 in pairs
        for s2, t2 in pairs
    )


def load_space(path) -> MetricSpace:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from None
    return MetricSpace.from_json(data)
