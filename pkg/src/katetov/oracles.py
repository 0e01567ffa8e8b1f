"""Independent brute-force oracles.

Nothing here shares code with the paths it checks: no pruning, no
Katetov-extension formula, no backtracking.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterator, Sequence

from .metric import MetricSpace, Subspace, parse_rational


def lipschitz_grid_extensions(space: MetricSpace, A: Subspace, g: Sequence, q: int, cap) -> Iterator[tuple]:
    """Every grid-valued 1-Lipschitz function agreeing with ``g`` on ``A``, by full enumeration."""
    cap = parse_rational(cap)
    top = int(cap * q)
    # work in grid units; distances need not be on the grid
    dq = [[x * q for x in row] for row in space.dist]
    if all(x.denominator == 1 for row in dq for x in row):
        dq = [[int(x) for x in row] for row in dq]
    fixed = {a: parse_rational(v) * q for a, v in zip(A.indices, g)}
    if any(v.denominator != 1 for v in fixed.values()):
        return
    fixed = {a: int(v) for a, v in fixed.items()}
    free = [i for i in range(len(space)) if i not in fixed]
    n = len(space)
    for combo in itertools.product(range(top + 1), repeat=len(free)):
        v = dict(fixed)
        v.update(zip(free, combo))
        if all(abs(v[i] - v[j]) <= dq[i][j] for i in range(n) for j in range(i + 1, n)):
            yield tuple(Fraction(v[i], q) for i in range(n))


def isometries_by_filter(space: MetricSpace) -> list[tuple]:
    """All permutations that preserve every distance, without pruning."""
    n = len(space)
    d = space.dist
    return sorted(
        p for p in itertools.permutations(range(n))
        if all(d[p[i]][p[j]] == d[i][j] for i in range(n) for j in range(n))
    )


def one_point_property_bruteforce(space: MetricSpace, k: int, q: int, cap) -> bool:
    """Every grid Katetov profile on every ``A`` with ``1 <= |A| <= k`` has a realizing point."""
    levels = [Fraction(i, q) for i in range(int(parse_rational(cap) * q) + 1)]
    d = space.dist
    n = len(space)
    for size in range(1, k + 1):
        for A in itertools.combinations(range(n), size):
            for g in itertools.product(levels, repeat=size):
                katetov = all(
                    abs(g[s] - g[t]) <= d[A[s]][A[t]] <= g[s] + g[t]
                    for s in range(size) for t in range(size)
                )
                if katetov and not any(all(d[y][a] == ga for a, ga in zip(A, g)) for y in range(n)):
                    return False
    return True


def grid_metric_spaces(n: int, q: int, cap, up_to_isomorphism: bool = True) -> Iterator[MetricSpace]:
    """All metrics on ``n`` labelled points with positive values in ``{i/q : i/q <= cap}``."""
    from .metric import validate
    from .errors import TriangleViolation

    levels = [Fraction(i, q) for i in range(1, int(parse_rational(cap) * q) + 1)]
    pairs = list(itertools.combinations(range(n), 2))
    seen = set()
    perms = list(itertools.permutations(range(n)))
    for vals in itertools.product(levels, repeat=len(pairs)):
        m = [[Fraction(0)] * n for _ in range(n)]
        for (i, j), v in zip(pairs, vals):
            m[i][j] = m[j][i] = v
        if any(m[i][k] > m[i][j] + m[j][k] for i in range(n) for j in range(n) for k in range(n)):
            continue
        if up_to_isomorphism:
            key = min(tuple(m[p[i]][p[j]] for i, j in pairs) for p in perms)
            if key in seen:
                continue
            seen.add(key)
        try:
            yield validate([chr(ord("a") + i) for i in range(n)], m)
        except TriangleViolation:  # pragma: no cover - filtered above
            continue
