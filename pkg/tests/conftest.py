from fractions import Fraction

import pytest
from hypothesis import strategies as st

from katetov.metric import validate


@pytest.fixture
def singleton():
    return validate(["x"], [[0]])


@pytest.fixture
def pair2():
    return validate(["a", "b"], [[0, 2], [2, 0]])


@pytest.fixture
def path():
    return validate(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])


@pytest.fixture
def triangle():
    return validate(["a", "b", "c"], [[0, 1, 1], [1, 0, 1], [1, 1, 0]])


@pytest.fixture
def square():
    return validate(["a", "b", "c", "d"],
                    [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]])


@pytest.fixture
def rectangle():
    return validate(["a", "b", "c", "d"],
                    [[0, 1, 2, 2], [1, 0, 2, 2], [2, 2, 0, 1], [2, 2, 1, 0]])


def _closure(m):
    n = len(m)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if m[i][k] + m[k][j] < m[i][j]:
                    m[i][j] = m[i][k] + m[k][j]
    return m


@st.composite
def metric_spaces(draw, min_points=1, max_points=5, q=2, top=4):
    """Shortest-path closures of random weighted complete graphs: every finite metric
    with values on the ``1/q`` grid arises this way."""
    n = draw(st.integers(min_points, max_points))
    m = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w = Fraction(draw(st.integers(1, top)), q)
            m[i][j] = m[j][i] = w
    return validate([f"p{i}" for i in range(n)], _closure(m))
