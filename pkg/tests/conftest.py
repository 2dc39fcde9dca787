"""Shared fixtures: small named graphs and seeded random connected graphs."""

from __future__ import annotations

import numpy as np
import pytest

from kgrip.graphs import Graph, generate


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def star_graph(n: int) -> Graph:
    """Star on n vertices: center 0, leaves 1..n-1."""
    return Graph(n, [(0, i) for i in range(1, n)])


def random_connected(n: int, p: float, seed: int) -> Graph:
    """ER graph reduced to its largest component (may have fewer than n vertices)."""
    return generate("er", {"n": n, "p": p}, seed)


def random_tree(n: int, seed: int) -> Graph:
    rng = np.random.default_rng(seed)
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    return Graph(n, edges)


@pytest.fixture
def p3() -> Graph:
    return path_graph(3)


@pytest.fixture
def k3() -> Graph:
    return complete_graph(3)


@pytest.fixture
def c4() -> Graph:
    return cycle_graph(4)


@pytest.fixture
def k4() -> Graph:
    return complete_graph(4)
