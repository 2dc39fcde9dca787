"""Uniform spanning trees and the UST-based estimate of diag(pseudoinverse).

Sampling uses Wilson's loop-erased random walks: the plain rooted form for
whole-graph USTs, and a two-root forest variant that yields a tree drawn
uniformly from the spanning trees containing one fixed edge (walks stop on
either root component; joining the components by the fixed edge gives the
tree).

The diagonal estimate rests on two facts.  First, the resistance R(u,v)
equals the expected signed number of times the path u->v of a UST traverses
the edges of one fixed u->v path, counted along that fixed path with +1 when
tree path and fixed path agree in direction and -1 when they oppose; we use
BFS-tree paths from a pivot u.  Second, one solved pseudoinverse column at
the pivot converts resistances into diagonal entries:

    diag[v] = R(u,v) - P[u,u] + 2 P[v,u].

After an edge {a,b} is inserted, the tree sample is not re-drawn from
scratch.  With w = R_new(a,b) (the resistance of the inserted edge in the new
graph), a UST of the new graph contains {a,b} with probability w, so the new
estimate mixes freshly sampled trees that contain {a,b} (weight w) with the
existing repository (weight 1-w); per-round tree lists shrink proportionally
so the repository size stays near its budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvariantError, SolverError, StaleStateError
from .graphs import Graph, assert_connected, bfs_parents, canonical_edge
from .linalg import DEFAULT_SOLVER, SolverConfig, effective_resistance, solve_lpinv_column

_WALK_STEP_GUARD = 10**9


class SpanningTree:
    """Spanning tree as a parent-pointer array (parent[root] == -1)."""

    __slots__ = ("parent", "root")

    def __init__(self, parent: list[int], root: int):
        self.parent = parent
        self.root = root

    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            canonical_edge(v, p) for v, p in enumerate(self.parent) if p >= 0
        )

    def check_spanning(self, graph: Graph) -> None:
        """Verify the tree spans the graph and uses only graph edges (test hook)."""
        n = graph.n
        if len(self.parent) != n:
            raise InvariantError("tree size does not match graph")
        seen = 0
        for v, p in enumerate(self.parent):
            if p < 0:
                continue
            seen += 1
            if not graph.has_edge(v, p):
                raise InvariantError(f"tree edge ({v},{p}) not in graph")
        if seen != n - 1:
            raise InvariantError(f"tree has {seen} edges, expected {n - 1}")
        rooted = self.rooted_at(self.root)  # raises if cyclic / disconnected
        if len(rooted.order) != n:
            raise InvariantError("tree does not span all vertices")

    def rooted_at(self, pivot: int) -> "RootedTree":
        """Re-rooted view with Euler-interval subtree tests."""
        n = len(self.parent)
        children: list[list[int]] = [[] for _ in range(n)]
        for v, p in enumerate(self.parent):
            if p >= 0:
                children[v].append(p)
                children[p].append(v)
        tparent = [-2] * n
        tin = [0] * n
        tout = [0] * n
        order: list[int] = []
        tparent[pivot] = -1
        clock = 0
        stack = [(pivot, False)]
        while stack:
            v, done = stack.pop()
            if done:
                tout[v] = clock
                continue
            tin[v] = clock
            clock += 1
            order.append(v)
            stack.append((v, True))
            for w in children[v]:
                if tparent[w] == -2:
                    tparent[w] = v
                    stack.append((w, False))
        return RootedTree(tparent, tin, tout, order)


@dataclass
class RootedTree:
    parent: list[int]
    tin: list[int]
    tout: list[int]
    order: list[int]

    def in_subtree(self, v: int, top: int) -> bool:
        return self.tin[top] <= self.tin[v] < self.tout[top]


class BfsTree:
    """Deterministic BFS tree from a pivot (sorted adjacency -> unique parents)."""

    __slots__ = ("pivot", "parent", "depth")

    def __init__(self, graph: Graph, pivot: int):
        self.pivot = pivot
        self.parent, self.depth = bfs_parents(graph, pivot)
        if any(p == -2 for p in self.parent):
            raise InvariantError("BFS tree requires a connected graph")


# -- Wilson sampling -----------------------------------------------------------


def _loop_erased_fill(graph: Graph, in_tree: bytearray, parent: list[int], rng) -> None:
    """Grow the partial forest in ``in_tree`` to span the whole graph."""
    nxt = [-1] * graph.n
    steps = 0
    integers = rng.integers
    adj = [graph.neighbors(v) for v in range(graph.n)]
    for start in range(graph.n):
        if in_tree[start]:
            continue
        u = start
        while not in_tree[u]:
            nbrs = adj[u]
            nxt[u] = nbrs[integers(0, len(nbrs))]
            u = nxt[u]
            steps += 1
            if steps > _WALK_STEP_GUARD:
                raise SolverError("random walk exceeded the step guard; graph too large?")
        u = start
        while not in_tree[u]:
            in_tree[u] = 1
            parent[u] = nxt[u]
            u = nxt[u]


def sample_ust(graph: Graph, root: int, rng: np.random.Generator) -> SpanningTree:
    """Uniform spanning tree of a connected graph, rooted at ``root``."""
    parent = [-1] * graph.n
    in_tree = bytearray(graph.n)
    in_tree[root] = 1
    _loop_erased_fill(graph, in_tree, parent, rng)
    return SpanningTree(parent, root)


def sample_ust_with_edge(graph: Graph, a: int, b: int, rng: np.random.Generator) -> SpanningTree:
    """Uniform sample from the spanning trees that contain the edge {a,b}.

    Runs Wilson's walks against a two-component forest rooted at a and b
    (walks absorb on either component), then joins the components with {a,b}.
    """
    if not graph.has_edge(a, b):
        raise InvariantError(f"fixed edge ({a},{b}) is not in the graph")
    parent = [-1] * graph.n
    in_tree = bytearray(graph.n)
    in_tree[a] = 1
    in_tree[b] = 1
    _loop_erased_fill(graph, in_tree, parent, rng)
    parent[b] = a  # join the two components by the fixed edge; root stays a
    return SpanningTree(parent, a)


# -- aggregation and the diagonal estimate ---------------------------------------


def aggregate_tree(tree: SpanningTree, acc: np.ndarray, bfs: BfsTree) -> np.ndarray:
    """Add the tree's signed path-traversal counts along BFS paths into ``acc``.

    For each vertex v, walk the BFS path pivot->v; a path edge (p,c) oriented
    away from the pivot scores +1 if the tree path pivot->v crosses it in the
    same direction, -1 if opposed, 0 if the tree path avoids it.
    """
    rooted = tree.rooted_at(bfs.pivot)
    tparent = rooted.parent
    tin, tout = rooted.tin, rooted.tout
    bparent = bfs.parent
    pivot = bfs.pivot
    for v in range(len(bparent)):
        if v == pivot:
            continue
        score = 0
        tin_v = tin[v]
        c = v
        while c != pivot:
            p = bparent[c]
            if tparent[c] == p:  # tree edge p->c, child side c
                if tin[c] <= tin_v < tout[c]:
                    score += 1
            elif tparent[p] == c:  # tree edge c->p, child side p: opposes path
                if tin[p] <= tin_v < tout[p]:
                    score -= 1
            c = p
        acc[v] += score
    return acc


@dataclass
class DiagEstimate:
    """Per-vertex estimate of the pseudoinverse diagonal."""

    values: np.ndarray
    epsilon: float


@dataclass
class UstRepository:
    """Round-stamped spanning-tree sample with mixing weights (dynamic updates).

    ``rounds[i]`` holds trees sampled at round i with weight ``weights[i]``;
    the target total stays near ``total``. ``resistance[v]`` estimates
    R(pivot, v) for the graph of the latest round.
    """

    pivot: int
    bfs: BfsTree
    total: int
    rounds: list[list[SpanningTree]]
    weights: list[float]
    resistance: np.ndarray
    base_round: int
    update_count: int = 0
    max_rounds: int = 64

    def tree_count(self) -> int:
        return sum(len(r) for r in self.rounds)

    def expected_graph_round(self) -> int:
        return self.base_round + self.update_count


def tree_budget(n: int, epsilon: float, c_ust: float = 1.0) -> int:
    """Sample size ceil(c_ust * ln(n) / epsilon^2), at least 1."""
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    return max(1, math.ceil(c_ust * math.log(max(n, 2)) / (epsilon * epsilon)))


def choose_pivot(graph: Graph) -> int:
    """Highest-degree vertex, smallest id on ties (short expected BFS paths)."""
    return max(range(graph.n), key=lambda v: (graph.degree(v), -v))


def approx_diag_lpinv(
    graph: Graph,
    epsilon: float,
    rng: np.random.Generator,
    config: SolverConfig = DEFAULT_SOLVER,
    c_ust: float = 1.0,
) -> tuple[DiagEstimate, UstRepository]:
    """UST-sampled diagonal of the pseudoinverse plus the repository for updates.

    Samples ceil(c_ust*ln(n)/eps^2) trees from the pivot, averages the signed
    BFS-path counts into resistance estimates R(pivot, .), then converts them
    with one solved pivot column.
    """
    assert_connected(graph)
    pivot = choose_pivot(graph)
    tau = tree_budget(graph.n, epsilon, c_ust)
    bfs = BfsTree(graph, pivot)
    acc = np.zeros(graph.n)
    trees: list[SpanningTree] = []
    for stream in rng.spawn(tau):
        tree = sample_ust(graph, pivot, stream)
        aggregate_tree(tree, acc, bfs)
        trees.append(tree)
    resistance = acc / tau
    col = solve_lpinv_column(graph, pivot, config)
    diag = resistance - col[pivot] + 2.0 * col
    repo = UstRepository(
        pivot=pivot,
        bfs=bfs,
        total=tau,
        rounds=[trees],
        weights=[1.0],
        resistance=resistance,
        base_round=graph.round,
    )
    return DiagEstimate(diag, epsilon), repo


def approx_update_diag(
    graph: Graph,
    repo: UstRepository,
    diag: DiagEstimate,
    rng: np.random.Generator,
    config: SolverConfig = DEFAULT_SOLVER,
) -> tuple[DiagEstimate, UstRepository]:
    """Refresh the diagonal estimate after exactly one edge insertion.

    Computes the inserted edge's new-graph resistance w from two solved
    columns, downweights every stored round by (1-w) and truncates its tree
    list, samples ceil(w*total) trees forced to contain the new edge, mixes
    the resistance estimates, and re-solves the pivot column on the new graph.
    """
    if graph.round != repo.expected_graph_round() + 1:
        raise StaleStateError(
            f"repository expects graph round {repo.expected_graph_round() + 1}, got {graph.round}"
        )
    a, b = graph.insertion_log[-1]

    col_a = solve_lpinv_column(graph, a, config)
    col_b = solve_lpinv_column(graph, b, config)
    omega = effective_resistance(col_a, col_b, a, b)  # equals R_old/(1+R_old) in (0,1)

    for i in range(len(repo.weights)):
        repo.weights[i] *= 1.0 - omega
        keep = math.ceil(repo.weights[i] * repo.total)
        del repo.rounds[i][keep:]

    fresh = max(1, math.ceil(omega * repo.total))
    acc = np.zeros(graph.n)
    new_trees: list[SpanningTree] = []
    for stream in rng.spawn(fresh):
        tree = sample_ust_with_edge(graph, a, b, stream)
        aggregate_tree(tree, acc, repo.bfs)
        new_trees.append(tree)
    repo.weights.append(omega)
    repo.rounds.append(new_trees)
    repo.resistance = omega * (acc / fresh) + (1.0 - omega) * repo.resistance
    repo.update_count += 1

    while len(repo.weights) > repo.max_rounds:
        w = repo.weights[0] + repo.weights[1]
        merged = repo.rounds[0] + repo.rounds[1]
        del merged[math.ceil(w * repo.total):]
        repo.weights[:2] = [w]
        repo.rounds[:2] = [merged]

    if repo.pivot == a:
        col_u = col_a
    elif repo.pivot == b:
        col_u = col_b
    else:
        col_u = solve_lpinv_column(graph, repo.pivot, config)
    values = repo.resistance - col_u[repo.pivot] + 2.0 * col_u
    return DiagEstimate(values, diag.epsilon), repo
