"""Exact resistance and gain algebra on the Laplacian pseudoinverse.

Core identities, for a connected graph on n vertices with Laplacian L and
pseudoinverse P = L^+ (all implemented below):

  P            = (L + J/n)^(-1) - J/n                 (J = all-ones matrix)
  R(a,b)       = P[a,a] + P[b,b] - 2 P[a,b]           (effective resistance)
  B2(a,b)      = || P[:,a] - P[:,b] ||^2              (squared biharmonic distance)
  R_tot        = n * trace(P)                          (total effective resistance)
  gain(a,b)    = n * B2(a,b) / (1 + R(a,b))            (drop of R_tot when {a,b} is inserted)
  P'           = P - v v^T / (1 + R(a,b)),  v = P (e_a - e_b)   (rank-one insertion update)

Columns of P can also be obtained one at a time by solving L x = e_a - 1/n
with a conjugate-gradient solver and re-centering x against the all-ones
null space; cached columns are brought forward across insertions by chaining
the rank-one update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, InvariantError, SolverError, StaleStateError
from .graphs import Graph, canonical_edge


@dataclass(frozen=True)
class SolverConfig:
    """Accuracy knobs of the iterative column solver."""

    residual_tol: float = 1e-6
    max_iters: int | None = None  # default 10*n, resolved per solve

    def __post_init__(self):
        if self.residual_tol <= 0:
            raise ConfigError(f"residual_tol must be positive, got {self.residual_tol}")


DEFAULT_SOLVER = SolverConfig()
DENSE_CAP_DEFAULT = 20000


def pseudoinverse_dense(graph: Graph, cap: int = DENSE_CAP_DEFAULT) -> np.ndarray:
    """Dense pseudoinverse via the exact identity (L + J/n)^(-1) - J/n."""
    n = graph.n
    if n > cap:
        raise ConfigError(
            f"n={n} exceeds the dense pseudoinverse cap {cap}; use column solves instead"
        )
    shift = 1.0 / n
    m = graph.laplacian_dense() + shift
    try:
        inv = np.linalg.inv(m)
    except np.linalg.LinAlgError as exc:  # disconnected graphs land here
        raise SolverError(f"factorization of L + J/n failed: {exc}") from exc
    return inv - shift


def solve_lpinv_column(
    graph: Graph, a: int, config: SolverConfig = DEFAULT_SOLVER, x0: np.ndarray | None = None
) -> np.ndarray:
    """Column a of the pseudoinverse, from L x = e_a - 1/n via preconditioned CG.

    The solution is re-centered (x -= mean(x)) so that x is orthogonal to the
    all-ones vector; raises :class:`SolverError` with the achieved residual if
    the relative residual stays above ``config.residual_tol``.
    """
    n = graph.n
    lap = graph.laplacian()
    b = np.full(n, -1.0 / n)
    b[a] += 1.0
    maxiter = config.max_iters if config.max_iters is not None else 10 * n
    degrees = lap.diagonal()
    precond = sp.diags(1.0 / np.maximum(degrees, 1.0))
    # solve one notch tighter than requested: the CG recurrence residual can
    # drift slightly from the true residual, and the contract is on the latter
    x, info = spla.cg(
        lap, b, x0=x0, rtol=0.1 * config.residual_tol, atol=0.0, maxiter=maxiter, M=precond
    )
    x -= x.mean()
    achieved = float(np.linalg.norm(lap @ x - b) / np.linalg.norm(b))
    if info != 0 or achieved > config.residual_tol:
        raise SolverError(f"CG did not converge for column {a} within {maxiter} iterations", achieved)
    return x


def effective_resistance(col_a: np.ndarray, col_b: np.ndarray, a: int, b: int) -> float:
    """R(a,b) from two pseudoinverse columns of the same graph and round."""
    if a == b:
        raise InvariantError("effective resistance is defined for distinct vertices")
    return float(col_a[a] + col_b[b] - 2.0 * col_a[b])


def biharmonic_sq(col_a: np.ndarray, col_b: np.ndarray) -> float:
    """Squared biharmonic distance, the gain numerator."""
    d = col_a - col_b
    return float(d @ d)


def total_resistance(obj, cap: int = DENSE_CAP_DEFAULT) -> float:
    """n * trace(pseudoinverse), from a Graph or an existing DenseState."""
    if isinstance(obj, DenseState):
        return obj.graph.n * float(np.trace(obj.matrix))
    if isinstance(obj, Graph):
        return obj.n * float(np.trace(pseudoinverse_dense(obj, cap)))
    raise TypeError(f"expected Graph or DenseState, got {type(obj)!r}")


def gain_from_columns(col_a: np.ndarray, col_b: np.ndarray, a: int, b: int, n: int) -> float:
    return n * biharmonic_sq(col_a, col_b) / (1.0 + effective_resistance(col_a, col_b, a, b))


def sherman_morrison_update(lpinv: np.ndarray, a: int, b: int) -> np.ndarray:
    """Pseudoinverse of G + {a,b} from the pseudoinverse of G (rank-one update)."""
    v = lpinv[:, a] - lpinv[:, b]
    resistance = float(v[a] - v[b])
    return lpinv - np.outer(v, v) / (1.0 + resistance)


@dataclass(frozen=True)
class InsertionRecord:
    """Columns of the inserted edge's endpoints, taken just before insertion."""

    a: int
    b: int
    col_a: np.ndarray
    col_b: np.ndarray

    @property
    def resistance(self) -> float:
        return effective_resistance(self.col_a, self.col_b, self.a, self.b)


def refresh_column(
    column: np.ndarray, stale_round: int, records: list[InsertionRecord], target_round: int | None = None
) -> np.ndarray:
    """Bring a cached column forward by chaining the rank-one update per round.

    ``records[i]`` must describe the edge inserted at round i; the entry of the
    update direction v at the column's own vertex equals col[a] - col[b] by
    symmetry of the pseudoinverse, so the vertex id is not needed.
    """
    if target_round is None:
        target_round = len(records)
    if stale_round > target_round:
        raise StaleStateError(f"column stamped round {stale_round} is ahead of round {target_round}")
    if target_round > len(records):
        raise StaleStateError(
            f"missing insertion records for rounds {len(records)}..{target_round - 1}; re-solve the column"
        )
    col = column
    for i in range(stale_round, target_round):
        rec = records[i]
        v = rec.col_a - rec.col_b
        col = col - ((col[rec.a] - col[rec.b]) / (1.0 + rec.resistance)) * v
    return col


class DenseState:
    """Materialized pseudoinverse, kept current across insertions (round-stamped)."""

    def __init__(self, graph: Graph, matrix: np.ndarray, round_: int):
        self.graph = graph
        self.matrix = matrix
        self.round = round_

    @classmethod
    def compute(cls, graph: Graph, cap: int = DENSE_CAP_DEFAULT) -> "DenseState":
        return cls(graph, pseudoinverse_dense(graph, cap), graph.round)

    def column(self, v: int) -> np.ndarray:
        return self.matrix[:, v]

    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).copy()

    def apply_insertion(self, a: int, b: int) -> None:
        """Sherman-Morrison update after the graph gained edge {a,b}."""
        self.matrix = sherman_morrison_update(self.matrix, a, b)
        self.round += 1

    def check_round(self) -> None:
        if self.round != self.graph.round:
            raise StaleStateError(f"dense state at round {self.round}, graph at {self.graph.round}")

    def snapshot(self) -> np.ndarray:
        return self.matrix.copy()


class ColumnCache:
    """On-demand pseudoinverse columns with lazy refresh across insertions.

    Columns are solved when first requested and stamped with the cache round;
    a stale column is brought forward through the stored per-round insertion
    records instead of being re-solved.
    """

    def __init__(self, graph: Graph, config: SolverConfig = DEFAULT_SOLVER):
        self.graph = graph
        self.config = config
        self.round = 0
        self.records: list[InsertionRecord] = []
        self._cols: dict[int, tuple[np.ndarray, int]] = {}
        self._base_graph_round = graph.round
        self.solve_count = 0

    def _refresh_entry(self, v: int) -> np.ndarray:
        """Bring a cached column to the cache round without touching the graph."""
        col, stamp = self._cols[v]
        if stamp < self.round:
            col = refresh_column(col, stamp, self.records, self.round)
            self._cols[v] = (col, self.round)
        return col

    def column(self, v: int) -> np.ndarray:
        if v in self._cols:
            return self._refresh_entry(v)
        if self.graph.round != self._base_graph_round + self.round:
            raise StaleStateError(
                "cache round out of sync with the graph; record insertions before new solves"
            )
        col = solve_lpinv_column(self.graph, v, self.config)
        self.solve_count += 1
        self._cols[v] = (col, self.round)
        return col

    def note_insertion(self, a: int, b: int) -> None:
        """Record the just-inserted edge {a,b} from cached pre-insertion columns.

        Both endpoint columns must already be cached (they were evaluated in
        the round that chose the edge); solving here would read the mutated
        graph and corrupt the refresh chain.
        """
        a, b = canonical_edge(a, b)
        for v in (a, b):
            if v not in self._cols:
                raise StaleStateError(
                    f"column {v} was never solved; cannot record insertion ({a},{b})"
                )
        col_a = self._refresh_entry(a)
        col_b = self._refresh_entry(b)
        self.records.append(InsertionRecord(a, b, col_a.copy(), col_b.copy()))
        self.round += 1


def gain_exact(state, a: int, b: int) -> float:
    """Exact gain of inserting the non-edge {a,b}, including the factor n."""
    a, b = canonical_edge(a, b)
    graph: Graph = state.graph
    if graph.has_edge(a, b):
        raise InvariantError(f"edge ({a},{b}) already exists; gain undefined")
    return gain_from_columns(state.column(a), state.column(b), a, b, graph.n)


def true_gain(graph: Graph, a: int, b: int, config: SolverConfig = DEFAULT_SOLVER) -> float:
    """Exact gain via two fresh linear solves (heuristic-independent reporting path)."""
    a, b = canonical_edge(a, b)
    if graph.has_edge(a, b):
        raise InvariantError(f"edge ({a},{b}) already exists; gain undefined")
    col_a = solve_lpinv_column(graph, a, config)
    col_b = solve_lpinv_column(graph, b, config)
    return gain_from_columns(col_a, col_b, a, b, graph.n)
