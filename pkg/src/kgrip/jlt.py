"""Random-projection sketches for O(q)-time approximate gain evaluations.

Two q-row sketches are kept per graph round, built from Gaussian projections
P (q x n) and Q (q x m) with entries N(0,1)/sqrt(q):

  biharm = Y^T with L Y = P^T - (1/n) 1 1^T P^T, i.e. Y = pinv(L) P^T,
           so ||biharm (e_a - e_b)||^2 tracks the squared biharmonic distance;
  resist = rows of (Q B) pinv(L), one solve per row (B is the signed
           edge-vertex incidence), so ||resist (e_a - e_b)||^2 tracks the
           effective resistance.

Each distance estimate uses its projection exactly once, which keeps it
unbiased with chi-square concentration in q. Composing the resistance sketch
out of Y instead (reusing P on both sides, which saves the second set of
solves) is only exact for orthonormal projections; with Gaussian sketches it
acquires an additive bias of roughly (2/q) trace(pinv(L)), which swamps
small resistances, so it is not used here. The identity test hook
(q = max(n, m), stacked identity blocks) makes both estimates exact. The
sketch must be rebuilt with fresh projections after every edge insertion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, SolverError, StaleStateError
from .graphs import Graph
from .linalg import DEFAULT_SOLVER, SolverConfig


def default_sketch_width(universe_size: int, c_jlt: float = 4.0) -> int:
    """q = max(4, ceil(c_jlt * ln(universe_size)))."""
    return max(4, math.ceil(c_jlt * math.log(max(2, universe_size))))


@dataclass
class JltSketch:
    q: int
    biharm: np.ndarray  # q x n
    resist: np.ndarray  # q x n
    round: int

    @property
    def n(self) -> int:
        return self.biharm.shape[1]

    def resistance_sq(self, a: int, b: int) -> float:
        d = self.resist[:, a] - self.resist[:, b]
        return float(d @ d)

    def biharmonic_sq(self, a: int, b: int) -> float:
        d = self.biharm[:, a] - self.biharm[:, b]
        return float(d @ d)


def _incidence(graph: Graph) -> sp.csr_matrix:
    """Signed m x n incidence; row e=(u,v) with u<v carries -1 at u, +1 at v."""
    rows, cols, vals = [], [], []
    for e, (u, v) in enumerate(graph.edges()):
        rows.extend((e, e))
        cols.extend((u, v))
        vals.extend((-1.0, 1.0))
    return sp.csr_matrix((vals, (rows, cols)), shape=(graph.m, graph.n))


def _projections(graph: Graph, q: int, rng, projection: str) -> tuple[np.ndarray, np.ndarray, int]:
    n, m = graph.n, graph.m
    if projection == "gaussian":
        if q < 1:
            raise ConfigError(f"sketch width q must be >= 1, got {q}")
        p = rng.standard_normal((q, n)) / math.sqrt(q)
        qm = rng.standard_normal((q, m)) / math.sqrt(q)
        return p, qm, q
    if projection == "identity":
        # exactness hook: stacked identity blocks make P^T P = I_n and Q^T Q = I_m
        q = max(n, m)
        p = np.zeros((q, n))
        p[:n, :n] = np.eye(n)
        qm = np.zeros((q, m))
        qm[:m, :m] = np.eye(m)
        return p, qm, q
    raise ConfigError(f"unknown projection kind {projection!r}")


def build_sketch(
    graph: Graph,
    q: int,
    rng: np.random.Generator,
    config: SolverConfig = DEFAULT_SOLVER,
    projection: str = "gaussian",
) -> JltSketch:
    """Solve the 2q projected Laplacian systems and assemble both sketches."""
    p, qm, q = _projections(graph, q, rng, projection)
    n = graph.n
    biharm = np.empty((q, n))
    for j in range(q):
        biharm[j, :] = _solve_projected(graph, p[j, :] - p[j, :].mean(), config)
    qb = np.asarray(qm @ _incidence(graph))  # q x n, rows orthogonal to ones
    resist = np.empty((q, n))
    for j in range(q):
        resist[j, :] = _solve_projected(graph, qb[j, :] - qb[j, :].mean(), config)
    return JltSketch(q=q, biharm=biharm, resist=resist, round=graph.round)


def _solve_projected(graph: Graph, rhs: np.ndarray, config: SolverConfig) -> np.ndarray:
    lap = graph.laplacian()
    maxiter = config.max_iters if config.max_iters is not None else 10 * graph.n
    precond = sp.diags(1.0 / np.maximum(lap.diagonal(), 1.0))
    x, info = spla.cg(lap, rhs, rtol=0.1 * config.residual_tol, atol=0.0, maxiter=maxiter, M=precond)
    x -= x.mean()
    if info != 0:
        achieved = float(np.linalg.norm(lap @ x - rhs) / max(np.linalg.norm(rhs), 1e-300))
        raise SolverError("CG did not converge on a projected right-hand side", achieved)
    return x


def gain_jlt(sketch: JltSketch, a: int, b: int, current_round: int | None = None) -> float:
    """Approximate gain n * ||biharm d||^2 / (1 + ||resist d||^2), d = e_a - e_b."""
    if current_round is not None and current_round != sketch.round:
        raise StaleStateError(
            f"sketch built at round {sketch.round}, graph at round {current_round}; refresh it"
        )
    if a == b:
        return 0.0
    return sketch.n * sketch.biharmonic_sq(a, b) / (1.0 + sketch.resistance_sq(a, b))


def refresh_sketch(
    graph: Graph,
    q: int,
    rng: np.random.Generator,
    config: SolverConfig = DEFAULT_SOLVER,
    projection: str = "gaussian",
) -> JltSketch:
    """Fresh independent projections for the current graph round."""
    return build_sketch(graph, q, rng, config, projection)
