"""Electrical current of a finite network, computed two independent ways.

``solve_current`` solves the conductance-weighted node balance (graph
Laplacian) system for the potentials with the sink grounded.
``minimize_energy`` works in flow space instead: a particular p-q flow
along the spanning tree plus a combination of fundamental-cycle
circulations, with the coefficients chosen by conjugate gradients on the
energy quadratic. Agreement of the two is the finite uniqueness statement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
import scipy.linalg
import scipy.sparse

from .cycles import fundamental_cycles, spanning_forest
from .netcore import Flow, Network

DENSE_LIMIT = 500
DEFAULT_TOL = 1e-10
MAX_REFINE = 12


class SolverError(RuntimeError):
    """Raised when a linear solve is singular or does not reach its tolerance."""


@dataclass(frozen=True)
class SolveReport:
    """Result of a solve.

    ``residual`` is the largest Kirchhoff node-law violation of ``flow``
    for the potential method, and the final relative conjugate-gradient
    residual for the energy method.
    """

    flow: Flow
    potentials: Mapping[str, float]
    residual: float
    iterations: int
    method: str
    energy: float


def conjugate_gradient(
    apply_a: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    diag: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, int, float]:
    """Jacobi-preconditioned conjugate gradients for a symmetric positive definite operator.

    Stops when ``||b - A x|| <= tol * ||b||``. Returns ``(x, iterations,
    relative residual)``; raises :class:`SolverError` if ``max_iter`` is
    exhausted first.
    """
    n = b.shape[0]
    x = np.zeros(n)
    bnorm = float(np.linalg.norm(b))
    if n == 0 or bnorm == 0.0:
        return x, 0, 0.0
    inv_d = 1.0 / diag
    r = b.copy()
    z = inv_d * r
    d = z.copy()
    rz = float(r @ z)
    rel = 1.0
    for k in range(1, max_iter + 1):
        ad = apply_a(d)
        alpha = rz / float(d @ ad)
        x += alpha * d
        r -= alpha * ad
        if k % 25 == 0:
            # replace the recursively updated residual to limit drift
            r = b - apply_a(x)
        rel = float(np.linalg.norm(r)) / bnorm
        if rel <= tol:
            return x, k, rel
        z = inv_d * r
        rz_new = float(r @ z)
        d = z + (rz_new / rz) * d
        rz = rz_new
    raise SolverError(
        f"conjugate gradients did not reach tolerance {tol:g} in {max_iter} iterations "
        f"(relative residual {rel:.3e})"
    )


class _Indexed:
    """Integer indexing of the terminals' component, shared by both solvers."""

    def __init__(self, network: Network, comp: set[str] | None = None):
        g = network.graph
        if comp is None:
            comp = g.component(network.p)
        self.vertices = sorted(comp)
        self.index = {x: k for k, x in enumerate(self.vertices)}
        edges = [e for e in g.edges if e.u in comp and e.v in comp]
        self.edge_ids = [e.id for e in edges]
        self.iu = np.array([self.index[e.u] for e in edges], dtype=np.int64)
        self.iv = np.array([self.index[e.v] for e in edges], dtype=np.int64)
        self.r = np.array([e.r for e in edges], dtype=float)
        self.g = 1.0 / self.r
        self.n = len(self.vertices)
        self.ip = self.index[network.p]
        self.iq = self.index[network.q]
        demand = np.zeros(self.n)
        demand[self.ip] = network.I
        demand[self.iq] = -network.I
        self.demand = demand

    def node_residual(self, f: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n)
        np.add.at(out, self.iu, f)
        np.add.at(out, self.iv, -f)
        return out - self.demand


def _full_flow(network: Network, idx: _Indexed, f: np.ndarray) -> Flow:
    values = dict.fromkeys(network.graph.edge_ids(), 0.0)
    values.update(zip(idx.edge_ids, f.tolist()))
    return Flow(values)


def _full_potentials(
    network: Network, idx: _Indexed, phi: np.ndarray, pruned: list[tuple[str, str]] = ()
) -> dict[str, float]:
    # vertices outside the terminals' component carry no current; ground them
    pots = dict.fromkeys(network.graph.vertices, 0.0)
    pots.update(zip(idx.vertices, phi.tolist()))
    pots[network.q] = 0.0
    for x, y in reversed(pruned):
        pots[x] = pots[y]
    return pots


def _prune_dead_ends(network: Network) -> tuple[set[str], list[tuple[str, str]]]:
    """Strip hanging trees: repeatedly drop degree-one vertices other than p and q.

    A hanging tree carries no current, so its edges get exactly 0 and its
    vertices the potential of the vertex it hangs from. Returns the
    remaining vertex set and the dropped ``(vertex, neighbour)`` pairs in
    removal order.
    """
    g = network.graph
    comp = g.component(network.p)
    deg = {x: len(g.incident(x)) for x in comp}
    todo = sorted(x for x in comp if deg[x] == 1 and x not in (network.p, network.q))
    pruned = []
    alive = set(comp)
    while todo:
        x = todo.pop()
        if x not in alive or deg[x] != 1:
            continue
        alive.discard(x)
        y = next(g.edge(eid).other(x) for eid in g.incident(x) if g.edge(eid).other(x) in alive)
        pruned.append((x, y))
        deg[y] -= 1
        if deg[y] == 1 and y not in (network.p, network.q):
            todo.append(y)
    return alive, pruned


def _energy(f: np.ndarray, r: np.ndarray) -> float:
    return float(np.sum(f * f * r))


def solve_current(network: Network, tol: float = DEFAULT_TOL) -> SolveReport:
    """Unique current via node potentials, ``phi(q) = 0``.

    Hanging trees are stripped first (they carry no current). Dense LU
    for up to ``DENSE_LIMIT`` vertices, Jacobi-preconditioned CG beyond. Flows are then refined in flow space (correction solves on the
    node residual) so that the node law holds to ``tol * max(1, |I|)``
    even when resistances span many orders of magnitude.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    core, pruned = _prune_dead_ends(network)
    idx = _Indexed(network, core)
    target = tol * max(1.0, abs(network.I))
    keep = np.array([k for k in range(idx.n) if k != idx.iq], dtype=np.int64)

    lap = scipy.sparse.coo_matrix(
        (
            np.concatenate([idx.g, idx.g, -idx.g, -idx.g]),
            (
                np.concatenate([idx.iu, idx.iv, idx.iu, idx.iv]),
                np.concatenate([idx.iu, idx.iv, idx.iv, idx.iu]),
            ),
        ),
        shape=(idx.n, idx.n),
    ).tocsr()[keep][:, keep]

    iterations = 0
    if keep.size <= DENSE_LIMIT:
        try:
            lu = scipy.linalg.lu_factor(lap.toarray(), check_finite=True)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise SolverError(f"singular node system: {exc}") from exc

        def solve(rhs):
            return scipy.linalg.lu_solve(lu, rhs)

        method = "potential-dense"
    else:
        diag = lap.diagonal()

        def solve(rhs):
            nonlocal iterations
            x, k, _ = conjugate_gradient(lambda v: lap @ v, rhs, diag, tol * 1e-2, 20 * keep.size + 100)
            iterations += k
            return x

        method = "potential-pcg"

    def lift(sol):
        full = np.zeros(idx.n)
        full[keep] = sol
        return full

    phi = lift(solve(idx.demand[keep]))
    if not np.all(np.isfinite(phi)):
        raise SolverError("singular node system")
    f = (phi[idx.iu] - phi[idx.iv]) * idx.g
    res = idx.node_residual(f)
    worst = float(np.max(np.abs(res), initial=0.0))
    # refine past the target while it keeps paying off; energies and
    # cross-level comparisons need more than the bare node-law tolerance
    polish = 1e-3 * target
    refine = 0
    while worst > polish and refine < MAX_REFINE:
        delta = lift(solve(-res[keep]))
        f_new = f + (delta[idx.iu] - delta[idx.iv]) * idx.g
        res_new = idx.node_residual(f_new)
        worst_new = float(np.max(np.abs(res_new), initial=0.0))
        refine += 1
        if worst_new >= worst:
            break
        phi, f, res, worst = phi + delta, f_new, res_new, worst_new
    if worst > target:
        raise SolverError(f"node residual {worst:.3e} exceeds tolerance {target:.3e}")
    if method == "potential-dense":
        iterations = 1 + refine
    return SolveReport(
        flow=_full_flow(network, idx, f),
        potentials=_full_potentials(network, idx, phi, pruned),
        residual=worst,
        iterations=iterations,
        method=method,
        energy=_energy(f, idx.r),
    )


def minimize_energy(network: Network, tol: float = 1e-13, max_iter: int | None = None) -> SolveReport:
    """Minimum-energy p-q flow over the affine space of flows of intensity I.

    The space is parametrised as the tree flow carrying ``I`` along the
    spanning-tree p-q path plus a combination of fundamental-cycle
    circulations; the energy is then a positive definite quadratic in the
    combination coefficients, minimised by conjugate gradients.
    """
    g = network.graph
    forest = spanning_forest(g, network.p)
    cycles = fundamental_cycles(g, forest)
    col = {eid: k for k, eid in enumerate(g.edge_ids())}
    r = np.array([e.r for e in g.edges], dtype=float)

    f0 = np.zeros(len(col))
    for oe in forest.tree_path(g, network.p, network.q):
        f0[col[oe.edge_id]] += oe.sign * network.I

    rows, cols, vals = [], [], []
    for j, cyc in enumerate(cycles.values()):
        for oe in cyc:
            rows.append(col[oe.edge_id])
            cols.append(j)
            vals.append(oe.sign)
    m = len(cycles)
    basis = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(len(col), m))
    basis_t = basis.T.tocsr()

    if max_iter is None:
        max_iter = 10 * m + 50
    iterations = 0
    rel = 0.0
    f = f0
    if m:
        rhs = -(basis_t @ (r * f0))
        diag = np.asarray(basis.multiply(basis).T @ r).ravel()
        x, iterations, rel = conjugate_gradient(
            lambda c: basis_t @ (r * (basis @ c)), rhs, diag, tol, max_iter
        )
        f = f0 + basis @ x

    # potentials from the tree, grounded at q
    phi = dict.fromkeys(g.vertices, 0.0)
    for x in forest.order:
        par = forest.parent[x]
        if par is None:
            continue
        e = g.edge(forest.parent_edge[x])
        drop = float(f[col[e.id]]) * e.r  # phi(u) - phi(v)
        phi[x] = phi[par] - drop if e.u == par else phi[par] + drop
    shift = phi[network.q]
    for x in g.component(network.q):
        phi[x] -= shift
    phi[network.q] = 0.0

    return SolveReport(
        flow=Flow(dict(zip(g.edge_ids(), f.tolist()))),
        potentials=phi,
        residual=rel,
        iterations=iterations,
        method="energy-cg",
        energy=_energy(f, r),
    )


def effective_resistance(network: Network, tol: float = DEFAULT_TOL) -> float:
    """Two-terminal resistance ``W(i) / I**2``."""
    if network.I == 0:
        raise ValueError("effective resistance needs a nonzero intensity")
    report = solve_current(network, tol)
    return report.energy / network.I**2
