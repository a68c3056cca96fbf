"""Checks and structural analysis of flows on finite networks."""

from __future__ import annotations

import heapq
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cycles import fundamental_cycles, spanning_forest
from .generators import InfiniteFamily
from .netcore import Flow, Multigraph, Network, NetworkError, OrientedEdge, check_flow, flow_value, net_flow_at

INF = math.inf


class KirchhoffError(ValueError):
    """A flow fails a Kirchhoff law that an operation depends on."""


@dataclass(frozen=True)
class ResidualReport:
    node: Mapping[str, float]
    cycle: Mapping[str, float]

    @property
    def max_node(self) -> float:
        return max((abs(v) for v in self.node.values()), default=0.0)

    @property
    def max_cycle(self) -> float:
        return max((abs(v) for v in self.cycle.values()), default=0.0)

    def to_dict(self) -> dict:
        return {
            "node_residuals": dict(self.node),
            "max_node_residual": self.max_node,
            "cycle_residuals": dict(self.cycle),
            "max_cycle_residual": self.max_cycle,
        }


def energy(flow: Flow, network: Network) -> float:
    """``sum f(e)**2 r(e)`` over the network's edges."""
    check_flow(flow, network.graph)
    return math.fsum(flow[e.id] ** 2 * e.r for e in network.graph.edges)


def voltage_drop(flow: Flow, graph: Multigraph, oe: OrientedEdge) -> float:
    return flow_value(flow, oe) * graph.edge(oe.edge_id).r


def cycle_sum(flow: Flow, graph: Multigraph, cycle: Iterable[OrientedEdge]) -> float:
    """Signed sum of voltage drops around a directed cycle."""
    return math.fsum(voltage_drop(flow, graph, oe) for oe in cycle)


def node_residuals(flow: Flow, network: Network) -> dict[str, float]:
    return {x: net_flow_at(flow, network, x) - network.demand(x) for x in network.graph.vertices}


def kirchhoff_residuals(flow: Flow, network: Network) -> ResidualReport:
    """Node-law residual at every vertex and cycle-law residual on each fundamental cycle.

    The cycle basis comes from the same breadth-first spanning forest the
    solver uses; since every cycle is a signed sum of fundamental ones, the
    cycle law on the basis implies it on all cycles.
    """
    g = network.graph
    check_flow(flow, g)
    forest = spanning_forest(g, network.p)
    cycles = fundamental_cycles(g, forest)
    return ResidualReport(
        node=node_residuals(flow, network),
        cycle={cid: cycle_sum(flow, g, cyc) for cid, cyc in cycles.items()},
    )


def cut_flux(flow: Flow, network: Network, X: Iterable) -> float:
    """Net flow leaving the vertex set ``X``."""
    g = network.graph
    xs = {str(x) for x in X}
    for x in xs:
        if not g.has_vertex(x):
            raise NetworkError(f"unknown vertex {x!r}")
    if not xs:
        raise ValueError("cut side X must be nonempty")
    if len(xs) == len(g.vertices):
        raise ValueError("cut side X must be a proper subset of the vertices")
    total = []
    for e in g.edges:
        if (e.u in xs) != (e.v in xs):
            total.append(flow[e.id] if e.u in xs else -flow[e.id])
    return math.fsum(total)


# -- circulation decomposition -------------------------------------------------


@dataclass(frozen=True)
class CycleTerm:
    cycle: tuple[OrientedEdge, ...]
    weight: float


@dataclass(frozen=True)
class Decomposition(Sequence):
    """Cycle terms from greedy peeling, plus per-edge usage counts."""

    terms: tuple[CycleTerm, ...]
    usage: Mapping[str, int]

    def __getitem__(self, k):
        return self.terms[k]

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def max_usage(self) -> int:
        return max(self.usage.values(), default=0)

    @property
    def sparse(self) -> bool:
        """True if no edge lies on more than three terms."""
        return self.max_usage <= 3

    def reconstruct(self, graph: Multigraph) -> Flow:
        acc = dict.fromkeys(graph.edge_ids(), 0.0)
        for t in self.terms:
            for oe in t.cycle:
                acc[oe.edge_id] += oe.sign * t.weight
        return Flow(acc)

    def to_dict(self) -> dict:
        return {
            "terms": [
                {
                    "weight": t.weight,
                    "cycle": [{"edge": oe.edge_id, "forward": oe.forward} for oe in t.cycle],
                }
                for t in self.terms
            ],
            "usage": dict(self.usage),
            "max_usage": self.max_usage,
            "sparse": self.sparse,
        }


def decompose_circulation(circulation: Flow, network: Network, tol: float = 1e-9) -> Decomposition:
    """Write a circulation as a positive combination of directed cycles.

    Repeatedly start from the lexicographically first edge still carrying
    more than ``tol``, follow edges in their direction of positive flow
    (smallest edge id first) until a vertex repeats, and peel off the
    closed cycle with its minimum value as weight. Each peel zeroes at
    least one edge, so at most ``|E|`` terms result.
    """
    g = network.graph
    check_flow(circulation, g)
    for x in g.vertices:
        res = net_flow_at(circulation, network, x)
        if abs(res) > tol:
            raise KirchhoffError(f"not a circulation: node residual {res:.3e} at {x!r}")

    rest = dict(circulation.items())
    order = sorted(rest)
    terms: list[CycleTerm] = []
    usage: Counter = Counter()

    def along(oe: OrientedEdge) -> float:
        return rest[oe.edge_id] if oe.forward else -rest[oe.edge_id]

    def next_step(x: str) -> OrientedEdge:
        cands = []
        for eid in g.incident(x):
            oe = OrientedEdge(eid, g.edge(eid).u == x)
            if along(oe) > 0:
                cands.append(oe)
        big = [oe for oe in cands if along(oe) > tol]
        if big:
            return min(big, key=lambda oe: oe.edge_id)
        if cands:
            # only sub-tolerance flow leaves x; take the largest
            return max(cands, key=lambda oe: (along(oe), oe.edge_id))
        raise KirchhoffError(f"peeling stalled at {x!r}: no outgoing positive flow")

    for _ in range(len(order)):
        start = next((eid for eid in order if abs(rest[eid]) > tol), None)
        if start is None:
            break
        step = OrientedEdge(start, rest[start] > 0)
        walk = [step]
        seen = {step.tail(g): 0}
        x = step.head(g)
        while x not in seen:
            seen[x] = len(walk)
            step = next_step(x)
            walk.append(step)
            x = step.head(g)
        cycle = tuple(walk[seen[x]:])
        weight = min(along(oe) for oe in cycle)
        for oe in cycle:
            rest[oe.edge_id] -= oe.sign * weight
            usage[oe.edge_id] += 1
            if along(oe) <= 0:
                rest[oe.edge_id] = 0.0
        terms.append(CycleTerm(cycle, weight))
    if any(abs(v) > tol for v in rest.values()):
        raise KirchhoffError("peeling did not finish within |E| steps")
    return Decomposition(tuple(terms), dict(sorted(usage.items())))


# -- potentials --------------------------------------------------------------


def potential_from_flow(flow: Flow, network: Network, tol: float = 1e-9) -> dict[str, float]:
    """Potentials with ``P(q) = 0`` and ``P(x) - P(y) = f(x, y) r(xy)`` along tree edges.

    Raises :class:`KirchhoffError` if some fundamental cycle residual
    exceeds ``tol``, since potentials are then path dependent.
    """
    g = network.graph
    check_flow(flow, g)
    forest = spanning_forest(g, network.p)
    for cid, cyc in fundamental_cycles(g, forest).items():
        res = cycle_sum(flow, g, cyc)
        if abs(res) > tol:
            raise KirchhoffError(
                f"flow does not satisfy Kirchhoff's cycle law (residual {res:.3e} on cycle {cid!r})"
            )
    pot = dict.fromkeys(g.vertices, 0.0)
    for x in forest.order:
        par = forest.parent[x]
        if par is None:
            continue
        e = g.edge(forest.parent_edge[x])
        drop = flow[e.id] * e.r
        pot[x] = pot[par] - drop if e.u == par else pot[par] + drop
    shift = pot[network.q]
    for x in g.component(network.q):
        pot[x] -= shift
    pot[network.q] = 0.0
    return pot


@dataclass(frozen=True)
class RayPotential:
    ray: str
    vertices: tuple[str, ...]
    partial_sums: tuple[float, ...]
    limit: float
    cauchy_gap: float

    def to_dict(self) -> dict:
        return {
            "ray": self.ray,
            "vertices": list(self.vertices),
            "partial_sums": list(self.partial_sums),
            "limit": self.limit,
            "cauchy_gap": self.cauchy_gap,
        }


def ray_potential(flows: Sequence[Flow] | Flow, family: InfiniteFamily, ray_name: str, depth: int) -> RayPotential:
    """Partial sums of voltage drops along a ray, in the deepest flow given.

    The gap is ``max |S_j - S_k|`` over the last quarter of the partial
    sums; the limit estimate is the last partial sum.
    """
    deepest = flows if isinstance(flows, Flow) else flows[-1]
    r = family.ray(ray_name, depth)
    sums = [0.0]
    acc = 0.0
    for k, oe in enumerate(r.steps, start=1):
        if oe.edge_id not in deepest:
            raise ValueError(f"ray {ray_name!r} leaves the deepest truncation at step {k} (depth {depth})")
        acc += flow_value(deepest, oe) * family.schedule.value(r.levels[k - 1])
        sums.append(acc)
    tail = sums[len(sums) - max(1, math.ceil(depth / 4)) - 1:]
    return RayPotential(
        ray=ray_name,
        vertices=r.vertices,
        partial_sums=tuple(sums[1:]),
        limit=sums[-1],
        cauchy_gap=max(tail) - min(tail),
    )


# -- inequality and metric -------------------------------------------------------


def power_inequality_holds(i_vec: Sequence[float], r_vec: Sequence[float]) -> tuple[bool, bool]:
    """``(<I,R> > <1,R>, <I**2,R> > <I,R>)`` for positive vectors ``I, R``.

    The first entry implies the second: the difference
    ``<I**2,R> - <I,R>`` equals ``sum R (I-1)**2 + (<I,R> - <1,R>)``.
    """
    i = np.asarray(i_vec, dtype=float)
    r = np.asarray(r_vec, dtype=float)
    if i.shape != r.shape or i.ndim != 1:
        raise ValueError("vectors must be one-dimensional with equal lengths")
    if np.any(i <= 0) or np.any(r <= 0) or not (np.all(np.isfinite(i)) and np.all(np.isfinite(r))):
        raise ValueError("entries must be positive and finite")
    ir = math.fsum(i * r)
    premise = ir > math.fsum(r)
    conclusion = math.fsum(i * i * r) > ir
    return premise, conclusion


def dl_distance(graph: Multigraph, x, y) -> float:
    """Shortest-path distance with edge lengths equal to resistances; ``inf`` if disconnected."""
    x, y = str(x), str(y)
    for v in (x, y):
        if not graph.has_vertex(v):
            raise NetworkError(f"unknown vertex {v!r}")
    dist = {x: 0.0}
    heap = [(0.0, x)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == y:
            return d
        done.add(u)
        for eid in graph.incident(u):
            e = graph.edge(eid)
            w = e.other(u)
            nd = d + e.r
            if nd < dist.get(w, INF):
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return INF
