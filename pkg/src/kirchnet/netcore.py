"""Resistor multigraphs, two-terminal networks and flows.

Every signed quantity (flow, voltage drop) is stored against the canonical
orientation of its edge, which is the ``(u, v)`` order the edge was
declared with. Vertex and edge ids are strings; numeric ids coming from
JSON are converted with ``str``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping


class NetworkError(ValueError):
    """Raised when a graph, network or flow violates its invariants."""


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    r: float

    def other(self, x: str) -> str:
        if x == self.u:
            return self.v
        if x == self.v:
            return self.u
        raise NetworkError(f"vertex {x!r} is not an endpoint of edge {self.id!r}")


@dataclass(frozen=True)
class OrientedEdge:
    """An edge traversed either along (forward) or against its canonical orientation."""

    edge_id: str
    forward: bool = True

    def reversed(self) -> "OrientedEdge":
        return OrientedEdge(self.edge_id, not self.forward)

    def tail(self, graph: "Multigraph") -> str:
        e = graph.edge(self.edge_id)
        return e.u if self.forward else e.v

    def head(self, graph: "Multigraph") -> str:
        e = graph.edge(self.edge_id)
        return e.v if self.forward else e.u

    @property
    def sign(self) -> float:
        return 1.0 if self.forward else -1.0


class Multigraph:
    """Finite undirected multigraph with positive edge resistances.

    Parallel edges are distinguished by their ids. Self-loops are accepted
    here (so that bad input can be inspected) but rejected by
    :func:`build_network`.
    """

    __slots__ = ("_vertices", "_edges", "_by_id", "_incident")

    def __init__(self, vertices: Iterable, edges: Iterable[Edge | tuple]):
        verts = tuple(str(x) for x in vertices)
        if len(set(verts)) != len(verts):
            dup = _first_duplicate(verts)
            raise NetworkError(f"duplicate vertex id {dup!r}")
        vset = set(verts)

        edge_list = []
        for item in edges:
            e = item if isinstance(item, Edge) else Edge(*item)
            e = Edge(str(e.id), str(e.u), str(e.v), float(e.r))
            if e.u not in vset or e.v not in vset:
                missing = e.u if e.u not in vset else e.v
                raise NetworkError(f"edge {e.id!r} has undeclared endpoint {missing!r}")
            if not math.isfinite(e.r):
                raise NetworkError(f"edge {e.id!r}: resistance must be finite")
            if e.r <= 0:
                raise NetworkError(f"edge {e.id!r}: nonpositive resistance {e.r!r}")
            edge_list.append(e)

        by_id: dict[str, Edge] = {}
        for e in edge_list:
            if e.id in by_id:
                raise NetworkError(f"duplicate edge id {e.id!r}")
            by_id[e.id] = e

        incident: dict[str, list[str]] = {x: [] for x in verts}
        for e in edge_list:
            incident[e.u].append(e.id)
            if e.v != e.u:
                incident[e.v].append(e.id)

        self._vertices = verts
        self._edges = tuple(edge_list)
        self._by_id = MappingProxyType(by_id)
        self._incident = MappingProxyType({x: tuple(sorted(ids)) for x, ids in incident.items()})

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._by_id[edge_id]
        except KeyError:
            raise NetworkError(f"unknown edge {edge_id!r}") from None

    def has_edge(self, edge_id: str) -> bool:
        return edge_id in self._by_id

    def has_vertex(self, x: str) -> bool:
        return x in self._incident

    def incident(self, x: str) -> tuple[str, ...]:
        """Edge ids incident with ``x``, sorted lexicographically."""
        try:
            return self._incident[x]
        except KeyError:
            raise NetworkError(f"unknown vertex {x!r}") from None

    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self._edges)

    def component(self, x: str) -> set[str]:
        """Vertex set of the connected component containing ``x``."""
        seen = {x}
        todo = deque([x])
        while todo:
            y = todo.popleft()
            for eid in self.incident(y):
                z = self._by_id[eid].other(y)
                if z not in seen:
                    seen.add(z)
                    todo.append(z)
        return seen

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Multigraph):
            return NotImplemented
        return self._vertices == other._vertices and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._vertices, self._edges))

    def __repr__(self) -> str:
        return f"Multigraph({len(self._vertices)} vertices, {len(self._edges)} edges)"


def _first_duplicate(items):
    seen = set()
    for x in items:
        if x in seen:
            return x
        seen.add(x)
    return None


@dataclass(frozen=True)
class Network:
    """A multigraph with source ``p``, sink ``q`` and intensity ``I``.

    Use :func:`build_network` to construct one; it validates terminals and
    connectivity.
    """

    graph: Multigraph
    p: str
    q: str
    I: float

    def with_intensity(self, I: float) -> "Network":
        return Network(self.graph, self.p, self.q, float(I))

    def demand(self, x: str) -> float:
        """Required net outflow at ``x``: ``I`` at p, ``-I`` at q, else 0."""
        if x == self.p:
            return self.I
        if x == self.q:
            return -self.I
        return 0.0


def build_network(graph: Multigraph, p, q, I: float) -> Network:
    p, q = str(p), str(q)
    for name, t in (("p", p), ("q", q)):
        if not graph.has_vertex(t):
            raise NetworkError(f"unknown terminal {name}={t!r}")
    if p == q:
        raise NetworkError("terminals must differ (p = q)")
    for e in graph.edges:
        if e.u == e.v:
            raise NetworkError(f"self-loop present: edge {e.id!r} at {e.u!r}")
    I = float(I)
    if not math.isfinite(I):
        raise NetworkError("intensity must be finite")
    if q not in graph.component(p):
        raise NetworkError(f"disconnected terminals: {p!r} and {q!r}")
    return Network(graph, p, q, I)


class Flow(Mapping[str, float]):
    """Edge id -> signed value relative to the canonical orientation.

    Read-only mapping. Supports ``+``, ``-`` and scalar ``*`` between flows
    on the same edge set.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Mapping[str, float]):
        self._values = {str(k): float(v) for k, v in values.items()}

    @classmethod
    def zeros(cls, graph: Multigraph) -> "Flow":
        return cls({eid: 0.0 for eid in graph.edge_ids()})

    @classmethod
    def on(cls, graph: Multigraph, values: Mapping[str, float]) -> "Flow":
        """Flow on every edge of ``graph``; edges missing from ``values`` get 0."""
        unknown = set(values) - set(graph.edge_ids())
        if unknown:
            raise NetworkError(f"flow refers to unknown edge {sorted(unknown)[0]!r}")
        return cls({eid: values.get(eid, 0.0) for eid in graph.edge_ids()})

    def __getitem__(self, edge_id: str) -> float:
        return self._values[edge_id]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return f"Flow({self._values!r})"

    def _combine(self, other: "Flow", sign: float) -> "Flow":
        if set(self._values) != set(other._values):
            raise NetworkError("flows are defined on different edge sets")
        return Flow({k: v + sign * other._values[k] for k, v in self._values.items()})

    def __add__(self, other: "Flow") -> "Flow":
        return self._combine(other, 1.0)

    def __sub__(self, other: "Flow") -> "Flow":
        return self._combine(other, -1.0)

    def __mul__(self, c: float) -> "Flow":
        return Flow({k: c * v for k, v in self._values.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "Flow":
        return self * -1.0

    def restrict(self, edge_ids: Iterable[str]) -> "Flow":
        return Flow({k: self._values[k] for k in edge_ids})

    def max_abs_diff(self, other: "Flow", edge_ids: Iterable[str] | None = None) -> float:
        ids = self._values.keys() if edge_ids is None else edge_ids
        return max((abs(self._values[k] - other[k]) for k in ids), default=0.0)


def check_flow(flow: Flow, graph: Multigraph) -> None:
    missing = [eid for eid in graph.edge_ids() if eid not in flow]
    if missing:
        raise NetworkError(f"flow has no value for edge {missing[0]!r}")


def flow_value(flow: Flow, e: OrientedEdge) -> float:
    try:
        val = flow[e.edge_id]
    except KeyError:
        raise NetworkError(f"unknown edge {e.edge_id!r}") from None
    return val if e.forward else -val


def net_flow_at(flow: Flow, network: Network, x) -> float:
    """Signed flow leaving ``x`` summed over its incident edges."""
    x = str(x)
    g = network.graph
    total = 0.0
    for eid in g.incident(x):
        e = g.edge(eid)
        total += flow[eid] if e.u == x else -flow[eid]
    return total


# -- JSON interchange --------------------------------------------------------

def network_to_dict(network: Network) -> dict:
    g = network.graph
    return {
        "vertices": list(g.vertices),
        "edges": [{"id": e.id, "u": e.u, "v": e.v, "r": e.r} for e in g.edges],
        "p": network.p,
        "q": network.q,
        "I": network.I,
    }


def network_from_dict(data: Mapping) -> Network:
    if not isinstance(data, Mapping):
        raise NetworkError("network JSON must be an object")
    for key in ("vertices", "edges", "p", "q", "I"):
        if key not in data:
            raise NetworkError(f"missing field {key!r}")
    if not isinstance(data["vertices"], list):
        raise NetworkError("field 'vertices' must be a list")
    if not isinstance(data["edges"], list):
        raise NetworkError("field 'edges' must be a list")
    edges = []
    for k, rec in enumerate(data["edges"]):
        if not isinstance(rec, Mapping):
            raise NetworkError(f"edges[{k}] must be an object")
        for key in ("id", "u", "v", "r"):
            if key not in rec:
                raise NetworkError(f"edges[{k}]: missing field {key!r}")
        try:
            r = float(rec["r"])
        except (TypeError, ValueError):
            raise NetworkError(f"edges[{k}]: field 'r' must be a number") from None
        edges.append(Edge(str(rec["id"]), str(rec["u"]), str(rec["v"]), r))
    try:
        I = float(data["I"])
    except (TypeError, ValueError):
        raise NetworkError("field 'I' must be a number") from None
    graph = Multigraph(data["vertices"], edges)
    return build_network(graph, data["p"], data["q"], I)


def flow_from_dict(data: Mapping, graph: Multigraph) -> Flow:
    if not isinstance(data, Mapping) or "flows" not in data:
        raise NetworkError("missing field 'flows'")
    raw = data["flows"]
    if not isinstance(raw, Mapping):
        raise NetworkError("field 'flows' must be an object")
    values = {}
    for k, v in raw.items():
        try:
            values[str(k)] = float(v)
        except (TypeError, ValueError):
            raise NetworkError(f"flows[{k!r}] must be a number") from None
    return Flow.on(graph, values)


def flow_to_dict(flow: Flow) -> dict:
    return {"flows": dict(flow.items())}
