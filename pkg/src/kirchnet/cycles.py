"""Deterministic spanning forest and fundamental cycle basis.

The forest is grown breadth-first from a root (the source ``p`` for
networks), visiting the incident edges of each vertex in lexicographic
edge-id order. Components not containing the root are grown from their
lexicographically smallest vertex. Each non-tree edge closes exactly one
fundamental cycle; the cycle is oriented along the non-tree edge's
canonical direction and its id is that edge's id.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .netcore import Multigraph, OrientedEdge


@dataclass(frozen=True)
class SpanningForest:
    roots: tuple[str, ...]
    parent: dict[str, str | None]
    parent_edge: dict[str, str | None]
    depth: dict[str, int]
    order: tuple[str, ...]  # BFS order, roots first within their component
    tree_edges: frozenset[str]
    non_tree_edges: tuple[str, ...]

    def root_of(self, x: str) -> str:
        while self.parent[x] is not None:
            x = self.parent[x]
        return x

    def path_to_root(self, graph: Multigraph, x: str) -> list[OrientedEdge]:
        """Oriented tree edges walking from ``x`` up to its root."""
        steps = []
        while self.parent[x] is not None:
            eid = self.parent_edge[x]
            e = graph.edge(eid)
            # moving x -> parent
            steps.append(OrientedEdge(eid, forward=(e.u == x)))
            x = self.parent[x]
        return steps

    def tree_path(self, graph: Multigraph, a: str, b: str) -> list[OrientedEdge]:
        """Oriented tree edges of the unique forest path from ``a`` to ``b``."""
        up_a = []
        up_b = []
        x, y = a, b
        while self.depth[x] > self.depth[y]:
            up_a.append(x)
            x = self.parent[x]
        while self.depth[y] > self.depth[x]:
            up_b.append(y)
            y = self.parent[y]
        while x != y:
            if self.parent[x] is None or self.parent[y] is None:
                raise ValueError(f"{a!r} and {b!r} lie in different components")
            up_a.append(x)
            up_b.append(y)
            x, y = self.parent[x], self.parent[y]
        path = []
        for z in up_a:
            eid = self.parent_edge[z]
            path.append(OrientedEdge(eid, forward=(graph.edge(eid).u == z)))
        for z in reversed(up_b):
            eid = self.parent_edge[z]
            # moving parent -> z
            path.append(OrientedEdge(eid, forward=(graph.edge(eid).v == z)))
        return path


def spanning_forest(graph: Multigraph, root: str) -> SpanningForest:
    parent: dict[str, str | None] = {}
    parent_edge: dict[str, str | None] = {}
    depth: dict[str, int] = {}
    order: list[str] = []
    tree: set[str] = set()
    roots = []

    starts = [root] + sorted(x for x in graph.vertices if x != root)
    for s in starts:
        if s in parent:
            continue
        roots.append(s)
        parent[s] = None
        parent_edge[s] = None
        depth[s] = 0
        todo = deque([s])
        while todo:
            x = todo.popleft()
            order.append(x)
            for eid in graph.incident(x):  # already sorted
                y = graph.edge(eid).other(x)
                if y not in parent:
                    parent[y] = x
                    parent_edge[y] = eid
                    depth[y] = depth[x] + 1
                    tree.add(eid)
                    todo.append(y)

    non_tree = tuple(sorted(eid for eid in graph.edge_ids() if eid not in tree))
    return SpanningForest(
        roots=tuple(roots),
        parent=parent,
        parent_edge=parent_edge,
        depth=depth,
        order=tuple(order),
        tree_edges=frozenset(tree),
        non_tree_edges=non_tree,
    )


def fundamental_cycles(graph: Multigraph, forest: SpanningForest) -> dict[str, list[OrientedEdge]]:
    """Map non-tree edge id -> directed fundamental cycle starting with that edge."""
    cycles = {}
    for eid in forest.non_tree_edges:
        e = graph.edge(eid)
        cycles[eid] = [OrientedEdge(eid, True)] + forest.tree_path(graph, e.v, e.u)
    return cycles
