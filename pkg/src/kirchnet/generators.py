"""Infinite network families and their finite truncations.

A family is an infinite locally finite graph described by rules: each
vertex has a level, the truncation ``G_n`` is the subgraph induced by the
vertices of level at most ``n`` (nested in ``n``, ids reused), and the
components of ``G - G_n`` together with the edges hanging into them are
given in closed form. Contracting each such component to a single vertex
gives the wired network ``G_n**``.

Edge resistances come from a :class:`ResistanceSchedule` evaluated at the
edge's level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, NamedTuple

import numpy as np

from .netcore import Edge, Multigraph, Network, NetworkError, OrientedEdge, build_network

# -- schedules ----------------------------------------------------------------

SCHEDULE_KINDS = ("constant", "geometric", "power", "table")


@dataclass(frozen=True)
class ResistanceSchedule:
    """Level -> resistance.

    ``constant(c)``: ``c``. ``geometric(base, ratio)``: ``base * ratio**k``
    with ``0 < ratio < 1``. ``power(c, alpha)``: ``c * (k + 1)**-alpha``.
    ``table``: explicit values. With ``reciprocal=True`` the schedule's
    value is used as a conductance, i.e. the resistance is its inverse;
    ``power(c, alpha > 1, reciprocal=True)`` then has summable
    conductances instead of summable resistances.
    """

    kind: str
    params: tuple = ()
    reciprocal: bool = False

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        p = self.params
        if self.kind == "constant":
            if len(p) != 1 or not p[0] > 0:
                raise ValueError("constant schedule needs one positive value")
        elif self.kind == "geometric":
            if len(p) != 2 or not p[0] > 0 or not 0 < p[1] < 1:
                raise ValueError("geometric schedule needs base > 0 and 0 < ratio < 1")
        elif self.kind == "power":
            if len(p) != 2 or not p[0] > 0 or not p[1] > 0:
                raise ValueError("power schedule needs c > 0 and exponent > 0")
        else:
            if not p or any(not v > 0 for _, v in p):
                raise ValueError("table schedule needs positive values")
        for v in (p if self.kind != "table" else [v for _, v in p]):
            if not math.isfinite(v):
                raise ValueError("schedule parameters must be finite")

    @classmethod
    def constant(cls, c: float = 1.0) -> "ResistanceSchedule":
        return cls("constant", (float(c),))

    @classmethod
    def geometric(cls, base: float, ratio: float) -> "ResistanceSchedule":
        return cls("geometric", (float(base), float(ratio)))

    @classmethod
    def power(cls, c: float, alpha: float, reciprocal: bool = False) -> "ResistanceSchedule":
        return cls("power", (float(c), float(alpha)), reciprocal)

    @classmethod
    def table(cls, values: Mapping[int, float]) -> "ResistanceSchedule":
        return cls("table", tuple(sorted((int(k), float(v)) for k, v in values.items())))

    def value(self, level: int) -> float:
        if level < 0:
            raise ValueError("level must be >= 0")
        p = self.params
        if self.kind == "constant":
            val = p[0]
        elif self.kind == "geometric":
            val = p[0] * p[1] ** level
        elif self.kind == "power":
            val = p[0] * (level + 1) ** (-p[1])
        else:
            table = dict(p)
            if level not in table:
                raise ValueError(f"table schedule has no value for level {level}")
            val = table[level]
        return 1.0 / val if self.reciprocal else val

    @property
    def summable(self) -> bool:
        """Whether the resistances are summable over boundedly many edges per level."""
        if self.reciprocal:
            return False
        return self.kind == "geometric" or (self.kind == "power" and self.params[1] > 1)

    def partial_sums(self, n: int, edges_per_level: int = 1) -> np.ndarray:
        vals = np.array([self.value(k) for k in range(n + 1)])
        return np.cumsum(edges_per_level * vals)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "constant":
            d["c"] = self.params[0]
        elif self.kind == "geometric":
            d["base"], d["ratio"] = self.params
        elif self.kind == "power":
            d["c"], d["alpha"] = self.params
        else:
            d["values"] = {str(k): v for k, v in self.params}
        if self.reciprocal:
            d["reciprocal"] = True
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ResistanceSchedule":
        if not isinstance(d, Mapping) or "kind" not in d:
            raise ValueError("schedule must be an object with a 'kind'")
        kind = d["kind"]
        rec = bool(d.get("reciprocal", False))
        try:
            if kind == "constant":
                return cls("constant", (float(d.get("c", 1.0)),), rec)
            if kind == "geometric":
                return cls("geometric", (float(d["base"]), float(d["ratio"])), rec)
            if kind == "power":
                return cls("power", (float(d["c"]), float(d["alpha"])), rec)
            if kind == "table":
                vals = d["values"]
                return cls("table", tuple(sorted((int(k), float(v)) for k, v in vals.items())), rec)
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValueError(f"invalid {kind} schedule: {exc}") from None
        raise ValueError(f"unknown schedule kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "ResistanceSchedule":
        """Parse ``kind:a,b`` shorthand (``geometric:1,1/2``) or a JSON object."""
        text = text.strip()
        if text.startswith("{"):
            return cls.from_dict(json.loads(text))
        kind, _, rest = text.partition(":")
        args = [float(Fraction(a.strip())) for a in rest.split(",") if a.strip()] if rest else []
        reciprocal = kind.startswith("1/")
        kind = kind[2:] if reciprocal else kind
        if kind == "constant":
            return cls("constant", tuple(args or [1.0]), reciprocal)
        if kind in ("geometric", "power"):
            return cls(kind, tuple(args), reciprocal)
        raise ValueError(f"unknown schedule kind {kind!r}")


def conductance_summable(c: float = 1.0, alpha: float = 2.0) -> ResistanceSchedule:
    """Preset with ``sum 1/r < inf``: resistance ``(k + 1)**alpha / c``."""
    if not alpha > 1:
        raise ValueError("alpha must exceed 1 for summable conductances")
    return ResistanceSchedule.power(c, alpha, reciprocal=True)


# -- families -----------------------------------------------------------------


class EdgeSpec(NamedTuple):
    id: str
    u: str
    v: str
    level: int


@dataclass(frozen=True)
class Ray:
    vertices: tuple[str, ...]
    steps: tuple[OrientedEdge, ...]
    levels: tuple[int, ...]

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(s.edge_id for s in self.steps)


@dataclass(frozen=True)
class ContractedNetwork:
    """``G_n`` plus one vertex per component of ``G - G_n``."""

    network: Network
    level: int
    contracted: Mapping[str, str]  # contracted vertex id -> component label
    origin: Mapping[str, str]  # edge id -> edge id in the family


def contracted_vertex_id(label: str) -> str:
    return f"*{label}"


class InfiniteFamily:
    """Base class; subclasses describe one infinite graph by rules."""

    name: str = ""
    ray_names: tuple[str, ...] = ()
    p: str = "p"
    q: str = "q"

    def __init__(self, params: Mapping | None, schedule: ResistanceSchedule):
        self.params = dict(params or {})
        self.schedule = schedule
        self._check_params()

    def _check_params(self) -> None:
        if self.params:
            raise ValueError(f"{self.name} takes no parameters, got {sorted(self.params)}")

    def __repr__(self) -> str:
        return f"{type(self).__name__}(params={self.params}, schedule={self.schedule})"

    def describe(self) -> dict:
        return {"family": self.name, "params": self.params, "schedule": self.schedule.to_dict()}

    # structure, provided by subclasses
    def vertex_level(self, x: str) -> int:
        raise NotImplementedError

    def vertices_upto(self, n: int) -> list[str]:
        raise NotImplementedError

    def edges_upto(self, n: int) -> list[EdgeSpec]:
        """Edges with both endpoints of level <= n."""
        raise NotImplementedError

    def frontier(self, n: int) -> dict[str, list[EdgeSpec]]:
        """Component label -> edges joining ``G_n`` to that component of ``G - G_n``."""
        raise NotImplementedError

    def component_of(self, x: str, n: int) -> str:
        """Label of the component of ``G - G_n`` containing vertex ``x`` (level > n)."""
        raise NotImplementedError

    def coarsen(self, label: str, n: int) -> str:
        """Component of ``G - G_{n-1}`` containing the level-``n`` component ``label``."""
        return label

    def _ray_steps(self, name: str) -> Iterator[tuple[str, OrientedEdge]]:
        raise NotImplementedError

    # derived operations
    def _check_level(self, n: int) -> None:
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError(f"level must be an integer >= 1, got {n!r}")

    def _edge(self, spec: EdgeSpec) -> Edge:
        return Edge(spec.id, spec.u, spec.v, self.schedule.value(spec.level))

    def edge_level(self, edge_id: str) -> int:
        raise NotImplementedError

    def resistance(self, edge_id: str) -> float:
        return self.schedule.value(self.edge_level(edge_id))

    def truncation_graph(self, n: int) -> Multigraph:
        self._check_level(n)
        return Multigraph(self.vertices_upto(n), [self._edge(s) for s in self.edges_upto(n)])

    def truncation(self, n: int, I: float = 1.0) -> Network:
        return build_network(self.truncation_graph(n), self.p, self.q, I)

    def contraction(self, n: int, I: float = 1.0) -> ContractedNetwork:
        self._check_level(n)
        inside = set(self.vertices_upto(n))
        verts = list(self.vertices_upto(n))
        edges = [self._edge(s) for s in self.edges_upto(n)]
        contracted = {}
        for label, specs in self.frontier(n).items():
            vk = contracted_vertex_id(label)
            contracted[vk] = label
            verts.append(vk)
            for s in specs:
                u = s.u if s.u in inside else vk
                v = s.v if s.v in inside else vk
                edges.append(Edge(s.id, u, v, self.schedule.value(s.level)))
        net = build_network(Multigraph(verts, edges), self.p, self.q, I)
        return ContractedNetwork(
            network=net,
            level=n,
            contracted=contracted,
            origin={e.id: e.id for e in edges},
        )

    def ray(self, name: str, depth: int) -> Ray:
        if name not in self.ray_names:
            raise ValueError(f"unknown ray {name!r} for {self.name}; known: {list(self.ray_names)}")
        if not isinstance(depth, (int, np.integer)) or depth < 1:
            raise ValueError("depth must be >= 1")
        verts = []
        steps = []
        for k, (x, step) in enumerate(self._ray_steps(name)):
            verts.append(x)
            if step is not None:
                steps.append(step)
            if k == depth:
                break
        return Ray(tuple(verts), tuple(steps), tuple(self.edge_level(s.edge_id) for s in steps))


class BiinfinitePath(InfiniteFamily):
    """Double ray ``... p-2, p-1, p, q, q+1, q+2 ...`` with ``pq`` an edge.

    Vertex level is the distance from ``p``. Edge ``L{k}`` joins ``p-(k-1)``
    to ``p-k`` and ``R{k}`` joins ``q+(k-1)`` to ``q+k``, both at level
    ``k``; ``pq`` has level 0.
    """

    name = "biinfinite_path"
    ray_names = ("left", "right")

    @staticmethod
    def _left(k: int) -> str:
        return "p" if k == 0 else f"p-{k}"

    @staticmethod
    def _right(k: int) -> str:
        return "q" if k == 0 else f"q+{k}"

    def vertex_level(self, x: str) -> int:
        if x == "p":
            return 0
        if x == "q":
            return 1
        if x.startswith("p-"):
            return int(x[2:])
        if x.startswith("q+"):
            return int(x[2:]) + 1
        raise NetworkError(f"unknown vertex {x!r}")

    def edge_level(self, edge_id: str) -> int:
        if edge_id == "pq":
            return 0
        if edge_id[:1] in ("L", "R") and edge_id[1:].isdigit():
            return int(edge_id[1:])
        raise NetworkError(f"unknown edge {edge_id!r}")

    def vertices_upto(self, n: int) -> list[str]:
        return [self._left(k) for k in range(n, -1, -1)] + [self._right(k) for k in range(n)]

    def edges_upto(self, n: int) -> list[EdgeSpec]:
        out = [EdgeSpec("pq", "p", "q", 0)]
        out += [EdgeSpec(f"L{k}", self._left(k - 1), self._left(k), k) for k in range(1, n + 1)]
        out += [EdgeSpec(f"R{k}", self._right(k - 1), self._right(k), k) for k in range(1, n)]
        return out

    def frontier(self, n: int) -> dict[str, list[EdgeSpec]]:
        return {
            "left": [EdgeSpec(f"L{n + 1}", self._left(n), self._left(n + 1), n + 1)],
            "right": [EdgeSpec(f"R{n}", self._right(n - 1), self._right(n), n)],
        }

    def component_of(self, x: str, n: int) -> str:
        if self.vertex_level(x) <= n:
            raise ValueError(f"{x!r} lies in G_{n}")
        return "left" if x.startswith("p-") else "right"

    def _ray_steps(self, name):
        yield (self._left(0) if name == "left" else self._right(0)), None
        k = 1
        while True:
            if name == "left":
                yield self._left(k), OrientedEdge(f"L{k}")
            else:
                yield self._right(k), OrientedEdge(f"R{k}")
            k += 1


class Ladder(InfiniteFamily):
    """One-ended ladder: rails ``p, p1, p2, ...`` and ``q, q1, q2, ...``.

    Level ``k >= 1`` holds the rail edges ``prail{k}`` (``p_{k-1} -> p_k``),
    ``qrail{k}`` (``q_{k-1} -> q_k``) and the rung ``rung{k}``
    (``p_k -> q_k``). ``rung0`` is the edge ``p -> q``.
    """

    name = "ladder"
    ray_names = ("left_rail", "right_rail", "switch")

    @staticmethod
    def pv(k: int) -> str:
        return "p" if k == 0 else f"p{k}"

    @staticmethod
    def qv(k: int) -> str:
        return "q" if k == 0 else f"q{k}"

    @staticmethod
    def vertex_level(x: str) -> int:
        if x in ("p", "q"):
            return 0
        if x[0] in "pq" and x[1:].isdigit():
            return int(x[1:])
        raise NetworkError(f"unknown vertex {x!r}")

    def edge_level(self, edge_id: str) -> int:
        for prefix in ("prail", "qrail", "rung"):
            if edge_id.startswith(prefix) and edge_id[len(prefix):].isdigit():
                return int(edge_id[len(prefix):])
        raise NetworkError(f"unknown edge {edge_id!r}")

    def vertices_upto(self, n: int) -> list[str]:
        out = []
        for k in range(n + 1):
            out += [self.pv(k), self.qv(k)]
        return out

    @classmethod
    def level_edges(cls, k: int) -> list[EdgeSpec]:
        if k == 0:
            return [EdgeSpec("rung0", "p", "q", 0)]
        return [
            EdgeSpec(f"prail{k}", cls.pv(k - 1), cls.pv(k), k),
            EdgeSpec(f"qrail{k}", cls.qv(k - 1), cls.qv(k), k),
            EdgeSpec(f"rung{k}", cls.pv(k), cls.qv(k), k),
        ]

    def edges_upto(self, n: int) -> list[EdgeSpec]:
        out = []
        for k in range(n + 1):
            out += self.level_edges(k)
        return out

    def frontier(self, n: int) -> dict[str, list[EdgeSpec]]:
        return {"end": self.level_edges(n + 1)[:2]}

    def component_of(self, x: str, n: int) -> str:
        if self.vertex_level(x) <= n:
            raise ValueError(f"{x!r} lies in G_{n}")
        return "end"

    def _ray_steps(self, name):
        if name == "left_rail":
            yield "p", None
            k = 1
            while True:
                yield self.pv(k), OrientedEdge(f"prail{k}")
                k += 1
        elif name == "right_rail":
            yield "q", None
            k = 1
            while True:
                yield self.qv(k), OrientedEdge(f"qrail{k}")
                k += 1
        else:
            yield "q", None
            yield "p", OrientedEdge("rung0", forward=False)
            k = 1
            while True:
                yield self.pv(k), OrientedEdge(f"prail{k}")
                k += 1


class BinaryTree(InfiniteFamily):
    """Rooted tree with root ``p``; other vertices are ``t<word>``.

    Words are over the digits ``0..b-1`` (``b`` = param ``branching``,
    default 2); the level of ``t<w>`` is ``len(w)`` and ``q`` is ``t0``.
    Edge ``e<w>`` joins the parent of ``t<w>`` to ``t<w>`` at level
    ``len(w) - 1``.
    """

    name = "binary_tree"
    ray_names = ("left", "right")
    q = "t0"

    def _check_params(self) -> None:
        extra = set(self.params) - {"branching"}
        if extra:
            raise ValueError(f"binary_tree: unknown parameters {sorted(extra)}")
        b = self.params.get("branching", 2)
        if not isinstance(b, int) or not 2 <= b <= 9:
            raise ValueError("binary_tree: branching must be an integer in 2..9")
        self.branching = b

    @staticmethod
    def _vid(word: str) -> str:
        return "p" if word == "" else f"t{word}"

    def _words(self, depth: int) -> list[str]:
        words = [""]
        for _ in range(depth):
            words = [w + str(d) for w in words for d in range(self.branching)]
        return words

    def _edge_spec(self, w: str) -> EdgeSpec:
        return EdgeSpec(f"e{w}", self._vid(w[:-1]), self._vid(w), len(w) - 1)

    def vertex_level(self, x: str) -> int:
        if x == "p":
            return 0
        if x.startswith("t"):
            return len(x) - 1
        raise NetworkError(f"unknown vertex {x!r}")

    def edge_level(self, edge_id: str) -> int:
        w = edge_id[1:]
        if edge_id.startswith("e") and w and all(c.isdigit() and int(c) < self.branching for c in w):
            return len(w) - 1
        raise NetworkError(f"unknown edge {edge_id!r}")

    def vertices_upto(self, n: int) -> list[str]:
        out = []
        for d in range(n + 1):
            out += [self._vid(w) for w in self._words(d)]
        return out

    def edges_upto(self, n: int) -> list[EdgeSpec]:
        out = []
        for d in range(1, n + 1):
            out += [self._edge_spec(w) for w in self._words(d)]
        return out

    def frontier(self, n: int) -> dict[str, list[EdgeSpec]]:
        return {self._vid(w): [self._edge_spec(w)] for w in self._words(n + 1)}

    def component_of(self, x: str, n: int) -> str:
        if self.vertex_level(x) <= n:
            raise ValueError(f"{x!r} lies in G_{n}")
        return x[: n + 2]

    def coarsen(self, label: str, n: int) -> str:
        return label[: n + 1]

    def _ray_steps(self, name):
        digit = "0" if name == "left" else str(self.branching - 1)
        yield "p", None
        w = ""
        while True:
            w += digit
            yield self._vid(w), OrientedEdge(f"e{w}")


class GridQuadrant(InfiniteFamily):
    """Quarter-plane grid on ``x, y >= 0``; vertex ``x:y`` has level ``x + y``.

    ``p = 0:0``, ``q = 1:0``. Edge ``h{x}:{y}`` goes to ``x+1:y`` and
    ``v{x}:{y}`` to ``x:y+1``; both have level ``x + y``.
    """

    name = "grid_quadrant"
    ray_names = ("x_axis", "y_axis", "staircase", "x_axis_from_q", "staircase_from_q")
    p = "0:0"
    q = "1:0"

    @staticmethod
    def _vid(x: int, y: int) -> str:
        return f"{x}:{y}"

    def vertex_level(self, x: str) -> int:
        a, _, b = x.partition(":")
        try:
            return int(a) + int(b)
        except ValueError:
            raise NetworkError(f"unknown vertex {x!r}") from None

    def edge_level(self, edge_id: str) -> int:
        if edge_id[:1] in ("h", "v"):
            return self.vertex_level(edge_id[1:])
        raise NetworkError(f"unknown edge {edge_id!r}")

    def vertices_upto(self, n: int) -> list[str]:
        return [self._vid(x, s - x) for s in range(n + 1) for x in range(s + 1)]

    def _out_edges(self, x: int, y: int) -> list[EdgeSpec]:
        here = self._vid(x, y)
        return [
            EdgeSpec(f"h{here}", here, self._vid(x + 1, y), x + y),
            EdgeSpec(f"v{here}", here, self._vid(x, y + 1), x + y),
        ]

    def edges_upto(self, n: int) -> list[EdgeSpec]:
        out = []
        for s in range(n):
            for x in range(s + 1):
                out += self._out_edges(x, s - x)
        return out

    def frontier(self, n: int) -> dict[str, list[EdgeSpec]]:
        specs = []
        for x in range(n + 1):
            specs += self._out_edges(x, n - x)
        return {"far": specs}

    def component_of(self, x: str, n: int) -> str:
        if self.vertex_level(x) <= n:
            raise ValueError(f"{x!r} lies in G_{n}")
        return "far"

    def _ray_steps(self, name):
        x, y = (1, 0) if name.endswith("_from_q") else (0, 0)
        yield self._vid(x, y), None
        k = 0
        while True:
            horizontal = name.startswith("x_axis") or (name.startswith("staircase") and k % 2 == 0)
            here = self._vid(x, y)
            if horizontal:
                x += 1
                step = OrientedEdge(f"h{here}")
            else:
                y += 1
                step = OrientedEdge(f"v{here}")
            yield self._vid(x, y), step
            k += 1


class SingleRay(InfiniteFamily):
    """Ray ``p = x0, q = x1, x2, ...``; edge ``e{k}`` joins ``x_k -> x_{k+1}`` at level ``k``."""

    name = "single_ray"
    ray_names = ("ray", "from_p")

    @staticmethod
    def _vid(k: int) -> str:
        return {0: "p", 1: "q"}.get(k, f"x{k}")

    def vertex_level(self, x: str) -> int:
        if x == "p":
            return 0
        if x == "q":
            return 1
        if x.startswith("x") and x[1:].isdigit():
            return int(x[1:])
        raise NetworkError(f"unknown vertex {x!r}")

    def edge_level(self, edge_id: str) -> int:
        if edge_id.startswith("e") and edge_id[1:].isdigit():
            return int(edge_id[1:])
        raise NetworkError(f"unknown edge {edge_id!r}")

    def vertices_upto(self, n: int) -> list[str]:
        return [self._vid(k) for k in range(n + 1)]

    def edges_upto(self, n: int) -> list[EdgeSpec]:
        return [EdgeSpec(f"e{k}", self._vid(k), self._vid(k + 1), k) for k in range(n)]

    def frontier(self, n: int) -> dict[str, list[EdgeSpec]]:
        return {"end": [EdgeSpec(f"e{n}", self._vid(n), self._vid(n + 1), n)]}

    def component_of(self, x: str, n: int) -> str:
        if self.vertex_level(x) <= n:
            raise ValueError(f"{x!r} lies in G_{n}")
        return "end"

    def _ray_steps(self, name):
        k = 1 if name == "ray" else 0
        yield self._vid(k), None
        while True:
            yield self._vid(k + 1), OrientedEdge(f"e{k}")
            k += 1


FAMILIES: dict[str, type[InfiniteFamily]] = {
    cls.name: cls for cls in (BiinfinitePath, Ladder, BinaryTree, GridQuadrant, SingleRay)
}


def make_family(name: str, params: Mapping | None = None, schedule: ResistanceSchedule | None = None) -> InfiniteFamily:
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None
    if params is not None and not isinstance(params, Mapping):
        raise ValueError("params must be a mapping")
    return cls(params, schedule or ResistanceSchedule.constant(1.0))


def family_from_dict(d: Mapping) -> InfiniteFamily:
    if not isinstance(d, Mapping) or "family" not in d:
        raise ValueError("family spec must be an object with a 'family' field")
    sched = ResistanceSchedule.from_dict(d["schedule"]) if "schedule" in d else None
    return make_family(d["family"], d.get("params") or {}, sched)


def truncation(family: InfiniteFamily, n: int, I: float = 1.0) -> Network:
    return family.truncation(n, I)


def contraction(family: InfiniteFamily, n: int, I: float = 1.0) -> ContractedNetwork:
    return family.contraction(n, I)


def ray(family: InfiniteFamily, name: str, depth: int) -> Ray:
    return family.ray(name, depth)


# -- random finite networks -----------------------------------------------------


def random_network(
    rng: np.random.Generator,
    n_vertices: int,
    n_edges: int,
    r_range: tuple[float, float] = (0.1, 10.0),
    I: float = 1.0,
    parallel: bool = True,
) -> Network:
    """Connected random network: a random spanning tree plus extra edges.

    Extra edges may be parallel to existing ones when ``parallel`` is set;
    self-loops are never produced.
    """
    if n_vertices < 2:
        raise ValueError("need at least two vertices")
    if n_edges < n_vertices - 1:
        raise ValueError("too few edges for a connected graph")
    verts = [f"v{k:03d}" for k in range(n_vertices)]
    order = rng.permutation(n_vertices)
    pairs = []
    for k in range(1, n_vertices):
        a = int(order[k])
        b = int(order[rng.integers(0, k)])
        pairs.append((a, b))
    seen = {frozenset(pr) for pr in pairs}
    max_simple = n_vertices * (n_vertices - 1) // 2
    while len(pairs) < n_edges:
        a, b = (int(x) for x in rng.choice(n_vertices, size=2, replace=False))
        key = frozenset((a, b))
        if not parallel and key in seen:
            if len(seen) >= max_simple:
                raise ValueError("too many edges for a simple graph")
            continue
        seen.add(key)
        pairs.append((a, b))
    lo, hi = r_range
    rs = rng.uniform(lo, hi, size=len(pairs))
    edges = [Edge(f"e{k:03d}", verts[a], verts[b], float(r)) for k, ((a, b), r) in enumerate(zip(pairs, rs))]
    p, q = (int(x) for x in rng.choice(n_vertices, size=2, replace=False))
    return build_network(Multigraph(verts, edges), verts[p], verts[q], I)
