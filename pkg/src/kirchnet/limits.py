"""Exhaustion experiments on infinite families.

``run_exhaustion`` solves the current on every truncation ``G_n`` (free
mode) or every contracted network ``G_n**`` (contracted mode) and
tracks how the per-edge values settle. The ladder circulation and the
draynet flow are the two standard examples of flows that satisfy the
Kirchhoff laws locally but are not the current.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .analysis import cut_flux, energy, kirchhoff_residuals
from .generators import InfiniteFamily, Ladder, ResistanceSchedule, make_family
from .netcore import Flow, Network, net_flow_at
from .solver import DEFAULT_TOL, SolverError, solve_current

MODES = ("free", "contracted")
CAUCHY_THRESHOLD = 1e-6


@dataclass
class ExhaustionReport:
    """Per-level currents of an exhaustion and their convergence.

    ``gaps[n]`` (``n >= 2``) is the largest change on a reference edge
    between levels ``n - 1`` and ``n``; an edge absent from a level
    counts as carrying 0 there. ``flows[n]`` holds the solved current on
    every edge of the level-``n`` network, under the family's edge ids
    (in contracted mode this includes the edges into contracted vertices).
    """

    family: dict
    mode: str
    I: float
    levels: tuple[int, ...]
    flows: dict[int, Flow]
    networks: dict[int, Network]
    energies: dict[int, float]
    reference_edges: tuple[str, ...]
    gaps: dict[int, float]
    contracted_imbalance: dict[int, float] = field(default_factory=dict)
    threshold: float = CAUCHY_THRESHOLD

    def value(self, n: int, edge_id: str) -> float:
        return self.flows[n].get(edge_id, 0.0)

    @property
    def table(self) -> dict[str, list[float]]:
        return {e: [self.value(n, e) for n in self.levels] for e in self.reference_edges}

    @property
    def cauchy(self) -> bool:
        """Last three gaps strictly decreasing and the final gap below the threshold."""
        seq = [self.gaps[n] for n in sorted(self.gaps)]
        tail = seq[-3:]
        decreasing = len(tail) >= 2 and all(a > b for a, b in zip(tail, tail[1:]))
        return decreasing and seq[-1] <= self.threshold

    def deepest(self) -> Flow:
        return self.flows[self.levels[-1]]

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "mode": self.mode,
            "I": self.I,
            "levels": list(self.levels),
            "energies": [self.energies[n] for n in self.levels],
            "reference_edges": list(self.reference_edges),
            "table": self.table,
            "gaps": {str(n): g for n, g in self.gaps.items()},
            "contracted_imbalance": {str(n): v for n, v in self.contracted_imbalance.items()},
            "cauchy": self.cauchy,
            "threshold": self.threshold,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "energy", "gap"])
        for n in self.levels:
            gap = self.gaps.get(n)
            w.writerow([n, f"{self.energies[n]:.12g}", "" if gap is None else f"{gap:.12g}"])
        return buf.getvalue()


def _solve_level(family: InfiniteFamily, n: int, I: float, mode: str, tol: float):
    if mode == "free":
        net = family.truncation(n, I)
        contracted = {}
    else:
        cn = family.contraction(n, I)
        net, contracted = cn.network, cn.contracted
    try:
        rep = solve_current(net, tol)
    except SolverError as exc:
        raise SolverError(f"level {n}: {exc}") from exc
    if mode == "contracted":
        flow = Flow({cn.origin[eid]: v for eid, v in rep.flow.items()})
    else:
        flow = rep.flow
    imbalance = max((abs(net_flow_at(rep.flow, net, v)) for v in contracted), default=0.0)
    return net, flow, rep.energy, imbalance


def run_exhaustion(
    family: InfiniteFamily,
    I: float = 1.0,
    n_max: int = 10,
    mode: str = "contracted",
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> ExhaustionReport:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not isinstance(n_max, int) or n_max < 2:
        raise ValueError("n_max must be ≥ 2")
    levels = tuple(range(1, n_max + 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda n: _solve_level(family, n, I, mode, tol), levels))
    else:
        results = [_solve_level(family, n, I, mode, tol) for n in levels]

    networks = {n: r[0] for n, r in zip(levels, results)}
    flows = {n: r[1] for n, r in zip(levels, results)}
    energies = {n: r[2] for n, r in zip(levels, results)}
    imbalance = {n: r[3] for n, r in zip(levels, results)} if mode == "contracted" else {}

    ref_level = math.ceil(n_max / 2)
    reference = tuple(s.id for s in family.edges_upto(ref_level))
    gaps = {}
    for n in levels[1:]:
        prev, cur = flows[n - 1], flows[n]
        gaps[n] = max(abs(cur.get(e, 0.0) - prev.get(e, 0.0)) for e in reference)
    return ExhaustionReport(
        family=family.describe(),
        mode=mode,
        I=float(I),
        levels=levels,
        flows=flows,
        networks=networks,
        energies=energies,
        reference_edges=reference,
        gaps=gaps,
        contracted_imbalance=imbalance,
    )


@dataclass(frozen=True)
class LimitComparison:
    verdict: str  # "agree" or "differ"
    max_gap: float
    edge: str | None
    n_max: int
    tol: float
    free_energy: float
    contracted_energy: float
    label: str = "numeric, finite-depth"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "label": self.label,
            "max_gap": self.max_gap,
            "edge": self.edge,
            "n_max": self.n_max,
            "tol": self.tol,
            "free_energy": self.free_energy,
            "contracted_energy": self.contracted_energy,
        }


def compare_limits(family: InfiniteFamily, I: float = 1.0, n_max: int = 10, tol: float = 1e-4) -> LimitComparison:
    """Compare the deepest free and contracted currents on the reference edges.

    A finite-depth diagnostic: agreement here does not decide whether the
    two limits coincide.
    """
    free = run_exhaustion(family, I, n_max, "free")
    wired = run_exhaustion(family, I, n_max, "contracted")
    a, b = free.deepest(), wired.deepest()
    worst, edge = 0.0, None
    for e in free.reference_edges:
        d = abs(a.get(e, 0.0) - b.get(e, 0.0))
        if d > worst:
            worst, edge = d, e
    return LimitComparison(
        verdict="agree" if worst <= tol else "differ",
        max_gap=worst,
        edge=edge,
        n_max=n_max,
        tol=tol,
        free_energy=free.energies[n_max],
        contracted_energy=wired.energies[n_max],
    )


def energy_chain(family: InfiniteFamily, I: float = 1.0, n_max: int = 8, rel_slack: float = 1e-12) -> list[dict]:
    """Per-level energies of contracted and free currents.

    A level is a violation when the contracted energy exceeds the free one
    by more than ``rel_slack`` relative (rounding allowance for the cases,
    such as trees, where the two are equal).
    """
    free = run_exhaustion(family, I, n_max, "free")
    wired = run_exhaustion(family, I, n_max, "contracted")
    rows = []
    for n in free.levels:
        wf, wc = free.energies[n], wired.energies[n]
        rows.append({"level": n, "free": wf, "contracted": wc, "ok": wc <= wf * (1 + rel_slack)})
    return rows


# -- the ladder circulation -------------------------------------------------------


@dataclass(frozen=True)
class LadderCirculation:
    """Circulation on ``G_n`` of the ladder satisfying both Kirchhoff laws inside.

    ``rungs[k]`` is the flow on rung ``k`` from the p-rail to the q-rail;
    ``rails[k - 1]`` is the common magnitude on the two level-``k`` rail
    edges (towards rung 0 on the p-rail, away from it on the q-rail);
    ``next_rail`` is the value level ``n + 1`` would need. The recursion
    runs in exact rational arithmetic (``exact``, canonical orientation);
    ``flow`` holds the same values rounded to floats.
    """

    level: int
    network: Network
    exact: Mapping[str, Fraction]
    flow: Flow
    rungs: tuple[float, ...]
    rails: tuple[float, ...]
    next_rail: float
    partial_energies: tuple[float, ...]  # W_1 .. W_n

    def interior_vertices(self) -> list[str]:
        """Vertices below the last level; p_n and q_n miss their outer rails."""
        return [x for x in self.network.graph.vertices if Ladder.vertex_level(x) < self.level]

    def exact_residuals(self) -> tuple[dict[str, Fraction], dict[int, Fraction]]:
        """Node residuals at interior vertices and cycle sums on squares 1..n, exactly."""
        g = self.network.graph
        res = {}
        for x in self.interior_vertices():
            tot = Fraction(0)
            for eid in g.incident(x):
                e = g.edge(eid)
                tot += self.exact[eid] if e.u == x else -self.exact[eid]
            res[x] = tot
        r = {e.id: Fraction(e.r) for e in g.edges}
        f = self.exact
        cyc = {}
        for k in range(1, self.level + 1):
            # p_{k-1} -> q_{k-1} -> q_k -> p_k -> p_{k-1}
            lower = "rung0" if k == 1 else f"rung{k - 1}"
            cyc[k] = (
                f[lower] * r[lower]
                + f[f"qrail{k}"] * r[f"qrail{k}"]
                - f[f"rung{k}"] * r[f"rung{k}"]
                - f[f"prail{k}"] * r[f"prail{k}"]
            )
        return res, cyc

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "rungs": list(self.rungs),
            "rails": list(self.rails),
            "next_rail": self.next_rail,
            "partial_energies": list(self.partial_energies),
            "flows": dict(self.flow.items()),
        }


def ladder_circulation(schedule: ResistanceSchedule, n: int) -> LadderCirculation:
    """Build the ladder circulation level by level.

    Start with 1 on rung 0 and 1 on both level-1 rails; at level ``k`` the
    rung value is fixed by the cycle law on the ``k``-th square, and the
    level-``k+1`` rails by the node law at the rung's endpoints.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError("level must be an integer >= 1")
    fam = make_family("ladder", None, schedule)
    r = [Fraction(schedule.value(k)) for k in range(n + 1)]
    rungs = [Fraction(1)]
    a = b = Fraction(1)  # p-rail inward, q-rail outward
    rails = []
    exact = {"rung0": Fraction(1)}
    for k in range(1, n + 1):
        rails.append(a)
        u = (rungs[-1] * r[k - 1] + (a + b) * r[k]) / r[k]
        rungs.append(u)
        exact[f"prail{k}"] = -a
        exact[f"qrail{k}"] = b
        exact[f"rung{k}"] = u
        a, b = a + u, b + u
    net = fam.truncation(n, 0.0)
    per_level = [Fraction(0)] * (n + 1)
    for eid, v in exact.items():
        k = fam.edge_level(eid)
        per_level[k] += v * v * r[k]
    partial = []
    acc = per_level[0]
    for k in range(1, n + 1):
        acc += per_level[k]
        partial.append(float(acc))
    return LadderCirculation(
        level=n,
        network=net,
        exact=exact,
        flow=Flow.on(net.graph, {k: float(v) for k, v in exact.items()}),
        rungs=tuple(float(u) for u in rungs),
        rails=tuple(float(x) for x in rails),
        next_rail=float(a),
        partial_energies=tuple(partial),
    )


# -- the draynet ----------------------------------------------------------------


def draynet_pathological_flow(network: Network, I: float | None = None) -> Flow:
    """Flow sending ``I`` from p out to the left end and back into q from the right.

    ``network`` is a truncation of ``biinfinite_path``; ``pq`` carries 0.
    """
    I = network.I if I is None else I
    values = {}
    for e in network.graph.edges:
        if e.id.startswith("L"):
            values[e.id] = I
        elif e.id.startswith("R"):
            values[e.id] = -I
        else:
            values[e.id] = 0.0
    return Flow.on(network.graph, values)


def draynet_report(schedule: ResistanceSchedule, n: int = 6, I: float = 1.0) -> dict:
    """Pathological flow versus the current on ``G_n`` of the double ray."""
    if n < 3:
        raise ValueError("draynet demo needs n >= 3 so the left cut avoids p")
    fam = make_family("biinfinite_path", None, schedule)
    net = fam.truncation(n, I)
    bad = draynet_pathological_flow(net)
    cur = solve_current(net).flow
    left3 = net.graph.vertices[:3]
    res = kirchhoff_residuals(bad, net)
    leaves = [net.graph.vertices[0], net.graph.vertices[-1]]
    return {
        "family": fam.describe(),
        "level": n,
        "I": I,
        "cut": list(left3),
        "pathological": {
            "flows": dict(bad.items()),
            "cut_flux": cut_flux(bad, net, left3),
            "energy": energy(bad, net),
            "max_cycle_residual": res.max_cycle,
            "leaf_node_residuals": {x: res.node[x] for x in leaves},
        },
        "current": {
            "flows": dict(cur.items()),
            "cut_flux": cut_flux(cur, net, left3),
            "energy": energy(cur, net),
        },
    }
