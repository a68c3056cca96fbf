import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kirchnet.analysis import cut_flux
from kirchnet.generators import (
    FAMILIES,
    ResistanceSchedule,
    conductance_summable,
    contracted_vertex_id,
    family_from_dict,
    make_family,
    random_network,
)
from kirchnet.netcore import net_flow_at
from kirchnet.solver import solve_current

GEOM = ResistanceSchedule.geometric(1.0, 0.5)
ALL = sorted(FAMILIES)


def fam(name, schedule=None, params=None):
    return make_family(name, params, schedule or ResistanceSchedule.constant(1.0))


# -- schedules ------------------------------------------------------------------


def test_schedule_values():
    assert ResistanceSchedule.constant(2.0).value(7) == 2.0
    assert GEOM.value(0) == 1.0 and GEOM.value(3) == 0.125
    assert ResistanceSchedule.power(1.0, 2.0).value(1) == 0.25
    assert ResistanceSchedule.table({0: 1.0, 1: 5.0}).value(1) == 5.0
    assert conductance_summable(1.0, 2.0).value(1) == 4.0


@pytest.mark.parametrize(
    "kind,params",
    [("geometric", (1.0, 1.0)), ("geometric", (1.0, 0.0)), ("constant", (0.0,)), ("power", (1.0, -1.0))],
)
def test_schedule_validation(kind, params):
    with pytest.raises(ValueError):
        ResistanceSchedule(kind, params)


def test_schedule_parse_and_round_trip():
    s = ResistanceSchedule.parse("geometric:1,1/2")
    assert s == GEOM
    r = ResistanceSchedule.parse("1/power:1,2")
    assert r.reciprocal and r.value(1) == 4.0
    for sched in (GEOM, r, ResistanceSchedule.table({0: 1.0, 2: 3.0}), ResistanceSchedule.constant(3.0)):
        assert ResistanceSchedule.from_dict(sched.to_dict()) == sched
    with pytest.raises(ValueError):
        ResistanceSchedule.parse("zigzag:1")


def test_summable_flags_and_partial_sums():
    assert GEOM.summable and ResistanceSchedule.power(1, 2).summable
    assert not ResistanceSchedule.constant(1).summable
    assert not ResistanceSchedule.power(1, 1).summable
    assert not conductance_summable().summable
    sums = GEOM.partial_sums(40)
    # Cauchy: increments shrink geometrically towards the limit 2
    assert abs(sums[-1] - 2.0) < 1e-11
    assert np.all(np.diff(sums) > 0)


# -- families -------------------------------------------------------------------


def test_unknown_family():
    with pytest.raises(ValueError, match="unknown family"):
        make_family("moebius")


def test_invalid_params():
    with pytest.raises(ValueError):
        make_family("ladder", {"width": 3})
    with pytest.raises(ValueError):
        make_family("binary_tree", {"branching": 1})


def test_family_spec_json():
    f = family_from_dict({"family": "ladder", "schedule": {"kind": "geometric", "base": 1, "ratio": 0.5}})
    assert f.name == "ladder" and f.schedule == GEOM
    assert family_from_dict(f.describe()).describe() == f.describe()


def test_biinfinite_path_depth_three():
    net = fam("biinfinite_path", GEOM).truncation(3)
    g = net.graph
    assert len(g.vertices) == 7
    assert len(g.edges) == 6
    # p and q are adjacent interior vertices of the path
    assert g.has_edge("pq")
    assert len(g.incident("p")) == 2 and len(g.incident("q")) == 2
    ends = [x for x in g.vertices if len(g.incident(x)) == 1]
    assert sorted(ends) == ["p-3", "q+2"]


def test_ladder_depth_one_is_four_cycle():
    g = fam("ladder").truncation(1).graph
    assert sorted(g.vertices) == ["p", "p1", "q", "q1"]
    assert sorted(g.edge_ids()) == ["prail1", "qrail1", "rung0", "rung1"]
    assert (g.edge("rung0").u, g.edge("rung0").v) == ("p", "q")
    assert (g.edge("rung1").u, g.edge("rung1").v) == ("p1", "q1")
    assert all(len(g.incident(x)) == 2 for x in g.vertices)


def test_resistance_by_level():
    f = fam("ladder", GEOM)
    g = f.truncation(3).graph
    assert g.edge("rung0").r == 1.0
    assert g.edge("prail2").r == 0.25 and g.edge("rung2").r == 0.25
    assert f.resistance("qrail3") == 0.125


@pytest.mark.parametrize("name", ALL)
def test_nesting(name):
    f = fam(name)
    for n in range(1, 5):
        a, b = f.truncation_graph(n), f.truncation_graph(n + 1)
        assert set(a.vertices) <= set(b.vertices)
        assert set(a.edge_ids()) <= set(b.edge_ids())
        for e in a.edges:
            assert b.edge(e.id) == e
        assert f.p in a.vertices and f.q in a.vertices


def _components(graph, removed):
    """Brute-force components of ``graph - removed`` by graph search."""
    comp = {}
    for x in graph.vertices:
        if x in removed or x in comp:
            continue
        stack = [x]
        comp[x] = x
        while stack:
            y = stack.pop()
            for eid in graph.incident(y):
                z = graph.edge(eid).other(y)
                if z not in removed and z not in comp:
                    comp[z] = x
                    stack.append(z)
    return comp


@pytest.mark.parametrize("name", ALL)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_frontier_matches_brute_force(name, n):
    f = fam(name)
    big = f.truncation_graph(n + 4)
    inside = set(f.vertices_upto(n))
    crossing = {e.id for e in big.edges if (e.u in inside) != (e.v in inside)}
    front = f.frontier(n)
    assert {s.id for specs in front.values() for s in specs} == crossing
    comp = _components(big, inside)
    # same label <=> same component of G_N - G_n
    outer = {}
    for label, specs in front.items():
        for s in specs:
            x = s.v if s.u in inside else s.u
            outer[s.id] = (label, comp[x])
            assert f.component_of(x, n) == label
    labels = {lab for lab, _ in outer.values()}
    roots = {root for _, root in outer.values()}
    assert len(labels) == len(roots) == len(set(outer.values()))


@pytest.mark.parametrize("name", ALL)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_frontier_labels_coarsen_consistently(name, n):
    f = fam(name)
    for label, specs in f.frontier(n + 1).items():
        inside = set(f.vertices_upto(n + 1))
        for s in specs:
            x = s.v if s.u in inside else s.u
            assert f.component_of(x, n) == f.coarsen(label, n + 1)


def test_contraction_examples():
    cn = fam("biinfinite_path", GEOM).contraction(2)
    g = cn.network.graph
    assert set(cn.contracted.values()) == {"left", "right"}
    vks = list(cn.contracted)
    assert not any({g.edge(e).u, g.edge(e).v} == set(vks) for e in g.edge_ids())
    assert len(g.vertices) == len(fam("biinfinite_path").vertices_upto(2)) + 2

    lad = fam("ladder").contraction(2)
    assert list(lad.contracted.values()) == ["end"]
    vk = contracted_vertex_id("end")
    # both rails end in the single end vertex
    assert sorted(lad.network.graph.incident(vk)) == ["prail3", "qrail3"]

    tree = fam("binary_tree").contraction(2)
    assert len(tree.contracted) == 2**3
    for vk in tree.contracted:
        assert len(tree.network.graph.incident(vk)) == 1


def test_contraction_keeps_parallel_edges():
    # grid: the single outer component receives every frontier edge
    cn = fam("grid_quadrant").contraction(2)
    vk = contracted_vertex_id("far")
    assert len(cn.network.graph.incident(vk)) == len(fam("grid_quadrant").frontier(2)["far"])
    assert cn.origin == {e: e for e in cn.network.graph.edge_ids()}


@pytest.mark.parametrize("name", ALL)
def test_contracted_vertices_are_kirchhoff_vertices(name):
    cn = fam(name, GEOM).contraction(3)
    rep = solve_current(cn.network)
    for vk in cn.contracted:
        assert abs(net_flow_at(rep.flow, cn.network, vk)) <= 1e-10
        # equivalently, no net flux across the frontier class of vk
        assert abs(cut_flux(rep.flow, cn.network, [vk])) <= 1e-10


def test_rays():
    r = fam("biinfinite_path").ray("right", 4)
    assert r.vertices == ("q", "q+1", "q+2", "q+3", "q+4")
    assert r.edge_ids == ("R1", "R2", "R3", "R4")
    assert fam("ladder").ray("left_rail", 3).vertices == ("p", "p1", "p2", "p3")
    sw = fam("ladder").ray("switch", 3)
    assert sw.vertices == ("q", "p", "p1", "p2")
    assert not sw.steps[0].forward
    with pytest.raises(ValueError, match="depth must be"):
        fam("ladder").ray("left_rail", 0)
    with pytest.raises(ValueError, match="unknown ray"):
        fam("ladder").ray("diagonal", 3)


@pytest.mark.parametrize("name", ALL)
def test_rays_are_walks_in_truncations(name):
    f = fam(name)
    for rname in f.ray_names:
        r = f.ray(rname, 5)
        g = f.truncation_graph(8)
        assert len(r.vertices) == 6 and len(r.steps) == 5
        assert len(set(r.vertices)) == 6
        for k, oe in enumerate(r.steps):
            assert oe.tail(g) == r.vertices[k] and oe.head(g) == r.vertices[k + 1]
            assert r.levels[k] == f.edge_level(oe.edge_id)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 20), st.integers(0, 20))
def test_random_network_is_connected(seed, n, extra):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n, n - 1 + extra)
    g = net.graph
    assert len(g.vertices) == n and len(g.edges) == n - 1 + extra
    assert g.component(g.vertices[0]) == set(g.vertices)
    assert all(0.1 <= e.r <= 10 for e in g.edges)
    assert all(e.u != e.v for e in g.edges)
    assert math.isfinite(net.I)
