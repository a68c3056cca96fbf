import math
from fractions import Fraction

import pytest

from kirchnet.analysis import cut_flux, energy, kirchhoff_residuals
from kirchnet.generators import ResistanceSchedule, make_family
from kirchnet.limits import (
    compare_limits,
    draynet_pathological_flow,
    draynet_report,
    energy_chain,
    ladder_circulation,
    run_exhaustion,
)
from kirchnet.solver import SolverError

GEOM = ResistanceSchedule.geometric(1.0, 0.5)
UNIT = ResistanceSchedule.constant(1.0)


def fam(name, schedule=GEOM):
    return make_family(name, None, schedule)


@pytest.mark.parametrize("mode", ["contracted", "free"])
def test_draynet_exhaustion_is_constant(mode):
    rep = run_exhaustion(fam("biinfinite_path"), 1.0, 10, mode)
    for n in rep.levels:
        flow = rep.flows[n]
        assert flow["pq"] == 1.0
        assert all(v == 0.0 for e, v in flow.items() if e != "pq")
    assert set(rep.gaps.values()) == {0.0}


def test_ladder_gaps_decrease():
    rep = run_exhaustion(fam("ladder"), 1.0, 12, "contracted")
    seq = [rep.gaps[n] for n in range(2, 13)]
    assert all(a > b for a, b in zip(seq, seq[1:]))
    assert rep.cauchy
    assert rep.reference_edges == tuple(s.id for s in fam("ladder").edges_upto(6))
    assert max(rep.contracted_imbalance.values()) <= 1e-10


def test_contracted_flows_respect_frontier_cuts():
    f = fam("grid_quadrant")
    rep = run_exhaustion(f, 1.0, 5, "contracted")
    for n in rep.levels:
        inside = set(f.vertices_upto(n))
        for specs in f.frontier(n).values():
            out = sum(rep.flows[n][s.id] if s.u in inside else -rep.flows[n][s.id] for s in specs)
            assert abs(out) <= 1e-10


def test_exhaustion_report_serialisation():
    rep = run_exhaustion(fam("ladder"), 1.0, 4, "free")
    d = rep.to_dict()
    assert d["mode"] == "free" and d["levels"] == [1, 2, 3, 4]
    assert set(d["gaps"]) == {"2", "3", "4"}
    lines = rep.to_csv().splitlines()
    assert lines[0] == "level,energy,gap"
    assert len(lines) == 5 and lines[1].endswith(",")


def test_exhaustion_validation():
    with pytest.raises(ValueError, match="n_max must be"):
        run_exhaustion(fam("ladder"), 1.0, 1)
    with pytest.raises(ValueError, match="mode"):
        run_exhaustion(fam("ladder"), 1.0, 3, "wired")
    with pytest.raises(SolverError, match=r"level \d+: node residual"):
        run_exhaustion(fam("grid_quadrant"), 1.0, 3, tol=1e-300)


def test_parallel_levels_match_serial():
    a = run_exhaustion(fam("ladder"), 1.0, 6, "contracted")
    b = run_exhaustion(fam("ladder"), 1.0, 6, "contracted", workers=3)
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("name", ["ladder", "binary_tree", "grid_quadrant"])
@pytest.mark.parametrize("schedule", [GEOM, UNIT], ids=["geometric", "constant"])
def test_energy_chain(name, schedule):
    rows = energy_chain(fam(name, schedule), 1.0, 7)
    assert all(r["ok"] for r in rows)
    assert all(r["contracted"] <= r["free"] * (1 + 1e-12) for r in rows)


def test_tree_energies_coincide():
    # contracted subtrees hang by single edges, so they carry nothing
    for r in energy_chain(fam("binary_tree"), 1.0, 6):
        assert r["contracted"] == r["free"]


def test_compare_limits_examples():
    path = compare_limits(fam("biinfinite_path"), 1.0, 6)
    assert path.verdict == "agree" and path.max_gap == 0.0
    lad = compare_limits(fam("ladder"), 1.0, 12)
    assert lad.verdict == "agree" and lad.max_gap <= 1e-4
    assert lad.label == "numeric, finite-depth"
    tree = compare_limits(fam("binary_tree", UNIT), 1.0, 8)
    assert tree.verdict in ("agree", "differ") and math.isfinite(tree.max_gap)
    strict = compare_limits(fam("grid_quadrant", UNIT), 1.0, 4, tol=1e-12)
    assert strict.verdict == "differ" and strict.edge is not None


def test_ladder_circulation_unit_values():
    lc = ladder_circulation(UNIT, 5)
    # hand recursion: u_k = u_{k-1} + a_k + b_k, a_{k+1} = a_k + u_k
    assert lc.rungs == (1.0, 3.0, 11.0, 41.0, 153.0, 571.0)
    assert lc.rails == (1.0, 4.0, 15.0, 56.0, 209.0)
    assert lc.next_rail == 780.0


def test_ladder_circulation_float_residuals_small_depth():
    lc = ladder_circulation(GEOM, 8)
    res = kirchhoff_residuals(lc.flow, lc.network)
    assert all(res.node[x] == 0.0 for x in lc.interior_vertices())
    assert res.max_cycle == 0.0


def test_ladder_circulation_exact_at_depth_30():
    lc = ladder_circulation(GEOM, 30)
    node, cyc = lc.exact_residuals()
    assert len(cyc) == 30 and len(node) == 60
    assert set(node.values()) == {Fraction(0)} and set(cyc.values()) == {Fraction(0)}
    w = lc.partial_energies
    assert all(a < b for a, b in zip(w, w[1:]))


def test_ladder_circulation_is_scale_invariant():
    a = ladder_circulation(GEOM, 10)
    b = ladder_circulation(ResistanceSchedule.geometric(3.0, 0.5), 10)
    assert dict(a.flow) == dict(b.flow)


def test_ladder_circulation_is_a_circulation_not_the_current():
    lc = ladder_circulation(GEOM, 6)
    # edges leaving through the outer rails carry next_rail, the rest balances
    assert lc.flow["rung0"] == 1.0
    assert lc.partial_energies[-1] == pytest.approx(energy(lc.flow, lc.network))
    with pytest.raises(ValueError):
        ladder_circulation(GEOM, 0)


@pytest.mark.parametrize("schedule", [GEOM, UNIT], ids=["geometric", "constant"])
def test_draynet_pathological_flow(schedule):
    f = fam("biinfinite_path", schedule)
    for n in (4, 8):
        net = f.truncation(n, 2.0)
        bad = draynet_pathological_flow(net)
        res = kirchhoff_residuals(bad, net)
        assert res.max_cycle == 0.0
        leaves = [x for x in net.graph.vertices if len(net.graph.incident(x)) == 1]
        assert all(res.node[x] != 0.0 for x in leaves)
        assert all(res.node[x] == 0.0 for x in net.graph.vertices if x not in leaves)
        for k in range(1, n):
            assert cut_flux(bad, net, net.graph.vertices[:k]) == -2.0


def test_pathological_energy_diverges_under_unit_resistances():
    f = fam("biinfinite_path", UNIT)
    ws = [energy(draynet_pathological_flow(f.truncation(n)), f.truncation(n)) for n in (5, 10, 20, 40)]
    assert ws == [9.0, 19.0, 39.0, 79.0]


def test_draynet_report():
    rep = draynet_report(GEOM, 6, 1.0)
    assert rep["pathological"]["cut_flux"] == -1.0
    assert rep["current"]["cut_flux"] == 0.0
    assert rep["cut"] == ["p-6", "p-5", "p-4"]
    with pytest.raises(ValueError):
        draynet_report(GEOM, 2)
