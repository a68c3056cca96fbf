import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kirchnet.analysis import kirchhoff_residuals
from kirchnet.cycles import fundamental_cycles, spanning_forest
from kirchnet.generators import ResistanceSchedule, make_family, random_network
from kirchnet.netcore import Edge, Flow, Multigraph, build_network
from kirchnet.solver import (
    SolverError,
    conjugate_gradient,
    effective_resistance,
    minimize_energy,
    solve_current,
)

from conftest import net_from


def kkt_oracle(net):
    """Minimum-energy flow from the saddle-point system [R B^T; B 0] = [0; d], solved densely."""
    g = net.graph
    verts = list(g.vertices)
    vi = {x: k for k, x in enumerate(verts)}
    m, n = len(g.edges), len(verts)
    B = np.zeros((n, m))
    for j, e in enumerate(g.edges):
        B[vi[e.u], j] += 1.0
        B[vi[e.v], j] -= 1.0
    d = np.array([net.demand(x) for x in verts])
    # one node row is redundant; drop q's
    keep = [k for k in range(n) if verts[k] != net.q]
    B, d = B[keep], d[keep]
    K = np.block([[np.diag([e.r for e in g.edges]), B.T], [B, np.zeros((len(keep), len(keep)))]])
    sol = np.linalg.solve(K, np.concatenate([np.zeros(m), d]))
    return dict(zip(g.edge_ids(), sol[:m]))


def test_single_edge():
    net = net_from([("e", "p", "q", 2.0)], I=3.0)
    rep = solve_current(net)
    assert rep.flow["e"] == pytest.approx(3.0, abs=1e-14)
    assert rep.potentials == {"p": pytest.approx(6.0), "q": 0.0}
    me = minimize_energy(net)
    assert me.iterations == 0 and me.flow["e"] == 3.0


def test_parallel_fixture(parallel):
    rep = solve_current(parallel)
    assert abs(rep.flow["e1"] - 3.0) <= 1e-12
    assert abs(rep.flow["e2"] - 1.0) <= 1e-12
    assert abs(rep.potentials["p"] - 3.0) <= 1e-12
    assert abs(rep.energy - 12.0) <= 1e-12
    assert abs(minimize_energy(parallel).energy - 12.0) <= 1e-12
    assert abs(effective_resistance(parallel) - 0.75) <= 1e-12


def test_parallel_brute_force_oracle(parallel):
    # the feasible flows are (t, 4 - t); scan W(t) = t^2 + 3 (4 - t)^2
    t = np.linspace(0.0, 4.0, 400001)
    w = t**2 + 3.0 * (4.0 - t) ** 2
    best = t[np.argmin(w)]
    assert abs(solve_current(parallel).flow["e1"] - best) <= 1e-5


def test_effective_resistance_series_and_single():
    assert effective_resistance(net_from([("e", "p", "q", 5.0)])) == pytest.approx(5.0, abs=1e-12)
    series = net_from([("a", "p", "x", 1.0), ("b", "x", "q", 3.0)])
    assert effective_resistance(series) == pytest.approx(4.0, abs=1e-12)
    with pytest.raises(ValueError):
        effective_resistance(series.with_intensity(0.0))


@pytest.mark.parametrize("n", [1, 3, 7])
def test_draynet_truncation_current_is_on_pq(n):
    net = make_family("biinfinite_path", None, ResistanceSchedule.geometric(1, 0.5)).truncation(n)
    flow = solve_current(net).flow
    assert flow["pq"] == 1.0
    assert all(v == 0.0 for e, v in flow.items() if e != "pq")


def test_matches_kkt_oracle(rng):
    for _ in range(20):
        net = random_network(rng, 12, 20)
        ref = kkt_oracle(net)
        for rep in (solve_current(net), minimize_energy(net)):
            assert max(abs(rep.flow[e] - ref[e]) for e in ref) <= 1e-9


def test_cross_solver_random_12_20(rng):
    net = random_network(rng, 12, 20, I=2.5)
    a, b = solve_current(net), minimize_energy(net)
    assert a.flow.max_abs_diff(b.flow) <= 1e-8
    assert a.method == "potential-dense" and b.method == "energy-cg"
    for x in net.graph.vertices:
        assert abs(a.potentials[x] - b.potentials[x]) <= 1e-8


def test_residuals_meet_tolerance(rng):
    for I in (1.0, 50.0, -3.0):
        net = random_network(rng, 25, 50, I=I)
        rep = solve_current(net, tol=1e-10)
        res = kirchhoff_residuals(rep.flow, net)
        assert rep.residual <= 1e-10 * max(1, abs(I))
        assert res.max_node <= 1e-10 * max(1, abs(I))
        assert res.max_cycle <= 1e-9
        assert rep.potentials[net.q] == 0.0


def test_wide_resistance_range_stays_accurate():
    rng = np.random.default_rng(5)
    net = random_network(rng, 30, 60)
    g = net.graph
    scales = 2.0 ** rng.integers(-30, 1, size=len(g.edges))
    wide = build_network(Multigraph(g.vertices, [Edge(e.id, e.u, e.v, e.r * s) for e, s in zip(g.edges, scales)]), net.p, net.q, 1.0)
    res = kirchhoff_residuals(solve_current(wide).flow, wide)
    assert res.max_node <= 1e-10


def test_iterative_path_on_large_network():
    f = make_family("grid_quadrant", None, ResistanceSchedule.constant(1.0))
    net = f.truncation(35)
    assert len(net.graph.vertices) > 500
    rep = solve_current(net)
    assert rep.method == "potential-pcg"
    assert kirchhoff_residuals(rep.flow, net).max_node <= 1e-10
    small = rep.flow.restrict(f.truncation(2).graph.edge_ids())
    dense = solve_current(f.truncation(35), tol=1e-12)
    assert small.max_abs_diff(dense.flow.restrict(small)) <= 1e-9


def test_conjugate_gradient_budget():
    a = np.diag([1.0, 10.0, 100.0, 1000.0]) + 0.1
    with pytest.raises(SolverError):
        conjugate_gradient(lambda v: a @ v, np.ones(4), np.ones(4), 1e-14, 1)
    x, k, rel = conjugate_gradient(lambda v: a @ v, np.ones(4), np.diag(a).copy(), 1e-12, 50)
    assert rel <= 1e-12
    assert np.allclose(a @ x, 1.0)


def test_minimize_energy_budget(rng):
    net = random_network(rng, 20, 40)
    with pytest.raises(SolverError):
        minimize_energy(net, max_iter=1)


def test_component_without_terminals_gets_zero():
    g = Multigraph(["p", "q", "a", "b"], [Edge("e1", "p", "q", 1.0), Edge("e2", "a", "b", 1.0)])
    net = build_network(g, "p", "q", 1.0)
    rep = solve_current(net)
    assert rep.flow["e2"] == 0.0 and rep.potentials["a"] == 0.0
    assert minimize_energy(net).flow["e2"] == 0.0


def test_energy_strictly_increases_off_the_current(rng):
    for _ in range(10):
        net = random_network(rng, 10, 18)
        rep = solve_current(net)
        g = net.graph
        base = rep.energy
        for cyc in fundamental_cycles(g, spanning_forest(g, net.p)).values():
            for eps in (1e-3, -1e-3):
                vals = dict(rep.flow.items())
                for oe in cyc:
                    vals[oe.edge_id] += eps * oe.sign
                w = sum(Flow(vals)[e.id] ** 2 * e.r for e in g.edges)
                assert w > base


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_parallel_edge_never_raises_resistance(seed, r_new):
    rng = np.random.default_rng(seed)
    net = random_network(rng, 8, 12)
    g = net.graph
    verts = g.vertices
    a, b = (verts[int(k)] for k in rng.choice(len(verts), 2, replace=False))
    more = build_network(Multigraph(verts, list(g.edges) + [Edge("extra", a, b, r_new)]), net.p, net.q, net.I)
    assert effective_resistance(more) <= effective_resistance(net) * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 15), st.integers(0, 15))
def test_cross_solver_property(seed, n, extra):
    net = random_network(np.random.default_rng(seed), n, n - 1 + extra)
    a, b = solve_current(net), minimize_energy(net)
    assert a.flow.max_abs_diff(b.flow) <= 1e-8 * max(1, abs(net.I))
