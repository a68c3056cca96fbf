"""Random walks on finite networks and their electrical counterparts.

The walk steps along an incident edge with probability proportional to
its conductance ``1/r``. The probability ``h(x)`` of reaching ``p``
before ``q`` is harmonic away from the terminals, which makes it the
potential of the current normalised to ``P(p) = 1, P(q) = 0``.

Monte Carlo trajectories draw their uniforms from independent SplitMix64
streams keyed by ``(seed, start vertex index, trial index)``. The value
used at step ``k`` depends only on that key and on ``k``, so estimates
do not depend on batching or on the order trajectories are simulated in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .generators import InfiniteFamily
from .netcore import Network, NetworkError
from .solver import solve_current

STEP_CAP = 10**6
DENSE_LIMIT = 500

# -- SplitMix64 -------------------------------------------------------------------

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_TWO53 = 1.0 / (1 << 53)


def _mix(z: np.ndarray) -> np.ndarray:
    """SplitMix64 output function (Steele, Lea and Flood), elementwise on uint64."""
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def stream_keys(seed: int, start: int, trials: np.ndarray) -> np.ndarray:
    """Initial SplitMix64 states for the trajectories ``trials`` from start vertex ``start``."""
    with np.errstate(over="ignore"):
        base = _mix(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))
        base = _mix(base ^ np.uint64(start))
        return _mix(base + trials.astype(np.uint64) * _GAMMA)


def uniforms(keys: np.ndarray, step: int) -> np.ndarray:
    """Element ``step`` (from 1) of each stream, as doubles in ``[0, 1)``."""
    with np.errstate(over="ignore"):
        z = _mix(keys + np.uint64(step) * _GAMMA)
    return (z >> _S11).astype(np.float64) * _TWO53


# -- transition structure -----------------------------------------------------------


class _Chain:
    """Conductance-weighted transitions of a network in CSR form."""

    def __init__(self, network: Network):
        g = network.graph
        self.vertices = list(g.vertices)
        self.index = {x: k for k, x in enumerate(self.vertices)}
        n = len(self.vertices)
        heads = []
        weights = []
        offsets = [0]
        for x in self.vertices:
            for eid in g.incident(x):  # sorted ids, so the layout is canonical
                e = g.edge(eid)
                heads.append(self.index[e.other(x)])
                weights.append(1.0 / e.r)
            offsets.append(len(heads))
        self.n = n
        self.heads = np.array(heads, dtype=np.int64)
        self.weights = np.array(weights, dtype=float)
        self.offsets = np.array(offsets, dtype=np.int64)
        self.cum = np.cumsum(self.weights)
        self.before = np.concatenate([[0.0], self.cum])[self.offsets[:-1]]
        self.rows = np.repeat(np.arange(n), np.diff(self.offsets))
        self.total = np.bincount(self.rows, weights=self.weights, minlength=n)

    def step(self, pos: np.ndarray, u: np.ndarray) -> np.ndarray:
        target = self.before[pos] + u * self.total[pos]
        slot = np.searchsorted(self.cum, target, side="right")
        slot = np.clip(slot, self.offsets[pos], self.offsets[pos + 1] - 1)
        return self.heads[slot]

    def matrix(self) -> scipy.sparse.csr_matrix:
        """Symmetric conductance matrix (parallel edges summed)."""
        return scipy.sparse.csr_matrix((self.weights, (self.rows, self.heads)), shape=(self.n, self.n))


def absorption_probabilities(network: Network, targets: Mapping[str, Iterable[str]]) -> dict[str, dict[str, float]]:
    """Probability that the walk from each vertex is first absorbed in each target set.

    ``targets`` maps labels to disjoint vertex sets. Rows of non-absorbing
    vertices read ``h(x) = sum_y c(x, y) h(y) / c(x)``. Vertices whose
    component contains no target get probability 0 everywhere.
    """
    chain = _Chain(network)
    label_of = {}
    for lab, xs in targets.items():
        for x in xs:
            if x not in chain.index:
                raise NetworkError(f"unknown vertex {x!r}")
            if x in label_of:
                raise ValueError(f"vertex {x!r} is in two target sets")
            label_of[x] = lab
    g = network.graph
    reachable = set()
    for x in label_of:
        if x not in reachable:
            reachable |= g.component(x)
    free = [k for k, x in enumerate(chain.vertices) if x in reachable and x not in label_of]
    fixed = {lab: np.zeros(chain.n) for lab in targets}
    for x, lab in label_of.items():
        fixed[lab][chain.index[x]] = 1.0

    out = {lab: fixed[lab].copy() for lab in targets}
    if free:
        c = chain.matrix()
        a = (scipy.sparse.diags(chain.total) - c).tocsr()[free][:, free]
        couple = c.tocsr()[free]
        rhs = np.column_stack([couple @ fixed[lab] for lab in targets])
        if len(free) <= DENSE_LIMIT:
            sol = scipy.linalg.solve(a.toarray(), rhs, assume_a="pos")
        else:
            sol = scipy.sparse.linalg.splu(a.tocsc()).solve(rhs)
        sol = np.asarray(sol).reshape(len(free), len(targets))
        for j, lab in enumerate(targets):
            out[lab][free] = sol[:, j]
    return {lab: {x: float(np.clip(v[k], 0.0, 1.0)) for k, x in enumerate(chain.vertices)} for lab, v in out.items()}


# -- hitting probabilities ----------------------------------------------------------


@dataclass(frozen=True)
class HittingReport:
    """Probability of reaching ``p`` before ``q`` from each vertex.

    ``estimate`` and ``stderr`` are present for Monte Carlo runs; the
    estimate averages over trajectories that stopped within the step cap,
    and ``capped`` counts the rest per start vertex.
    """

    exact: Mapping[str, float]
    deviation: float
    estimate: Mapping[str, float] | None = None
    stderr: Mapping[str, float] | None = None
    trials: int | None = None
    seed: int | None = None
    capped: Mapping[str, int] = field(default_factory=dict)
    step_cap: int = STEP_CAP

    def to_dict(self) -> dict:
        d = {"exact": dict(self.exact), "max_deviation_from_potential": self.deviation}
        if self.estimate is not None:
            d["monte_carlo"] = {
                "trials": self.trials,
                "seed": self.seed,
                "step_cap": self.step_cap,
                "estimate": dict(self.estimate),
                "stderr": dict(self.stderr),
                "capped": dict(self.capped),
            }
        return d


def _exact(network: Network) -> dict[str, float]:
    return absorption_probabilities(network, {"p": [network.p], "q": [network.q]})["p"]


def _deviation(network: Network, h: Mapping[str, float]) -> float:
    net = network if network.I != 0 else network.with_intensity(1.0)
    pots = solve_current(net).potentials
    top = pots[net.p]
    return max(abs(pots[x] / top - h[x]) for x in net.graph.vertices)


def hitting_exact(network: Network) -> HittingReport:
    """Harmonic solve with ``h(p) = 1``, ``h(q) = 0``."""
    h = _exact(network)
    return HittingReport(exact=h, deviation=_deviation(network, h))


def potential_vs_hitting(network: Network) -> float:
    """``max_x |P(x) - h(x)|`` for the potential normalised to ``P(p) = 1, P(q) = 0``."""
    return _deviation(network, _exact(network))


def _run_walks(
    chain: _Chain,
    absorb: np.ndarray,
    n_labels: int,
    start: int,
    trials: int,
    seed: int,
    step_cap: int,
) -> tuple[np.ndarray, int]:
    """Absorption counts per label for ``trials`` walks from ``start``, plus the capped count."""
    counts = np.zeros(n_labels, dtype=np.int64)
    if absorb[start] >= 0:
        counts[absorb[start]] = trials
        return counts, 0
    ids = np.arange(trials, dtype=np.int64)
    keys = stream_keys(seed, start, ids)
    pos = np.full(trials, start, dtype=np.int64)
    for k in range(1, step_cap + 1):
        pos = chain.step(pos, uniforms(keys, k))
        lab = absorb[pos]
        done = lab >= 0
        if done.any():
            counts += np.bincount(lab[done], minlength=n_labels)
            keep = ~done
            pos, keys = pos[keep], keys[keep]
            if pos.size == 0:
                break
    return counts, int(pos.size)


def hitting_mc(network: Network, trials: int, seed: int, step_cap: int = STEP_CAP) -> HittingReport:
    """Monte Carlo estimate of ``h`` from every vertex of the terminals' component.

    Vertices in other components never reach a terminal; they get
    estimate 0 and error 0 without simulation.
    """
    if isinstance(trials, bool) or not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ValueError("trials must be an integer >= 1")
    if step_cap < 1:
        raise ValueError("step_cap must be >= 1")
    chain = _Chain(network)
    absorb = np.full(chain.n, -1, dtype=np.int64)
    absorb[chain.index[network.p]] = 0
    absorb[chain.index[network.q]] = 1
    comp = network.graph.component(network.p)
    est, err, capped = {}, {}, {}
    for k, x in enumerate(chain.vertices):
        if x not in comp:
            est[x], err[x] = 0.0, 0.0
            continue
        counts, lost = _run_walks(chain, absorb, 2, k, int(trials), seed, step_cap)
        m = int(counts.sum())
        if lost:
            capped[x] = lost
        if m == 0:
            est[x], err[x] = math.nan, math.nan
            continue
        h = counts[0] / m
        est[x] = float(h)
        err[x] = math.sqrt(h * (1.0 - h) / m)
    h = _exact(network)
    return HittingReport(
        exact=h,
        deviation=_deviation(network, h),
        estimate=est,
        stderr=err,
        trials=int(trials),
        seed=seed,
        capped=capped,
        step_cap=step_cap,
    )


# -- escape on truncations ------------------------------------------------------------


def boundary_vertices(family: InfiniteFamily, n: int) -> list[str]:
    """Vertices of ``G_n`` with an edge leaving ``G_n``."""
    inside = set(family.vertices_upto(n))
    out = set()
    for specs in family.frontier(n).values():
        for s in specs:
            out.update(x for x in (s.u, s.v) if x in inside)
    return sorted(out)


def escape_fractions(
    family: InfiniteFamily,
    start: str,
    depths: Iterable[int],
    trials: int = 10_000,
    seed: int = 0,
    step_cap: int = STEP_CAP,
) -> list[dict]:
    """Walks from ``start`` on free truncations, absorbed at p, q or the truncation boundary.

    A share of walks that reaches the boundary first and stays bounded
    away from 0 as the depth grows is finite-depth evidence that the walk
    on the infinite graph can avoid both terminals forever. Each row holds
    the exact absorption probabilities and the Monte Carlo fractions.
    """
    if trials < 1:
        raise ValueError("trials must be an integer >= 1")
    rows = []
    for n in depths:
        net = family.truncation(n, 1.0)
        if not net.graph.has_vertex(start):
            raise ValueError(f"start vertex {start!r} is not in G_{n}")
        bd = [x for x in boundary_vertices(family, n) if x not in (net.p, net.q)]
        sets = {"p": [net.p], "q": [net.q], "boundary": bd}
        exact = absorption_probabilities(net, sets)
        chain = _Chain(net)
        absorb = np.full(chain.n, -1, dtype=np.int64)
        for j, lab in enumerate(sets):
            for x in sets[lab]:
                absorb[chain.index[x]] = j
        counts, lost = _run_walks(chain, absorb, 3, chain.index[start], trials, seed, step_cap)
        m = max(int(counts.sum()), 1)
        rows.append(
            {
                "level": n,
                "exact": {lab: exact[lab][start] for lab in sets},
                "fraction": {lab: int(c) / m for lab, c in zip(sets, counts)},
                "trials": trials,
                "capped": lost,
                "label": "finite-depth evidence",
            }
        )
    return rows
