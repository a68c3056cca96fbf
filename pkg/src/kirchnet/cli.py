"""Command-line entry point.

Exit codes: 0 success, 2 invalid input or arguments, 3 numeric failure.
JSON floats are written with ``repr`` (shortest round-trip form, so no
information is lost); CSV output rounds to 12 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import analysis, limits, walk
from .generators import ResistanceSchedule, family_from_dict, make_family
from .netcore import NetworkError, flow_from_dict, network_from_dict
from .solver import DEFAULT_TOL, SolverError, solve_current

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(Exception):
    """Bad arguments or input files; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Path | None = None
    family: str | None = None
    schedule: str | None = None
    output: Path | None = None
    tol: float = DEFAULT_TOL
    n_max: int = 10
    mode: str = "contracted"
    compare: bool = False
    trials: int | None = None
    seed: int = 0
    format: str = "json"
    flow: Path | None = None
    which: str | None = None
    n: int | None = None
    intensity: float = 1.0

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError("--tol must be positive")
        if self.command == "exhaust" and (self.input is None) == (self.family is None):
            raise InputError("give exactly one of --input (family spec file) and --family")
        if self.command in ("solve", "walk", "verify") and self.input is None:
            raise InputError(f"{self.command}: --input is required")
        if self.command in ("solve", "walk", "verify") and self.family is not None:
            raise InputError(f"{self.command}: --family is not accepted; the input is a network file")


# -- helpers -------------------------------------------------------------------------


def _read_json(path: Path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _load_network(path: Path):
    try:
        return network_from_dict(_read_json(path))
    except NetworkError as exc:
        raise InputError(f"{path}: {exc}") from None


def _schedule(cfg: RunConfig, default: str) -> ResistanceSchedule:
    try:
        return ResistanceSchedule.parse(cfg.schedule or default)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"--schedule: {exc}") from None


def _clean(obj):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        try:
            Path(cfg.output).write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write {cfg.output}: {exc.strerror}") from None


# -- commands --------------------------------------------------------------------------


def cmd_solve(cfg: RunConfig) -> int:
    net = _load_network(cfg.input)
    rep = solve_current(net, cfg.tol)
    res = analysis.kirchhoff_residuals(rep.flow, net)
    g = net.graph
    if cfg.format == "csv":
        rows = [(e.id, rep.flow[e.id], rep.flow[e.id] * e.r) for e in g.edges]
        _emit(cfg, _csv(["edge", "flow", "voltage_drop"], rows))
        return EXIT_OK
    out = {
        "p": net.p,
        "q": net.q,
        "I": net.I,
        "method": rep.method,
        "iterations": rep.iterations,
        "flows": dict(rep.flow.items()),
        "voltage_drops": {e.id: rep.flow[e.id] * e.r for e in g.edges},
        "potentials": dict(rep.potentials),
        "energy": rep.energy,
        "effective_resistance": rep.energy / net.I**2 if net.I else None,
        "residuals": res.to_dict(),
    }
    _emit(cfg, _json(out))
    return EXIT_OK


def _family(cfg: RunConfig):
    try:
        if cfg.input is not None:
            spec = _read_json(cfg.input)
            if cfg.schedule:
                spec = dict(spec, schedule=_schedule(cfg, "").to_dict())
            return family_from_dict(spec)
        return make_family(cfg.family, None, _schedule(cfg, "constant:1"))
    except (ValueError, NetworkError) as exc:
        raise InputError(str(exc)) from None


def cmd_exhaust(cfg: RunConfig) -> int:
    fam = _family(cfg)
    if cfg.n_max < 2:
        raise InputError("n_max must be ≥ 2")
    if cfg.mode not in limits.MODES:
        raise InputError(f"--mode must be one of {', '.join(limits.MODES)}")
    if cfg.compare:
        cmp = limits.compare_limits(fam, cfg.intensity, cfg.n_max)
        if cfg.format == "csv":
            _emit(cfg, _csv(["key", "value"], list(cmp.to_dict().items())))
        else:
            _emit(cfg, _json({"family": fam.describe(), "I": cfg.intensity, "comparison": cmp.to_dict()}))
        return EXIT_OK
    rep = limits.run_exhaustion(fam, cfg.intensity, cfg.n_max, cfg.mode, cfg.tol)
    _emit(cfg, rep.to_csv() if cfg.format == "csv" else _json(rep.to_dict()))
    return EXIT_OK


def cmd_walk(cfg: RunConfig) -> int:
    net = _load_network(cfg.input)
    if cfg.trials is None:
        rep = walk.hitting_exact(net)
    else:
        if cfg.trials < 1:
            raise InputError("--trials must be >= 1")
        rep = walk.hitting_mc(net, cfg.trials, cfg.seed)
    if cfg.format == "csv":
        rows = []
        for x in net.graph.vertices:
            est = "" if rep.estimate is None else rep.estimate[x]
            err = "" if rep.stderr is None else rep.stderr[x]
            rows.append((x, rep.exact[x], est, err))
        _emit(cfg, _csv(["vertex", "exact", "estimate", "stderr"], rows))
    else:
        _emit(cfg, _json(rep.to_dict()))
    return EXIT_OK


def cmd_counterexample(cfg: RunConfig) -> int:
    if cfg.which == "ladder":
        n = 10 if cfg.n is None else cfg.n
        if n < 1:
            raise InputError("--n must be >= 1")
        lc = limits.ladder_circulation(_schedule(cfg, "constant:1"), n)
        if cfg.format == "csv":
            rows = []
            for k in range(n + 1):
                rail = lc.rails[k - 1] if k else ""
                w = lc.partial_energies[k - 1] if k else ""
                rows.append((k, lc.rungs[k], rail, w))
            _emit(cfg, _csv(["level", "rung", "rail", "partial_energy"], rows))
            return EXIT_OK
        res, cyc = lc.exact_residuals()
        out = lc.to_dict()
        out["max_interior_node_residual"] = float(max((abs(v) for v in res.values()), default=0))
        out["max_square_residual"] = float(max((abs(v) for v in cyc.values()), default=0))
        out["partial_energies_increasing"] = all(
            a < b for a, b in zip(lc.partial_energies, lc.partial_energies[1:])
        )
        _emit(cfg, _json(out))
        return EXIT_OK
    n = 6 if cfg.n is None else cfg.n
    if n < 3:
        raise InputError("--n must be >= 3 for the draynet demonstration")
    rep = limits.draynet_report(_schedule(cfg, "geometric:1,1/2"), n, cfg.intensity)
    if cfg.format == "csv":
        bad, cur = rep["pathological"]["flows"], rep["current"]["flows"]
        _emit(cfg, _csv(["edge", "pathological", "current"], [(e, bad[e], cur[e]) for e in bad]))
    else:
        _emit(cfg, _json(rep))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    net = _load_network(cfg.input)
    if cfg.flow is None:
        raise InputError("verify: --flow is required")
    try:
        flow = flow_from_dict(_read_json(cfg.flow), net.graph)
    except NetworkError as exc:
        raise InputError(f"{cfg.flow}: {exc}") from None
    res = analysis.kirchhoff_residuals(flow, net)
    if cfg.format == "csv":
        rows = [("node", x, v) for x, v in res.node.items()] + [("cycle", c, v) for c, v in res.cycle.items()]
        _emit(cfg, _csv(["kind", "id", "residual"], rows))
        return EXIT_OK
    out = res.to_dict()
    out["energy"] = analysis.energy(flow, net)
    out["tol"] = cfg.tol
    out["kirchhoff_ok"] = res.max_node <= cfg.tol * max(1.0, abs(net.I)) and res.max_cycle <= cfg.tol
    _emit(cfg, _json(out))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "exhaust": cmd_exhaust,
    "walk": cmd_walk,
    "counterexample": cmd_counterexample,
    "verify": cmd_verify,
}


# -- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kirchnet", description="Currents in finite and infinite resistor networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, input_help="network JSON file"):
        p.add_argument("--input", type=Path, help=input_help)
        p.add_argument("--output", type=Path, help="write here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="solver tolerance (default %(default)g)")

    common(sub.add_parser("solve", help="current of a finite network"))

    p = sub.add_parser("exhaust", help="currents along an exhaustion of an infinite family")
    common(p, "family spec JSON file")
    p.add_argument("--family", help="family name (biinfinite_path, ladder, binary_tree, grid_quadrant, single_ray)")
    p.add_argument("--schedule", help="resistance schedule, e.g. geometric:1,1/2 or 1/power:1,2")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--mode", default="contracted", help="free or contracted")
    p.add_argument("--compare", action="store_true", help="compare free and contracted limits")
    p.add_argument("--intensity", type=float, default=1.0)

    p = sub.add_parser("walk", help="hitting probabilities, exact and Monte Carlo")
    common(p)
    p.add_argument("--trials", type=int, help="Monte Carlo trajectories per start vertex")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("counterexample", help="the draynet and ladder demonstrations")
    p.add_argument("which", choices=("draynet", "ladder"))
    p.add_argument("--schedule")
    p.add_argument("--n", type=int, help="depth (default 6 for draynet, 10 for ladder)")
    p.add_argument("--intensity", type=float, default=1.0)
    p.add_argument("--output", type=Path)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("verify", help="Kirchhoff residuals of a flow file against a network file")
    common(p)
    p.add_argument("--flow", type=Path, help='flow JSON, {"flows": {edge id: value}}')
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in fields})


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"kirchnet: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"kirchnet: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, NetworkError) as exc:
        print(f"kirchnet: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"kirchnet: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
