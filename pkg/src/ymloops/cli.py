"""Command-line front end.

Every run prints one JSON report on stdout (``sweep`` prints CSV instead);
progress and errors go to stderr.  Exit status: 0 when all checks pass, 1 when
a numeric check fails, 2 for bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import (
    GridTooCoarse,
    InconsistentSystem,
    NonConvergent,
    ParseError,
    SemanticError,
    TriangularSolveFailed,
    YMError,
)
from .group_core import GroupSpec, haar_unitary
from .master_field import master_value, mc_oracle
from .mm_verify import (
    extended_gauge_check,
    grad_dot_edges_fd,
    local_mm_u1_residual,
    mm_residuals,
    two_loop_residual,
)
from .planar_map import LoopWord, PlanarMap, build_map, crossing_frames, crossing_report
from .ym_measure import apply_gauge, holonomy, wilson_estimate

NUMERIC_ERRORS = (InconsistentSystem, NonConvergent, GridTooCoarse, TriangularSolveFailed)

TOP_KEYS = {"vertices", "edges", "unbounded_marker", "areas", "loops"}


# ---------------------------------------------------------------------------
# graph files

def _fail(msg):
    raise ParseError(msg)


def _int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(f"{where}: expected an integer, got {value!r}")
    return value


def _keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        _fail(f"{where}: expected an object")
    extra = set(obj) - allowed
    if extra:
        _fail(f"{where}: unknown keys {sorted(extra)}")
    missing = required - set(obj)
    if missing:
        _fail(f"{where}: missing keys {sorted(missing)}")


def parse_face_key(key: str) -> int:
    text = key[1:] if key[:1] in ("F", "f") else key
    if not text.isdigit():
        raise SemanticError(f"area key {key!r} is not a face id like 'F3' or '3'")
    return int(text)


def parse_graph_text(text: str, source: str = "<string>"):
    """Parse graph JSON into ``(map, areas, loops)``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    _keys(data, TOP_KEYS, {"vertices", "edges", "unbounded_marker"}, source)
    if not isinstance(data["vertices"], list) or not isinstance(data["edges"], list):
        _fail(f"{source}: 'vertices' and 'edges' must be lists")
    vertices, edges = {}, {}
    for i, v in enumerate(data["vertices"]):
        where = f"{source}: vertices[{i}]"
        _keys(v, {"id", "rotation"}, {"id", "rotation"}, where)
        vid = _int(v["id"], where + ".id")
        if not isinstance(v["rotation"], list):
            _fail(where + ".rotation: expected a list")
        if vid in vertices:
            raise SemanticError(f"{where}: duplicate vertex id {vid}")
        vertices[vid] = [_int(h, where + ".rotation") for h in v["rotation"]]
    for i, e in enumerate(data["edges"]):
        where = f"{source}: edges[{i}]"
        _keys(e, {"id", "half_edges"}, {"id", "half_edges"}, where)
        eid = _int(e["id"], where + ".id")
        halves = e["half_edges"]
        if not isinstance(halves, list) or len(halves) != 2:
            _fail(where + ".half_edges: expected a list of two half-edge ids")
        if eid in edges:
            raise SemanticError(f"{where}: duplicate edge id {eid}")
        edges[eid] = [_int(h, where + ".half_edges") for h in halves]
    marker = _int(data["unbounded_marker"], f"{source}: unbounded_marker")
    try:
        pm = build_map(vertices, edges, marker)
    except YMError as exc:
        raise SemanticError(f"{type(exc).__name__}: {exc}") from exc

    areas = {f: 1.0 for f in pm.bounded_faces}
    raw_areas = data.get("areas", {})
    if not isinstance(raw_areas, dict):
        _fail(f"{source}: 'areas' must be an object")
    for key, value in raw_areas.items():
        f = parse_face_key(key)
        if f not in areas:
            raise SemanticError(f"area given for {key!r}, which is not a bounded face")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
            raise SemanticError(f"area of {key!r} must be a nonnegative number")
        areas[f] = float(value)

    loops = {}
    raw_loops = data.get("loops", {})
    if not isinstance(raw_loops, dict):
        _fail(f"{source}: 'loops' must be an object")
    for name, steps in raw_loops.items():
        if not isinstance(steps, list):
            _fail(f"{source}: loop {name!r} must be a list of signed edge ids")
        steps = [_int(s, f"{source}: loop {name!r}") for s in steps]
        try:
            loops[name] = pm.loop_from_steps(steps)
        except YMError as exc:
            raise SemanticError(f"loop {name!r}: {type(exc).__name__}: {exc}") from exc
    return pm, areas, loops


def bundled_graphs() -> list[str]:
    return sorted(p.name for p in resources.files("ymloops").joinpath("data").iterdir()
                  if p.name.endswith(".json"))


def resolve_graph(path: str) -> tuple[str, str]:
    """Text and display name of a graph file, falling back to the bundled ones."""
    p = Path(path)
    if p.exists():
        return p.read_text(), str(p)
    name = p.name if p.name.endswith(".json") else p.name + ".json"
    bundled = resources.files("ymloops").joinpath("data", name)
    if bundled.is_file():
        return bundled.read_text(), f"bundled:{name}"
    raise ParseError(f"{path}: no such file (bundled graphs: {', '.join(bundled_graphs())})")


def parse_graph_file(path: str):
    text, source = resolve_graph(path)
    return parse_graph_text(text, source)


def graph_to_dict(pm: PlanarMap, areas, loops) -> dict:
    """Canonical file form of a map with areas and named loops."""
    return {
        "vertices": [{"id": v, "rotation": list(rot)} for v, rot in pm.rotations],
        "edges": [{"id": k, "half_edges": list(pair)} for k, pair in pm.edges],
        "unbounded_marker": min(pm.faces[pm.unbounded_face]),
        "areas": {f"F{f}": float(areas[f]) for f in sorted(areas)},
        "loops": {name: list(loop.steps) for name, loop in sorted(loops.items())},
    }


def dump_graph(pm: PlanarMap, areas, loops) -> str:
    """:func:`graph_to_dict` as JSON with one vertex, edge or loop per line."""
    data = graph_to_dict(pm, areas, loops)
    lines = ["{"]
    for key in ("vertices", "edges"):
        items = [json.dumps(item) for item in data[key]]
        lines.append(f' "{key}": [')
        lines.extend(f"  {item}," for item in items[:-1])
        lines.append(f"  {items[-1]}")
        lines.append(" ],")
    lines.append(f' "unbounded_marker": {data["unbounded_marker"]},')
    lines.append(f' "areas": {json.dumps(data["areas"])},')
    loop_items = [f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in data["loops"].items()]
    lines.append(' "loops": {' + ("\n" + ",\n".join(loop_items) + "\n }" if loop_items else "}"))
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands

def _apply_overrides(pm, areas, overrides):
    areas = dict(areas)
    for item in overrides or []:
        if "=" not in item:
            raise SemanticError(f"area override {item!r} must look like F3=0.7")
        key, value = item.split("=", 1)
        f = parse_face_key(key.strip())
        if f not in areas:
            raise SemanticError(f"area override for {key!r}, which is not a bounded face")
        try:
            areas[f] = float(value)
        except ValueError:
            raise SemanticError(f"area override {item!r} has a non-numeric value")
        if areas[f] < 0:
            raise SemanticError(f"area override {item!r} is negative")
    return areas


def _select_loops(loops, names):
    if not loops:
        raise SemanticError("the graph file defines no loops")
    if not names:
        return dict(loops)
    missing = [n for n in names if n not in loops]
    if missing:
        raise SemanticError(f"unknown loop names {missing}; file has {sorted(loops)}")
    return {n: loops[n] for n in names}


def _load(args):
    pm, areas, loops = parse_graph_file(args.graph)
    areas = _apply_overrides(pm, areas, getattr(args, "areas", None))
    return pm, areas, loops


def _inputs(args, areas=None):
    out = {k: v for k, v in vars(args).items() if k not in ("func",)}
    if areas is not None:
        out["face_areas"] = {f"F{f}": a for f, a in sorted(areas.items())}
    return out


def cmd_validate(args):
    pm, areas, loops = _load(args)
    checks = {
        "euler": pm.euler_characteristic() == 2,
        "faces_partition": sorted(h for c in pm.faces for h in c) == pm.half_edges,
        "areas_nonnegative": all(a >= 0 for a in areas.values()),
    }
    loop_info = {}
    for name, loop in loops.items():
        rep = crossing_report(pm, loop)
        loop_info[name] = {"length": len(loop), "base": loop.base,
                           "crossings": [fr.vertex for fr in rep.frames],
                           "rejected": [{"vertex": v, "reason": r} for v, r in rep.rejected]}
    results = {"vertices": len(pm.vertices), "edges": len(pm.edges), "faces": len(pm.faces),
               "unbounded_face": pm.unbounded_face, "checks": checks, "loops": loop_info,
               "passed": all(checks.values())}
    return results, areas


def cmd_expect(args):
    pm, areas, loops = _load(args)
    chosen = _select_loops(loops, args.loop)
    est = wilson_estimate(pm, areas, list(chosen.values()), GroupSpec(args.group_size),
                          args.samples, seed=args.seed, shards=args.shards,
                          steps=args.rw_steps)
    passed = abs(est.imag) <= 4 * est.imag_stderr + 1e-12
    return {"loops": list(chosen), "estimate": est.value, "stderr": est.stderr,
            "imag": est.imag, "imag_stderr": est.imag_stderr, "samples": est.samples,
            "passed": passed}, areas


def cmd_master(args):
    pm, areas, loops = _load(args)
    chosen = _select_loops(loops, args.loop)
    out = {}
    passed = True
    for name, loop in chosen.items():
        res = master_value(pm, loop, areas)
        entry = {"value": res.real, "imag": float(res.value.imag), "imag_flag": res.imag_flag,
                 "derivative": {f"F{f}": float(np.real(d)) for f, d in res.derivative.items()},
                 "depth": res.depth, "memo": res.memo, "diagnostics": res.diagnostics}
        if args.mc_check:
            est = mc_oracle(pm, loop, areas, N=args.mc_group_size, samples=args.mc_samples,
                            seed=args.seed)
            tol = 3 * (est.stderr + 0.02)
            ok = abs(est.value - res.real) <= tol
            entry["mc"] = {"estimate": est.value, "stderr": est.stderr,
                           "group_size": args.mc_group_size, "tolerance": tol, "passed": ok}
            passed = passed and ok
        out[name] = entry
    return {"loops": out, "passed": passed}, areas


def cmd_mm_check(args):
    pm, areas, loops = _load(args)
    chosen = _select_loops(loops, args.loop)
    spec = GroupSpec(args.group_size)
    out = {}
    passed = True
    for name, loop in chosen.items():
        frames = crossing_frames(pm, loop)
        reports = mm_residuals(pm, areas, loop, frames, spec, args.samples, h=args.fd_step,
                               seed=args.seed, shards=args.shards, steps=args.rw_steps) \
            if frames else []
        out[name] = [dict(vertex=fr.vertex, **rep.as_dict()) for fr, rep in zip(frames, reports)]
        passed = passed and all(r.passed for r in reports)
    results = {"loops": out}
    if args.two_loop:
        first, second = (chosen[n] for n in args.two_loop)
        rep = two_loop_residual(pm, areas, first, second, spec, args.samples, h=args.fd_step,
                                seed=args.seed, shards=args.shards, steps=args.rw_steps)
        results["two_loop"] = dict(loops=list(args.two_loop), **rep.as_dict())
        passed = passed and rep.passed
    results["passed"] = passed
    return results, areas


def cmd_gauge_check(args):
    pm, areas, loops = _load(args)
    chosen = _select_loops(loops, args.loop)
    spec = GroupSpec(args.group_size)
    rng = np.random.default_rng(args.seed)
    out = {}
    passed = True
    for name, loop in chosen.items():
        def f(config, steps=loop.steps):
            return np.trace(holonomy(steps, config)) / spec.N

        worst = 0.0
        grad_worst = 0.0
        frames = crossing_frames(pm, loop)
        for trial in range(args.trials):
            config = {k: haar_unitary(spec, rng) for k in pm.edge_ids}
            gauge = {v: haar_unitary(spec, rng) for v in pm.vertices}
            moved = apply_gauge(config, gauge, pm)
            worst = max(worst, abs(f(moved) - f(config)))
            if frames and trial < args.gradient_trials:
                fr = frames[0]
                a = grad_dot_edges_fd(pm, f, config, fr, spec)
                b = grad_dot_edges_fd(pm, f, moved, fr, spec)
                grad_worst = max(grad_worst, abs(a - b))
        extended = {str(fr.vertex): extended_gauge_check(pm, f, fr, spec, args.trials, rng)
                    for fr in frames}
        ok = worst <= 1e-12 * max(1, spec.N) * 10 and grad_worst <= 1e-6 \
            and all(d <= 1e-10 for d in extended.values())
        out[name] = {"gauge_deviation": worst, "gradient_deviation": grad_worst,
                     "extended_deviation": extended, "passed": ok}
        passed = passed and ok
    return {"loops": out, "passed": passed}, areas


LOCAL_FUNCTIONS = {
    "cos-sum": lambda a, b, c, d: np.cos(a - c + b - d),
    "cos-double": lambda a, b, c, d: np.cos(2 * (a - c)),
    "mixed": lambda a, b, c, d: np.cos(a - c) * np.cos(2 * (b - d)) + np.sin(a - c + b - d),
    "harmonic-21": lambda a, b, c, d: np.cos(2 * (a - c) + (b - d)),
}


def cmd_local_mm(args):
    rng = np.random.default_rng(args.seed)
    alphas = args.alpha if args.alpha else list(rng.uniform(-np.pi, np.pi, 4))
    times = args.times if args.times else list(rng.uniform(0.5, 2.0, 4))
    if len(alphas) != 4 or len(times) != 4:
        raise SemanticError("--alpha and --times need four values each")
    if any(t <= 0 for t in times):
        raise SemanticError("--times must be positive")
    names = args.function or sorted(LOCAL_FUNCTIONS)
    out = {}
    passed = True
    for name in names:
        if name not in LOCAL_FUNCTIONS:
            raise SemanticError(f"unknown test function {name!r}; choose from {sorted(LOCAL_FUNCTIONS)}")
        res = local_mm_u1_residual(LOCAL_FUNCTIONS[name], alphas, times, n=args.grid)
        ok = res.residual < args.tolerance
        out[name] = {"lhs": res.lhs, "rhs": res.rhs, "residual": res.residual,
                     "refined_residual": res.refined_residual, "passed": ok}
        passed = passed and ok
    return {"alpha": [float(a) for a in alphas], "times": [float(t) for t in times],
            "grid": args.grid, "functions": out, "passed": passed}, None


def _parse_vary(items, areas):
    axes = []
    for item in items:
        if "=" not in item:
            raise SemanticError(f"--vary {item!r} must look like F1=0.5,1,2")
        key, values = item.split("=", 1)
        f = parse_face_key(key.strip())
        if f not in areas:
            raise SemanticError(f"--vary names {key!r}, which is not a bounded face")
        try:
            axes.append((f, [float(v) for v in values.split(",") if v.strip()]))
        except ValueError:
            raise SemanticError(f"--vary {item!r} has a non-numeric value")
    return axes


def cmd_sweep(args):
    pm, areas, loops = _load(args)
    chosen = _select_loops(loops, args.loop)
    axes = _parse_vary(args.vary or [], areas)
    spec = GroupSpec(args.group_size)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    face_cols = [f"F{f}" for f in sorted(areas)]
    if args.method == "master":
        writer.writerow(face_cols + [f"{n}" for n in chosen])
    else:
        writer.writerow(face_cols + ["estimate", "stderr"])
    for combo in itertools.product(*[vals for _, vals in axes]):
        point = dict(areas)
        for (f, _), value in zip(axes, combo):
            point[f] = value
        row = [point[f] for f in sorted(point)]
        if args.method == "master":
            row += [master_value(pm, loop, point).real for loop in chosen.values()]
        else:
            est = wilson_estimate(pm, point, list(chosen.values()), spec, args.samples,
                                  seed=args.seed, shards=args.shards, steps=args.rw_steps)
            row += [est.value, est.stderr]
        writer.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ymloops", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mc=True):
        p.add_argument("--graph", required=True, help="graph file, or the name of a bundled one")
        p.add_argument("--loop", action="append", help="loop name (repeatable)")
        p.add_argument("--areas", action="append", metavar="F3=0.7",
                       help="override a face area (repeatable)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", help="write the report here instead of stdout")
        if mc:
            p.add_argument("--group-size", type=int, default=2)
            p.add_argument("--samples", type=int, default=10000)
            p.add_argument("--rw-steps", type=int, default=None,
                           help="random-walk steps per heat sample (default max(8, 64t))")
            p.add_argument("--shards", type=int, default=1)

    p = sub.add_parser("validate", help="check a graph file and report its crossings")
    common(p, mc=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("expect", help="Monte Carlo Wilson loop estimate")
    common(p)
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("master", help="large-N value by the crossing recursion")
    common(p, mc=False)
    p.add_argument("--mc-check", action="store_true", help="compare with a large-N Monte Carlo")
    p.add_argument("--mc-samples", type=int, default=4)
    p.add_argument("--mc-group-size", type=int, default=512)
    p.set_defaults(func=cmd_master)

    p = sub.add_parser("mm-check", help="crossing identity at every crossing")
    common(p)
    p.add_argument("--fd-step", type=float, default=None)
    p.add_argument("--two-loop", nargs=2, metavar=("L1", "L2"),
                   help="also check the identity for two loops crossing at their base")
    p.set_defaults(func=cmd_mm_check)

    p = sub.add_parser("gauge-check", help="gauge and extended gauge invariance")
    common(p, mc=False)
    p.add_argument("--group-size", type=int, default=2)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--gradient-trials", type=int, default=3)
    p.set_defaults(func=cmd_gauge_check)

    p = sub.add_parser("local-mm", help="exact U(1) check of the local identity")
    p.add_argument("--function", action="append", choices=sorted(LOCAL_FUNCTIONS))
    p.add_argument("--alpha", type=float, nargs=4)
    p.add_argument("--times", type=float, nargs=4)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_local_mm)

    p = sub.add_parser("sweep", help="CSV of values over a grid of areas")
    common(p)
    p.add_argument("--vary", action="append", metavar="F1=0.5,1,2",
                   help="face and values to sweep (repeatable, cartesian product)")
    p.add_argument("--method", choices=("master", "expect"), default="master")
    p.set_defaults(func=cmd_sweep)
    return parser


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        if getattr(args, "group_size", 1) < 1:
            raise SemanticError("--group-size must be at least 1")
        if args.command in ("expect", "mm-check") or (args.command == "sweep"
                                                      and args.method == "expect"):
            if args.samples < 2:
                raise SemanticError("--samples must be at least 2")
        if hasattr(args, "shards") and args.shards < 1:
            raise SemanticError("--shards must be at least 1")
        result = args.func(args)
    except YMError as exc:
        code = 1 if isinstance(exc, NUMERIC_ERRORS) else 2
        name = type(exc).__name__
        cause = exc.__cause__
        label = f"{name} ({type(cause).__name__})" if isinstance(cause, YMError) else name
        print(f"error: {label}: {exc}", file=sys.stderr)
        failure = {"error": name, "message": str(exc), "passed": False}
        if isinstance(cause, YMError):
            failure["cause"] = type(cause).__name__
        report = {"command": args.command, "inputs": _inputs(args), "results": failure,
                  "runtime_ms": (time.perf_counter() - start) * 1000,
                  "seed": getattr(args, "seed", 0), "version": __version__}
        _emit(json.dumps(report, indent=1, default=_plain) + "\n", getattr(args, "output", None))
        return code
    if isinstance(result, str):
        _emit(result, args.output)
        return 0
    results, areas = result
    report = {"command": args.command, "inputs": _inputs(args, areas), "results": results,
              "runtime_ms": (time.perf_counter() - start) * 1000, "seed": args.seed,
              "version": __version__}
    _emit(json.dumps(report, indent=1, default=_plain) + "\n", getattr(args, "output", None))
    return 0 if results.get("passed", True) else 1


if __name__ == "__main__":
    sys.exit(main())
