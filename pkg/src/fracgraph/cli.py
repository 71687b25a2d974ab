"""Command-line interface: kernel, evolve, verify, and sweep subcommands.

Exit codes: 0 = all checks passed, 1 = a mathematical check failed,
2 = input or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import build_report, mass
from .errors import FracGraphError, PositivityViolation
from .flow import FlowConfig, Trajectory, evolve_direct, picard_solve, steady_state
from .graph import Graph, graph_from_json
from .operators import FractionalKernel, build_kernel, dirichlet_p_energy
from .spectral import decompose, kernel_weights, kernel_weights_oracle

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

_FMT = "%.17g"


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return _FMT % x


def _load_graph(path: str) -> Graph:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read graph file: {exc}") from exc
    try:
        return graph_from_json(text)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad graph file {path}: {exc}") from exc


def _output_dir(args) -> Path:
    out = os.environ.get("FRACGRAPH_OUTPUT_DIR") or args.output_dir
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_kernel_csv(path: Path, graph: Graph, w: np.ndarray):
    lines = ["," + ",".join(graph.labels)]
    for i, lab in enumerate(graph.labels):
        lines.append(lab + "," + ",".join(_fmt(v) for v in w[i]))
    path.write_text("\n".join(lines) + "\n")


def _write_trajectory_csv(path: Path, graph: Graph, traj: Trajectory,
                          kernel: FractionalKernel, p: float, q: float):
    n = graph.n
    header = ["t"] + [f"u_{i+1}" for i in range(n)] + [
        "min_u", "max_u", "mass", "dirichlet_p_energy"]
    lines = [",".join(header)]
    for t, u in zip(traj.times, traj.values):
        row = [_fmt(t)] + [_fmt(v) for v in u] + [
            _fmt(float(np.min(u))),
            _fmt(float(np.max(u))),
            _fmt(mass(graph, u, q)),
            _fmt(dirichlet_p_energy(kernel, u, p)),
        ]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def _svg_lineplot(path: Path, times: np.ndarray, series: dict[str, np.ndarray], title: str):
    """Minimal SVG line plot: one polyline per series, light axes, no deps."""
    width, height, margin = 640, 400, 50
    t0, t1 = float(times[0]), float(times[-1])
    ys = np.concatenate(list(series.values()))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0

    def sx(t):
        return margin + (t - t0) / (t1 - t0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{width/2}" y="20" text-anchor="middle">{title}</text>',
        f'<line x1="{margin}" y1="{height-margin}" x2="{width-margin}" '
        f'y2="{height-margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height-margin}" stroke="black"/>',
    ]
    for ci, (name, vals) in enumerate(series.items()):
        pts = " ".join(f"{sx(t):.2f},{sy(v):.2f}" for t, v in zip(times, vals))
        color = colors[ci % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}"/>')
        parts.append(
            f'<text x="{width-margin+4}" y="{margin+14*ci+10}" fill="{color}" '
            f'font-size="11">{name}</text>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


def _make_u0(graph: Graph, args) -> tuple[np.ndarray, dict]:
    spec = args.u0
    if isinstance(spec, list):
        u0 = np.asarray(spec, dtype=float)
        meta = {"kind": "explicit"}
    elif isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "constant":
            u0 = np.full(graph.n, float(spec["value"]))
            meta = {"kind": "constant", "value": float(spec["value"])}
        elif kind == "random-uniform":
            low, high = float(spec["low"]), float(spec["high"])
            seed = int(spec.get("seed", 0))
            if low <= 0:
                raise UsageError("random-uniform u0 bounds must be positive")
            rng = np.random.Generator(np.random.Philox(seed))
            u0 = rng.uniform(low, high, size=graph.n)
            meta = {"kind": "random-uniform", "low": low, "high": high,
                    "generator": "philox", "seed": seed}
        else:
            raise UsageError(f"unknown u0 generator kind: {kind!r}")
    else:
        raise UsageError("u0 must be a vector or a generator spec")
    if len(u0) != graph.n:
        raise UsageError(f"u0 has length {len(u0)}, graph has {graph.n} vertices")
    if np.min(u0) <= 0:
        raise UsageError("u0 must be strictly positive")
    return u0, meta


def _flow_config(args) -> FlowConfig:
    try:
        return FlowConfig(
            s=args.s, p=args.p, q=args.q, T=args.T, dt_out=args.dt_out,
            atol=args.atol, rtol=args.rtol, eps_reg=args.eps_reg,
            picard_tol=args.picard_tol, picard_max=args.picard_max,
        )
    except FracGraphError as exc:
        raise UsageError(str(exc)) from exc


def _apply_config_file(args):
    """Merge --config JSON under explicit flags (flags win)."""
    if not args.config:
        return
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad config file: {exc}") from exc
    mapping = {
        "s": "s", "p": "p", "q": "q", "T": "T", "dt_out": "dt_out",
        "atol": "atol", "rtol": "rtol", "eps_reg": "eps_reg",
        "picard_tol": "picard_tol", "picard_max": "picard_max",
        "solver": "solver", "u0": "u0",
    }
    for key, attr in mapping.items():
        if key in data and getattr(args, attr, None) in (None, _UNSET):
            setattr(args, attr, data[key])


_UNSET = object()


def _fill_defaults(args):
    defaults = {
        "s": 0.5, "p": 2.0, "q": 1.0, "T": 1.0, "dt_out": None,
        "atol": 1e-9, "rtol": 1e-9, "eps_reg": 1e-12,
        "picard_tol": 1e-10, "picard_max": 100,
        "solver": "direct", "u0": {"kind": "constant", "value": 1.0},
    }
    for key, val in defaults.items():
        if getattr(args, key, _UNSET) in (None, _UNSET):
            setattr(args, key, val)


def cmd_kernel(args) -> int:
    graph = _load_graph(args.graph)
    if not 0.0 < args.s < 1.0:
        raise UsageError(f"s = {args.s}, need 0 < s < 1")
    out = _output_dir(args)
    dec = decompose(graph)
    try:
        w = kernel_weights(dec, args.s)
    except PositivityViolation as exc:
        print(f"FAIL kernel positivity: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    _write_kernel_csv(out / "kernel.csv", graph, w)
    (out / "eigenvalues.json").write_text(
        json.dumps({"eigenvalues": [float(v) for v in dec.eigenvalues]}, indent=2) + "\n"
    )

    w_oracle = kernel_weights_oracle(dec, args.s)
    offdiag = ~np.eye(graph.n, dtype=bool)
    dev = float(np.max(np.abs(w - w_oracle)[offdiag] / np.abs(w[offdiag])))
    sym_dev = float(np.max(np.abs(w - w.T)))
    report = {
        "s": args.s,
        "min_offdiagonal": float(np.min(w[offdiag])),
        "symmetry_deviation": sym_dev,
        "oracle_max_relative_deviation": dev,
    }
    (out / "kernel_report.json").write_text(json.dumps(report, indent=2) + "\n")

    ok = report["min_offdiagonal"] > 0 and sym_dev <= 1e-12 * float(np.max(w))
    print(f"{'PASS' if ok else 'FAIL'} kernel positivity/symmetry "
          f"(min offdiag {report['min_offdiagonal']:.3e}, "
          f"oracle deviation {dev:.3e})")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _run_solver(graph: Graph, kernel: FractionalKernel, u0: np.ndarray,
                config: FlowConfig, solver: str):
    if solver == "picard":
        traj, iters, history = picard_solve(kernel, u0, config)
    elif solver == "direct":
        traj, iters, history = evolve_direct(kernel, u0, config), None, None
    else:
        raise UsageError(f"unknown solver {solver!r}")
    return traj, iters, history


def cmd_evolve(args) -> int:
    _apply_config_file(args)
    _fill_defaults(args)
    graph = _load_graph(args.graph)
    config = _flow_config(args)
    u0, u0_meta = _make_u0(graph, args)
    out = _output_dir(args)
    kernel = build_kernel(graph, config.s)

    summary = {
        "solver": args.solver,
        "config": {"s": config.s, "p": config.p, "q": config.q, "T": config.T,
                   "dt_out": config.dt_out, "atol": config.atol, "rtol": config.rtol,
                   "eps_reg": config.eps_reg},
        "u0": u0_meta,
    }
    try:
        traj, iters, history = _run_solver(graph, kernel, u0, config, args.solver)
    except FracGraphError as exc:
        summary["error"] = type(exc).__name__
        summary["message"] = str(exc)
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
        print(f"FAIL solver: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED

    _write_trajectory_csv(out / "trajectory.csv", graph, traj, kernel, config.p, config.q)
    c = steady_state(graph, u0, config.q)
    summary.update({
        "steady_state": c,
        "steady_state_error": float(np.max(np.abs(traj.final - c))),
        "picard_iterations": iters,
        "picard_history": history,
        "steps_accepted": traj.stats.accepted,
        "steps_rejected": traj.stats.rejected,
    })
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")

    if args.emit_plots:
        masses = np.array([mass(graph, u, config.q) for u in traj.values])
        energies = np.array(
            [dirichlet_p_energy(kernel, u, config.p) for u in traj.values])
        _svg_lineplot(out / "flow.svg", traj.times, {
            "min_u": traj.values.min(axis=1),
            "max_u": traj.values.max(axis=1),
            "mass": masses,
            "dirichlet_p_energy": energies,
        }, title="flow diagnostics")
    return EXIT_OK


def cmd_verify(args) -> int:
    _apply_config_file(args)
    _fill_defaults(args)
    graph = _load_graph(args.graph)
    config = _flow_config(args)
    u0, u0_meta = _make_u0(graph, args)
    out = _output_dir(args)
    kernel = build_kernel(graph, config.s)

    try:
        traj, iters, _ = _run_solver(graph, kernel, u0, config, args.solver)
    except FracGraphError as exc:
        print(f"FAIL solve: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED

    report = build_report(traj, kernel, config)
    mass0 = mass(graph, u0, config.q)
    energy_tol = max(1e-8, 10.0 * config.dt_out**2)
    checks = {
        "max_principle": report.bound_violation <= 1e-9,
        "mass_conservation": report.mass_drift <= 1e-8 * abs(mass0),
        "dissipation_bound": report.dissipation_satisfied,
        "energy_identity": report.energy_identity_residual <= energy_tol,
        "gradient_decay": report.final_gradient_energy
        <= report.initial_gradient_energy * (1 + 1e-8) + 1e-12,
    }
    (out / "report.json").write_text(
        report.to_json(checks=checks, u0=u0_meta, solver=args.solver,
                       picard_iterations=iters) + "\n"
    )
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if all(checks.values()) else EXIT_CHECK_FAILED


def _sweep_worker(payload) -> tuple[str, int]:
    graph_path, outdir, base, s, p, q = payload
    args = argparse.Namespace(
        graph=graph_path, config=None, output_dir=outdir,
        emit_plots=False, **{**base, "s": s, "p": p, "q": q},
    )
    tag = f"s{s}_p{p}_q{q}"
    args.output_dir = str(Path(outdir) / tag)
    try:
        code = cmd_evolve(args)
    except UsageError as exc:
        print(f"sweep {tag}: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    return tag, code


def cmd_sweep(args) -> int:
    _apply_config_file(args)
    _fill_defaults(args)
    out = _output_dir(args)
    base = {
        "T": args.T, "dt_out": args.dt_out, "atol": args.atol, "rtol": args.rtol,
        "eps_reg": args.eps_reg, "picard_tol": args.picard_tol,
        "picard_max": args.picard_max, "solver": args.solver, "u0": args.u0,
    }
    combos = list(product(args.s_list, args.p_list, args.q_list))
    payloads = [(args.graph, str(out), base, s, p, q) for s, p, q in combos]
    worst = EXIT_OK
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        for tag, code in pool.map(_sweep_worker, payloads):
            print(f"{'ok' if code == 0 else 'FAIL'} {tag}")
            worst = max(worst, code)
    return worst


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _add_flow_flags(sub):
    sub.add_argument("--config", help="JSON config file; flags override its fields")
    sub.add_argument("--s", type=float, default=None)
    sub.add_argument("--p", type=float, default=None)
    sub.add_argument("--q", type=float, default=None)
    sub.add_argument("--T", type=float, default=None)
    sub.add_argument("--dt-out", dest="dt_out", type=float, default=None)
    sub.add_argument("--atol", type=float, default=None)
    sub.add_argument("--rtol", type=float, default=None)
    sub.add_argument("--eps-reg", dest="eps_reg", type=float, default=None)
    sub.add_argument("--picard-tol", dest="picard_tol", type=float, default=None)
    sub.add_argument("--picard-max", dest="picard_max", type=int, default=None)
    sub.add_argument("--solver", choices=["direct", "picard"], default=None)
    sub.add_argument("--u0-constant", type=float, default=None)
    sub.add_argument("--u0-random", nargs=2, type=float, metavar=("LOW", "HIGH"),
                     default=None)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--output-dir", default="out")


def _resolve_u0_flags(args):
    if getattr(args, "u0_constant", None) is not None:
        args.u0 = {"kind": "constant", "value": args.u0_constant}
    elif getattr(args, "u0_random", None) is not None:
        low, high = args.u0_random
        args.u0 = {"kind": "random-uniform", "low": low, "high": high,
                   "seed": args.seed}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracgraph",
        description="Fractional p-Laplacian flows on finite weighted graphs",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    k = subs.add_parser("kernel", help="compute the fractional kernel W_s")
    k.add_argument("graph")
    k.add_argument("--s", type=float, required=True)
    k.add_argument("--output-dir", default="out")
    k.set_defaults(func=cmd_kernel)

    for name, func, extra_help in [
        ("evolve", cmd_evolve, "solve the flow and dump the trajectory"),
        ("verify", cmd_verify, "solve the flow and check every estimate"),
    ]:
        sub = subs.add_parser(name, help=extra_help)
        sub.add_argument("graph")
        _add_flow_flags(sub)
        sub.add_argument("--emit-plots", action="store_true")
        sub.set_defaults(func=func)

    sw = subs.add_parser("sweep", help="cartesian parameter sweep over s/p/q")
    sw.add_argument("graph")
    _add_flow_flags(sw)
    sw.add_argument("--s-list", type=_float_list, required=True)
    sw.add_argument("--p-list", type=_float_list, required=True)
    sw.add_argument("--q-list", type=_float_list, required=True)
    sw.add_argument("--workers", type=int, default=None)
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _resolve_u0_flags(args)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FracGraphError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
