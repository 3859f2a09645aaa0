"""Command-line front end: generation, validation, criteria, simulation.

Commands: gen, validate, assumptions, criterion, simulate, weakcheck,
lemma, sweep.  All experiment commands read a single JSON config document
(see README for the schema); outputs are JSON or CSV.  Exit codes: 0 on
success (and satisfied/clean verdicts where documented), 1 on runtime
errors or negative verdicts, 2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import graphs
from .geometry import (PseudoMetric, TruncationError, distances_from,
                       fit_alpha, metric_structure_report)
from .cutoffs import (TestFunction, compact_cutoff_constants, default_power,
                      exp_cutoff_constants)
from .potentials import Potential
from .criterion import (SystemParams, annulus_criterion, critical_volume_exponent,
                        expweight_criterion, single_criterion,
                        single_inequality_exponent)
from .dynamics import (SupportError, WaveSystemProblem, blowup_event_json,
                       cfl_dt, save_trajectory_csv, simulate, weak_residual)

USAGE_ERROR = 2
RUNTIME_ERROR = 1


class ConfigError(ValueError):
    """Bad or missing configuration."""


def _load_config(path) -> dict:
    if path is None:
        raise ConfigError("this command needs --config <file>")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None


def _build_graph(cfg: dict) -> graphs.WeightedGraph:
    spec = cfg.get("graph")
    if not isinstance(spec, dict):
        raise ConfigError("config needs a 'graph' object")
    if "file" in spec:
        return graphs.load_graph(spec["file"])
    gen = spec.get("generator")
    if gen == "lattice":
        return graphs.generate_lattice(int(spec["dim"]), int(spec["half_width"]))
    if gen == "tree":
        return graphs.generate_tree(int(spec["branching"]), int(spec["depth"]))
    if gen == "path":
        return graphs.generate_path(int(spec["n"]))
    raise ConfigError(f"unknown graph generator {gen!r}")


def _build_metric(cfg: dict, g: graphs.WeightedGraph) -> PseudoMetric:
    spec = cfg.get("metric")
    if not isinstance(spec, dict):
        raise ConfigError("config needs a 'metric' object")
    kind = spec.get("kind")
    if kind == "graph":
        return PseudoMetric.graph_distance()
    if kind == "l1":
        return PseudoMetric.lattice_l1()
    if kind == "l2":
        return PseudoMetric.lattice_l2()
    if kind == "table":
        if "file" not in spec:
            raise ConfigError("table metric needs a 'file'")
        return PseudoMetric.load_table(spec["file"], g)
    raise ConfigError(f"unknown metric kind {kind!r}")


def _resolve_x0(cfg: dict, g: graphs.WeightedGraph) -> int:
    x0 = cfg.get("x0", "origin" if g.coords is not None else 0)
    if x0 == "origin":
        return graphs.lattice_origin(g)
    label = int(x0)
    hits = np.flatnonzero(g.labels == label)
    if hits.size != 1:
        raise ConfigError(f"x0 label {label} not found in the graph")
    return int(hits[0])


def _build_params(cfg: dict) -> SystemParams:
    spec = cfg.get("params")
    if not isinstance(spec, dict):
        raise ConfigError("config needs a 'params' object")
    try:
        return SystemParams(
            p=float(spec["p"]), q=float(spec["q"]),
            theta1=float(spec.get("theta1", 2.0)),
            theta2=float(spec.get("theta2", 2.0)),
            alpha=float(spec.get("alpha", 1.0)),
            delta=None if spec.get("delta") is None else float(spec["delta"]),
            r0=float(spec.get("r0", 1.0)),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad params: {exc}") from None


def _build_potentials(cfg: dict):
    spec = cfg.get("potentials", {})
    h1 = Potential.from_config(spec.get("h1", {"form": "constant", "c": 1.0}))
    h2 = Potential.from_config(spec.get("h2", {"form": "constant", "c": 1.0}))
    return h1, h2


def _build_r_grid(cfg: dict) -> list:
    spec = cfg.get("r_grid")
    if spec is None:
        raise ConfigError("config needs 'r_grid'")
    if isinstance(spec, list):
        return [float(r) for r in spec]
    r0 = float(spec.get("r0", 1.0))
    factor = float(spec.get("factor", 2.0))
    count = int(spec.get("count", 4))
    return [r0 * factor ** k for k in range(count)]


def _data_vector(spec: dict, g, dvec, rng) -> np.ndarray:
    kind = spec.get("kind", "zero")
    n = g.num_vertices
    if kind == "zero":
        return np.zeros(n)
    if kind == "constant":
        return np.full(n, float(spec["value"]))
    if kind == "gaussian":
        width = float(spec.get("width", 8.0))
        amp = float(spec.get("amplitude", 1.0))
        return amp * np.exp(-dvec ** 2 / width)
    if kind == "point":
        out = np.zeros(n)
        out[int(np.argmin(dvec))] = float(spec.get("value", 1.0))
        return out
    if kind == "random_uniform":
        return rng.uniform(float(spec.get("low", 0.0)),
                           float(spec.get("high", 1.0)), n)
    raise ConfigError(f"unknown data kind {kind!r}")


def _build_problem(cfg: dict, g, m, x0, seed: int) -> WaveSystemProblem:
    spec = cfg.get("simulation")
    if not isinstance(spec, dict):
        raise ConfigError("config needs a 'simulation' object")
    h1, h2 = _build_potentials(cfg)
    params = cfg.get("params", {})
    p = float(params.get("p", 2.0))
    q = float(params.get("q", 2.0))
    dvec = distances_from(g, m, x0)
    rng = np.random.default_rng(seed)
    data_spec = spec.get("data", {})
    if "all" in data_spec:
        shared = _data_vector(data_spec["all"], g, dvec, rng)
        u0 = u1 = v0 = v1 = shared
    else:
        u0 = _data_vector(data_spec.get("u0", {"kind": "zero"}), g, dvec, rng)
        u1 = _data_vector(data_spec.get("u1", {"kind": "zero"}), g, dvec, rng)
        v0 = _data_vector(data_spec.get("v0", {"kind": "zero"}), g, dvec, rng)
        v1 = _data_vector(data_spec.get("v1", {"kind": "zero"}), g, dvec, rng)
    dt = spec.get("dt")
    if dt is None:
        dt = cfl_dt(g, float(spec.get("dt_safety", 0.5)))
    return WaveSystemProblem(
        graph=g, metric=m, x0=x0, h1=h1, h2=h2, p=p, q=q,
        u0=u0, u1=u1, v0=v0, v1=v1, dt=float(dt), T=float(spec["T"]),
        blowup_threshold=float(spec.get("threshold", 1e8)),
        coupled=bool(spec.get("coupled", True)),
        step_cap=int(spec.get("step_cap", 200_000)),
    )


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _emit_json(obj, out_path) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True), out_path)


# ---------------------------------------------------------------------------
# commands

def cmd_gen(args) -> int:
    if args.lattice is not None:
        if args.half_width is None:
            raise ConfigError("--lattice needs --half-width")
        g = graphs.generate_lattice(args.lattice, args.half_width)
    elif args.tree is not None:
        g = graphs.generate_tree(args.tree[0], args.tree[1])
    elif args.path is not None:
        g = graphs.generate_path(args.path)
    else:
        raise ConfigError("choose --lattice, --tree or --path")
    text = graphs.dumps_graph(g)
    _emit(text, args.out)
    print(f"generated {g.num_vertices} vertices, {g.num_edges} edges", file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    g = graphs.load_graph(args.graph_file, strict=False)
    report = graphs.validate_graph(g)
    _emit_json(report.to_dict(), args.out)
    return 0 if report.ok else 1


def cmd_assumptions(args) -> int:
    cfg = _load_config(args.config)
    g = _build_graph(cfg)
    m = _build_metric(cfg, g)
    x0 = _resolve_x0(cfg, g)
    spec = cfg.get("assumptions", {})
    alpha = float(spec.get("alpha", cfg.get("params", {}).get("alpha", 1.0)))
    r0 = float(spec.get("r0", cfg.get("params", {}).get("r0", 1.0)))
    include_boundary = bool(spec.get("include_boundary", False))
    growth_factor = float(spec.get("growth_factor", 1.5))
    report = metric_structure_report(g, m, x0, alpha, r0,
                                     include_boundary=include_boundary)
    # an empirical constant is trivially respected; instability of the
    # constant across radii is what signals a failing decay hypothesis
    stable = report.c2_outer <= growth_factor * report.c2_inner + 1e-12
    if not stable:
        report = metric_structure_report(g, m, x0, alpha, r0,
                                         include_boundary=include_boundary,
                                         c2=report.c2_inner)
    out = report.to_dict()
    out["c2_stable"] = stable
    try:
        fit = fit_alpha(g, m, x0, r0, include_boundary=include_boundary)
        out["alpha_fit"] = fit.to_dict()
    except ValueError as exc:
        out["alpha_fit"] = {"error": str(exc)}
    _emit_json(out, args.out)
    return 0 if stable and not report.violations else 1


def cmd_criterion(args) -> int:
    cfg = _load_config(args.config)
    g = _build_graph(cfg)
    m = _build_metric(cfg, g)
    x0 = _resolve_x0(cfg, g)
    params = _build_params(cfg)
    h1, h2 = _build_potentials(cfg)
    r_grid = _build_r_grid(cfg)
    tol = float(cfg.get("tolerance", 0.2))
    mode = cfg.get("mode", "annulus")
    if mode == "annulus":
        verdict = annulus_criterion(g, m, x0, params, h1, h2, r_grid, tol=tol)
    elif mode == "exp-weight":
        verdict = expweight_criterion(g, m, x0, params, h1, h2, r_grid, tol=tol)
    elif mode == "single":
        verdict = single_criterion(g, m, x0, params.p, params.alpha, h1, r_grid,
                                   theta1=params.theta1, theta2=params.theta2, tol=tol)
    else:
        raise ConfigError(f"unknown criterion mode {mode!r}")
    _emit_json(verdict.to_dict(), args.out)
    return 0 if verdict.satisfied else 1


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    g = _build_graph(cfg)
    m = _build_metric(cfg, g)
    x0 = _resolve_x0(cfg, g)
    prob = _build_problem(cfg, g, m, x0, args.seed)
    warning = None
    if g.boundary is not None and g.boundary.any():
        dvec = distances_from(g, m, x0)
        data = np.abs(prob.u0) + np.abs(prob.u1) + np.abs(prob.v0) + np.abs(prob.v1)
        support = float(dvec[data > 1e-12].max()) if (data > 1e-12).any() else 0.0
        min_bd = float(dvec[g.boundary].min())
        # unit wave-speed light cone heuristic
        if support + prob.T > min_bd:
            warning = (f"light cone reaches {support + prob.T:.3g} but the "
                       f"boundary starts at {min_bd:.3g}; reflections may pollute the run")
            print(f"warning: {warning}", file=sys.stderr)
    traj = simulate(prob)
    out_spec = cfg.get("output", {})
    traj_path = args.out or out_spec.get("trajectory")
    if traj_path:
        save_trajectory_csv(traj, traj_path, out_spec.get("mode", "summary"))
    events_path = out_spec.get("events")
    if events_path:
        with open(events_path, "w", encoding="utf-8") as fh:
            fh.write(blowup_event_json(traj, indent=2) + "\n")
    summary = {
        "status": traj.status,
        "t_b": traj.blowup_time,
        "blowup_vertex": None if traj.blowup_vertex is None
        else int(g.labels[traj.blowup_vertex]),
        "steps": traj.n_steps,
        "dt": traj.dt,
        "sup_u_final": float(np.abs(traj.u[-1]).max()),
        "sup_v_final": float(np.abs(traj.v[-1]).max()),
        "step_cap_hit": traj.step_cap_hit,
        "light_cone_warning": warning,
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_weakcheck(args) -> int:
    cfg = _load_config(args.config)
    g = _build_graph(cfg)
    m = _build_metric(cfg, g)
    x0 = _resolve_x0(cfg, g)
    prob = _build_problem(cfg, g, m, x0, args.seed)
    spec = cfg.get("weakcheck")
    if not isinstance(spec, dict):
        raise ConfigError("config needs a 'weakcheck' object")
    family = spec.get("family", "compact")
    R = float(spec["R"])
    s = spec.get("s", "auto")
    if s == "auto":
        s = default_power(prob.p, prob.q)
    s = float(s)
    params = cfg.get("params", {})
    if family == "compact":
        tf = TestFunction.compact(g, m, x0, R,
                                  float(spec.get("theta1", params.get("theta1", 2.0))),
                                  float(spec.get("theta2", params.get("theta2", 2.0))),
                                  s=s)
    elif family in ("exp-tail", "exp"):
        tf = TestFunction.exp_tail(g, m, x0, R,
                                   float(spec.get("alpha", params.get("alpha", 1.0))),
                                   float(spec.get("delta", params.get("delta", 1.0))),
                                   s=s)
    else:
        raise ConfigError(f"unknown test-function family {family!r}")
    traj = simulate(prob)
    fields = spec.get("fields", ["u", "v"])
    reports = {}
    for field in fields:
        if field == "u":
            reports["u"] = weak_residual(traj, tf, prob.h1, prob.p, "u").to_dict()
        elif field == "v":
            reports["v"] = weak_residual(traj, tf, prob.h2, prob.q, "v").to_dict()
        else:
            raise ConfigError(f"unknown field {field!r}")
    _emit_json({"status": traj.status, "t_support": tf.time_support,
                "reports": reports}, args.out)
    return 0


def cmd_lemma(args) -> int:
    cfg = _load_config(args.config)
    g = _build_graph(cfg)
    m = _build_metric(cfg, g)
    x0 = _resolve_x0(cfg, g)
    spec = cfg.get("lemma")
    if not isinstance(spec, dict):
        raise ConfigError("config needs a 'lemma' object")
    family = spec.get("family", "compact")
    r_values = [float(r) for r in spec.get("r_values", [])]
    if not r_values:
        raise ConfigError("lemma config needs 'r_values'")
    ppu = int(spec.get("points_per_unit", 16))
    params = cfg.get("params", {})
    results = []
    for R in r_values:
        if family == "compact":
            rep = compact_cutoff_constants(
                g, m, x0,
                float(spec.get("theta1", params.get("theta1", 2.0))),
                float(spec.get("theta2", params.get("theta2", 2.0))),
                float(spec.get("alpha", params.get("alpha", 1.0))),
                R, points_per_unit=ppu)
        elif family in ("exp-tail", "exp"):
            rep = exp_cutoff_constants(
                g, m, x0,
                float(spec.get("s", 6.0)),
                float(spec.get("alpha", params.get("alpha", 1.0))),
                float(spec.get("delta", params.get("delta", 1.0))),
                R, points_per_unit=ppu)
        else:
            raise ConfigError(f"unknown cutoff family {family!r}")
        results.append(rep.to_dict())
    _emit_json({"family": family, "results": results}, args.out)
    return 0


def _sweep_cell(g, m, x0, base_params, h1, h2, r_grid, tol, p, q, sim_cfg, seed):
    params = SystemParams(p=p, q=q, theta1=base_params.theta1,
                          theta2=base_params.theta2, alpha=base_params.alpha,
                          delta=base_params.delta, r0=base_params.r0)
    verdict = annulus_criterion(g, m, x0, params, h1, h2, r_grid, tol=tol)
    fitted = max(verdict.exponents.values())
    blowup_time = ""
    if sim_cfg is not None:
        cfg = dict(sim_cfg)
        cfg.setdefault("params", {})
        cfg["params"] = dict(cfg["params"], p=p, q=q)
        prob = _build_problem(cfg, g, m, x0, seed)
        traj = simulate(prob)
        if traj.status == "blowup":
            blowup_time = repr(float(traj.blowup_time))
    return {
        "p": p, "q": q,
        "crit_exponent": verdict.critical_exponent,
        "fitted_exponent": fitted,
        "verdict": "satisfied" if verdict.satisfied else "not-satisfied",
        "blowup_time": blowup_time,
    }


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    g = _build_graph(cfg)
    m = _build_metric(cfg, g)
    x0 = _resolve_x0(cfg, g)
    base_params = _build_params(cfg)
    h1, h2 = _build_potentials(cfg)
    r_grid = _build_r_grid(cfg)
    tol = float(cfg.get("tolerance", 0.2))
    spec = cfg.get("sweep")
    if not isinstance(spec, dict):
        raise ConfigError("config needs a 'sweep' object")
    p_values = [float(p) for p in spec.get("p_values", [])]
    if not p_values:
        raise ConfigError("sweep needs 'p_values'")
    q_spec = spec.get("q", "same")
    cells = []
    for p in p_values:
        if q_spec == "same":
            cells.append((p, p))
        else:
            for q in q_spec:
                if p >= float(q):
                    cells.append((p, float(q)))
    sim_cfg = None
    if spec.get("simulate", False):
        sim_cfg = {"simulation": cfg.get("simulation"),
                   "potentials": cfg.get("potentials", {})}
        if not isinstance(sim_cfg["simulation"], dict):
            raise ConfigError("sweep simulate=true needs a 'simulation' object")

    def run(cell):
        p, q = cell
        return _sweep_cell(g, m, x0, base_params, h1, h2, r_grid, tol,
                           p, q, sim_cfg, args.seed)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]
    rows.sort(key=lambda r: (r["p"], r["q"]))
    lines = ["p,q,crit_exponent,fitted_exponent,verdict,blowup_time"]
    for r in rows:
        lines.append("%r,%r,%r,%r,%s,%s" % (r["p"], r["q"], r["crit_exponent"],
                                            r["fitted_exponent"], r["verdict"],
                                            r["blowup_time"]))
    _emit("\n".join(lines), args.out)
    return 0


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavegraph",
        description="volume-growth criteria and wave simulation on weighted graphs")
    parser.add_argument("--config", help="JSON experiment config")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized test data")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a graph file")
    p_gen.add_argument("--lattice", type=int, metavar="DIM")
    p_gen.add_argument("--half-width", type=int, dest="half_width")
    p_gen.add_argument("--tree", type=int, nargs=2, metavar=("B", "DEPTH"))
    p_gen.add_argument("--path", type=int, metavar="N")
    p_gen.add_argument("-o", "--out", dest="out")
    p_gen.set_defaults(func=cmd_gen)

    p_val = sub.add_parser("validate", help="validate a graph file")
    p_val.add_argument("graph_file")
    p_val.set_defaults(func=cmd_validate)

    for name, func, help_text in [
        ("assumptions", cmd_assumptions, "structural hypotheses report"),
        ("criterion", cmd_criterion, "volume-growth criterion verdict"),
        ("simulate", cmd_simulate, "integrate the wave system"),
        ("weakcheck", cmd_weakcheck, "weak-form residuals along a trajectory"),
        ("lemma", cmd_lemma, "cutoff scaling constants"),
        ("sweep", cmd_sweep, "criterion/simulation sweep over (p, q)"),
    ]:
        p_cmd = sub.add_parser(name, help=help_text)
        p_cmd.set_defaults(func=func)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "kind": "config"}), file=sys.stderr)
        return USAGE_ERROR
    except (graphs.GraphFormatError,) as exc:
        print(json.dumps({"error": str(exc), "kind": "format"}), file=sys.stderr)
        return RUNTIME_ERROR
    except (TruncationError, SupportError) as exc:
        print(json.dumps({"error": str(exc), "kind": type(exc).__name__}),
              file=sys.stderr)
        return RUNTIME_ERROR
    except (ValueError, KeyError) as exc:
        print(json.dumps({"error": str(exc), "kind": "runtime"}), file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
