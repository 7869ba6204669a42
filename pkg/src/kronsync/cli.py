"""Command-line front end.

Exit codes: 0 success, 2 bad input, 3 infeasible design, 4 numerical
failure, 64 usage error. Data go to files in ``--out``; a one-line
summary goes to standard output and diagnostics to standard error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    INTEGRATORS,
    SimulationConfig,
    finite_horizon_l2,
    monte_carlo_compare,
    sample_disturbances,
    simulate_dae,
)
from .errors import Infeasible, InputError, KronSyncError
from .graph_core import build_laplacian, kron_reduce, total_effective_resistance_reduced
from .io_ingest import (
    DEFAULT_CONVENTION,
    MONTECARLO_COLUMNS,
    Convention,
    load_graph,
    write_csv,
    write_json,
    write_results,
)
from .optimizer import (
    DesignProblem,
    allocate_proportional,
    allocate_random_dirichlet,
    allocate_uniform,
    design_problem,
    max_feasible_psi,
    maximize_lambda2,
    solve,
    solve_rewire,
)
from .sync_cert import CohesionSpec, certify_all, lmi_threshold

log = logging.getLogger("kronsync")

EXIT_USAGE = 64
STRATEGIES = ("optimal", "proportional", "uniform", "random", "original", "rewired")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, needs_input: bool = True):
    if needs_input:
        p.add_argument("input", help="MATPOWER .m file, graph .json file, or 'case30' for the bundled case")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.add_argument("--convention", choices=[c.value for c in Convention],
                   default=DEFAULT_CONVENTION.value,
                   help="branch susceptance convention for .m input (default: %(default)s)")
    p.add_argument("--beta", type=float, default=1.0, help="Laplacian regularization (default: %(default)s)")


def _sim_options(p):
    p.add_argument("--dt", type=float, default=0.01, help="time step in seconds (default: %(default)s)")
    p.add_argument("--horizon", type=float, default=50.0, help="horizon T in seconds (default: %(default)s)")
    p.add_argument("--integrator", choices=INTEGRATORS, default=INTEGRATORS[0],
                   help="time stepper (default: %(default)s)")
    p.add_argument("--newton-tol", type=float, default=1e-10,
                   help="load power-balance tolerance (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kronsync", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("reduce", help="Kron-reduce onto the generators and report R_tot")
    _common(p)
    p.add_argument("--generators", type=int, nargs="+",
                   help="zero-based boundary nodes (default: the graph's generators)")

    p = sub.add_parser("optimize", help="allocate a susceptance budget")
    _common(p)
    p.add_argument("--alpha", type=float, default=None, help="budget (required unless --rewire)")
    p.add_argument("--gamma", type=float, help="cohesion arc length in radians")
    p.add_argument("--psi", type=float, help="injection-ball radius")
    p.add_argument("--rewire", action="store_true",
                   help="redistribute existing susceptance (alpha = 0, x_e >= -a_e)")

    p = sub.add_parser("certify", help="check cohesion certificates")
    _common(p)
    p.add_argument("--gamma", type=float, required=True, help="cohesion arc length in radians")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--p-file", help="JSON file with a balanced injection vector")
    src.add_argument("--psi", type=float, help="worst case over injections of norm psi")
    p.add_argument("--alpha", type=float,
                   help="also decide whether some allocation of this budget meets the spectral bound")

    p = sub.add_parser("simulate", help="simulate the swing dynamics after a step disturbance")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--u0-file", help="JSON file with the generator step vector")
    src.add_argument("--random", action="store_true", help="draw u0 ~ N(0, sigma^2 I)")
    p.add_argument("--sigma", type=float, default=1.0, help="disturbance scale (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: %(default)s)")
    _sim_options(p)

    p = sub.add_parser("montecarlo", help="compare allocation strategies on random disturbances")
    p.add_argument("input", nargs="?", help="base network for --strategies")
    _common(p, needs_input=False)
    p.add_argument("--variant", action="append", default=[], metavar="NAME=PATH",
                   help="explicit network variant; the first is the reference")
    p.add_argument("--strategies", default=None,
                   help=f"comma list from {','.join(STRATEGIES)}; the first is the reference")
    p.add_argument("--alpha", type=float, default=50.0, help="budget for allocation strategies (default: %(default)s)")
    p.add_argument("--gamma", type=float, help="cohesion arc length for 'rewired'")
    p.add_argument("--psi", type=float, help="injection radius for 'rewired'")
    p.add_argument("-N", "--samples", type=int, default=500, help="sample count (default: %(default)s)")
    p.add_argument("--sigma", type=float, default=1.0, help="disturbance scale (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: %(default)s)")
    _sim_options(p)

    p = sub.add_parser("sweep", help="largest feasible psi for each gamma, with optimal values")
    _common(p)
    p.add_argument("--gamma", type=float, nargs="+", required=True, help="arc lengths in radians")
    p.add_argument("--psi-step", type=float, default=1e-3, help="psi grid step (default: %(default)s)")
    p.add_argument("--stride", type=int, default=1,
                   help="solve every stride-th grid point; 0 solves only psi_max (default: %(default)s)")
    p.add_argument("--alpha", type=float, help="budget; omit with --rewire")
    p.add_argument("--rewire", action="store_true", help="sweep the rewiring problem")
    return parser


def _read_vector(path: str, key: str) -> np.ndarray:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc.msg}")
    if isinstance(doc, dict):
        doc = doc.get(key)
    if not isinstance(doc, list) or not all(isinstance(v, (int, float)) for v in doc):
        raise InputError(f"{path}: expected a list of numbers or an object with key {key!r}")
    return np.array(doc, dtype=float)


def _out(args, name: str) -> Path:
    return Path(args.out) / name


def cmd_reduce(args) -> int:
    g = load_graph(args.input, args.convention)
    gens = tuple(args.generators) if args.generators else g.generators
    L = build_laplacian(g)
    L_red = kron_reduce(L, gens)
    r_tot = total_effective_resistance_reduced(L, gens, args.beta)
    write_json({"generators": list(gens), "r_tot_reduced": r_tot,
                "reduced_laplacian": L_red.tolist(), "convention": args.convention},
               _out(args, "reduced.json"))
    print(f"R_tot = {r_tot:.6f}")
    return 0


def _problem(args, g):
    if args.rewire:
        if args.gamma is None or args.psi is None:
            raise InputError("--rewire needs --gamma and --psi")
        return design_problem(g, 0.0, args.beta, args.gamma, args.psi, rewire=True)
    if args.alpha is None:
        raise InputError("--alpha is required unless --rewire is given")
    return design_problem(g, args.alpha, args.beta, args.gamma, args.psi)


def cmd_optimize(args) -> int:
    g = load_graph(args.input, args.convention)
    prob = _problem(args, g)
    res = solve_rewire(prob) if args.rewire else solve(prob)
    write_results(res, "json", _out(args, "optimization.json"))
    write_results(res, "csv", _out(args, "optimization.csv"))
    print(f"R_tot = {res.r_tot_reduced:.6f}  lambda2 = {res.lambda2:.6f}  budget_used = {res.budget_used:.6f}")
    return 0


def cmd_certify(args) -> int:
    g = load_graph(args.input, args.convention)
    L = build_laplacian(g)
    p = _read_vector(args.p_file, "p") if args.p_file else None
    psi = args.psi if p is None else float(np.linalg.norm(p))
    spec = CohesionSpec.for_graph(g, args.gamma, psi)
    certs = certify_all(L, spec, p)
    report = {"gamma": args.gamma, "psi": psi, "b_norm": spec.b_norm,
              "certificates": {k: {"holds": c.holds, "margin": c.margin, "threshold": c.threshold}
                               for k, c in certs.items()}}
    infeasible = False
    if args.alpha is not None:
        prob = DesignProblem(g, args.alpha, beta=args.beta)
        lmax = maximize_lambda2(prob)
        tau = lmi_threshold(spec)
        infeasible = lmax.value < tau - 1e-8
        report["design"] = {"alpha": args.alpha, "max_lambda2": lmax.value, "tau": tau,
                            "feasible": not infeasible}
    write_json(report, _out(args, "certificate.json"))
    for k, c in certs.items():
        print(f"{k}: {'holds' if c.holds else 'fails'} (margin {c.margin:.6g})")
    if infeasible:
        raise Infeasible(f"no allocation of budget {args.alpha} reaches lambda_2 >= {tau:.6g}",
                         report["design"]["max_lambda2"], tau)
    return 0


def _sim_config(args) -> SimulationConfig:
    return SimulationConfig(dt=args.dt, horizon=args.horizon, newton_tol=args.newton_tol,
                            integrator=args.integrator)


def cmd_simulate(args) -> int:
    g = load_graph(args.input, args.convention)
    cfg = _sim_config(args)
    if args.u0_file:
        u0 = _read_vector(args.u0_file, "u0")
    else:
        u0 = sample_disturbances(g.k, 1, args.sigma, args.seed)[0]
    traj = simulate_dae(g, u0, cfg=cfg)
    cols = ["t"] + [f"delta_{v}" for v in g.generators] + [f"omega_{v}" for v in g.generators]
    rows = ({"t": t, **{f"delta_{v}": a for v, a in zip(g.generators, dg)},
             **{f"omega_{v}": w for v, w in zip(g.generators, wg)}}
            for t, dg, wg in zip(traj.times, traj.delta_gen, traj.omega_gen))
    write_csv(rows, cols, _out(args, "trajectory.csv"))
    norms = {"norm_omega": finite_horizon_l2(traj, "omega"),
             "norm_omega_tilde": finite_horizon_l2(traj, "omega_tilde"),
             "u0": u0.tolist(), "dt": cfg.dt, "horizon": cfg.horizon}
    write_json(norms, _out(args, "simulation.json"))
    print(f"||omega|| = {norms['norm_omega']:.6g}  ||omega_tilde|| = {norms['norm_omega_tilde']:.6g}")
    return 0


def strategy_variants(g, names, alpha, beta=1.0, gamma=None, psi=None, seed=0) -> dict:
    """Network variants for named allocation strategies."""
    out = {}
    for name in names:
        if name == "optimal":
            res = solve(DesignProblem(g, alpha, beta=beta))
            out[name] = g.with_weights(g.weights + res.x_star)
        elif name == "proportional":
            out[name] = g.with_weights(g.weights + allocate_proportional(g, alpha))
        elif name == "uniform":
            out[name] = g.with_weights(g.weights + allocate_uniform(g, alpha))
        elif name == "random":
            out[name] = g.with_weights(g.weights + allocate_random_dirichlet(g, alpha, seed))
        elif name == "original":
            out[name] = g
        elif name == "rewired":
            if gamma is None or psi is None:
                raise InputError("strategy 'rewired' needs --gamma and --psi")
            prob = design_problem(g, 0.0, beta, gamma, psi, rewire=True)
            out[name] = prob.design_graph(solve_rewire(prob).x_star)
        else:
            raise InputError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}")
    return out


def cmd_montecarlo(args) -> int:
    if args.variant and args.strategies:
        raise InputError("use either --variant or --strategies")
    if args.variant:
        variants = {}
        for spec in args.variant:
            if "=" not in spec:
                raise InputError(f"--variant expects NAME=PATH, got {spec!r}")
            name, path = spec.split("=", 1)
            variants[name] = load_graph(path, args.convention)
    else:
        if args.input is None:
            raise InputError("montecarlo needs an input network with --strategies")
        names = (args.strategies or "optimal,proportional,uniform,random").split(",")
        g = load_graph(args.input, args.convention)
        variants = strategy_variants(g, names, args.alpha, args.beta, args.gamma, args.psi, args.seed)
    rep = monte_carlo_compare(variants, args.samples, args.sigma, args.seed, _sim_config(args))
    write_csv(rep.rows(), MONTECARLO_COLUMNS, _out(args, "montecarlo.csv"))
    write_json(rep.summary(), _out(args, "montecarlo.json"))
    for s in rep.strategies:
        if s != rep.reference:
            c = rep.comparison(s)
            print(f"{rep.reference} vs {s}: mean reduction {c['mean_reduction_pct']:.2f}%  "
                  f"win rate {100 * c['win_rate']:.1f}%")
    return 0


def cmd_sweep(args) -> int:
    g = load_graph(args.input, args.convention)
    if args.rewire:
        prob = design_problem(g, 0.0, args.beta, rewire=True)
    elif args.alpha is not None:
        prob = design_problem(g, args.alpha, args.beta)
    else:
        raise InputError("sweep needs --alpha or --rewire")
    points, summary = [], []
    for gamma in args.gamma:
        res = max_feasible_psi(prob, gamma, args.psi_step, stride=args.stride)
        points.extend(res.points)
        at_max = res.points[-1].r_tot_reduced if res.points else None
        summary.append({"gamma": gamma, "psi_max": res.psi_max, "max_lambda2": res.max_lambda2,
                        "r_tot_at_psi_max": at_max})
        print(f"gamma = {gamma:.6g}: psi_max = {res.psi_max:.6g}"
              + (f"  R_tot = {at_max:.6f}" if at_max is not None else ""))
    write_results(points, "csv", _out(args, "sweep.csv"))
    write_json({"psi_step": args.psi_step, "gammas": summary}, _out(args, "sweep.json"))
    return 0


COMMANDS = {"reduce": cmd_reduce, "optimize": cmd_optimize, "certify": cmd_certify,
            "simulate": cmd_simulate, "montecarlo": cmd_montecarlo, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except KronSyncError as exc:
        print(f"kronsync {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
