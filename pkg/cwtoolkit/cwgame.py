#!/usr/bin/env python
"""
Command-line front end of cwtoolkit.

Solves, simulates, perturbs and assesses multi-echelon scenarios, emits
taxonomy templates and reproduces the paradox constructions.

Example:
    cwgame validate campaign.json
    cwgame solve @redcyber-small -e 0.5 -t 1e-6 -o report.json
    cwgame simulate @redcyber-small -s 42 -m 100 -o traj.h5
    cwgame perturb @strategic-test --site policy.budget --delta 1
    cwgame assess @decoy-sacrifice
    cwgame template escalatory -o skeleton.json
    cwgame paradox parrondo --steps 1000000
    cwgame paradox braess --demand 4000

Exit codes:
    0 success, 1 invalid input or usage, 2 solver failure or
    non-convergence, 3 internal error.

Notes:
    Relative output paths are written under $CWTOOLKIT_OUTDIR when set.

"""
import argparse
import logging
import os
import sys
from datetime import datetime

import numpy as np
import pandas as pd
import pydantic

from . import __version__
from .errors import CwError, ParseError, ScenarioValidationError, UnknownCategory
from .meta import (assess, find_warfare_equilibrium, hylomorphism_report, parse_site,
                   perturb_and_propagate, refresh)
from .meta.equilibrium import coords
from .operational import simulate_batch, trajectories_to_arrays
from .paradox import (ParrondoSpec, braess_delta, classic_braess_network, parrondo_drift,
                      parrondo_simulate, wardrop_equilibrium)
from .scenario import (build_report, emit_report, emit_scenario, instantiate_template,
                       load_scenario)
from .technical import ECHELONS
from .utils import print_args, save_h5, sup_norm

logger = logging.getLogger("cwgame")

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """Parser that raises instead of exiting, so usage maps to exit code 1."""

    def error(self, message):
        raise UsageError("%s\n%s" % (self.format_usage().strip(), message))


def get_args(argv=None):
    """ Get command-line arguments. """
    parser = ArgumentParser(
            prog='cwgame',
            description='Multi-echelon cyber-warfare games: solve, simulate, assess.')
    parser.add_argument(
            '-v', dest='verbose', action='count',
            help='verbosity (-v info, -vv debug)',
            default=0)
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    def scenario_parser(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument(
                'scenario', metavar='file', type=str,
                help='scenario document (JSON) or @builtin name')
        return p

    def solver_flags(p):
        p.add_argument(
                '-e', '--eta', metavar='eta', dest='eta', type=float,
                help='damping in (0, 1] (default: scenario solver section)',
                default=None)
        p.add_argument(
                '-t', '--tol', metavar='tol', dest='tol', type=float,
                help='fixed-point tolerance (sup-norm)',
                default=None)
        p.add_argument(
                '-i', '--max-iter', metavar='n', dest='max_iter', type=int,
                help='maximum number of sweeps',
                default=None)
        p.add_argument(
                '-n', '--njobs', metavar='njobs', dest='njobs', type=int,
                help='parallel jobs for per-operation solves',
                default=None)

    scenario_parser('validate', 'check a scenario document')

    p = scenario_parser('solve', 'find the warfare equilibrium')
    solver_flags(p)
    p.add_argument(
            '-o', '--out', metavar='ofile', dest='out', type=str,
            help='write the machine report here',
            default=None)
    p.add_argument(
            '-f', '--format', dest='format', type=str,
            help='report format printed to stdout',
            choices=('human_text', 'machine'), default='human_text')
    p.add_argument(
            '-p', '--plot', metavar='png', dest='plot', type=str,
            help='save the residual trace plot',
            default=None)

    p = scenario_parser('simulate', 'sample operational trajectories at the equilibrium')
    solver_flags(p)
    p.add_argument(
            '-s', '--seed', metavar='seed', dest='seed', type=int,
            help='first seed (default: scenario solver section)',
            default=None)
    p.add_argument(
            '-m', '--trajectories', metavar='m', dest='trajectories', type=int,
            help='trajectories per operation',
            default=None)
    p.add_argument(
            '-o', '--out', metavar='ofile', dest='out', type=str,
            help='write trajectories to HDF5',
            default=None)

    p = scenario_parser('perturb', 'shock a converged equilibrium and re-converge')
    solver_flags(p)
    p.add_argument(
            '--site', metavar='path', dest='site', type=str, required=True,
            help='perturbation site, e.g. policy.budget or tech.cost_factor')
    p.add_argument(
            '--delta', metavar='x', dest='delta', type=float, required=True,
            help='signed perturbation size')

    p = scenario_parser('assess', 'stability, dominance and winning verdicts')
    solver_flags(p)
    p.add_argument(
            '--shock-set', metavar='name', dest='shock_set', type=str,
            help='declared shock set (default: all)',
            default=None)
    p.add_argument(
            '-o', '--out', metavar='ofile', dest='out', type=str,
            help='write the machine report here',
            default=None)

    p = sub.add_parser('template', help='emit a taxonomy scenario skeleton')
    p.add_argument(
            'category', metavar='category', type=str,
            help='asymmetric, symmetric or escalatory')
    p.add_argument(
            '-o', '--out', metavar='ofile', dest='out', type=str,
            help='write the skeleton here',
            default=None)

    p = sub.add_parser('paradox', help='Parrondo and Braess reproductions')
    psub = p.add_subparsers(dest='paradox', metavar='paradox')
    psub.required = True
    pp = psub.add_parser('parrondo', help='capital-dependent Parrondo games')
    pp.add_argument('--epsilon', dest='epsilon', type=float, default=0.005,
                    help='bias subtracted from every win probability')
    pp.add_argument('--gamma', dest='gamma', type=float, default=0.5,
                    help='probability of playing A in the random mixture')
    pp.add_argument('--schedule', dest='schedule', type=str, default=None,
                    help='periodic alternation to add, e.g. AABB')
    pp.add_argument('--steps', dest='steps', type=int, default=0,
                    help='Monte Carlo steps (0: exact drift only)')
    pp.add_argument('--seed', dest='seed', type=int, default=0,
                    help='Monte Carlo seed')
    pb = psub.add_parser('braess', help='Wardrop equilibria with and without the shortcut')
    pb.add_argument('--demand', dest='demand', type=float, default=4000.0,
                    help='origin-destination demand')

    return parser.parse_args(argv)


def out_path(path):
    outdir = os.environ.get("CWTOOLKIT_OUTDIR")
    if outdir and not os.path.isabs(path):
        return os.path.join(outdir, path)
    return path


def _write(path, text):
    path = out_path(path)
    with open(path, "w") as f:
        f.write(text)
    print("output ->", path, file=sys.stderr)


def _solve(args, scn):
    eta = scn.solver.damping if args.eta is None else args.eta
    tol = scn.solver.tolerance if args.tol is None else args.tol
    max_iter = scn.solver.max_iter if args.max_iter is None else args.max_iter
    print("solving %s (eta=%g, tol=%g, max_iter=%d) ..." % (scn.metadata.name, eta, tol, max_iter),
          file=sys.stderr)
    config, trace = find_warfare_equilibrium(scn, eta, tol, max_iter, n_jobs=args.njobs)
    print("converged: %s after %d iterations (residual %.3e)"
          % (str(trace.converged).lower(), trace.iterations, trace.final_residual), file=sys.stderr)
    return config, trace, (eta, tol, max_iter)


def plot_trace(trace, fname):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig = plt.figure(figsize=(6, 4))
    plt.semilogy(np.arange(1, trace.iterations + 1), np.maximum(trace.residuals, 1e-300), "-o",
                 markersize=3)
    plt.xlabel("iteration")
    plt.ylabel("sup-norm residual")
    plt.title("converged" if trace.converged else "not converged")
    plt.grid(True, which="both", alpha=0.3)
    fig.savefig(out_path(fname), dpi=120, bbox_inches="tight")
    plt.close(fig)
    print("plot ->", out_path(fname), file=sys.stderr)


# --- Commands --- #


def cmd_validate(args):
    scn = load_scenario(args.scenario)
    print("valid: %s (%d operations, schema version %d)"
          % (scn.metadata.name, len(scn.operations), scn.schema_version))
    return EXIT_OK


def cmd_solve(args):
    startTime = datetime.now()
    scn = load_scenario(args.scenario)
    config, trace, (eta, tol, max_iter) = _solve(args, scn)
    hylo = hylomorphism_report(config, scn) if trace.converged else None
    timings = {"total": (datetime.now() - startTime).total_seconds()}
    report = build_report(scn, config, trace, eta, tol, max_iter, hylo=hylo, timings=timings,
                          version=__version__)

    sys.stdout.write(emit_report(report, args.format))
    if args.out:
        _write(args.out, emit_report(report, "machine"))
    if args.plot:
        plot_trace(trace, args.plot)
    print("Execution time: " + str(datetime.now() - startTime), file=sys.stderr)

    return EXIT_OK if trace.converged else EXIT_SOLVER


def cmd_simulate(args):
    scn = load_scenario(args.scenario)
    config, trace, _ = _solve(args, scn)
    seed = scn.solver.seed if args.seed is None else args.seed
    m = scn.solver.trajectories if args.trajectories is None else args.trajectories
    seeds = range(seed, seed + m)
    njobs = scn.solver.n_jobs if args.njobs is None else args.njobs

    rows, arrays = [], {}
    for op, sol in config.operational.items():
        trajs = simulate_batch(config.games[op], sol, seeds, njobs)
        data = trajectories_to_arrays(trajs)
        arrays.update({"%s/%s" % (op, k): v for k, v in data.items()})
        rows.append((op, sol.cumulative_value_d, data["cumulative"].mean(),
                     data["cumulative"].std()))

    print(pd.DataFrame(rows, columns=["operation", "value_d", "mean payoff", "std"])
          .to_string(index=False, float_format="%.6g"))
    if args.out:
        save_h5(out_path(args.out), arrays, mode="w")
        print("output ->", out_path(args.out))

    return EXIT_OK if trace.converged else EXIT_SOLVER


def cmd_perturb(args):
    scn = load_scenario(args.scenario)
    try:
        parse_site(args.site, scn)
    except ValueError as err:
        raise UsageError(str(err))
    config, trace, (eta, tol, max_iter) = _solve(args, scn)
    if not trace.converged:
        print("cannot perturb: no converged equilibrium")
        return EXIT_SOLVER

    rep = perturb_and_propagate(config, scn, args.site, args.delta, eta, tol, max_iter,
                                args.njobs)
    _, single = refresh(config, rep.scenario)
    print("single sweep after the shock moves the configuration by %.3e" % single)
    print(pd.DataFrame([(e, rep.deltas_d[e], rep.deltas_a[e]) for e in ECHELONS],
                       columns=["echelon", "delta_d", "delta_a"])
          .to_string(index=False, float_format="%.6g"))
    print("re-converged: %s after %d iterations (distance %.3e)"
          % (str(rep.converged).lower(), rep.iterations,
             sup_norm(coords(rep.config), coords(config))))

    return EXIT_OK if rep.converged else EXIT_SOLVER


def cmd_assess(args):
    startTime = datetime.now()
    scn = load_scenario(args.scenario)
    config, trace, (eta, tol, max_iter) = _solve(args, scn)
    if not trace.converged:
        print("cannot assess: no converged equilibrium")
        return EXIT_SOLVER

    if args.shock_set is None:
        shocks = [s for name in sorted(scn.shock_sets) for s in scn.shock_sets[name]]
    elif args.shock_set in scn.shock_sets:
        shocks = scn.shock_sets[args.shock_set]
    else:
        raise UsageError("unknown shock set '%s' (declared: %s)"
                         % (args.shock_set, ", ".join(sorted(scn.shock_sets)) or "none"))

    verdicts = assess(config, scn.thresholds, scn, shocks)
    report = build_report(scn, config, trace, eta, tol, max_iter,
                          hylo=hylomorphism_report(config, scn), verdicts=verdicts,
                          timings={"total": (datetime.now() - startTime).total_seconds()},
                          version=__version__)
    sys.stdout.write(emit_report(report, "human_text"))
    if args.out:
        _write(args.out, emit_report(report, "machine"))

    return EXIT_OK


def cmd_template(args):
    text = emit_scenario(instantiate_template(args.category))
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_paradox(args):
    if args.paradox == "braess":
        net = classic_braess_network(args.demand)
        without, with_, delta = braess_delta(net)
        sol = wardrop_equilibrium(net)
        print(pd.DataFrame([("-".join(r), h, t) for r, h, t in zip(sol.routes, sol.flows, sol.times)],
                           columns=["route", "flow", "time"]).to_string(index=False))
        print("time without shortcut: %.6g" % without)
        print("time with shortcut:    %.6g" % with_)
        print("delta:                 %+.6g" % delta)
        return EXIT_OK

    spec = ParrondoSpec.canonical(args.epsilon, args.gamma)
    games = ["A", "B", "mixed"] + ([args.schedule] if args.schedule else [])
    rows = []
    for g in games:
        d = parrondo_drift(spec, g)
        row = [g, d, "+" if d > 0 else "-" if d < 0 else "0"]
        if args.steps > 0:
            est = parrondo_simulate(spec, g, args.steps, args.seed)
            row += [est.drift, est.stderr]
        rows.append(row)
    columns = ["game", "drift", "sign"] + (["simulated", "stderr"] if args.steps > 0 else [])
    print(pd.DataFrame(rows, columns=columns).to_string(index=False, float_format="%.6g"))

    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "perturb": cmd_perturb,
    "assess": cmd_assess,
    "template": cmd_template,
    "paradox": cmd_paradox,
}


def main(argv=None):
    try:
        args = get_args(argv)
    except UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_INVALID

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.verbose:
        print_args(args, file=sys.stderr)

    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParseError, ScenarioValidationError, UnknownCategory,
            pydantic.ValidationError) as err:
        print("error: %s" % err, file=sys.stderr)
        return EXIT_INVALID
    except (CwError, ValueError) as err:
        print("solver error: %s" % err, file=sys.stderr)
        return EXIT_SOLVER
    except Exception as err:
        logger.debug("internal error", exc_info=True)
        print("internal error: %s" % err, file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == '__main__':
    sys.exit(main())
