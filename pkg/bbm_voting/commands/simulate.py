"""simulate and maxdist subcommands."""

import argparse
import logging

import numpy as np
import pandas as pd

from bbm_voting.bbm import GenealogyParams, SeedScheme, dump_tree, start_point
from bbm_voting.commands.common import (
    add_estimate_flags,
    add_model_flags,
    add_run_flags,
    banner,
    config_from_args,
    console,
    parse_value,
    resolve_representation,
    run_estimates,
)
from bbm_voting.estimate import estimate_max_cdf
from bbm_voting.datums import InitialDatum
from bbm_voting.models import OffspringDistribution, mckean_nonlinearity
from bbm_voting.output import (
    estimate_frame,
    estimate_record,
    format_rows,
    frame_records,
    write_csv,
    write_summary,
)
from bbm_voting.pde import solve

logger = logging.getLogger(__name__)

ESTIMATE_FIELDS = ('f', 'model', 'representation', 'rate', 'arity', 'datum', 't', 'x', 'n', 'seed',
                   'mode', 'ci', 'workers', 'output', 'summary')


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = config_from_args(args, ESTIMATE_FIELDS)
    rep = resolve_representation(cfg)
    datum = cfg.initial_datum()
    xs = cfg.x_values()

    if args.dump_tree:
        model = rep.model
        rate, offspring = ((rep.decomposition.rate, rep.decomposition.offspring)
                           if model is None else (model.rate, model.offspring))
        params = GenealogyParams(rate, offspring)
        text = dump_tree(params, cfg.t, start_point(xs[0]), SeedScheme(cfg.seed))
        if args.dump_tree == '-':
            console.print(text, markup=False, end='')
        else:
            with open(args.dump_tree, 'w') as fh:
                fh.write(text)
            console.print(f"✓ Tree for replicate 0 written to {args.dump_tree}", markup=False)
        return 0

    banner(f"MONTE CARLO: {rep.model_id} ({rep.kind})")
    console.print(f"t = {cfg.t:g}, {len(xs)} points, {cfg.n} replicates each, seed {cfg.seed}\n", markup=False)
    estimates = run_estimates(rep, cfg, datum, xs)
    frame = estimate_frame(xs, cfg.t, estimates, rep.model_id)
    for line in format_rows(frame, ['x', 'mean', 'std_error', 'ci_low', 'ci_high']):
        console.print(line, markup=False)

    items = {**cfg.header_items(), 'representation': rep.kind, 'model_id': rep.model_id}
    if cfg.output:
        write_csv(frame, cfg.output, 'simulate', items)
        console.print(f"\n✓ Estimates written to {cfg.output}", markup=False)
    if cfg.summary:
        results = [{'x': float(x), **estimate_record(e)} for x, e in zip(xs, estimates)]
        write_summary(cfg.summary, 'simulate', items, results)
    if any(e.heavy_tailed for e in estimates):
        console.print("\n⚠ Some recursive estimates are heavy-tailed; treat their error bars with care",
                      markup=False)
    return 0


def maxdist_frame(xs: np.ndarray, t: float, estimates, oracle: np.ndarray, tolerance: float) -> pd.DataFrame:
    frame = pd.DataFrame({
        'x': xs,
        't': np.full(xs.size, t),
        'mc': [e.mean for e in estimates],
        'std_error': [e.std_error for e in estimates],
        'pde': oracle,
    })
    frame['diff'] = frame['mc'] - frame['pde']
    frame['pass'] = frame['diff'].abs() <= 3.0 * frame['std_error'] + tolerance
    return frame


def cmd_maxdist(args: argparse.Namespace) -> int:
    cfg = config_from_args(args, ('t', 'x', 'n', 'seed', 'ci', 'workers', 'tolerance', 'output', 'summary'),
                           {'dx': 'solver.dx', 'x_min': 'solver.x_min', 'x_max': 'solver.x_max'})
    rate = args.rate if args.rate is not None else (cfg.rate or 1.0)
    offspring = OffspringDistribution(parse_value(args.offspring)) if args.offspring else OffspringDistribution.pure(2)
    params = GenealogyParams(rate, offspring)
    xs = cfg.x_values()

    banner("MAXIMUM OF BRANCHING BROWNIAN MOTION")
    console.print(f"rate {rate:g}, offspring {dict(offspring.probs)}, t = {cfg.t:g}, {cfg.n} replicates\n",
                  markup=False)
    estimates = estimate_max_cdf(params, cfg.t, xs, cfg.n, cfg.seed, cfg.workers, cfg.ci)

    # P(M_t > x) solves the McKean equation with datum 1(x < 0)
    f = mckean_nonlinearity(rate, offspring)
    field = solve(f, InitialDatum.step(0.0), cfg.solver.grid(), cfg.t, cfg.solver.solver_config())
    oracle = np.array([field.at(x) for x in xs])

    frame = maxdist_frame(xs, cfg.t, estimates, oracle, cfg.tolerance)
    for line in format_rows(frame, ['x', 'mc', 'std_error', 'pde', 'pass']):
        console.print(line, markup=False)

    items = {**cfg.header_items(), 'rate': rate, 'offspring': dict(offspring.probs)}
    if cfg.output:
        write_csv(frame, cfg.output, 'maxdist', items)
        console.print(f"\n✓ Curve written to {cfg.output}", markup=False)
    if cfg.summary:
        write_summary(cfg.summary, 'maxdist', items, frame_records(frame))
    return 0


def register(subparsers) -> None:
    p = subparsers.add_parser(
        'simulate',
        help='Monte Carlo estimates of u(t, x) on an x-grid',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # Heat equation through the unbiased voting model
    python -m bbm_voting.cli simulate --f heat --t 1 --x=-2:2:5 --n 100000 --seed 1

    # Fisher-KPP through the recursive representation
    python -m bbm_voting.cli simulate --f "u - u^2" --representation recursive --t 0.5

    # Print one genealogy instead of estimating
    python -m bbm_voting.cli simulate --f allen-cahn --t 2 --dump-tree -
        """,
    )
    add_model_flags(p)
    add_estimate_flags(p)
    add_run_flags(p)
    p.add_argument('--dump-tree', metavar='PATH', help='Write the tree of replicate 0 ("-" for stdout) and exit')
    p.set_defaults(handler=cmd_simulate)

    p = subparsers.add_parser('maxdist', help='P(max of BBM at t > x) against the McKean PDE solution')
    p.add_argument('--t', type=float, help='Time (default 1)')
    p.add_argument('--x', help='Levels x: min:max:count, a number, or a comma list')
    p.add_argument('--n', type=int, help='Replicates')
    p.add_argument('--seed', type=int, help='Master seed')
    p.add_argument('--rate', type=float, help='Branch rate (default 1)')
    p.add_argument('--offspring', metavar='K:P,...', help='Offspring law (default binary)')
    p.add_argument('--ci', choices=['normal', 'wilson'])
    p.add_argument('--workers', type=int)
    p.add_argument('--tolerance', type=float, help='Solver error allowance (default 2e-3)')
    p.add_argument('--dx', type=float, help='PDE grid spacing')
    p.add_argument('--x-min', type=float, dest='x_min', help='PDE domain left end')
    p.add_argument('--x-max', type=float, dest='x_max', help='PDE domain right end')
    add_run_flags(p)
    p.set_defaults(handler=cmd_maxdist)
