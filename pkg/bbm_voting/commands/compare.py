"""compare subcommand: Monte Carlo against the PDE oracle, point by point."""

import argparse

import numpy as np
import pandas as pd

from bbm_voting.commands.common import (
    add_estimate_flags,
    add_model_flags,
    add_run_flags,
    banner,
    config_from_args,
    console,
    resolve_representation,
    run_estimates,
)
from bbm_voting.errors import AcceptanceFailure
from bbm_voting.output import format_rows, frame_records, write_csv, write_summary
from bbm_voting.pde import solve

COMPARE_FIELDS = ('f', 'model', 'representation', 'rate', 'arity', 'datum', 't', 'x', 'n', 'seed',
                  'mode', 'ci', 'workers', 'tolerance', 'output', 'summary')

SOLVER_FLAGS = {'dx': 'solver.dx', 'x_min': 'solver.x_min', 'x_max': 'solver.x_max', 'dt': 'solver.dt'}


def comparison_frame(xs, t, estimates, oracle, tolerance: float) -> pd.DataFrame:
    """Per-point z-scores; a point passes when |mc - pde| <= 3 se + tolerance."""
    frame = pd.DataFrame({
        'x': np.asarray(xs, dtype=float),
        't': np.full(len(xs), float(t)),
        'mc': [e.mean for e in estimates],
        'std_error': [e.std_error for e in estimates],
        'pde': np.asarray(oracle, dtype=float),
    })
    frame['z'] = [e.z_score(p) for e, p in zip(estimates, oracle)]
    frame['pass'] = [e.agrees_with(p, 3.0, tolerance) for e, p in zip(estimates, oracle)]
    return frame


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = config_from_args(args, COMPARE_FIELDS, SOLVER_FLAGS)
    rep = resolve_representation(cfg)
    datum = cfg.initial_datum()
    xs = cfg.x_values()

    banner(f"COMPARE: {rep.model_id} ({rep.kind}) vs PDE")
    console.print(f"t = {cfg.t:g}, {len(xs)} points, {cfg.n} replicates each, seed {cfg.seed}\n", markup=False)
    estimates = run_estimates(rep, cfg, datum, xs)
    field = solve(rep.f, datum, cfg.solver.grid(), cfg.t, cfg.solver.solver_config())
    oracle = [field.at(x) for x in xs]

    frame = comparison_frame(xs, cfg.t, estimates, oracle, cfg.tolerance)
    for line in format_rows(frame, ['x', 'mc', 'std_error', 'pde', 'z', 'pass']):
        console.print(line, markup=False)

    items = {**cfg.header_items(), 'representation': rep.kind, 'model_id': rep.model_id}
    if cfg.output:
        write_csv(frame, cfg.output, 'compare', items)
        console.print(f"\n✓ Comparison written to {cfg.output}", markup=False)
    if cfg.summary:
        write_summary(cfg.summary, 'compare', items, frame_records(frame),
                      {'all_pass': bool(frame['pass'].all())})

    failed = frame.loc[~frame['pass'], 'x'].tolist()
    if failed:
        console.print(f"\n❌ {len(failed)} point(s) outside 3 SE + {cfg.tolerance:g}: {failed}", markup=False)
        if args.assert_agreement:
            raise AcceptanceFailure(f"Monte Carlo and PDE disagree at x = {failed}")
    else:
        console.print(f"\n✓ All {len(xs)} points agree within 3 SE + {cfg.tolerance:g}", markup=False)
    return 0


def register(subparsers) -> None:
    p = subparsers.add_parser(
        'compare',
        help='Monte Carlo estimates against the finite-difference solution',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # Allen-Cahn: ternary majority voting against the PDE, failing on disagreement
    python -m bbm_voting.cli compare --f allen-cahn --t 1 --x -2:2:9 --n 100000 --seed 7 --assert

    # Heat equation with a mixed offspring law
    python -m bbm_voting.cli compare --f heat --param offspring=2:0.5,3:0.5 --x=-2:2:5 --n 100000
        """,
    )
    add_model_flags(p)
    add_estimate_flags(p)
    p.add_argument('--tolerance', type=float, help='Solver error allowance added to 3 SE (default 2e-3)')
    p.add_argument('--dx', type=float, help='PDE grid spacing (default 0.02)')
    p.add_argument('--x-min', type=float, dest='x_min', help='PDE domain left end (default -12)')
    p.add_argument('--x-max', type=float, dest='x_max', help='PDE domain right end (default 12)')
    p.add_argument('--dt', type=float, help='PDE time step (default 0.25 dx^2)')
    p.add_argument('--assert', action='store_true', dest='assert_agreement',
                   help='Exit with status 3 if any point disagrees')
    add_run_flags(p)
    p.set_defaults(handler=cmd_compare)
